#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "lorenz/data.hpp"
#include "lorenz/random.hpp"

namespace lorenz {

enum class DesignKind { Poisson, Rejective, Pareto, Sampford, SRSWOR };

std::string_view to_string(DesignKind kind) noexcept;
DesignKind parse_design_kind(std::string_view name);
bool is_fixed_size(DesignKind kind) noexcept;

/// Sampford's design can be drawn two ways with the same law:
///  - Multinomial: the textbook procedure (first unit with probability pi/n,
///    n - 1 more with replacement proportional to pi/(1 - pi), restart on any
///    repeat). Acceptance decays like exp(-n^2 / 2N), so only small n work.
///  - ConditionalPoisson: Poisson sampling with parameters pi conditioned on
///    size n (law proportional to prod pi/(1 - pi)), accepted with probability
///    sum_{k in s} (1 - pi_k) / n. Acceptance stays near 1 - n/N.
enum class SampfordMethod { ConditionalPoisson, Multinomial };

struct DesignOptions {
    std::int64_t max_attempts = 1'000'000;
    SampfordMethod sampford = SampfordMethod::ConditionalPoisson;
};

struct DesignSpec {
    DesignKind kind = DesignKind::SRSWOR;
    std::vector<double> pi;
    std::int64_t n = 0;

    /// sum(pi) == n within 1e-9 n, 0 < pi <= 1, 1 <= n <= N.
    void validate() const;

    /// pi proportional to x (capped at 1), or n/N for SRSWOR.
    static DesignSpec proportional(DesignKind kind, std::span<const double> x, std::int64_t n);
    static DesignSpec equal(DesignKind kind, std::int64_t population_size, std::int64_t n);

    [[nodiscard]] bool operator==(const DesignSpec&) const = default;
};

/// pi_i = n x_i / sum x, iteratively capping units at 1 and spreading the
/// remainder over the uncapped units until every pi <= 1.
std::vector<double> compute_pips(std::span<const double> x, std::int64_t n);

/// Same rule when unit i stands for multiplicity[i] identical copies; the
/// result is the per-copy probability, and sum multiplicity * pi == n.
std::vector<double> compute_pips(std::span<const double> x, std::span<const std::int64_t> multiplicity,
                                 std::int64_t n);

/// Draws from a population in which group g consists of sizes[g]
/// interchangeable units, each with inclusion probability pi[g]. Writes the
/// number of selected units per group. A plain population is the case of
/// all sizes equal to 1. Scratch storage is kept between calls.
class GroupSampler {
public:
    void select(DesignKind kind, std::span<const double> pi, std::span<const std::int64_t> sizes, std::int64_t n,
                RandomStream& rng, const DesignOptions& options, std::vector<std::int64_t>& counts);

private:
    void poisson(std::span<const double> pi, std::span<const std::int64_t> sizes, RandomStream& rng,
                 std::vector<std::int64_t>& counts);
    bool conditional_poisson_attempt(std::span<const double> pi, std::span<const std::int64_t> sizes,
                                     std::int64_t target, RandomStream& rng, std::vector<std::int64_t>& counts);
    void build_tables(std::span<const double> pi, std::span<const std::int64_t> sizes);
    void rejective(std::span<const double> pi, std::span<const std::int64_t> sizes, std::int64_t n,
                   RandomStream& rng, const DesignOptions& options, std::vector<std::int64_t>& counts);
    void sampford_cps(std::span<const double> pi, std::span<const std::int64_t> sizes, std::int64_t n,
                      RandomStream& rng, const DesignOptions& options, std::vector<std::int64_t>& counts);
    void sampford_multinomial(std::span<const double> pi, std::span<const std::int64_t> sizes, std::int64_t n,
                              RandomStream& rng, const DesignOptions& options, std::vector<std::int64_t>& counts);
    void pareto(std::span<const double> pi, std::span<const std::int64_t> sizes, std::int64_t n, RandomStream& rng,
                std::vector<std::int64_t>& counts);
    void srswor(std::span<const double> pi, std::span<const std::int64_t> sizes, std::int64_t n, RandomStream& rng,
                std::vector<std::int64_t>& counts);

    std::vector<double> cdf_;
    std::vector<std::size_t> offsets_;
    std::vector<double> keys_;
    std::vector<std::uint32_t> owner_;
    std::vector<std::uint32_t> order_;
    std::vector<double> cumulative_;
    std::vector<std::uint64_t> picked_;
};

/// Selected unit indices (ascending) for one draw of `spec`.
std::vector<std::int64_t> draw_indices(const DesignSpec& spec, RandomStream& rng, const DesignOptions& options = {});

/// One draw of `spec` from `population`; dispatches on spec.kind.
DrawnSample draw(const FinitePopulation& population, const DesignSpec& spec, std::uint64_t seed,
                 const DesignOptions& options = {});
DrawnSample draw(const FinitePopulation& population, const DesignSpec& spec, RandomStream& rng,
                 const DesignOptions& options = {});

DrawnSample draw_poisson(const FinitePopulation& population, const DesignSpec& spec, std::uint64_t seed);
DrawnSample draw_rejective(const FinitePopulation& population, const DesignSpec& spec, std::uint64_t seed,
                           const DesignOptions& options = {});
DrawnSample draw_pareto(const FinitePopulation& population, const DesignSpec& spec, std::uint64_t seed);
DrawnSample draw_sampford(const FinitePopulation& population, const DesignSpec& spec, std::uint64_t seed,
                          const DesignOptions& options = {});
DrawnSample draw_srswor(const FinitePopulation& population, std::int64_t n, std::uint64_t seed);

/// Per-unit selection frequency over `reps` independent draws.
std::vector<double> empirical_inclusion(const DesignSpec& spec, std::int64_t reps, std::uint64_t seed,
                                        const DesignOptions& options = {});

} // namespace lorenz
