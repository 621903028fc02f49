#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lorenz/designs.hpp"
#include "lorenz/population.hpp"

namespace lorenz {

enum class CoverageTarget { Superpopulation, FinitePopulation };

std::string_view to_string(CoverageTarget target) noexcept;
CoverageTarget parse_coverage_target(std::string_view name);

/// Monte Carlo coverage study: for every population size in N_list and
/// every design, `reps` times generate a population, draw a sample of size
/// round(sampling_fraction * N), and build the Lorenz band and both Gini
/// intervals from M bootstrap replicates.
struct ExperimentConfig {
    ModelConfig model;
    std::vector<std::int64_t> N_list{300, 500, 1000};
    double sampling_fraction = 0.2;
    std::vector<DesignKind> designs{DesignKind::Pareto, DesignKind::Sampford};
    std::int64_t reps = 1000;
    std::int64_t M = 1000;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    CoverageTarget coverage_target = CoverageTarget::Superpopulation;
    std::int64_t reference_size = 1'000'000;
    std::uint64_t reference_seed = 20190501;
    int workers = 0;

    void validate() const;

    /// Desk profile: reps = M = 500. Full profile: reps = M = 1000.
    static ExperimentConfig desk();
    static ExperimentConfig full();

    [[nodiscard]] bool operator==(const ExperimentConfig&) const = default;
};

/// Binomial proportion with its standard error sqrt(p (1 - p) / trials).
struct Coverage {
    std::int64_t hits = 0;
    std::int64_t trials = 0;

    [[nodiscard]] double estimate() const;
    [[nodiscard]] double se() const;

    [[nodiscard]] bool operator==(const Coverage&) const = default;
};

struct CellReport {
    DesignKind design = DesignKind::Pareto;
    std::int64_t N = 0;
    std::int64_t n = 0;

    Coverage band_super;
    Coverage band_finite;
    double band_width = 0.0;         ///< mean of 2 d_hat / sqrt(n)
    double band_clipped_width = 0.0; ///< mean integral of (upper - lower)

    Coverage normal_super;
    Coverage normal_finite;
    double normal_width = 0.0;

    Coverage pivot_super;
    Coverage pivot_finite;
    double pivot_width = 0.0;

    double mean_variance_hat = 0.0;
    std::int64_t regenerated = 0;
    std::string error; ///< non-empty when the cell was aborted
    double elapsed_seconds = 0.0; ///< wall clock; not serialized

    [[nodiscard]] bool ok() const noexcept { return error.empty(); }
    /// Compares every serialized field (wall-clock time excluded).
    [[nodiscard]] bool operator==(const CellReport& other) const;
};

struct CoverageReport {
    ExperimentConfig config;
    double reference_gini = 0.0;
    std::vector<CellReport> cells;
    std::vector<std::string> notes;

    [[nodiscard]] const CellReport* find(DesignKind design, std::int64_t N) const;
    [[nodiscard]] bool operator==(const CoverageReport&) const = default;
};

/// Called after each finished cell; used by the CLI for progress output.
using CellCallback = void (*)(const CellReport&);

CoverageReport run_coverage_experiment(const ExperimentConfig& config, CellCallback on_cell = nullptr);

/// Sample size used for population size N.
std::int64_t sample_size_for(std::int64_t N, double sampling_fraction);

} // namespace lorenz
