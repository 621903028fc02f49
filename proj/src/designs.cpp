#include "lorenz/designs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lorenz/error.hpp"
#include "lorenz/summation.hpp"

namespace lorenz {

DrawnSample DrawnSample::from_columns(std::vector<std::int64_t> indices, std::vector<double> y,
                                      std::vector<double> x, std::vector<double> pi)
{
    DrawnSample s{std::move(indices), std::move(y), std::move(x), std::move(pi), {}};
    s.weights.resize(s.pi.size());
    for (std::size_t i = 0; i < s.pi.size(); ++i) {
        s.weights[i] = 1.0 / s.pi[i];
    }
    s.validate();
    return s;
}

void DrawnSample::validate() const
{
    const std::size_t n = indices.size();
    require(y.size() == n && x.size() == n && pi.size() == n && weights.size() == n,
            "sample: columns differ in length");
    std::vector<std::int64_t> sorted(indices);
    std::sort(sorted.begin(), sorted.end());
    require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(), "sample: duplicate unit indices");
    for (std::size_t i = 0; i < n; ++i) {
        require(pi[i] > 0.0 && pi[i] <= 1.0, "sample: inclusion probabilities must lie in (0, 1]");
        require(weights[i] == 1.0 / pi[i], "sample: weights must equal 1/pi");
        require(std::isfinite(y[i]), "sample: non-finite y value");
    }
}

std::string_view to_string(DesignKind kind) noexcept
{
    switch (kind) {
    case DesignKind::Poisson: return "poisson";
    case DesignKind::Rejective: return "rejective";
    case DesignKind::Pareto: return "pareto";
    case DesignKind::Sampford: return "sampford";
    case DesignKind::SRSWOR: return "srswor";
    }
    return "unknown";
}

DesignKind parse_design_kind(std::string_view name)
{
    for (DesignKind k : {DesignKind::Poisson, DesignKind::Rejective, DesignKind::Pareto, DesignKind::Sampford,
                         DesignKind::SRSWOR}) {
        if (name == to_string(k)) {
            return k;
        }
    }
    throw ValidationError("unknown design kind '" + std::string(name) + "'");
}

bool is_fixed_size(DesignKind kind) noexcept
{
    return kind != DesignKind::Poisson;
}

std::vector<double> compute_pips(std::span<const double> x, std::span<const std::int64_t> multiplicity,
                                 std::int64_t n)
{
    require(x.size() == multiplicity.size(), "compute_pips: x and multiplicity differ in length");
    std::int64_t units = 0;
    for (std::size_t g = 0; g < x.size(); ++g) {
        require(std::isfinite(x[g]) && x[g] > 0.0, "compute_pips: size measures must be positive");
        require(multiplicity[g] >= 0, "compute_pips: negative multiplicity");
        units += multiplicity[g];
    }
    require(n >= 1, "compute_pips: n must be at least 1");
    require(n <= units, "compute_pips: n exceeds the population size");

    std::vector<double> pi(x.size(), 0.0);
    std::vector<char> capped(x.size(), 0);
    while (true) {
        std::int64_t capped_units = 0;
        CompensatedSum free_total;
        for (std::size_t g = 0; g < x.size(); ++g) {
            if (capped[g]) {
                capped_units += multiplicity[g];
            } else {
                free_total.add(static_cast<double>(multiplicity[g]) * x[g]);
            }
        }
        const double remaining = static_cast<double>(n - capped_units);
        const double denom = free_total.value();

        bool changed = false;
        for (std::size_t g = 0; g < x.size(); ++g) {
            if (capped[g] || multiplicity[g] == 0) {
                continue;
            }
            const double value = remaining * x[g] / denom;
            if (value >= 1.0) {
                capped[g] = 1;
                changed = true;
            }
            pi[g] = value;
        }
        if (!changed) {
            break;
        }
    }
    for (std::size_t g = 0; g < x.size(); ++g) {
        if (capped[g]) {
            pi[g] = 1.0;
        } else if (multiplicity[g] > 0 && !(pi[g] > 0.0)) {
            throw ValidationError("compute_pips: size measures too unequal, uncapped units get probability 0");
        }
    }
    return pi;
}

std::vector<double> compute_pips(std::span<const double> x, std::int64_t n)
{
    const std::vector<std::int64_t> ones(x.size(), 1);
    return compute_pips(x, ones, n);
}

void DesignSpec::validate() const
{
    const auto N = static_cast<std::int64_t>(pi.size());
    require(N >= 1, "design: empty population");
    require(n >= 1 && n <= N, "design: n must satisfy 1 <= n <= N");
    CompensatedSum total;
    for (double p : pi) {
        require(p > 0.0 && p <= 1.0, "design: inclusion probabilities must lie in (0, 1]");
        total.add(p);
    }
    require(std::fabs(total.value() - static_cast<double>(n)) <= 1e-9 * static_cast<double>(n),
            "design: inclusion probabilities must sum to n");
}

DesignSpec DesignSpec::proportional(DesignKind kind, std::span<const double> x, std::int64_t n)
{
    if (kind == DesignKind::SRSWOR) {
        return equal(kind, static_cast<std::int64_t>(x.size()), n);
    }
    DesignSpec spec{kind, compute_pips(x, n), n};
    spec.validate();
    return spec;
}

DesignSpec DesignSpec::equal(DesignKind kind, std::int64_t population_size, std::int64_t n)
{
    require(population_size >= 1 && n >= 1 && n <= population_size, "design: n must satisfy 1 <= n <= N");
    DesignSpec spec{kind,
                    std::vector<double>(static_cast<std::size_t>(population_size),
                                        static_cast<double>(n) / static_cast<double>(population_size)),
                    n};
    if (n == population_size) {
        std::fill(spec.pi.begin(), spec.pi.end(), 1.0);
    }
    return spec;
}

// ---------------------------------------------------------------------------
// GroupSampler

void GroupSampler::select(DesignKind kind, std::span<const double> pi, std::span<const std::int64_t> sizes,
                          std::int64_t n, RandomStream& rng, const DesignOptions& options,
                          std::vector<std::int64_t>& counts)
{
    require(pi.size() == sizes.size(), "select: pi and sizes differ in length");
    counts.assign(pi.size(), 0);
    switch (kind) {
    case DesignKind::Poisson: poisson(pi, sizes, rng, counts); break;
    case DesignKind::Rejective: rejective(pi, sizes, n, rng, options, counts); break;
    case DesignKind::Pareto: pareto(pi, sizes, n, rng, counts); break;
    case DesignKind::Sampford:
        if (options.sampford == SampfordMethod::Multinomial) {
            sampford_multinomial(pi, sizes, n, rng, options, counts);
        } else {
            sampford_cps(pi, sizes, n, rng, options, counts);
        }
        break;
    case DesignKind::SRSWOR: srswor(pi, sizes, n, rng, counts); break;
    }
}

void GroupSampler::poisson(std::span<const double> pi, std::span<const std::int64_t> sizes, RandomStream& rng,
                           std::vector<std::int64_t>& counts)
{
    for (std::size_t g = 0; g < pi.size(); ++g) {
        counts[g] = binomial(rng, sizes[g], pi[g]);
    }
}

void GroupSampler::build_tables(std::span<const double> pi, std::span<const std::int64_t> sizes)
{
    // cdf_[offsets_[g] + k] = P(Binomial(sizes[g], pi[g]) <= k)
    offsets_.resize(pi.size() + 1);
    cdf_.clear();
    for (std::size_t g = 0; g < pi.size(); ++g) {
        offsets_[g] = cdf_.size();
        const std::int64_t m = sizes[g];
        if (pi[g] >= 1.0 || m == 0) {
            continue;
        }
        const double p = pi[g];
        const double ratio = p / (1.0 - p);
        double pmf = std::exp(static_cast<double>(m) * std::log1p(-p));
        double cdf = 0.0;
        for (std::int64_t k = 0; k < m; ++k) {
            cdf += pmf;
            cdf_.push_back(cdf);
            pmf *= ratio * static_cast<double>(m - k) / static_cast<double>(k + 1);
        }
        cdf_.push_back(1.0);
    }
    offsets_[pi.size()] = cdf_.size();
}

bool GroupSampler::conditional_poisson_attempt(std::span<const double> pi, std::span<const std::int64_t> sizes,
                                               std::int64_t target, RandomStream& rng,
                                               std::vector<std::int64_t>& counts)
{
    std::int64_t total = 0;
    for (std::size_t g = 0; g < pi.size(); ++g) {
        if (pi[g] >= 1.0) {
            counts[g] = sizes[g];
        } else if (sizes[g] == 0) {
            counts[g] = 0;
        } else {
            const double u = rng.uniform();
            std::size_t k = offsets_[g];
            while (u > cdf_[k]) {
                ++k;
            }
            counts[g] = static_cast<std::int64_t>(k - offsets_[g]);
        }
        total += counts[g];
        if (total > target) {
            return false;
        }
    }
    return total == target;
}

void GroupSampler::rejective(std::span<const double> pi, std::span<const std::int64_t> sizes, std::int64_t n,
                             RandomStream& rng, const DesignOptions& options, std::vector<std::int64_t>& counts)
{
    build_tables(pi, sizes);
    for (std::int64_t attempt = 0; attempt < options.max_attempts; ++attempt) {
        if (conditional_poisson_attempt(pi, sizes, n, rng, counts)) {
            return;
        }
    }
    throw SamplingError("rejective sampling did not terminate within " + std::to_string(options.max_attempts) +
                        " attempts");
}

void GroupSampler::sampford_cps(std::span<const double> pi, std::span<const std::int64_t> sizes, std::int64_t n,
                                RandomStream& rng, const DesignOptions& options, std::vector<std::int64_t>& counts)
{
    std::int64_t forced = 0;
    for (std::size_t g = 0; g < pi.size(); ++g) {
        if (pi[g] >= 1.0) {
            forced += sizes[g];
        }
    }
    const std::int64_t free_n = n - forced;
    require(free_n >= 0, "sampford: more certainty units than n");

    build_tables(pi, sizes);
    for (std::int64_t attempt = 0; attempt < options.max_attempts; ++attempt) {
        if (!conditional_poisson_attempt(pi, sizes, n, rng, counts)) {
            continue;
        }
        if (free_n == 0) {
            return;
        }
        CompensatedSum slack;
        for (std::size_t g = 0; g < pi.size(); ++g) {
            if (pi[g] < 1.0 && counts[g] > 0) {
                slack.add(static_cast<double>(counts[g]) * (1.0 - pi[g]));
            }
        }
        if (rng.uniform() * static_cast<double>(free_n) < slack.value()) {
            return;
        }
    }
    throw SamplingError("sampford sampling did not terminate within " + std::to_string(options.max_attempts) +
                        " attempts");
}

void GroupSampler::sampford_multinomial(std::span<const double> pi, std::span<const std::int64_t> sizes,
                                        std::int64_t n, RandomStream& rng, const DesignOptions& options,
                                        std::vector<std::int64_t>& counts)
{
    std::int64_t forced = 0;
    for (std::size_t g = 0; g < pi.size(); ++g) {
        if (pi[g] >= 1.0) {
            forced += sizes[g];
            counts[g] = sizes[g];
        }
    }
    const std::int64_t free_n = n - forced;
    require(free_n >= 0, "sampford: more certainty units than n");
    if (free_n == 0) {
        return;
    }

    // cumulative_ holds two back-to-back tables: first-draw weights
    // size * pi, then with-replacement weights size * pi / (1 - pi).
    const std::size_t G = pi.size();
    cumulative_.assign(2 * G, 0.0);
    offsets_.assign(G + 1, 0);
    double first_total = 0.0;
    double odds_total = 0.0;
    for (std::size_t g = 0; g < G; ++g) {
        offsets_[g + 1] = offsets_[g] + static_cast<std::size_t>(sizes[g]);
        if (pi[g] < 1.0) {
            first_total += static_cast<double>(sizes[g]) * pi[g];
            odds_total += static_cast<double>(sizes[g]) * pi[g] / (1.0 - pi[g]);
        }
        cumulative_[g] = first_total;
        cumulative_[G + g] = odds_total;
    }

    auto pick = [&](std::size_t table) -> std::uint64_t {
        const auto begin = cumulative_.begin() + static_cast<std::ptrdiff_t>(table * G);
        const auto end = begin + static_cast<std::ptrdiff_t>(G);
        const double target = rng.uniform() * *(end - 1);
        auto it = std::upper_bound(begin, end, target);
        if (it == end) {
            --it;
        }
        auto g = static_cast<std::size_t>(it - begin);
        while (g > 0 && (sizes[g] == 0 || pi[g] >= 1.0)) {
            --g; // only reachable when rounding puts the target on the total
        }
        return offsets_[g] + rng.uniform_index(static_cast<std::uint64_t>(sizes[g]));
    };

    for (std::int64_t attempt = 0; attempt < options.max_attempts; ++attempt) {
        picked_.clear();
        picked_.push_back(pick(0));
        bool distinct = true;
        for (std::int64_t d = 1; d < free_n && distinct; ++d) {
            const std::uint64_t unit = pick(1);
            distinct = std::find(picked_.begin(), picked_.end(), unit) == picked_.end();
            picked_.push_back(unit);
        }
        if (!distinct) {
            continue;
        }
        for (std::uint64_t unit : picked_) {
            const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), static_cast<std::size_t>(unit));
            counts[static_cast<std::size_t>(it - offsets_.begin()) - 1] += 1;
        }
        return;
    }
    throw SamplingError("sampford sampling did not terminate within " + std::to_string(options.max_attempts) +
                        " attempts");
}

void GroupSampler::pareto(std::span<const double> pi, std::span<const std::int64_t> sizes, std::int64_t n,
                          RandomStream& rng, std::vector<std::int64_t>& counts)
{
    std::int64_t forced = 0;
    keys_.clear();
    owner_.clear();
    for (std::size_t g = 0; g < pi.size(); ++g) {
        if (pi[g] >= 1.0) {
            counts[g] = sizes[g];
            forced += sizes[g];
            continue;
        }
        const double inverse_odds = (1.0 - pi[g]) / pi[g];
        for (std::int64_t c = 0; c < sizes[g]; ++c) {
            const double u = rng.uniform();
            keys_.push_back(u / (1.0 - u) * inverse_odds);
            owner_.push_back(static_cast<std::uint32_t>(g));
        }
    }
    const std::int64_t free_n = n - forced;
    require(free_n >= 0, "pareto: more certainty units than n");
    if (free_n == 0) {
        return;
    }
    require(static_cast<std::size_t>(free_n) <= keys_.size(), "pareto: n exceeds the population size");

    order_.resize(keys_.size());
    std::iota(order_.begin(), order_.end(), std::uint32_t{0});
    // Ties in the ranking variable are broken by unit position.
    auto less = [&](std::uint32_t a, std::uint32_t b) { return keys_[a] < keys_[b] || (keys_[a] == keys_[b] && a < b); };
    const auto nth = order_.begin() + free_n;
    if (nth != order_.end()) {
        std::nth_element(order_.begin(), nth - 1, order_.end(), less);
    }
    for (auto it = order_.begin(); it != nth; ++it) {
        counts[owner_[*it]] += 1;
    }
}

void GroupSampler::srswor(std::span<const double> pi, std::span<const std::int64_t> sizes, std::int64_t n,
                          RandomStream& rng, std::vector<std::int64_t>& counts)
{
    std::int64_t forced = 0;
    std::int64_t pool = 0;
    for (std::size_t g = 0; g < pi.size(); ++g) {
        if (pi[g] >= 1.0) {
            counts[g] = sizes[g];
            forced += sizes[g];
        } else {
            pool += sizes[g];
        }
    }
    std::int64_t needed = n - forced;
    require(needed >= 0 && needed <= pool, "srswor: n inconsistent with the population");
    // Selection sampling: each remaining unit enters with probability
    // needed / remaining.
    for (std::size_t g = 0; g < pi.size() && needed > 0; ++g) {
        if (pi[g] >= 1.0) {
            continue;
        }
        for (std::int64_t c = 0; c < sizes[g] && needed > 0; ++c) {
            if (rng.uniform() * static_cast<double>(pool) < static_cast<double>(needed)) {
                counts[g] += 1;
                --needed;
            }
            --pool;
        }
    }
}

// ---------------------------------------------------------------------------

std::vector<std::int64_t> draw_indices(const DesignSpec& spec, RandomStream& rng, const DesignOptions& options)
{
    spec.validate();
    const std::vector<std::int64_t> ones(spec.pi.size(), 1);
    std::vector<std::int64_t> counts;
    GroupSampler sampler;
    sampler.select(spec.kind, spec.pi, ones, spec.n, rng, options, counts);
    std::vector<std::int64_t> indices;
    indices.reserve(static_cast<std::size_t>(spec.n));
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] > 0) {
            indices.push_back(static_cast<std::int64_t>(i));
        }
    }
    return indices;
}

DrawnSample draw(const FinitePopulation& population, const DesignSpec& spec, RandomStream& rng,
                 const DesignOptions& options)
{
    require(static_cast<std::int64_t>(spec.pi.size()) == population.size(),
            "draw: design and population sizes differ");
    std::vector<std::int64_t> indices = draw_indices(spec, rng, options);
    std::vector<double> y, x, pi;
    y.reserve(indices.size());
    x.reserve(indices.size());
    pi.reserve(indices.size());
    for (std::int64_t i : indices) {
        const auto u = static_cast<std::size_t>(i);
        y.push_back(population.y()[u]);
        x.push_back(population.x()[u]);
        pi.push_back(spec.pi[u]);
    }
    return DrawnSample::from_columns(std::move(indices), std::move(y), std::move(x), std::move(pi));
}

DrawnSample draw(const FinitePopulation& population, const DesignSpec& spec, std::uint64_t seed,
                 const DesignOptions& options)
{
    RandomStream rng(seed);
    return draw(population, spec, rng, options);
}

namespace {
void require_kind(const DesignSpec& spec, DesignKind kind)
{
    require(spec.kind == kind, std::string("design spec kind must be ") + std::string(to_string(kind)));
}
} // namespace

DrawnSample draw_poisson(const FinitePopulation& population, const DesignSpec& spec, std::uint64_t seed)
{
    require_kind(spec, DesignKind::Poisson);
    return draw(population, spec, seed);
}

DrawnSample draw_rejective(const FinitePopulation& population, const DesignSpec& spec, std::uint64_t seed,
                           const DesignOptions& options)
{
    require_kind(spec, DesignKind::Rejective);
    return draw(population, spec, seed, options);
}

DrawnSample draw_pareto(const FinitePopulation& population, const DesignSpec& spec, std::uint64_t seed)
{
    require_kind(spec, DesignKind::Pareto);
    return draw(population, spec, seed);
}

DrawnSample draw_sampford(const FinitePopulation& population, const DesignSpec& spec, std::uint64_t seed,
                          const DesignOptions& options)
{
    require_kind(spec, DesignKind::Sampford);
    require(spec.n < static_cast<std::int64_t>(spec.pi.size()), "sampford: n must be smaller than N");
    return draw(population, spec, seed, options);
}

DrawnSample draw_srswor(const FinitePopulation& population, std::int64_t n, std::uint64_t seed)
{
    return draw(population, DesignSpec::equal(DesignKind::SRSWOR, population.size(), n), seed);
}

std::vector<double> empirical_inclusion(const DesignSpec& spec, std::int64_t reps, std::uint64_t seed,
                                        const DesignOptions& options)
{
    require(reps >= 1, "empirical_inclusion: reps must be at least 1");
    spec.validate();
    const std::vector<std::int64_t> ones(spec.pi.size(), 1);
    std::vector<std::int64_t> hits(spec.pi.size(), 0);
    std::vector<std::int64_t> counts;
    GroupSampler sampler;
    const RandomStream base(seed);
    for (std::int64_t r = 0; r < reps; ++r) {
        RandomStream rng = base.substream(static_cast<std::uint64_t>(r));
        sampler.select(spec.kind, spec.pi, ones, spec.n, rng, options, counts);
        for (std::size_t i = 0; i < counts.size(); ++i) {
            hits[i] += counts[i];
        }
    }
    std::vector<double> freq(hits.size());
    for (std::size_t i = 0; i < hits.size(); ++i) {
        freq[i] = static_cast<double>(hits[i]) / static_cast<double>(reps);
    }
    return freq;
}

} // namespace lorenz
