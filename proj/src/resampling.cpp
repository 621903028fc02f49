#include "lorenz/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lorenz/error.hpp"
#include "lorenz/parallel.hpp"
#include "lorenz/summation.hpp"

namespace lorenz {

namespace {

constexpr std::uint64_t kPhaseOne = 1;
constexpr std::uint64_t kPhaseTwo = 2;
constexpr std::uint64_t kSharedPseudoPopulation = 0x7368617265640000ull;

// Multinomial draw by conditional binomials: cell i receives
// Binomial(remaining, w_i / sum_{j >= i} w_j).
class SequentialMultinomial {
public:
    explicit SequentialMultinomial(std::span<const double> weights)
        : conditional_(weights.size())
    {
        CompensatedSum suffix;
        for (std::size_t i = weights.size(); i-- > 0;) {
            suffix.add(weights[i]);
            conditional_[i] = std::min(1.0, weights[i] / suffix.value());
        }
    }

    void draw(RandomStream& rng, std::int64_t trials, std::vector<std::int64_t>& out) const
    {
        out.assign(conditional_.size(), 0);
        std::int64_t remaining = trials;
        for (std::size_t i = 0; i + 1 < conditional_.size() && remaining > 0; ++i) {
            const std::int64_t k = binomial(rng, remaining, conditional_[i]);
            out[i] = k;
            remaining -= k;
        }
        out.back() += remaining;
    }

private:
    std::vector<double> conditional_;
};

void validate_bootstrap_input(const DrawnSample& sample, std::int64_t N)
{
    require(sample.size() > 0, "bootstrap: empty sample");
    sample.validate();
    require(N >= sample.size(), "bootstrap: population size N must be at least the sample size");
    for (double x : sample.x) {
        require(std::isfinite(x) && x > 0.0, "bootstrap: size measures must be positive");
    }
}

std::vector<double> resample_pips(DesignKind kind, std::span<const double> x,
                                  std::span<const std::int64_t> multiplicity, std::int64_t n, std::int64_t N)
{
    if (kind == DesignKind::SRSWOR) {
        const double p = (n == N) ? 1.0 : static_cast<double>(n) / static_cast<double>(N);
        return std::vector<double>(x.size(), p);
    }
    return compute_pips(x, multiplicity, n);
}

// Everything a replicate needs that does not change between replicates,
// plus the Ph 1 / Ph 2 / curve pipeline on the run-length representation.
class ReplicateEngine {
public:
    struct Workspace {
        std::vector<std::int64_t> multiplicity;
        std::vector<std::int64_t> counts;
        std::vector<double> mass;
        LorenzCurve curve;
        GroupSampler sampler;
    };

    ReplicateEngine(const DrawnSample& sample, std::int64_t N, DesignKind kind, const BootstrapOptions& options)
        : sample_(sample), N_(N), kind_(kind), options_(options), multinomial_(sample.weights)
    {
        validate_bootstrap_input(sample, N);
        estimate_ = lorenz(hajek_df(sample));
        estimate_gini_ = gini(estimate_).value;

        std::vector<std::size_t> order(sample.y.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return sample.y[a] < sample.y[b]; });
        knot_of_unit_.resize(order.size());
        for (std::size_t idx : order) {
            if (distinct_y_.empty() || sample.y[idx] != distinct_y_.back()) {
                distinct_y_.push_back(sample.y[idx]);
            }
            knot_of_unit_[idx] = distinct_y_.size() - 1;
        }
    }

    void prepare_shared(std::uint64_t seed)
    {
        if (!options_.reuse_pseudo_population) {
            return;
        }
        RandomStream rng = RandomStream(seed).substream(kSharedPseudoPopulation, kPhaseOne);
        multinomial_.draw(rng, N_, shared_multiplicity_);
    }

    [[nodiscard]] const LorenzCurve& estimate() const noexcept { return estimate_; }
    [[nodiscard]] double estimate_gini() const noexcept { return estimate_gini_; }
    [[nodiscard]] std::int64_t n() const noexcept { return sample_.size(); }

    // Runs replicate `stream` (already specific to the replicate index),
    // regenerating degenerate resamples. Leaves L* in ws.curve.
    void replicate(const RandomStream& stream, Workspace& ws, std::int64_t& regenerated) const
    {
        for (int attempt = 0;; ++attempt) {
            const RandomStream attempt_stream = stream.substream(static_cast<std::uint64_t>(attempt));
            if (run_once(attempt_stream, ws)) {
                return;
            }
            ++regenerated;
            if (attempt >= options_.max_regenerations) {
                throw DegenerateError("bootstrap: resample with zero total income after " +
                                      std::to_string(options_.max_regenerations) + " regenerations");
            }
        }
    }

private:
    bool run_once(const RandomStream& stream, Workspace& ws) const
    {
        const std::vector<std::int64_t>* multiplicity = &shared_multiplicity_;
        if (!options_.reuse_pseudo_population) {
            RandomStream ph1 = stream.substream(kPhaseOne);
            multinomial_.draw(ph1, N_, ws.multiplicity);
            multiplicity = &ws.multiplicity;
        }
        const std::int64_t n = sample_.size();
        const std::vector<double> pi_star = resample_pips(kind_, sample_.x, *multiplicity, n, N_);

        RandomStream ph2 = stream.substream(kPhaseTwo);
        ws.sampler.select(kind_, pi_star, *multiplicity, n, ph2, options_.design, ws.counts);

        ws.mass.assign(distinct_y_.size(), 0.0);
        bool positive_income = false;
        for (std::size_t i = 0; i < ws.counts.size(); ++i) {
            if (ws.counts[i] > 0) {
                ws.mass[knot_of_unit_[i]] += static_cast<double>(ws.counts[i]) / pi_star[i];
                positive_income = positive_income || sample_.y[i] > 0.0;
            }
        }
        if (!positive_income) {
            return false;
        }
        build_lorenz(distinct_y_, ws.mass, ws.curve);
        return true;
    }

    const DrawnSample& sample_;
    std::int64_t N_;
    DesignKind kind_;
    BootstrapOptions options_;
    SequentialMultinomial multinomial_;
    LorenzCurve estimate_;
    double estimate_gini_ = 0.0;
    std::vector<double> distinct_y_;
    std::vector<std::size_t> knot_of_unit_;
    std::vector<std::int64_t> shared_multiplicity_;
};

void require_alpha(double alpha)
{
    require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
}

// Clamps f + shift to [0, 1], inserting a knot wherever the shifted curve
// crosses a bound, so the result is exactly the clipped function.
Polyline shifted_clipped(PolylineView f, double shift)
{
    Polyline out;
    auto clamp01 = [](double v) { return std::clamp(v, 0.0, 1.0); };
    auto push = [&](double p, double v) {
        if (!out.knots.empty() && p <= out.knots.back()) {
            return;
        }
        out.knots.push_back(p);
        out.values.push_back(v);
    };
    for (std::size_t k = 0; k < f.knots.size(); ++k) {
        const double v = f.values[k] + shift;
        if (k > 0) {
            const double p0 = f.knots[k - 1];
            const double p1 = f.knots[k];
            const double v0 = f.values[k - 1] + shift;
            for (double bound : {0.0, 1.0}) {
                if ((v0 - bound) * (v - bound) < 0.0) {
                    const double p = p0 + (bound - v0) / (v - v0) * (p1 - p0);
                    if (p > p0 && p < p1) {
                        push(p, bound);
                    }
                }
            }
        }
        push(f.knots[k], clamp01(v));
    }
    return out;
}

} // namespace

std::int64_t PseudoPopulation::size() const noexcept
{
    return std::accumulate(multiplicities.begin(), multiplicities.end(), std::int64_t{0});
}

PseudoPopulation build_pseudo_population(const DrawnSample& sample, std::int64_t N, RandomStream& rng)
{
    require(sample.size() > 0, "pseudo-population: empty sample");
    require(N >= 1, "pseudo-population: N must be at least 1");
    sample.validate();
    PseudoPopulation pseudo{{}, sample};
    SequentialMultinomial(sample.weights).draw(rng, N, pseudo.multiplicities);
    return pseudo;
}

PseudoPopulation build_pseudo_population(const DrawnSample& sample, std::int64_t N, std::uint64_t seed)
{
    RandomStream rng(seed);
    return build_pseudo_population(sample, N, rng);
}

DrawnSample resample_once(const PseudoPopulation& pseudo, DesignKind kind, RandomStream& rng,
                          const DesignOptions& options)
{
    const DrawnSample& src = pseudo.source;
    const std::int64_t n = src.size();
    const std::int64_t N = pseudo.size();
    require(n >= 1 && n <= N, "resample: pseudo-population smaller than the sample");

    const std::vector<double> pi_star = resample_pips(kind, src.x, pseudo.multiplicities, n, N);
    std::vector<std::int64_t> counts;
    GroupSampler sampler;
    sampler.select(kind, pi_star, pseudo.multiplicities, n, rng, options, counts);

    std::vector<std::int64_t> ids;
    std::vector<double> y, x, pi;
    std::int64_t offset = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        for (std::int64_t c = 0; c < counts[i]; ++c) {
            ids.push_back(offset + c);
            y.push_back(src.y[i]);
            x.push_back(src.x[i]);
            pi.push_back(pi_star[i]);
        }
        offset += pseudo.multiplicities[i];
    }
    return DrawnSample::from_columns(std::move(ids), std::move(y), std::move(x), std::move(pi));
}

DrawnSample resample_once(const PseudoPopulation& pseudo, DesignKind kind, std::uint64_t seed,
                          const DesignOptions& options)
{
    RandomStream rng(seed);
    return resample_once(pseudo, kind, rng, options);
}

ReplicateStats bootstrap_replicates(const DrawnSample& sample, std::int64_t N, std::int64_t M,
                                    DesignKind resample_design, std::uint64_t seed, const BootstrapOptions& options)
{
    require(M >= 1, "bootstrap: M must be at least 1");
    ReplicateEngine engine(sample, N, resample_design, options);
    engine.prepare_shared(seed);

    ReplicateStats stats;
    stats.M = M;
    stats.n = sample.size();
    stats.z_values.resize(static_cast<std::size_t>(M));
    stats.gini_pivots.resize(static_cast<std::size_t>(M));
    const double root_n = std::sqrt(static_cast<double>(stats.n));
    const RandomStream base(seed);

    std::vector<std::int64_t> regenerated(static_cast<std::size_t>(M), 0);
    parallel_for(M, options.workers, [&](std::int64_t begin, std::int64_t end) {
        ReplicateEngine::Workspace ws;
        for (std::int64_t m = begin; m < end; ++m) {
            const auto slot = static_cast<std::size_t>(m);
            engine.replicate(base.substream(static_cast<std::uint64_t>(m)), ws, regenerated[slot]);
            stats.z_values[slot] = root_n * sup_distance(ws.curve, engine.estimate());
            stats.gini_pivots[slot] = root_n * (gini(ws.curve).value - engine.estimate_gini());
        }
    });
    stats.regenerated = std::accumulate(regenerated.begin(), regenerated.end(), std::int64_t{0});
    return stats;
}

double empirical_quantile(std::span<const double> values, double u)
{
    require(!values.empty(), "empirical_quantile: no values");
    require(u > 0.0 && u < 1.0 + 1e-15, "empirical_quantile: u must lie in (0, 1]");
    const auto M = static_cast<std::int64_t>(values.size());
    // Smallest k with k / M >= u, evaluated in the same arithmetic as T(z).
    auto k = static_cast<std::int64_t>(std::ceil(static_cast<double>(M) * u));
    k = std::clamp<std::int64_t>(k, 1, M);
    while (k > 1 && static_cast<double>(k - 1) / static_cast<double>(M) >= u) {
        --k;
    }
    while (k < M && static_cast<double>(k) / static_cast<double>(M) < u) {
        ++k;
    }
    std::vector<double> sorted(values.begin(), values.end());
    const auto nth = sorted.begin() + (k - 1);
    std::nth_element(sorted.begin(), nth, sorted.end());
    return *nth;
}

double empirical_cdf(std::span<const double> values, double z)
{
    require(!values.empty(), "empirical_cdf: no values");
    const auto below = std::count_if(values.begin(), values.end(), [z](double v) { return v <= z; });
    return static_cast<double>(below) / static_cast<double>(values.size());
}

double BandResult::halfwidth() const
{
    return d_hat / std::sqrt(static_cast<double>(n));
}

double BandResult::mean_clipped_width() const
{
    return integrate(upper.view()) - integrate(lower.view());
}

bool BandResult::contains(PolylineView f) const
{
    const Polyline above = difference(f, lower.view());
    const Polyline below = difference(upper.view(), f);
    return std::all_of(above.values.begin(), above.values.end(), [](double v) { return v >= 0.0; }) &&
           std::all_of(below.values.begin(), below.values.end(), [](double v) { return v >= 0.0; });
}

BandResult band_from_replicates(const LorenzCurve& estimate, const ReplicateStats& stats, double alpha)
{
    require_alpha(alpha);
    require(stats.M >= 1 && stats.n >= 1, "band: empty replicate set");
    BandResult band;
    band.estimate = estimate;
    band.level = 1.0 - alpha;
    band.n = stats.n;
    band.d_hat = empirical_quantile(stats.z_values, 1.0 - alpha);
    const double h = band.halfwidth();
    band.lower = shifted_clipped(estimate.view(), -h);
    band.upper = shifted_clipped(estimate.view(), h);
    return band;
}

BandResult confidence_band(const DrawnSample& sample, std::int64_t N, std::int64_t M, double alpha,
                           DesignKind resample_design, std::uint64_t seed, const BootstrapOptions& options)
{
    require_alpha(alpha);
    require(static_cast<double>(M) >= std::ceil(1.0 / alpha - 1e-9), "band: M must be at least ceil(1/alpha)");
    const ReplicateStats stats = bootstrap_replicates(sample, N, M, resample_design, seed, options);
    return band_from_replicates(lorenz(hajek_df(sample)), stats, alpha);
}

GiniCI gini_ci_from_replicates(double point, const ReplicateStats& stats, double alpha, CiMethod method)
{
    require_alpha(alpha);
    require(stats.M >= 2, "gini_ci: at least two replicates are needed");
    const double root_n = std::sqrt(static_cast<double>(stats.n));

    CompensatedSum sum;
    for (double z : stats.gini_pivots) {
        sum.add(z);
    }
    const double mean = sum.value() / static_cast<double>(stats.M);
    CompensatedSum squares;
    for (double z : stats.gini_pivots) {
        squares.add((z - mean) * (z - mean));
    }

    GiniCI ci;
    ci.point = point;
    ci.method = method;
    ci.variance_hat = squares.value() / static_cast<double>(stats.M - 1);
    if (method == CiMethod::PivotPercentile) {
        ci.lower = point - empirical_quantile(stats.gini_pivots, 1.0 - alpha / 2.0) / root_n;
        ci.upper = point - empirical_quantile(stats.gini_pivots, alpha / 2.0) / root_n;
    } else {
        const double half = normal_quantile(1.0 - alpha / 2.0) * std::sqrt(ci.variance_hat) / root_n;
        ci.lower = point - half;
        ci.upper = point + half;
    }
    return ci;
}

GiniCI gini_ci(const DrawnSample& sample, std::int64_t N, std::int64_t M, double alpha, CiMethod method,
               DesignKind resample_design, std::uint64_t seed, const BootstrapOptions& options)
{
    require_alpha(alpha);
    require(static_cast<double>(M) >= std::ceil(1.0 / alpha - 1e-9), "gini_ci: M must be at least ceil(1/alpha)");
    const ReplicateStats stats = bootstrap_replicates(sample, N, M, resample_design, seed, options);
    return gini_ci_from_replicates(gini(lorenz(hajek_df(sample))).value, stats, alpha, method);
}

DominanceResult dominance_test(const DominanceArm& first, const DominanceArm& second, std::int64_t M, double alpha,
                               std::uint64_t seed, const BootstrapOptions& options)
{
    require_alpha(alpha);
    require(M >= 1, "dominance: M must be at least 1");
    require(first.sample != nullptr && second.sample != nullptr, "dominance: missing sample");

    ReplicateEngine engine1(*first.sample, first.N, first.design, options);
    ReplicateEngine engine2(*second.sample, second.N, second.design, options);
    engine1.prepare_shared(RandomStream(seed).substream(first.stream_tag).stream_id());
    engine2.prepare_shared(RandomStream(seed).substream(second.stream_tag).stream_id());

    DominanceResult result;
    result.alpha = alpha;
    result.phi_hat = difference(engine1.estimate().view(), engine2.estimate().view());

    const auto n1 = static_cast<double>(engine1.n());
    const auto n2 = static_cast<double>(engine2.n());
    const double scale = std::sqrt(n1 * n2 / (n1 + n2));
    result.z_values.resize(static_cast<std::size_t>(M));
    const RandomStream base(seed);

    parallel_for(M, options.workers, [&](std::int64_t begin, std::int64_t end) {
        ReplicateEngine::Workspace ws1;
        ReplicateEngine::Workspace ws2;
        std::int64_t regenerated = 0;
        for (std::int64_t m = begin; m < end; ++m) {
            const RandomStream stream = base.substream(static_cast<std::uint64_t>(m));
            engine1.replicate(stream.substream(first.stream_tag), ws1, regenerated);
            engine2.replicate(stream.substream(second.stream_tag), ws2, regenerated);
            const Polyline phi_star = difference(ws1.curve.view(), ws2.curve.view());
            result.z_values[static_cast<std::size_t>(m)] = scale * sup_distance(phi_star.view(), result.phi_hat.view());
        }
    });

    result.quantile = empirical_quantile(result.z_values, 1.0 - alpha);
    result.band_halfwidth = result.quantile / scale;
    for (std::size_t k = 1; k + 1 < result.phi_hat.knots.size(); ++k) {
        if (result.phi_hat.values[k] + result.band_halfwidth < 0.0) {
            result.reject = true;
            break;
        }
    }
    return result;
}

DominanceResult dominance_test(const DrawnSample& sample1, std::int64_t N1, const DrawnSample& sample2,
                               std::int64_t N2, std::int64_t M, double alpha, DesignKind design1,
                               DesignKind design2, std::uint64_t seed, const BootstrapOptions& options)
{
    return dominance_test(DominanceArm{&sample1, N1, design1, 1}, DominanceArm{&sample2, N2, design2, 2}, M, alpha,
                          seed, options);
}

} // namespace lorenz
