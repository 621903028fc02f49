#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lorenz/data.hpp"
#include "lorenz/designs.hpp"
#include "lorenz/estimators.hpp"
#include "lorenz/random.hpp"

namespace lorenz {

/// Multinomial pseudo-population: sample unit i is replicated
/// multiplicities[i] times. Stored run-length; sum of multiplicities is the
/// original population size N.
struct PseudoPopulation {
    std::vector<std::int64_t> multiplicities;
    DrawnSample source;

    [[nodiscard]] std::int64_t size() const noexcept;
};

/// One multinomial draw of N trials with cell probabilities w_i / sum w.
PseudoPopulation build_pseudo_population(const DrawnSample& sample, std::int64_t N, std::uint64_t seed);
PseudoPopulation build_pseudo_population(const DrawnSample& sample, std::int64_t N, RandomStream& rng);

/// Second phase: a size-n draw from the pseudo-population with inclusion
/// probabilities n x*_k / sum x* (n/N for SRSWOR). Copies of sample unit i
/// carry pseudo-unit ids offset_i, offset_i + 1, ...; copies of one unit are
/// interchangeable, so a selection of c copies is reported as the first c.
DrawnSample resample_once(const PseudoPopulation& pseudo, DesignKind kind, std::uint64_t seed,
                          const DesignOptions& options = {});
DrawnSample resample_once(const PseudoPopulation& pseudo, DesignKind kind, RandomStream& rng,
                          const DesignOptions& options = {});

struct BootstrapOptions {
    int workers = 0; ///< 0: LORENZ_WORKERS or hardware concurrency
    bool reuse_pseudo_population = false; ///< diagnostic mode: one Ph 1 for all replicates
    int max_regenerations = 100;
    DesignOptions design;
};

/// Bootstrap draws. z_values[m] = sqrt(n) sup |L*_m - L_hat|,
/// gini_pivots[m] = sqrt(n) (R*_m - R_hat).
struct ReplicateStats {
    std::vector<double> z_values;
    std::vector<double> gini_pivots;
    std::int64_t M = 0;
    std::int64_t n = 0;
    std::int64_t regenerated = 0; ///< degenerate resamples that were redrawn
};

/// Replicate m draws from the substream (seed, m), so results are identical
/// for any number of workers.
ReplicateStats bootstrap_replicates(const DrawnSample& sample, std::int64_t N, std::int64_t M,
                                    DesignKind resample_design, std::uint64_t seed,
                                    const BootstrapOptions& options = {});

/// inf{z : T(z) >= u} where T is the empirical d.f. of `values`, i.e. the
/// ceil(M u)-th order statistic.
double empirical_quantile(std::span<const double> values, double u);
double empirical_cdf(std::span<const double> values, double z);

struct BandResult {
    LorenzCurve estimate;
    Polyline lower;
    Polyline upper;
    double level = 0.0;
    double d_hat = 0.0;
    std::int64_t n = 0;

    /// Unclipped half width d_hat / sqrt(n).
    [[nodiscard]] double halfwidth() const;
    /// Integral of upper - lower over [0, 1] (the clipped band's average width).
    [[nodiscard]] double mean_clipped_width() const;
    /// True iff lower <= f <= upper everywhere on [0, 1], checked exactly on
    /// the union of knots.
    [[nodiscard]] bool contains(PolylineView f) const;
};

BandResult band_from_replicates(const LorenzCurve& estimate, const ReplicateStats& stats, double alpha);

BandResult confidence_band(const DrawnSample& sample, std::int64_t N, std::int64_t M, double alpha,
                           DesignKind resample_design, std::uint64_t seed, const BootstrapOptions& options = {});

enum class CiMethod { PivotPercentile, NormalApprox };

struct GiniCI {
    double point = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    CiMethod method = CiMethod::NormalApprox;
    double variance_hat = 0.0; ///< sample variance of the pivots (divisor M - 1)
};

GiniCI gini_ci_from_replicates(double point, const ReplicateStats& stats, double alpha, CiMethod method);

GiniCI gini_ci(const DrawnSample& sample, std::int64_t N, std::int64_t M, double alpha, CiMethod method,
               DesignKind resample_design, std::uint64_t seed, const BootstrapOptions& options = {});

/// One side of a two-population comparison. The stream tag names the
/// bootstrap substream of this arm, so swapping arms swaps streams too.
struct DominanceArm {
    const DrawnSample* sample = nullptr;
    std::int64_t N = 0;
    DesignKind design = DesignKind::Pareto;
    std::uint64_t stream_tag = 0;
};

/// Test of H0: L_first(p) >= L_second(p) for all p.
struct DominanceResult {
    Polyline phi_hat; ///< L_first - L_second
    double quantile = 0.0;
    double band_halfwidth = 0.0;
    bool reject = false;
    double alpha = 0.0;
    std::vector<double> z_values;
};

DominanceResult dominance_test(const DominanceArm& first, const DominanceArm& second, std::int64_t M, double alpha,
                               std::uint64_t seed, const BootstrapOptions& options = {});

DominanceResult dominance_test(const DrawnSample& sample1, std::int64_t N1, const DrawnSample& sample2,
                               std::int64_t N2, std::int64_t M, double alpha, DesignKind design1,
                               DesignKind design2, std::uint64_t seed, const BootstrapOptions& options = {});

} // namespace lorenz
