#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lorenz/designs.hpp"
#include "lorenz/error.hpp"
#include "lorenz/population.hpp"
#include "lorenz/resampling.hpp"

using namespace lorenz;

namespace {

DrawnSample model_sample(std::int64_t N, std::int64_t n, DesignKind kind, std::uint64_t seed)
{
    ModelConfig config;
    config.N = N;
    const FinitePopulation pop = generate_population(config, seed);
    return draw(pop, DesignSpec::proportional(kind, pop.x(), n), seed + 1);
}

} // namespace

TEST_CASE("pseudo-population sizes and expected multiplicities")
{
    const DrawnSample s = DrawnSample::from_columns({0, 3, 5, 8}, {1, 2, 3, 4}, {1, 2, 4, 8}, {0.1, 0.2, 0.4, 0.8});
    const std::int64_t N = 20;
    double inv_total = 0.0;
    for (double p : s.pi) {
        inv_total += 1.0 / p;
    }
    std::vector<double> s1(4, 0.0), s2(4, 0.0);
    const int builds = 20000;
    const RandomStream base(12);
    for (int b = 0; b < builds; ++b) {
        RandomStream rng = base.substream(static_cast<std::uint64_t>(b));
        const PseudoPopulation pseudo = build_pseudo_population(s, N, rng);
        REQUIRE(pseudo.size() == N);
        for (std::size_t i = 0; i < 4; ++i) {
            const auto m = static_cast<double>(pseudo.multiplicities[i]);
            s1[i] += m;
            s2[i] += m * m;
        }
    }
    for (std::size_t i = 0; i < 4; ++i) {
        const double expected = N * (1.0 / s.pi[i]) / inv_total;
        const double q = (1.0 / s.pi[i]) / inv_total;
        CHECK(std::fabs(s1[i] / builds - expected) < 4.0 * std::sqrt(N * q * (1 - q) / builds));
        CHECK(s2[i] / builds - std::pow(s1[i] / builds, 2) == doctest::Approx(N * q * (1 - q)).epsilon(0.06));
    }
}

TEST_CASE("resample_once draws n pseudo-units with consistent ids")
{
    const DrawnSample s = model_sample(200, 40, DesignKind::Pareto, 3);
    const PseudoPopulation pseudo = build_pseudo_population(s, 200, 4);
    for (DesignKind kind : {DesignKind::Pareto, DesignKind::Sampford, DesignKind::Rejective, DesignKind::SRSWOR}) {
        const DrawnSample r = resample_once(pseudo, kind, 5);
        CHECK(r.size() == 40);
        CHECK(std::all_of(r.indices.begin(), r.indices.end(), [](std::int64_t i) { return i >= 0 && i < 200; }));
        CHECK(r == resample_once(pseudo, kind, 5));
    }
    const DrawnSample poisson = resample_once(pseudo, DesignKind::Poisson, 6);
    CHECK(poisson.size() > 10);
}

TEST_CASE("equal incomes give zero bootstrap statistics")
{
    const DrawnSample s = DrawnSample::from_columns({0, 1, 2, 3, 4}, {7, 7, 7, 7, 7}, {1, 2, 3, 4, 5},
                                                    {0.1, 0.2, 0.3, 0.4, 0.5});
    const ReplicateStats stats = bootstrap_replicates(s, 30, 200, DesignKind::Pareto, 1);
    CHECK(std::all_of(stats.z_values.begin(), stats.z_values.end(), [](double z) { return z == 0.0; }));
    CHECK(std::all_of(stats.gini_pivots.begin(), stats.gini_pivots.end(), [](double z) { return z == 0.0; }));
}

TEST_CASE("replicates do not depend on the worker count")
{
    const DrawnSample s = model_sample(300, 60, DesignKind::Sampford, 8);
    BootstrapOptions one;
    one.workers = 1;
    BootstrapOptions three;
    three.workers = 3;
    const ReplicateStats a = bootstrap_replicates(s, 300, 97, DesignKind::Sampford, 9, one);
    const ReplicateStats b = bootstrap_replicates(s, 300, 97, DesignKind::Sampford, 9, three);
    CHECK(a.z_values == b.z_values);
    CHECK(a.gini_pivots == b.gini_pivots);
    const ReplicateStats c = bootstrap_replicates(s, 300, 97, DesignKind::Sampford, 10, one);
    CHECK(a.z_values != c.z_values);
}

TEST_CASE("shared pseudo-population mode is reproducible")
{
    const DrawnSample s = model_sample(300, 60, DesignKind::Pareto, 8);
    BootstrapOptions shared;
    shared.reuse_pseudo_population = true;
    shared.workers = 2;
    const ReplicateStats a = bootstrap_replicates(s, 300, 50, DesignKind::Pareto, 9, shared);
    shared.workers = 1;
    const ReplicateStats b = bootstrap_replicates(s, 300, 50, DesignKind::Pareto, 9, shared);
    CHECK(a.z_values == b.z_values);
}

TEST_CASE("empirical quantile is the inf of the empirical d.f. inverse")
{
    const std::vector<double> v{5, 1, 4, 2, 3, 9, 7, 8, 6, 10};
    for (double u : {0.01, 0.1, 0.15, 0.5, 0.9, 0.95, 0.999, 1.0}) {
        // oracle: scan candidate values in increasing order
        std::vector<double> sorted(v);
        std::sort(sorted.begin(), sorted.end());
        double expected = sorted.back();
        for (double z : sorted) {
            if (empirical_cdf(v, z) >= u) {
                expected = z;
                break;
            }
        }
        CHECK(empirical_quantile(v, u) == expected);
    }
    // 1 - 0.05 is not exactly 0.95; the 950th order statistic is still wanted
    std::vector<double> thousand(1000);
    std::iota(thousand.begin(), thousand.end(), 1.0);
    CHECK(empirical_quantile(thousand, 1.0 - 0.05) == 950.0);
    CHECK(empirical_quantile(thousand, 0.05 / 2.0) == 25.0);
    CHECK_THROWS_AS(empirical_quantile(std::vector<double>{}, 0.5), ValidationError);
    CHECK_THROWS_AS(empirical_quantile(v, 0.0), ValidationError);
}

TEST_CASE("band is the clipped shift of the estimate")
{
    const DrawnSample s = model_sample(500, 100, DesignKind::Pareto, 21);
    const BandResult band = confidence_band(s, 500, 200, 0.05, DesignKind::Pareto, 22);
    CHECK(band.d_hat > 0.0);
    CHECK(band.level == doctest::Approx(0.95));
    CHECK(band.halfwidth() == doctest::Approx(band.d_hat / std::sqrt(100.0)));
    CHECK(band.contains(band.estimate.view()));
    for (int k = 0; k <= 1000; ++k) {
        const double p = k / 1000.0;
        const double e = band.estimate(p);
        CHECK(band.lower(p) == doctest::Approx(std::max(0.0, e - band.halfwidth())).epsilon(1e-12));
        CHECK(band.upper(p) == doctest::Approx(std::min(1.0, e + band.halfwidth())).epsilon(1e-12));
    }
    CHECK(band.mean_clipped_width() <= 2.0 * band.halfwidth() + 1e-15);
    CHECK(band.mean_clipped_width() > 0.0);

    // a curve leaving the band between knots is caught
    Polyline outside{{0.0, 0.5, 1.0}, {0.0, band.estimate(0.5) + 1.5 * band.halfwidth(), 1.0}};
    CHECK(!band.contains(outside.view()));

    CHECK_THROWS_AS(confidence_band(s, 500, 19, 0.05, DesignKind::Pareto, 1), ValidationError);
}

TEST_CASE("Gini intervals follow their formulas")
{
    const DrawnSample s = model_sample(500, 100, DesignKind::Sampford, 31);
    const ReplicateStats stats = bootstrap_replicates(s, 500, 400, DesignKind::Sampford, 32);
    const double point = gini(lorenz::lorenz(hajek_df(s))).value;

    double mean = 0.0;
    for (double z : stats.gini_pivots) {
        mean += z;
    }
    mean /= 400.0;
    double var = 0.0;
    for (double z : stats.gini_pivots) {
        var += (z - mean) * (z - mean);
    }
    var /= 399.0;

    const GiniCI normal = gini_ci_from_replicates(point, stats, 0.05, CiMethod::NormalApprox);
    CHECK(normal.variance_hat == doctest::Approx(var).epsilon(1e-12));
    CHECK(normal.upper - point == doctest::Approx(1.959963984540054 * std::sqrt(var / 100.0)).epsilon(1e-12));
    CHECK(point - normal.lower == doctest::Approx(normal.upper - point).epsilon(1e-12));

    std::vector<double> sorted(stats.gini_pivots);
    std::sort(sorted.begin(), sorted.end());
    const GiniCI pivot = gini_ci_from_replicates(point, stats, 0.05, CiMethod::PivotPercentile);
    CHECK(pivot.lower == doctest::Approx(point - sorted[389] / 10.0).epsilon(1e-14));
    CHECK(pivot.upper == doctest::Approx(point - sorted[9] / 10.0).epsilon(1e-14));

    const GiniCI direct = gini_ci(s, 500, 400, 0.05, CiMethod::PivotPercentile, DesignKind::Sampford, 32);
    CHECK(direct.lower == pivot.lower);
    CHECK(direct.upper == pivot.upper);
}

TEST_CASE("dominance on identical samples and arm symmetry")
{
    const DrawnSample a = model_sample(300, 60, DesignKind::Pareto, 41);
    const DrawnSample b = model_sample(300, 60, DesignKind::Pareto, 43);
    const DominanceResult same = dominance_test(a, 300, a, 300, 100, 0.05, DesignKind::Pareto, DesignKind::Pareto, 5);
    CHECK(!same.reject);
    CHECK(std::all_of(same.phi_hat.values.begin(), same.phi_hat.values.end(), [](double v) { return v == 0.0; }));

    const DominanceResult ab =
        dominance_test(DominanceArm{&a, 300, DesignKind::Pareto, 1}, DominanceArm{&b, 300, DesignKind::Pareto, 2}, 100,
                       0.05, 6);
    const DominanceResult ba =
        dominance_test(DominanceArm{&b, 300, DesignKind::Pareto, 2}, DominanceArm{&a, 300, DesignKind::Pareto, 1}, 100,
                       0.05, 6);
    CHECK(ab.z_values == ba.z_values);
    CHECK(ab.quantile == ba.quantile);
    REQUIRE(ab.phi_hat.knots == ba.phi_hat.knots);
    for (std::size_t k = 0; k < ab.phi_hat.values.size(); ++k) {
        CHECK(ab.phi_hat.values[k] == -ba.phi_hat.values[k]);
    }
}

TEST_CASE("bootstrap input validation")
{
    const DrawnSample s = model_sample(100, 20, DesignKind::Pareto, 51);
    CHECK_THROWS_AS(bootstrap_replicates(s, 10, 10, DesignKind::Pareto, 1), ValidationError);
    CHECK_THROWS_AS(bootstrap_replicates(s, 100, 0, DesignKind::Pareto, 1), ValidationError);
    const ReplicateStats stats = bootstrap_replicates(s, 100, 10, DesignKind::Pareto, 1);
    CHECK_THROWS_AS(gini_ci_from_replicates(0.2, stats, 1.5, CiMethod::NormalApprox), ValidationError);
}
