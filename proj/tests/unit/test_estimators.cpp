#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "lorenz/error.hpp"
#include "lorenz/estimators.hpp"
#include "lorenz/random.hpp"

using namespace lorenz;

namespace {

// Weighted Gini from the pairwise definition, with population-style
// normalization sum_ij w_i w_j |y_i - y_j| / (2 W^2 mean).
double pairwise_gini(const std::vector<double>& y, const std::vector<double>& w)
{
    long double W = 0, total = 0, diff = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        W += w[i];
        total += w[i] * y[i];
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
        for (std::size_t j = 0; j < y.size(); ++j) {
            diff += static_cast<long double>(w[i]) * w[j] * std::fabs(y[i] - y[j]);
        }
    }
    const long double mean = total / W;
    return static_cast<double>(diff / (2 * W * W * mean));
}

// Lorenz curve at p straight from the definition: integral of the weighted
// quantile function up to p, divided by the mean.
double lorenz_by_definition(std::vector<double> y, std::vector<double> w, double p)
{
    std::vector<std::size_t> order(y.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return y[a] < y[b]; });
    double W = 0, total = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        W += w[i];
        total += w[i] * y[i];
    }
    double acc = 0, mass = 0;
    for (std::size_t k : order) {
        const double share = w[k] / W;
        const double take = std::min(share, std::max(0.0, p - mass));
        acc += take * y[k];
        mass += share;
    }
    return acc / (total / W);
}

} // namespace

TEST_CASE("three-unit Hajek fixture")
{
    // pi = (1, 1/2, 1/2): weights 1, 2, 2
    const DrawnSample s = DrawnSample::from_columns({0, 1, 2}, {1, 2, 3}, {1, 1, 1}, {1.0, 0.5, 0.5});
    const StepDF F = hajek_df(s);
    CHECK(F.knots_y == std::vector<double>{1, 2, 3});
    CHECK(F.cum_p == std::vector<double>{0.2, 0.6, 1.0});
    const LorenzCurve L = lorenz::lorenz(F);
    CHECK(L.knots_p == std::vector<double>{0.0, 0.2, 0.6, 1.0});
    CHECK(L.values_L == std::vector<double>{0.0, 1.0 / 11.0, 5.0 / 11.0, 1.0});
    CHECK(L.mean == doctest::Approx(2.2).epsilon(1e-15));
    CHECK(gini(L).value == doctest::Approx(pairwise_gini({1, 2, 3}, {1, 2, 2})).epsilon(1e-14));
}

TEST_CASE("unweighted three units give Gini 2/9")
{
    const std::vector<double> y{1, 2, 3};
    const std::vector<double> w{1, 1, 1};
    CHECK(gini(lorenz::lorenz(step_df(y, w))).value == doctest::Approx(2.0 / 9.0).epsilon(1e-15));
}

TEST_CASE("Gini matches the pairwise formula on small weighted fixtures")
{
    RandomStream rng(2024);
    for (int trial = 0; trial < 2000; ++trial) {
        const auto size = 1 + static_cast<std::size_t>(rng.uniform_index(6));
        std::vector<double> y(size), w(size);
        for (std::size_t i = 0; i < size; ++i) {
            // occasional ties and zeros
            y[i] = rng.uniform() < 0.2 ? 0.0 : std::floor(rng.uniform() * 5.0) + rng.uniform() * (trial % 2);
            w[i] = 0.1 + 10.0 * rng.uniform();
        }
        if (*std::max_element(y.begin(), y.end()) == 0.0) {
            y[0] = 1.0;
        }
        const LorenzCurve L = lorenz::lorenz(step_df(y, w));
        validate_curve(L);
        REQUIRE(std::fabs(gini(L).value - pairwise_gini(y, w)) <= 1e-12);
        for (double p : {0.1, 0.25, 0.5, 0.8, 0.999}) {
            REQUIRE(std::fabs(L(p) - lorenz_by_definition(y, w, p)) <= 1e-12);
        }
    }
}

TEST_CASE("equal weights reproduce the unweighted empirical d.f. exactly")
{
    const std::vector<double> y{5, 1, 3, 3, 9, 1, 1};
    for (double c : {1.0, 0.3, 7.123456789, 1.0 / 3.0}) {
        const std::vector<double> w(y.size(), c);
        const StepDF F = step_df(y, w);
        CHECK(F.knots_y == std::vector<double>{1, 3, 5, 9});
        CHECK(F.cum_p == std::vector<double>{3.0 / 7.0, 5.0 / 7.0, 6.0 / 7.0, 1.0});
        CHECK(F.mass == std::vector<double>{3.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0, 1.0 / 7.0});
    }
}

TEST_CASE("equal incomes give the diagonal and zero Gini")
{
    const std::vector<double> y(17, 4.25);
    std::vector<double> w(17);
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = 1.0 + static_cast<double>(i) * 0.37;
    }
    const LorenzCurve L = lorenz::lorenz(step_df(y, w));
    CHECK(L.knots_p == std::vector<double>{0.0, 1.0});
    CHECK(L.values_L == std::vector<double>{0.0, 1.0});
    CHECK(gini(L).value == 0.0);
    for (double p : {0.0, 0.1, 0.5, 0.73, 1.0}) {
        CHECK(L(p) == p);
    }
}

TEST_CASE("scale invariance")
{
    RandomStream rng(8);
    std::vector<double> y(40), w(40);
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = rng.exponential(1.0);
        w[i] = 1.0 + rng.uniform();
    }
    const LorenzCurve base = lorenz::lorenz(step_df(y, w));
    // powers of two scale every intermediate exactly
    for (double lambda : {2.0, 0.125, 1024.0}) {
        std::vector<double> scaled(y);
        for (double& v : scaled) {
            v *= lambda;
        }
        const LorenzCurve L = lorenz::lorenz(step_df(scaled, w));
        CHECK(L.knots_p == base.knots_p);
        CHECK(L.values_L == base.values_L);
        CHECK(gini(L).value == gini(base).value);
    }
    for (double lambda : {3.7, 1e-3, 12345.678}) {
        std::vector<double> scaled(y);
        for (double& v : scaled) {
            v *= lambda;
        }
        const LorenzCurve L = lorenz::lorenz(step_df(scaled, w));
        CHECK(L.knots_p == base.knots_p);
        CHECK(sup_distance(L, base) <= 1e-14);
        CHECK(std::fabs(gini(L).value - gini(base).value) <= 1e-14);
    }
}

TEST_CASE("ties share one knot")
{
    const std::vector<double> y{2, 2, 1, 2};
    const std::vector<double> w{1, 2, 3, 4};
    const StepDF F = step_df(y, w);
    CHECK(F.knots_y == std::vector<double>{1, 2});
    CHECK(F.cum_p[0] == doctest::Approx(0.3));
    CHECK(F.cum_p[1] == 1.0);
    CHECK(F(0.5) == 0.0);
    CHECK(F(1.0) == doctest::Approx(0.3));
    CHECK(F(1.5) == doctest::Approx(0.3));
    CHECK(F(2.0) == 1.0);
}

TEST_CASE("quantile is the left-continuous inverse")
{
    const StepDF F = step_df(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 2});
    CHECK(quantile(F, 0.1) == 1.0);
    CHECK(quantile(F, 0.2) == 1.0);
    CHECK(quantile(F, 0.2000001) == 2.0);
    CHECK(quantile(F, 0.6) == 2.0);
    CHECK(quantile(F, 1.0) == 3.0);
    CHECK_THROWS_AS(quantile(F, 0.0), ValidationError);
    CHECK_THROWS_AS(quantile(F, 1.5), ValidationError);
}

TEST_CASE("polyline arithmetic is exact")
{
    const Polyline a{{0.0, 0.5, 1.0}, {0.0, 0.2, 1.0}};
    const Polyline b{{0.0, 0.25, 1.0}, {0.0, 0.25, 1.0}};
    CHECK(evaluate(a.view(), 0.25) == doctest::Approx(0.1));
    CHECK(integrate(a.view()) == doctest::Approx(0.5 * 0.5 * 0.2 + 0.5 * (0.2 + 1.0) * 0.5));
    const Polyline d = difference(a.view(), b.view());
    CHECK(d.knots == std::vector<double>{0.0, 0.25, 0.5, 1.0});
    CHECK(d.values[1] == doctest::Approx(-0.15));
    CHECK(d.values[2] == doctest::Approx(0.2 - 0.5));

    // dense-grid oracle for the sup distance
    double grid_sup = 0.0;
    for (int k = 0; k <= 100000; ++k) {
        const double p = k / 100000.0;
        grid_sup = std::max(grid_sup, std::fabs(a(p) - b(p)));
    }
    CHECK(sup_distance(a.view(), b.view()) == doctest::Approx(grid_sup).epsilon(1e-9));
    CHECK(sup_distance(a.view(), b.view()) == doctest::Approx(0.3));
}

TEST_CASE("generalized Lorenz curve scales by the mean")
{
    const LorenzCurve L = lorenz::lorenz(step_df(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 2}));
    CHECK(L.generalized(1.0) == doctest::Approx(2.2));
    CHECK(L.generalized(0.2) == doctest::Approx(0.2));
}

TEST_CASE("invalid and degenerate inputs")
{
    const std::vector<double> zeros{0, 0, 0};
    const std::vector<double> ones{1, 1, 1};
    CHECK_THROWS_AS(lorenz::lorenz(step_df(zeros, ones)), DegenerateError);
    CHECK_THROWS_AS(step_df(std::vector<double>{}, std::vector<double>{}), ValidationError);
    CHECK_THROWS_AS(step_df(ones, std::vector<double>{1, 0, 1}), ValidationError);
    CHECK_THROWS_AS(step_df(ones, std::vector<double>{1, 1}), ValidationError);
    CHECK_THROWS_AS(lorenz::lorenz(step_df(std::vector<double>{-1, 2, 3}, ones)), ValidationError);

    LorenzCurve bad{{0.0, 0.5, 1.0}, {0.0, 0.6, 1.0}, 1.0};
    CHECK_THROWS_AS(validate_curve(bad), ValidationError);
}

TEST_CASE("build_lorenz skips zero masses")
{
    LorenzCurve out;
    build_lorenz(std::vector<double>{1, 2, 3}, std::vector<double>{1, 0, 2}, out);
    CHECK(out.knots_p.size() == 3);
    CHECK(out.values_L[1] == doctest::Approx(1.0 / 7.0));
    const LorenzCurve direct = lorenz::lorenz(step_df(std::vector<double>{1, 3}, std::vector<double>{1, 2}));
    CHECK(sup_distance(out, direct) <= 1e-15);
}
