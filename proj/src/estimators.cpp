#include "lorenz/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lorenz/error.hpp"
#include "lorenz/summation.hpp"

namespace lorenz {

namespace {

// Shared by lorenz() and build_lorenz() so both paths round identically.
void fill_curve(std::span<const double> y, std::span<const double> mass, std::span<const double> cum_p,
                LorenzCurve& out)
{
    const std::size_t k = y.size();
    if (k == 0) {
        throw ValidationError("lorenz: empty distribution");
    }
    if (y.front() < 0.0) {
        throw ValidationError("lorenz: negative income values");
    }

    CompensatedSum total;
    for (std::size_t j = 0; j < k; ++j) {
        total.add(mass[j] * y[j]);
    }
    const double mean = total.value();
    if (!(mean > 0.0)) {
        throw DegenerateError("degenerate mean: total income is zero");
    }

    out.knots_p.resize(k + 1);
    out.values_L.resize(k + 1);
    out.knots_p[0] = 0.0;
    out.values_L[0] = 0.0;
    CompensatedSum running;
    for (std::size_t j = 0; j < k; ++j) {
        running.add(mass[j] * y[j]);
        out.knots_p[j + 1] = cum_p[j];
        out.values_L[j + 1] = std::min(running.value() / mean, 1.0);
    }
    out.knots_p[k] = 1.0;
    out.values_L[k] = 1.0;
    out.mean = mean;
}

std::size_t segment_of(std::span<const double> knots, double p)
{
    // Index j with knots[j] <= p <= knots[j + 1].
    auto it = std::upper_bound(knots.begin(), knots.end(), p);
    std::size_t j = static_cast<std::size_t>(it - knots.begin());
    j = (j == 0) ? 0 : j - 1;
    return std::min(j, knots.size() - 2);
}

inline double interpolate(double p0, double v0, double p1, double v1, double p)
{
    if (p == p0) {
        return v0;
    }
    if (p == p1) {
        return v1;
    }
    return v0 + (v1 - v0) * ((p - p0) / (p1 - p0));
}

// Walks the union of two knot sets, calling fn(p, a(p), b(p)).
template <typename Fn>
void walk_union(PolylineView a, PolylineView b, Fn&& fn)
{
    std::size_t i = 0;
    std::size_t j = 0;
    const std::size_t na = a.knots.size();
    const std::size_t nb = b.knots.size();
    while (i < na || j < nb) {
        double p;
        double va;
        double vb;
        if (j >= nb || (i < na && a.knots[i] < b.knots[j])) {
            p = a.knots[i];
            va = a.values[i];
            vb = interpolate(b.knots[j - 1], b.values[j - 1], b.knots[j], b.values[j], p);
            ++i;
        } else if (i >= na || b.knots[j] < a.knots[i]) {
            p = b.knots[j];
            vb = b.values[j];
            va = interpolate(a.knots[i - 1], a.values[i - 1], a.knots[i], a.values[i], p);
            ++j;
        } else {
            p = a.knots[i];
            va = a.values[i];
            vb = b.values[j];
            ++i;
            ++j;
        }
        fn(p, va, vb);
    }
}

} // namespace

double StepDF::operator()(double y) const
{
    auto it = std::upper_bound(knots_y.begin(), knots_y.end(), y);
    if (it == knots_y.begin()) {
        return 0.0;
    }
    return cum_p[static_cast<std::size_t>(it - knots_y.begin()) - 1];
}

double evaluate(PolylineView f, double p)
{
    require(f.knots.size() >= 2 && f.knots.size() == f.values.size(), "evaluate: malformed polyline");
    if (p <= f.knots.front()) {
        return f.values.front();
    }
    if (p >= f.knots.back()) {
        return f.values.back();
    }
    const std::size_t j = segment_of(f.knots, p);
    return interpolate(f.knots[j], f.values[j], f.knots[j + 1], f.values[j + 1], p);
}

double Polyline::operator()(double p) const
{
    return evaluate(view(), p);
}

double LorenzCurve::operator()(double p) const
{
    return evaluate(view(), p);
}

StepDF step_df(std::span<const double> y, std::span<const double> weights)
{
    require(!y.empty(), "step_df: empty sample");
    require(y.size() == weights.size(), "step_df: y and weights differ in length");
    for (std::size_t i = 0; i < y.size(); ++i) {
        require(std::isfinite(y[i]), "step_df: non-finite y value");
        require(std::isfinite(weights[i]) && weights[i] > 0.0, "step_df: weights must be finite and positive");
    }

    std::vector<std::size_t> order(y.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });

    const bool equal_weights =
        std::all_of(weights.begin(), weights.end(), [&](double w) { return w == weights.front(); });

    StepDF df;
    std::vector<double> raw;
    for (std::size_t idx : order) {
        const double w = equal_weights ? 1.0 : weights[idx];
        if (df.knots_y.empty() || y[idx] != df.knots_y.back()) {
            df.knots_y.push_back(y[idx]);
            raw.push_back(w);
        } else {
            raw.back() += w;
        }
    }

    // Integer counts are exact in double, so the equal-weight path yields
    // exactly cumulative_count / n.
    double total;
    if (equal_weights) {
        total = static_cast<double>(y.size());
    } else {
        CompensatedSum acc;
        for (double w : weights) {
            acc.add(w);
        }
        total = acc.value();
    }

    df.cum_p.resize(raw.size());
    df.mass.resize(raw.size());
    CompensatedSum running;
    for (std::size_t k = 0; k < raw.size(); ++k) {
        running.add(raw[k]);
        df.mass[k] = raw[k] / total;
        df.cum_p[k] = std::min(running.value() / total, 1.0);
    }
    df.cum_p.back() = 1.0;
    return df;
}

StepDF hajek_df(const DrawnSample& sample)
{
    require(sample.size() > 0, "hajek_df: empty sample");
    require(sample.y.size() == sample.weights.size(), "hajek_df: malformed sample");
    return step_df(sample.y, sample.weights);
}

double quantile(const StepDF& df, double p)
{
    require(p > 0.0 && p <= 1.0, "quantile: p must lie in (0, 1]");
    require(!df.cum_p.empty(), "quantile: empty distribution function");
    auto it = std::lower_bound(df.cum_p.begin(), df.cum_p.end(), p);
    if (it == df.cum_p.end()) {
        return df.knots_y.back();
    }
    return df.knots_y[static_cast<std::size_t>(it - df.cum_p.begin())];
}

LorenzCurve lorenz(const StepDF& df)
{
    require(!df.knots_y.empty(), "lorenz: empty distribution function");
    LorenzCurve curve;
    fill_curve(df.knots_y, df.mass, df.cum_p, curve);
    return curve;
}

void build_lorenz(std::span<const double> sorted_y, std::span<const double> raw_mass, LorenzCurve& out)
{
    thread_local std::vector<double> y;
    thread_local std::vector<double> mass;
    thread_local std::vector<double> cum;
    y.clear();
    mass.clear();
    cum.clear();

    CompensatedSum total;
    for (std::size_t k = 0; k < raw_mass.size(); ++k) {
        if (raw_mass[k] > 0.0) {
            y.push_back(sorted_y[k]);
            mass.push_back(raw_mass[k]);
            total.add(raw_mass[k]);
        }
    }
    require(!y.empty(), "build_lorenz: no positive mass");
    const double t = total.value();

    cum.resize(mass.size());
    CompensatedSum running;
    for (std::size_t k = 0; k < mass.size(); ++k) {
        running.add(mass[k]);
        mass[k] = mass[k] / t;
        cum[k] = std::min(running.value() / t, 1.0);
    }
    cum.back() = 1.0;
    fill_curve(y, mass, cum, out);
}

GiniEstimate gini(const LorenzCurve& curve)
{
    CompensatedSum area2;
    for (std::size_t k = 1; k < curve.knots_p.size(); ++k) {
        area2.add((curve.knots_p[k] - curve.knots_p[k - 1]) * (curve.values_L[k] + curve.values_L[k - 1]));
    }
    return {1.0 - area2.value()};
}

double sup_distance(PolylineView a, PolylineView b)
{
    double best = 0.0;
    walk_union(a, b, [&](double, double va, double vb) { best = std::max(best, std::fabs(va - vb)); });
    return best;
}

double sup_distance(const LorenzCurve& a, const LorenzCurve& b)
{
    return sup_distance(a.view(), b.view());
}

double integrate(PolylineView f)
{
    CompensatedSum area;
    for (std::size_t k = 1; k < f.knots.size(); ++k) {
        area.add(0.5 * (f.knots[k] - f.knots[k - 1]) * (f.values[k] + f.values[k - 1]));
    }
    return area.value();
}

Polyline difference(PolylineView a, PolylineView b)
{
    Polyline out;
    out.knots.reserve(a.knots.size() + b.knots.size());
    out.values.reserve(a.knots.size() + b.knots.size());
    walk_union(a, b, [&](double p, double va, double vb) {
        out.knots.push_back(p);
        out.values.push_back(va - vb);
    });
    return out;
}

void validate_curve(const LorenzCurve& c)
{
    const std::size_t k = c.knots_p.size();
    require(k >= 2 && c.values_L.size() == k, "LorenzCurve: needs at least two knots");
    require(c.knots_p.front() == 0.0 && c.knots_p.back() == 1.0, "LorenzCurve: knots must span [0, 1]");
    require(c.values_L.front() == 0.0 && c.values_L.back() == 1.0, "LorenzCurve: L(0) = 0 and L(1) = 1");
    require(c.mean > 0.0, "LorenzCurve: mean must be positive");
    double previous_slope = -1.0;
    for (std::size_t j = 1; j < k; ++j) {
        const double dp = c.knots_p[j] - c.knots_p[j - 1];
        require(dp > 0.0, "LorenzCurve: knots must be strictly increasing");
        const double slope = (c.values_L[j] - c.values_L[j - 1]) / dp;
        require(slope >= -1e-12, "LorenzCurve: curve must be nondecreasing");
        require(slope >= previous_slope - 1e-9 * std::max(1.0, std::fabs(slope)), "LorenzCurve: curve must be convex");
        require(c.values_L[j] <= c.knots_p[j] + 1e-12, "LorenzCurve: L(p) must not exceed p");
        previous_slope = slope;
    }
}

} // namespace lorenz
