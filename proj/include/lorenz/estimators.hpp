#pragma once

#include <span>
#include <vector>

#include "lorenz/data.hpp"

namespace lorenz {

/// Right-continuous step distribution function. Jump k sits at knots_y[k]
/// with size mass[k]; cum_p[k] is the running total, and cum_p.back() == 1.
struct StepDF {
    std::vector<double> knots_y;
    std::vector<double> cum_p;
    std::vector<double> mass;

    /// F(y): cum_p at the largest knot <= y, 0 below the first knot.
    [[nodiscard]] double operator()(double y) const;

    [[nodiscard]] bool operator==(const StepDF&) const = default;
};

/// Non-owning view of a piecewise-linear function on [0, 1] given by its
/// knots (strictly increasing, first 0, last 1) and the values there.
struct PolylineView {
    std::span<const double> knots;
    std::span<const double> values;
};

struct Polyline {
    std::vector<double> knots;
    std::vector<double> values;

    [[nodiscard]] PolylineView view() const noexcept { return {knots, values}; }
    [[nodiscard]] double operator()(double p) const;

    [[nodiscard]] bool operator==(const Polyline&) const = default;
};

/// Lorenz curve of a discrete distribution. Between knots the curve is
/// exactly linear: on (P_{k-1}, P_k] the quantile function is constant.
/// The generalized Lorenz curve is mean * L(p).
struct LorenzCurve {
    std::vector<double> knots_p;
    std::vector<double> values_L;
    double mean = 0.0;

    [[nodiscard]] PolylineView view() const noexcept { return {knots_p, values_L}; }
    [[nodiscard]] double operator()(double p) const;
    [[nodiscard]] double generalized(double p) const { return mean * (*this)(p); }

    [[nodiscard]] bool operator==(const LorenzCurve&) const = default;
};

struct GiniEstimate {
    double value = 0.0;
};

/// Weighted step d.f. of (y, weights). Units with tied y share one knot.
/// All-equal weights take an integer-count path, so the result is exactly
/// the unweighted empirical d.f.
StepDF step_df(std::span<const double> y, std::span<const double> weights);

/// Hajek estimator of the distribution function: weights 1/pi, normalized.
StepDF hajek_df(const DrawnSample& sample);

/// inf{y : F(y) >= p} for p in (0, 1].
double quantile(const StepDF& df, double p);

LorenzCurve lorenz(const StepDF& df);

/// 1 - 2 * integral of L, exact for the piecewise-linear representation.
GiniEstimate gini(const LorenzCurve& curve);

/// sup over [0, 1] of |a - b|. The difference is linear between the union
/// of both knot sets, so evaluating there is exact.
double sup_distance(const LorenzCurve& a, const LorenzCurve& b);
double sup_distance(PolylineView a, PolylineView b);

double evaluate(PolylineView f, double p);

/// Exact integral over [0, 1] (trapezoids are exact on linear pieces).
double integrate(PolylineView f);

/// a - b on the union of both knot sets.
Polyline difference(PolylineView a, PolylineView b);

/// Checks the LorenzCurve invariants; throws ValidationError on failure.
void validate_curve(const LorenzCurve& curve);

/// Builds a Lorenz curve from y values sorted strictly increasing and
/// nonnegative, unnormalized masses. Zero masses are skipped. `out`'s
/// storage is reused, which keeps the bootstrap loop allocation-free.
void build_lorenz(std::span<const double> sorted_y, std::span<const double> raw_mass, LorenzCurve& out);

} // namespace lorenz
