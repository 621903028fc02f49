#pragma once

#include <cstdint>

#include "lorenz/data.hpp"
#include "lorenz/estimators.hpp"

namespace lorenz {

/// Superpopulation income model
///   y = (beta0 + beta1 |j|^1.2 + sigma eps)^2 + c,  j ~ N(0, xi_sd^2), eps ~ N(0, 1)
///   x = y^z_exponent * w,                           log w ~ N(w_log_mu, w_log_sigma2)
/// x is the size measure that drives the inclusion probabilities.
struct ModelConfig {
    double beta0 = 12.5;
    double beta1 = 3.0;
    double c = 4000.0;
    double sigma = 15.0;
    double xi_sd = 7.0;
    double z_exponent = 0.2;
    double w_log_mu = 0.0;
    double w_log_sigma2 = 0.025;
    std::int64_t N = 1000;

    void validate() const;

    [[nodiscard]] bool operator==(const ModelConfig&) const = default;
};

/// Pure function of (config, seed). Unit i consumes its own block of the
/// counter-based stream, so the result does not depend on evaluation order.
FinitePopulation generate_population(const ModelConfig& config, std::uint64_t seed);

/// Exact finite-population Lorenz curve L_N (all units weighted equally).
LorenzCurve population_lorenz(const FinitePopulation& population);

/// Monte Carlo stand-in for the superpopulation Lorenz curve: the exact
/// Lorenz curve of one generated population of `sample_count` units.
/// Sup-norm error is O(sample_count^{-1/2}).
LorenzCurve reference_lorenz(const ModelConfig& config, std::int64_t sample_count, std::uint64_t seed);

} // namespace lorenz
