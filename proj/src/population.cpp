#include "lorenz/population.hpp"

#include <cmath>
#include <vector>

#include "lorenz/error.hpp"
#include "lorenz/random.hpp"

namespace lorenz {

namespace {
constexpr std::uint64_t kPopulationStream = 0x706f70756c617465ull;
constexpr double kRegressorExponent = 1.2;
} // namespace

FinitePopulation::FinitePopulation(std::vector<double> y, std::vector<double> x)
    : y_(std::move(y)), x_(std::move(x))
{
    require(!y_.empty(), "population must contain at least one unit");
    require(y_.size() == x_.size(), "population: y and x differ in length");
    for (std::size_t i = 0; i < y_.size(); ++i) {
        require(std::isfinite(y_[i]) && y_[i] >= 0.0, "population: y values must be finite and nonnegative");
        require(std::isfinite(x_[i]) && x_[i] > 0.0, "population: x values must be finite and positive");
    }
}

void ModelConfig::validate() const
{
    require(N >= 1, "model: N must be at least 1");
    require(sigma >= 0.0, "model: sigma must be nonnegative");
    require(w_log_sigma2 >= 0.0, "model: w_log_sigma2 must be nonnegative");
    require(xi_sd >= 0.0, "model: xi_sd must be nonnegative");
    require(std::isfinite(beta0) && std::isfinite(beta1) && std::isfinite(c) && std::isfinite(z_exponent) &&
                std::isfinite(w_log_mu),
            "model: coefficients must be finite");
}

FinitePopulation generate_population(const ModelConfig& config, std::uint64_t seed)
{
    config.validate();
    const auto n = static_cast<std::size_t>(config.N);
    std::vector<double> y(n);
    std::vector<double> x(n);
    const double w_sd = std::sqrt(config.w_log_sigma2);

    RandomStream stream = RandomStream(seed).substream(kPopulationStream);
    for (std::size_t i = 0; i < n; ++i) {
        stream.seek(2 * static_cast<std::uint64_t>(i));
        const double j = config.xi_sd * stream.normal();
        const double eps = stream.normal();
        const double log_w = config.w_log_mu + w_sd * stream.normal();

        const double core = config.beta0 + config.beta1 * std::pow(std::fabs(j), kRegressorExponent) +
                            config.sigma * eps;
        y[i] = core * core + config.c;
        x[i] = std::pow(y[i], config.z_exponent) * std::exp(log_w);
    }
    return FinitePopulation(std::move(y), std::move(x));
}

LorenzCurve population_lorenz(const FinitePopulation& population)
{
    const std::vector<double> ones(static_cast<std::size_t>(population.size()), 1.0);
    return lorenz(step_df(population.y(), ones));
}

LorenzCurve reference_lorenz(const ModelConfig& config, std::int64_t sample_count, std::uint64_t seed)
{
    require(sample_count >= 1, "reference_lorenz: sample_count must be positive");
    ModelConfig large = config;
    large.N = sample_count;
    return population_lorenz(generate_population(large, seed));
}

} // namespace lorenz
