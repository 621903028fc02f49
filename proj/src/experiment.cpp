#include "lorenz/experiment.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "lorenz/error.hpp"
#include "lorenz/parallel.hpp"
#include "lorenz/resampling.hpp"
#include "lorenz/summation.hpp"

namespace lorenz {

namespace {

constexpr std::uint64_t kPopulationTag = 0x10;
constexpr std::uint64_t kSampleTag = 0x20;
constexpr std::uint64_t kBootstrapTag = 0x30;

struct RepOutcome {
    bool band_super = false;
    bool band_finite = false;
    double band_width = 0.0;
    double band_clipped_width = 0.0;
    bool normal_super = false;
    bool normal_finite = false;
    double normal_width = 0.0;
    bool pivot_super = false;
    bool pivot_finite = false;
    double pivot_width = 0.0;
    double variance_hat = 0.0;
    std::int64_t regenerated = 0;
    std::string error;
};

bool covers(const GiniCI& ci, double target)
{
    return ci.lower <= target && target <= ci.upper;
}

RepOutcome run_repetition(const ExperimentConfig& config, const FinitePopulation& population,
                          const LorenzCurve& finite_truth, double finite_gini, const LorenzCurve& reference,
                          double reference_gini, DesignKind design, std::int64_t n, std::int64_t rep)
{
    RepOutcome out;
    const std::int64_t N = population.size();
    const auto tag = static_cast<std::uint64_t>(design);
    const DesignSpec spec = DesignSpec::proportional(design, population.x(), n);
    const DrawnSample sample = draw(
        population, spec, derive_seed(config.seed, {kSampleTag, static_cast<std::uint64_t>(N), tag,
                                                    static_cast<std::uint64_t>(rep)}));

    BootstrapOptions options;
    options.workers = 1;
    const ReplicateStats stats =
        bootstrap_replicates(sample, N, config.M, design,
                             derive_seed(config.seed, {kBootstrapTag, static_cast<std::uint64_t>(N), tag,
                                                       static_cast<std::uint64_t>(rep)}),
                             options);

    const LorenzCurve estimate = lorenz(hajek_df(sample));
    const BandResult band = band_from_replicates(estimate, stats, config.alpha);
    out.band_super = band.contains(reference.view());
    out.band_finite = band.contains(finite_truth.view());
    out.band_width = 2.0 * band.halfwidth();
    out.band_clipped_width = band.mean_clipped_width();

    const double point = gini(estimate).value;
    const GiniCI normal = gini_ci_from_replicates(point, stats, config.alpha, CiMethod::NormalApprox);
    const GiniCI pivot = gini_ci_from_replicates(point, stats, config.alpha, CiMethod::PivotPercentile);
    out.normal_super = covers(normal, reference_gini);
    out.normal_finite = covers(normal, finite_gini);
    out.normal_width = normal.upper - normal.lower;
    out.pivot_super = covers(pivot, reference_gini);
    out.pivot_finite = covers(pivot, finite_gini);
    out.pivot_width = pivot.upper - pivot.lower;
    out.variance_hat = normal.variance_hat;
    out.regenerated = stats.regenerated;
    return out;
}

CellReport aggregate(DesignKind design, std::int64_t N, std::int64_t n, const std::vector<RepOutcome>& outcomes)
{
    CellReport cell;
    cell.design = design;
    cell.N = N;
    cell.n = n;
    for (const RepOutcome& o : outcomes) {
        if (!o.error.empty()) {
            cell.error = o.error;
            return cell;
        }
    }
    CompensatedSum band_width, clipped, normal_width, pivot_width, variance;
    auto tally = [](Coverage& c, bool hit) {
        ++c.trials;
        c.hits += hit ? 1 : 0;
    };
    for (const RepOutcome& o : outcomes) {
        tally(cell.band_super, o.band_super);
        tally(cell.band_finite, o.band_finite);
        tally(cell.normal_super, o.normal_super);
        tally(cell.normal_finite, o.normal_finite);
        tally(cell.pivot_super, o.pivot_super);
        tally(cell.pivot_finite, o.pivot_finite);
        band_width.add(o.band_width);
        clipped.add(o.band_clipped_width);
        normal_width.add(o.normal_width);
        pivot_width.add(o.pivot_width);
        variance.add(o.variance_hat);
        cell.regenerated += o.regenerated;
    }
    const auto reps = static_cast<double>(outcomes.size());
    cell.band_width = band_width.value() / reps;
    cell.band_clipped_width = clipped.value() / reps;
    cell.normal_width = normal_width.value() / reps;
    cell.pivot_width = pivot_width.value() / reps;
    cell.mean_variance_hat = variance.value() / reps;
    return cell;
}

} // namespace

std::string_view to_string(CoverageTarget target) noexcept
{
    return target == CoverageTarget::Superpopulation ? "superpopulation" : "finite_population";
}

CoverageTarget parse_coverage_target(std::string_view name)
{
    if (name == "superpopulation") {
        return CoverageTarget::Superpopulation;
    }
    if (name == "finite_population") {
        return CoverageTarget::FinitePopulation;
    }
    throw ValidationError("unknown coverage target '" + std::string(name) + "'");
}

double Coverage::estimate() const
{
    return trials > 0 ? static_cast<double>(hits) / static_cast<double>(trials) : 0.0;
}

double Coverage::se() const
{
    if (trials == 0) {
        return 0.0;
    }
    const double p = estimate();
    return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

bool CellReport::operator==(const CellReport& o) const
{
    return design == o.design && N == o.N && n == o.n && band_super == o.band_super &&
           band_finite == o.band_finite && band_width == o.band_width &&
           band_clipped_width == o.band_clipped_width && normal_super == o.normal_super &&
           normal_finite == o.normal_finite && normal_width == o.normal_width && pivot_super == o.pivot_super &&
           pivot_finite == o.pivot_finite && pivot_width == o.pivot_width &&
           mean_variance_hat == o.mean_variance_hat && regenerated == o.regenerated && error == o.error;
}

const CellReport* CoverageReport::find(DesignKind design, std::int64_t N) const
{
    for (const CellReport& c : cells) {
        if (c.design == design && c.N == N) {
            return &c;
        }
    }
    return nullptr;
}

std::int64_t sample_size_for(std::int64_t N, double sampling_fraction)
{
    return static_cast<std::int64_t>(std::llround(sampling_fraction * static_cast<double>(N)));
}

void ExperimentConfig::validate() const
{
    model.validate();
    require(!N_list.empty(), "experiment: N_list must not be empty");
    require(!designs.empty(), "experiment: at least one design is required");
    require(reps >= 1, "experiment: reps must be at least 1");
    require(sampling_fraction > 0.0 && sampling_fraction < 1.0, "experiment: sampling_fraction must lie in (0, 1)");
    require(alpha > 0.0 && alpha < 1.0, "experiment: alpha must lie in (0, 1)");
    require(static_cast<double>(M) >= std::ceil(1.0 / alpha - 1e-9), "experiment: M must be at least ceil(1/alpha)");
    require(reference_size >= 1, "experiment: reference_size must be positive");
    for (std::int64_t N : N_list) {
        const std::int64_t n = sample_size_for(N, sampling_fraction);
        require(n >= 1 && n < N, "experiment: sampling_fraction * N must give 1 <= n < N");
    }
}

ExperimentConfig ExperimentConfig::desk()
{
    ExperimentConfig config;
    config.reps = 500;
    config.M = 500;
    return config;
}

ExperimentConfig ExperimentConfig::full()
{
    ExperimentConfig config;
    config.reps = 1000;
    config.M = 1000;
    return config;
}

CoverageReport run_coverage_experiment(const ExperimentConfig& config, CellCallback on_cell)
{
    config.validate();
    CoverageReport report;
    report.config = config;

    const LorenzCurve reference = reference_lorenz(config.model, config.reference_size, config.reference_seed);
    report.reference_gini = gini(reference).value;
    report.notes.push_back("Superpopulation targets come from one generated population of " +
                           std::to_string(config.reference_size) +
                           " units; their Monte Carlo error is O(reference_size^-1/2), an order of magnitude "
                           "below the band half-widths.");
    report.notes.push_back("band_width is the mean of 2 d_hat / sqrt(n) before clipping; band_clipped_width is "
                           "the mean area between the clipped envelopes.");

    const std::size_t designs = config.designs.size();
    for (std::int64_t N : config.N_list) {
        const auto start = std::chrono::steady_clock::now();
        const std::int64_t n = sample_size_for(N, config.sampling_fraction);
        ModelConfig model = config.model;
        model.N = N;

        std::vector<std::vector<RepOutcome>> outcomes(designs,
                                                      std::vector<RepOutcome>(static_cast<std::size_t>(config.reps)));
        parallel_for(config.reps, config.workers, [&](std::int64_t begin, std::int64_t end) {
            for (std::int64_t r = begin; r < end; ++r) {
                const auto slot = static_cast<std::size_t>(r);
                try {
                    const FinitePopulation population = generate_population(
                        model, derive_seed(config.seed, {kPopulationTag, static_cast<std::uint64_t>(N),
                                                         static_cast<std::uint64_t>(r)}));
                    const LorenzCurve finite_truth = population_lorenz(population);
                    const double finite_gini = gini(finite_truth).value;
                    for (std::size_t d = 0; d < designs; ++d) {
                        try {
                            outcomes[d][slot] = run_repetition(config, population, finite_truth, finite_gini,
                                                               reference, report.reference_gini, config.designs[d],
                                                               n, r);
                        } catch (const std::exception& e) {
                            outcomes[d][slot].error = "repetition " + std::to_string(r) + ": " + e.what();
                        }
                    }
                } catch (const std::exception& e) {
                    for (std::size_t d = 0; d < designs; ++d) {
                        outcomes[d][slot].error = "repetition " + std::to_string(r) + ": " + e.what();
                    }
                }
            }
        });

        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() /
            static_cast<double>(designs);
        for (std::size_t d = 0; d < designs; ++d) {
            CellReport cell = aggregate(config.designs[d], N, n, outcomes[d]);
            cell.elapsed_seconds = elapsed;
            if (on_cell != nullptr) {
                on_cell(cell);
            }
            report.cells.push_back(std::move(cell));
        }
    }
    return report;
}

} // namespace lorenz
