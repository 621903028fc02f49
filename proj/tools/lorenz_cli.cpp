// lorenz: command-line front end for the Lorenz curve / Gini toolkit.
//
// Exit status: 0 success, 2 invalid input or usage, 3 numeric degeneracy,
// sampling failure or I/O failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lorenz/designs.hpp"
#include "lorenz/error.hpp"
#include "lorenz/estimators.hpp"
#include "lorenz/experiment.hpp"
#include "lorenz/io.hpp"
#include "lorenz/population.hpp"
#include "lorenz/resampling.hpp"

namespace {

using namespace lorenz;

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

struct Inference {
    std::string sample;
    std::int64_t N = 0;
    std::int64_t M = 1000;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    std::string resample_design = "pareto";
    int workers = 0;
    std::string out = "-";
    std::string replicates;
};

void add_inference_options(CLI::App* cmd, Inference& o)
{
    cmd->add_option("--sample", o.sample, "Sample CSV (id,y,x,pi,weight or id,y,x)")->required();
    cmd->add_option("--N", o.N, "Population size")->required();
    cmd->add_option("--M", o.M, "Bootstrap replicates");
    cmd->add_option("--alpha", o.alpha, "1 - confidence level");
    cmd->add_option("--seed", o.seed, "Base seed")->required();
    cmd->add_option("--resample-design", o.resample_design, "Design used inside the bootstrap");
    cmd->add_option("--workers", o.workers, "Worker threads (0: LORENZ_WORKERS or all cores)");
    cmd->add_option("--out", o.out, "Output CSV ('-' for stdout)");
    cmd->add_option("--replicates", o.replicates, "Also write the bootstrap replicates to this CSV");
}

BootstrapOptions bootstrap_options(int workers)
{
    BootstrapOptions options;
    options.workers = workers;
    return options;
}

void progress(const CellReport& cell)
{
    std::cerr << to_string(cell.design) << " N=" << cell.N << ": ";
    if (cell.ok()) {
        std::cerr << "band " << cell.band_super.estimate() << ", normal " << cell.normal_super.estimate()
                  << ", pivot " << cell.pivot_super.estimate() << " (" << cell.elapsed_seconds << " s)\n";
    } else {
        std::cerr << "aborted: " << cell.error << '\n';
    }
}

std::vector<std::int64_t> parse_n_list(const std::string& text)
{
    std::vector<std::int64_t> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        const std::string field = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        try {
            std::size_t used = 0;
            out.push_back(std::stoll(field, &used));
            require(used == field.size(), "");
        } catch (const std::exception&) {
            throw ValidationError("--N-list: cannot parse '" + field + "'");
        }
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

std::vector<DesignKind> parse_design_list(const std::string& text)
{
    std::vector<DesignKind> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = text.find(',', start);
        out.push_back(parse_design_kind(text.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
        if (comma == std::string::npos) {
            return out;
        }
        start = comma + 1;
    }
}

int run(int argc, char** argv)
{
    CLI::App app{"Lorenz curve and Gini index estimation under unequal probability sampling"};
    app.require_subcommand(1);

    // generate
    auto* generate = app.add_subcommand("generate", "Generate a population from the income model");
    std::string model_path;
    std::int64_t gen_N = 1000;
    std::uint64_t gen_seed = 0;
    std::string gen_out = "-";
    generate->add_option("--config", model_path, "Model JSON");
    generate->add_option("--N", gen_N, "Population size");
    generate->add_option("--seed", gen_seed, "Seed")->required();
    generate->add_option("--out", gen_out, "Population CSV");

    // sample
    auto* sample = app.add_subcommand("sample", "Draw a sample from a population CSV");
    std::string population_path;
    std::string design_name = "pareto";
    std::int64_t sample_n = 0;
    std::uint64_t sample_seed = 0;
    std::string sample_out = "-";
    sample->add_option("--population", population_path, "Population CSV")->required();
    sample->add_option("--design", design_name, "poisson|rejective|pareto|sampford|srswor");
    sample->add_option("--n", sample_n, "Expected sample size")->required();
    sample->add_option("--seed", sample_seed, "Seed")->required();
    sample->add_option("--out", sample_out, "Sample CSV");

    // estimate
    auto* estimate = app.add_subcommand("estimate", "Lorenz curve knots and Gini index of a sample");
    std::string estimate_sample;
    std::string estimate_out;
    std::optional<std::int64_t> grid;
    estimate->add_option("--sample", estimate_sample, "Sample CSV")->required();
    estimate->add_option("--out", estimate_out, "Curve CSV (p,L)");
    estimate->add_option("--grid", grid, "Evaluate on K+1 equally spaced points instead of knots");

    // band
    auto* band = app.add_subcommand("band", "Bootstrap sup-norm confidence band for the Lorenz curve");
    Inference band_opts;
    add_inference_options(band, band_opts);

    // gini-ci
    auto* gini_ci_cmd = app.add_subcommand("gini-ci", "Bootstrap confidence interval for the Gini index");
    Inference ci_opts;
    std::string ci_method = "normal";
    add_inference_options(gini_ci_cmd, ci_opts);
    gini_ci_cmd->add_option("--method", ci_method, "normal|pivot");

    // dominance
    auto* dominance = app.add_subcommand("dominance", "Test H0: L1(p) >= L2(p) for all p");
    std::string dom_sample1, dom_sample2, dom_design1 = "pareto", dom_design2 = "pareto", dom_out = "-";
    std::int64_t dom_N1 = 0, dom_N2 = 0, dom_M = 1000;
    double dom_alpha = 0.05;
    std::uint64_t dom_seed = 0;
    int dom_workers = 0;
    dominance->add_option("--sample1", dom_sample1, "First sample CSV")->required();
    dominance->add_option("--N1", dom_N1, "First population size")->required();
    dominance->add_option("--sample2", dom_sample2, "Second sample CSV")->required();
    dominance->add_option("--N2", dom_N2, "Second population size")->required();
    dominance->add_option("--design1", dom_design1, "Resampling design of the first arm");
    dominance->add_option("--design2", dom_design2, "Resampling design of the second arm");
    dominance->add_option("--M", dom_M, "Bootstrap replicates");
    dominance->add_option("--alpha", dom_alpha, "Test level");
    dominance->add_option("--seed", dom_seed, "Base seed")->required();
    dominance->add_option("--workers", dom_workers, "Worker threads");
    dominance->add_option("--out", dom_out, "Difference curve CSV");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo coverage study");
    std::string sim_config;
    std::uint64_t sim_seed = 0;
    bool desk = false, full = false;
    std::optional<std::int64_t> sim_reps, sim_M;
    std::optional<std::string> sim_N_list, sim_designs;
    int sim_workers = 0;
    std::string sim_csv = "coverage.csv", sim_json = "coverage.json";
    simulate->add_option("--config", sim_config, "Experiment JSON");
    simulate->add_option("--seed", sim_seed, "Base seed")->required();
    auto* desk_flag = simulate->add_flag("--desk", desk, "reps = M = 500");
    simulate->add_flag("--full", full, "reps = M = 1000")->excludes(desk_flag);
    simulate->add_option("--reps", sim_reps, "Override repetitions");
    simulate->add_option("--M", sim_M, "Override bootstrap replicates");
    simulate->add_option("--N-list", sim_N_list, "Comma-separated population sizes");
    simulate->add_option("--designs", sim_designs, "Comma-separated designs");
    simulate->add_option("--workers", sim_workers, "Worker threads");
    simulate->add_option("--csv", sim_csv, "Table CSV");
    simulate->add_option("--json", sim_json, "Full JSON report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    if (*generate) {
        ModelConfig model;
        if (!model_path.empty()) {
            model = model_config_from_json(nlohmann::json::parse(read_text(model_path)));
        }
        if (generate->count("--N") > 0 || model_path.empty()) {
            model.N = gen_N;
        }
        write_text(gen_out, population_csv(generate_population(model, gen_seed)));
    } else if (*sample) {
        const FinitePopulation population = parse_population_csv(read_text(population_path));
        const DesignKind kind = parse_design_kind(design_name);
        const DesignSpec spec = kind == DesignKind::SRSWOR
                                    ? DesignSpec::equal(kind, population.size(), sample_n)
                                    : DesignSpec::proportional(kind, population.x(), sample_n);
        write_text(sample_out, sample_csv(draw(population, spec, sample_seed)));
    } else if (*estimate) {
        const DrawnSample s = parse_sample_csv(read_text(estimate_sample));
        const LorenzCurve curve = lorenz::lorenz(hajek_df(s));
        std::cout << "gini " << format_number(gini(curve).value) << '\n';
        if (!estimate_out.empty()) {
            write_text(estimate_out, curve_csv(curve, grid));
        }
    } else if (*band) {
        const DrawnSample s = parse_sample_csv(read_text(band_opts.sample));
        const ReplicateStats stats =
            bootstrap_replicates(s, band_opts.N, band_opts.M, parse_design_kind(band_opts.resample_design),
                                 band_opts.seed, bootstrap_options(band_opts.workers));
        const BandResult result = band_from_replicates(lorenz::lorenz(hajek_df(s)), stats, band_opts.alpha);
        write_text(band_opts.out, band_csv(result));
        if (!band_opts.replicates.empty()) {
            write_text(band_opts.replicates, replicates_csv(stats));
        }
        std::cerr << "d_hat " << format_number(result.d_hat) << " halfwidth " << format_number(result.halfwidth())
                  << '\n';
    } else if (*gini_ci_cmd) {
        const DrawnSample s = parse_sample_csv(read_text(ci_opts.sample));
        const CiMethod method = parse_ci_method(ci_method);
        const ReplicateStats stats =
            bootstrap_replicates(s, ci_opts.N, ci_opts.M, parse_design_kind(ci_opts.resample_design), ci_opts.seed,
                                 bootstrap_options(ci_opts.workers));
        const double point = gini(lorenz::lorenz(hajek_df(s))).value;
        write_text(ci_opts.out, gini_ci_csv(gini_ci_from_replicates(point, stats, ci_opts.alpha, method),
                                            ci_opts.alpha));
        if (!ci_opts.replicates.empty()) {
            write_text(ci_opts.replicates, replicates_csv(stats));
        }
    } else if (*dominance) {
        const DrawnSample s1 = parse_sample_csv(read_text(dom_sample1));
        const DrawnSample s2 = parse_sample_csv(read_text(dom_sample2));
        const DominanceResult result =
            dominance_test(s1, dom_N1, s2, dom_N2, dom_M, dom_alpha, parse_design_kind(dom_design1),
                           parse_design_kind(dom_design2), dom_seed, bootstrap_options(dom_workers));
        std::cout << "reject " << (result.reject ? "true" : "false") << " quantile "
                  << format_number(result.quantile) << " halfwidth " << format_number(result.band_halfwidth) << '\n';
        write_text(dom_out, dominance_csv(result));
    } else if (*simulate) {
        ExperimentConfig config = full ? ExperimentConfig::full() : ExperimentConfig::desk();
        if (!sim_config.empty()) {
            config = experiment_config_from_json(nlohmann::json::parse(read_text(sim_config)));
            if (desk || full) {
                config.reps = config.M = desk ? 500 : 1000;
            }
        }
        config.seed = sim_seed;
        if (sim_reps) {
            config.reps = *sim_reps;
        }
        if (sim_M) {
            config.M = *sim_M;
        }
        if (sim_N_list) {
            config.N_list = parse_n_list(*sim_N_list);
        }
        if (sim_designs) {
            config.designs = parse_design_list(*sim_designs);
        }
        config.workers = sim_workers;
        const CoverageReport report = run_coverage_experiment(config, progress);
        emit_report(report, sim_csv, sim_json);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    try {
        return run(argc, argv);
    } catch (const lorenz::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: invalid JSON: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}
