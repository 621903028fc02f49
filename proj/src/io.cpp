#include "lorenz/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <vector>

#include "lorenz/error.hpp"

namespace lorenz {

using nlohmann::json;

namespace {

std::vector<std::string_view> split(std::string_view line, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        std::string_view field = line.substr(start, pos == std::string_view::npos ? line.size() - start : pos - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) {
            field.remove_prefix(1);
        }
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
            field.remove_suffix(1);
        }
        out.push_back(field);
        if (pos == std::string_view::npos) {
            return out;
        }
        start = pos + 1;
    }
}

std::vector<std::string_view> lines_of(std::string_view text)
{
    std::vector<std::string_view> out;
    for (std::string_view line : split(text, '\n')) {
        if (!line.empty()) {
            out.push_back(line);
        }
    }
    return out;
}

double parse_double(std::string_view field, std::size_t line)
{
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw ValidationError("line " + std::to_string(line) + ": cannot parse number '" + std::string(field) + "'");
    }
    return value;
}

std::int64_t parse_int(std::string_view field, std::size_t line)
{
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw ValidationError("line " + std::to_string(line) + ": cannot parse integer '" + std::string(field) + "'");
    }
    return value;
}

struct Table {
    std::vector<std::string_view> header;
    std::vector<std::vector<std::string_view>> rows;
};

Table parse_table(std::string_view text)
{
    const auto lines = lines_of(text);
    require(!lines.empty(), "csv: empty input");
    Table table;
    table.header = split(lines[0], ',');
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto row = split(lines[i], ',');
        if (row.size() != table.header.size()) {
            throw ValidationError("line " + std::to_string(i + 1) + ": expected " +
                                  std::to_string(table.header.size()) + " fields");
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

bool header_is(const Table& table, std::initializer_list<std::string_view> names)
{
    return std::equal(table.header.begin(), table.header.end(), names.begin(), names.end());
}

void append_row(std::string& out, std::initializer_list<double> values)
{
    bool first = true;
    for (double v : values) {
        if (!first) {
            out += ',';
        }
        out += format_number(v);
        first = false;
    }
    out += '\n';
}

template <class T>
T get_or(const json& j, const char* key, T fallback)
{
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

json coverage_json(const Coverage& c)
{
    return {{"hits", c.hits}, {"trials", c.trials}, {"estimate", c.estimate()}, {"se", c.se()}};
}

Coverage coverage_from_json(const json& j)
{
    return Coverage{j.at("hits").get<std::int64_t>(), j.at("trials").get<std::int64_t>()};
}

json cell_json(const CellReport& c)
{
    json j;
    j["design"] = std::string(to_string(c.design));
    j["N"] = c.N;
    j["n"] = c.n;
    if (!c.ok()) {
        j["error"] = c.error;
        return j;
    }
    j["band"] = {{"superpopulation", coverage_json(c.band_super)},
                 {"finite_population", coverage_json(c.band_finite)},
                 {"width", c.band_width},
                 {"clipped_width", c.band_clipped_width}};
    j["gini_normal"] = {{"superpopulation", coverage_json(c.normal_super)},
                        {"finite_population", coverage_json(c.normal_finite)},
                        {"width", c.normal_width}};
    j["gini_pivot"] = {{"superpopulation", coverage_json(c.pivot_super)},
                       {"finite_population", coverage_json(c.pivot_finite)},
                       {"width", c.pivot_width}};
    j["mean_variance_hat"] = c.mean_variance_hat;
    j["regenerated"] = c.regenerated;
    return j;
}

CellReport cell_from_json(const json& j)
{
    CellReport c;
    c.design = parse_design_kind(j.at("design").get<std::string>());
    c.N = j.at("N").get<std::int64_t>();
    c.n = j.at("n").get<std::int64_t>();
    if (j.contains("error")) {
        c.error = j.at("error").get<std::string>();
        return c;
    }
    const json& band = j.at("band");
    c.band_super = coverage_from_json(band.at("superpopulation"));
    c.band_finite = coverage_from_json(band.at("finite_population"));
    c.band_width = band.at("width").get<double>();
    c.band_clipped_width = band.at("clipped_width").get<double>();
    const json& normal = j.at("gini_normal");
    c.normal_super = coverage_from_json(normal.at("superpopulation"));
    c.normal_finite = coverage_from_json(normal.at("finite_population"));
    c.normal_width = normal.at("width").get<double>();
    const json& pivot = j.at("gini_pivot");
    c.pivot_super = coverage_from_json(pivot.at("superpopulation"));
    c.pivot_finite = coverage_from_json(pivot.at("finite_population"));
    c.pivot_width = pivot.at("width").get<double>();
    c.mean_variance_hat = j.at("mean_variance_hat").get<double>();
    c.regenerated = j.at("regenerated").get<std::int64_t>();
    return c;
}

} // namespace

std::string format_number(double value)
{
    if (std::isnan(value)) {
        return "NA";
    }
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
    return std::string(buffer, result.ptr);
}

void write_text(const std::string& path, std::string_view content)
{
    if (path == "-") {
        std::cout << content;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) {
        throw IoError("failed writing '" + path + "'");
    }
}

std::string read_text(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path + "' for reading");
    }
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::string population_csv(const FinitePopulation& population)
{
    std::string out = "id,y,x\n";
    for (std::int64_t i = 0; i < population.size(); ++i) {
        const auto k = static_cast<std::size_t>(i);
        out += std::to_string(i) + ',' + format_number(population.y()[k]) + ',' + format_number(population.x()[k]) +
               '\n';
    }
    return out;
}

FinitePopulation parse_population_csv(std::string_view text)
{
    const Table table = parse_table(text);
    require(header_is(table, {"id", "y", "x"}), "population csv: header must be id,y,x");
    std::vector<double> y, x;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        require(parse_int(row[0], r + 2) == static_cast<std::int64_t>(r),
                "population csv: ids must be 0, 1, 2, ... in order");
        y.push_back(parse_double(row[1], r + 2));
        x.push_back(parse_double(row[2], r + 2));
    }
    return FinitePopulation(std::move(y), std::move(x));
}

std::string sample_csv(const DrawnSample& sample)
{
    std::string out = "id,y,x,pi,weight\n";
    for (std::size_t k = 0; k < sample.indices.size(); ++k) {
        out += std::to_string(sample.indices[k]) + ',' + format_number(sample.y[k]) + ',' +
               format_number(sample.x[k]) + ',' + format_number(sample.pi[k]) + ',' +
               format_number(sample.weights[k]) + '\n';
    }
    return out;
}

DrawnSample parse_sample_csv(std::string_view text)
{
    const Table table = parse_table(text);
    const bool full = header_is(table, {"id", "y", "x", "pi", "weight"});
    require(full || header_is(table, {"id", "y", "x"}), "sample csv: header must be id,y,x,pi,weight or id,y,x");
    std::vector<std::int64_t> ids;
    std::vector<double> y, x, pi;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        ids.push_back(parse_int(row[0], r + 2));
        y.push_back(parse_double(row[1], r + 2));
        x.push_back(parse_double(row[2], r + 2));
        pi.push_back(full ? parse_double(row[3], r + 2) : 1.0);
    }
    require(!ids.empty(), "sample csv: no units");
    DrawnSample sample = DrawnSample::from_columns(std::move(ids), std::move(y), std::move(x), std::move(pi));
    if (full) {
        // A weight column that disagrees with 1/pi is a corrupt file.
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            const double w = parse_double(table.rows[r][4], r + 2);
            require(std::abs(w - sample.weights[r]) <= 1e-9 * sample.weights[r],
                    "sample csv: line " + std::to_string(r + 2) + ": weight is not 1/pi");
        }
    }
    return sample;
}

std::string curve_csv(const LorenzCurve& curve, std::optional<std::int64_t> grid)
{
    std::string out = "p,L\n";
    if (grid) {
        require(*grid >= 1, "grid must be at least 1");
        const auto K = static_cast<double>(*grid);
        for (std::int64_t k = 0; k <= *grid; ++k) {
            const double p = static_cast<double>(k) / K;
            append_row(out, {p, curve(p)});
        }
        return out;
    }
    for (std::size_t k = 0; k < curve.knots_p.size(); ++k) {
        append_row(out, {curve.knots_p[k], curve.values_L[k]});
    }
    return out;
}

std::string band_csv(const BandResult& band)
{
    std::vector<double> knots;
    knots.insert(knots.end(), band.estimate.knots_p.begin(), band.estimate.knots_p.end());
    knots.insert(knots.end(), band.lower.knots.begin(), band.lower.knots.end());
    knots.insert(knots.end(), band.upper.knots.begin(), band.upper.knots.end());
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    std::string out = "p,lower,estimate,upper\n";
    for (double p : knots) {
        append_row(out, {p, band.lower(p), band.estimate(p), band.upper(p)});
    }
    return out;
}

std::string_view to_string(CiMethod method) noexcept
{
    return method == CiMethod::PivotPercentile ? "pivot" : "normal";
}

CiMethod parse_ci_method(std::string_view name)
{
    if (name == "pivot") {
        return CiMethod::PivotPercentile;
    }
    if (name == "normal") {
        return CiMethod::NormalApprox;
    }
    throw ValidationError("unknown interval method '" + std::string(name) + "' (expected normal or pivot)");
}

std::string gini_ci_csv(const GiniCI& ci, double alpha)
{
    std::string out = "method,alpha,gini,lower,upper,variance_hat\n";
    out += std::string(to_string(ci.method)) + ',';
    append_row(out, {alpha, ci.point, ci.lower, ci.upper, ci.variance_hat});
    return out;
}

std::string replicates_csv(const ReplicateStats& stats)
{
    std::string out = "m,z,gini_pivot\n";
    for (std::size_t m = 0; m < stats.z_values.size(); ++m) {
        out += std::to_string(m) + ',';
        append_row(out, {stats.z_values[m], stats.gini_pivots[m]});
    }
    return out;
}

std::string dominance_csv(const DominanceResult& result)
{
    std::string out = "p,phi_hat,phi_upper\n";
    for (std::size_t k = 0; k < result.phi_hat.knots.size(); ++k) {
        append_row(out, {result.phi_hat.knots[k], result.phi_hat.values[k],
                         result.phi_hat.values[k] + result.band_halfwidth});
    }
    return out;
}

json to_json(const ModelConfig& c)
{
    return {{"beta0", c.beta0}, {"beta1", c.beta1}, {"c", c.c},
            {"sigma", c.sigma}, {"xi_sd", c.xi_sd}, {"z_exponent", c.z_exponent},
            {"w_log_mu", c.w_log_mu}, {"w_log_sigma2", c.w_log_sigma2}, {"N", c.N}};
}

ModelConfig model_config_from_json(const json& j)
{
    require(j.is_object(), "model config must be a JSON object");
    ModelConfig c;
    c.beta0 = get_or(j, "beta0", c.beta0);
    c.beta1 = get_or(j, "beta1", c.beta1);
    c.c = get_or(j, "c", c.c);
    c.sigma = get_or(j, "sigma", c.sigma);
    c.xi_sd = get_or(j, "xi_sd", c.xi_sd);
    c.z_exponent = get_or(j, "z_exponent", c.z_exponent);
    c.w_log_mu = get_or(j, "w_log_mu", c.w_log_mu);
    c.w_log_sigma2 = get_or(j, "w_log_sigma2", c.w_log_sigma2);
    c.N = get_or(j, "N", c.N);
    c.validate();
    return c;
}

json to_json(const DesignSpec& spec)
{
    return {{"kind", std::string(to_string(spec.kind))}, {"n", spec.n}, {"pi", spec.pi}};
}

DesignSpec design_spec_from_json(const json& j)
{
    require(j.is_object(), "design spec must be a JSON object");
    DesignSpec spec;
    spec.kind = parse_design_kind(j.at("kind").get<std::string>());
    spec.n = j.at("n").get<std::int64_t>();
    spec.pi = j.at("pi").get<std::vector<double>>();
    spec.validate();
    return spec;
}

json to_json(const ExperimentConfig& c)
{
    std::vector<std::string> designs;
    for (DesignKind d : c.designs) {
        designs.emplace_back(to_string(d));
    }
    return {{"model", to_json(c.model)},
            {"N_list", c.N_list},
            {"sampling_fraction", c.sampling_fraction},
            {"designs", designs},
            {"reps", c.reps},
            {"M", c.M},
            {"alpha", c.alpha},
            {"seed", c.seed},
            {"coverage_target", std::string(to_string(c.coverage_target))},
            {"reference_size", c.reference_size},
            {"reference_seed", c.reference_seed}};
}

ExperimentConfig experiment_config_from_json(const json& j)
{
    require(j.is_object(), "experiment config must be a JSON object");
    try {
        ExperimentConfig c;
        if (j.contains("model")) {
            c.model = model_config_from_json(j.at("model"));
        }
        c.N_list = get_or(j, "N_list", c.N_list);
        c.sampling_fraction = get_or(j, "sampling_fraction", c.sampling_fraction);
        if (j.contains("designs")) {
            c.designs.clear();
            for (const auto& name : j.at("designs")) {
                c.designs.push_back(parse_design_kind(name.get<std::string>()));
            }
        }
        c.reps = get_or(j, "reps", c.reps);
        c.M = get_or(j, "M", c.M);
        c.alpha = get_or(j, "alpha", c.alpha);
        c.seed = get_or(j, "seed", c.seed);
        if (j.contains("coverage_target")) {
            c.coverage_target = parse_coverage_target(j.at("coverage_target").get<std::string>());
        }
        c.reference_size = get_or(j, "reference_size", c.reference_size);
        c.reference_seed = get_or(j, "reference_seed", c.reference_seed);
        c.validate();
        return c;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("experiment config: ") + e.what());
    }
}

json to_json(const CoverageReport& report)
{
    json cells = json::array();
    for (const CellReport& c : report.cells) {
        cells.push_back(cell_json(c));
    }
    return {{"config", to_json(report.config)},
            {"reference_gini", report.reference_gini},
            {"cells", cells},
            {"notes", report.notes}};
}

CoverageReport coverage_report_from_json(const json& j)
{
    try {
        CoverageReport report;
        report.config = experiment_config_from_json(j.at("config"));
        report.reference_gini = j.at("reference_gini").get<double>();
        for (const json& c : j.at("cells")) {
            report.cells.push_back(cell_from_json(c));
        }
        report.notes = j.at("notes").get<std::vector<std::string>>();
        return report;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("coverage report: ") + e.what());
    }
}

std::string report_csv(const CoverageReport& report)
{
    std::string out = "statistic";
    for (const CellReport& c : report.cells) {
        const std::string prefix = std::string(to_string(c.design)) + "_N" + std::to_string(c.N);
        out += ',' + prefix + "_coverage," + prefix + "_se," + prefix + "_width";
    }
    out += '\n';
    if (report.cells.empty()) {
        return out;
    }
    const bool super = report.config.coverage_target == CoverageTarget::Superpopulation;
    auto row = [&](const char* name, auto coverage, auto width) {
        out += name;
        for (const CellReport& c : report.cells) {
            if (!c.ok()) {
                out += ",NA,NA,NA";
                continue;
            }
            const Coverage& cov = coverage(c);
            out += ',' + format_number(cov.estimate()) + ',' + format_number(cov.se()) + ',' +
                   format_number(width(c));
        }
        out += '\n';
    };
    row("band", [&](const CellReport& c) -> const Coverage& { return super ? c.band_super : c.band_finite; },
        [](const CellReport& c) { return c.band_width; });
    row("gini_normal", [&](const CellReport& c) -> const Coverage& { return super ? c.normal_super : c.normal_finite; },
        [](const CellReport& c) { return c.normal_width; });
    row("gini_pivot", [&](const CellReport& c) -> const Coverage& { return super ? c.pivot_super : c.pivot_finite; },
        [](const CellReport& c) { return c.pivot_width; });
    return out;
}

void emit_report(const CoverageReport& report, const std::string& csv_path, const std::string& json_path)
{
    write_text(csv_path, report_csv(report));
    write_text(json_path, to_json(report).dump(2) + '\n');
}

} // namespace lorenz
