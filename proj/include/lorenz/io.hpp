#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "lorenz/data.hpp"
#include "lorenz/designs.hpp"
#include "lorenz/estimators.hpp"
#include "lorenz/experiment.hpp"
#include "lorenz/population.hpp"
#include "lorenz/resampling.hpp"

namespace lorenz {

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

/// Writes `content` to `path` ("-" means stdout). Throws IoError.
void write_text(const std::string& path, std::string_view content);
std::string read_text(const std::string& path);

// CSV formats. All writers produce a header line and '\n' line endings.
std::string population_csv(const FinitePopulation& population); // id,y,x
FinitePopulation parse_population_csv(std::string_view text);

std::string sample_csv(const DrawnSample& sample); // id,y,x,pi,weight
/// Accepts the sample layout, or the population layout (id,y,x), in which
/// case every unit gets pi = 1.
DrawnSample parse_sample_csv(std::string_view text);

/// Knots of the curve, or K + 1 equally spaced points when grid is set.
std::string curve_csv(const LorenzCurve& curve, std::optional<std::int64_t> grid = std::nullopt);
/// p,lower,estimate,upper on the union of all three knot sets.
std::string band_csv(const BandResult& band);
std::string gini_ci_csv(const GiniCI& ci, double alpha);
std::string replicates_csv(const ReplicateStats& stats);
std::string dominance_csv(const DominanceResult& result);

std::string_view to_string(CiMethod method) noexcept;
CiMethod parse_ci_method(std::string_view name);

// JSON.
nlohmann::json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DesignSpec& spec);
DesignSpec design_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CoverageReport& report);
CoverageReport coverage_report_from_json(const nlohmann::json& j);

/// Table-style layout: one row per statistic (band, gini_normal,
/// gini_pivot), three columns (coverage, se, width) per design x N cell.
std::string report_csv(const CoverageReport& report);

/// Writes the CSV table and the full-precision JSON document.
void emit_report(const CoverageReport& report, const std::string& csv_path, const std::string& json_path);

} // namespace lorenz
