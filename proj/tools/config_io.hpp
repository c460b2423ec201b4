#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "refdiff/coefficient_model.hpp"
#include "refdiff/path_simulator.hpp"

namespace refdiff::cli {

/// Structural problem in a config document (wrong type, missing key,
/// unknown enum value). Distinct from field validation failures.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GridSpec {
    double min = 0.0;
    double max = 1.0;
    std::size_t count = 101;
};

struct OutputPaths {
    std::optional<std::string> report;
    std::optional<std::string> csv;
    std::optional<std::string> hist;
    std::optional<std::string> out;
    std::optional<std::string> trajectory;
};

struct RunConfig {
    DomainSpec domain;
    std::vector<Segment> segments;
    SimConfig sim;
    std::optional<GridSpec> grid;
    OutputPaths outputs;
};

/// Parses "min:max:count". Throws ConfigError.
GridSpec parse_grid(const std::string& text);

/// Reads a number that may also be spelled "inf" / "-inf".
double number_or_inf(const nlohmann::json& j, const std::string& where);

FuncSpec parse_func(const nlohmann::json& j, const std::string& where);
DomainSpec parse_domain(const nlohmann::json& j);
SimConfig parse_sim(const nlohmann::json& j, SimConfig base = {});

/// Accepts either {"field": ..., "sim": ..., "grid": ..., "outputs": ...}
/// or a bare field document {"domain": ..., "segments": ...}.
RunConfig parse_run_config(const nlohmann::json& j);

nlohmann::json to_json(const FuncSpec& f);
nlohmann::json to_json(const DomainSpec& d);
nlohmann::json field_to_json(const DomainSpec& d, const std::vector<Segment>& segments);

/// Serializes with every floating-point number printed to 17 significant
/// digits and non-finite values spelled "inf", "-inf" or "nan".
std::string dump_json(const nlohmann::json& j, int indent = 2);

/// 17 significant digits, "inf"/"-inf"/"nan" for non-finite values.
std::string format_double(double v);

}  // namespace refdiff::cli
