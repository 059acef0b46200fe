#pragma once

// Config-driven experiments: model generation, probing, reconstruction and
// reporting for each scenario, plus CSV and SVG emission.
//
// Config files are flat "key = value" lines grouped under [section] headers;
// "#" starts a comment. The scenario is named by a top-level "scenario" key and
// every other key is addressed as "section.key", e.g.
//
//     scenario = uniform
//     [model]
//     seed = 7
//     window = 64
//     [recon]
//     omega = 0.8

#include "opsamp/core_model.hpp"
#include "opsamp/recon_report.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace opsamp {

enum class Scenario {
    uniform,
    irregular,
    dft_multichannel,
    general_multichannel,
    pns,
    derivative,
    counterexample,
    density,
    frame_bounds,
    wks_baseline,
    haar,
};

std::string_view scenario_name(Scenario s);
Scenario parse_scenario(std::string_view name);
std::span<const Scenario> all_scenarios();

/// One-line description of the sampling result the scenario exercises; written
/// at the top of every CSV.
std::string_view scenario_anchor(Scenario s);

/// Randomized scenarios refuse to run without model.seed.
bool scenario_randomized(Scenario s);

enum class ValueKind { number, integer, list, text };

struct ConfigKey {
    std::string_view name;
    ValueKind kind;
    std::string_view help;
};

/// Every key a config file may contain.
std::span<const ConfigKey> config_keys();

class ExperimentConfig {
public:
    explicit ExperimentConfig(Scenario scenario);

    /// Throws ParseError on syntax errors, unknown or duplicate keys, and
    /// values of the wrong kind.
    static ExperimentConfig parse(std::istream& in);
    static ExperimentConfig load(const std::filesystem::path& path);

    Scenario scenario() const { return scenario_; }

    /// Sets a key after checking its name and kind. "scenario" is accepted too.
    void set(std::string_view key, std::string_view value);
    bool has(std::string_view key) const { return values_.contains(std::string(key)); }

    /// The explicit value, else the scenario default. Throws PreconditionError
    /// when neither exists.
    std::string text(std::string_view key) const;
    double number(std::string_view key) const;
    long long integer(std::string_view key) const;
    std::vector<double> numbers(std::string_view key) const;

    std::optional<std::uint64_t> seed() const;

    /// Keys this scenario reads, in a fixed order, with resolved values.
    std::vector<std::pair<std::string, std::string>> parameters() const;

    /// Scenario present, seed present when randomized, enumerated text values valid.
    void validate() const;

    void write(std::ostream& out) const;

private:
    Scenario scenario_;
    std::map<std::string, std::string> values_;
};

bool is_numeric_key(std::string_view key);

struct ResultRow {
    Scenario scenario = Scenario::uniform;
    std::optional<std::uint64_t> seed;
    std::vector<std::pair<std::string, std::string>> parameters;
    double max_error = ReconReport::kUnset;
    double l2_error = ReconReport::kUnset;
    double norm_identity_residual = ReconReport::kUnset;
    double condition_estimate = ReconReport::kUnset;
    std::vector<std::pair<std::string, double>> metrics; ///< scenario-specific columns
    double runtime_ms = 0.0;
};

struct Curve {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct Plot {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y = false;
    std::vector<Curve> curves;
    bool log_x = false;
};

struct RunResult {
    std::vector<ResultRow> rows;
    std::optional<Plot> plot;
};

/// Pipeline stages. Scenarios without an operator model (density,
/// frame_bounds, wks_baseline, haar) are rejected by the model stages.
OperatorModel generate_model(const ExperimentConfig& config);
std::vector<SampledOutput> probe_model(const ExperimentConfig& config, const OperatorModel& model);
ReconReport reconstruct_outputs(const ExperimentConfig& config, std::span<const SampledOutput> outputs);

/// Node set named by train.family (lattice, interleaved, kadec, alternating, gap).
std::vector<double> family_nodes(const ExperimentConfig& config);

RunResult run(const ExperimentConfig& config);

/// One run per value with the shared seed. Throws PreconditionError unless
/// `axis` is a numeric key.
RunResult sweep(const ExperimentConfig& config, std::string_view axis, std::span<const double> values);

/// Kadec check, densities for analysis.h and frame bounds for analysis.sections.
struct NodeAnalysis {
    struct Entry {
        std::string quantity;
        double parameter;
        double value;
    };
    std::vector<Entry> entries;
};

NodeAnalysis analyze_nodes(const ExperimentConfig& config, std::span<const double> nodes);
void write_analysis_csv(std::ostream& out, const NodeAnalysis& analysis);

/// Anchor comment, header row, one line per row; floats in shortest
/// round-trip form, empty cells for quantities that do not apply.
void write_csv(std::ostream& out, std::span<const ResultRow> rows, bool timings = false);

/// Polylines on linear or log10 axes.
void write_svg(std::ostream& out, const Plot& plot);

struct OutputPaths {
    std::filesystem::path csv;
    std::filesystem::path svg; ///< empty: no plot
    bool timings = false;
};

/// Writes the CSV and the optional SVG. Nothing is written for an empty result.
void emit(const RunResult& result, const OutputPaths& paths);

} // namespace opsamp
