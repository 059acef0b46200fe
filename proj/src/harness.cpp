#include "opsamp/harness.hpp"

#include "opsamp/error.hpp"
#include "opsamp/identifiers.hpp"
#include "opsamp/recon_irregular.hpp"
#include "opsamp/recon_multichannel.hpp"
#include "opsamp/recon_uniform.hpp"
#include "opsamp/rng.hpp"
#include "opsamp/text_io.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace opsamp {

namespace {

struct ScenarioInfo {
    Scenario id;
    std::string_view name;
    std::string_view anchor;
    bool randomized;
    std::vector<std::pair<std::string_view, std::string_view>> defaults;
};

const std::vector<ScenarioInfo>& scenarios()
{
    static const std::vector<ScenarioInfo> table{
        {Scenario::uniform,
         "uniform",
         "uniform identifier sum_k delta_kT; h(t,x) = r(t) T sum_k y(t+kT) phi(x-t-kT); ||H||^2 = T ||H f||^2",
         true,
         {{"model.window", "64"},
          {"model.nt", "64"},
          {"model.support", "1"},
          {"train.spacing", "1"},
          {"recon.omega", "1"},
          {"recon.truncation", "64"},
          {"recon.trim", "8"}}},
        {Scenario::irregular,
         "irregular",
         "irregular identifier sum_k delta_lambda_k with separation >= T'; dual frame of exponentials on "
         "[-Omega/2,Omega/2]",
         true,
         {{"model.window", "44"},
          {"model.nt", "64"},
          {"model.support", "0.6"},
          {"train.family", "kadec"},
          {"train.spacing", "1"},
          {"train.amplitude", "0.2"},
          {"train.frequency", "2.7"},
          {"train.count", "64"},
          {"recon.omega", "0.95"},
          {"recon.section", "128"},
          {"recon.rho", "1e-10"},
          {"recon.trim", "8"}}},
        {Scenario::dft_multichannel,
         "dft_multichannel",
         "MN channels sum_n exp(2 pi i j n/MN) delta_n/M; unitary unmixing; ||H||^2 = (1/(M^2 N)) sum_j ||H f_j||^2",
         true,
         {{"model.window", "32"}, {"model.nt", "16"}, {"train.m", "2"}, {"train.n", "2"}, {"recon.trim", "0"}}},
        {Scenario::general_multichannel,
         "general_multichannel",
         "MN channels with MN-periodic weights c_j,n; invertible mixing matrices (A_k)_j,l = c_j,k-l",
         true,
         {{"model.window", "32"},
          {"model.nt", "16"},
          {"train.m", "2"},
          {"train.n", "2"},
          {"train.epsilon", "0.2"},
          {"train.weight_seed", "3"},
          {"recon.max_condition", "1e8"},
          {"recon.trim", "0"}}},
        {Scenario::pns,
         "pns",
         "periodically nonuniform channels sum_n delta_nN+alpha_j; reconstruction functions S_j",
         true,
         {{"model.window", "64"},
          {"model.nt", "32"},
          {"train.m", "1"},
          {"train.n", "2"},
          {"train.alpha", "0,0.37"},
          {"recon.truncation", "16384"},
          {"recon.solver", "subband"},
          {"recon.section", "512"},
          {"recon.rho", "1e-10"},
          {"recon.trim", "8"}}},
        {Scenario::derivative,
         "derivative",
         "channels sum_k delta_2k and sum_k delta'_2k; kernels sinc^2(u/2) and (2/pi) sinc(u/2) sin(pi u/2)",
         true,
         {{"model.window", "64"}, {"model.nt", "32"}, {"recon.truncation", "16384"}, {"recon.trim", "8"}}},
        {Scenario::counterexample,
         "counterexample",
         "two nodes closer than T: a nonzero operator with T' = T whose output for the train vanishes",
         true,
         {{"model.window", "8"},
          {"model.nt", "64"},
          {"train.spacing", "1"},
          {"train.gap", "0.5"},
          {"train.count", "6"},
          {"recon.omega", "1"}}},
        {Scenario::density,
         "density",
         "upper and lower Beurling densities from extremal window counts",
         false,
         {{"train.family", "lattice"},
          {"train.spacing", "1"},
          {"train.count", "500"},
          {"train.amplitude", "0.2"},
          {"train.frequency", "2.7"},
          {"train.offset", "0.5"},
          {"train.gap", "50"},
          {"analysis.h", "100"}}},
        {Scenario::frame_bounds,
         "frame_bounds",
         "finite-section frame bounds of exponentials exp(2 pi i lambda_k xi) on [-Omega/2,Omega/2]",
         false,
         {{"train.family", "kadec"},
          {"train.spacing", "1"},
          {"train.count", "64"},
          {"train.amplitude", "0.2"},
          {"train.frequency", "2.7"},
          {"train.offset", "0.5"},
          {"train.gap", "50"},
          {"recon.omega", "0.95"},
          {"analysis.sections", "16,32,64,128"}}},
        {Scenario::wks_baseline,
         "wks_baseline",
         "classical sampling series f(x) = T sum_n f(nT) phi(x-nT) for f band-limited to [-Omega/2,Omega/2]",
         true,
         {{"model.window", "32"}, {"train.spacing", "1"}, {"recon.omega", "0.8"}, {"recon.truncation", "64"}}},
        {Scenario::haar,
         "haar",
         "step kernels constant on unit cells along diagonals, read off the unit train output",
         true,
         {{"model.window", "16"}, {"model.nt", "16"}, {"model.support", "1"}}},
    };
    return table;
}

const ScenarioInfo& info(Scenario s)
{
    for (const auto& i : scenarios())
        if (i.id == s) return i;
    throw NumericalError("unknown scenario id");
}

struct KeyEntry {
    ConfigKey key;
    std::string_view fallback;
};

const std::array<KeyEntry, 28>& key_table()
{
    static const std::array<KeyEntry, 28> table{{
        {{"scenario", ValueKind::text, "scenario name"}, ""},
        {{"model.seed", ValueKind::integer, "seed of every random draw"}, ""},
        {{"model.window", ValueKind::integer, "lattice half width W, indices -W..W"}, ""},
        {{"model.nt", ValueKind::integer, "number of t-grid points on [0, T']"}, ""},
        {{"model.support", ValueKind::number, "temporal support T'"}, ""},
        {{"train.spacing", ValueKind::number, "node spacing T"}, "1"},
        {{"train.m", ValueKind::integer, "bandwidth M"}, ""},
        {{"train.n", ValueKind::integer, "period N"}, ""},
        {{"train.alpha", ValueKind::list, "channel offsets alpha_j in [0, N)"}, ""},
        {{"train.epsilon", ValueKind::number, "perturbation of the DFT weights"}, ""},
        {{"train.weight_seed", ValueKind::integer, "seed of the weight perturbation"}, ""},
        {{"train.family", ValueKind::text, "lattice | interleaved | kadec | alternating | gap"}, "lattice"},
        {{"train.count", ValueKind::integer, "node indices -count..count"}, "64"},
        {{"train.amplitude", ValueKind::number, "perturbation amplitude in units of T"}, "0.2"},
        {{"train.frequency", ValueKind::number, "kadec perturbation a sin(frequency k)"}, "2.7"},
        {{"train.offset", ValueKind::number, "second lattice offset of the interleaved family"}, "0.5"},
        {{"train.gap", ValueKind::number, "close-node gap (counterexample) or hole length (gap family)"}, "50"},
        {{"recon.omega", ValueKind::number, "bandwidth Omega"}, "1"},
        {{"recon.trim", ValueKind::integer, "lattice indices dropped at each end of the comparison"}, "0"},
        {{"recon.truncation", ValueKind::integer, "samples (periods) used beyond the lattice window"}, ""},
        {{"recon.section", ValueKind::integer, "finite-section size"}, ""},
        {{"recon.rho", ValueKind::number, "regularization, relative to the upper frame bound"}, ""},
        {{"recon.solver", ValueKind::text, "closed_form | subband | finite_section"}, ""},
        {{"recon.max_condition", ValueKind::number, "largest accepted mixing-matrix condition number"}, ""},
        {{"analysis.h", ValueKind::list, "density window lengths"}, "100"},
        {{"analysis.sections", ValueKind::list, "finite-section sizes"}, "16,32,64,128"},
        {{"output.csv", ValueKind::text, "CSV file name"}, ""},
        {{"output.svg", ValueKind::text, "SVG file name"}, ""},
    }};
    return table;
}

const KeyEntry* find_key(std::string_view name)
{
    for (const auto& k : key_table())
        if (k.key.name == name) return &k;
    return nullptr;
}

void check_kind(const KeyEntry& k, std::string_view value)
{
    switch (k.key.kind) {
    case ValueKind::number:
        parse_double(value);
        break;
    case ValueKind::integer:
        parse_integer(value);
        break;
    case ValueKind::list: {
        std::string_view rest = value;
        while (true) {
            const auto comma = rest.find(',');
            parse_double(rest.substr(0, comma));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        break;
    }
    case ValueKind::text:
        if (trim(value).empty()) throw ParseError("empty value for " + std::string(k.key.name));
        break;
    }
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string csv_number(double v) { return std::isnan(v) ? std::string() : format_double(v); }

} // namespace

std::string_view scenario_name(Scenario s) { return info(s).name; }

Scenario parse_scenario(std::string_view name)
{
    for (const auto& i : scenarios())
        if (i.name == trim(name)) return i.id;
    throw ParseError("unknown scenario '" + std::string(name) + "'");
}

std::span<const Scenario> all_scenarios()
{
    static const std::vector<Scenario> ids = [] {
        std::vector<Scenario> v;
        for (const auto& i : scenarios()) v.push_back(i.id);
        return v;
    }();
    return ids;
}

std::string_view scenario_anchor(Scenario s) { return info(s).anchor; }

bool scenario_randomized(Scenario s) { return info(s).randomized; }

std::span<const ConfigKey> config_keys()
{
    static const std::vector<ConfigKey> keys = [] {
        std::vector<ConfigKey> v;
        for (const auto& k : key_table()) v.push_back(k.key);
        return v;
    }();
    return keys;
}

bool is_numeric_key(std::string_view key)
{
    const KeyEntry* k = find_key(key);
    return k && (k->key.kind == ValueKind::number || k->key.kind == ValueKind::integer);
}

ExperimentConfig::ExperimentConfig(Scenario scenario) : scenario_(scenario) {}

ExperimentConfig ExperimentConfig::parse(std::istream& in)
{
    std::map<std::string, std::string> raw;
    std::string section;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto where = [&] { return "config line " + std::to_string(number) + ": "; };
        std::string_view text = line;
        if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
        text = trim(text);
        if (text.empty()) continue;
        if (text.front() == '[') {
            if (text.back() != ']') throw ParseError(where() + "unterminated section header");
            section = std::string(trim(text.substr(1, text.size() - 2)));
            if (section.empty()) throw ParseError(where() + "empty section name");
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) throw ParseError(where() + "expected key = value");
        const std::string name(trim(text.substr(0, eq)));
        const std::string value(trim(text.substr(eq + 1)));
        if (name.empty()) throw ParseError(where() + "missing key");
        const std::string key = section.empty() ? name : section + "." + name;
        const KeyEntry* k = find_key(key);
        if (!k) throw ParseError(where() + "unknown key '" + key + "'");
        if (raw.contains(key)) throw ParseError(where() + "duplicate key '" + key + "'");
        try {
            check_kind(*k, value);
        } catch (const ParseError& e) {
            throw ParseError(where() + key + ": " + e.what());
        }
        raw[key] = value;
    }
    const auto s = raw.find("scenario");
    if (s == raw.end()) throw ParseError("config: missing 'scenario'");
    ExperimentConfig config(parse_scenario(s->second));
    raw.erase(s);
    config.values_ = std::move(raw);
    return config;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw PreconditionError("cannot open config file " + path.string());
    return parse(in);
}

void ExperimentConfig::set(std::string_view key, std::string_view value)
{
    const KeyEntry* k = find_key(key);
    if (!k) throw PreconditionError("unknown config key '" + std::string(key) + "'");
    check_kind(*k, value);
    if (key == "scenario") {
        scenario_ = parse_scenario(value);
        return;
    }
    values_[std::string(key)] = std::string(trim(value));
}

std::string ExperimentConfig::text(std::string_view key) const
{
    if (const auto it = values_.find(std::string(key)); it != values_.end()) return it->second;
    for (const auto& [name, value] : info(scenario_).defaults)
        if (name == key) return std::string(value);
    const KeyEntry* k = find_key(key);
    if (k && !k->fallback.empty()) return std::string(k->fallback);
    throw PreconditionError("config: '" + std::string(key) + "' is required for scenario " +
                            std::string(scenario_name(scenario_)));
}

double ExperimentConfig::number(std::string_view key) const { return parse_double(text(key)); }

long long ExperimentConfig::integer(std::string_view key) const { return parse_integer(text(key)); }

std::vector<double> ExperimentConfig::numbers(std::string_view key) const
{
    const std::string all = text(key);
    std::vector<double> out;
    std::string_view rest = all;
    while (true) {
        const auto comma = rest.find(',');
        out.push_back(parse_double(rest.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    return out;
}

std::optional<std::uint64_t> ExperimentConfig::seed() const
{
    const auto it = values_.find("model.seed");
    if (it == values_.end()) return std::nullopt;
    const long long s = parse_integer(it->second);
    require(s >= 0, "config: model.seed must be nonnegative");
    return static_cast<std::uint64_t>(s);
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::parameters() const
{
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [name, value] : info(scenario_).defaults) out.emplace_back(name, text(name));
    return out;
}

void ExperimentConfig::validate() const
{
    if (scenario_randomized(scenario_) && !seed())
        throw PreconditionError("config: scenario " + std::string(scenario_name(scenario_)) +
                                " is randomized and needs model.seed");
    for (const auto& [name, value] : info(scenario_).defaults) {
        const std::string v = text(name);
        if (name == "train.family" && v != "lattice" && v != "interleaved" && v != "kadec" && v != "alternating" &&
            v != "gap")
            throw PreconditionError("config: unknown train.family '" + v + "'");
        if (name == "recon.solver" && v != "closed_form" && v != "subband" && v != "finite_section")
            throw PreconditionError("config: unknown recon.solver '" + v + "'");
    }
}

void ExperimentConfig::write(std::ostream& out) const
{
    out << "scenario = " << scenario_name(scenario_) << '\n';
    std::string section;
    for (const auto& [key, value] : values_) {
        const auto dot = key.find('.');
        const std::string sec = key.substr(0, dot);
        if (sec != section) {
            out << '[' << sec << "]\n";
            section = sec;
        }
        out << key.substr(dot + 1) << " = " << value << '\n';
    }
}

namespace {

std::uint64_t need_seed(const ExperimentConfig& c)
{
    c.validate();
    const auto s = c.seed();
    require(s.has_value(), "config: model.seed is required");
    return *s;
}

int positive_int(const ExperimentConfig& c, std::string_view key)
{
    const long long v = c.integer(key);
    require(v >= 1 && v <= (1LL << 30), "config: " + std::string(key) + " must be a positive integer");
    return static_cast<int>(v);
}

int nonnegative_int(const ExperimentConfig& c, std::string_view key)
{
    const long long v = c.integer(key);
    require(v >= 0 && v <= (1LL << 30), "config: " + std::string(key) + " must be nonnegative");
    return static_cast<int>(v);
}

double positive(const ExperimentConfig& c, std::string_view key)
{
    const double v = c.number(key);
    require(v > 0.0 && std::isfinite(v), "config: " + std::string(key) + " must be positive");
    return v;
}

ModelShape model_shape(const ExperimentConfig& c)
{
    const int w = nonnegative_int(c, "model.window");
    const auto nt = static_cast<std::size_t>(positive_int(c, "model.nt"));
    ModelShape s;
    switch (c.scenario()) {
    case Scenario::uniform:
    case Scenario::irregular:
        s = {1.0 / positive(c, "recon.omega"), positive(c, "model.support"), LatticeWindow::symmetric(w), nt};
        break;
    case Scenario::dft_multichannel:
    case Scenario::general_multichannel:
    case Scenario::pns: {
        const int m = positive_int(c, "train.m");
        const int n = positive_int(c, "train.n");
        s = {1.0 / m, static_cast<double>(n), LatticeWindow::symmetric(w), nt};
        break;
    }
    case Scenario::derivative:
        s = {1.0, 2.0, LatticeWindow::symmetric(w), nt};
        break;
    default:
        throw PreconditionError("scenario " + std::string(scenario_name(c.scenario())) + " has no operator model");
    }
    s.validate();
    return s;
}

DeltaTrain counterexample_train(const ExperimentConfig& c, std::size_t& l)
{
    const double T = positive(c, "train.spacing");
    const double gap = positive(c, "train.gap");
    const int count = positive_int(c, "train.count");
    Rng rng(need_seed(c));
    std::vector<double> nodes;
    std::vector<Complex> weights;
    for (int k = -count; k <= count; ++k) {
        nodes.push_back(k <= 0 ? k * T : k * T - (T - gap));
        weights.push_back(rng.complex_normal());
    }
    l = static_cast<std::size_t>(count);
    return {std::move(nodes), std::move(weights)};
}

std::vector<double> dense_shifts(std::span<const double> nodes, double T)
{
    std::vector<double> shifts;
    const double step = T / 8.0;
    const double lo = std::floor((nodes.front() - 2.0 * T) / step);
    const double hi = std::ceil((nodes.back() + 2.0 * T) / step);
    for (double k = lo; k <= hi; k += 1.0) shifts.push_back(k * step);
    return shifts;
}

double sup_abs(std::span<const Complex> v)
{
    double m = 0.0;
    for (auto z : v) m = std::max(m, std::abs(z));
    return m;
}

} // namespace

std::vector<double> family_nodes(const ExperimentConfig& c)
{
    const double T = positive(c, "train.spacing");
    const int count = positive_int(c, "train.count");
    const std::string family = c.text("train.family");
    const double a = c.number("train.amplitude");
    std::vector<double> nodes;
    if (family == "lattice") {
        for (int k = -count; k <= count; ++k) nodes.push_back(k * T);
    } else if (family == "interleaved") {
        const double offset = c.number("train.offset");
        require(offset > 0.0 && offset < 2.0, "interleaved family: train.offset must lie in (0, 2)");
        for (int n = -count / 2; n < count - count / 2; ++n) {
            nodes.push_back(2.0 * n * T);
            nodes.push_back((2.0 * n + offset) * T);
        }
    } else if (family == "kadec") {
        const double f = c.number("train.frequency");
        for (int k = -count; k <= count; ++k) nodes.push_back((k + a * std::sin(f * k)) * T);
    } else if (family == "alternating") {
        for (int k = -count; k <= count; ++k) nodes.push_back((k + a * (k % 2 == 0 ? 1.0 : -1.0)) * T);
    } else if (family == "gap") {
        const double hole = c.number("train.gap");
        for (int k = -count; k <= count; ++k)
            if (k * T < 0.0 || k * T > hole) nodes.push_back(k * T);
    } else {
        throw PreconditionError("unknown train.family '" + family + "'");
    }
    for (std::size_t k = 1; k < nodes.size(); ++k)
        require(nodes[k] > nodes[k - 1], "train.family " + family + ": nodes are not strictly increasing");
    return nodes;
}

OperatorModel generate_model(const ExperimentConfig& c)
{
    if (c.scenario() == Scenario::counterexample) {
        std::size_t l = 0;
        const DeltaTrain train = counterexample_train(c, l);
        CounterexampleOptions o;
        o.omega = positive(c, "recon.omega");
        o.nt = static_cast<std::size_t>(positive_int(c, "model.nt"));
        o.margin = nonnegative_int(c, "model.window");
        return separation_counterexample(train, l, positive(c, "train.spacing"), o);
    }
    const ModelShape s = model_shape(c);
    return random_operator(s, need_seed(c));
}

std::vector<SampledOutput> probe_model(const ExperimentConfig& c, const OperatorModel& model)
{
    switch (c.scenario()) {
    case Scenario::uniform: {
        const double T = positive(c, "train.spacing");
        const int extra = nonnegative_int(c, "recon.truncation");
        const double span = std::max(-model.window().first, model.window().last) * model.spacing();
        const auto K = static_cast<long long>(std::ceil(span / T - 1e-12)) + extra;
        std::vector<double> shifts;
        for (long long k = -K; k <= K; ++k) shifts.push_back(static_cast<double>(k) * T);
        const auto pad = static_cast<long long>(std::ceil(model.temporal_support() / T)) + 1;
        return {apply_train(model, uniform_train(T, {-K - pad, K + pad}), shifts)};
    }
    case Scenario::irregular: {
        const std::vector<double> nodes = family_nodes(c);
        const DeltaTrain train(nodes, std::vector<Complex>(nodes.size(), 1.0));
        return {apply_train(model, train, nodes)};
    }
    case Scenario::dft_multichannel:
        return multichannel_outputs(model, positive_int(c, "train.m"), positive_int(c, "train.n"));
    case Scenario::general_multichannel: {
        const int m = positive_int(c, "train.m");
        const int n = positive_int(c, "train.n");
        const auto ws = static_cast<std::uint64_t>(nonnegative_int(c, "train.weight_seed"));
        return multichannel_outputs(model, m, n, perturbed_dft_weights(m, n, c.number("train.epsilon"), ws));
    }
    case Scenario::pns:
        return pns_outputs(model, c.numbers("train.alpha"), positive_int(c, "train.n"),
                           nonnegative_int(c, "recon.truncation"));
    case Scenario::derivative:
        return derivative_outputs(model, nonnegative_int(c, "recon.truncation"));
    case Scenario::counterexample: {
        std::size_t l = 0;
        const DeltaTrain train = counterexample_train(c, l);
        return {apply_train(model, train, dense_shifts(train.nodes(), positive(c, "train.spacing")))};
    }
    default:
        throw PreconditionError("scenario " + std::string(scenario_name(c.scenario())) + " has no probing stage");
    }
}

ReconReport reconstruct_outputs(const ExperimentConfig& c, std::span<const SampledOutput> outputs)
{
    const auto one = [&] {
        require(outputs.size() == 1, "reconstruction: expected one channel output, got " +
                                         std::to_string(outputs.size()));
        return outputs[0];
    };
    switch (c.scenario()) {
    case Scenario::uniform: {
        const ModelShape s = model_shape(c);
        const double T = positive(c, "train.spacing");
        return reconstruct_uniform(one(), make_filter(T, s.bandwidth()), WindowFunction(s.temporal_support, T), s);
    }
    case Scenario::irregular: {
        IrregularOptions o;
        o.omega = positive(c, "recon.omega");
        o.section = static_cast<std::size_t>(positive_int(c, "recon.section"));
        o.rho_factor = c.number("recon.rho");
        return reconstruct_irregular(one(), model_shape(c), o);
    }
    case Scenario::dft_multichannel:
        return reconstruct_multichannel_dft(outputs, positive_int(c, "train.m"), positive_int(c, "train.n"),
                                            model_shape(c));
    case Scenario::general_multichannel: {
        const int m = positive_int(c, "train.m");
        const int n = positive_int(c, "train.n");
        const auto ws = static_cast<std::uint64_t>(nonnegative_int(c, "train.weight_seed"));
        return reconstruct_multichannel_general(outputs, perturbed_dft_weights(m, n, c.number("train.epsilon"), ws),
                                                m, n, model_shape(c), positive(c, "recon.max_condition"));
    }
    case Scenario::pns: {
        const std::vector<double> alphas = c.numbers("train.alpha");
        const int m = positive_int(c, "train.m");
        const int n = positive_int(c, "train.n");
        const std::string solver = c.text("recon.solver");
        if (solver == "closed_form") {
            require(m == 1 && n == 2 && alphas.size() == 2 && alphas[0] == 0.0,
                    "recon.solver closed_form needs M = 1, N = 2 and train.alpha = 0,alpha");
            require(outputs.size() == 2, "pns: expected two channel outputs");
            return pns_two_channel_reconstruct(outputs[0], outputs[1], alphas[1], model_shape(c));
        }
        PnsOptions o;
        if (solver == "finite_section") o.solver = PnsSolver::finite_section;
        else require(solver == "subband", "unknown recon.solver '" + solver + "'");
        o.section = static_cast<std::size_t>(positive_int(c, "recon.section"));
        o.rho_factor = c.number("recon.rho");
        return pns_general_reconstruct(outputs, alphas, m, n, model_shape(c), o);
    }
    case Scenario::derivative:
        require(outputs.size() == 2, "derivative: expected two channel outputs");
        return derivative_two_channel_reconstruct(outputs[0], outputs[1], model_shape(c));
    default:
        throw PreconditionError("scenario " + std::string(scenario_name(c.scenario())) +
                                " has no reconstruction stage");
    }
}

NodeAnalysis analyze_nodes(const ExperimentConfig& c, std::span<const double> nodes)
{
    require(nodes.size() >= 2, "analyze: need at least two nodes");
    NodeAnalysis a;
    const double T = positive(c, "train.spacing");
    const auto first = static_cast<long long>(std::llround(nodes.front() / T));
    const KadecResult k = kadec_check(nodes, first, T);
    a.entries.push_back({"kadec_bound", T, k.L});
    a.entries.push_back({"kadec_pass", T, k.pass ? 1.0 : 0.0});
    const std::vector<double> hs = c.numbers("analysis.h");
    const DensityReport d = beurling_density(nodes, hs);
    for (std::size_t j = 0; j < hs.size(); ++j) {
        a.entries.push_back({"n_plus", hs[j], static_cast<double>(d.n_plus[j])});
        a.entries.push_back({"n_minus", hs[j], static_cast<double>(d.n_minus[j])});
        a.entries.push_back({"ratio_plus", hs[j], d.ratio_plus[j]});
        a.entries.push_back({"ratio_minus", hs[j], d.ratio_minus[j]});
    }
    a.entries.push_back({"d_plus", hs.back(), d.d_plus});
    a.entries.push_back({"d_minus", hs.back(), d.d_minus});
    std::vector<std::size_t> sections;
    for (double s : c.numbers("analysis.sections")) {
        require(s >= 1.0 && s == std::floor(s), "analysis.sections must hold positive integers");
        if (s <= static_cast<double>(nodes.size())) sections.push_back(static_cast<std::size_t>(s));
    }
    if (!sections.empty()) {
        const FrameBoundsSweep f = frame_bounds_sweep(nodes, positive(c, "recon.omega"), sections);
        for (const auto& smp : f.samples) {
            a.entries.push_back({"frame_lower", static_cast<double>(smp.section), smp.bounds.lower});
            a.entries.push_back({"frame_upper", static_cast<double>(smp.section), smp.bounds.upper});
        }
    }
    return a;
}

void write_analysis_csv(std::ostream& out, const NodeAnalysis& analysis)
{
    out << "quantity,parameter,value\n";
    for (const auto& e : analysis.entries)
        out << e.quantity << ',' << format_double(e.parameter) << ',' << format_double(e.value) << '\n';
}

namespace {

ResultRow base_row(const ExperimentConfig& c)
{
    ResultRow r;
    r.scenario = c.scenario();
    r.seed = c.seed();
    r.parameters = c.parameters();
    return r;
}

RunResult run_model_scenario(const ExperimentConfig& c)
{
    const OperatorModel truth = generate_model(c);
    const std::vector<SampledOutput> outputs = probe_model(c, truth);
    ReconReport rep = reconstruct_outputs(c, outputs);
    compare_to_truth(rep, truth, nonnegative_int(c, "recon.trim"));

    ResultRow row = base_row(c);
    row.max_error = rep.max_error;
    row.l2_error = rep.l2_error;
    row.condition_estimate = rep.condition_estimate;
    switch (c.scenario()) {
    case Scenario::uniform:
        row.norm_identity_residual =
            verify_norm_identity_uniform(truth, outputs[0], positive(c, "train.spacing")).residual;
        break;
    case Scenario::dft_multichannel:
        row.norm_identity_residual =
            multichannel_norm_identity(truth, outputs, positive_int(c, "train.m"), positive_int(c, "train.n"))
                .residual;
        break;
    case Scenario::irregular: {
        const std::vector<double> nodes(outputs[0].shifts);
        const KadecResult k =
            kadec_check(nodes, std::llround(nodes.front() / positive(c, "train.spacing")), c.number("train.spacing"));
        const auto section = std::min(nodes.size(), static_cast<std::size_t>(positive_int(c, "recon.section")));
        const FrameBounds b = frame_bounds(ExponentialFrame(central_section(nodes, section), c.number("recon.omega")));
        row.metrics = {{"kadec_bound", k.L},
                       {"lower_bound", b.lower},
                       {"upper_bound", b.upper},
                       {"sample_residual", rep.sample_residual},
                       {"regularization", rep.regularization}};
        break;
    }
    case Scenario::pns:
    case Scenario::derivative:
        row.metrics = {{"tail_mass", rep.tail_mass}};
        break;
    default:
        break;
    }

    RunResult out;
    // worst error per lattice index
    Plot p{"reconstruction error by lattice index", "lattice index n", "max |error|", true, {}};
    std::map<int, double> worst;
    for (const auto& e : rep.errors) worst[e.lattice_index] = std::max(worst[e.lattice_index], std::abs(e.error));
    Curve curve{"max over t", {}, {}};
    for (const auto& [n, v] : worst) {
        curve.x.push_back(n);
        curve.y.push_back(v);
    }
    p.curves.push_back(std::move(curve));
    out.plot = std::move(p);
    out.rows.push_back(std::move(row));
    return out;
}

RunResult run_counterexample(const ExperimentConfig& c)
{
    const OperatorModel m = generate_model(c);
    const std::vector<SampledOutput> y = probe_model(c, m);
    const double hs = hs_norm(m);
    const double sup = sup_abs(y[0].values);
    ResultRow row = base_row(c);
    row.metrics = {{"hs_norm", hs}, {"max_output", sup}, {"output_to_hs", hs > 0.0 ? sup / hs : INFINITY}};
    RunResult out;
    out.rows.push_back(std::move(row));
    return out;
}

RunResult run_density(const ExperimentConfig& c)
{
    const std::vector<double> nodes = family_nodes(c);
    const std::vector<double> hs = c.numbers("analysis.h");
    const DensityReport d = beurling_density(nodes, hs);
    RunResult out;
    Plot p{"window counts per length", "h", "n(h) / h", false, {{"n_plus / h", {}, {}}, {"n_minus / h", {}, {}}}};
    for (std::size_t j = 0; j < hs.size(); ++j) {
        ResultRow row = base_row(c);
        row.metrics = {{"h", hs[j]},
                       {"n_plus", static_cast<double>(d.n_plus[j])},
                       {"n_minus", static_cast<double>(d.n_minus[j])},
                       {"ratio_plus", d.ratio_plus[j]},
                       {"ratio_minus", d.ratio_minus[j]},
                       {"d_plus", d.d_plus},
                       {"d_minus", d.d_minus},
                       {"boundary_caveat", d.boundary_caveat ? 1.0 : 0.0}};
        out.rows.push_back(std::move(row));
        p.curves[0].x.push_back(hs[j]);
        p.curves[0].y.push_back(d.ratio_plus[j]);
        p.curves[1].x.push_back(hs[j]);
        p.curves[1].y.push_back(d.ratio_minus[j]);
    }
    out.plot = std::move(p);
    return out;
}

RunResult run_frame_bounds(const ExperimentConfig& c)
{
    const std::vector<double> nodes = family_nodes(c);
    std::vector<std::size_t> sections;
    for (double s : c.numbers("analysis.sections")) {
        require(s >= 1.0 && s == std::floor(s), "analysis.sections must hold positive integers");
        sections.push_back(static_cast<std::size_t>(s));
    }
    const FrameBoundsSweep f = frame_bounds_sweep(nodes, positive(c, "recon.omega"), sections);
    RunResult out;
    Plot p{"finite-section frame bounds", "section size", "bound", true, {{"lower", {}, {}}, {"upper", {}, {}}}};
    for (const auto& smp : f.samples) {
        ResultRow row = base_row(c);
        row.condition_estimate = smp.bounds.lower > 0.0 ? smp.bounds.upper / smp.bounds.lower : INFINITY;
        row.metrics = {{"section", static_cast<double>(smp.section)},
                       {"lower_bound", smp.bounds.lower},
                       {"upper_bound", smp.bounds.upper},
                       {"lower_non_increasing", f.lower_non_increasing ? 1.0 : 0.0},
                       {"upper_non_decreasing", f.upper_non_decreasing ? 1.0 : 0.0}};
        out.rows.push_back(std::move(row));
        p.curves[0].x.push_back(static_cast<double>(smp.section));
        p.curves[0].y.push_back(smp.bounds.lower);
        p.curves[1].x.push_back(static_cast<double>(smp.section));
        p.curves[1].y.push_back(smp.bounds.upper);
    }
    out.plot = std::move(p);
    return out;
}

RunResult run_wks(const ExperimentConfig& c)
{
    const double T = positive(c, "train.spacing");
    const double omega = positive(c, "recon.omega");
    const int w = nonnegative_int(c, "model.window");
    const int extra = nonnegative_int(c, "recon.truncation");
    const Filter filter = make_filter(T, omega);
    Rng rng(need_seed(c));
    std::vector<Complex> coef(static_cast<std::size_t>(2 * w + 1));
    for (auto& v : coef) v = rng.complex_normal();
    // f(x) = sum_n c_n sinc(omega x - n)
    const auto f = [&](double x) {
        Complex s;
        for (int n = -w; n <= w; ++n) s += coef[static_cast<std::size_t>(n + w)] * sinc(omega * x - n);
        return s;
    };
    const auto K = static_cast<long long>(std::ceil(w / omega / T)) + extra;
    UniformSamples samples{T, -K, {}};
    for (long long k = -K; k <= K; ++k) samples.values.push_back(f(static_cast<double>(k) * T));
    const double half = 0.5 * w / omega;
    std::vector<double> points;
    for (int j = 0; j <= 256; ++j) points.push_back(-half + j * (2.0 * half / 256.0));
    const std::vector<Complex> g = wks_reconstruct(samples, filter, points);
    ResultRow row = base_row(c);
    double worst = 0.0, sq = 0.0;
    Curve curve{"|error|", {}, {}};
    for (std::size_t j = 0; j < points.size(); ++j) {
        const double e = std::abs(g[j] - f(points[j]));
        worst = std::max(worst, e);
        sq += e * e * (2.0 * half / 256.0);
        curve.x.push_back(points[j]);
        curve.y.push_back(e);
    }
    row.max_error = worst;
    row.l2_error = std::sqrt(sq);
    RunResult out;
    out.rows.push_back(std::move(row));
    out.plot = Plot{"sampling series error", "x", "|error|", true, {std::move(curve)}};
    return out;
}

RunResult run_haar(const ExperimentConfig& c)
{
    const int w = nonnegative_int(c, "model.window");
    HaarModel truth(positive(c, "model.support"), LatticeWindow::symmetric(w),
                    static_cast<std::size_t>(positive_int(c, "model.nt")));
    Rng rng(need_seed(c));
    for (auto& h : truth.heights) h = Complex(static_cast<double>(rng.integer(-9, 9)), 0.0);
    std::vector<double> shifts;
    for (int n = -w; n <= w; ++n) shifts.push_back(n);
    const HaarModel rec = haar_reconstruct(haar_apply_unit_train(truth, shifts), truth.temporal_support, truth.window);
    ResultRow row = base_row(c);
    double worst = 0.0;
    for (std::size_t k = 0; k < truth.heights.size(); ++k)
        worst = std::max(worst, std::abs(rec.heights[k] - truth.heights[k]));
    row.max_error = worst;
    row.metrics = {{"exact_match", rec == truth ? 1.0 : 0.0}};
    RunResult out;
    out.rows.push_back(std::move(row));
    return out;
}

} // namespace

RunResult run(const ExperimentConfig& config)
{
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    RunResult out;
    switch (config.scenario()) {
    case Scenario::counterexample:
        out = run_counterexample(config);
        break;
    case Scenario::density:
        out = run_density(config);
        break;
    case Scenario::frame_bounds:
        out = run_frame_bounds(config);
        break;
    case Scenario::wks_baseline:
        out = run_wks(config);
        break;
    case Scenario::haar:
        out = run_haar(config);
        break;
    default:
        out = run_model_scenario(config);
        break;
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    for (auto& r : out.rows) r.runtime_ms = ms;
    return out;
}

RunResult sweep(const ExperimentConfig& config, std::string_view axis, std::span<const double> values)
{
    const KeyEntry* k = find_key(axis);
    require(k != nullptr, "sweep: unknown config key '" + std::string(axis) + "'");
    require(is_numeric_key(axis), "sweep: axis '" + std::string(axis) + "' is not a numeric config field");
    RunResult out;
    if (values.empty()) return out;
    Plot p{"error versus " + std::string(axis), std::string(axis), "value", true, {}};
    std::map<std::string, Curve> curves;
    std::vector<std::string> order;
    const auto add = [&](const std::string& name, double x, double y) {
        if (!std::isfinite(y)) return;
        if (!curves.contains(name)) {
            order.push_back(name);
            curves[name].name = name;
        }
        curves[name].x.push_back(x);
        curves[name].y.push_back(y);
    };
    for (double v : values) {
        ExperimentConfig c = config;
        if (k->key.kind == ValueKind::integer) {
            require(v == std::floor(v) && std::abs(v) < 9e15,
                    "sweep: axis '" + std::string(axis) + "' takes integers, got " + format_double(v));
            c.set(axis, std::to_string(static_cast<long long>(v)));
        } else {
            c.set(axis, format_double(v));
        }
        RunResult r = run(c);
        if (!r.rows.empty()) {
            const ResultRow& first = r.rows.front();
            add("max_error", v, first.max_error);
            add("norm_identity_residual", v, first.norm_identity_residual);
            for (const auto& [name, value] : first.metrics)
                if (name.ends_with("residual") || name == "output_to_hs") add(name, v, value);
        }
        for (auto& row : r.rows) out.rows.push_back(std::move(row));
    }
    bool positive_x = true;
    for (double v : values) positive_x = positive_x && v > 0.0;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    p.log_x = positive_x && *hi >= 100.0 * *lo;
    for (const auto& name : order) p.curves.push_back(std::move(curves[name]));
    out.plot = std::move(p);
    return out;
}

void write_csv(std::ostream& out, std::span<const ResultRow> rows, bool timings)
{
    if (rows.empty()) return;
    const ResultRow& head = rows.front();
    out << "# anchor: " << scenario_anchor(head.scenario) << '\n';
    out << "scenario,seed";
    for (const auto& [name, value] : head.parameters) out << ',' << name;
    out << ",max_error,l2_error,norm_identity_residual,condition_estimate";
    for (const auto& [name, value] : head.metrics) out << ',' << name;
    if (timings) out << ",runtime_ms";
    out << '\n';
    for (const auto& r : rows) {
        out << scenario_name(r.scenario) << ',' << (r.seed ? std::to_string(*r.seed) : std::string());
        for (const auto& [name, value] : r.parameters) out << ',' << csv_field(value);
        out << ',' << csv_number(r.max_error) << ',' << csv_number(r.l2_error) << ','
            << csv_number(r.norm_identity_residual) << ',' << csv_number(r.condition_estimate);
        for (const auto& [name, value] : r.metrics) out << ',' << csv_number(value);
        if (timings) out << ',' << csv_number(r.runtime_ms);
        out << '\n';
    }
}

namespace {

std::string fixed(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string label(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string escape_xml(std::string_view s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

} // namespace

void write_svg(std::ostream& out, const Plot& plot)
{
    constexpr double width = 640, height = 400, left = 70, right = 20, top = 40, bottom = 50;
    const auto tx = [&](double x) { return plot.log_x ? std::log10(x) : x; };
    const auto ty = [&](double y) { return plot.log_y ? std::log10(y) : y; };
    const auto usable = [&](double x, double y) {
        return std::isfinite(x) && std::isfinite(y) && (!plot.log_x || x > 0.0) && (!plot.log_y || y > 0.0);
    };
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& c : plot.curves)
        for (std::size_t k = 0; k < c.x.size(); ++k) {
            if (!usable(c.x[k], c.y[k])) continue;
            x0 = std::min(x0, tx(c.x[k]));
            x1 = std::max(x1, tx(c.x[k]));
            y0 = std::min(y0, ty(c.y[k]));
            y1 = std::max(y1, ty(c.y[k]));
        }
    if (!(x0 <= x1)) x0 = 0.0, x1 = 1.0;
    if (!(y0 <= y1)) y0 = 0.0, y1 = 1.0;
    if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
    if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
    const auto px = [&](double x) { return left + (tx(x) - x0) / (x1 - x0) * (width - left - right); };
    const auto py = [&](double y) { return height - bottom - (ty(y) - y0) / (y1 - y0) * (height - top - bottom); };
    const auto shown = [&](double v, bool log) { return label(log ? std::pow(10.0, v) : v); };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\">" << escape_xml(plot.title) << "</text>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right << "\" y2=\""
        << height - bottom << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << height - bottom
        << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double fx = x0 + (x1 - x0) * t / 4.0;
        const double fy = y0 + (y1 - y0) * t / 4.0;
        const double sx = left + (width - left - right) * t / 4.0;
        const double sy = height - bottom - (height - top - bottom) * t / 4.0;
        out << "<text x=\"" << fixed(sx) << "\" y=\"" << height - bottom + 16 << "\" text-anchor=\"middle\">"
            << shown(fx, plot.log_x) << "</text>\n";
        out << "<text x=\"" << left - 6 << "\" y=\"" << fixed(sy + 4) << "\" text-anchor=\"end\">"
            << shown(fy, plot.log_y) << "</text>\n";
    }
    out << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">"
        << escape_xml(plot.x_label) << "</text>\n";
    out << "<text x=\"16\" y=\"" << (top + height - bottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << (top + height - bottom) / 2 << ")\">" << escape_xml(plot.y_label) << "</text>\n";
    static constexpr std::array<const char*, 6> colors{"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                                       "#8c564b"};
    for (std::size_t c = 0; c < plot.curves.size(); ++c) {
        const Curve& curve = plot.curves[c];
        const char* color = colors[c % colors.size()];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (std::size_t k = 0; k < curve.x.size(); ++k) {
            if (!usable(curve.x[k], curve.y[k])) continue;
            out << (first ? "" : " ") << fixed(px(curve.x[k])) << ',' << fixed(py(curve.y[k]));
            first = false;
        }
        out << "\"/>\n";
        const double ly = top + 14.0 * static_cast<double>(c);
        out << "<text x=\"" << width - right - 4 << "\" y=\"" << fixed(ly + 4) << "\" text-anchor=\"end\" fill=\""
            << color << "\">" << escape_xml(curve.name) << "</text>\n";
    }
    out << "</svg>\n";
}

void emit(const RunResult& result, const OutputPaths& paths)
{
    if (result.rows.empty()) return;
    const auto open = [](const std::filesystem::path& p) {
        if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
        std::ofstream f(p, std::ios::binary);
        if (!f) throw PreconditionError("cannot write " + p.string());
        return f;
    };
    if (!paths.csv.empty()) {
        std::ofstream f = open(paths.csv);
        write_csv(f, result.rows, paths.timings);
    }
    if (!paths.svg.empty() && result.plot) {
        std::ofstream f = open(paths.svg);
        write_svg(f, *result.plot);
    }
}

} // namespace opsamp
