// Command-line driver for the experiment harness.

#include "opsamp/error.hpp"
#include "opsamp/harness.hpp"
#include "opsamp/text_io.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>

using namespace opsamp;

namespace {

constexpr const char* kDescription =
    "Sampling and identification of operators with band-limited Kohn-Nirenberg symbols.\n"
    "Kernels are stored as h(t,x) = sum_n a_n(t) sinc((x - t - n*spacing)/spacing) with\n"
    "sinc(u) = sin(pi u)/(pi u) and sinc(0) = 1.\n"
    "Exit codes: 0 success, 2 invalid input or violated precondition, 1 internal error.";

struct Common {
    std::string config;
    long long seed = -1;
    std::string out_dir = ".";
    std::string csv;
    std::string svg;
    bool timings = false;
    std::vector<std::string> sets;
};

void add_common(CLI::App* app, Common& c, bool outputs)
{
    app->add_option("--config", c.config, "experiment config file")->required()->check(CLI::ExistingFile);
    app->add_option("--seed", c.seed, "overrides model.seed")->check(CLI::NonNegativeNumber);
    app->add_option("--set", c.sets, "override a config key, e.g. --set recon.omega=0.8")->take_all();
    app->add_option("--out-dir", c.out_dir, "directory for every written file");
    if (outputs) {
        app->add_option("--csv", c.csv, "CSV file name (default: output.csv or <scenario>.csv)");
        app->add_option("--svg", c.svg, "SVG plot file name (default: output.svg, else no plot)");
        app->add_flag("--timings", c.timings, "add a runtime_ms column (breaks byte reproducibility)");
    }
}

ExperimentConfig load_config(const Common& c)
{
    ExperimentConfig config = ExperimentConfig::load(c.config);
    for (const auto& s : c.sets) {
        const auto eq = s.find('=');
        require(eq != std::string::npos, "--set expects key=value, got '" + s + "'");
        config.set(trim(std::string_view(s).substr(0, eq)), trim(std::string_view(s).substr(eq + 1)));
    }
    if (c.seed >= 0) config.set("model.seed", std::to_string(c.seed));
    return config;
}

std::filesystem::path under(const Common& c, const std::string& name)
{
    return std::filesystem::path(c.out_dir) / name;
}

OutputPaths output_paths(const Common& c, const ExperimentConfig& config)
{
    OutputPaths p;
    std::string csv = c.csv;
    if (csv.empty())
        csv = config.has("output.csv") ? config.text("output.csv")
                                       : std::string(scenario_name(config.scenario())) + ".csv";
    p.csv = under(c, csv);
    std::string svg = c.svg;
    if (svg.empty() && config.has("output.svg")) svg = config.text("output.svg");
    if (!svg.empty()) p.svg = under(c, svg);
    p.timings = c.timings;
    return p;
}

void print_rows(const RunResult& r)
{
    for (const auto& row : r.rows) {
        std::cout << scenario_name(row.scenario);
        const auto field = [](const char* name, double v) {
            if (!std::isnan(v)) std::cout << ' ' << name << '=' << format_double(v);
        };
        field("max_error", row.max_error);
        field("l2_error", row.l2_error);
        field("norm_identity_residual", row.norm_identity_residual);
        field("condition_estimate", row.condition_estimate);
        for (const auto& [name, v] : row.metrics) field(name.c_str(), v);
        std::cout << '\n';
    }
}

std::vector<std::string> split_list(std::string_view text)
{
    std::vector<std::string> out;
    if (trim(text).empty()) return out;
    while (true) {
        const auto comma = text.find(',');
        out.emplace_back(trim(text.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        text.remove_prefix(comma + 1);
    }
    return out;
}

std::ofstream open_out(const std::filesystem::path& p)
{
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p);
    if (!f) throw PreconditionError("cannot write " + p.string());
    return f;
}

std::ifstream open_in(const std::string& p)
{
    std::ifstream f(p);
    if (!f) throw PreconditionError("cannot open " + p);
    return f;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{kDescription, "opsamp"};
    app.require_subcommand(1);

    Common run_opts;
    CLI::App* run_cmd = app.add_subcommand("run", "run one scenario end to end and write its CSV");
    add_common(run_cmd, run_opts, true);

    Common sweep_opts;
    std::string axis;
    std::string values_text;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a scenario once per value of a numeric config key");
    add_common(sweep_cmd, sweep_opts, true);
    sweep_cmd->add_option("--axis", axis, "numeric config key, e.g. recon.truncation")->required();
    sweep_cmd->add_option("--values", values_text, "comma-separated values; empty runs nothing")
        ->required()
        ->expected(0, 1);

    Common gen_opts;
    std::string gen_model = "model.txt";
    CLI::App* gen_cmd = app.add_subcommand("gen", "write the scenario's random (or constructed) operator model");
    add_common(gen_cmd, gen_opts, false);
    gen_cmd->add_option("--model", gen_model, "model file name under --out-dir");

    Common probe_opts;
    std::string probe_model_in;
    std::string probe_out = "outputs.txt";
    CLI::App* probe_cmd = app.add_subcommand("probe", "apply the scenario's identifiers to a model file");
    add_common(probe_cmd, probe_opts, false);
    probe_cmd->add_option("--model", probe_model_in, "model file")->required()->check(CLI::ExistingFile);
    probe_cmd->add_option("--outputs", probe_out, "output file name under --out-dir");

    Common recon_opts;
    std::string recon_in;
    std::string recon_truth;
    std::string recon_model = "estimate.txt";
    CLI::App* recon_cmd = app.add_subcommand("recon", "reconstruct a model from channel outputs");
    add_common(recon_cmd, recon_opts, false);
    recon_cmd->add_option("--outputs", recon_in, "channel output file")->required()->check(CLI::ExistingFile);
    recon_cmd->add_option("--truth", recon_truth, "model file to compare against")->check(CLI::ExistingFile);
    recon_cmd->add_option("--model", recon_model, "estimate file name under --out-dir");
    recon_cmd->add_option("--csv", recon_opts.csv, "per-coefficient error CSV (needs --truth)");

    Common analyze_opts;
    std::string analyze_train;
    CLI::App* analyze_cmd =
        app.add_subcommand("analyze", "Kadec check, Beurling densities and frame bounds of a node set");
    add_common(analyze_cmd, analyze_opts, false);
    analyze_cmd->add_option("--train", analyze_train, "train file (default: nodes from train.family)")
        ->check(CLI::ExistingFile);
    analyze_cmd->add_option("--csv", analyze_opts.csv, "CSV file name under --out-dir (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*run_cmd) {
            const ExperimentConfig config = load_config(run_opts);
            const RunResult r = run(config);
            emit(r, output_paths(run_opts, config));
            print_rows(r);
        } else if (*sweep_cmd) {
            const ExperimentConfig config = load_config(sweep_opts);
            std::vector<double> values;
            for (const auto& v : split_list(values_text)) values.push_back(parse_double(v));
            const RunResult r = sweep(config, axis, values);
            emit(r, output_paths(sweep_opts, config));
            print_rows(r);
        } else if (*gen_cmd) {
            const ExperimentConfig config = load_config(gen_opts);
            config.validate();
            std::ofstream f = open_out(under(gen_opts, gen_model));
            write_model(f, generate_model(config));
        } else if (*probe_cmd) {
            const ExperimentConfig config = load_config(probe_opts);
            config.validate();
            std::ifstream in = open_in(probe_model_in);
            const OperatorModel model = read_model(in);
            std::ofstream f = open_out(under(probe_opts, probe_out));
            for (const auto& o : probe_model(config, model)) write_output(f, o);
        } else if (*recon_cmd) {
            const ExperimentConfig config = load_config(recon_opts);
            config.validate();
            std::ifstream in = open_in(recon_in);
            const std::vector<SampledOutput> outputs = read_outputs(in);
            ReconReport rep = reconstruct_outputs(config, outputs);
            {
                std::ofstream f = open_out(under(recon_opts, recon_model));
                write_model(f, rep.model());
            }
            if (!recon_truth.empty()) {
                std::ifstream t = open_in(recon_truth);
                const OperatorModel truth = read_model(t);
                compare_to_truth(rep, truth, static_cast<int>(config.integer("recon.trim")));
                std::cout << "max_error=" << format_double(rep.max_error)
                          << " l2_error=" << format_double(rep.l2_error) << '\n';
                if (!recon_opts.csv.empty()) {
                    std::ofstream f = open_out(under(recon_opts, recon_opts.csv));
                    write_report_csv(f, rep);
                }
            } else {
                require(recon_opts.csv.empty(), "recon: --csv needs --truth");
            }
        } else if (*analyze_cmd) {
            const ExperimentConfig config = load_config(analyze_opts);
            std::vector<double> nodes;
            if (!analyze_train.empty()) {
                std::ifstream in = open_in(analyze_train);
                const DeltaTrain train = read_train(in);
                nodes.assign(train.nodes().begin(), train.nodes().end());
            } else {
                nodes = family_nodes(config);
            }
            const NodeAnalysis a = analyze_nodes(config, nodes);
            if (analyze_opts.csv.empty()) {
                write_analysis_csv(std::cout, a);
            } else {
                std::ofstream f = open_out(under(analyze_opts, analyze_opts.csv));
                write_analysis_csv(f, a);
            }
        }
    } catch (const PreconditionError& e) {
        std::cerr << "opsamp: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "opsamp: internal error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
