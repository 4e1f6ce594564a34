// gnf: command-line front end for the fuzzy -> neural -> genetic toolchain.
//
// Exit codes: 0 success, 1 usage, 2 parse error (rulebase, run file or
// model), 3 evaluation error, 4 pipeline stage failure. Machine output
// (CSV/JSON) goes to files or stdout; diagnostics go to stderr.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gnf/fuzzy.hpp"
#include "gnf/ga.hpp"
#include "gnf/ioutil.hpp"
#include "gnf/net.hpp"
#include "gnf/numfmt.hpp"
#include "gnf/pipeline.hpp"
#include "gnf/rulebase.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitParse = 2;
constexpr int kExitEval = 3;
constexpr int kExitStage = 4;

struct CliFailure {
    int code;
    std::string message;
};

gnf::FuzzySystem load_rulebase(const fs::path& path) {
    std::string text;
    try {
        text = gnf::read_file(path);
    } catch (const gnf::Error& e) {
        throw CliFailure{kExitParse, e.what()};
    }
    try {
        return gnf::parse_rulebase(text);
    } catch (const gnf::ParseFailure& e) {
        throw CliFailure{kExitParse, path.string() + ":" + e.what()};
    }
}

struct RunFile {
    fs::path rulebase;
    fs::path out_dir = "out";
    gnf::PipelineConfig config;
};

RunFile load_run_file(const fs::path& path) {
    std::string text;
    try {
        text = gnf::read_file(path);
    } catch (const gnf::Error& e) {
        throw CliFailure{kExitParse, e.what()};
    }
    auto doc = nlohmann::ordered_json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw CliFailure{kExitParse, path.string() + ": run file is not a JSON object"};

    RunFile run;
    if (!doc.contains("rulebase") || !doc["rulebase"].is_string())
        throw CliFailure{kExitParse, path.string() + ": run file needs a 'rulebase' path"};
    run.rulebase = doc["rulebase"].get<std::string>();
    if (run.rulebase.is_relative()) run.rulebase = path.parent_path() / run.rulebase;
    doc.erase("rulebase");
    if (doc.contains("out_dir")) {
        if (!doc["out_dir"].is_string())
            throw CliFailure{kExitParse, path.string() + ": out_dir must be a string"};
        run.out_dir = doc["out_dir"].get<std::string>();
        doc.erase("out_dir");
    }
    try {
        run.config = gnf::pipeline_config_from_json(doc.dump());
    } catch (const gnf::ConfigError& e) {
        throw CliFailure{kExitParse, path.string() + ": " + e.what()};
    }
    return run;
}

gnf::InputValues parse_input_values(const std::vector<std::string>& raw) {
    gnf::InputValues values;
    for (const auto& item : raw) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw CliFailure{kExitUsage, "--in expects name=value, got '" + item + "'"};
        const auto value = gnf::parse_double(std::string_view(item).substr(eq + 1));
        if (!value)
            throw CliFailure{kExitUsage, "--in value in '" + item + "' is not a number"};
        values[item.substr(0, eq)] = *value;
    }
    return values;
}

void write_artifact(const fs::path& dir, const char* name, std::string_view content) {
    gnf::write_file_atomic(dir / name, content);
}

int cmd_eval(const fs::path& rulebase, const std::vector<std::string>& raw_inputs,
             std::optional<int> resolution) {
    gnf::FuzzySystem system = load_rulebase(rulebase);
    if (resolution) system.norms.resolution = *resolution;
    const gnf::InputValues values = parse_input_values(raw_inputs);
    gnf::InferResult result;
    try {
        system.validate();
        result = gnf::infer(system, values);
    } catch (const gnf::Error& e) {
        throw CliFailure{kExitEval, e.what()};
    }
    std::cout << system.output.name << " = " << gnf::format_double(result.crisp) << "\n";
    for (std::size_t r = 0; r < system.rules.size(); ++r) {
        // implication is min, so the clip level equals the firing strength
        const double s = result.trace.firing_strengths[r];
        std::cout << "rule " << (r + 1) << ": firing=" << gnf::format_double(s)
                  << " clip=" << gnf::format_double(s) << " then "
                  << system.rules[r].consequent_variable << " is "
                  << system.rules[r].consequent_label << "\n";
    }
    return 0;
}

int cmd_fmt(const fs::path& rulebase) {
    std::cout << gnf::serialize_rulebase(load_rulebase(rulebase));
    return 0;
}

int cmd_sample(const fs::path& rulebase, double step, int points,
               const std::string& out) {
    gnf::FuzzySystem system = load_rulebase(rulebase);
    gnf::SamplingPlan plan;
    plan.step = step;
    plan.points = points;
    gnf::Dataset data;
    try {
        data = gnf::sample_system(system, plan);
    } catch (const gnf::Error& e) {
        throw CliFailure{kExitEval, e.what()};
    }
    std::string csv;
    for (const auto& var : system.inputs) csv += var.name + ",";
    csv += system.output.name + "\n";
    for (std::size_t s = 0; s < data.size(); ++s) {
        for (int d = 0; d < data.input_dim; ++d)
            csv += gnf::format_double(data.input(s)[d]) + ",";
        csv += gnf::format_double(data.target(s)[0]) + "\n";
    }
    if (!out.empty()) gnf::write_file_atomic(out, csv);
    else std::cout << csv;
    return 0;
}

void apply_overrides(RunFile& run, const std::optional<std::uint64_t>& seed,
                     const std::string& out_dir) {
    if (seed) run.config.rng_seed = *seed;
    if (!out_dir.empty()) run.out_dir = out_dir;
    std::error_code ec;
    fs::create_directories(run.out_dir, ec);
    if (ec)
        throw CliFailure{kExitStage,
                         "cannot create output directory '" + run.out_dir.string() + "'"};
}

int cmd_train(const fs::path& run_path, const std::optional<std::uint64_t>& seed,
              const std::string& out_dir) {
    RunFile run = load_run_file(run_path);
    apply_overrides(run, seed, out_dir);
    gnf::FuzzySystem system = load_rulebase(run.rulebase);
    try {
        gnf::DistillResult result = gnf::distill(system, run.config);
        write_artifact(run.out_dir, "model_nf.json", gnf::network_to_json(result.net));
        write_artifact(run.out_dir, "train_trace.csv", gnf::train_trace_csv(result.trace));
        std::cout << "train: epochs=" << result.trace.epochs_run
                  << " mse=" << gnf::format_double(result.trace.mse.back())
                  << " converged=" << (result.trace.converged ? "yes" : "no") << "\n";
    } catch (const gnf::Error& e) {
        throw CliFailure{kExitStage, std::string("distill: ") + e.what()};
    }
    return 0;
}

int cmd_refine(const fs::path& run_path, const std::optional<std::uint64_t>& seed,
               const std::string& out_dir, const std::string& model_path) {
    RunFile run = load_run_file(run_path);
    apply_overrides(run, seed, out_dir);
    gnf::FuzzySystem system = load_rulebase(run.rulebase);
    gnf::Network nf;
    try {
        nf = gnf::load_network(model_path.empty() ? run.out_dir / "model_nf.json"
                                                  : fs::path(model_path));
    } catch (const gnf::Error& e) {
        throw CliFailure{kExitParse, e.what()};
    }
    try {
        gnf::Dataset data = gnf::sample_system(system, run.config.sampling);
        gnf::RefineResult result = gnf::refine(nf, data, run.config);
        write_artifact(run.out_dir, "model_gnf.json", gnf::network_to_json(result.net));
        write_artifact(run.out_dir, "ga_trace.csv", gnf::ga_trace_csv(result.trace));
        std::cout << "refine: generations=" << result.trace.generations_run
                  << " best=" << gnf::format_double(result.fitness) << "\n";
    } catch (const gnf::Error& e) {
        throw CliFailure{kExitStage, std::string("refine: ") + e.what()};
    }
    return 0;
}

int cmd_pipeline(const fs::path& run_path, const std::optional<std::uint64_t>& seed,
                 const std::string& out_dir) {
    RunFile run = load_run_file(run_path);
    apply_overrides(run, seed, out_dir);
    gnf::FuzzySystem system = load_rulebase(run.rulebase);

    gnf::PipelineResult result;
    try {
        result = gnf::run_pipeline(system, run.config);
    } catch (const gnf::Error& e) {
        throw CliFailure{kExitStage, e.what()};
    }

    try {
        write_artifact(run.out_dir, "model_nf.json", gnf::network_to_json(result.neuro_fuzzy));
        write_artifact(run.out_dir, "model_gnf.json", gnf::network_to_json(result.gnf));
        write_artifact(run.out_dir, "train_trace.csv", gnf::train_trace_csv(result.train_trace));
        write_artifact(run.out_dir, "ga_trace.csv", gnf::ga_trace_csv(result.ga_trace));
        write_artifact(run.out_dir, "report.csv", gnf::error_report_csv(result.report));
        write_artifact(run.out_dir, "holdout.csv", gnf::error_report_csv(result.holdout_report));
        write_artifact(run.out_dir, "report.json",
                       gnf::error_report_json(result.report, run.config));
    } catch (const gnf::Error& e) {
        throw CliFailure{kExitStage, std::string("write: ") + e.what()};
    }

    // Perf numbers are wall-clock and vary run to run, so they are
    // diagnostics: stderr only, never in the artifacts.
    try {
        gnf::Dataset grid = gnf::sample_system(system, run.config.sampling);
        const gnf::SpeedReport speed = gnf::measure_speed(system, result.gnf, grid);
        std::cerr << "speed: fis=" << speed.fis_seconds << "s net=" << speed.net_seconds
                  << "s net_vs_fis=" << speed.net_vs_fis
                  << "x ga_eval=" << speed.ga_eval_seconds
                  << "s gd_epoch=" << speed.gd_epoch_seconds << "s\n";
    } catch (const gnf::Error&) {
        // timing is best-effort
    }

    std::cout << "pipeline: sum_error1=" << gnf::format_double(result.report.error1.sum)
              << " sum_error2=" << gnf::format_double(result.report.error2.sum)
              << " generations=" << result.ga_trace.generations_run << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fuzzy inference, neural distillation and GA weight refinement"};
    app.require_subcommand(1);

    std::string rulebase;
    std::vector<std::string> in_values;
    std::optional<int> resolution;
    auto* eval = app.add_subcommand("eval", "Evaluate a rule base at crisp inputs");
    eval->add_option("rulebase", rulebase, "Rule base (.gnf) file")->required();
    eval->add_option("--in", in_values, "Input value as name=value (repeatable)");
    auto* res_opt = eval->add_option("--resolution", resolution,
                                     "Output grid resolution override (>= 2)");
    res_opt->check(CLI::Range(2, 10'000'000));

    std::string fmt_rulebase;
    auto* fmt = app.add_subcommand("fmt", "Canonicalize a rule base to stdout");
    fmt->add_option("rulebase", fmt_rulebase, "Rule base (.gnf) file")->required();

    std::string sample_rulebase;
    double sample_step = 0.5;
    int sample_points = 0;
    std::string sample_out;
    auto* sample = app.add_subcommand("sample", "Sample a rule base onto a CSV grid");
    sample->add_option("rulebase", sample_rulebase, "Rule base (.gnf) file")->required();
    sample->add_option("--step", sample_step, "Grid step in universe units");
    sample->add_option("--points", sample_points, "Points per input (overrides --step)");
    sample->add_option("--out", sample_out, "Output CSV path (default stdout)");

    std::string run_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::string model_path;
    auto add_run_options = [&](CLI::App* cmd) {
        cmd->add_option("runfile", run_path, "Run file (JSON)")->required();
        cmd->add_option("--seed", seed, "Override the run file seed");
        cmd->add_option("--out", out_dir, "Override the output directory");
    };
    auto* train = app.add_subcommand("train", "Sample and distill into a network");
    add_run_options(train);
    auto* refine = app.add_subcommand("refine", "GA-refine a trained network");
    add_run_options(refine);
    refine->add_option("--model", model_path, "Trained model path (default <out>/model_nf.json)");
    auto* pipeline = app.add_subcommand("pipeline", "Full run: distill, refine, report");
    add_run_options(pipeline);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;  // stable usage exit code
    }

    try {
        if (eval->parsed()) return cmd_eval(rulebase, in_values, resolution);
        if (fmt->parsed()) return cmd_fmt(fmt_rulebase);
        if (sample->parsed())
            return cmd_sample(sample_rulebase, sample_step, sample_points, sample_out);
        if (train->parsed()) return cmd_train(run_path, seed, out_dir);
        if (refine->parsed()) return cmd_refine(run_path, seed, out_dir, model_path);
        if (pipeline->parsed()) return cmd_pipeline(run_path, seed, out_dir);
    } catch (const CliFailure& e) {
        std::cerr << "gnf: " << e.message << "\n";
        return e.code;
    } catch (const gnf::ParseFailure& e) {
        std::cerr << "gnf: " << e.what() << "\n";
        return kExitParse;
    } catch (const gnf::EvalError& e) {
        std::cerr << "gnf: " << e.what() << "\n";
        return kExitEval;
    } catch (const gnf::Error& e) {
        std::cerr << "gnf: " << e.what() << "\n";
        return kExitStage;
    } catch (const std::exception& e) {
        std::cerr << "gnf: " << e.what() << "\n";
        return kExitStage;
    }
    return kExitUsage;
}
