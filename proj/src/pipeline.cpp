#include "gnf/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include "json.hpp"

#include "gnf/numfmt.hpp"

namespace gnf {

void SamplingPlan::validate() const {
    if (points != 0 && points < 2) throw ConfigError("sampling points must be >= 2");
    if (points == 0 && !(step > 0.0)) throw ConfigError("sampling step must be positive");
    if (!(offset >= 0.0)) throw ConfigError("sampling offset must be non-negative");
}

void PipelineConfig::validate() const {
    sampling.validate();
    if (hidden_layers.empty()) throw ConfigError("network needs at least one hidden layer");
    for (int h : hidden_layers)
        if (h < 1) throw ConfigError("hidden layer sizes must be positive");
    train.validate();
    ga.validate();
}

namespace {

std::vector<double> axis_points(const Universe& universe, const SamplingPlan& plan) {
    std::vector<double> points;
    if (plan.points > 0) {
        const double step = universe.span() / (plan.points - 1);
        for (int i = 0; i < plan.points; ++i) {
            const double x = universe.lo + plan.offset + step * i;
            if (x > universe.hi + step * 1e-9) break;
            points.push_back(std::min(x, universe.hi));
        }
    } else {
        for (int i = 0;; ++i) {
            const double x = universe.lo + plan.offset + plan.step * i;
            if (x > universe.hi + plan.step * 1e-9) break;
            points.push_back(std::min(x, universe.hi));
        }
    }
    if (points.size() < 2)
        throw ConfigError("sampling plan yields fewer than 2 points on '" +
                          universe.name + "'");
    return points;
}

}  // namespace

Dataset sample_system(const FuzzySystem& system, const SamplingPlan& plan) {
    plan.validate();
    system.validate();

    std::vector<std::vector<double>> axes;
    axes.reserve(system.inputs.size());
    for (const auto& var : system.inputs) axes.push_back(axis_points(var.universe, plan));

    Dataset data;
    std::vector<std::size_t> index(axes.size(), 0);
    std::vector<double> point(axes.size());
    InputValues values;
    while (true) {
        for (std::size_t d = 0; d < axes.size(); ++d) {
            point[d] = axes[d][index[d]];
            values[system.inputs[d].name] = point[d];
        }
        try {
            const double target = infer(system, values).crisp;
            data.add(point, {&target, 1});
        } catch (const EvalError& e) {
            std::string where;
            for (std::size_t d = 0; d < point.size(); ++d)
                where += (d ? ", " : "") + system.inputs[d].name + "=" +
                         format_double(point[d]);
            throw EvalError(std::string(e.what()) + " at grid point (" + where + ")");
        }
        // Lexicographic odometer, last axis fastest.
        std::size_t d = axes.size();
        while (d > 0) {
            --d;
            if (++index[d] < axes[d].size()) break;
            index[d] = 0;
            if (d == 0) {
                data.validate();
                return data;
            }
        }
    }
}

namespace {

Network pipeline_template(const FuzzySystem& system, const PipelineConfig& config) {
    std::vector<int> sizes;
    sizes.push_back(static_cast<int>(system.inputs.size()));
    for (int h : config.hidden_layers) sizes.push_back(h);
    sizes.push_back(1);
    std::vector<Activation> acts(config.hidden_layers.size(), config.hidden_activation);
    acts.push_back(config.output_activation);
    Network tmpl = make_network(std::move(sizes), std::move(acts));
    for (const auto& var : system.inputs) {
        tmpl.input_norm.lo.push_back(var.universe.lo);
        tmpl.input_norm.hi.push_back(var.universe.hi);
    }
    return tmpl;
}

}  // namespace

DistillResult distill(const FuzzySystem& system, const PipelineConfig& config) {
    config.validate();
    DistillResult result;
    result.dataset = sample_system(system, config.sampling);
    Network tmpl = pipeline_template(system, config);
    TrainConfig train = config.train;
    train.rng_seed = config.rng_seed;
    TrainResult trained = train_backprop(tmpl, result.dataset, train);
    result.net = std::move(trained.net);
    result.trace = std::move(trained.trace);
    return result;
}

RefineResult refine(const Network& neuro_fuzzy, const Dataset& data,
                    const PipelineConfig& config) {
    config.validate();
    if (data.input_dim != neuro_fuzzy.input_dim() ||
        data.target_dim != neuro_fuzzy.output_dim())
        throw DimensionError("refine: dataset dimensions do not match the network");
    GAConfig ga = config.ga;
    ga.rng_seed = config.rng_seed + 1;
    const Genome seed = flatten(neuro_fuzzy);
    EvolveResult evolved = evolve(neuro_fuzzy, data, ga, {&seed, 1});
    return {std::move(evolved.best), evolved.best_fitness, std::move(evolved.trace)};
}

ErrorReport make_error_report(const std::vector<std::string>& input_names,
                              const Dataset& data, const Network& neuro_fuzzy,
                              const Network& gnf) {
    ErrorReport report;
    report.input_names = input_names;
    report.records.reserve(data.size());
    NetScratch scratch;
    for (std::size_t s = 0; s < data.size(); ++s) {
        ErrorRecord rec;
        const auto in = data.input(s);
        rec.inputs.assign(in.begin(), in.end());
        rec.fis_target = data.target(s)[0];
        forward_into(neuro_fuzzy, in, scratch);
        rec.nf_output = scratch.outputs.back()[0];
        forward_into(gnf, in, scratch);
        rec.gnf_output = scratch.outputs.back()[0];
        rec.error1 = std::abs(rec.fis_target - rec.nf_output);
        rec.error2 = std::abs(rec.fis_target - rec.gnf_output);
        report.records.push_back(std::move(rec));
    }
    auto aggregate = [&](auto pick) {
        ErrorAggregates agg;
        for (const auto& rec : report.records) {
            const double e = pick(rec);
            agg.sum += e;
            agg.max = std::max(agg.max, e);
        }
        agg.mean = agg.sum / static_cast<double>(report.records.size());
        return agg;
    };
    report.error1 = aggregate([](const ErrorRecord& r) { return r.error1; });
    report.error2 = aggregate([](const ErrorRecord& r) { return r.error2; });
    return report;
}

namespace {

[[noreturn]] void stage_fail(const char* stage, const std::exception& e) {
    throw Error(std::string(stage) + ": " + e.what());
}

}  // namespace

PipelineResult run_pipeline(const FuzzySystem& system, const PipelineConfig& config) {
    PipelineResult result;
    Dataset dataset;
    try {
        DistillResult d = distill(system, config);
        result.neuro_fuzzy = std::move(d.net);
        result.train_trace = std::move(d.trace);
        dataset = std::move(d.dataset);
    } catch (const Error& e) {
        stage_fail("distill", e);
    }
    try {
        RefineResult r = refine(result.neuro_fuzzy, dataset, config);
        result.gnf = std::move(r.net);
        result.ga_trace = std::move(r.trace);
    } catch (const Error& e) {
        stage_fail("refine", e);
    }
    try {
        std::vector<std::string> names;
        for (const auto& var : system.inputs) names.push_back(var.name);
        result.report = make_error_report(names, dataset, result.neuro_fuzzy, result.gnf);

        SamplingPlan holdout = config.sampling;
        if (holdout.points > 0) {
            // Convert to step form so the offset grid interleaves the
            // training grid; universes may differ per input, so use the
            // first input's derived step.
            holdout.step = system.inputs.front().universe.span() / (holdout.points - 1);
            holdout.points = 0;
        }
        holdout.offset = holdout.step / 2.0;
        Dataset holdout_data = sample_system(system, holdout);
        result.holdout_report =
            make_error_report(names, holdout_data, result.neuro_fuzzy, result.gnf);
    } catch (const Error& e) {
        stage_fail("report", e);
    }
    return result;
}

SpeedReport measure_speed(const FuzzySystem& system, const Network& net,
                          const Dataset& data) {
    using clock = std::chrono::steady_clock;
    SpeedReport report;

    InputValues values;
    volatile double sink = 0.0;
    auto t0 = clock::now();
    for (std::size_t s = 0; s < data.size(); ++s) {
        for (int d = 0; d < data.input_dim; ++d)
            values[system.inputs[d].name] = data.input(s)[d];
        sink = infer(system, values).crisp;
    }
    auto t1 = clock::now();
    NetScratch scratch;
    for (std::size_t s = 0; s < data.size(); ++s) {
        forward_into(net, data.input(s), scratch);
        sink = scratch.outputs.back()[0];
    }
    auto t2 = clock::now();
    (void)sink;

    const Genome genome = flatten(net);
    auto t3 = clock::now();
    const double fit = fitness(genome, net, data);
    auto t4 = clock::now();
    (void)fit;

    TrainConfig one_epoch;
    one_epoch.algorithm = TrainAlgorithm::GradientDescent;
    one_epoch.learning_rate = 0.0;  // timing only; keep the weights put
    one_epoch.max_epochs = 1;
    one_epoch.tolerance = 1e-30;
    auto t5 = clock::now();
    train_backprop(net, data, one_epoch);
    auto t6 = clock::now();

    auto seconds = [](auto a, auto b) {
        return std::chrono::duration<double>(b - a).count();
    };
    report.fis_seconds = seconds(t0, t1);
    report.net_seconds = seconds(t1, t2);
    report.net_vs_fis =
        report.net_seconds > 0.0 ? report.fis_seconds / report.net_seconds : 0.0;
    report.ga_eval_seconds = seconds(t3, t4);
    report.gd_epoch_seconds = seconds(t5, t6);
    return report;
}

namespace {

using json = nlohmann::ordered_json;

std::string csv_row(const std::vector<double>& values) {
    std::string row;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) row += ',';
        row += format_double(values[i]);
    }
    return row;
}

}  // namespace

std::string error_report_csv(const ErrorReport& report) {
    std::string out = "idx";
    for (const auto& name : report.input_names) out += "," + name;
    out += ",target,nf_out,gnf_out,error1,error2\n";
    for (std::size_t i = 0; i < report.records.size(); ++i) {
        const auto& rec = report.records[i];
        std::vector<double> row;
        row.reserve(rec.inputs.size() + 5);
        row.insert(row.end(), rec.inputs.begin(), rec.inputs.end());
        row.insert(row.end(),
                   {rec.fis_target, rec.nf_output, rec.gnf_output, rec.error1, rec.error2});
        out += std::to_string(i) + "," + csv_row(row) + "\n";
    }
    return out;
}

std::string train_trace_csv(const TrainTrace& trace) {
    std::string out = "epoch,mse\n";
    for (std::size_t i = 0; i < trace.mse.size(); ++i)
        out += std::to_string(i + 1) + "," + format_double(trace.mse[i]) + "\n";
    return out;
}

std::string ga_trace_csv(const GATrace& trace) {
    std::string out = "generation,best,mean\n";
    for (std::size_t i = 0; i < trace.best.size(); ++i)
        out += std::to_string(i) + "," + format_double(trace.best[i]) + "," +
               format_double(trace.mean[i]) + "\n";
    return out;
}

namespace {

json sampling_to_json(const SamplingPlan& plan) {
    json j;
    if (plan.points > 0) j["points"] = plan.points;
    else j["step"] = plan.step;
    return j;
}

json config_to_json_object(const PipelineConfig& config) {
    json j;
    j["seed"] = config.rng_seed;
    j["sampling"] = sampling_to_json(config.sampling);
    j["network"] = {{"hidden", config.hidden_layers},
                    {"hidden_activation", activation_name(config.hidden_activation)},
                    {"output_activation", activation_name(config.output_activation)}};
    j["train"] = {{"algorithm", config.train.algorithm == TrainAlgorithm::GradientDescent
                                    ? "gd"
                                    : "lm"},
                  {"learning_rate", config.train.learning_rate},
                  {"max_epochs", config.train.max_epochs},
                  {"tolerance", config.train.tolerance}};
    j["ga"] = {{"population_size", config.ga.population_size},
               {"elite_count", config.ga.elite_count},
               {"crossover_fraction", config.ga.crossover_fraction},
               {"mutation_sigma", config.ga.mutation_sigma},
               {"mutation_anneal", config.ga.mutation_anneal},
               {"max_generations", config.ga.max_generations},
               {"fitness_tolerance", config.ga.fitness_tolerance}};
    return j;
}

void require_known_keys(const json& obj, const std::set<std::string>& keys,
                        const char* where) {
    for (const auto& [key, value] : obj.items())
        if (!keys.count(key))
            throw ConfigError(std::string("config: unknown key '") + key + "' in " + where);
}

double get_number(const json& obj, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) throw ConfigError(std::string("config: ") + key + " must be a number");
    return obj[key].get<double>();
}

int get_int(const json& obj, const char* key, int fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer())
        throw ConfigError(std::string("config: ") + key + " must be an integer");
    return obj[key].get<int>();
}

}  // namespace

std::string pipeline_config_to_json(const PipelineConfig& config) {
    return config_to_json_object(config).dump(2) + "\n";
}

PipelineConfig pipeline_config_from_json(std::string_view text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw ConfigError("config: not a JSON object");

    PipelineConfig config;
    require_known_keys(doc, {"seed", "sampling", "network", "train", "ga"}, "config");

    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned() && !doc["seed"].is_number_integer())
            throw ConfigError("config: seed must be an integer");
        config.rng_seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("sampling")) {
        const json& s = doc["sampling"];
        if (!s.is_object()) throw ConfigError("config: sampling must be an object");
        require_known_keys(s, {"step", "points"}, "sampling");
        if (s.contains("points")) {
            config.sampling.points = get_int(s, "points", 0);
            if (s.contains("step"))
                throw ConfigError("config: sampling takes either step or points, not both");
        } else {
            config.sampling.step = get_number(s, "step", config.sampling.step);
        }
    }
    if (doc.contains("network")) {
        const json& n = doc["network"];
        if (!n.is_object()) throw ConfigError("config: network must be an object");
        require_known_keys(n, {"hidden", "hidden_activation", "output_activation"},
                           "network");
        if (n.contains("hidden")) {
            if (!n["hidden"].is_array())
                throw ConfigError("config: network.hidden must be an array");
            config.hidden_layers.clear();
            for (const auto& v : n["hidden"]) {
                if (!v.is_number_integer())
                    throw ConfigError("config: network.hidden must hold integers");
                config.hidden_layers.push_back(v.get<int>());
            }
        }
        if (n.contains("hidden_activation"))
            config.hidden_activation =
                activation_from_name(n["hidden_activation"].get<std::string>());
        if (n.contains("output_activation"))
            config.output_activation =
                activation_from_name(n["output_activation"].get<std::string>());
    }
    if (doc.contains("train")) {
        const json& t = doc["train"];
        if (!t.is_object()) throw ConfigError("config: train must be an object");
        require_known_keys(t, {"algorithm", "learning_rate", "max_epochs", "tolerance"},
                           "train");
        if (t.contains("algorithm")) {
            const std::string name = t["algorithm"].get<std::string>();
            if (name == "gd") config.train.algorithm = TrainAlgorithm::GradientDescent;
            else if (name == "lm") config.train.algorithm = TrainAlgorithm::LevenbergMarquardt;
            else throw ConfigError("config: train.algorithm must be 'gd' or 'lm'");
        }
        config.train.learning_rate =
            get_number(t, "learning_rate", config.train.learning_rate);
        config.train.max_epochs = get_int(t, "max_epochs", config.train.max_epochs);
        config.train.tolerance = get_number(t, "tolerance", config.train.tolerance);
    }
    if (doc.contains("ga")) {
        const json& g = doc["ga"];
        if (!g.is_object()) throw ConfigError("config: ga must be an object");
        require_known_keys(g,
                           {"population_size", "elite_count", "crossover_fraction",
                            "mutation_sigma", "mutation_anneal", "max_generations",
                            "fitness_tolerance"},
                           "ga");
        config.ga.population_size = get_int(g, "population_size", config.ga.population_size);
        config.ga.elite_count = get_int(g, "elite_count", config.ga.elite_count);
        config.ga.crossover_fraction =
            get_number(g, "crossover_fraction", config.ga.crossover_fraction);
        config.ga.mutation_sigma = get_number(g, "mutation_sigma", config.ga.mutation_sigma);
        config.ga.mutation_anneal =
            get_number(g, "mutation_anneal", config.ga.mutation_anneal);
        config.ga.max_generations = get_int(g, "max_generations", config.ga.max_generations);
        config.ga.fitness_tolerance =
            get_number(g, "fitness_tolerance", config.ga.fitness_tolerance);
    }
    config.validate();
    return config;
}

std::string error_report_json(const ErrorReport& report, const PipelineConfig& config) {
    json doc;
    doc["format"] = "gnf-report";
    doc["version"] = 1;
    doc["config"] = config_to_json_object(config);
    json records = json::array();
    for (std::size_t i = 0; i < report.records.size(); ++i) {
        const auto& rec = report.records[i];
        json r;
        r["idx"] = i;
        for (std::size_t d = 0; d < report.input_names.size(); ++d)
            r[report.input_names[d]] = rec.inputs[d];
        r["target"] = rec.fis_target;
        r["nf_out"] = rec.nf_output;
        r["gnf_out"] = rec.gnf_output;
        r["error1"] = rec.error1;
        r["error2"] = rec.error2;
        records.push_back(std::move(r));
    }
    doc["records"] = std::move(records);
    auto agg = [](const ErrorAggregates& a) {
        return json{{"sum", a.sum}, {"mean", a.mean}, {"max", a.max}};
    };
    doc["aggregates"] = {{"error1", agg(report.error1)}, {"error2", agg(report.error2)}};
    return doc.dump(2) + "\n";
}

}  // namespace gnf
