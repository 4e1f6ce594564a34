#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gnf/fuzzy.hpp"
#include "gnf/ga.hpp"
#include "gnf/net.hpp"

namespace gnf {

// End-to-end flow: sample the fuzzy system on a grid, distill it into a
// network by backpropagation (the neuro-fuzzy net), refine the weights
// with the GA seeded from the trained net (the GNF net), and compare
// both against the fuzzy targets (error1 = |t - y_nf|, error2 = |t - y_gnf|).

struct SamplingPlan {
    double step = 0.5;    // grid step in universe units (used when points == 0)
    int points = 0;       // explicit point count per input when > 0
    double offset = 0.0;  // shift applied to every axis; points beyond hi are dropped

    void validate() const;
};

struct PipelineConfig {
    SamplingPlan sampling;
    std::vector<int> hidden_layers = {50};
    Activation hidden_activation = Activation::TanSigmoid;
    Activation output_activation = Activation::Linear;
    TrainConfig train;  // tolerance 1e-3 by default
    GAConfig ga;        // fitness_tolerance 1e-5 by default
    // Master seed: training uses rng_seed, the GA uses rng_seed + 1, so
    // one value pins the whole run.
    std::uint64_t rng_seed = 0;

    void validate() const;
};

// Cartesian grid over the input universes, targets computed by infer().
// Samples are ordered lexicographically by grid index (first input is
// the outermost axis). Propagates "no rule fired" with the offending
// grid point named.
Dataset sample_system(const FuzzySystem& system, const SamplingPlan& plan);

struct DistillResult {
    Network net;       // the neuro-fuzzy network
    TrainTrace trace;
    Dataset dataset;   // the grid it was trained on
};

DistillResult distill(const FuzzySystem& system, const PipelineConfig& config);

struct RefineResult {
    Network net;  // the GNF network
    double fitness = 0.0;
    GATrace trace;
};

// GA refinement seeded with the trained network's genome; the rest of
// generation 0 is gaussian perturbations of that seed, so the best
// fitness can never exceed the backprop baseline.
RefineResult refine(const Network& neuro_fuzzy, const Dataset& data,
                    const PipelineConfig& config);

struct ErrorRecord {
    std::vector<double> inputs;
    double fis_target = 0.0;
    double nf_output = 0.0;
    double gnf_output = 0.0;
    double error1 = 0.0;  // |target - nf_output|
    double error2 = 0.0;  // |target - gnf_output|
};

struct ErrorAggregates {
    double sum = 0.0, mean = 0.0, max = 0.0;
};

struct ErrorReport {
    std::vector<std::string> input_names;
    std::vector<ErrorRecord> records;
    ErrorAggregates error1, error2;
};

ErrorReport make_error_report(const std::vector<std::string>& input_names,
                              const Dataset& data, const Network& neuro_fuzzy,
                              const Network& gnf);

struct PipelineResult {
    Network neuro_fuzzy;
    Network gnf;
    ErrorReport report;          // on the training grid
    ErrorReport holdout_report;  // on the half-step-offset grid
    TrainTrace train_trace;
    GATrace ga_trace;
};

// distill -> refine -> reports. Any stage failure is rethrown with the
// stage name prefixed ("distill: ...", "refine: ...", "report: ...").
PipelineResult run_pipeline(const FuzzySystem& system, const PipelineConfig& config);

// Wall-clock comparison of the trained net against direct fuzzy
// inference over the same grid, and of GA fitness evaluations against
// single training epochs. Measured, not asserted beyond net_vs_fis >= 1.
struct SpeedReport {
    double fis_seconds = 0.0;       // infer() over the grid
    double net_seconds = 0.0;       // forward() over the grid
    double net_vs_fis = 0.0;        // fis_seconds / net_seconds
    double ga_eval_seconds = 0.0;   // one fitness evaluation
    double gd_epoch_seconds = 0.0;  // one full-batch gradient-descent epoch
};

SpeedReport measure_speed(const FuzzySystem& system, const Network& net,
                          const Dataset& data);

// Serialization of reports and traces.
std::string error_report_csv(const ErrorReport& report);
std::string train_trace_csv(const TrainTrace& trace);
std::string ga_trace_csv(const GATrace& trace);
// Report JSON: records + aggregates + config echo + seed.
std::string error_report_json(const ErrorReport& report, const PipelineConfig& config);

// Strict JSON (de)serialization of PipelineConfig. The document holds
// optional sections {seed, sampling, network, train, ga}; unknown or
// ill-typed keys are rejected with ConfigError. The CLI run file embeds
// the same sections next to its path entries, and the report's config
// echo uses the same layout.
std::string pipeline_config_to_json(const PipelineConfig& config);
PipelineConfig pipeline_config_from_json(std::string_view text);

}  // namespace gnf
