// Python bindings for the main operations: rule-base parsing, fuzzy
// inference, grid sampling, distillation, GA refinement and the full
// pipeline. Library errors surface as Python exceptions.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gnf/fuzzy.hpp"
#include "gnf/ga.hpp"
#include "gnf/net.hpp"
#include "gnf/pipeline.hpp"
#include "gnf/rulebase.hpp"

namespace py = pybind11;

namespace {

std::vector<std::vector<double>> dataset_inputs(const gnf::Dataset& data) {
    std::vector<std::vector<double>> rows;
    rows.reserve(data.size());
    for (std::size_t s = 0; s < data.size(); ++s) {
        auto in = data.input(s);
        rows.emplace_back(in.begin(), in.end());
    }
    return rows;
}

std::vector<double> dataset_targets(const gnf::Dataset& data) {
    return data.targets;
}

}  // namespace

PYBIND11_MODULE(gnf, m) {
    m.doc() = "Fuzzy inference, neural distillation and GA weight refinement";

    py::register_exception<gnf::EvalError>(m, "EvalError", PyExc_ValueError);
    py::register_exception<gnf::ParseFailure>(m, "ParseError", PyExc_ValueError);

    py::class_<gnf::FuzzySystem>(m, "FuzzySystem")
        .def_property_readonly("name", [](const gnf::FuzzySystem& s) { return s.name; })
        .def_property_readonly("input_names",
                               [](const gnf::FuzzySystem& s) {
                                   std::vector<std::string> names;
                                   for (const auto& v : s.inputs) names.push_back(v.name);
                                   return names;
                               })
        .def_property_readonly("output_name",
                               [](const gnf::FuzzySystem& s) { return s.output.name; })
        .def_property_readonly("rule_count",
                               [](const gnf::FuzzySystem& s) { return s.rules.size(); })
        .def("__repr__", [](const gnf::FuzzySystem& s) {
            return "<FuzzySystem '" + s.name + "', " + std::to_string(s.inputs.size()) +
                   " inputs, " + std::to_string(s.rules.size()) + " rules>";
        });

    py::class_<gnf::Network>(m, "Network")
        .def_property_readonly("layer_sizes",
                               [](const gnf::Network& n) { return n.layer_sizes; })
        .def("forward",
             [](const gnf::Network& n, const std::vector<double>& x) {
                 return gnf::forward(n, x);
             })
        .def("__repr__", [](const gnf::Network& n) {
            std::string shape;
            for (std::size_t i = 0; i < n.layer_sizes.size(); ++i)
                shape += (i ? "-" : "") + std::to_string(n.layer_sizes[i]);
            return "<Network " + shape + ">";
        });

    py::class_<gnf::Dataset>(m, "Dataset")
        .def_property_readonly("inputs", &dataset_inputs)
        .def_property_readonly("targets", &dataset_targets)
        .def("__len__", [](const gnf::Dataset& d) { return d.size(); });

    py::class_<gnf::TrainTrace>(m, "TrainTrace")
        .def_readonly("mse", &gnf::TrainTrace::mse)
        .def_readonly("epochs_run", &gnf::TrainTrace::epochs_run)
        .def_readonly("converged", &gnf::TrainTrace::converged);

    py::class_<gnf::GATrace>(m, "GATrace")
        .def_readonly("best", &gnf::GATrace::best)
        .def_readonly("mean", &gnf::GATrace::mean)
        .def_readonly("generations_run", &gnf::GATrace::generations_run)
        .def_readonly("converged", &gnf::GATrace::converged);

    m.def("builtin_tipper", &gnf::builtin_tipper,
          "The built-in three-rule tipper system");
    m.def("parse_rulebase",
          [](const std::string& text) { return gnf::parse_rulebase(text); },
          py::arg("text"));
    m.def("serialize_rulebase", &gnf::serialize_rulebase, py::arg("system"));
    m.def(
        "infer",
        [](const gnf::FuzzySystem& system, const gnf::InputValues& inputs) {
            auto result = gnf::infer(system, inputs);
            return py::make_tuple(result.crisp, result.trace.firing_strengths);
        },
        py::arg("system"), py::arg("inputs"),
        "Crisp output and per-rule firing strengths");
    m.def(
        "sample_system",
        [](const gnf::FuzzySystem& system, double step, int points) {
            gnf::SamplingPlan plan;
            plan.step = step;
            plan.points = points;
            return gnf::sample_system(system, plan);
        },
        py::arg("system"), py::arg("step") = 0.5, py::arg("points") = 0);
    m.def("config_from_json", &gnf::pipeline_config_from_json, py::arg("text"),
          "PipelineConfig from its JSON form (strict keys)");
    m.def("config_to_json", &gnf::pipeline_config_to_json, py::arg("config"));
    m.def("network_to_json", &gnf::network_to_json, py::arg("net"));
    m.def("network_from_json",
          [](const std::string& text) { return gnf::network_from_json(text); },
          py::arg("text"));

    py::class_<gnf::PipelineConfig>(m, "PipelineConfig")
        .def(py::init<>())
        .def_readwrite("rng_seed", &gnf::PipelineConfig::rng_seed)
        .def_property(
            "step",
            [](const gnf::PipelineConfig& c) { return c.sampling.step; },
            [](gnf::PipelineConfig& c, double v) { c.sampling.step = v; })
        .def_property(
            "hidden_layers",
            [](const gnf::PipelineConfig& c) { return c.hidden_layers; },
            [](gnf::PipelineConfig& c, std::vector<int> v) {
                c.hidden_layers = std::move(v);
            })
        .def_property(
            "max_epochs", [](const gnf::PipelineConfig& c) { return c.train.max_epochs; },
            [](gnf::PipelineConfig& c, int v) { c.train.max_epochs = v; })
        .def_property(
            "train_tolerance",
            [](const gnf::PipelineConfig& c) { return c.train.tolerance; },
            [](gnf::PipelineConfig& c, double v) { c.train.tolerance = v; })
        .def_property(
            "max_generations",
            [](const gnf::PipelineConfig& c) { return c.ga.max_generations; },
            [](gnf::PipelineConfig& c, int v) { c.ga.max_generations = v; })
        .def_property(
            "population_size",
            [](const gnf::PipelineConfig& c) { return c.ga.population_size; },
            [](gnf::PipelineConfig& c, int v) { c.ga.population_size = v; });

    m.def(
        "distill",
        [](const gnf::FuzzySystem& system, const gnf::PipelineConfig& config) {
            auto result = gnf::distill(system, config);
            return py::make_tuple(result.net, result.trace, result.dataset);
        },
        py::arg("system"), py::arg("config") = gnf::PipelineConfig{},
        "Sample the system and train the neuro-fuzzy network");
    m.def(
        "refine",
        [](const gnf::Network& net, const gnf::Dataset& data,
           const gnf::PipelineConfig& config) {
            auto result = gnf::refine(net, data, config);
            return py::make_tuple(result.net, result.fitness, result.trace);
        },
        py::arg("net"), py::arg("dataset"), py::arg("config") = gnf::PipelineConfig{},
        "GA-refine a trained network's weights");
    m.def(
        "run_pipeline",
        [](const gnf::FuzzySystem& system, const gnf::PipelineConfig& config) {
            auto result = gnf::run_pipeline(system, config);
            py::dict report;
            report["sum_error1"] = result.report.error1.sum;
            report["sum_error2"] = result.report.error2.sum;
            report["mean_error1"] = result.report.error1.mean;
            report["mean_error2"] = result.report.error2.mean;
            report["max_error1"] = result.report.error1.max;
            report["max_error2"] = result.report.error2.max;
            report["records"] = result.report.records.size();
            return py::make_tuple(result.neuro_fuzzy, result.gnf, report);
        },
        py::arg("system"), py::arg("config") = gnf::PipelineConfig{},
        "Full distill + refine run; returns (nf_net, gnf_net, report_summary)");
}
