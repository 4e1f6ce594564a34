#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gnf/errors.hpp"

namespace gnf {

// Feedforward multilayer network. A neuron's action is the weighted
// input sum plus bias; its output is the activation applied to the
// action. Networks are value-like: cheap to copy, safe to read from
// many threads; training works on a private copy.

enum class Activation { Threshold, Linear, Ramp, Sigmoid, TanSigmoid };

std::string_view activation_name(Activation kind);
Activation activation_from_name(std::string_view name);  // throws ConfigError

// threshold -> {0,1}; linear -> a; ramp -> clamp(a,0,1);
// sigmoid -> 1/(1+e^-a); tan_sigmoid -> 2/(1+e^-2a)-1 (== tanh a)
double activation_apply(Activation kind, double a);
// Derivative dy/da given the action a and the output y = f(a).
double activation_derivative(Activation kind, double a, double y);

// a = sum_j w_j x_j + bias. Throws DimensionError on length mismatch.
double neuron_action(std::span<const double> weights, std::span<const double> inputs,
                     double bias);

struct Layer {
    int in = 0, out = 0;
    std::vector<double> weights;  // out x in, row-major
    std::vector<double> biases;   // out
    Activation activation = Activation::Linear;

    bool operator==(const Layer&) const = default;
};

// Optional per-input affine transform applied before the first layer:
// x' = 2 (x - lo) / (hi - lo) - 1, mapping [lo, hi] onto [-1, 1].
// Empty vectors mean identity. Recorded in the model file so saved
// models keep applying the same transform.
struct InputNormalization {
    std::vector<double> lo, hi;

    bool identity() const { return lo.empty(); }
    double apply(int i, double x) const {
        return 2.0 * (x - lo[i]) / (hi[i] - lo[i]) - 1.0;
    }
    bool operator==(const InputNormalization&) const = default;
};

struct Network {
    std::vector<int> layer_sizes;  // input, hidden..., output
    std::vector<Layer> layers;     // layer_sizes.size() - 1 entries
    InputNormalization input_norm;

    int input_dim() const { return layer_sizes.front(); }
    int output_dim() const { return layer_sizes.back(); }

    bool operator==(const Network&) const = default;
};

// Zero-weight network with the given topology. Activations apply to the
// non-input layers, so acts.size() == sizes.size() - 1.
Network make_network(std::vector<int> sizes, std::vector<Activation> acts);

// Same topology, weights and biases drawn uniformly from [-0.5, 0.5]
// with a seeded generator (layer by layer, weights row-major, then
// biases — the same pinned order used for flattening).
Network random_network(std::vector<int> sizes, std::vector<Activation> acts,
                       std::uint64_t seed);

// Total number of weights + biases.
std::size_t parameter_count(const Network& net);
// Copy parameters to/from a flat vector in the pinned order.
void copy_parameters(const Network& net, std::span<double> out);
void set_parameters(Network& net, std::span<const double> params);

// Reusable buffers for repeated forward/backward passes.
struct NetScratch {
    std::vector<std::vector<double>> outputs;  // [0] = (normalized) input
    std::vector<std::vector<double>> actions;  // per non-input layer
    std::vector<std::vector<double>> deltas;
};

std::vector<double> forward(const Network& net, std::span<const double> x);
// Hot-path variant; the final layer output lands in scratch.outputs.back().
void forward_into(const Network& net, std::span<const double> x, NetScratch& scratch);

struct LayerGrad {
    std::vector<double> weights, biases;  // same shapes as the layer
};
using Gradients = std::vector<LayerGrad>;

// Exact partials of the squared error 1/2 ||t - y||^2 with respect to
// every weight and bias.
Gradients gradient(const Network& net, std::span<const double> x,
                   std::span<const double> t);

struct Dataset {
    int input_dim = 0, target_dim = 0;
    std::vector<double> inputs;   // size() x input_dim, row-major
    std::vector<double> targets;  // size() x target_dim, row-major

    std::size_t size() const { return input_dim ? inputs.size() / input_dim : 0; }
    std::span<const double> input(std::size_t i) const {
        return {inputs.data() + i * input_dim, static_cast<std::size_t>(input_dim)};
    }
    std::span<const double> target(std::size_t i) const {
        return {targets.data() + i * target_dim, static_cast<std::size_t>(target_dim)};
    }
    void add(std::span<const double> x, std::span<const double> t);
    void validate() const;  // non-empty, uniform dims, finite values
};

enum class TrainAlgorithm {
    GradientDescent,     // full-batch, fixed learning rate
    LevenbergMarquardt,  // damped Gauss-Newton on the residual Jacobian
};

struct TrainConfig {
    TrainAlgorithm algorithm = TrainAlgorithm::LevenbergMarquardt;
    double learning_rate = 0.1;  // gradient descent step (unused by LM)
    int max_epochs = 5000;
    double tolerance = 1e-3;  // stop when epoch MSE <= tolerance
    std::uint64_t rng_seed = 0;

    void validate() const;
};

struct TrainTrace {
    std::vector<double> mse;  // recorded after each weight update
    int epochs_run = 0;
    bool converged = false;
};

struct TrainResult {
    Network net;
    TrainTrace trace;
};

// Full-batch training to the configured tolerance. The template
// supplies topology, activations and input normalization; weights are
// (re)initialized from config.rng_seed, so the run is a deterministic
// function of (template shape, dataset, config). Epoch MSE is the mean
// squared error per output element. Throws DivergenceError when the
// loss leaves the finite range.
TrainResult train_backprop(const Network& tmpl, const Dataset& data,
                           const TrainConfig& config);

// Versioned JSON model document: {format, version, layer_sizes,
// activations, weights row-major, biases, input_normalization}.
// Round-trips finite doubles bit-exactly. Field names are pinned in
// docs/model-format.md.
std::string network_to_json(const Network& net);
Network network_from_json(std::string_view text);  // throws ConfigError
void save_network(const Network& net, const std::filesystem::path& path);
Network load_network(const std::filesystem::path& path);

}  // namespace gnf
