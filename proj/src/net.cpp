#include "gnf/net.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace gnf {

std::string_view activation_name(Activation kind) {
    switch (kind) {
        case Activation::Threshold: return "threshold";
        case Activation::Linear: return "linear";
        case Activation::Ramp: return "ramp";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::TanSigmoid: return "tan_sigmoid";
    }
    return "linear";
}

Activation activation_from_name(std::string_view name) {
    if (name == "threshold") return Activation::Threshold;
    if (name == "linear") return Activation::Linear;
    if (name == "ramp") return Activation::Ramp;
    if (name == "sigmoid") return Activation::Sigmoid;
    if (name == "tan_sigmoid") return Activation::TanSigmoid;
    throw ConfigError("unknown activation '" + std::string(name) + "'");
}

double activation_apply(Activation kind, double a) {
    switch (kind) {
        case Activation::Threshold: return a >= 0.0 ? 1.0 : 0.0;
        case Activation::Linear: return a;
        case Activation::Ramp: return a < 0.0 ? 0.0 : (a > 1.0 ? 1.0 : a);
        case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-a));
        case Activation::TanSigmoid: return std::tanh(a);
    }
    return a;
}

double activation_derivative(Activation kind, double a, double y) {
    switch (kind) {
        case Activation::Threshold: return 0.0;
        case Activation::Linear: return 1.0;
        case Activation::Ramp: return (a > 0.0 && a < 1.0) ? 1.0 : 0.0;
        case Activation::Sigmoid: return y * (1.0 - y);
        case Activation::TanSigmoid: return 1.0 - y * y;
    }
    return 1.0;
}

double neuron_action(std::span<const double> weights, std::span<const double> inputs,
                     double bias) {
    if (weights.size() != inputs.size())
        throw DimensionError("neuron_action: " + std::to_string(weights.size()) +
                             " weights vs " + std::to_string(inputs.size()) + " inputs");
    double a = bias;
    for (std::size_t j = 0; j < weights.size(); ++j) a += weights[j] * inputs[j];
    return a;
}

namespace {

void check_topology(const std::vector<int>& sizes, const std::vector<Activation>& acts) {
    if (sizes.size() < 2) throw ConfigError("network needs at least input and output layers");
    for (int s : sizes)
        if (s < 1) throw ConfigError("layer sizes must be positive");
    if (acts.size() != sizes.size() - 1)
        throw ConfigError("expected one activation per non-input layer");
}

}  // namespace

Network make_network(std::vector<int> sizes, std::vector<Activation> acts) {
    check_topology(sizes, acts);
    Network net;
    net.layer_sizes = std::move(sizes);
    for (std::size_t l = 0; l + 1 < net.layer_sizes.size(); ++l) {
        Layer layer;
        layer.in = net.layer_sizes[l];
        layer.out = net.layer_sizes[l + 1];
        layer.weights.assign(static_cast<std::size_t>(layer.in) * layer.out, 0.0);
        layer.biases.assign(layer.out, 0.0);
        layer.activation = acts[l];
        net.layers.push_back(std::move(layer));
    }
    return net;
}

Network random_network(std::vector<int> sizes, std::vector<Activation> acts,
                       std::uint64_t seed) {
    Network net = make_network(std::move(sizes), std::move(acts));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-0.5, 0.5);
    for (auto& layer : net.layers) {
        for (auto& w : layer.weights) w = dist(rng);
        for (auto& b : layer.biases) b = dist(rng);
    }
    return net;
}

std::size_t parameter_count(const Network& net) {
    std::size_t n = 0;
    for (const auto& layer : net.layers) n += layer.weights.size() + layer.biases.size();
    return n;
}

void copy_parameters(const Network& net, std::span<double> out) {
    if (out.size() != parameter_count(net))
        throw DimensionError("copy_parameters: destination length mismatch");
    std::size_t k = 0;
    for (const auto& layer : net.layers) {
        std::copy(layer.weights.begin(), layer.weights.end(), out.begin() + k);
        k += layer.weights.size();
        std::copy(layer.biases.begin(), layer.biases.end(), out.begin() + k);
        k += layer.biases.size();
    }
}

void set_parameters(Network& net, std::span<const double> params) {
    if (params.size() != parameter_count(net))
        throw DimensionError("set_parameters: source length mismatch");
    std::size_t k = 0;
    for (auto& layer : net.layers) {
        std::copy(params.begin() + k, params.begin() + k + layer.weights.size(),
                  layer.weights.begin());
        k += layer.weights.size();
        std::copy(params.begin() + k, params.begin() + k + layer.biases.size(),
                  layer.biases.begin());
        k += layer.biases.size();
    }
}

void forward_into(const Network& net, std::span<const double> x, NetScratch& scratch) {
    if (static_cast<int>(x.size()) != net.input_dim())
        throw DimensionError("forward: input has " + std::to_string(x.size()) +
                             " values, network expects " + std::to_string(net.input_dim()));
    const std::size_t nl = net.layers.size();
    scratch.outputs.resize(nl + 1);
    scratch.actions.resize(nl);

    auto& in = scratch.outputs[0];
    in.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        in[i] = net.input_norm.identity() ? x[i]
                                          : net.input_norm.apply(static_cast<int>(i), x[i]);

    for (std::size_t l = 0; l < nl; ++l) {
        const Layer& layer = net.layers[l];
        const auto& prev = scratch.outputs[l];
        auto& act = scratch.actions[l];
        auto& out = scratch.outputs[l + 1];
        act.resize(layer.out);
        out.resize(layer.out);
        const double* w = layer.weights.data();
        for (int j = 0; j < layer.out; ++j, w += layer.in) {
            double a = layer.biases[j];
            for (int i = 0; i < layer.in; ++i) a += w[i] * prev[i];
            act[j] = a;
            out[j] = activation_apply(layer.activation, a);
        }
    }
}

std::vector<double> forward(const Network& net, std::span<const double> x) {
    NetScratch scratch;
    forward_into(net, x, scratch);
    return scratch.outputs.back();
}

namespace {

// Backward pass shared by the loss gradient and the residual Jacobian:
// seed is d(quantity)/dy at the output layer.
void backward_into(const Network& net, NetScratch& scratch,
                   std::span<const double> seed) {
    const std::size_t nl = net.layers.size();
    scratch.deltas.resize(nl);
    auto& top = scratch.deltas[nl - 1];
    top.resize(net.layers[nl - 1].out);
    for (int j = 0; j < net.layers[nl - 1].out; ++j)
        top[j] = seed[j] * activation_derivative(net.layers[nl - 1].activation,
                                                 scratch.actions[nl - 1][j],
                                                 scratch.outputs[nl][j]);
    for (std::size_t l = nl - 1; l > 0; --l) {
        const Layer& layer = net.layers[l];
        const Layer& below = net.layers[l - 1];
        auto& delta = scratch.deltas[l - 1];
        delta.resize(below.out);
        for (int i = 0; i < below.out; ++i) {
            double s = 0.0;
            for (int j = 0; j < layer.out; ++j)
                s += layer.weights[static_cast<std::size_t>(j) * layer.in + i] *
                     scratch.deltas[l][j];
            delta[i] = s * activation_derivative(below.activation,
                                                 scratch.actions[l - 1][i],
                                                 scratch.outputs[l][i]);
        }
    }
}

void accumulate_gradients(const Network& net, const NetScratch& scratch,
                          Gradients& grads, double scale) {
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const Layer& layer = net.layers[l];
        const auto& prev = scratch.outputs[l];
        const auto& delta = scratch.deltas[l];
        auto& g = grads[l];
        for (int j = 0; j < layer.out; ++j) {
            const double dj = delta[j] * scale;
            double* gw = g.weights.data() + static_cast<std::size_t>(j) * layer.in;
            for (int i = 0; i < layer.in; ++i) gw[i] += dj * prev[i];
            g.biases[j] += dj;
        }
    }
}

Gradients zero_gradients(const Network& net) {
    Gradients grads(net.layers.size());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        grads[l].weights.assign(net.layers[l].weights.size(), 0.0);
        grads[l].biases.assign(net.layers[l].biases.size(), 0.0);
    }
    return grads;
}

}  // namespace

Gradients gradient(const Network& net, std::span<const double> x,
                   std::span<const double> t) {
    if (static_cast<int>(t.size()) != net.output_dim())
        throw DimensionError("gradient: target has " + std::to_string(t.size()) +
                             " values, network outputs " + std::to_string(net.output_dim()));
    NetScratch scratch;
    forward_into(net, x, scratch);
    std::vector<double> seed(net.output_dim());
    for (int k = 0; k < net.output_dim(); ++k) seed[k] = scratch.outputs.back()[k] - t[k];
    backward_into(net, scratch, seed);
    Gradients grads = zero_gradients(net);
    accumulate_gradients(net, scratch, grads, 1.0);
    return grads;
}

void Dataset::add(std::span<const double> x, std::span<const double> t) {
    if (size() == 0 && inputs.empty()) {
        input_dim = static_cast<int>(x.size());
        target_dim = static_cast<int>(t.size());
    }
    if (static_cast<int>(x.size()) != input_dim ||
        static_cast<int>(t.size()) != target_dim)
        throw DimensionError("Dataset::add: sample dimensions differ from the dataset's");
    inputs.insert(inputs.end(), x.begin(), x.end());
    targets.insert(targets.end(), t.begin(), t.end());
}

void Dataset::validate() const {
    if (input_dim <= 0 || target_dim <= 0 || size() == 0)
        throw ConfigError("dataset is empty");
    if (inputs.size() != size() * input_dim || targets.size() != size() * target_dim)
        throw ConfigError("dataset storage is inconsistent with its dimensions");
    for (double v : inputs)
        if (!std::isfinite(v)) throw ConfigError("dataset contains a non-finite input");
    for (double v : targets)
        if (!std::isfinite(v)) throw ConfigError("dataset contains a non-finite target");
}

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
        throw ConfigError("learning_rate must be non-negative");
    if (max_epochs < 1) throw ConfigError("max_epochs must be positive");
    if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
}

namespace {

double dataset_mse(const Network& net, const Dataset& data, NetScratch& scratch) {
    double sse = 0.0;
    for (std::size_t s = 0; s < data.size(); ++s) {
        forward_into(net, data.input(s), scratch);
        const auto t = data.target(s);
        for (int k = 0; k < data.target_dim; ++k) {
            const double e = scratch.outputs.back()[k] - t[k];
            sse += e * e;
        }
    }
    return sse / (static_cast<double>(data.size()) * data.target_dim);
}

TrainResult train_gd(Network net, const Dataset& data, const TrainConfig& config) {
    TrainResult result;
    NetScratch scratch;
    const double inv_n = 1.0 / static_cast<double>(data.size());
    std::vector<double> seed(net.output_dim());
    Gradients grads = zero_gradients(net);

    TrainTrace& trace = result.trace;
    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        for (auto& g : grads) {
            std::fill(g.weights.begin(), g.weights.end(), 0.0);
            std::fill(g.biases.begin(), g.biases.end(), 0.0);
        }
        for (std::size_t s = 0; s < data.size(); ++s) {
            forward_into(net, data.input(s), scratch);
            const auto t = data.target(s);
            for (int k = 0; k < data.target_dim; ++k)
                seed[k] = scratch.outputs.back()[k] - t[k];
            backward_into(net, scratch, seed);
            accumulate_gradients(net, scratch, grads, inv_n);
        }
        for (std::size_t l = 0; l < net.layers.size(); ++l) {
            Layer& layer = net.layers[l];
            for (std::size_t i = 0; i < layer.weights.size(); ++i)
                layer.weights[i] -= config.learning_rate * grads[l].weights[i];
            for (std::size_t i = 0; i < layer.biases.size(); ++i)
                layer.biases[i] -= config.learning_rate * grads[l].biases[i];
        }
        const double mse = dataset_mse(net, data, scratch);
        if (!std::isfinite(mse))
            throw DivergenceError("training diverged (non-finite loss) at epoch " +
                                      std::to_string(epoch),
                                  epoch);
        trace.mse.push_back(mse);
        trace.epochs_run = epoch;
        if (mse <= config.tolerance) {
            trace.converged = true;
            break;
        }
    }
    result.net = std::move(net);
    return result;
}

// Residual Jacobian: one row per (sample, output) pair, columns in the
// pinned flat parameter order.
void build_jacobian(const Network& net, const Dataset& data, NetScratch& scratch,
                    std::vector<double>& jac, std::vector<double>& residuals) {
    const std::size_t p = parameter_count(net);
    const std::size_t rows = data.size() * data.target_dim;
    jac.assign(rows * p, 0.0);
    residuals.resize(rows);
    std::vector<double> seed(net.output_dim());
    std::size_t row = 0;
    for (std::size_t s = 0; s < data.size(); ++s) {
        forward_into(net, data.input(s), scratch);
        const auto t = data.target(s);
        for (int k = 0; k < data.target_dim; ++k, ++row) {
            residuals[row] = scratch.outputs.back()[k] - t[k];
            std::fill(seed.begin(), seed.end(), 0.0);
            seed[k] = 1.0;
            backward_into(net, scratch, seed);
            double* out = jac.data() + row * p;
            std::size_t col = 0;
            for (std::size_t l = 0; l < net.layers.size(); ++l) {
                const Layer& layer = net.layers[l];
                const auto& prev = scratch.outputs[l];
                const auto& delta = scratch.deltas[l];
                for (int j = 0; j < layer.out; ++j) {
                    const double dj = delta[j];
                    for (int i = 0; i < layer.in; ++i) out[col++] = dj * prev[i];
                }
                for (int j = 0; j < layer.out; ++j) out[col++] = delta[j];
            }
        }
    }
}

// In-place Cholesky solve of (A) x = b for SPD A. Returns false when a
// non-positive pivot shows up.
bool cholesky_solve(std::vector<double>& a, std::size_t n, std::vector<double>& b) {
    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
        if (!(d > 0.0) || !std::isfinite(d)) return false;
        const double dj = std::sqrt(d);
        a[j * n + j] = dj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = s / dj;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= a[i * n + k] * b[k];
        b[i] = s / a[i * n + i];
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= a[k * n + i] * b[k];
        b[i] = s / a[i * n + i];
    }
    return true;
}

double dataset_sse(const Network& net, const Dataset& data, NetScratch& scratch) {
    double sse = 0.0;
    for (std::size_t s = 0; s < data.size(); ++s) {
        forward_into(net, data.input(s), scratch);
        const auto t = data.target(s);
        for (int k = 0; k < data.target_dim; ++k) {
            const double e = scratch.outputs.back()[k] - t[k];
            sse += e * e;
        }
    }
    return sse;
}

TrainResult train_lm(Network net, const Dataset& data, const TrainConfig& config) {
    TrainResult result;
    NetScratch scratch;
    const std::size_t p = parameter_count(net);
    const double denom = static_cast<double>(data.size()) * data.target_dim;

    std::vector<double> jac, residuals, jtj(p * p), jte(p), chol, step(p), params(p),
        trial(p);
    double mu = -1.0, nu = 2.0;

    TrainTrace& trace = result.trace;
    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        build_jacobian(net, data, scratch, jac, residuals);
        double sse = 0.0;
        for (double r : residuals) sse += r * r;
        if (!std::isfinite(sse))
            throw DivergenceError("training diverged (non-finite loss) at epoch " +
                                      std::to_string(epoch),
                                  epoch);

        const std::size_t rows = residuals.size();
        std::fill(jtj.begin(), jtj.end(), 0.0);
        std::fill(jte.begin(), jte.end(), 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
            const double* row = jac.data() + r * p;
            const double res = residuals[r];
            for (std::size_t i = 0; i < p; ++i) {
                const double ri = row[i];
                if (ri == 0.0) continue;
                double* out = jtj.data() + i * p;
                for (std::size_t j = i; j < p; ++j) out[j] += ri * row[j];
                jte[i] += ri * res;
            }
        }
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < i; ++j) jtj[i * p + j] = jtj[j * p + i];

        if (mu < 0.0) {
            double dmax = 0.0;
            for (std::size_t i = 0; i < p; ++i) dmax = std::max(dmax, jtj[i * p + i]);
            mu = 1e-3 * (dmax > 0.0 ? dmax : 1.0);
        }

        copy_parameters(net, params);
        bool accepted = false;
        for (int attempt = 0; attempt < 50; ++attempt) {
            chol = jtj;
            for (std::size_t i = 0; i < p; ++i) chol[i * p + i] += mu;
            step = jte;
            if (!cholesky_solve(chol, p, step)) {
                mu *= nu;
                nu *= 2.0;
                continue;
            }
            for (std::size_t i = 0; i < p; ++i) trial[i] = params[i] - step[i];
            set_parameters(net, trial);
            const double trial_sse = dataset_sse(net, data, scratch);
            if (std::isfinite(trial_sse) && trial_sse < sse) {
                double pred = 0.0;  // predicted reduction, always > 0 here
                for (std::size_t i = 0; i < p; ++i) step[i] = step[i] * mu + jte[i];
                for (std::size_t i = 0; i < p; ++i)
                    pred += (params[i] - trial[i]) * step[i];
                const double rho = pred > 0.0 ? (sse - trial_sse) / pred : 1.0;
                const double shrink = 1.0 - std::pow(2.0 * rho - 1.0, 3.0);
                mu = std::max(mu * std::max(1.0 / 3.0, shrink), 1e-20);
                nu = 2.0;
                sse = trial_sse;
                accepted = true;
                break;
            }
            set_parameters(net, params);
            mu *= nu;
            nu *= 2.0;
            if (mu > 1e14) break;
        }
        if (!accepted) break;  // no descent direction left at this scale

        const double mse = sse / denom;
        trace.mse.push_back(mse);
        trace.epochs_run = epoch;
        if (mse <= config.tolerance) {
            trace.converged = true;
            break;
        }
    }
    result.net = std::move(net);
    return result;
}

}  // namespace

TrainResult train_backprop(const Network& tmpl, const Dataset& data,
                           const TrainConfig& config) {
    config.validate();
    data.validate();
    if (data.input_dim != tmpl.input_dim() || data.target_dim != tmpl.output_dim())
        throw DimensionError("train_backprop: dataset dimensions do not match the network");

    std::vector<Activation> acts;
    for (const auto& layer : tmpl.layers) acts.push_back(layer.activation);
    Network net = random_network(tmpl.layer_sizes, acts, config.rng_seed);
    net.input_norm = tmpl.input_norm;

    return config.algorithm == TrainAlgorithm::GradientDescent
               ? train_gd(std::move(net), data, config)
               : train_lm(std::move(net), data, config);
}

}  // namespace gnf
