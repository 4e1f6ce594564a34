#include <cmath>
#include <random>

#include "doctest.h"
#include "gnf/net.hpp"
#include "oracles.hpp"

using namespace gnf;

namespace {

Network small_net(std::uint64_t seed) {
    return random_network({2, 3, 1}, {Activation::TanSigmoid, Activation::Linear}, seed);
}

}  // namespace

TEST_SUITE("net") {

TEST_CASE("activation values") {
    CHECK(activation_apply(Activation::TanSigmoid, 0.0) == 0.0);
    CHECK(activation_apply(Activation::Linear, 3.7) == 3.7);
    CHECK(activation_apply(Activation::Sigmoid, 0.0) == 0.5);
    CHECK(activation_apply(Activation::Threshold, -0.1) == 0.0);
    CHECK(activation_apply(Activation::Threshold, 0.1) == 1.0);
    CHECK(activation_apply(Activation::Ramp, -2.0) == 0.0);
    CHECK(activation_apply(Activation::Ramp, 0.25) == 0.25);
    CHECK(activation_apply(Activation::Ramp, 2.0) == 1.0);

    // tan_sigmoid is 2/(1+e^{-2a}) - 1
    for (double a : {-2.0, -0.3, 0.7, 1.9})
        CHECK(activation_apply(Activation::TanSigmoid, a) ==
              doctest::Approx(2.0 / (1.0 + std::exp(-2.0 * a)) - 1.0).epsilon(1e-15));

    // bounded kinds stay in range
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> span(-40.0, 40.0);
    for (int i = 0; i < 500; ++i) {
        const double a = span(rng);
        const double sig = activation_apply(Activation::Sigmoid, a);
        const double tan = activation_apply(Activation::TanSigmoid, a);
        const double ramp = activation_apply(Activation::Ramp, a);
        CHECK((sig >= 0.0 && sig <= 1.0));
        CHECK((tan >= -1.0 && tan <= 1.0));
        CHECK((ramp >= 0.0 && ramp <= 1.0));
    }
}

TEST_CASE("neuron action") {
    const double w1[] = {1.0, 1.0};
    const double x1[] = {2.0, 3.0};
    CHECK(neuron_action(w1, x1, 0.0) == 5.0);

    const double w2[] = {0.0, 0.0};
    CHECK(neuron_action(w2, x1, 7.5) == 7.5);

    const double w3[] = {0.5, -0.5};
    const double x3[] = {4.0, 4.0};
    CHECK(neuron_action(w3, x3, 1.0) == 1.0);

    const double short_x[] = {1.0};
    CHECK_THROWS_AS(neuron_action(w1, short_x, 0.0), DimensionError);
}

TEST_CASE("forward composes actions and activations") {
    SUBCASE("zero network emits zeros") {
        Network net = make_network({3, 4, 2}, {Activation::TanSigmoid, Activation::Linear});
        const auto y = forward(net, std::vector<double>{1.0, -2.0, 3.0});
        CHECK(y == std::vector<double>{0.0, 0.0});
    }
    SUBCASE("1-1 linear net is w*x + b") {
        Network net = make_network({1, 1}, {Activation::Linear});
        net.layers[0].weights = {2.0};
        net.layers[0].biases = {0.0};
        CHECK(forward(net, std::vector<double>{3.0}) == std::vector<double>{6.0});
    }
    SUBCASE("matches the naive loop oracle on random nets") {
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> uni(-2.0, 2.0);
        for (int i = 0; i < 100; ++i) {
            Network net = random_network({3, 5, 4, 2},
                                         {Activation::Sigmoid, Activation::TanSigmoid,
                                          Activation::Linear},
                                         i);
            const std::vector<double> x{uni(rng), uni(rng), uni(rng)};
            const auto a = forward(net, x);
            const auto b = oracles::naive_forward(net, x);
            for (std::size_t k = 0; k < a.size(); ++k)
                CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-15));
        }
    }
    SUBCASE("2-50-1 random net is finite over the whole grid") {
        Network net = random_network({2, 50, 1},
                                     {Activation::TanSigmoid, Activation::Linear}, 5);
        net.input_norm.lo = {0.0, 0.0};
        net.input_norm.hi = {10.0, 10.0};
        for (double s = 0.0; s <= 10.0; s += 0.5)
            for (double f = 0.0; f <= 10.0; f += 0.5)
                CHECK(std::isfinite(forward(net, std::vector<double>{s, f})[0]));
    }
    SUBCASE("dimension mismatch raises") {
        Network net = small_net(1);
        CHECK_THROWS_AS(forward(net, std::vector<double>{1.0}), DimensionError);
    }
}

TEST_CASE("input normalization maps the universe onto [-1,1]") {
    Network net = make_network({1, 1}, {Activation::Linear});
    net.layers[0].weights = {1.0};
    net.input_norm.lo = {0.0};
    net.input_norm.hi = {10.0};
    CHECK(forward(net, std::vector<double>{0.0})[0] == -1.0);
    CHECK(forward(net, std::vector<double>{5.0})[0] == 0.0);
    CHECK(forward(net, std::vector<double>{10.0})[0] == 1.0);
}

TEST_CASE("analytic gradient matches central finite differences") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        Network net = small_net(trial);
        const std::vector<double> x{uni(rng), uni(rng)};
        const std::vector<double> t{uni(rng)};

        const Gradients analytic = gradient(net, x, t);
        std::vector<double> flat;
        for (const auto& layer : analytic) {
            flat.insert(flat.end(), layer.weights.begin(), layer.weights.end());
            flat.insert(flat.end(), layer.biases.begin(), layer.biases.end());
        }
        const std::vector<double> numeric = oracles::fd_gradient(net, x, t);

        REQUIRE(flat.size() == numeric.size());
        double scale = 1.0;
        for (std::size_t i = 0; i < flat.size(); ++i)
            scale = std::max({scale, std::abs(flat[i]), std::abs(numeric[i])});
        for (std::size_t i = 0; i < flat.size(); ++i)
            CHECK(std::abs(flat[i] - numeric[i]) / scale <= 1e-6);
    }
}

TEST_CASE("gradient is zero exactly at a perfect fit") {
    Network net = small_net(7);
    const std::vector<double> x{0.3, -0.8};
    const auto y = forward(net, x);
    const Gradients grads = gradient(net, x, y);
    for (const auto& layer : grads) {
        for (double g : layer.weights) CHECK(g == 0.0);
        for (double g : layer.biases) CHECK(g == 0.0);
    }
}

TEST_CASE("output bias partial of a linear output is y - t") {
    Network net = small_net(9);
    const std::vector<double> x{0.5, 0.25};
    const std::vector<double> t{2.0};
    const double y = forward(net, x)[0];
    const Gradients grads = gradient(net, x, t);
    CHECK(grads.back().biases[0] == doctest::Approx(y - 2.0).epsilon(1e-15));
}

TEST_CASE("train_backprop contracts") {
    SUBCASE("learning rate zero leaves the weights at their seeded init") {
        Dataset data;
        data.add(std::vector<double>{1.0}, std::vector<double>{3.0});
        data.add(std::vector<double>{2.0}, std::vector<double>{5.0});
        Network tmpl = make_network({1, 1}, {Activation::Linear});
        TrainConfig config;
        config.algorithm = TrainAlgorithm::GradientDescent;
        config.learning_rate = 0.0;
        config.max_epochs = 25;
        config.rng_seed = 4;
        const TrainResult result = train_backprop(tmpl, data, config);
        const Network init = random_network({1, 1}, {Activation::Linear}, 4);
        CHECK(result.net.layers[0].weights == init.layers[0].weights);
        CHECK(result.net.layers[0].biases == init.layers[0].biases);
        CHECK_FALSE(result.trace.converged);
    }
    SUBCASE("realizable linear target converges under plain gradient descent") {
        Dataset data;
        for (double x = -1.0; x <= 1.0; x += 0.25)
            data.add({&x, 1}, std::vector<double>{2.0 * x + 1.0});
        Network tmpl = make_network({1, 1}, {Activation::Linear});
        TrainConfig config;
        config.algorithm = TrainAlgorithm::GradientDescent;
        config.learning_rate = 0.5;
        config.max_epochs = 2000;
        config.tolerance = 1e-9;
        config.rng_seed = 1;
        const TrainResult result = train_backprop(tmpl, data, config);
        CHECK(result.trace.converged);
        CHECK(result.trace.mse.back() <= 1e-9);
        CHECK(result.net.layers[0].weights[0] == doctest::Approx(2.0).epsilon(1e-3));
    }
    SUBCASE("same seed, same result") {
        Dataset data;
        for (double x = 0.0; x <= 1.0; x += 0.1)
            data.add({&x, 1}, std::vector<double>{std::sin(x)});
        Network tmpl = make_network({1, 4, 1},
                                    {Activation::TanSigmoid, Activation::Linear});
        TrainConfig config;
        config.max_epochs = 40;
        config.tolerance = 1e-12;
        config.rng_seed = 77;
        const TrainResult a = train_backprop(tmpl, data, config);
        const TrainResult b = train_backprop(tmpl, data, config);
        CHECK(a.net == b.net);
        CHECK(a.trace.mse == b.trace.mse);
    }
    SUBCASE("trace is finite and sized by epochs_run") {
        Dataset data;
        for (double x = 0.0; x <= 1.0; x += 0.1)
            data.add({&x, 1}, std::vector<double>{x * x});
        Network tmpl = make_network({1, 3, 1},
                                    {Activation::TanSigmoid, Activation::Linear});
        TrainConfig config;
        config.max_epochs = 30;
        config.tolerance = 1e-15;
        const TrainResult result = train_backprop(tmpl, data, config);
        CHECK(result.trace.mse.size() ==
              static_cast<std::size_t>(result.trace.epochs_run));
        for (double m : result.trace.mse) CHECK(std::isfinite(m));
    }
    SUBCASE("divergent gradient descent raises naming the epoch") {
        Dataset data;
        for (double x = -1.0; x <= 1.0; x += 0.1)
            data.add({&x, 1}, std::vector<double>{5.0 * x});
        Network tmpl = make_network({1, 1}, {Activation::Linear});
        TrainConfig config;
        config.algorithm = TrainAlgorithm::GradientDescent;
        config.learning_rate = 1e8;  // far past the stability limit
        config.max_epochs = 200;
        CHECK_THROWS_AS(train_backprop(tmpl, data, config), DivergenceError);
    }
    SUBCASE("dimension mismatch raises") {
        Dataset data;
        data.add(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0});
        Network tmpl = make_network({1, 1}, {Activation::Linear});
        CHECK_THROWS_AS(train_backprop(tmpl, data, TrainConfig{}), DimensionError);
    }
}

TEST_CASE("model JSON round-trips bit-exactly") {
    Network net = random_network({2, 5, 3, 1},
                                 {Activation::TanSigmoid, Activation::Sigmoid,
                                  Activation::Linear},
                                 123);
    net.input_norm.lo = {0.0, -3.5};
    net.input_norm.hi = {10.0, 7.25};
    // awkward doubles survive the trip
    net.layers[0].weights[0] = 0.1;
    net.layers[0].weights[1] = 1.0 / 3.0;
    net.layers[1].biases[0] = 1e-308;

    const std::string text = network_to_json(net);
    const Network back = network_from_json(text);
    CHECK(back == net);
    CHECK(network_to_json(back) == text);
}

TEST_CASE("model JSON rejects malformed documents") {
    Network net = random_network({1, 1}, {Activation::Linear}, 1);
    std::string good = network_to_json(net);

    CHECK_THROWS_AS(network_from_json("not json"), ConfigError);
    CHECK_THROWS_AS(network_from_json("{}"), ConfigError);

    std::string unknown_key = good;
    unknown_key.insert(unknown_key.find("\"format\""), "\"extra\": 1, ");
    CHECK_THROWS_AS(network_from_json(unknown_key), ConfigError);

    std::string bad_shape = good;
    const auto pos = bad_shape.find("\"layer_sizes\": [");
    bad_shape.replace(pos, 18, "\"layer_sizes\": [2");
    CHECK_THROWS_AS(network_from_json(bad_shape), ConfigError);
}

TEST_CASE("flat parameter order is layer-major, weights then biases") {
    Network net = make_network({2, 2, 1}, {Activation::Linear, Activation::Linear});
    std::vector<double> params(parameter_count(net));
    for (std::size_t i = 0; i < params.size(); ++i) params[i] = static_cast<double>(i);
    set_parameters(net, params);
    CHECK(net.layers[0].weights == std::vector<double>{0, 1, 2, 3});
    CHECK(net.layers[0].biases == std::vector<double>{4, 5});
    CHECK(net.layers[1].weights == std::vector<double>{6, 7});
    CHECK(net.layers[1].biases == std::vector<double>{8});
    std::vector<double> out(params.size());
    copy_parameters(net, out);
    CHECK(out == params);
}

}  // TEST_SUITE
