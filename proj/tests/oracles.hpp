// Test-only reference implementations, kept independent of the library
// code paths they check: a dense-grid centroid, a loop-based forward
// pass, finite-difference gradients and a brute-force fitness sum.
#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "gnf/fuzzy.hpp"
#include "gnf/ga.hpp"
#include "gnf/net.hpp"

namespace oracles {

// Centroid of the aggregate output set on its own dense grid. Shares
// only evaluate_mf/fire_rule with the library; the aggregation and
// defuzzification arithmetic is written out independently here.
inline double dense_centroid(const gnf::FuzzySystem& system,
                             const gnf::InputValues& inputs, int resolution) {
    std::vector<double> strengths;
    for (const auto& rule : system.rules)
        strengths.push_back(gnf::fire_rule(system, rule, inputs));

    const double lo = system.output.universe.lo;
    const double hi = system.output.universe.hi;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < resolution; ++i) {
        const double x = lo + (hi - lo) * i / (resolution - 1);
        double mu = 0.0;
        for (std::size_t r = 0; r < system.rules.size(); ++r) {
            const auto* set = system.output.find(system.rules[r].consequent_label);
            double clipped = set->mf.evaluate(x);
            if (clipped > strengths[r]) clipped = strengths[r];
            if (clipped > mu) mu = clipped;
        }
        num += x * mu;
        den += mu;
    }
    return num / den;
}

// Plain-loop forward pass, including the input normalization, written
// without the library's scratch machinery.
inline std::vector<double> naive_forward(const gnf::Network& net,
                                         const std::vector<double>& x) {
    std::vector<double> current(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        current[i] = net.input_norm.identity()
                         ? x[i]
                         : 2.0 * (x[i] - net.input_norm.lo[i]) /
                                   (net.input_norm.hi[i] - net.input_norm.lo[i]) -
                               1.0;
    for (const auto& layer : net.layers) {
        std::vector<double> next(layer.out);
        for (int j = 0; j < layer.out; ++j) {
            double a = layer.biases[j];
            for (int i = 0; i < layer.in; ++i)
                a += layer.weights[static_cast<std::size_t>(j) * layer.in + i] * current[i];
            next[j] = gnf::activation_apply(layer.activation, a);
        }
        current = std::move(next);
    }
    return current;
}

inline double half_sq_loss(const gnf::Network& net, const std::vector<double>& x,
                           const std::vector<double>& t) {
    const auto y = gnf::forward(net, x);
    double loss = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) loss += 0.5 * (y[k] - t[k]) * (y[k] - t[k]);
    return loss;
}

// Central finite differences of the half squared error over every
// parameter, in the pinned flat order.
inline std::vector<double> fd_gradient(const gnf::Network& net,
                                       const std::vector<double>& x,
                                       const std::vector<double>& t, double h = 1e-5) {
    std::vector<double> params(gnf::parameter_count(net));
    gnf::copy_parameters(net, params);
    std::vector<double> grad(params.size());
    gnf::Network probe = net;
    for (std::size_t i = 0; i < params.size(); ++i) {
        std::vector<double> bumped = params;
        bumped[i] = params[i] + h;
        gnf::set_parameters(probe, bumped);
        const double up = half_sq_loss(probe, x, t);
        bumped[i] = params[i] - h;
        gnf::set_parameters(probe, bumped);
        const double down = half_sq_loss(probe, x, t);
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

// Hand-loop sum of |t - y| with the naive forward pass.
inline double brute_fitness(const gnf::Genome& genome, const gnf::Network& tmpl,
                            const gnf::Dataset& data) {
    gnf::Network net = gnf::unflatten(genome, tmpl);
    double total = 0.0;
    for (std::size_t s = 0; s < data.size(); ++s) {
        const auto in = data.input(s);
        const auto y = naive_forward(net, {in.begin(), in.end()});
        const auto t = data.target(s);
        for (std::size_t k = 0; k < y.size(); ++k) total += std::abs(t[k] - y[k]);
    }
    return total;
}

// Random valid fuzzy system, parameters inside the universes.
inline gnf::FuzzySystem random_system(std::mt19937_64& rng) {
    auto uniform = [&](double a, double b) {
        return std::uniform_real_distribution<double>(a, b)(rng);
    };
    auto pick = [&](int a, int b) {
        return std::uniform_int_distribution<int>(a, b)(rng);
    };

    auto random_variable = [&](const std::string& name) {
        gnf::LinguisticVariable var;
        var.name = name;
        var.universe.name = name;
        var.universe.lo = uniform(-20.0, 10.0);
        var.universe.hi = var.universe.lo + uniform(0.5, 25.0);
        const int n_sets = pick(1, 4);
        for (int s = 0; s < n_sets; ++s) {
            gnf::MembershipFunction mf;
            std::vector<double> pts;
            switch (pick(0, 3)) {
                case 0: {
                    for (int k = 0; k < 3; ++k)
                        pts.push_back(uniform(var.universe.lo, var.universe.hi));
                    std::sort(pts.begin(), pts.end());
                    mf = gnf::MembershipFunction::triangular(pts[0], pts[1], pts[2]);
                    break;
                }
                case 1: {
                    for (int k = 0; k < 4; ++k)
                        pts.push_back(uniform(var.universe.lo, var.universe.hi));
                    std::sort(pts.begin(), pts.end());
                    mf = gnf::MembershipFunction::trapezoidal(pts[0], pts[1], pts[2], pts[3]);
                    break;
                }
                case 2:
                    mf = gnf::MembershipFunction::gaussian(
                        uniform(var.universe.lo, var.universe.hi), uniform(0.1, 5.0));
                    break;
                default:
                    mf = gnf::MembershipFunction::crisp_threshold(
                        uniform(var.universe.lo, var.universe.hi));
                    break;
            }
            var.sets.push_back({"s" + std::to_string(s), mf});
        }
        return var;
    };

    gnf::FuzzySystem sys;
    sys.name = "generated";
    const int n_inputs = pick(1, 3);
    for (int i = 0; i < n_inputs; ++i)
        sys.inputs.push_back(random_variable("in" + std::to_string(i)));
    sys.output = random_variable("out");
    sys.norms.resolution = pick(2, 301);

    const int n_rules = pick(1, 5);
    for (int r = 0; r < n_rules; ++r) {
        gnf::Rule rule;
        rule.connective = pick(0, 1) ? gnf::Connective::And : gnf::Connective::Or;
        const int n_clauses = pick(1, n_inputs);
        for (int c = 0; c < n_clauses; ++c) {
            const auto& var = sys.inputs[pick(0, n_inputs - 1)];
            rule.antecedent.push_back(
                {var.name,
                 var.sets[pick(0, static_cast<int>(var.sets.size()) - 1)].label,
                 pick(0, 3) == 0});
        }
        rule.consequent_variable = sys.output.name;
        rule.consequent_label =
            sys.output.sets[pick(0, static_cast<int>(sys.output.sets.size()) - 1)].label;
        rule.weight = pick(0, 2) == 0 ? uniform(0.0, 1.0) : 1.0;
        sys.rules.push_back(std::move(rule));
    }
    sys.validate();
    return sys;
}

}  // namespace oracles
