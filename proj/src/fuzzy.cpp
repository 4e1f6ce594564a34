#include "gnf/fuzzy.hpp"

#include <algorithm>
#include <cmath>

namespace gnf {

MembershipFunction MembershipFunction::triangular(double a, double b, double c) {
    return {MfKind::Triangular, {a, b, c, 0.0}};
}

MembershipFunction MembershipFunction::trapezoidal(double a, double b, double c, double d) {
    return {MfKind::Trapezoidal, {a, b, c, d}};
}

MembershipFunction MembershipFunction::gaussian(double center, double sigma) {
    return {MfKind::Gaussian, {center, sigma, 0.0, 0.0}};
}

MembershipFunction MembershipFunction::crisp_threshold(double t) {
    return {MfKind::CrispThreshold, {t, 0.0, 0.0, 0.0}};
}

int MembershipFunction::parameter_count() const {
    switch (kind) {
        case MfKind::Triangular: return 3;
        case MfKind::Trapezoidal: return 4;
        case MfKind::Gaussian: return 2;
        case MfKind::CrispThreshold: return 1;
    }
    return 0;
}

double MembershipFunction::evaluate(double x) const {
    switch (kind) {
        case MfKind::Triangular: {
            const double a = p[0], b = p[1], c = p[2];
            if (x < a || x > c) return 0.0;
            if (x < b) return (x - a) / (b - a);  // b > a here, since x >= a
            if (x > b) return (c - x) / (c - b);  // c > b here, since x <= c
            return 1.0;
        }
        case MfKind::Trapezoidal: {
            const double a = p[0], b = p[1], c = p[2], d = p[3];
            if (x < a || x > d) return 0.0;
            if (x < b) return (x - a) / (b - a);
            if (x > c) return (d - x) / (d - c);
            return 1.0;
        }
        case MfKind::Gaussian: {
            const double center = p[0], sigma = p[1];
            const double z = (x - center) / sigma;
            return std::exp(-0.5 * z * z);
        }
        case MfKind::CrispThreshold:
            return x > p[0] ? 1.0 : 0.0;
    }
    return 0.0;
}

void MembershipFunction::validate() const {
    for (int i = 0; i < parameter_count(); ++i)
        if (!std::isfinite(p[i]))
            throw ConfigError("membership function parameter is not finite");
    switch (kind) {
        case MfKind::Triangular:
            if (!(p[0] <= p[1] && p[1] <= p[2]))
                throw ConfigError("triangular parameters must satisfy a <= b <= c");
            break;
        case MfKind::Trapezoidal:
            if (!(p[0] <= p[1] && p[1] <= p[2] && p[2] <= p[3]))
                throw ConfigError("trapezoidal parameters must satisfy a <= b <= c <= d");
            break;
        case MfKind::Gaussian:
            if (!(p[1] > 0.0))
                throw ConfigError("gaussian sigma must be positive");
            break;
        case MfKind::CrispThreshold:
            break;
    }
}

const FuzzySet* LinguisticVariable::find(std::string_view label) const {
    for (const auto& s : sets)
        if (s.label == label) return &s;
    return nullptr;
}

const LinguisticVariable* FuzzySystem::find_input(std::string_view name) const {
    for (const auto& v : inputs)
        if (v.name == name) return &v;
    return nullptr;
}

namespace {

void validate_variable(const LinguisticVariable& var) {
    if (!(var.universe.lo < var.universe.hi))
        throw ConfigError("universe of '" + var.name + "' must satisfy lo < hi");
    if (var.sets.empty())
        throw ConfigError("variable '" + var.name + "' has no sets");
    for (size_t i = 0; i < var.sets.size(); ++i) {
        var.sets[i].mf.validate();
        for (size_t j = i + 1; j < var.sets.size(); ++j)
            if (var.sets[i].label == var.sets[j].label)
                throw ConfigError("duplicate set label '" + var.sets[i].label +
                                  "' in variable '" + var.name + "'");
    }
}

const LinguisticVariable& resolve_variable(const FuzzySystem& system,
                                           const std::string& name) {
    if (const auto* v = system.find_input(name)) return *v;
    if (system.output.name == name) return system.output;
    throw EvalError("rule references unknown variable '" + name + "'");
}

}  // namespace

void FuzzySystem::validate() const {
    if (inputs.empty()) throw ConfigError("system has no input variables");
    if (rules.empty()) throw ConfigError("system has no rules");
    if (norms.resolution < 2) throw ConfigError("norms resolution must be >= 2");
    for (const auto& v : inputs) validate_variable(v);
    validate_variable(output);
    for (size_t i = 0; i < inputs.size(); ++i) {
        if (inputs[i].name == output.name)
            throw ConfigError("variable name '" + output.name + "' used for input and output");
        for (size_t j = i + 1; j < inputs.size(); ++j)
            if (inputs[i].name == inputs[j].name)
                throw ConfigError("duplicate input variable '" + inputs[i].name + "'");
    }
    for (const auto& rule : rules) {
        if (rule.antecedent.empty()) throw ConfigError("rule has an empty antecedent");
        if (!(rule.weight >= 0.0 && rule.weight <= 1.0))
            throw ConfigError("rule weight must lie in [0, 1]");
        for (const auto& clause : rule.antecedent) {
            const auto* var = find_input(clause.variable);
            if (!var)
                throw ConfigError("rule references unknown input '" + clause.variable + "'");
            if (!var->find(clause.label))
                throw ConfigError("rule references unknown set '" + clause.label +
                                  "' of '" + clause.variable + "'");
        }
        if (rule.consequent_variable != output.name)
            throw ConfigError("rule consequent must name the output variable");
        if (!output.find(rule.consequent_label))
            throw ConfigError("rule references unknown output set '" +
                              rule.consequent_label + "'");
    }
}

double t_norm(double a, double b) { return std::min(a, b); }
double s_norm(double a, double b) { return std::max(a, b); }
double complement_degree(double a) { return 1.0 - a; }

double fire_rule(const FuzzySystem& system, const Rule& rule, const InputValues& inputs) {
    if (rule.antecedent.empty()) throw EvalError("rule has an empty antecedent");
    bool first = true;
    double strength = 0.0;
    for (const auto& clause : rule.antecedent) {
        const auto& var = resolve_variable(system, clause.variable);
        const auto* set = var.find(clause.label);
        if (!set)
            throw EvalError("rule references unknown set '" + clause.label + "' of '" +
                            clause.variable + "'");
        auto it = inputs.find(clause.variable);
        if (it == inputs.end())
            throw EvalError("missing input value for variable '" + clause.variable + "'");
        double degree = set->mf.evaluate(var.universe.clamp(it->second));
        if (clause.negated) degree = complement_degree(degree);
        if (first) {
            strength = degree;
            first = false;
        } else {
            strength = rule.connective == Connective::And ? t_norm(strength, degree)
                                                          : s_norm(strength, degree);
        }
    }
    return strength * rule.weight;
}

InferResult infer(const FuzzySystem& system, const InputValues& inputs) {
    InferResult result;
    result.trace.firing_strengths.reserve(system.rules.size());
    for (const auto& rule : system.rules)
        result.trace.firing_strengths.push_back(fire_rule(system, rule, inputs));

    const int n = system.norms.resolution;
    const Universe& out = system.output.universe;
    const double step = out.span() / (n - 1);
    result.trace.grid.resize(n);
    result.trace.aggregate.assign(n, 0.0);

    for (int i = 0; i < n; ++i)
        result.trace.grid[i] = out.lo + step * i;

    for (size_t r = 0; r < system.rules.size(); ++r) {
        const double strength = result.trace.firing_strengths[r];
        if (strength <= 0.0) continue;
        const auto* set = system.output.find(system.rules[r].consequent_label);
        if (!set)
            throw EvalError("rule references unknown output set '" +
                            system.rules[r].consequent_label + "'");
        for (int i = 0; i < n; ++i) {
            // implication = min (clip), aggregation = max
            const double clipped = std::min(strength, set->mf.evaluate(result.trace.grid[i]));
            result.trace.aggregate[i] = std::max(result.trace.aggregate[i], clipped);
        }
    }

    double weighted = 0.0, total = 0.0;
    for (int i = 0; i < n; ++i) {
        weighted += result.trace.grid[i] * result.trace.aggregate[i];
        total += result.trace.aggregate[i];
    }
    if (total == 0.0)
        throw EvalError("no rule fired: aggregate output is identically zero");
    result.crisp = weighted / total;
    return result;
}

FuzzySystem builtin_tipper() {
    FuzzySystem sys;
    sys.name = "tipper";

    LinguisticVariable service{"service", {0.0, 10.0, "service"}, {}};
    service.sets = {
        {"poor", MembershipFunction::gaussian(0.0, 1.5)},
        {"good", MembershipFunction::gaussian(5.0, 1.5)},
        {"excellent", MembershipFunction::gaussian(10.0, 1.5)},
    };

    LinguisticVariable food{"food", {0.0, 10.0, "food"}, {}};
    food.sets = {
        {"rancid", MembershipFunction::trapezoidal(0.0, 0.0, 1.0, 3.0)},
        {"delicious", MembershipFunction::trapezoidal(7.0, 9.0, 10.0, 10.0)},
    };

    LinguisticVariable tip{"tip", {0.0, 30.0, "tip"}, {}};
    tip.sets = {
        {"cheap", MembershipFunction::triangular(0.0, 5.0, 10.0)},
        {"average", MembershipFunction::triangular(10.0, 15.0, 20.0)},
        {"generous", MembershipFunction::triangular(20.0, 25.0, 30.0)},
    };

    sys.inputs = {service, food};
    sys.output = tip;
    sys.rules = {
        {{{"service", "poor", false}, {"food", "rancid", false}},
         Connective::Or, "tip", "cheap", 1.0},
        {{{"service", "good", false}},
         Connective::And, "tip", "average", 1.0},
        {{{"service", "excellent", false}, {"food", "delicious", false}},
         Connective::Or, "tip", "generous", 1.0},
    };
    sys.validate();
    return sys;
}

}  // namespace gnf
