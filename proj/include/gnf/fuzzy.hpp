#pragma once

#include <array>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gnf/errors.hpp"

namespace gnf {

// Mamdani fuzzy inference: fuzzification, min/max rule evaluation,
// min implication, max aggregation, centroid defuzzification.
//
// All types are plain values, immutable by convention after a system is
// validated; infer() is pure and safe to call concurrently.

struct Universe {
    double lo = 0.0;
    double hi = 1.0;
    std::string name;

    double clamp(double x) const { return x < lo ? lo : (x > hi ? hi : x); }
    double span() const { return hi - lo; }
};

enum class MfKind { Triangular, Trapezoidal, Gaussian, CrispThreshold };

// Parametric membership curve. Parameter slots by kind:
//   triangular      a <= b <= c            (p[0..2])
//   trapezoidal     a <= b <= c <= d       (p[0..3])
//   gaussian        center, sigma > 0      (p[0..1])
//   crisp_threshold t                      (p[0]), degree is 1 for x > t
struct MembershipFunction {
    MfKind kind = MfKind::Triangular;
    std::array<double, 4> p{};

    static MembershipFunction triangular(double a, double b, double c);
    static MembershipFunction trapezoidal(double a, double b, double c, double d);
    static MembershipFunction gaussian(double center, double sigma);
    static MembershipFunction crisp_threshold(double t);

    int parameter_count() const;
    // Degree of membership in [0, 1]. Total over all finite x.
    double evaluate(double x) const;
    // Throws ConfigError when the kind's parameter ordering is violated.
    void validate() const;

    bool operator==(const MembershipFunction&) const = default;
};

struct FuzzySet {
    std::string label;
    MembershipFunction mf;

    bool operator==(const FuzzySet&) const = default;
};

struct LinguisticVariable {
    std::string name;
    Universe universe;
    std::vector<FuzzySet> sets;

    const FuzzySet* find(std::string_view label) const;

    bool operator==(const LinguisticVariable&) const = default;
};

inline bool operator==(const Universe& a, const Universe& b) {
    return a.lo == b.lo && a.hi == b.hi && a.name == b.name;
}

enum class Connective { And, Or };

struct RuleClause {
    std::string variable;
    std::string label;
    bool negated = false;

    bool operator==(const RuleClause&) const = default;
};

struct Rule {
    std::vector<RuleClause> antecedent;  // non-empty
    Connective connective = Connective::And;
    std::string consequent_variable;
    std::string consequent_label;
    double weight = 1.0;  // in [0, 1]

    bool operator==(const Rule&) const = default;
};

// Operator family of the system. Exactly one choice is supported per
// operator today; the enums keep the rule-base format explicit about
// which family a file was written for.
enum class TNorm { Min };
enum class SNorm { Max };
enum class Complement { OneMinus };
enum class Implication { Min };
enum class Aggregation { Max };
enum class Defuzzifier { Centroid };

struct NormConfig {
    TNorm t_norm = TNorm::Min;
    SNorm s_norm = SNorm::Max;
    Complement complement = Complement::OneMinus;
    Implication implication = Implication::Min;
    Aggregation aggregation = Aggregation::Max;
    Defuzzifier defuzzifier = Defuzzifier::Centroid;
    int resolution = 101;  // output-universe discretization, >= 2

    bool operator==(const NormConfig&) const = default;
};

struct FuzzySystem {
    std::string name;
    std::vector<LinguisticVariable> inputs;
    LinguisticVariable output;
    std::vector<Rule> rules;
    NormConfig norms;

    const LinguisticVariable* find_input(std::string_view name) const;
    // Checks every structural invariant (variable/label references,
    // parameter ordering, weight range, resolution). Throws ConfigError.
    void validate() const;

    bool operator==(const FuzzySystem&) const = default;
};

// Degree operators (Mamdani family).
double t_norm(double a, double b);         // min
double s_norm(double a, double b);         // max
double complement_degree(double a);        // 1 - a

using InputValues = std::map<std::string, double>;

// Antecedent firing strength for one rule: fuzzify each clause
// (complemented when negated), fold with min for AND / max for OR,
// scale by the rule weight. Inputs are clamped to their universes.
// Throws EvalError on unresolved variable/label references or when an
// input value is missing.
double fire_rule(const FuzzySystem& system, const Rule& rule, const InputValues& inputs);

struct RuleTrace {
    std::vector<double> firing_strengths;  // one per rule, in rule order
    std::vector<double> grid;              // output universe discretization
    std::vector<double> aggregate;         // max of clipped consequents on the grid
};

struct InferResult {
    double crisp = 0.0;
    RuleTrace trace;
};

// Full Mamdani step: fire every rule, clip its consequent set at the
// firing strength, aggregate with max over `norms.resolution` grid
// points, defuzzify by centroid. Throws EvalError when the aggregate is
// identically zero ("no rule fired").
InferResult infer(const FuzzySystem& system, const InputValues& inputs);

// The three-rule tipper system: service/food on [0,10] in, tip on
// [0,30] out, output sets centered at 5/15/25.
FuzzySystem builtin_tipper();

}  // namespace gnf
