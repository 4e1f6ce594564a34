#include "gnf/rulebase.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <utility>

#include "gnf/numfmt.hpp"

namespace gnf {

std::string_view to_string(ParseErrorKind kind) {
    switch (kind) {
        case ParseErrorKind::Syntax: return "syntax";
        case ParseErrorKind::UnknownKeyword: return "unknown_keyword";
        case ParseErrorKind::BadNumber: return "bad_number";
        case ParseErrorKind::DuplicateLabel: return "duplicate_label";
        case ParseErrorKind::UnresolvedReference: return "unresolved_reference";
        case ParseErrorKind::RangeViolation: return "range_violation";
    }
    return "syntax";
}

namespace {

std::string describe(const ParseError& e) {
    return std::to_string(e.span.line) + ":" + std::to_string(e.span.column) + ": " +
           std::string(to_string(e.kind)) + ": " + e.message;
}

}  // namespace

ParseFailure::ParseFailure(ParseError error)
    : Error(describe(error)), detail(std::move(error)) {}

namespace {

struct Token {
    std::string_view text;
    SourceSpan span;
};

using TokenLine = std::vector<Token>;

[[noreturn]] void fail(SourceSpan span, ParseErrorKind kind, std::string message) {
    throw ParseFailure(ParseError{span, kind, std::move(message)});
}

std::vector<TokenLine> tokenize(std::string_view text) {
    std::vector<TokenLine> lines;
    TokenLine current;
    int line = 1, col = 1;
    size_t token_start = 0;
    int token_col = 0;
    bool in_token = false, in_comment = false;

    auto flush_token = [&](size_t end) {
        if (in_token) {
            current.push_back({text.substr(token_start, end - token_start),
                               {line, token_col}});
            in_token = false;
        }
    };
    auto flush_line = [&] {
        if (!current.empty()) {
            lines.push_back(std::move(current));
            current.clear();
        }
    };

    for (size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '\n') {
            if (!in_comment) flush_token(i);
            flush_line();
            in_comment = false;
            ++line;
            col = 1;
            continue;
        }
        if (!in_comment) {
            if (c == '#') {
                flush_token(i);
                in_comment = true;
            } else if (c == ' ' || c == '\t' || c == '\r') {
                flush_token(i);
            } else if (!in_token) {
                in_token = true;
                token_start = i;
                token_col = col;
            }
        }
        ++col;
    }
    if (!in_comment) flush_token(text.size());
    flush_line();
    return lines;
}

const std::set<std::string_view> kReserved = {
    "system", "input", "output", "set", "rule", "norms", "if", "then", "is",
    "not", "and", "or", "weight", "triangular", "trapezoidal", "gaussian",
    "crisp_threshold", "t_norm", "s_norm", "complement", "implication",
    "aggregation", "defuzzifier", "resolution", "min", "max", "one_minus",
    "centroid",
};

bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    auto head = static_cast<unsigned char>(s[0]);
    if (!std::isalpha(head) && s[0] != '_') return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        auto u = static_cast<unsigned char>(c);
        return std::isalnum(u) || c == '_';
    });
}

std::string_view check_name(const Token& tok) {
    if (!is_identifier(tok.text))
        fail(tok.span, ParseErrorKind::Syntax,
             "'" + std::string(tok.text) + "' is not a valid name");
    if (kReserved.count(tok.text))
        fail(tok.span, ParseErrorKind::Syntax,
             "keyword '" + std::string(tok.text) + "' cannot be used as a name");
    return tok.text;
}

double check_number(const Token& tok) {
    auto value = parse_double(tok.text);
    if (!value)
        fail(tok.span, ParseErrorKind::BadNumber,
             "'" + std::string(tok.text) + "' is not a finite number");
    return *value;
}

// Declarations with the spans needed for the semantic pass.
struct VarDecl {
    std::string_view name;
    double lo = 0.0, hi = 0.0;
    SourceSpan span;      // name token
    SourceSpan hi_span;   // upper bound token
    bool is_output = false;
};

struct SetDecl {
    std::string_view variable, label;
    MembershipFunction mf;
    SourceSpan var_span, label_span, params_span;
};

struct ClauseDecl {
    RuleClause clause;
    SourceSpan var_span, label_span;
};

struct RuleDecl {
    std::vector<ClauseDecl> clauses;
    Connective connective = Connective::And;
    std::string_view cons_variable, cons_label;
    double weight = 1.0;
    SourceSpan cons_var_span, cons_label_span, weight_span;
};

struct NormsDecl {
    NormConfig config;
    SourceSpan resolution_span;
    bool present = false;
    SourceSpan span;
};

struct Document {
    std::string_view system_name;
    SourceSpan system_span;
    std::vector<VarDecl> variables;
    std::vector<SetDecl> sets;
    std::vector<RuleDecl> rules;
    NormsDecl norms;
};

MfKind parse_mf_kind(const Token& tok) {
    if (tok.text == "triangular") return MfKind::Triangular;
    if (tok.text == "trapezoidal") return MfKind::Trapezoidal;
    if (tok.text == "gaussian") return MfKind::Gaussian;
    if (tok.text == "crisp_threshold") return MfKind::CrispThreshold;
    fail(tok.span, ParseErrorKind::UnknownKeyword,
         "unknown membership function kind '" + std::string(tok.text) + "'");
}

int mf_param_count(MfKind kind) {
    switch (kind) {
        case MfKind::Triangular: return 3;
        case MfKind::Trapezoidal: return 4;
        case MfKind::Gaussian: return 2;
        case MfKind::CrispThreshold: return 1;
    }
    return 0;
}

void parse_variable_line(const TokenLine& toks, bool is_output, Document& doc) {
    if (toks.size() != 4)
        fail(toks[0].span, ParseErrorKind::Syntax,
             std::string(toks[0].text) + " line requires: " +
                 std::string(toks[0].text) + " <name> <lo> <hi>");
    VarDecl decl;
    decl.name = check_name(toks[1]);
    decl.lo = check_number(toks[2]);
    decl.hi = check_number(toks[3]);
    decl.span = toks[1].span;
    decl.hi_span = toks[3].span;
    decl.is_output = is_output;
    doc.variables.push_back(decl);
}

void parse_set_line(const TokenLine& toks, Document& doc) {
    if (toks.size() < 4)
        fail(toks[0].span, ParseErrorKind::Syntax,
             "set line requires: set <variable> <label> <kind> <params...>");
    SetDecl decl;
    decl.variable = check_name(toks[1]);
    decl.label = check_name(toks[2]);
    decl.var_span = toks[1].span;
    decl.label_span = toks[2].span;
    decl.mf.kind = parse_mf_kind(toks[3]);
    const int want = mf_param_count(decl.mf.kind);
    if (static_cast<int>(toks.size()) != 4 + want)
        fail(toks[3].span, ParseErrorKind::Syntax,
             "'" + std::string(toks[3].text) + "' takes " + std::to_string(want) +
                 " parameters, got " + std::to_string(toks.size() - 4));
    for (int i = 0; i < want; ++i)
        decl.mf.p[i] = check_number(toks[4 + i]);
    decl.params_span = toks[4].span;
    doc.sets.push_back(decl);
}

void parse_rule_line(const TokenLine& toks, Document& doc) {
    size_t i = 1;
    auto expect = [&](std::string_view kw) {
        if (i >= toks.size())
            fail({toks.back().span.line,
                  toks.back().span.column + static_cast<int>(toks.back().text.size())},
                 ParseErrorKind::Syntax, "expected '" + std::string(kw) + "'");
        if (toks[i].text != kw)
            fail(toks[i].span, ParseErrorKind::Syntax,
                 "expected '" + std::string(kw) + "', got '" +
                     std::string(toks[i].text) + "'");
        ++i;
    };
    auto next = [&](const char* what) -> const Token& {
        if (i >= toks.size())
            fail({toks.back().span.line,
                  toks.back().span.column + static_cast<int>(toks.back().text.size())},
                 ParseErrorKind::Syntax, std::string("expected ") + what);
        return toks[i++];
    };

    RuleDecl decl;
    expect("if");
    bool connective_fixed = false;
    while (true) {
        ClauseDecl clause;
        const Token& var = next("a variable name");
        clause.clause.variable = check_name(var);
        clause.var_span = var.span;
        expect("is");
        const Token* label = &next("a set label");
        if (label->text == "not") {
            clause.clause.negated = true;
            label = &next("a set label");
        }
        clause.clause.label = check_name(*label);
        clause.label_span = label->span;
        decl.clauses.push_back(std::move(clause));

        const Token& sep = next("'and', 'or' or 'then'");
        if (sep.text == "then") break;
        Connective conn;
        if (sep.text == "and") conn = Connective::And;
        else if (sep.text == "or") conn = Connective::Or;
        else
            fail(sep.span, ParseErrorKind::Syntax,
                 "expected 'and', 'or' or 'then', got '" + std::string(sep.text) + "'");
        if (connective_fixed && conn != decl.connective)
            fail(sep.span, ParseErrorKind::Syntax,
                 "rule mixes 'and' and 'or' connectives");
        decl.connective = conn;
        connective_fixed = true;
    }

    const Token& cons_var = next("the output variable");
    decl.cons_variable = check_name(cons_var);
    decl.cons_var_span = cons_var.span;
    expect("is");
    const Token& cons_label = next("an output set label");
    decl.cons_label = check_name(cons_label);
    decl.cons_label_span = cons_label.span;
    decl.weight_span = cons_label.span;

    if (i < toks.size()) {
        expect("weight");
        const Token& w = next("a weight value");
        decl.weight = check_number(w);
        decl.weight_span = w.span;
    }
    if (i < toks.size())
        fail(toks[i].span, ParseErrorKind::Syntax,
             "unexpected token '" + std::string(toks[i].text) + "' after rule");
    doc.rules.push_back(std::move(decl));
}

void parse_norms_line(const TokenLine& toks, Document& doc) {
    if (doc.norms.present)
        fail(toks[0].span, ParseErrorKind::Syntax, "duplicate norms line");
    doc.norms.present = true;
    doc.norms.span = toks[0].span;
    std::set<std::string_view> seen;
    for (size_t i = 1; i < toks.size(); ++i) {
        const Token& tok = toks[i];
        const size_t eq = tok.text.find('=');
        if (eq == std::string_view::npos)
            fail(tok.span, ParseErrorKind::Syntax,
                 "norms entries have the form key=value, got '" +
                     std::string(tok.text) + "'");
        const std::string_view key = tok.text.substr(0, eq);
        const std::string_view value = tok.text.substr(eq + 1);
        if (!seen.insert(key).second)
            fail(tok.span, ParseErrorKind::Syntax,
                 "duplicate norms key '" + std::string(key) + "'");
        auto expect_value = [&](std::string_view want) {
            if (value != want)
                fail(tok.span, ParseErrorKind::UnknownKeyword,
                     "unsupported " + std::string(key) + " '" + std::string(value) +
                         "' (supported: " + std::string(want) + ")");
        };
        if (key == "t_norm") expect_value("min");
        else if (key == "s_norm") expect_value("max");
        else if (key == "complement") expect_value("one_minus");
        else if (key == "implication") expect_value("min");
        else if (key == "aggregation") expect_value("max");
        else if (key == "defuzzifier") expect_value("centroid");
        else if (key == "resolution") {
            SourceSpan span{tok.span.line,
                            tok.span.column + static_cast<int>(eq) + 1};
            auto n = parse_int(value);
            if (!n)
                fail(span, ParseErrorKind::BadNumber,
                     "'" + std::string(value) + "' is not an integer");
            if (*n < 2 || *n > 10'000'000)
                fail(span, ParseErrorKind::RangeViolation,
                     "resolution must lie in [2, 10000000], got " + std::string(value));
            doc.norms.config.resolution = static_cast<int>(*n);
            doc.norms.resolution_span = span;
        } else {
            fail(tok.span, ParseErrorKind::UnknownKeyword,
                 "unknown norms key '" + std::string(key) + "'");
        }
    }
}

Document parse_syntax(std::string_view text) {
    const auto lines = tokenize(text);
    if (lines.empty())
        fail({1, 1}, ParseErrorKind::Syntax, "empty input: expected 'system <name>'");

    Document doc;
    const TokenLine& head = lines[0];
    if (head[0].text != "system")
        fail(head[0].span, ParseErrorKind::Syntax,
             "expected 'system <name>', got '" + std::string(head[0].text) + "'");
    if (head.size() != 2)
        fail(head[0].span, ParseErrorKind::Syntax, "system line requires: system <name>");
    doc.system_name = check_name(head[1]);
    doc.system_span = head[0].span;

    for (size_t li = 1; li < lines.size(); ++li) {
        const TokenLine& toks = lines[li];
        const std::string_view kw = toks[0].text;
        if (kw == "input") parse_variable_line(toks, false, doc);
        else if (kw == "output") parse_variable_line(toks, true, doc);
        else if (kw == "set") parse_set_line(toks, doc);
        else if (kw == "rule") parse_rule_line(toks, doc);
        else if (kw == "norms") parse_norms_line(toks, doc);
        else if (kw == "system")
            fail(toks[0].span, ParseErrorKind::Syntax, "duplicate system line");
        else
            fail(toks[0].span, ParseErrorKind::UnknownKeyword,
                 "unknown keyword '" + std::string(kw) + "'");
    }
    return doc;
}

// Semantic pass: resolve references, check duplicates and ranges, build
// the validated system. Position parameters are clamped into the
// owning universe; gaussian sigma is a width and is left alone.
FuzzySystem build_system(const Document& doc) {
    FuzzySystem sys;
    sys.name = std::string(doc.system_name);
    if (doc.norms.present) sys.norms = doc.norms.config;

    int output_count = 0;
    for (const auto& var : doc.variables) {
        bool name_taken = output_count > 0 && sys.output.name == var.name;
        for (const auto& other : sys.inputs)
            name_taken = name_taken || other.name == var.name;
        if (name_taken)
            fail(var.span, ParseErrorKind::DuplicateLabel,
                 "duplicate variable name '" + std::string(var.name) + "'");
        if (var.is_output && output_count > 0)
            fail(var.span, ParseErrorKind::DuplicateLabel, "duplicate output declaration");
        if (!(var.lo < var.hi))
            fail(var.hi_span, ParseErrorKind::RangeViolation,
                 "universe upper bound " + format_double(var.hi) +
                     " must exceed lower bound " + format_double(var.lo));
        LinguisticVariable lv{std::string(var.name),
                              {var.lo, var.hi, std::string(var.name)},
                              {}};
        if (var.is_output) {
            sys.output = std::move(lv);
            ++output_count;
        } else {
            sys.inputs.push_back(std::move(lv));
        }
    }
    if (sys.inputs.empty())
        fail(doc.system_span, ParseErrorKind::Syntax,
             "system declares no input variables");
    if (output_count == 0)
        fail(doc.system_span, ParseErrorKind::Syntax,
             "system declares no output variable");

    for (const auto& set : doc.sets) {
        LinguisticVariable* var = nullptr;
        for (auto& v : sys.inputs)
            if (v.name == set.variable) var = &v;
        if (sys.output.name == set.variable) var = &sys.output;
        if (!var)
            fail(set.var_span, ParseErrorKind::UnresolvedReference,
                 "set declared for unknown variable '" + std::string(set.variable) + "'");
        if (var->find(set.label))
            fail(set.label_span, ParseErrorKind::DuplicateLabel,
                 "duplicate set label '" + std::string(set.label) + "' for variable '" +
                     std::string(set.variable) + "'");
        MembershipFunction mf = set.mf;
        switch (mf.kind) {
            case MfKind::Triangular:
                if (!(mf.p[0] <= mf.p[1] && mf.p[1] <= mf.p[2]))
                    fail(set.params_span, ParseErrorKind::RangeViolation,
                         "triangular parameters must satisfy a <= b <= c");
                for (int k = 0; k < 3; ++k) mf.p[k] = var->universe.clamp(mf.p[k]);
                break;
            case MfKind::Trapezoidal:
                if (!(mf.p[0] <= mf.p[1] && mf.p[1] <= mf.p[2] && mf.p[2] <= mf.p[3]))
                    fail(set.params_span, ParseErrorKind::RangeViolation,
                         "trapezoidal parameters must satisfy a <= b <= c <= d");
                for (int k = 0; k < 4; ++k) mf.p[k] = var->universe.clamp(mf.p[k]);
                break;
            case MfKind::Gaussian:
                if (!(mf.p[1] > 0.0))
                    fail(set.params_span, ParseErrorKind::RangeViolation,
                         "gaussian sigma must be positive");
                mf.p[0] = var->universe.clamp(mf.p[0]);
                break;
            case MfKind::CrispThreshold:
                mf.p[0] = var->universe.clamp(mf.p[0]);
                break;
        }
        var->sets.push_back({std::string(set.label), mf});
    }

    for (const auto& var : sys.inputs)
        if (var.sets.empty())
            fail(doc.system_span, ParseErrorKind::Syntax,
                 "input variable '" + var.name + "' declares no sets");
    if (sys.output.sets.empty())
        fail(doc.system_span, ParseErrorKind::Syntax,
             "output variable declares no sets");

    for (const auto& rule : doc.rules) {
        Rule r;
        r.connective = rule.connective;
        r.weight = rule.weight;
        for (const auto& clause : rule.clauses) {
            const auto* var = sys.find_input(clause.clause.variable);
            if (!var) {
                if (sys.output.name == clause.clause.variable)
                    fail(clause.var_span, ParseErrorKind::UnresolvedReference,
                         "antecedent references the output variable '" +
                             clause.clause.variable + "'");
                fail(clause.var_span, ParseErrorKind::UnresolvedReference,
                     "rule references unknown variable '" + clause.clause.variable + "'");
            }
            if (!var->find(clause.clause.label))
                fail(clause.label_span, ParseErrorKind::UnresolvedReference,
                     "variable '" + clause.clause.variable + "' has no set '" +
                         clause.clause.label + "'");
            r.antecedent.push_back(clause.clause);
        }
        if (rule.cons_variable != sys.output.name)
            fail(rule.cons_var_span, ParseErrorKind::UnresolvedReference,
                 "rule consequent must name the output variable '" + sys.output.name +
                     "', got '" + std::string(rule.cons_variable) + "'");
        if (!sys.output.find(rule.cons_label))
            fail(rule.cons_label_span, ParseErrorKind::UnresolvedReference,
                 "output variable has no set '" + std::string(rule.cons_label) + "'");
        r.consequent_variable = std::string(rule.cons_variable);
        r.consequent_label = std::string(rule.cons_label);
        if (!(r.weight >= 0.0 && r.weight <= 1.0))
            fail(rule.weight_span, ParseErrorKind::RangeViolation,
                 "rule weight must lie in [0, 1], got " + format_double(r.weight));
        sys.rules.push_back(std::move(r));
    }
    if (sys.rules.empty())
        fail(doc.system_span, ParseErrorKind::Syntax, "system declares no rules");

    try {
        sys.validate();
    } catch (const ConfigError& e) {
        fail(doc.system_span, ParseErrorKind::Syntax, e.what());
    }
    return sys;
}

}  // namespace

FuzzySystem parse_rulebase(std::string_view text) {
    return build_system(parse_syntax(text));
}

std::string serialize_rulebase(const FuzzySystem& system) {
    std::string out;
    out += "system " + system.name + "\n";
    for (const auto& var : system.inputs)
        out += "input " + var.name + " " + format_double(var.universe.lo) + " " +
               format_double(var.universe.hi) + "\n";
    out += "output " + system.output.name + " " + format_double(system.output.universe.lo) +
           " " + format_double(system.output.universe.hi) + "\n";

    auto emit_sets = [&out](const LinguisticVariable& var) {
        for (const auto& set : var.sets) {
            out += "set " + var.name + " " + set.label;
            switch (set.mf.kind) {
                case MfKind::Triangular: out += " triangular"; break;
                case MfKind::Trapezoidal: out += " trapezoidal"; break;
                case MfKind::Gaussian: out += " gaussian"; break;
                case MfKind::CrispThreshold: out += " crisp_threshold"; break;
            }
            for (int i = 0; i < set.mf.parameter_count(); ++i)
                out += " " + format_double(set.mf.p[i]);
            out += "\n";
        }
    };
    for (const auto& var : system.inputs) emit_sets(var);
    emit_sets(system.output);

    for (const auto& rule : system.rules) {
        out += "rule if";
        const char* sep = "";
        for (const auto& clause : rule.antecedent) {
            out += sep;
            out += " " + clause.variable + " is ";
            if (clause.negated) out += "not ";
            out += clause.label;
            sep = rule.connective == Connective::And ? " and" : " or";
        }
        out += " then " + rule.consequent_variable + " is " + rule.consequent_label;
        if (rule.weight != 1.0) out += " weight " + format_double(rule.weight);
        out += "\n";
    }

    out += "norms t_norm=min s_norm=max complement=one_minus implication=min "
           "aggregation=max defuzzifier=centroid resolution=" +
           std::to_string(system.norms.resolution) + "\n";
    return out;
}

}  // namespace gnf
