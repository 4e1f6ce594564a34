#pragma once

#include <string>
#include <string_view>

#include "gnf/errors.hpp"
#include "gnf/fuzzy.hpp"

namespace gnf {

// Line-oriented text format for fuzzy systems (".gnf" files).
//
//   system <name>
//   input <name> <lo> <hi>
//   output <name> <lo> <hi>
//   set <variable> <label> <kind> <params...>
//   rule if <var> is [not] <label> (and|or <var> is [not] <label>)*
//        then <var> is <label> [weight <w>]
//   norms t_norm=min s_norm=max complement=one_minus implication=min
//         aggregation=max defuzzifier=centroid resolution=<n>
//
// '#' starts a comment to end of line; blank lines are ignored. A rule
// mixes only one connective. Canonical form: sections in the order
// above, one declaration per line, LF endings, shortest round-trippable
// decimals, weight omitted when 1. The full grammar lives in
// docs/rulebase-format.md.

struct SourceSpan {
    int line = 1;    // 1-based
    int column = 1;  // 1-based, in bytes
};

enum class ParseErrorKind {
    Syntax,
    UnknownKeyword,
    BadNumber,
    DuplicateLabel,
    UnresolvedReference,
    RangeViolation,
};

struct ParseError {
    SourceSpan span;
    ParseErrorKind kind = ParseErrorKind::Syntax;
    std::string message;  // names the offending token
};

std::string_view to_string(ParseErrorKind kind);

class ParseFailure : public Error {
public:
    explicit ParseFailure(ParseError error);
    ParseError detail;
};

// Parses UTF-8 text into a validated FuzzySystem. Never crashes on
// arbitrary byte input; the first error encountered is thrown as a
// ParseFailure carrying line/column. Semantic checks (references,
// ranges) run after the syntactic pass. Membership-function position
// parameters are clamped into the declared universe.
FuzzySystem parse_rulebase(std::string_view text);

// Canonical text form. parse(serialize(s)) is structurally equal to s,
// and serialize(parse(t)) == t byte-for-byte for canonical t.
std::string serialize_rulebase(const FuzzySystem& system);

}  // namespace gnf
