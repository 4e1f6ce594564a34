#include <filesystem>
#include <random>

#include "doctest.h"
#include "gnf/ioutil.hpp"
#include "gnf/rulebase.hpp"
#include "oracles.hpp"

using namespace gnf;

namespace {

ParseError parse_error_of(std::string_view text) {
    try {
        parse_rulebase(text);
    } catch (const ParseFailure& e) {
        return e.detail;
    }
    FAIL("expected a ParseFailure");
    return {};
}

}  // namespace

TEST_SUITE("rulebase") {

TEST_CASE("shipped tipper corpus matches the builtin system") {
    const auto path = std::filesystem::path(GNF_DATA_DIR) / "tipper.gnf";
    const std::string text = read_file(path);
    const FuzzySystem parsed = parse_rulebase(text);
    CHECK(parsed == builtin_tipper());

    // canonical corpus: serialize(parse(text)) == text byte-for-byte
    CHECK(serialize_rulebase(parsed) == text);
}

TEST_CASE("serialize(builtin_tipper) has exactly 3 rule lines") {
    const std::string text = serialize_rulebase(builtin_tipper());
    std::size_t count = 0, pos = 0;
    while ((pos = text.find("rule if", pos)) != std::string::npos) {
        ++count;
        pos += 7;
    }
    CHECK(count == 3);
}

TEST_CASE("comments, blank lines and spacing are cosmetic") {
    const std::string canonical = serialize_rulebase(builtin_tipper());
    std::string noisy = "# tipper, annotated\n\n";
    for (char c : canonical) {
        noisy += c;
        if (c == ' ') noisy += "  \t";  // extra whitespace between tokens
    }
    noisy += "\n# trailing comment\n";
    CHECK(parse_rulebase(noisy) == builtin_tipper());
}

TEST_CASE("parse errors carry kind, line and column") {
    SUBCASE("empty input") {
        const auto e = parse_error_of("");
        CHECK(e.kind == ParseErrorKind::Syntax);
        CHECK(e.span.line == 1);
        CHECK(e.span.column == 1);
    }
    SUBCASE("missing system header") {
        const auto e = parse_error_of("input x 0 1\n");
        CHECK(e.kind == ParseErrorKind::Syntax);
        CHECK(e.span.line == 1);
    }
    SUBCASE("unknown keyword names the token") {
        const auto e = parse_error_of("system t\ninputt x 0 1\n");
        CHECK(e.kind == ParseErrorKind::UnknownKeyword);
        CHECK(e.span.line == 2);
        CHECK(e.message.find("inputt") != std::string::npos);
    }
    SUBCASE("bad number") {
        const auto e = parse_error_of("system t\ninput x 0 1..5\n");
        CHECK(e.kind == ParseErrorKind::BadNumber);
        CHECK(e.message.find("1..5") != std::string::npos);
    }
    SUBCASE("non-finite numbers are rejected") {
        const auto e = parse_error_of("system t\ninput x 0 inf\n");
        CHECK(e.kind == ParseErrorKind::BadNumber);
    }
    SUBCASE("duplicate set label") {
        const auto e = parse_error_of(
            "system t\ninput x 0 1\noutput y 0 1\n"
            "set x a triangular 0 0.5 1\nset x a gaussian 0.5 1\n");
        CHECK(e.kind == ParseErrorKind::DuplicateLabel);
        CHECK(e.span.line == 5);
    }
    SUBCASE("unresolved set label in a rule") {
        const auto e = parse_error_of(
            "system t\ninput x 0 1\noutput y 0 1\n"
            "set x a triangular 0 0.5 1\nset y b triangular 0 0.5 1\n"
            "rule if x is missing then y is b\n");
        CHECK(e.kind == ParseErrorKind::UnresolvedReference);
        CHECK(e.span.line == 6);
        CHECK(e.message.find("missing") != std::string::npos);
    }
    SUBCASE("universe range violation") {
        const auto e = parse_error_of("system t\ninput x 5 5\n");
        CHECK(e.kind == ParseErrorKind::RangeViolation);
    }
    SUBCASE("weight out of range") {
        const auto e = parse_error_of(
            "system t\ninput x 0 1\noutput y 0 1\n"
            "set x a triangular 0 0.5 1\nset y b triangular 0 0.5 1\n"
            "rule if x is a then y is b weight 1.5\n");
        CHECK(e.kind == ParseErrorKind::RangeViolation);
    }
    SUBCASE("mixed connectives") {
        const auto e = parse_error_of(
            "system t\ninput x 0 1\ninput z 0 1\noutput y 0 1\n"
            "set x a triangular 0 0.5 1\nset z c triangular 0 0.5 1\n"
            "set y b triangular 0 0.5 1\n"
            "rule if x is a and z is c or x is a then y is b\n");
        CHECK(e.kind == ParseErrorKind::Syntax);
        CHECK(e.span.line == 8);
    }
    SUBCASE("reserved word as a name") {
        const auto e = parse_error_of("system then\n");
        CHECK(e.kind == ParseErrorKind::Syntax);
    }
    SUBCASE("gaussian sigma must be positive") {
        const auto e = parse_error_of(
            "system t\ninput x 0 1\noutput y 0 1\nset x a gaussian 0.5 0\n");
        CHECK(e.kind == ParseErrorKind::RangeViolation);
    }
}

TEST_CASE("negation and weights round-trip through the text form") {
    const std::string text =
        "system t\n"
        "input x 0 1\n"
        "output y 0 1\n"
        "set x a triangular 0 0.5 1\n"
        "set y b triangular 0 0.5 1\n"
        "rule if x is not a then y is b weight 0.25\n";
    const FuzzySystem sys = parse_rulebase(text);
    CHECK(sys.rules[0].antecedent[0].negated);
    CHECK(sys.rules[0].weight == 0.25);
    CHECK(parse_rulebase(serialize_rulebase(sys)) == sys);
}

TEST_CASE("membership parameters clamp into the declared universe") {
    const std::string text =
        "system t\n"
        "input x 0 10\n"
        "output y 0 10\n"
        "set x a gaussian -3 1.5\n"
        "set y b triangular 0 5 10\n"
        "rule if x is a then y is b\n";
    const FuzzySystem sys = parse_rulebase(text);
    CHECK(sys.inputs[0].sets[0].mf.p[0] == 0.0);  // center pulled up to lo
}

TEST_CASE("round-trip laws on generated systems") {
    std::mt19937_64 rng(1234);
    for (int i = 0; i < 50; ++i) {
        const FuzzySystem sys = oracles::random_system(rng);
        const std::string text = serialize_rulebase(sys);
        const FuzzySystem reparsed = parse_rulebase(text);
        CHECK(reparsed == sys);
        // canonicalization: a second pass is byte-identical
        CHECK(serialize_rulebase(reparsed) == text);
    }
}

TEST_CASE("parser survives arbitrary byte input") {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> len(0, 160);
    std::uniform_int_distribution<int> byte(0, 255);
    std::uniform_int_distribution<int> mode(0, 2);
    const std::string canonical = serialize_rulebase(builtin_tipper());

    int parsed_ok = 0;
    for (int i = 0; i < 20000; ++i) {
        std::string input;
        switch (mode(rng)) {
            case 0: {  // raw bytes
                const int n = len(rng);
                for (int k = 0; k < n; ++k)
                    input += static_cast<char>(byte(rng));
                break;
            }
            case 1: {  // mutated canonical text
                input = canonical;
                const int flips = 1 + len(rng) / 20;
                for (int f = 0; f < flips; ++f)
                    input[byte(rng) % input.size()] = static_cast<char>(byte(rng));
                break;
            }
            default: {  // token soup from the grammar's vocabulary
                static const char* words[] = {"system", "input", "output", "set",
                                              "rule", "if", "then", "is", "not",
                                              "and", "or", "weight", "norms",
                                              "triangular", "gaussian", "x", "0", "1"};
                const int n = len(rng) / 8;
                for (int k = 0; k < n; ++k) {
                    input += words[byte(rng) % 18];
                    input += (byte(rng) % 5 == 0) ? '\n' : ' ';
                }
                break;
            }
        }
        try {
            parse_rulebase(input);
            ++parsed_ok;
        } catch (const ParseFailure&) {
            // expected for almost every input
        }
    }
    // mutated canonical texts occasionally stay valid; raw bytes never crash
    CHECK(parsed_ok >= 0);
}

}  // TEST_SUITE
