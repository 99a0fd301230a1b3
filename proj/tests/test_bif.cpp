#include "doctest.h"

#include <random>

#include "bnc/bif.hpp"
#include "bnc/fixtures.hpp"
#include "support.hpp"

using namespace bnc;

namespace {

const char* kMinimalBif = R"(
network example {
}
variable Y {
  type discrete [ 2 ] { y0, y1 };
}
variable X {
  type discrete [ 2 ] { x0, x1 };
}
probability ( Y ) {
  table 0.6, 0.4;
}
probability ( X | Y ) {
  (y0) 0.9, 0.1;
  (y1) 0.2, 0.8;
}
)";

} // namespace

TEST_CASE("a minimal two-variable document parses to the expected CPTs") {
    BifParseResult result = parse_bif(kMinimalBif);
    REQUIRE(result.ok());
    const BayesNet& net = *result.net;
    REQUIRE(net.num_vars() == 2);
    CHECK(net.variable(0).name == "Y");
    CHECK(net.variable(1).name == "X");
    CHECK(net.cpt(0).values() == std::vector<double>{0.6, 0.4});
    // canonical layout over {Y, X}: (y0,x0),(y0,x1),(y1,x0),(y1,x1)
    CHECK(net.cpt(1).values() == std::vector<double>{0.9, 0.1, 0.2, 0.8});
}

TEST_CASE("a CPT row within 1e-6 of one parses with a normalization warning") {
    std::string text = kMinimalBif;
    size_t pos = text.find("0.6, 0.4");
    text.replace(pos, 8, "0.6, 0.3999995");
    BifParseResult result = parse_bif(text);
    REQUIRE(result.ok());
    bool warned = false;
    for (const auto& d : result.diagnostics)
        if (d.severity == Severity::Warning) warned = true;
    CHECK(warned);
    CHECK(result.net->cpt(0).sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("a probability block for an undeclared variable is an error") {
    std::string text = kMinimalBif;
    text += "probability ( Z ) { table 0.5, 0.5; }\n";
    BifParseResult result = parse_bif(text);
    CHECK_FALSE(result.ok());
    CHECK_FALSE(result.errors().empty());
}

TEST_CASE("duplicate variables and duplicate CPTs are errors") {
    std::string dup_var = std::string(kMinimalBif) +
                          "variable Y {\n  type discrete [ 2 ] { a, b };\n}\n";
    CHECK_FALSE(parse_bif(dup_var).ok());

    std::string dup_cpt = std::string(kMinimalBif) + "probability ( Y ) { table 0.5, 0.5; }\n";
    CHECK_FALSE(parse_bif(dup_cpt).ok());
}

TEST_CASE("value-count mismatches are errors") {
    std::string text = kMinimalBif;
    size_t pos = text.find("table 0.6, 0.4");
    text.replace(pos, 14, "table 0.6");
    CHECK_FALSE(parse_bif(text).ok());
}

TEST_CASE("non-discrete variables are rejected") {
    std::string text = R"(
variable Y {
  type continuous;
}
)";
    CHECK_FALSE(parse_bif(text).ok());
}

TEST_CASE("flat tables under parents enumerate the child fastest") {
    const char* text = R"(
variable A { type discrete [ 2 ] { a0, a1 }; }
variable B { type discrete [ 2 ] { b0, b1 }; }
probability ( A ) { table 0.5, 0.5; }
probability ( B | A ) { table 0.1, 0.9, 0.3, 0.7; }
)";
    BifParseResult result = parse_bif(text);
    REQUIRE(result.ok());
    Instantiation i;
    i.set(0, 0);
    i.set(1, 0);
    CHECK(result.net->cpt(1).at(i) == 0.1); // P(b0|a0)
    i.set(0, 1);
    CHECK(result.net->cpt(1).at(i) == 0.3); // P(b0|a1)
}

TEST_CASE("comments are stripped") {
    std::string text = std::string("// leading comment\n/* block\ncomment */") + kMinimalBif;
    CHECK(parse_bif(text).ok());
}

TEST_CASE("round-trip on the two-variable net is exact") {
    BayesNet net = testsupport::two_var_net();
    BifParseResult back = parse_bif(serialize_bif(net));
    REQUIRE(back.ok());
    REQUIRE(back.net->num_vars() == net.num_vars());
    for (size_t v = 0; v < net.num_vars(); ++v) {
        CHECK(back.net->variable(static_cast<VarId>(v)).name ==
              net.variable(static_cast<VarId>(v)).name);
        CHECK(back.net->cpt(static_cast<VarId>(v)).values() ==
              net.cpt(static_cast<VarId>(v)).values());
    }
}

TEST_CASE("round-trip on generated nets is exact") {
    for (uint64_t seed : {3ULL, 4ULL, 5ULL}) {
        BayesNet net = fixtures::random_dag(seed, 7, 3);
        BifParseResult back = parse_bif(serialize_bif(net));
        REQUIRE(back.ok());
        REQUIRE(back.net->num_vars() == net.num_vars());
        for (size_t v = 0; v < net.num_vars(); ++v) {
            VarId id = static_cast<VarId>(v);
            CHECK(back.net->variable(id).states == net.variable(id).states);
            CHECK(back.net->parents(id) == net.parents(id));
            CHECK(back.net->cpt(id).scope() == net.cpt(id).scope());
            CHECK(back.net->cpt(id).values() == net.cpt(id).values());
        }
    }
}

TEST_CASE("an empty net serializes to a parseable header-only document") {
    BayesNet net;
    net.finalize();
    BifParseResult back = parse_bif(serialize_bif(net));
    REQUIRE(back.ok());
    CHECK(back.net->num_vars() == 0);
}

TEST_CASE("properties survive a parse/serialize pair as opaque strings") {
    std::string text = R"(
network demo {
  property author unknown ;
}
variable Y {
  type discrete [ 2 ] { y0, y1 };
  property position (10, 20) ;
}
probability ( Y ) { table 0.5, 0.5; }
)";
    BifParseResult result = parse_bif(text);
    REQUIRE(result.ok());
    REQUIRE(result.properties.count(""));
    CHECK(result.properties.at("").front() == "author unknown");
    REQUIRE(result.properties.count("Y"));

    std::string again = serialize_bif(*result.net, result.network_name, result.properties);
    BifParseResult second = parse_bif(again);
    REQUIRE(second.ok());
    CHECK(second.properties == result.properties);
}

TEST_CASE("fuzz: arbitrary byte input yields diagnostics, never a crash") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 10000; ++trial) {
        size_t len = rng() % 160;
        std::string text;
        text.reserve(len);
        for (size_t i = 0; i < len; ++i) {
            // mix raw bytes with format keywords to reach deeper parser states
            if (rng() % 8 == 0) {
                static const char* words[] = {"network",  "variable", "probability",
                                              "type",     "discrete", "table",
                                              "property", "{",        "}",
                                              "(",        ")",        ";",
                                              "|",        ",",        "0.5"};
                text += words[rng() % 15];
                text += ' ';
            } else {
                text += static_cast<char>(rng() % 256);
            }
        }
        BifParseResult result = parse_bif(text);
        if (!result.ok()) CHECK_FALSE(result.errors().empty());
    }
}

TEST_CASE("mutated real documents never crash the parser") {
    std::string base = serialize_bif(fixtures::figure1_net(11));
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 2000; ++trial) {
        std::string text = base;
        int edits = 1 + static_cast<int>(rng() % 4);
        for (int e = 0; e < edits; ++e) {
            size_t pos = rng() % text.size();
            switch (rng() % 3) {
            case 0:
                text[pos] = static_cast<char>(rng() % 256);
                break;
            case 1:
                text.erase(pos, rng() % 10);
                break;
            default:
                text.insert(pos, 1, static_cast<char>(rng() % 256));
                break;
            }
        }
        parse_bif(text); // must not throw or crash
    }
}
