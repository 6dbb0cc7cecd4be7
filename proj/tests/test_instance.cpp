#include <doctest.h>

#include "naesat/errors.hpp"
#include "naesat/instance.hpp"

using namespace naesat;

namespace {
// (~x1 v ~x2 v x5) (x1 v ~x2 v x6) (x3 v x4 v x5) (~x3 v x4 v ~x6), 2-regular, 3 literals per clause
Instance figure_instance() {
    return Instance(6, 2, 3, {0, 3, 1, 4, 6, 9, 7, 10, 2, 8, 5, 11}, {1, 0, 1, 1, 0, 1, 0, 0, 0, 0, 0, 1});
}
}  // namespace

TEST_CASE("generate sizes and degrees") {
    auto a = generate(3, 2, 3, 7);
    CHECK(a.m() == 2);
    CHECK(a.edges() == 6);
    auto b = generate(4, 3, 4, 7);
    CHECK(b.m() == 3);
    CHECK(b.edges() == 12);
    for (auto* inst : {&a, &b}) {
        std::vector<int> per_clause(inst->m());
        for (int i = 0; i < inst->edges(); ++i) per_clause[inst->clause_of(i)]++;
        for (int c : per_clause) CHECK(c == inst->k());
    }
}

TEST_CASE("generate is a function of the seed") {
    CHECK(generate(12, 3, 4, 99) == generate(12, 3, 4, 99));
    CHECK_FALSE(generate(12, 3, 4, 99) == generate(12, 3, 4, 100));
    CHECK_THROWS_AS(generate(4, 2, 3, 1), ConfigError);
}

TEST_CASE("eval_nae on single clauses") {
    // one clause over three variables with d = 1
    Instance inst(3, 1, 3, {0, 1, 2}, {0, 0, 0});
    CHECK_FALSE(eval_nae(inst, {0, 0, 0}));
    CHECK(eval_nae(inst, {0, 1, 0}));
    CHECK_THROWS_AS(eval_nae(inst, {0, 1}), InputError);
}

TEST_CASE("figure formula") {
    auto inst = figure_instance();
    CHECK_FALSE(eval_nae(inst, {0, 0, 0, 0, 0, 0}));
    CHECK(eval_nae(inst, {1, 0, 1, 0, 0, 0}));
}

TEST_CASE("negation symmetry") {
    auto inst = generate(8, 3, 4, 5);
    for (uint32_t mask = 0; mask < 256; ++mask) {
        Assignment x(8), y(8);
        for (int v = 0; v < 8; ++v) {
            x[v] = (mask >> v) & 1;
            y[v] = x[v] ^ 1;
        }
        CHECK(eval_nae(inst, x) == eval_nae(inst, y));
    }
}

TEST_CASE("serialize round trip and malformed documents") {
    auto inst = generate(6, 2, 3, 11);
    CHECK(parse(serialize(inst)) == inst);
    CHECK(serialize(parse(serialize(inst))) == serialize(inst));
    CHECK_THROWS_AS(parse(R"({"n":3,"d":2,"k":3,"matching":[0,0,1,2,3,4],"literals":[0,0,0,0,0,0]})"), ParseError);
    CHECK_THROWS_AS(parse(R"({"n":2,"d":2,"k":3,"matching":[0,1,2,3],"literals":[0,0,0,0]})"), ParseError);
    CHECK_THROWS_AS(parse(R"({"n":3,"d":2})"), ParseError);
    CHECK_THROWS_AS(parse("not json"), ParseError);
}

TEST_CASE("dimacs export lists one line per clause") {
    auto text = to_dimacs(figure_instance());
    int lines = 0;
    for (char c : text) lines += c == '\n';
    CHECK(lines >= 4);
    CHECK(text.find("-1 -2 5") != std::string::npos);
}
