#include <doctest.h>

#include "coalg/error.hpp"
#include "coalg/gen.hpp"
#include "coalg/io.hpp"

using namespace coalg;

TEST_CASE("coalgebra documents round-trip bit for bit") {
    gen::Rng rng(21);
    for (const auto& [name, t] : gen::system_functors()) {
        for (int i = 0; i < 6; ++i) {
            Coalgebra c = gen::random_coalgebra(t, 1 + rng() % 4, rng, 1 + rng() % 4);
            std::string text = io::write_coalgebra(c);
            Coalgebra back = io::read_coalgebra(text);
            CHECK_MESSAGE(back == c, name);
            CHECK(io::write_coalgebra(back) == text);
            std::string pretty = io::write_coalgebra(c, true);
            CHECK(io::read_coalgebra(pretty) == c);
            CHECK(io::write_coalgebra(io::read_coalgebra(pretty), true) == pretty);
        }
    }
}

TEST_CASE("literal forms") {
    const char* doc = R"J({"functor":"C{0,1} * Id^{a,b}","carrier":["s","t"],
      "structure":{"s":{"pair":[{"c":"1"},{"fun":{"a":{"id":"t"},"b":{"id":"s"}}}]},
                   "t":{"pair":[{"c":"0"},{"fun":{"b":{"id":"t"},"a":{"id":"t"}}}]}}})J";
    Coalgebra c = io::read_coalgebra(doc);
    CHECK(c.at("s").second().items()[0] == TValue::state("t"));
    CHECK(io::write_coalgebra(c) ==
          R"J({"functor":"C{0,1} * Id^{a,b}","carrier":["s","t"],"structure":{"s":{"pair":[{"c":"1"},{"fun":{"a":{"id":"t"},"b":{"id":"s"}}}]},"t":{"pair":[{"c":"0"},{"fun":{"a":{"id":"t"},"b":{"id":"t"}}}]}}})J"
          "\n");
    const char* dist = R"J({"functor":"D(Id)","carrier":["x","y"],
      "structure":{"x":{"dist":[[{"id":"y"},"1/2"],[{"id":"x"},"2/4"]]},"y":{"dist":[[{"id":"y"},"1"]]}}})J";
    Coalgebra d = io::read_coalgebra(dist);
    CHECK(d.at("x").weights()[0] == Rational(1, 2));
    CHECK(io::write_coalgebra(d).find("\"1/2\"") != std::string::npos);
    const char* nb = R"J({"functor":"N(Id)","carrier":["x"],"structure":{"x":{"nbhd":[[],[{"id":"x"}]]}}})J";
    CHECK(io::read_coalgebra(nb).at("x").items().size() == 2);
}

TEST_CASE("malformed documents report line and column") {
    try {
        io::read_coalgebra("{\"functor\": \"P(Id)\",\n  \"carrier\": [\"s\" \"t\"]}");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(e.column() == 21);  // last character of the unexpected token
    }
    try {
        io::read_coalgebra("{\"functor\":\"P(Id)\",\"carrier\":[\"s\"],\n\"structure\":{\n  \"s\":{\"set\":[{\"id\":\"q\"}]}}}");
        FAIL("expected a shape error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(std::string(e.what()).find("s/set[0]") != std::string::npos);
    }
    CHECK_THROWS_AS(io::read_coalgebra(R"J({"functor":"P(Id","carrier":[],"structure":{}})J"), ParseError);
    CHECK_THROWS_AS(io::read_coalgebra(R"J({"functor":"P(Id)","carrier":["s"],"structure":{}})J"), ParseError);
    CHECK_THROWS_AS(io::read_coalgebra(R"J({"functor":"D(Id)","carrier":["s"],"structure":{"s":{"dist":[[{"id":"s"},"1/3"]]}}})J"),
                    ParseError);
}

TEST_CASE("BA documents") {
    const char* doc = R"J({"generators":["g","h"],"relations":[["g & h","g"],["~~g","g | bot"]]})J";
    Presentation p = io::read_presentation(doc);
    CHECK(p.generators.size() == 2);
    CHECK(p.relations.size() == 2);
    std::string text = io::write_presentation(p);
    CHECK(io::write_presentation(io::read_presentation(text)) == text);
    CHECK(realize(p).algebra.num_atoms() == 3);
    try {
        io::read_presentation("{\"generators\":[\"g\"],\n \"relations\":[[\"g & \",\"g\"]]}");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(io::read_presentation(R"J({"generators":["g"],"relations":[["k","g"]]})J"), ParseError);
}
