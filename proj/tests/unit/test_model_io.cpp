#include <doctest.h>

#include <filesystem>

#include "formfind/errors.hpp"
#include "formfind/model_io.hpp"
#include "formfind/scenarios.hpp"
#include "oracles.hpp"

using namespace formfind;

namespace {

constexpr const char* kSmallest = R"({
  "nodes": [
    {"id": 1, "pos": [0, 0, 0], "fixed": true},
    {"id": 2, "pos": [3, 4, 0]}
  ],
  "elements": [
    {"id": 1, "kind": "line", "nodes": [1, 2], "role": "functional", "weight": 1, "power": 2}
  ]
})";

}  // namespace

TEST_CASE("solver block defaults") {
    const Model m = parse_model(kSmallest);
    CHECK(m.nodes.size() == 2);
    CHECK(m.solver.alpha == 0.2);
    CHECK(m.solver.damping == 0.98);
    CHECK(m.solver.constraint_relax == 0.5);
    CHECK(m.solver.method == Method::three_term);
    CHECK(DofMap(m).size() == 3);
}

TEST_CASE("dangling reference in a document") {
    std::string text = kSmallest;
    text.replace(text.find("[1, 2]"), 6, "[1, 99]");
    try {
        parse_model(text);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("unknown node 99") != std::string::npos);
    }
}

TEST_CASE("syntax errors carry a position") {
    const std::string text = "{\n  \"nodes\": [\n    {\"id\": 1,, }\n  ]\n}";
    try {
        parse_model(text);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(e.column() > 0);
    }
}

TEST_CASE("schema errors") {
    CHECK_THROWS_AS(parse_model(R"({"nodes": [{"id": 1, "pos": [0, 0]}]})"), ValidationError);
    CHECK_THROWS_AS(parse_model(R"({"nodes": [], "colour": 3})"), ValidationError);
    CHECK_THROWS_AS(parse_model(R"({"nodes": [{"id": 1.5, "pos": [0, 0, 0]}]})"), ValidationError);
    CHECK_THROWS_AS(parse_model("[1, 2]"), ValidationError);
}

TEST_CASE("missing power defaults to 2") {
    std::string text = kSmallest;
    text.replace(text.find(", \"power\": 2"), 12, "");
    CHECK(parse_model(text).elements[0].power == 2);
}

TEST_CASE("rest metric defaults to the document geometry") {
    const Model m = parse_model(R"({
      "nodes": [{"id": 1, "pos": [0, 0, 0], "fixed": true}, {"id": 2, "pos": [3, 4, 0]}],
      "elements": [{"id": 1, "kind": "line", "nodes": [1, 2], "role": "elastic", "stiffness": 50}]
    })");
    REQUIRE(m.elements[0].rest_metric.has_value());
    CHECK(m.elements[0].rest_metric->rows() == 1);
    CHECK((*m.elements[0].rest_metric)(0, 0) == doctest::Approx(25.0).epsilon(1e-15));
}

TEST_CASE("round trip is exact for every scenario") {
    for (ScenarioKind kind : all_scenario_kinds()) {
        CAPTURE(to_string(kind));
        const Model m = generate({kind, {}}).model;
        const Model back = parse_model(serialize_model(m));
        CHECK(back == m);
        CHECK(serialize_model(back) == serialize_model(m));
    }
}

TEST_CASE("round trip keeps awkward doubles") {
    Model m = parse_model(kSmallest);
    m.nodes[1].position = {0.1 + 0.2, 1.0 / 3.0, -1e-300};
    m.solver.alpha = 0.07;
    CHECK(parse_model(serialize_model(m)) == m);
}

TEST_CASE("file io") {
    const auto path = std::filesystem::temp_directory_path() / "formfind_test_model_io.json";
    const Model m = generate({ScenarioKind::simplex_tensegrity, {}}).model;
    save_model(m, path);
    CHECK(load_model(path) == m);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_model(path), Error);
}
