#include <doctest.h>

#include "formfind/errors.hpp"
#include "formfind/geometry.hpp"
#include "formfind/model_io.hpp"
#include "formfind/scenarios.hpp"
#include "oracles.hpp"

using namespace formfind;
using namespace formfind::testing;

namespace {

double total_measure(const Model& m, ElementKind kind) {
    double sum = 0;
    for (const Element& e : m.elements) {
        if (e.kind != kind) continue;
        std::vector<Vec3> pts;
        for (int id : e.node_ids) pts.push_back(m.find_node(id)->position);
        sum += measure_of(pts);
    }
    return sum;
}

}  // namespace

TEST_CASE("every scenario validates with its defaults") {
    for (ScenarioKind kind : all_scenario_kinds()) {
        CAPTURE(to_string(kind));
        const GeneratedScenario g = generate({kind, {}});
        CHECK_NOTHROW(validate(g.model));
        CHECK(g.metadata.at("nodes") == static_cast<double>(g.model.nodes.size()));
        CHECK(parse_scenario_kind(to_string(kind)) == kind);
    }
    CHECK_FALSE(parse_scenario_kind("dome").has_value());
}

TEST_CASE("cable net") {
    const GeneratedScenario g = generate({ScenarioKind::cable_net, {}});
    CHECK(g.metadata.at("members") == 220);
    CHECK(g.metadata.at("fixed_nodes") == 5);
    CHECK(g.model.count(ElementRole::functional) == 220);
    for (const Element& e : g.model.elements) CHECK(e.power == 2);

    const GeneratedScenario heavy = generate({ScenarioKind::cable_net, {{"boundary_multiplier", 4}}});
    int boundary = 0;
    for (const Element& e : heavy.model.elements) boundary += *e.weight == 4.0 ? 1 : 0;
    CHECK(boundary == 10);
}

TEST_CASE("simplex tensegrity") {
    const GeneratedScenario g = generate({ScenarioKind::simplex_tensegrity, {}});
    CHECK(g.model.nodes.size() == 6);
    CHECK(g.model.count(ElementRole::constrained) == 3);
    CHECK(g.model.count(ElementRole::functional) == 9);
    for (const Element& e : g.model.elements) {
        if (e.role == ElementRole::constrained) {
            CHECK(e.target == 10.0);
        } else {
            CHECK(e.power == 4);
            CHECK(e.weight == 1.0);
        }
    }
    CHECK(generate({ScenarioKind::ring_tensegrity, {{"struts", 5}}}).model.count(ElementRole::constrained) == 5);
}

TEST_CASE("handkerchief") {
    const GeneratedScenario g = generate({ScenarioKind::handkerchief, {}});
    CHECK(g.model.count(ElementRole::elastic) == 128);
    CHECK(total_measure(g.model, ElementKind::triangle) == doctest::Approx(64.0).epsilon(1e-12));
    for (const Load& l : g.model.loads) CHECK(l.force == Vec3(0, 0, -0.1));
    CHECK(g.model.loads.size() == 79);
    for (const Element& e : g.model.elements) CHECK(e.stiffness == 50.0);
}

TEST_CASE("box meshes fill their volume") {
    const GeneratedScenario c = generate({ScenarioKind::cantilever, {}});
    CHECK(c.model.count(ElementRole::elastic) == 288);
    CHECK(total_measure(c.model, ElementKind::tetrahedron) == doctest::Approx(48.0).epsilon(1e-12));

    const GeneratedScenario b = generate({ScenarioKind::buckling_bar, {{"noise", 0}}});
    CHECK(total_measure(b.model, ElementKind::tetrahedron) == doctest::Approx(48.0).epsilon(1e-12));
    CHECK(b.metadata.at("top_nodes") == 9);
    CHECK(b.model.loads.size() == 9);
    for (const Load& l : b.model.loads) CHECK(b.model.find_node(l.node_id)->position.z() == 12.0);
}

TEST_CASE("generation is deterministic") {
    for (ScenarioKind kind : all_scenario_kinds()) {
        CHECK(serialize_model(generate({kind, {}}).model) == serialize_model(generate({kind, {}}).model));
    }
    CHECK(generate({ScenarioKind::buckling_bar, {{"seed", 2}}}).model !=
          generate({ScenarioKind::buckling_bar, {{"seed", 3}}}).model);
}

TEST_CASE("parameter errors") {
    CHECK_THROWS_AS(generate({ScenarioKind::cable_net, {{"colour", 1}}}), ValidationError);
    CHECK_THROWS_AS(generate({ScenarioKind::cable_net, {{"spokes", 7}}}), ValidationError);
    CHECK_THROWS_AS(generate({ScenarioKind::cable_net, {{"rings", 2.5}}}), ValidationError);
    CHECK_THROWS_AS(generate({ScenarioKind::simplex_tensegrity, {{"power", 3}}}), ValidationError);
    CHECK_THROWS_AS(generate({ScenarioKind::handkerchief, {{"stiffness", -1}}}), ValidationError);
    CHECK_THROWS_AS(generate({ScenarioKind::cable_membrane_mixed, {{"anchor_radius", 2}}}), ValidationError);
}
