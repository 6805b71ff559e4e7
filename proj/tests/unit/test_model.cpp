#include <doctest.h>

#include "formfind/errors.hpp"
#include "formfind/model.hpp"
#include "oracles.hpp"

using namespace formfind;

namespace {

Model two_node_line() {
    Model m;
    m.nodes = {{1, {0, 0, 0}, true}, {2, {3, 4, 0}, false}};
    Element e;
    e.id = 1;
    e.kind = ElementKind::line;
    e.node_ids = {1, 2};
    e.role = ElementRole::functional;
    e.weight = 1.0;
    e.power = 2;
    m.elements.push_back(e);
    return m;
}

std::string validation_message(const Model& m) {
    try {
        validate(m);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("smallest valid model has three unknowns") {
    const Model m = two_node_line();
    CHECK_NOTHROW(validate(m));
    CHECK(DofMap(m).size() == 3);
}

TEST_CASE("dangling node reference is named") {
    Model m = two_node_line();
    m.elements[0].node_ids = {1, 99};
    CHECK(validation_message(m).find("unknown node 99") != std::string::npos);
}

TEST_CASE("validation rejects bad role fields and domains") {
    SUBCASE("power 3") {
        Model m = two_node_line();
        m.elements[0].power = 3;
        CHECK_FALSE(validation_message(m).empty());
    }
    SUBCASE("negative weight") {
        Model m = two_node_line();
        m.elements[0].weight = -1.0;
        CHECK_FALSE(validation_message(m).empty());
    }
    SUBCASE("field of another role") {
        Model m = two_node_line();
        m.elements[0].target = 2.0;
        CHECK(validation_message(m).find("element 1") != std::string::npos);
    }
    SUBCASE("repeated node in element") {
        Model m = two_node_line();
        m.elements[0].node_ids = {2, 2};
        CHECK_FALSE(validation_message(m).empty());
    }
    SUBCASE("duplicate node id") {
        Model m = two_node_line();
        m.nodes[1].id = 1;
        CHECK_FALSE(validation_message(m).empty());
    }
    SUBCASE("non-finite position") {
        Model m = two_node_line();
        m.nodes[1].position.x() = std::nan("");
        CHECK_FALSE(validation_message(m).empty());
    }
    SUBCASE("no free node") {
        Model m = two_node_line();
        m.nodes[1].fixed = true;
        CHECK_FALSE(validation_message(m).empty());
    }
    SUBCASE("load on fixed node") {
        Model m = two_node_line();
        m.loads.push_back({1, {0, 0, -1}});
        CHECK_FALSE(validation_message(m).empty());
    }
    SUBCASE("non-SPD rest metric") {
        Model m = two_node_line();
        Element& e = m.elements[0];
        e.role = ElementRole::elastic;
        e.weight.reset();
        e.power.reset();
        e.stiffness = 50.0;
        e.rest_metric = Eigen::MatrixXd::Constant(1, 1, -1.0);
        CHECK_FALSE(validation_message(m).empty());
        e.rest_metric = Eigen::MatrixXd::Constant(1, 1, 25.0);
        CHECK(validation_message(m).empty());
    }
    SUBCASE("too many constraints") {
        Model m = two_node_line();
        m.nodes.push_back({3, {0, 1, 0}, true});
        m.nodes.push_back({4, {1, 1, 0}, true});
        m.elements.clear();
        for (int k = 0; k < 3; ++k) {
            Element e;
            e.id = k + 1;
            e.kind = ElementKind::line;
            e.node_ids = {k == 0 ? 1 : k + 2, 2};
            e.role = ElementRole::constrained;
            e.target = 1.0;
            m.elements.push_back(e);
        }
        CHECK(validation_message(m).find("constrain") != std::string::npos);
    }
    SUBCASE("bad solver params") {
        Model m = two_node_line();
        m.solver.damping = 1.5;
        CHECK_THROWS_AS(validate(m), ValidationError);
        m.solver.damping = 1.0;
        m.solver.alpha = 0.0;
        CHECK_THROWS_AS(validate(m), ValidationError);
    }
}

TEST_CASE("dof ordering follows ascending node id then axis") {
    Model m = two_node_line();
    m.nodes = {{5, {0, 0, 0}, false}, {3, {1, 2, 3}, false}, {9, {0, 0, 0}, true}};
    m.elements[0].node_ids = {5, 3};
    const DofMap map(m);
    CHECK(map.size() == 6);
    CHECK(map.index(3, Axis::x) == 0);
    CHECK(map.index(3, Axis::z) == 2);
    CHECK(map.index(5, Axis::x) == 3);
    CHECK(map.base(9) == -1);
    for (int i = 0; i < map.size(); ++i) {
        const auto [id, axis] = map.entry(i);
        CHECK(map.index(id, axis) == i);
    }
}

TEST_CASE("single free node with id 7") {
    Model m = two_node_line();
    m.nodes[1].id = 7;
    m.elements[0].node_ids = {1, 7};
    const DofMap map(m);
    CHECK(map.index(7, Axis::x) == 0);
    CHECK(map.index(7, Axis::y) == 1);
    CHECK(map.index(7, Axis::z) == 2);
}

TEST_CASE("gather and scatter are inverse") {
    Model m = two_node_line();
    m.nodes[1].position = {1, 2, 3};
    const DofMap map(m);
    const Eigen::VectorXd x = gather_positions(m, map);
    CHECK(x == Eigen::Vector3d(1, 2, 3));
    CHECK(scatter_positions(m, map, x) == m);

    const Eigen::VectorXd y = Eigen::Vector3d(-4, 5, 0.25);
    CHECK(gather_positions(scatter_positions(m, map, y), map) == y);
    CHECK(scatter_positions(m, map, y).nodes[0] == m.nodes[0]);  // fixed node untouched
    CHECK_THROWS_AS(scatter_positions(m, map, Eigen::VectorXd::Zero(4)), DimensionError);
}

TEST_CASE("layout bindings are grouped by role and sorted by id") {
    Model m = two_node_line();
    m.nodes.push_back({3, {0, 5, 0}, false});
    Element c;
    c.id = 0;
    c.kind = ElementKind::line;
    c.node_ids = {2, 3};
    c.role = ElementRole::constrained;
    c.target = 2.0;
    Element f = m.elements[0];
    f.id = 7;
    f.node_ids = {1, 3};
    m.elements = {f, c, m.elements[0]};
    const Layout layout(m);
    const auto functional = layout.bindings(ElementRole::functional);
    REQUIRE(functional.size() == 2);
    CHECK(m.elements[functional[0].element].id == 1);
    CHECK(m.elements[functional[1].element].id == 7);
    CHECK(layout.bindings(ElementRole::constrained).size() == 1);
    CHECK(functional[0].dofs[0] == -1);
    CHECK(functional[0].dofs[1] == 0);
}
