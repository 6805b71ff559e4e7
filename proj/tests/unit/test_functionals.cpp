#include <doctest.h>

#include "formfind/errors.hpp"
#include "formfind/functionals.hpp"
#include "formfind/scenarios.hpp"
#include "oracles.hpp"

using namespace formfind;
using namespace formfind::testing;

namespace {

Model cable(int power) {
    Model m;
    m.nodes = {{1, {0, 0, 0}, true}, {2, {3, 4, 0}, false}};
    Element e;
    e.id = 1;
    e.kind = ElementKind::line;
    e.node_ids = {1, 2};
    e.role = ElementRole::functional;
    e.weight = 1.0;
    e.power = power;
    m.elements.push_back(e);
    return m;
}

}  // namespace

TEST_CASE("single cable, power 2") {
    const Model m = cable(2);
    const auto v = eval_pi(m, Eigen::Vector3d(3, 4, 0));
    CHECK(v.pi == doctest::Approx(25.0));
    CHECK((v.grad - Eigen::Vector3d(6, 8, 0)).norm() < 1e-13);
    const auto fd = fd_gradient([&](const Eigen::VectorXd& x) { return eval_pi(m, x).pi; }, Eigen::Vector3d(3, 4, 0));
    CHECK(rel_err(v.grad, fd) < 1e-9);
}

TEST_CASE("single cable, power 4") {
    const Model m = cable(4);
    const auto v = eval_pi(m, Eigen::Vector3d(3, 4, 0));
    CHECK(v.pi == doctest::Approx(625.0));
    CHECK((v.grad - Eigen::Vector3d(300, 400, 0)).norm() < 1e-10);
    CHECK(v.grad_norm == doctest::Approx(500.0));
}

TEST_CASE("zero weights contribute nothing") {
    Model m = update_weight(cable(2), 1, 0.0);
    const auto v = eval_pi(m, Eigen::Vector3d(3, 4, 0));
    CHECK(v.pi == 0.0);
    CHECK(v.grad.norm() == 0.0);
}

TEST_CASE("update_weight domain") {
    const Model m = cable(2);
    CHECK(update_weight(m, 1, 4.0).elements[0].weight == 4.0);
    CHECK(m.elements[0].weight == 1.0);
    CHECK_THROWS_AS(update_weight(m, 1, -1.0), ValidationError);
    CHECK_THROWS_AS(update_weight(m, 2, 1.0), ValidationError);
}

TEST_CASE("area functional") {
    Model m;
    m.nodes = {{1, {0, 0, 0}, true}, {2, {1, 0, 0}, true}, {3, {0, 1, 0}, false}};
    Element e;
    e.id = 1;
    e.kind = ElementKind::triangle;
    e.node_ids = {1, 2, 3};
    e.role = ElementRole::functional;
    e.weight = 2.0;
    m.elements.push_back(e);
    const auto v = eval_pi(m, Eigen::Vector3d(0, 1, 0));
    CHECK(v.pi == doctest::Approx(2.0 * 0.25));
    // d(2 S^2)/dr = 4 S dS/dr with dS/dr = (0, 0.5, 0)
    CHECK((v.grad - Eigen::Vector3d(0, 1, 0)).norm() < 1e-13);
}

TEST_CASE("scenario gradients match finite differences") {
    for (ScenarioKind kind : {ScenarioKind::cable_net, ScenarioKind::simplex_tensegrity, ScenarioKind::cable_membrane_mixed}) {
        CAPTURE(to_string(kind));
        const Model m = generate({kind, {}}).model;
        const Layout layout(m);
        Rng rng(static_cast<std::uint64_t>(kind) + 1);
        const Eigen::VectorXd x = gather_positions(m, layout.dofs()) + rng.vector(layout.dofs().size(), 0.3);
        const auto v = eval_pi(m, layout, x);
        const auto fd = fd_gradient([&](const Eigen::VectorXd& y) { return eval_pi(m, layout, y).pi; }, x);
        CHECK(rel_err(v.grad, fd) < 1e-6);
    }
}

TEST_CASE("uniform scaling") {
    // Pi is homogeneous in x when all nodes are free: power p lines scale by s^p.
    Model m = cable(4);
    m.nodes[0].fixed = false;
    const Eigen::VectorXd x = (Eigen::VectorXd(6) << 0.5, -1, 2, 3, 4, 0).finished();
    const double s = 1.7;
    CHECK(eval_pi(m, s * x).pi == doctest::Approx(std::pow(s, 4) * eval_pi(m, x).pi).epsilon(1e-12));
    CHECK((eval_pi(m, s * x).grad - std::pow(s, 3) * eval_pi(m, x).grad).norm() <
          1e-10 * eval_pi(m, s * x).grad.norm());
}
