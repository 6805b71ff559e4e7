#include <doctest.h>

#include "formfind/constraints.hpp"
#include "oracles.hpp"

using namespace formfind;
using namespace formfind::testing;

namespace {

Model strut(double target) {
    Model m;
    m.nodes = {{1, {0, 0, 0}, true}, {2, {3, 4, 0}, false}};
    Element e;
    e.id = 1;
    e.kind = ElementKind::line;
    e.node_ids = {1, 2};
    e.role = ElementRole::constrained;
    e.target = target;
    m.elements.push_back(e);
    return m;
}

ConstraintSystem system_of(const Eigen::MatrixXd& j, const Eigen::VectorXd& r) {
    ConstraintSystem s;
    s.jacobian = j;
    s.residual = r;
    for (Eigen::Index k = 0; k < j.rows(); ++k) s.element_ids.push_back(static_cast<int>(k) + 1);
    return s;
}

Eigen::MatrixXd row(std::initializer_list<double> values) {
    Eigen::MatrixXd m(1, static_cast<Eigen::Index>(values.size()));
    Eigen::Index k = 0;
    for (double v : values) m(0, k++) = v;
    return m;
}

}  // namespace

TEST_CASE("single length constraint") {
    const auto s = build_constraints(strut(5.0), Eigen::Vector3d(3, 4, 0));
    REQUIRE(s.rows() == 1);
    CHECK((s.jacobian.row(0).transpose() - Eigen::Vector3d(0.6, 0.8, 0)).norm() < 1e-15);
    CHECK(s.residual[0] == doctest::Approx(0.0));
    CHECK(build_constraints(strut(4.0), Eigen::Vector3d(3, 4, 0)).residual[0] == doctest::Approx(1.0));
}

TEST_CASE("disjoint constraints give block-sparse rows") {
    Model m;
    m.nodes = {{1, {0, 0, 0}, true}, {2, {1, 0, 0}, false}, {3, {0, 5, 0}, true}, {4, {0, 6, 1}, false}};
    for (int k = 0; k < 2; ++k) {
        Element e;
        e.id = k + 1;
        e.kind = ElementKind::line;
        e.node_ids = {2 * k + 1, 2 * k + 2};
        e.role = ElementRole::constrained;
        e.target = 1.0;
        m.elements.push_back(e);
    }
    const Layout layout(m);
    const auto s = build_constraints(m, layout, gather_positions(m, layout.dofs()));
    CHECK(s.jacobian.block(0, 3, 1, 3).norm() == 0.0);
    CHECK(s.jacobian.block(1, 0, 1, 3).norm() == 0.0);
    CHECK(s.element_ids == std::vector<int>{1, 2});
}

TEST_CASE("least-norm solve") {
    const auto a = least_norm_solve(row({1, 0}), Eigen::VectorXd::Constant(1, 0.4));
    CHECK((a.x - Eigen::Vector2d(0.4, 0)).norm() < 1e-15);
    CHECK_FALSE(a.regularized);

    Rng rng(4);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(rng.matrix(6, 6)).householderQ();
    const Eigen::MatrixXd j = q.topRows(3);
    const Eigen::VectorXd b = rng.vector(3);
    CHECK((least_norm_solve(j, b).x - j.transpose() * b).norm() < 1e-12);

    for (int t = 0; t < 50; ++t) {
        const Eigen::MatrixXd m = rng.matrix(3, 8);
        const Eigen::VectorXd c = rng.vector(3);
        CHECK(rel_err(least_norm_solve(m, c).x, pinv_svd(m) * c) < 1e-10);
    }
}

TEST_CASE("dual estimate examples") {
    const auto a = dual_estimate(Eigen::Vector2d(1, 1), system_of(row({1, 0}), Eigen::VectorXd::Zero(1)));
    CHECK(a.lambda[0] == doctest::Approx(-1.0));
    CHECK((a.grad - Eigen::Vector2d(0, 1)).norm() < 1e-15);

    const auto b = dual_estimate(Eigen::Vector2d(0, 2), system_of(row({1, 0}), Eigen::VectorXd::Zero(1)));
    CHECK(b.lambda[0] == 0.0);
    CHECK(b.grad == Eigen::Vector2d(0, 2));

    Rng rng(6);
    const Eigen::MatrixXd square = rng.matrix(4, 4) + 4 * Eigen::MatrixXd::Identity(4, 4);
    CHECK(dual_estimate(rng.vector(4), system_of(square, Eigen::VectorXd::Zero(4))).grad.norm() < 1e-12);
}

TEST_CASE("dual geometry on random systems") {
    Rng rng(77);
    for (int t = 0; t < 200; ++t) {
        const int n = 3 + static_cast<int>(rng.uniform(0, 20));
        const int r = 1 + static_cast<int>(rng.uniform(0, n - 1));
        const Eigen::MatrixXd j = rng.matrix(r, n);
        const Eigen::VectorXd gw = rng.vector(n);
        const auto system = system_of(j, rng.vector(r));
        const auto d = dual_estimate(gw, system);
        const double scale = j.norm() * gw.norm();
        CHECK((j * d.grad).norm() < 1e-10 * scale);
        CHECK((d.grad - projected_gradient(gw, j)).norm() < 1e-10 * gw.norm());
        CHECK((d.grad - (Eigen::MatrixXd::Identity(n, n) - pinv_svd(j) * j) * gw).norm() < 1e-10 * gw.norm());
        const auto c = residual_correction(Eigen::VectorXd::Zero(n), system, 0.5);
        CHECK(std::abs(c.delta.dot(d.grad)) < 1e-10 * c.delta.norm() * gw.norm());
    }
}

TEST_CASE("residual correction") {
    const auto c = residual_correction(Eigen::Vector2d(2, 3), system_of(row({1, 0}), Eigen::VectorXd::Constant(1, 0.4)), 0.5);
    CHECK((c.x - Eigen::Vector2d(1.8, 3)).norm() < 1e-15);
    const auto z = residual_correction(Eigen::Vector2d(2, 3), system_of(row({1, 0}), Eigen::VectorXd::Zero(1)), 0.5);
    CHECK(z.x == Eigen::Vector2d(2, 3));
}

TEST_CASE("repeated correction contracts the residual") {
    const Model m = strut(4.0);
    Eigen::VectorXd x = Eigen::Vector3d(3, 4, 0);
    double previous = std::abs(build_constraints(m, x).residual[0]);
    for (int k = 0; k < 40; ++k) {
        const auto s = build_constraints(m, x);
        x = residual_correction(x, s, 0.5).x;
        const double now = std::abs(build_constraints(m, x).residual[0]);
        CHECK(now / previous == doctest::Approx(0.5).epsilon(1e-6));
        previous = now;
        if (now < 1e-12) break;
    }
    CHECK(previous < 1e-11);
}

TEST_CASE("rank loss is regularized and flagged") {
    Eigen::MatrixXd j(2, 3);
    j << 1, 0, 0, 1, 0, 0;
    const auto s = solve_gram(j, Eigen::Vector2d(1, 1));
    CHECK(s.regularized);
    CHECK(s.y.allFinite());

    const auto zero = least_norm_solve(Eigen::MatrixXd::Zero(1, 3), Eigen::VectorXd::Constant(1, 1.0));
    CHECK(zero.regularized);
    CHECK(zero.x.allFinite());
    CHECK_FALSE(solve_gram(row({1, 2, 3}), Eigen::VectorXd::Constant(1, 1.0)).regularized);
}
