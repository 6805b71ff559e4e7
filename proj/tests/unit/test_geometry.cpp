#include <doctest.h>

#include <vector>

#include "formfind/errors.hpp"
#include "formfind/geometry.hpp"
#include "oracles.hpp"

using namespace formfind;
using namespace formfind::testing;

namespace {

ElementGeometry geometry_of(const std::vector<Vec3>& pts, ElementKind kind) {
    return element_geometry(std::span<const Vec3>(pts.data(), pts.size()), kind);
}

Eigen::VectorXd columns(const LocalGradient& g, int nodes) {
    Eigen::VectorXd out(3 * nodes);
    for (int k = 0; k < nodes; ++k) out.segment<3>(3 * k) = g.col(k);
    return out;
}

constexpr ElementKind kKinds[] = {ElementKind::line, ElementKind::triangle, ElementKind::tetrahedron};

}  // namespace

TEST_CASE("3-4-5 line") {
    const auto g = geometry_of({{0, 0, 0}, {3, 4, 0}}, ElementKind::line);
    CHECK(g.metric(0, 0) == 25.0);
    CHECK(g.inverse_metric(0, 0) == doctest::Approx(0.04).epsilon(1e-15));
    CHECK(g.measure == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("unit right triangle") {
    const auto g = geometry_of({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, ElementKind::triangle);
    CHECK(g.base[0] == Vec3(-1, 0, 0));
    CHECK(g.base[1] == Vec3(1, -1, 0));
    Eigen::Matrix2d expected;
    expected << 1, -1, -1, 2;
    CHECK(g.metric_block().isApprox(expected));
    CHECK(g.det == doctest::Approx(1.0));
    CHECK(g.measure == doctest::Approx(0.5));
    CHECK(g.measure == doctest::Approx(area_of({0, 0, 0}, {1, 0, 0}, {0, 1, 0})));
}

TEST_CASE("corner tetrahedron") {
    const std::vector<Vec3> pts{{1, 0, 0}, {0, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    const auto g = geometry_of(pts, ElementKind::tetrahedron);
    CHECK(g.base[0] == Vec3(1, 0, 0));
    CHECK(g.base[1] == Vec3(0, -1, 0));
    CHECK(g.base[2] == Vec3(0, 1, -1));
    CHECK(g.det == doctest::Approx(1.0));
    CHECK(g.measure == doctest::Approx(1.0 / 6.0));
    CHECK(g.measure == doctest::Approx(volume_of(pts[0], pts[1], pts[2], pts[3])));
}

TEST_CASE("length gradient examples") {
    const ElementDofs both{0, 3, -1, -1};
    const SparseRow row = grad_length({0, 0, 0}, {3, 4, 0}, both);
    Eigen::VectorXd expected(6);
    expected << -0.6, -0.8, 0, 0.6, 0.8, 0;
    CHECK((row.dense(6) - expected).norm() < 1e-15);

    const SparseRow only_q = grad_length({0, 0, 0}, {1, 0, 0}, {-1, 0, -1, -1});
    CHECK(only_q.dense(3) == Eigen::Vector3d(1, 0, 0));
}

TEST_CASE("area gradient example and normal invariance") {
    const SparseRow row = grad_area({0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 3, 6, -1});
    Eigen::VectorXd expected(9);
    expected << -0.5, -0.5, 0, 0.5, 0, 0, 0, 0.5, 0;
    CHECK((row.dense(9) - expected).norm() < 1e-15);

    Rng rng(7);
    for (int t = 0; t < 100; ++t) {
        const auto pts = random_simplex(rng, ElementKind::triangle);
        const Vec3 n = (pts[1] - pts[0]).cross(pts[2] - pts[0]).normalized();
        const LocalGradient g = local_grad_area(pts[0], pts[1], pts[2]);
        for (int k = 0; k < 3; ++k) CHECK(std::abs(g.col(k).dot(n)) < 1e-12);
    }
}

TEST_CASE("measures match independent formulas") {
    Rng rng(11);
    for (ElementKind kind : kKinds) {
        for (int t = 0; t < 300; ++t) {
            const auto pts = random_simplex(rng, kind);
            const auto g = geometry_of(pts, kind);
            CHECK(g.measure == doctest::Approx(measure_of(pts)).epsilon(1e-11));
        }
    }
}

TEST_CASE("explicit inverse times metric is the identity") {
    Rng rng(12);
    for (ElementKind kind : kKinds) {
        for (int t = 0; t < 300; ++t) {
            const auto g = geometry_of(random_simplex(rng, kind), kind);
            const Eigen::MatrixXd product = g.inverse_block() * g.metric_block();
            CHECK((product - Eigen::MatrixXd::Identity(g.dim, g.dim)).norm() < 1e-9);
            CHECK(g.det == doctest::Approx(g.metric_block().determinant()).epsilon(1e-10));
        }
    }
}

TEST_CASE("kernel gradients match finite differences on 1000 elements per kind") {
    Rng rng(2024);
    double worst_length = 0, worst_area = 0, worst_metric = 0;
    for (ElementKind kind : kKinds) {
        const int n = node_count(kind);
        for (int t = 0; t < 1000; ++t) {
            const auto pts = random_simplex(rng, kind);
            const Eigen::VectorXd x = pack(pts);
            if (kind == ElementKind::line) {
                const auto fd = fd_gradient([](const Eigen::VectorXd& v) { return length_of(v.segment<3>(0), v.segment<3>(3)); }, x);
                worst_length = std::max(worst_length, rel_err(columns(local_grad_length(pts[0], pts[1]), 2), fd));
            }
            if (kind == ElementKind::triangle) {
                const auto fd = fd_gradient(
                    [](const Eigen::VectorXd& v) { return area_of(v.segment<3>(0), v.segment<3>(3), v.segment<3>(6)); }, x);
                worst_area = std::max(worst_area, rel_err(columns(local_grad_area(pts[0], pts[1], pts[2]), 3), fd));
            }
            const auto g = geometry_of(pts, kind);
            const MetricGradients grads = local_grad_metric(g);
            for (int i = 0; i < g.dim; ++i) {
                for (int j = 0; j < g.dim; ++j) {
                    const auto fd = fd_gradient([i, j](const Eigen::VectorXd& v) { return metric_entry(unpack(v), i, j); }, x);
                    worst_metric = std::max(worst_metric, rel_err(columns(grads.at(i, j), n), fd));
                }
            }
        }
    }
    MESSAGE("worst length " << worst_length << ", area " << worst_area << ", metric " << worst_metric);
    CHECK(worst_length < 1e-6);
    CHECK(worst_area < 1e-6);
    CHECK(worst_metric < 1e-6);
}

TEST_CASE("sparse rows follow the dof map") {
    const std::vector<Vec3> pts{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    const ElementDofs dofs{-1, 6, 0, -1};
    const auto rows = grad_metric(std::span<const Vec3>(pts.data(), 4), ElementKind::tetrahedron, dofs);
    REQUIRE(rows.size() == 3);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            CHECK(rows[i][j].dense(9) == rows[j][i].dense(9));
            for (const auto& [index, value] : rows[i][j].entries) {
                CHECK(((index >= 0 && index < 3) || (index >= 6 && index < 9)));
                (void)value;
            }
        }
    }
}

TEST_CASE("metric is translation invariant") {
    Rng rng(3);
    for (ElementKind kind : kKinds) {
        const auto pts = random_simplex(rng, kind);
        auto moved = pts;
        const Vec3 shift = rng.point(50.0);
        for (Vec3& p : moved) p += shift;
        const auto a = geometry_of(pts, kind);
        const auto b = geometry_of(moved, kind);
        CHECK((a.metric - b.metric).norm() < 1e-10);
        CHECK(a.measure == doctest::Approx(b.measure));
    }
}

TEST_CASE("degenerate elements are rejected") {
    CHECK_THROWS_AS(geometry_of({{1, 1, 1}, {1, 1, 1}}, ElementKind::line), DegenerateElementError);
    CHECK_THROWS_AS(geometry_of({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}, ElementKind::triangle), DegenerateElementError);
    CHECK_THROWS_AS(geometry_of({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}}, ElementKind::tetrahedron),
                    DegenerateElementError);
}
