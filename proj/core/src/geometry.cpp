#include "formfind/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "formfind/errors.hpp"

namespace formfind {

double SparseRow::value_at(int index) const noexcept {
    double sum = 0.0;
    for (const auto& [i, v] : entries) {
        if (i == index) sum += v;
    }
    return sum;
}

double SparseRow::dot(const Eigen::VectorXd& v) const {
    double sum = 0.0;
    for (const auto& [i, value] : entries) sum += value * v[i];
    return sum;
}

void SparseRow::add_to(Eigen::VectorXd& target, double scale) const {
    for (const auto& [i, value] : entries) target[i] += scale * value;
}

Eigen::VectorXd SparseRow::dense(int size) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(size);
    add_to(out);
    return out;
}

double SparseRow::norm() const noexcept {
    double sum = 0.0;
    for (const auto& [i, v] : entries) sum += v * v;
    return std::sqrt(sum);
}

SparseRow to_sparse(const LocalGradient& local, int nodes, const ElementDofs& dofs) {
    SparseRow row;
    row.entries.reserve(static_cast<std::size_t>(nodes) * 3);
    for (int k = 0; k < nodes; ++k) {
        if (dofs[k] < 0) continue;
        for (int a = 0; a < 3; ++a) row.entries.emplace_back(dofs[k] + a, local(a, k));
    }
    return row;
}

double small_det(const Eigen::Matrix3d& m, int dim) {
    switch (dim) {
        case 1: return m(0, 0);
        case 2: return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
        case 3: return m.col(0).dot(m.col(1).cross(m.col(2)));
        default: throw DimensionError("metric dimension must be 1, 2 or 3");
    }
}

Eigen::Matrix3d small_inverse(const Eigen::Matrix3d& m, int dim, double det) {
    Eigen::Matrix3d inv = Eigen::Matrix3d::Zero();
    switch (dim) {
        case 1:
            inv(0, 0) = 1.0 / m(0, 0);
            break;
        case 2:
            inv(0, 0) = m(1, 1) / det;
            inv(0, 1) = -m(0, 1) / det;
            inv(1, 0) = -m(1, 0) / det;
            inv(1, 1) = m(0, 0) / det;
            break;
        case 3: {
            const Vec3 c1 = m.col(0), c2 = m.col(1), c3 = m.col(2);
            inv.col(0) = c2.cross(c3) / det;
            inv.col(1) = c3.cross(c1) / det;
            inv.col(2) = c1.cross(c2) / det;
            break;
        }
        default:
            throw DimensionError("metric dimension must be 1, 2 or 3");
    }
    return inv;
}

ElementGeometry element_geometry(std::span<const Vec3> points, ElementKind kind) {
    const int dim = dimension(kind);
    if (static_cast<int>(points.size()) < dim + 1) {
        throw DimensionError("a " + std::string(to_string(kind)) + " needs " +
                             std::to_string(dim + 1) + " points");
    }
    ElementGeometry g;
    g.kind = kind;
    g.dim = dim;
    double scale = 0.0;
    for (int i = 0; i < dim; ++i) {
        g.base[i] = points[i] - points[i + 1];
        scale = std::max(scale, g.base[i].norm());
    }
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) g.metric(i, j) = g.base[i].dot(g.base[j]);
    }
    g.det = small_det(g.metric, dim);
    if (!(scale > 0.0) || !(g.det > 1e-12 * std::pow(scale, 2 * dim))) {
        throw DegenerateElementError(
            "degenerate " + std::string(to_string(kind)) + " (det g = " + std::to_string(g.det) + ")",
            -1);
    }
    g.inverse_metric = small_inverse(g.metric, dim, g.det);
    static constexpr double factor[] = {0.0, 1.0, 0.5, 1.0 / 6.0};
    g.measure = factor[dim] * std::sqrt(g.det);
    return g;
}

LocalGradient local_grad_length(const Vec3& p, const Vec3& q) {
    const Vec3 d = p - q;
    const double length = d.norm();
    if (!(length > 1e-12)) throw DegenerateElementError("zero-length line", -1);
    LocalGradient out = LocalGradient::Zero();
    out.col(0) = d / length;
    out.col(1) = -d / length;
    return out;
}

LocalGradient local_grad_area(const Vec3& p, const Vec3& q, const Vec3& r) {
    const Vec3 normal = (q - p).cross(r - p);
    const double twice_area = normal.norm();
    if (!(twice_area > 1e-12)) throw DegenerateElementError("zero-area triangle", -1);
    const Vec3 n = normal / twice_area;
    // dS = 1/2 n . ((r - q) x dp + (p - r) x dq + (q - p) x dr)
    LocalGradient out = LocalGradient::Zero();
    out.col(0) = 0.5 * n.cross(r - q);
    out.col(1) = 0.5 * n.cross(p - r);
    out.col(2) = 0.5 * n.cross(q - p);
    return out;
}

namespace {

constexpr int upper_index(int i, int j) noexcept {
    if (i > j) std::swap(i, j);
    // (0,0) (0,1) (0,2) (1,1) (1,2) (2,2)
    constexpr int offset[] = {0, 2, 3};
    return offset[i] + j;
}

}  // namespace

const LocalGradient& MetricGradients::at(int i, int j) const noexcept {
    return upper[static_cast<std::size_t>(upper_index(i, j))];
}

MetricGradients local_grad_metric(const ElementGeometry& geometry) {
    MetricGradients out;
    out.dim = geometry.dim;
    for (auto& m : out.upper) m.setZero();
    for (int i = 0; i < geometry.dim; ++i) {
        for (int j = i; j < geometry.dim; ++j) {
            LocalGradient& d = out.upper[static_cast<std::size_t>(upper_index(i, j))];
            // g_i = p_i - p_{i+1}, so dg_ij = (dp_i - dp_{i+1}).g_j + (dp_j - dp_{j+1}).g_i
            d.col(i) += geometry.base[j];
            d.col(i + 1) -= geometry.base[j];
            d.col(j) += geometry.base[i];
            d.col(j + 1) -= geometry.base[i];
        }
    }
    return out;
}

SparseRow grad_length(const Vec3& p, const Vec3& q, const ElementDofs& dofs) {
    return to_sparse(local_grad_length(p, q), 2, dofs);
}

SparseRow grad_area(const Vec3& p, const Vec3& q, const Vec3& r, const ElementDofs& dofs) {
    return to_sparse(local_grad_area(p, q, r), 3, dofs);
}

MetricGradientRows grad_metric(std::span<const Vec3> points, ElementKind kind,
                               const ElementDofs& dofs) {
    const ElementGeometry geometry = element_geometry(points, kind);
    const MetricGradients local = local_grad_metric(geometry);
    const int dim = geometry.dim;
    MetricGradientRows rows(static_cast<std::size_t>(dim), std::vector<SparseRow>(static_cast<std::size_t>(dim)));
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) rows[i][j] = to_sparse(local.at(i, j), dim + 1, dofs);
    }
    return rows;
}

ElementDofs element_dofs(const Element& element, const DofMap& map) {
    ElementDofs dofs{-1, -1, -1, -1};
    for (std::size_t k = 0; k < element.node_ids.size() && k < 4; ++k) {
        dofs[k] = map.base(element.node_ids[k]);
    }
    return dofs;
}

}  // namespace formfind
