#pragma once

#include <array>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "formfind/model.hpp"

namespace formfind {

/// First unknown index of each element node, -1 for fixed nodes.
using ElementDofs = std::array<int, 4>;

/// Derivative of a scalar element quantity with respect to the Cartesian
/// coordinates of the element nodes; column k belongs to node k.
using LocalGradient = Eigen::Matrix<double, 3, 4>;

/// Row vector over the unknowns, supported on one element's free DOFs.
struct SparseRow {
    std::vector<std::pair<int, double>> entries;

    double value_at(int index) const noexcept;
    double dot(const Eigen::VectorXd& v) const;
    void add_to(Eigen::VectorXd& target, double scale = 1.0) const;
    Eigen::VectorXd dense(int size) const;
    double norm() const noexcept;
};

SparseRow to_sparse(const LocalGradient& local, int nodes, const ElementDofs& dofs);

/// Per-element geometry on a simplex with constant metric. Only the
/// leading dim x dim blocks of `metric` / `inverse_metric` are meaningful.
struct ElementGeometry {
    ElementKind kind = ElementKind::line;
    int dim = 1;
    std::array<Vec3, 3> base{Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
    Eigen::Matrix3d metric = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d inverse_metric = Eigen::Matrix3d::Zero();
    double det = 0.0;
    double measure = 0.0;

    Eigen::MatrixXd metric_block() const { return metric.topLeftCorner(dim, dim); }
    Eigen::MatrixXd inverse_block() const { return inverse_metric.topLeftCorner(dim, dim); }
};

/// Base vectors g_i = p_i - p_{i+1}, metric g_ij = g_i . g_j, its explicit
/// inverse and the measure (length, area or volume). Throws
/// DegenerateElementError when det <= 1e-12 * scale^(2N).
ElementGeometry element_geometry(std::span<const Vec3> points, ElementKind kind);

/// Inverse of a 1x1, 2x2 or 3x3 symmetric matrix stored in the leading
/// block, using the closed-form adjugate / cross-product formulas.
Eigen::Matrix3d small_inverse(const Eigen::Matrix3d& m, int dim, double det);
double small_det(const Eigen::Matrix3d& m, int dim);

LocalGradient local_grad_length(const Vec3& p, const Vec3& q);
LocalGradient local_grad_area(const Vec3& p, const Vec3& q, const Vec3& r);

/// d g_ij / d(node coordinates) for i <= j, stored row-major in the upper
/// triangle; at(i, j) is symmetric.
struct MetricGradients {
    int dim = 1;
    std::array<LocalGradient, 6> upper{};

    const LocalGradient& at(int i, int j) const noexcept;
};

MetricGradients local_grad_metric(const ElementGeometry& geometry);

SparseRow grad_length(const Vec3& p, const Vec3& q, const ElementDofs& dofs);
SparseRow grad_area(const Vec3& p, const Vec3& q, const Vec3& r, const ElementDofs& dofs);

/// dim x dim array of rows; result[i][j] == result[j][i].
using MetricGradientRows = std::vector<std::vector<SparseRow>>;
MetricGradientRows grad_metric(std::span<const Vec3> points, ElementKind kind,
                               const ElementDofs& dofs);

/// DOF bases for the nodes of `element`; -1 entries for fixed nodes.
ElementDofs element_dofs(const Element& element, const DofMap& map);

}  // namespace formfind
