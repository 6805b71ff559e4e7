#pragma once

#include <vector>

#include <Eigen/Dense>

#include "formfind/geometry.hpp"
#include "formfind/model.hpp"

namespace formfind {

/// Stress on a simplex element in mixed form T^i_k and raised form
/// T^ij = T^i_k g^kj. Leading dim x dim blocks are meaningful.
struct StressTensor {
    int dim = 1;
    Eigen::Matrix3d mixed = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d raised = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d strain = Eigen::Matrix3d::Zero();
};

/// Linear law with zero Poisson ratio, T^i_k = E g^il (g_lk - rest_lk).
/// Throws DimensionError when `rest_metric` does not match the element.
StressTensor constitutive_linear(const ElementGeometry& geometry,
                                 const Eigen::MatrixXd& rest_metric, double stiffness);

/// T^i_k = delta^i_k. With it, element_omega() is the gradient of the measure.
StressTensor unit_stress(const ElementGeometry& geometry);

/// 1/2 * measure * T^a_c g^cb dg_ab over the element's nodes.
LocalGradient element_omega_local(const ElementGeometry& geometry, const StressTensor& stress,
                                  const MetricGradients& grads);

SparseRow element_omega(const ElementGeometry& geometry, const StressTensor& stress,
                        const MetricGradientRows& grads);

struct AssembledForce {
    Eigen::VectorXd omega;
    double grad_norm = 0.0;
};

/// Sum of elastic element rows minus the nodal load row, reduced in
/// ascending element id order.
AssembledForce assemble_omega(const Model& model, const Eigen::VectorXd& x);
AssembledForce assemble_omega(const Model& model, const Layout& layout, const Eigen::VectorXd& x);

/// Dense load row p (dead loads on free nodes).
Eigen::VectorXd load_vector(const Model& model, const DofMap& map);

struct ElementState {
    int element_id = 0;
    double measure = 0.0;
    Eigen::MatrixXd stress;  // T^ij for elastic elements, empty otherwise
};

/// Current measure of every element, plus T^ij for elastic ones.
std::vector<ElementState> element_states(const Model& model, const Layout& layout,
                                         const Eigen::VectorXd& x);

}  // namespace formfind
