#pragma once

#include <Eigen/Dense>

#include "formfind/model.hpp"

namespace formfind {

struct FunctionalValue {
    double pi = 0.0;
    Eigen::VectorXd grad;
    double grad_norm = 0.0;
};

/// Pi = sum w L^p over functional lines + sum w S^2 over functional
/// triangles, and its gradient over the unknowns.
FunctionalValue eval_pi(const Model& model, const Eigen::VectorXd& x);
FunctionalValue eval_pi(const Model& model, const Layout& layout, const Eigen::VectorXd& x);

/// Copy of `model` with the weight of functional element `element_id` set to `weight`.
Model update_weight(const Model& model, int element_id, double weight);

}  // namespace formfind
