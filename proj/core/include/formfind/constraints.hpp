#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "formfind/model.hpp"

namespace formfind {

/// Length constraints linearised at one configuration. Row k of the
/// Jacobian is the length gradient of the k-th constrained element in
/// ascending id order; residual_k = L_k - target_k.
struct ConstraintSystem {
    std::vector<int> element_ids;
    Eigen::MatrixXd jacobian;
    Eigen::VectorXd residual;
    std::optional<Eigen::VectorXd> multipliers;

    int rows() const noexcept { return static_cast<int>(jacobian.rows()); }
};

ConstraintSystem build_constraints(const Model& model, const Eigen::VectorXd& x);
ConstraintSystem build_constraints(const Model& model, const Layout& layout,
                                   const Eigen::VectorXd& x);

/// y with (J J^T) y = b. `regularized` is set when the Gram matrix was too
/// close to singular and a Tikhonov shift was added.
struct GramSolution {
    Eigen::VectorXd y;
    bool regularized = false;
};

GramSolution solve_gram(const Eigen::MatrixXd& jacobian, const Eigen::VectorXd& b);

struct LeastNormSolution {
    Eigen::VectorXd x;
    bool regularized = false;
};

/// J^+ b = J^T (J J^T)^-1 b, the minimum-norm solution of J x = b.
LeastNormSolution least_norm_solve(const Eigen::MatrixXd& jacobian, const Eigen::VectorXd& b);

/// Multipliers and constrained gradient. Row vectors are stored as
/// Eigen column vectors.
struct DualEstimate {
    Eigen::VectorXd lambda;
    Eigen::VectorXd grad;
    bool regularized = false;
};

/// lambda = -grad_w J^+, grad = grad_w + lambda J.
DualEstimate dual_estimate(const Eigen::VectorXd& grad_w, const ConstraintSystem& system);

/// grad_w (I - J^+ J) with J^+ formed explicitly. Independent route to the
/// constrained gradient, used for cross-checks and diagnostics.
Eigen::VectorXd projected_gradient(const Eigen::VectorXd& grad_w, const Eigen::MatrixXd& jacobian);

struct Correction {
    Eigen::VectorXd x;
    Eigen::VectorXd delta;  // -J^+ r, before relaxation
    bool regularized = false;
};

/// x' = x + relax * (-J^+ r).
Correction residual_correction(const Eigen::VectorXd& x, const ConstraintSystem& system, double relax);

}  // namespace formfind
