#include "formfind/constraints.hpp"

#include <string>

#include "formfind/errors.hpp"
#include "formfind/geometry.hpp"

namespace formfind {

ConstraintSystem build_constraints(const Model& model, const Eigen::VectorXd& x) {
    return build_constraints(model, Layout(model), x);
}

ConstraintSystem build_constraints(const Model& model, const Layout& layout,
                                   const Eigen::VectorXd& x) {
    const auto bindings = layout.bindings(ElementRole::constrained);
    const std::vector<Vec3> positions = layout.positions(model, x);
    const int n = layout.dofs().size();
    const int r = static_cast<int>(bindings.size());

    ConstraintSystem sys;
    sys.jacobian = Eigen::MatrixXd::Zero(r, n);
    sys.residual = Eigen::VectorXd::Zero(r);
    sys.element_ids.reserve(bindings.size());
    for (int k = 0; k < r; ++k) {
        const ElementBinding& binding = bindings[static_cast<std::size_t>(k)];
        const Element& e = model.elements[binding.element];
        const Vec3& p = positions[binding.slots[0]];
        const Vec3& q = positions[binding.slots[1]];
        LocalGradient local;
        try {
            local = local_grad_length(p, q);
        } catch (const DegenerateElementError& err) {
            throw DegenerateElementError("element " + std::to_string(e.id) + ": " + err.what(), e.id);
        }
        for (int c = 0; c < 2; ++c) {
            if (binding.dofs[c] >= 0) {
                sys.jacobian.block<1, 3>(k, binding.dofs[c]) = local.col(c).transpose();
            }
        }
        sys.residual[k] = (p - q).norm() - *e.target;
        sys.element_ids.push_back(e.id);
    }
    return sys;
}

GramSolution solve_gram(const Eigen::MatrixXd& jacobian, const Eigen::VectorXd& b) {
    const Eigen::Index r = jacobian.rows();
    if (b.size() != r) throw DimensionError("right-hand side does not match the Jacobian rows");
    GramSolution out;
    out.y = Eigen::VectorXd::Zero(r);
    if (r == 0) return out;

    const Eigen::MatrixXd gram = jacobian * jacobian.transpose();
    const double max_diagonal = gram.diagonal().maxCoeff();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    const bool singular = ldlt.info() != Eigen::Success || !(max_diagonal > 0.0) ||
                          ldlt.vectorD().minCoeff() < 1e-12 * max_diagonal;
    if (!singular) {
        out.y = ldlt.solve(b);
        return out;
    }

    out.regularized = true;
    const double shift = 1e-10 * gram.trace() / static_cast<double>(r);
    if (!(shift > 0.0)) return out;  // J == 0: nothing can be solved, y stays zero
    Eigen::MatrixXd shifted = gram;
    shifted.diagonal().array() += shift;
    out.y = shifted.ldlt().solve(b);
    return out;
}

LeastNormSolution least_norm_solve(const Eigen::MatrixXd& jacobian, const Eigen::VectorXd& b) {
    if (jacobian.rows() > jacobian.cols()) {
        throw DimensionError("least-norm solve needs rows <= columns");
    }
    const GramSolution gram = solve_gram(jacobian, b);
    return {jacobian.transpose() * gram.y, gram.regularized};
}

DualEstimate dual_estimate(const Eigen::VectorXd& grad_w, const ConstraintSystem& system) {
    const Eigen::MatrixXd& jacobian = system.jacobian;
    if (grad_w.size() != jacobian.cols()) {
        throw DimensionError("gradient length does not match the Jacobian columns");
    }
    DualEstimate out;
    if (jacobian.rows() == 0) {
        out.lambda = Eigen::VectorXd();
        out.grad = grad_w;
        return out;
    }
    // lambda = -grad_w J^T (J J^T)^-1, stored transposed
    const GramSolution gram = solve_gram(jacobian, jacobian * grad_w);
    out.lambda = -gram.y;
    out.grad = grad_w + jacobian.transpose() * out.lambda;
    out.regularized = gram.regularized;
    return out;
}

Eigen::VectorXd projected_gradient(const Eigen::VectorXd& grad_w, const Eigen::MatrixXd& jacobian) {
    const Eigen::Index n = jacobian.cols();
    if (grad_w.size() != n) throw DimensionError("gradient length does not match the Jacobian columns");
    if (jacobian.rows() == 0) return grad_w;
    const Eigen::MatrixXd gram = jacobian * jacobian.transpose();
    const Eigen::MatrixXd pinv =
        jacobian.transpose() * gram.ldlt().solve(Eigen::MatrixXd::Identity(gram.rows(), gram.cols()));
    const Eigen::MatrixXd projector = Eigen::MatrixXd::Identity(n, n) - pinv * jacobian;
    return (grad_w.transpose() * projector).transpose();
}

Correction residual_correction(const Eigen::VectorXd& x, const ConstraintSystem& system, double relax) {
    if (x.size() != system.jacobian.cols()) {
        throw DimensionError("position vector does not match the Jacobian columns");
    }
    const LeastNormSolution step = least_norm_solve(system.jacobian, system.residual);
    Correction out;
    out.delta = -step.x;
    out.x = x + relax * out.delta;
    out.regularized = step.regularized;
    return out;
}

}  // namespace formfind
