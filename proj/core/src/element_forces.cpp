#include "formfind/element_forces.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "formfind/errors.hpp"

namespace formfind {

namespace {

double max_abs(const Eigen::Matrix3d& m, int dim) {
    return m.topLeftCorner(dim, dim).cwiseAbs().maxCoeff();
}

}  // namespace

StressTensor constitutive_linear(const ElementGeometry& geometry,
                                 const Eigen::MatrixXd& rest_metric, double stiffness) {
    const int dim = geometry.dim;
    if (rest_metric.rows() != dim || rest_metric.cols() != dim) {
        throw DimensionError("rest metric is " + std::to_string(rest_metric.rows()) + "x" +
                             std::to_string(rest_metric.cols()) + ", element needs " +
                             std::to_string(dim) + "x" + std::to_string(dim));
    }
    StressTensor t;
    t.dim = dim;
    t.strain.topLeftCorner(dim, dim) = geometry.metric.topLeftCorner(dim, dim) - rest_metric;
    t.mixed = stiffness * geometry.inverse_metric * t.strain;
    t.raised = t.mixed * geometry.inverse_metric;

    const double scale = std::abs(stiffness) * std::pow(max_abs(geometry.inverse_metric, dim), 2) *
                         max_abs(t.strain, dim);
    const double asymmetry = (t.raised - t.raised.transpose()).cwiseAbs().maxCoeff();
    if (asymmetry > 1e-12 * scale) {
        throw Error("constitutive law produced an asymmetric T^ij (" + std::to_string(asymmetry) + ")");
    }
    t.raised = 0.5 * (t.raised + t.raised.transpose()).eval();
    return t;
}

StressTensor unit_stress(const ElementGeometry& geometry) {
    StressTensor t;
    t.dim = geometry.dim;
    t.mixed.topLeftCorner(t.dim, t.dim).setIdentity();
    t.raised = geometry.inverse_metric;
    return t;
}

LocalGradient element_omega_local(const ElementGeometry& geometry, const StressTensor& stress,
                                  const MetricGradients& grads) {
    const int dim = geometry.dim;
    LocalGradient out = LocalGradient::Zero();
    const double half_measure = 0.5 * geometry.measure;
    for (int a = 0; a < dim; ++a) {
        for (int b = 0; b < dim; ++b) {
            out += (half_measure * stress.raised(a, b)) * grads.at(a, b);
        }
    }
    return out;
}

SparseRow element_omega(const ElementGeometry& geometry, const StressTensor& stress,
                        const MetricGradientRows& grads) {
    const int dim = geometry.dim;
    if (static_cast<int>(grads.size()) != dim) {
        throw DimensionError("metric gradient rows do not match the element dimension");
    }
    std::map<int, double> merged;
    const double half_measure = 0.5 * geometry.measure;
    for (int a = 0; a < dim; ++a) {
        for (int b = 0; b < dim; ++b) {
            const double c = half_measure * stress.raised(a, b);
            for (const auto& [i, v] : grads[a][b].entries) merged[i] += c * v;
        }
    }
    SparseRow row;
    row.entries.assign(merged.begin(), merged.end());
    return row;
}

Eigen::VectorXd load_vector(const Model& model, const DofMap& map) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(map.size());
    for (const auto& load : model.loads) {
        const int b = map.base(load.node_id);
        if (b >= 0) p.segment<3>(b) += load.force;
    }
    return p;
}

AssembledForce assemble_omega(const Model& model, const Eigen::VectorXd& x) {
    return assemble_omega(model, Layout(model), x);
}

AssembledForce assemble_omega(const Model& model, const Layout& layout, const Eigen::VectorXd& x) {
    const std::vector<Vec3> positions = layout.positions(model, x);
    AssembledForce out;
    out.omega = Eigen::VectorXd::Zero(layout.dofs().size());
    for (const ElementBinding& binding : layout.bindings(ElementRole::elastic)) {
        const Element& e = model.elements[binding.element];
        const auto corners = layout.corners(binding, positions);
        ElementGeometry geometry;
        try {
            geometry = element_geometry(std::span<const Vec3>(corners.data(), binding.count), e.kind);
        } catch (const DegenerateElementError& err) {
            throw DegenerateElementError("element " + std::to_string(e.id) + ": " + err.what(), e.id);
        }
        const StressTensor stress = constitutive_linear(geometry, *e.rest_metric, *e.stiffness);
        const LocalGradient local = element_omega_local(geometry, stress, local_grad_metric(geometry));
        for (int k = 0; k < binding.count; ++k) {
            if (binding.dofs[k] >= 0) out.omega.segment<3>(binding.dofs[k]) += local.col(k);
        }
    }
    out.omega -= load_vector(model, layout.dofs());
    out.grad_norm = out.omega.norm();
    return out;
}

std::vector<ElementState> element_states(const Model& model, const Layout& layout,
                                         const Eigen::VectorXd& x) {
    const std::vector<Vec3> positions = layout.positions(model, x);
    std::vector<ElementState> out;
    out.reserve(model.elements.size());
    for (ElementRole role : {ElementRole::functional, ElementRole::elastic, ElementRole::constrained}) {
        for (const ElementBinding& binding : layout.bindings(role)) {
            const Element& e = model.elements[binding.element];
            const auto corners = layout.corners(binding, positions);
            ElementState state;
            state.element_id = e.id;
            try {
                const ElementGeometry geometry =
                    element_geometry(std::span<const Vec3>(corners.data(), binding.count), e.kind);
                state.measure = geometry.measure;
                if (role == ElementRole::elastic) {
                    const StressTensor t = constitutive_linear(geometry, *e.rest_metric, *e.stiffness);
                    state.stress = t.raised.topLeftCorner(geometry.dim, geometry.dim);
                }
            } catch (const DegenerateElementError&) {
                state.measure = 0.0;
            }
            out.push_back(std::move(state));
        }
    }
    std::sort(out.begin(), out.end(),
              [](const ElementState& a, const ElementState& b) { return a.element_id < b.element_id; });
    return out;
}

}  // namespace formfind
