#include "formfind/functionals.hpp"

#include <cmath>
#include <string>

#include "formfind/errors.hpp"
#include "formfind/geometry.hpp"

namespace formfind {

FunctionalValue eval_pi(const Model& model, const Eigen::VectorXd& x) {
    return eval_pi(model, Layout(model), x);
}

FunctionalValue eval_pi(const Model& model, const Layout& layout, const Eigen::VectorXd& x) {
    const std::vector<Vec3> positions = layout.positions(model, x);
    FunctionalValue out;
    out.grad = Eigen::VectorXd::Zero(layout.dofs().size());
    for (const ElementBinding& binding : layout.bindings(ElementRole::functional)) {
        const Element& e = model.elements[binding.element];
        const double w = *e.weight;
        const auto c = layout.corners(binding, positions);
        LocalGradient local;
        try {
            if (e.kind == ElementKind::line) {
                const int p = *e.power;
                const double length = (c[0] - c[1]).norm();
                out.pi += w * std::pow(length, p);
                local = (p * w * std::pow(length, p - 1)) * local_grad_length(c[0], c[1]);
            } else {
                const double area = 0.5 * (c[1] - c[0]).cross(c[2] - c[0]).norm();
                out.pi += w * area * area;
                local = (2.0 * w * area) * local_grad_area(c[0], c[1], c[2]);
            }
        } catch (const DegenerateElementError& err) {
            throw DegenerateElementError("element " + std::to_string(e.id) + ": " + err.what(), e.id);
        }
        for (int k = 0; k < binding.count; ++k) {
            if (binding.dofs[k] >= 0) out.grad.segment<3>(binding.dofs[k]) += local.col(k);
        }
    }
    out.grad_norm = out.grad.norm();
    return out;
}

Model update_weight(const Model& model, int element_id, double weight) {
    Model out = model;
    Element* e = out.find_element(element_id);
    if (e == nullptr) throw ValidationError("unknown element " + std::to_string(element_id));
    if (e->role != ElementRole::functional) {
        throw ValidationError("element " + std::to_string(element_id) + " is not functional");
    }
    if (!(weight >= 0.0) || !std::isfinite(weight)) {
        throw ValidationError("element " + std::to_string(element_id) + ": weight must be >= 0");
    }
    e->weight = weight;
    return out;
}

}  // namespace formfind
