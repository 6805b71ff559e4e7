#include "formfind/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "formfind/errors.hpp"

namespace formfind {

std::string_view to_string(ElementKind kind) noexcept {
    switch (kind) {
        case ElementKind::line: return "line";
        case ElementKind::triangle: return "triangle";
        case ElementKind::tetrahedron: return "tetrahedron";
    }
    return "?";
}

std::string_view to_string(ElementRole role) noexcept {
    switch (role) {
        case ElementRole::functional: return "functional";
        case ElementRole::elastic: return "elastic";
        case ElementRole::constrained: return "constrained";
    }
    return "?";
}

std::string_view to_string(Method method) noexcept {
    return method == Method::two_term ? "two_term" : "three_term";
}

std::optional<ElementKind> parse_kind(std::string_view text) noexcept {
    if (text == "line") return ElementKind::line;
    if (text == "triangle") return ElementKind::triangle;
    if (text == "tetrahedron") return ElementKind::tetrahedron;
    return std::nullopt;
}

std::optional<ElementRole> parse_role(std::string_view text) noexcept {
    if (text == "functional") return ElementRole::functional;
    if (text == "elastic") return ElementRole::elastic;
    if (text == "constrained") return ElementRole::constrained;
    return std::nullopt;
}

std::optional<Method> parse_method(std::string_view text) noexcept {
    if (text == "two_term") return Method::two_term;
    if (text == "three_term") return Method::three_term;
    return std::nullopt;
}

bool operator==(const Element& a, const Element& b) {
    if (a.id != b.id || a.kind != b.kind || a.node_ids != b.node_ids || a.role != b.role ||
        a.weight != b.weight || a.power != b.power || a.stiffness != b.stiffness ||
        a.target != b.target || a.rest_metric.has_value() != b.rest_metric.has_value()) {
        return false;
    }
    if (!a.rest_metric) return true;
    const auto& ma = *a.rest_metric;
    const auto& mb = *b.rest_metric;
    return ma.rows() == mb.rows() && ma.cols() == mb.cols() && ma == mb;
}

const Node* Model::find_node(int id) const noexcept {
    auto it = std::find_if(nodes.begin(), nodes.end(), [id](const Node& n) { return n.id == id; });
    return it == nodes.end() ? nullptr : &*it;
}

Node* Model::find_node(int id) noexcept {
    return const_cast<Node*>(std::as_const(*this).find_node(id));
}

const Element* Model::find_element(int id) const noexcept {
    auto it = std::find_if(elements.begin(), elements.end(),
                           [id](const Element& e) { return e.id == id; });
    return it == elements.end() ? nullptr : &*it;
}

Element* Model::find_element(int id) noexcept {
    return const_cast<Element*>(std::as_const(*this).find_element(id));
}

std::size_t Model::count(ElementRole role) const noexcept {
    return static_cast<std::size_t>(std::count_if(
        elements.begin(), elements.end(), [role](const Element& e) { return e.role == role; }));
}

namespace {

[[noreturn]] void fail(const std::string& message) { throw ValidationError(message); }

std::string element_label(const Element& e) { return "element " + std::to_string(e.id); }

void validate_role_fields(const Element& e) {
    const std::string label = element_label(e);
    const int dim = dimension(e.kind);
    switch (e.role) {
        case ElementRole::functional:
            if (e.stiffness || e.rest_metric || e.target) {
                fail(label + ": functional elements take only weight and power");
            }
            if (!e.weight) fail(label + ": functional element needs a weight");
            if (!(*e.weight >= 0.0) || !std::isfinite(*e.weight)) {
                fail(label + ": weight must be a finite value >= 0");
            }
            if (!e.power) fail(label + ": functional element needs a power");
            if (e.kind == ElementKind::line && *e.power != 2 && *e.power != 4) {
                fail(label + ": line power must be 2 or 4");
            }
            if (e.kind == ElementKind::triangle && *e.power != 2) {
                fail(label + ": triangle power must be 2");
            }
            if (e.kind == ElementKind::tetrahedron) {
                fail(label + ": tetrahedra cannot be functional");
            }
            break;
        case ElementRole::elastic:
            if (e.weight || e.power || e.target) {
                fail(label + ": elastic elements take only stiffness and rest_metric");
            }
            if (!e.stiffness || !(*e.stiffness > 0.0) || !std::isfinite(*e.stiffness)) {
                fail(label + ": stiffness must be a finite value > 0");
            }
            if (!e.rest_metric) fail(label + ": elastic element needs a rest_metric");
            {
                const auto& m = *e.rest_metric;
                if (m.rows() != dim || m.cols() != dim) {
                    fail(label + ": rest_metric must be " + std::to_string(dim) + "x" +
                         std::to_string(dim));
                }
                if (!m.allFinite()) fail(label + ": rest_metric must be finite");
                if ((m - m.transpose()).cwiseAbs().maxCoeff() >
                    1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
                    fail(label + ": rest_metric must be symmetric");
                }
                Eigen::LLT<Eigen::MatrixXd> llt(m);
                if (llt.info() != Eigen::Success) {
                    fail(label + ": rest_metric must be positive definite");
                }
            }
            break;
        case ElementRole::constrained:
            if (e.weight || e.power || e.stiffness || e.rest_metric) {
                fail(label + ": constrained elements take only a target");
            }
            if (e.kind != ElementKind::line) fail(label + ": only lines can be constrained");
            if (!e.target || !(*e.target > 0.0) || !std::isfinite(*e.target)) {
                fail(label + ": target must be a finite value > 0");
            }
            break;
    }
}

}  // namespace

void validate(const SolverParams& p) {
    if (!(p.alpha > 0.0) || !std::isfinite(p.alpha)) fail("solver: alpha must be > 0");
    if (!(p.damping > 0.0 && p.damping <= 1.0)) fail("solver: damping must lie in (0, 1]");
    if (!(p.constraint_relax > 0.0 && p.constraint_relax <= 1.0)) {
        fail("solver: constraint_relax must lie in (0, 1]");
    }
    if (p.max_steps < 0) fail("solver: max_steps must be >= 0");
    if (!(p.grad_tol > 0.0)) fail("solver: grad_tol must be > 0");
    if (!(p.residual_tol > 0.0)) fail("solver: residual_tol must be > 0");
}

void validate(const Model& model) {
    std::set<int> node_ids;
    std::set<int> free_ids;
    for (const auto& n : model.nodes) {
        if (n.id < 0) fail("node " + std::to_string(n.id) + ": id must be >= 0");
        if (!node_ids.insert(n.id).second) fail("duplicate node " + std::to_string(n.id));
        if (!n.position.allFinite()) fail("node " + std::to_string(n.id) + ": position not finite");
        if (!n.fixed) free_ids.insert(n.id);
    }
    if (free_ids.empty()) fail("model has no free degrees of freedom");

    std::set<int> element_ids;
    for (const auto& e : model.elements) {
        if (!element_ids.insert(e.id).second) fail("duplicate element " + std::to_string(e.id));
        if (static_cast<int>(e.node_ids.size()) != node_count(e.kind)) {
            fail(element_label(e) + ": a " + std::string(to_string(e.kind)) + " needs " +
                 std::to_string(node_count(e.kind)) + " nodes");
        }
        std::set<int> seen;
        for (int id : e.node_ids) {
            if (!node_ids.count(id)) fail("unknown node " + std::to_string(id));
            if (!seen.insert(id).second) {
                fail(element_label(e) + ": node " + std::to_string(id) + " repeated");
            }
        }
        validate_role_fields(e);
    }

    for (const auto& l : model.loads) {
        if (!node_ids.count(l.node_id)) fail("unknown node " + std::to_string(l.node_id));
        if (!free_ids.count(l.node_id)) {
            fail("load on node " + std::to_string(l.node_id) + ": node is fixed");
        }
        if (!l.force.allFinite()) fail("load on node " + std::to_string(l.node_id) + ": not finite");
    }

    const std::size_t constrained = model.count(ElementRole::constrained);
    if (constrained >= free_ids.size() * 3) {
        fail("model has " + std::to_string(constrained) + " constraints for " +
             std::to_string(free_ids.size() * 3) +
             " unknowns; constraints must be fewer than unknowns");
    }
    validate(model.solver);
}

DofMap::DofMap(const Model& model) {
    for (const auto& n : model.nodes) {
        if (!n.fixed) free_ids_.push_back(n.id);
    }
    std::sort(free_ids_.begin(), free_ids_.end());
    base_.reserve(free_ids_.size());
    for (std::size_t i = 0; i < free_ids_.size(); ++i) {
        base_.emplace(free_ids_[i], static_cast<int>(i) * 3);
    }
}

int DofMap::base(int node_id) const noexcept {
    auto it = base_.find(node_id);
    return it == base_.end() ? -1 : it->second;
}

int DofMap::index(int node_id, Axis axis) const {
    const int b = base(node_id);
    if (b < 0) throw Error("node " + std::to_string(node_id) + " is not free");
    return b + static_cast<int>(axis);
}

std::pair<int, Axis> DofMap::entry(int dof) const {
    if (dof < 0 || dof >= size()) throw Error("dof index " + std::to_string(dof) + " out of range");
    return {free_ids_[static_cast<std::size_t>(dof / 3)], static_cast<Axis>(dof % 3)};
}

Eigen::VectorXd gather_positions(const Model& model, const DofMap& map) {
    Eigen::VectorXd x(map.size());
    for (const auto& n : model.nodes) {
        const int b = map.base(n.id);
        if (b >= 0) x.segment<3>(b) = n.position;
    }
    return x;
}

Model scatter_positions(const Model& model, const DofMap& map, const Eigen::VectorXd& x) {
    if (x.size() != map.size()) {
        throw DimensionError("position vector has length " + std::to_string(x.size()) +
                             ", expected " + std::to_string(map.size()));
    }
    Model out = model;
    for (auto& n : out.nodes) {
        const int b = map.base(n.id);
        if (b >= 0) n.position = x.segment<3>(b);
    }
    return out;
}

Layout::Layout(const Model& model) : dofs_(model), node_total_(model.nodes.size()) {
    slot_.reserve(model.nodes.size());
    node_base_.reserve(model.nodes.size());
    for (std::size_t i = 0; i < model.nodes.size(); ++i) {
        slot_.emplace(model.nodes[i].id, i);
        node_base_.push_back(dofs_.base(model.nodes[i].id));
    }

    std::vector<std::size_t> order(model.elements.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return model.elements[a].id < model.elements[b].id;
    });

    for (std::size_t index : order) {
        const Element& e = model.elements[index];
        ElementBinding binding;
        binding.element = index;
        binding.count = static_cast<int>(e.node_ids.size());
        for (int k = 0; k < binding.count; ++k) {
            binding.slots[k] = node_slot(e.node_ids[k]);
            binding.dofs[k] = dofs_.base(e.node_ids[k]);
        }
        by_role_[static_cast<std::size_t>(e.role)].push_back(binding);
    }
}

std::span<const ElementBinding> Layout::bindings(ElementRole role) const noexcept {
    return by_role_[static_cast<std::size_t>(role)];
}

std::size_t Layout::node_slot(int node_id) const {
    auto it = slot_.find(node_id);
    if (it == slot_.end()) throw ValidationError("unknown node " + std::to_string(node_id));
    return it->second;
}

std::vector<Vec3> Layout::positions(const Model& model, const Eigen::VectorXd& x) const {
    if (x.size() != dofs_.size()) {
        throw DimensionError("position vector has length " + std::to_string(x.size()) +
                             ", expected " + std::to_string(dofs_.size()));
    }
    if (model.nodes.size() != node_total_) throw DimensionError("model does not match layout");
    std::vector<Vec3> out(model.nodes.size());
    for (std::size_t i = 0; i < model.nodes.size(); ++i) {
        const int b = node_base_[i];
        out[i] = b >= 0 ? Vec3(x.segment<3>(b)) : model.nodes[i].position;
    }
    return out;
}

std::array<Vec3, 4> Layout::corners(const ElementBinding& binding,
                                    std::span<const Vec3> positions) const {
    std::array<Vec3, 4> out{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
    for (int k = 0; k < binding.count; ++k) out[k] = positions[binding.slots[k]];
    return out;
}

}  // namespace formfind
