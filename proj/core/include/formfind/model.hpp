#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace formfind {

using Vec3 = Eigen::Vector3d;

enum class ElementKind { line, triangle, tetrahedron };
enum class ElementRole { functional, elastic, constrained };
enum class Method { two_term, three_term };
enum class Axis : int { x = 0, y = 1, z = 2 };

/// Parametric dimension N of a simplex kind (1, 2 or 3); it has N+1 nodes.
constexpr int dimension(ElementKind kind) noexcept {
    switch (kind) {
        case ElementKind::line: return 1;
        case ElementKind::triangle: return 2;
        case ElementKind::tetrahedron: return 3;
    }
    return 0;
}

constexpr int node_count(ElementKind kind) noexcept { return dimension(kind) + 1; }

std::string_view to_string(ElementKind kind) noexcept;
std::string_view to_string(ElementRole role) noexcept;
std::string_view to_string(Method method) noexcept;
std::optional<ElementKind> parse_kind(std::string_view text) noexcept;
std::optional<ElementRole> parse_role(std::string_view text) noexcept;
std::optional<Method> parse_method(std::string_view text) noexcept;

struct Node {
    int id = 0;
    Vec3 position = Vec3::Zero();
    bool fixed = false;

    friend bool operator==(const Node&, const Node&) = default;
};

/// A simplex element. Only the fields belonging to `role` are populated:
///   functional  -> weight, power
///   elastic     -> stiffness, rest_metric
///   constrained -> target
struct Element {
    int id = 0;
    ElementKind kind = ElementKind::line;
    std::vector<int> node_ids;
    ElementRole role = ElementRole::functional;
    std::optional<double> weight;
    std::optional<int> power;
    std::optional<double> stiffness;
    std::optional<Eigen::MatrixXd> rest_metric;
    std::optional<double> target;

    friend bool operator==(const Element& a, const Element& b);
};

struct Load {
    int node_id = 0;
    Vec3 force = Vec3::Zero();

    friend bool operator==(const Load&, const Load&) = default;
};

struct SolverParams {
    Method method = Method::three_term;
    double alpha = 0.2;
    double damping = 0.98;
    double constraint_relax = 0.5;
    int max_steps = 20000;
    double grad_tol = 1e-3;
    double residual_tol = 1e-6;

    friend bool operator==(const SolverParams&, const SolverParams&) = default;
};

struct Model {
    std::vector<Node> nodes;
    std::vector<Element> elements;
    std::vector<Load> loads;
    SolverParams solver;

    const Node* find_node(int id) const noexcept;
    Node* find_node(int id) noexcept;
    const Element* find_element(int id) const noexcept;
    Element* find_element(int id) noexcept;

    std::size_t count(ElementRole role) const noexcept;
    bool has_role(ElementRole role) const noexcept { return count(role) > 0; }

    friend bool operator==(const Model&, const Model&) = default;
};

/// Checks every model invariant and throws ValidationError naming the first
/// offending entity.
void validate(const Model& model);

/// Checks the solver parameter domains only.
void validate(const SolverParams& params);

/// Bijection between (free node id, axis) and the dense unknown vector index.
/// Free nodes are ordered by ascending id, axes x, y, z within a node.
class DofMap {
public:
    DofMap() = default;
    explicit DofMap(const Model& model);

    int size() const noexcept { return static_cast<int>(free_ids_.size()) * 3; }
    int free_node_count() const noexcept { return static_cast<int>(free_ids_.size()); }
    std::span<const int> free_node_ids() const noexcept { return free_ids_; }

    /// First unknown index of `node_id`, or -1 if the node is fixed or unknown.
    int base(int node_id) const noexcept;
    int index(int node_id, Axis axis) const;
    std::pair<int, Axis> entry(int dof) const;

    friend bool operator==(const DofMap& a, const DofMap& b) { return a.free_ids_ == b.free_ids_; }

private:
    std::vector<int> free_ids_;
    std::unordered_map<int, int> base_;
};

Eigen::VectorXd gather_positions(const Model& model, const DofMap& map);
Model scatter_positions(const Model& model, const DofMap& map, const Eigen::VectorXd& x);

/// An element resolved against a model: node slots (indices into
/// Model::nodes) and the first unknown index of each node (-1 when fixed).
struct ElementBinding {
    std::size_t element = 0;
    int count = 0;
    std::array<std::size_t, 4> slots{};
    std::array<int, 4> dofs{-1, -1, -1, -1};
};

/// Connectivity of a validated model prepared for repeated evaluation.
/// Bindings are grouped per role and sorted by ascending element id, which
/// fixes the reduction order of every assembly.
class Layout {
public:
    explicit Layout(const Model& model);

    const DofMap& dofs() const noexcept { return dofs_; }
    std::span<const ElementBinding> bindings(ElementRole role) const noexcept;
    std::size_t node_slot(int node_id) const;
    std::size_t node_count() const noexcept { return node_total_; }

    /// Positions of every node (by slot), free coordinates taken from `x`.
    std::vector<Vec3> positions(const Model& model, const Eigen::VectorXd& x) const;

    /// Corner positions of one bound element.
    std::array<Vec3, 4> corners(const ElementBinding& binding,
                                std::span<const Vec3> positions) const;

private:
    DofMap dofs_;
    std::size_t node_total_ = 0;
    std::unordered_map<int, std::size_t> slot_;
    std::vector<int> node_base_;
    std::array<std::vector<ElementBinding>, 3> by_role_;
};

}  // namespace formfind
