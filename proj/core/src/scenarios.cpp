#include "formfind/scenarios.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <set>

#include "formfind/errors.hpp"
#include "formfind/geometry.hpp"
#include "formfind/solver.hpp"

namespace formfind {

namespace {

constexpr std::array<std::pair<ScenarioKind, std::string_view>, 7> kNames{{
    {ScenarioKind::cable_net, "cable_net"},
    {ScenarioKind::simplex_tensegrity, "simplex_tensegrity"},
    {ScenarioKind::ring_tensegrity, "ring_tensegrity"},
    {ScenarioKind::handkerchief, "handkerchief"},
    {ScenarioKind::cantilever, "cantilever"},
    {ScenarioKind::buckling_bar, "buckling_bar"},
    {ScenarioKind::cable_membrane_mixed, "cable_membrane_mixed"},
}};

using Params = std::map<std::string, double>;

// Merged parameters with range checks. Every lookup goes through here so the
// error names the scenario and the parameter.
class Reader {
public:
    Reader(ScenarioKind kind, const Params& given) : kind_(kind), values_(scenario_defaults(kind)) {
        for (const auto& [name, value] : given) {
            if (!values_.count(name)) fail(name, "unknown parameter");
            if (!std::isfinite(value)) fail(name, "must be finite");
            values_[name] = value;
        }
    }

    double positive(const std::string& name) const {
        const double v = values_.at(name);
        if (!(v > 0.0)) fail(name, "must be > 0");
        return v;
    }

    double non_negative(const std::string& name) const {
        const double v = values_.at(name);
        if (v < 0.0) fail(name, "must be >= 0");
        return v;
    }

    double any(const std::string& name) const { return values_.at(name); }

    int integer(const std::string& name, int lo, int hi) const {
        const double v = values_.at(name);
        if (v != std::floor(v) || v < lo || v > hi) {
            fail(name, "must be an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        }
        return static_cast<int>(v);
    }

    std::uint64_t seed(const std::string& name) const {
        const double v = values_.at(name);
        if (v != std::floor(v) || v < 0.0 || v > 9007199254740992.0) fail(name, "must be a non-negative integer");
        return static_cast<std::uint64_t>(v);
    }

    [[noreturn]] void fail(const std::string& name, const std::string& why) const {
        throw ValidationError(std::string(to_string(kind_)) + ": parameter " + name + " " + why);
    }

private:
    ScenarioKind kind_;
    Params values_;
};

class Builder {
public:
    int node(const Vec3& p, bool fixed = false) {
        const int id = static_cast<int>(model.nodes.size()) + 1;
        model.nodes.push_back({id, p, fixed});
        return id;
    }

    Element& element(ElementKind kind, std::vector<int> nodes, ElementRole role) {
        Element e;
        e.id = static_cast<int>(model.elements.size()) + 1;
        e.kind = kind;
        e.node_ids = std::move(nodes);
        e.role = role;
        model.elements.push_back(std::move(e));
        return model.elements.back();
    }

    void functional(ElementKind kind, std::vector<int> nodes, double weight, int power) {
        Element& e = element(kind, std::move(nodes), ElementRole::functional);
        e.weight = weight;
        e.power = power;
    }

    void constrained(int a, int b, double target) {
        element(ElementKind::line, {a, b}, ElementRole::constrained).target = target;
    }

    // Rest metric taken from the current node positions.
    void elastic(ElementKind kind, std::vector<int> nodes, double stiffness) {
        std::array<Vec3, 4> points;
        for (std::size_t k = 0; k < nodes.size(); ++k) points[k] = model.nodes[nodes[k] - 1].position;
        const ElementGeometry g = element_geometry(std::span<const Vec3>(points.data(), nodes.size()), kind);
        Element& e = element(kind, std::move(nodes), ElementRole::elastic);
        e.stiffness = stiffness;
        e.rest_metric = g.metric_block();
    }

    void load(int node_id, const Vec3& force) { model.loads.push_back({node_id, force}); }

    Model model;
};

void count_metadata(GeneratedScenario& out) {
    const Model& m = out.model;
    std::size_t fixed = 0;
    for (const Node& n : m.nodes) fixed += n.fixed ? 1 : 0;
    out.metadata["nodes"] = static_cast<double>(m.nodes.size());
    out.metadata["fixed_nodes"] = static_cast<double>(fixed);
    out.metadata["free_nodes"] = static_cast<double>(m.nodes.size() - fixed);
    out.metadata["elements"] = static_cast<double>(m.elements.size());
    out.metadata["functional"] = static_cast<double>(m.count(ElementRole::functional));
    out.metadata["elastic"] = static_cast<double>(m.count(ElementRole::elastic));
    out.metadata["constrained"] = static_cast<double>(m.count(ElementRole::constrained));
    out.metadata["loads"] = static_cast<double>(m.loads.size());
}

// Radial net: centre node, `rings` concentric rings of `spokes` nodes, radial
// members between consecutive rings and ring members around each ring. Five
// equally spaced nodes of the outer ring are fixed at the vertices of a
// regular pentagon with alternating heights.
GeneratedScenario cable_net(const Reader& in) {
    const int spokes = in.integer("spokes", 5, 1000);
    const int rings = in.integer("rings", 1, 1000);
    const double radius = in.positive("radius");
    const double height = in.non_negative("height");
    const double weight = in.positive("weight");
    const double boundary = in.positive("boundary_multiplier");
    if (spokes % 5 != 0) in.fail("spokes", "must be a multiple of 5");

    Builder b;
    const int centre = b.node(Vec3::Zero());
    auto id = [&](int ring, int spoke) { return centre + 1 + (ring - 1) * spokes + spoke; };
    const int stride = spokes / 5;
    for (int k = 1; k <= rings; ++k) {
        for (int s = 0; s < spokes; ++s) {
            const double angle = 2.0 * std::numbers::pi * s / spokes;
            const double r = radius * k / rings;
            const bool corner = k == rings && s % stride == 0;
            const double z = corner ? height * ((s / stride) % 2) : 0.0;
            b.node({r * std::cos(angle), r * std::sin(angle), z}, corner);
        }
    }
    // pull the free outer nodes onto the pentagon edges
    for (int s = 0; s < spokes; ++s) {
        if (s % stride == 0) continue;
        const int c0 = s / stride, c1 = (c0 + 1) % 5;
        const double t = static_cast<double>(s % stride) / stride;
        Node& n = b.model.nodes[id(rings, s) - 1];
        n.position = (1.0 - t) * b.model.nodes[id(rings, c0 * stride) - 1].position +
                     t * b.model.nodes[id(rings, c1 * stride) - 1].position;
    }

    for (int k = 1; k <= rings; ++k) {
        for (int s = 0; s < spokes; ++s) {
            b.functional(ElementKind::line, {k == 1 ? centre : id(k - 1, s), id(k, s)}, weight, 2);
        }
        const double w = k == rings ? weight * boundary : weight;
        for (int s = 0; s < spokes; ++s) {
            b.functional(ElementKind::line, {id(k, s), id(k, (s + 1) % spokes)}, w, 2);
        }
    }
    GeneratedScenario out{std::move(b.model), {}};
    out.metadata["members"] = static_cast<double>(out.model.elements.size());
    out.metadata["boundary_members"] = spokes;
    return out;
}

// k-fold prism tensegrity: bottom ring 1..k, top ring k+1..2k, struts from
// bottom i to top i+1, cables along both rings and the verticals i to top i.
GeneratedScenario ring_tensegrity(int k, double target, double weight, int power, double radius,
                                  double height) {
    Builder b;
    for (int i = 0; i < k; ++i) {
        const double a = 2.0 * std::numbers::pi * i / k;
        b.node({radius * std::cos(a), radius * std::sin(a), 0.0});
    }
    for (int i = 0; i < k; ++i) {
        const double a = 2.0 * std::numbers::pi * (i + 0.5) / k;
        b.node({radius * std::cos(a), radius * std::sin(a), height});
    }
    auto bottom = [&](int i) { return 1 + (i % k); };
    auto top = [&](int i) { return k + 1 + (i % k); };
    for (int i = 0; i < k; ++i) b.constrained(bottom(i), top(i + 1), target);
    for (int i = 0; i < k; ++i) b.functional(ElementKind::line, {bottom(i), bottom(i + 1)}, weight, power);
    for (int i = 0; i < k; ++i) b.functional(ElementKind::line, {top(i), top(i + 1)}, weight, power);
    for (int i = 0; i < k; ++i) b.functional(ElementKind::line, {bottom(i), top(i)}, weight, power);
    return {std::move(b.model), {{"struts", k}, {"cables", 3 * k}}};
}

int power_param(const Reader& in) {
    const int p = in.integer("power", 2, 4);
    if (p == 3) in.fail("power", "must be 2 or 4");
    return p;
}

// Square sheet in the xy plane, each cell split along its (i,j)-(i+1,j+1)
// diagonal, hung by one or two corners and loaded downward at every free node.
GeneratedScenario handkerchief(const Reader& in) {
    const int n = in.integer("divisions", 1, 1000);
    const double size = in.positive("size");
    const double stiffness = in.positive("stiffness");
    const double load = in.non_negative("load");
    const int hang = in.integer("hang", 1, 2);

    Builder b;
    auto id = [&](int i, int j) { return 1 + j * (n + 1) + i; };
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
            const bool fixed = j == 0 && (i == 0 || (hang == 2 && i == n));
            b.node({size * i / n, size * j / n, 0.0}, fixed);
        }
    }
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            b.elastic(ElementKind::triangle, {id(i, j), id(i + 1, j), id(i + 1, j + 1)}, stiffness);
            b.elastic(ElementKind::triangle, {id(i, j), id(i + 1, j + 1), id(i, j + 1)}, stiffness);
        }
    }
    if (load > 0.0) {
        for (const Node& node : b.model.nodes) {
            if (!node.fixed) b.load(node.id, {0.0, 0.0, -load});
        }
    }
    return {std::move(b.model), {{"area", size * size}}};
}

// Box of unit-ratio cells, each split into six tetrahedra sharing the cell
// diagonal from its lowest to its highest corner. `axis` is the long axis.
struct BoxMesh {
    Builder builder;
    std::vector<int> base;  // nodes at axis coordinate 0
    std::vector<int> top;   // nodes at the far end
};

BoxMesh box_mesh(const Reader& in, Axis axis, double stiffness, std::uint64_t seed, double noise) {
    const double length = in.positive("length");
    const double width = in.positive("width");
    const double depth = in.positive("depth");
    const int nl = in.integer("length_divisions", 1, 1000);
    const int nw = in.integer("width_divisions", 1, 100);
    const int nd = in.integer("depth_divisions", 1, 100);

    BoxMesh mesh;
    Builder& b = mesh.builder;
    auto id = [&](int l, int w, int d) { return 1 + (l * (nw + 1) + w) * (nd + 1) + d; };
    const int a = static_cast<int>(axis), u = (a + 1) % 3, v = (a + 2) % 3;
    for (int l = 0; l <= nl; ++l) {
        for (int w = 0; w <= nw; ++w) {
            for (int d = 0; d <= nd; ++d) {
                Vec3 p;
                p[a] = length * l / nl;
                p[u] = width * w / nw;
                p[v] = depth * d / nd;
                const int node = b.node(p, l == 0);
                if (l == 0) mesh.base.push_back(node);
                if (l == nl) mesh.top.push_back(node);
            }
        }
    }
    if (noise > 0.0) {
        const Eigen::VectorXd shift = random_positions(seed, static_cast<int>(b.model.nodes.size()) * 3, noise);
        for (std::size_t k = 0; k < b.model.nodes.size(); ++k) {
            b.model.nodes[k].position += shift.segment<3>(static_cast<Eigen::Index>(3 * k));
        }
    }
    static constexpr std::array<std::array<int, 3>, 6> perms{
        {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
    for (int l = 0; l < nl; ++l) {
        for (int w = 0; w < nw; ++w) {
            for (int d = 0; d < nd; ++d) {
                for (const auto& perm : perms) {
                    std::array<int, 3> c{l, w, d};
                    std::vector<int> tet{id(c[0], c[1], c[2])};
                    for (int step : perm) {
                        ++c[static_cast<std::size_t>(step)];
                        tet.push_back(id(c[0], c[1], c[2]));
                    }
                    b.elastic(ElementKind::tetrahedron, std::move(tet), stiffness);
                }
            }
        }
    }
    return mesh;
}

GeneratedScenario cantilever(const Reader& in) {
    const double load = in.non_negative("load");
    BoxMesh mesh = box_mesh(in, Axis::x, in.positive("stiffness"), 0, 0.0);
    if (load > 0.0) {
        for (const Node& node : mesh.builder.model.nodes) {
            if (!node.fixed) mesh.builder.load(node.id, {0.0, 0.0, -load});
        }
    }
    const double volume = in.positive("length") * in.positive("width") * in.positive("depth");
    return {std::move(mesh.builder.model), {{"volume", volume}}};
}

GeneratedScenario buckling_bar(const Reader& in) {
    const double load = in.non_negative("load");
    BoxMesh mesh = box_mesh(in, Axis::z, in.positive("stiffness"), in.seed("seed"), in.non_negative("noise"));
    if (load > 0.0) {
        for (int node : mesh.top) mesh.builder.load(node, {0.0, 0.0, -load});
    }
    const double volume = in.positive("length") * in.positive("width") * in.positive("depth");
    return {std::move(mesh.builder.model),
            {{"volume", volume}, {"top_nodes", static_cast<double>(mesh.top.size())}}};
}

// Mast and membrane: a free mast head held at a constrained distance above a
// fixed foot, a fan of membrane triangles from the head to a free ring, ring
// edge cables and cables from each ring node to a fixed anchor.
GeneratedScenario cable_membrane_mixed(const Reader& in) {
    const int segments = in.integer("segments", 3, 1000);
    const double radius = in.positive("radius");
    const double anchor_radius = in.positive("anchor_radius");
    const double mast = in.positive("mast");
    const double anchor_height = in.non_negative("anchor_height");
    const double cable_weight = in.positive("cable_weight");
    const double membrane_weight = in.positive("membrane_weight");
    if (!(anchor_radius > radius)) in.fail("anchor_radius", "must exceed radius");

    Builder b;
    const int foot = b.node(Vec3::Zero(), true);
    const int head = b.node({0.0, 0.0, mast});
    std::vector<int> ring, anchors;
    for (int s = 0; s < segments; ++s) {
        const double a = 2.0 * std::numbers::pi * s / segments;
        ring.push_back(b.node({radius * std::cos(a), radius * std::sin(a), 0.5 * mast}));
    }
    for (int s = 0; s < segments; ++s) {
        const double a = 2.0 * std::numbers::pi * s / segments;
        const double z = anchor_height * (s % 2);
        anchors.push_back(b.node({anchor_radius * std::cos(a), anchor_radius * std::sin(a), z}, true));
    }
    b.constrained(foot, head, mast);
    for (int s = 0; s < segments; ++s) {
        b.functional(ElementKind::triangle,
                     {head, ring[static_cast<std::size_t>(s)],
                      ring[static_cast<std::size_t>((s + 1) % segments)]},
                     membrane_weight, 2);
    }
    for (int s = 0; s < segments; ++s) {
        b.functional(ElementKind::line,
                     {ring[static_cast<std::size_t>(s)], ring[static_cast<std::size_t>((s + 1) % segments)]},
                     cable_weight, 4);
    }
    for (int s = 0; s < segments; ++s) {
        b.functional(ElementKind::line, {ring[static_cast<std::size_t>(s)], anchors[static_cast<std::size_t>(s)]},
                     cable_weight, 4);
    }
    return {std::move(b.model), {{"membrane_triangles", segments}, {"cables", 2.0 * segments}}};
}

}  // namespace

std::string_view to_string(ScenarioKind kind) noexcept {
    for (const auto& [k, name] : kNames) {
        if (k == kind) return name;
    }
    return "unknown";
}

std::optional<ScenarioKind> parse_scenario_kind(std::string_view text) noexcept {
    for (const auto& [k, name] : kNames) {
        if (name == text) return k;
    }
    return std::nullopt;
}

std::vector<ScenarioKind> all_scenario_kinds() {
    std::vector<ScenarioKind> out;
    for (const auto& entry : kNames) out.push_back(entry.first);
    return out;
}

std::map<std::string, double> scenario_defaults(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::cable_net:
            return {{"spokes", 10},  {"rings", 11},  {"radius", 5.0},
                    {"height", 3.0}, {"weight", 1.0}, {"boundary_multiplier", 1.0}};
        case ScenarioKind::simplex_tensegrity:
            return {{"target", 10.0}, {"weight", 1.0}, {"power", 4}, {"radius", 5.0}, {"height", 8.0}};
        case ScenarioKind::ring_tensegrity:
            return {{"struts", 4},    {"target", 10.0}, {"weight", 1.0},
                    {"power", 4},     {"radius", 5.0},  {"height", 8.0}};
        case ScenarioKind::handkerchief:
            return {{"divisions", 8}, {"size", 8.0}, {"stiffness", 50.0}, {"load", 0.1}, {"hang", 2}};
        case ScenarioKind::cantilever:
            return {{"length", 12.0},       {"width", 2.0},         {"depth", 2.0},
                    {"length_divisions", 12}, {"width_divisions", 2}, {"depth_divisions", 2},
                    {"stiffness", 50.0},    {"load", 0.01}};
        case ScenarioKind::buckling_bar:
            return {{"length", 12.0},       {"width", 2.0},         {"depth", 2.0},
                    {"length_divisions", 12}, {"width_divisions", 2}, {"depth_divisions", 2},
                    {"stiffness", 50.0},    {"load", 0.1},          {"noise", 0.01},
                    {"seed", 1}};
        case ScenarioKind::cable_membrane_mixed:
            return {{"segments", 12},      {"radius", 6.0},         {"anchor_radius", 9.0},
                    {"mast", 6.0},         {"anchor_height", 1.5},  {"cable_weight", 1.0},
                    {"membrane_weight", 1.0}};
    }
    return {};
}

GeneratedScenario generate(const ScenarioSpec& spec) {
    const Reader in(spec.kind, spec.params);
    GeneratedScenario out;
    switch (spec.kind) {
        case ScenarioKind::cable_net: out = cable_net(in); break;
        case ScenarioKind::simplex_tensegrity:
            out = ring_tensegrity(3, in.positive("target"), in.positive("weight"), power_param(in),
                                  in.positive("radius"), in.positive("height"));
            break;
        case ScenarioKind::ring_tensegrity:
            out = ring_tensegrity(in.integer("struts", 3, 1000), in.positive("target"), in.positive("weight"),
                                  power_param(in), in.positive("radius"), in.positive("height"));
            break;
        case ScenarioKind::handkerchief: out = handkerchief(in); break;
        case ScenarioKind::cantilever: out = cantilever(in); break;
        case ScenarioKind::buckling_bar: out = buckling_bar(in); break;
        case ScenarioKind::cable_membrane_mixed: out = cable_membrane_mixed(in); break;
    }
    count_metadata(out);
    validate(out.model);
    return out;
}

}  // namespace formfind
