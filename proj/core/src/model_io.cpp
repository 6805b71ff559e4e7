#include "formfind/model_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "formfind/errors.hpp"
#include "formfind/geometry.hpp"

namespace formfind {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& message) { throw ValidationError(message); }

void reject_unknown_keys(const json& object, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (const auto& [key, value] : object.items()) {
        if (!allowed.count(key)) invalid(where + ": unknown field \"" + key + "\"");
    }
}

const json& require(const json& object, const char* key, const std::string& where) {
    auto it = object.find(key);
    if (it == object.end()) invalid(where + ": missing field \"" + key + "\"");
    return *it;
}

double as_number(const json& value, const std::string& where) {
    if (!value.is_number()) invalid(where + " must be a number");
    return value.get<double>();
}

int as_int(const json& value, const std::string& where) {
    if (!value.is_number_integer()) invalid(where + " must be an integer");
    const auto v = value.get<long long>();
    if (v < INT32_MIN || v > INT32_MAX) invalid(where + " is out of range");
    return static_cast<int>(v);
}

Vec3 as_vec3(const json& value, const std::string& where) {
    if (!value.is_array() || value.size() != 3) invalid(where + " must be an array of 3 numbers");
    return {as_number(value[0], where), as_number(value[1], where), as_number(value[2], where)};
}

Node parse_node(const json& j, std::size_t index) {
    const std::string where = "nodes[" + std::to_string(index) + "]";
    if (!j.is_object()) invalid(where + " must be an object");
    reject_unknown_keys(j, {"id", "pos", "fixed"}, where);
    Node n;
    n.id = as_int(require(j, "id", where), where + ".id");
    const std::string label = "node " + std::to_string(n.id);
    n.position = as_vec3(require(j, "pos", label), label + ".pos");
    if (auto it = j.find("fixed"); it != j.end()) {
        if (!it->is_boolean()) invalid(label + ".fixed must be a boolean");
        n.fixed = it->get<bool>();
    }
    return n;
}

Eigen::MatrixXd parse_metric(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) invalid(where + " must be a square array of numbers");
    const auto size = static_cast<Eigen::Index>(j.size());
    Eigen::MatrixXd m(size, size);
    for (Eigen::Index r = 0; r < size; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != size) {
            invalid(where + " must be a square array of numbers");
        }
        for (Eigen::Index c = 0; c < size; ++c) m(r, c) = as_number(row[static_cast<std::size_t>(c)], where);
    }
    return m;
}

Element parse_element(const json& j, std::size_t index) {
    const std::string where = "elements[" + std::to_string(index) + "]";
    if (!j.is_object()) invalid(where + " must be an object");
    reject_unknown_keys(j, {"id", "kind", "nodes", "role", "weight", "power", "stiffness",
                            "rest_metric", "target"},
                        where);
    Element e;
    e.id = as_int(require(j, "id", where), where + ".id");
    const std::string label = "element " + std::to_string(e.id);

    const json& kind = require(j, "kind", label);
    if (!kind.is_string() || !parse_kind(kind.get<std::string>())) {
        invalid(label + ": kind must be line, triangle or tetrahedron");
    }
    e.kind = *parse_kind(kind.get<std::string>());

    const json& role = require(j, "role", label);
    if (!role.is_string() || !parse_role(role.get<std::string>())) {
        invalid(label + ": role must be functional, elastic or constrained");
    }
    e.role = *parse_role(role.get<std::string>());

    const json& nodes = require(j, "nodes", label);
    if (!nodes.is_array()) invalid(label + ".nodes must be an array of node ids");
    for (const json& id : nodes) e.node_ids.push_back(as_int(id, label + ".nodes"));

    if (auto it = j.find("weight"); it != j.end()) e.weight = as_number(*it, label + ".weight");
    if (auto it = j.find("power"); it != j.end()) e.power = as_int(*it, label + ".power");
    if (auto it = j.find("stiffness"); it != j.end()) e.stiffness = as_number(*it, label + ".stiffness");
    if (auto it = j.find("rest_metric"); it != j.end()) {
        e.rest_metric = parse_metric(*it, label + ".rest_metric");
    }
    if (auto it = j.find("target"); it != j.end()) e.target = as_number(*it, label + ".target");

    if (e.role == ElementRole::functional && !e.power) e.power = 2;
    return e;
}

Load parse_load(const json& j, std::size_t index) {
    const std::string where = "loads[" + std::to_string(index) + "]";
    if (!j.is_object()) invalid(where + " must be an object");
    reject_unknown_keys(j, {"node", "force"}, where);
    Load l;
    l.node_id = as_int(require(j, "node", where), where + ".node");
    l.force = as_vec3(require(j, "force", where), where + ".force");
    return l;
}

SolverParams parse_solver(const json& j) {
    if (!j.is_object()) invalid("solver must be an object");
    reject_unknown_keys(j, {"method", "alpha", "damping", "constraint_relax", "max_steps", "grad_tol",
                            "residual_tol"},
                        "solver");
    SolverParams p;
    if (auto it = j.find("method"); it != j.end()) {
        if (!it->is_string() || !parse_method(it->get<std::string>())) {
            invalid("solver.method must be two_term or three_term");
        }
        p.method = *parse_method(it->get<std::string>());
    }
    if (auto it = j.find("alpha"); it != j.end()) p.alpha = as_number(*it, "solver.alpha");
    if (auto it = j.find("damping"); it != j.end()) p.damping = as_number(*it, "solver.damping");
    if (auto it = j.find("constraint_relax"); it != j.end()) {
        p.constraint_relax = as_number(*it, "solver.constraint_relax");
    }
    if (auto it = j.find("max_steps"); it != j.end()) p.max_steps = as_int(*it, "solver.max_steps");
    if (auto it = j.find("grad_tol"); it != j.end()) p.grad_tol = as_number(*it, "solver.grad_tol");
    if (auto it = j.find("residual_tol"); it != j.end()) {
        p.residual_tol = as_number(*it, "solver.residual_tol");
    }
    return p;
}

void fill_rest_metrics(Model& model) {
    for (Element& e : model.elements) {
        if (e.role != ElementRole::elastic || e.rest_metric) continue;
        std::array<Vec3, 4> points{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
        if (static_cast<int>(e.node_ids.size()) != node_count(e.kind)) return;  // validate() reports it
        for (std::size_t k = 0; k < e.node_ids.size(); ++k) {
            const Node* n = model.find_node(e.node_ids[k]);
            if (n == nullptr) return;
            points[k] = n->position;
        }
        try {
            const ElementGeometry g =
                element_geometry(std::span<const Vec3>(points.data(), e.node_ids.size()), e.kind);
            e.rest_metric = g.metric_block();
        } catch (const DegenerateElementError& err) {
            invalid("element " + std::to_string(e.id) + ": cannot take the rest metric, " + err.what());
        }
    }
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

}  // namespace

Model model_from_json(const json& doc) {
    if (!doc.is_object()) invalid("model document must be a JSON object");
    reject_unknown_keys(doc, {"nodes", "elements", "loads", "solver"}, "model");
    Model model;

    const json& nodes = require(doc, "nodes", "model");
    if (!nodes.is_array()) invalid("nodes must be an array");
    for (std::size_t i = 0; i < nodes.size(); ++i) model.nodes.push_back(parse_node(nodes[i], i));

    if (auto it = doc.find("elements"); it != doc.end()) {
        if (!it->is_array()) invalid("elements must be an array");
        for (std::size_t i = 0; i < it->size(); ++i) model.elements.push_back(parse_element((*it)[i], i));
    }
    if (auto it = doc.find("loads"); it != doc.end()) {
        if (!it->is_array()) invalid("loads must be an array");
        for (std::size_t i = 0; i < it->size(); ++i) model.loads.push_back(parse_load((*it)[i], i));
    }
    if (auto it = doc.find("solver"); it != doc.end()) model.solver = parse_solver(*it);

    fill_rest_metrics(model);
    validate(model);
    return model;
}

Model parse_model(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& err) {
        const std::size_t byte = err.byte > 0 ? err.byte - 1 : 0;
        const auto [line, column] = line_column(text, byte);
        throw ParseError("syntax error at line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ": " + err.what(),
                         line, column);
    }
    return model_from_json(doc);
}

json model_to_json(const Model& model) {
    json doc;
    doc["nodes"] = json::array();
    for (const Node& n : model.nodes) {
        doc["nodes"].push_back(
            {{"id", n.id}, {"pos", {n.position.x(), n.position.y(), n.position.z()}}, {"fixed", n.fixed}});
    }
    doc["elements"] = json::array();
    for (const Element& e : model.elements) {
        json j = {{"id", e.id},
                  {"kind", std::string(to_string(e.kind))},
                  {"nodes", e.node_ids},
                  {"role", std::string(to_string(e.role))}};
        if (e.weight) j["weight"] = *e.weight;
        if (e.power) j["power"] = *e.power;
        if (e.stiffness) j["stiffness"] = *e.stiffness;
        if (e.rest_metric) {
            json rows = json::array();
            for (Eigen::Index r = 0; r < e.rest_metric->rows(); ++r) {
                json row = json::array();
                for (Eigen::Index c = 0; c < e.rest_metric->cols(); ++c) row.push_back((*e.rest_metric)(r, c));
                rows.push_back(std::move(row));
            }
            j["rest_metric"] = std::move(rows);
        }
        if (e.target) j["target"] = *e.target;
        doc["elements"].push_back(std::move(j));
    }
    doc["loads"] = json::array();
    for (const Load& l : model.loads) {
        doc["loads"].push_back({{"node", l.node_id}, {"force", {l.force.x(), l.force.y(), l.force.z()}}});
    }
    const SolverParams& p = model.solver;
    doc["solver"] = {{"method", std::string(to_string(p.method))},
                     {"alpha", p.alpha},
                     {"damping", p.damping},
                     {"constraint_relax", p.constraint_relax},
                     {"max_steps", p.max_steps},
                     {"grad_tol", p.grad_tol},
                     {"residual_tol", p.residual_tol}};
    return doc;
}

std::string serialize_model(const Model& model) { return model_to_json(model).dump(1) + "\n"; }

Model load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open model file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_model(buffer.str());
}

void save_model(const Model& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write model file " + path.string());
    out << serialize_model(model);
    if (!out) throw Error("failed writing model file " + path.string());
}

}  // namespace formfind
