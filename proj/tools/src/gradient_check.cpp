#include "gradient_check.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "formfind/element_forces.hpp"
#include "formfind/errors.hpp"
#include "formfind/functionals.hpp"
#include "formfind/geometry.hpp"
#include "formfind/solver.hpp"

namespace formfind::tools {

namespace {

using Scalar = std::function<double(const Eigen::VectorXd&)>;

Eigen::VectorXd central_difference(const Scalar& f, const Eigen::VectorXd& x) {
    Eigen::VectorXd out(x.size());
    Eigen::VectorXd probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
        probe[i] = x[i] + h;
        const double up = f(probe);
        probe[i] = x[i] - h;
        const double down = f(probe);
        probe[i] = x[i];
        out[i] = (up - down) / (2.0 * h);
    }
    return out;
}

Eigen::VectorXd flatten(std::span<const Vec3> points) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(points.size()) * 3);
    for (std::size_t k = 0; k < points.size(); ++k) out.segment<3>(static_cast<Eigen::Index>(3 * k)) = points[k];
    return out;
}

Eigen::VectorXd local_columns(const LocalGradient& g, int nodes) {
    Eigen::VectorXd out(3 * nodes);
    for (int k = 0; k < nodes; ++k) out.segment<3>(3 * k) = g.col(k);
    return out;
}

void record(GradientReport& report, const std::string& category, double error) {
    double& worst = report.worst[category];
    worst = std::max(worst, std::isnan(error) ? INFINITY : error);
    ++report.checked[category];
}

void check_element(GradientReport& report, const Element& e, std::span<const Vec3> points) {
    const int n = node_count(e.kind);
    const Eigen::VectorXd x0 = flatten(points);
    const ElementGeometry geometry = element_geometry(points, e.kind);

    if (e.kind == ElementKind::line) {
        const Scalar length = [](const Eigen::VectorXd& v) {
            return (v.segment<3>(0) - v.segment<3>(3)).norm();
        };
        record(report, "length",
               relative_error(local_columns(local_grad_length(points[0], points[1]), 2),
                              central_difference(length, x0)));
    }
    if (e.kind == ElementKind::triangle) {
        const Scalar area = [](const Eigen::VectorXd& v) {
            return 0.5 * (v.segment<3>(3) - v.segment<3>(0)).cross(v.segment<3>(6) - v.segment<3>(0)).norm();
        };
        record(report, "area",
               relative_error(local_columns(local_grad_area(points[0], points[1], points[2]), 3),
                              central_difference(area, x0)));
    }
    const MetricGradients grads = local_grad_metric(geometry);
    for (int i = 0; i < geometry.dim; ++i) {
        for (int j = i; j < geometry.dim; ++j) {
            const Scalar metric = [i, j](const Eigen::VectorXd& v) {
                const Vec3 gi = v.segment<3>(3 * i) - v.segment<3>(3 * i + 3);
                const Vec3 gj = v.segment<3>(3 * j) - v.segment<3>(3 * j + 3);
                return gi.dot(gj);
            };
            record(report, "metric",
                   relative_error(local_columns(grads.at(i, j), n), central_difference(metric, x0)));
        }
    }
}

// Potential whose gradient is omega when the stress and measure are frozen:
// 1/2 V T^ab g_ab(x) summed over elastic elements, minus p.x.
struct FrozenElement {
    std::size_t binding = 0;
    double half_measure = 0.0;
    Eigen::Matrix3d raised = Eigen::Matrix3d::Zero();
};

void check_model(GradientReport& report, const Model& model) {
    const Layout layout(model);
    const Eigen::VectorXd x0 = gather_positions(model, layout.dofs());
    if (x0.size() == 0) return;

    if (model.has_role(ElementRole::functional)) {
        const Scalar pi = [&](const Eigen::VectorXd& x) { return eval_pi(model, layout, x).pi; };
        record(report, "pi_w", relative_error(eval_pi(model, layout, x0).grad, central_difference(pi, x0)));
    }
    if (!model.has_role(ElementRole::elastic)) return;

    const auto bindings = layout.bindings(ElementRole::elastic);
    const std::vector<Vec3> positions0 = layout.positions(model, x0);
    std::vector<FrozenElement> frozen;
    for (std::size_t k = 0; k < bindings.size(); ++k) {
        const Element& e = model.elements[bindings[k].element];
        const auto corners = layout.corners(bindings[k], positions0);
        const ElementGeometry g = element_geometry(std::span<const Vec3>(corners.data(), bindings[k].count), e.kind);
        frozen.push_back({k, 0.5 * g.measure, constitutive_linear(g, *e.rest_metric, *e.stiffness).raised});
    }
    const Eigen::VectorXd p = load_vector(model, layout.dofs());
    const Scalar potential = [&](const Eigen::VectorXd& x) {
        const std::vector<Vec3> positions = layout.positions(model, x);
        double sum = -p.dot(x);
        for (const FrozenElement& f : frozen) {
            const ElementBinding& b = bindings[f.binding];
            const auto c = layout.corners(b, positions);
            const int dim = b.count - 1;
            for (int i = 0; i < dim; ++i) {
                for (int j = 0; j < dim; ++j) {
                    sum += f.half_measure * f.raised(i, j) * (c[i] - c[i + 1]).dot(c[j] - c[j + 1]);
                }
            }
        }
        return sum;
    };
    record(report, "omega", relative_error(assemble_omega(model, layout, x0).omega, central_difference(potential, x0)));
}

double model_size(const Model& model) {
    Vec3 lo = Vec3::Constant(INFINITY), hi = Vec3::Constant(-INFINITY);
    for (const Node& n : model.nodes) {
        lo = lo.cwiseMin(n.position);
        hi = hi.cwiseMax(n.position);
    }
    const double d = (hi - lo).norm();
    return std::isfinite(d) && d > 0.0 ? d : 1.0;
}

}  // namespace

double relative_error(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric) {
    const double scale = std::max(analytic.norm(), numeric.norm());
    if (scale == 0.0) return 0.0;
    return (analytic - numeric).norm() / scale;
}

bool GradientReport::passed(double tolerance) const {
    return std::all_of(worst.begin(), worst.end(), [&](const auto& kv) { return kv.second < tolerance; });
}

GradientReport check_gradients(const Model& model, int trials, std::uint64_t seed) {
    GradientReport report;
    report.trials = std::max(trials, 0);
    const double amplitude = 0.01 * model_size(model);
    for (int t = 0; t < report.trials; ++t) {
        Model trial = model;
        if (t > 0) {
            const Eigen::VectorXd shift =
                random_positions(seed + static_cast<std::uint64_t>(t), static_cast<int>(model.nodes.size()) * 3, amplitude);
            for (std::size_t k = 0; k < trial.nodes.size(); ++k) {
                trial.nodes[k].position += shift.segment<3>(static_cast<Eigen::Index>(3 * k));
            }
        }
        bool any_degenerate = false;
        for (const Element& e : trial.elements) {
            std::array<Vec3, 4> points;
            for (std::size_t k = 0; k < e.node_ids.size(); ++k) points[k] = trial.find_node(e.node_ids[k])->position;
            try {
                check_element(report, e, std::span<const Vec3>(points.data(), e.node_ids.size()));
            } catch (const DegenerateElementError& err) {
                any_degenerate = true;
                report.degenerate.push_back("trial " + std::to_string(t) + ": element " + std::to_string(e.id) +
                                            " degenerate (" + err.what() + ")");
            }
        }
        if (any_degenerate) {
            report.degenerate.push_back("trial " + std::to_string(t) + ": model-level checks skipped");
            continue;
        }
        check_model(report, trial);
    }
    return report;
}

}  // namespace formfind::tools
