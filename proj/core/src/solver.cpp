#include "formfind/solver.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "formfind/constraints.hpp"
#include "formfind/element_forces.hpp"
#include "formfind/errors.hpp"
#include "formfind/functionals.hpp"
#include "formfind/history.hpp"

namespace formfind {

Direction search_direction(const Eigen::VectorXd& grad) {
    if (!grad.allFinite()) {
        Eigen::Index worst = 0;
        double worst_value = -1.0;
        for (Eigen::Index i = 0; i < grad.size(); ++i) {
            const double v = std::isfinite(grad[i]) ? std::abs(grad[i]) : INFINITY;
            if (v > worst_value) {
                worst_value = v;
                worst = i;
            }
        }
        throw DivergenceError("non-finite gradient (largest entry at dof " + std::to_string(worst) +
                                  "); try a smaller alpha",
                              -1);
    }
    Direction out;
    const double norm = grad.norm();
    if (norm <= 1e-14) {
        out.r = Eigen::VectorXd::Zero(grad.size());
        out.converged = true;
        return out;
    }
    out.r = grad / norm;
    return out;
}

SolverState two_term_step(SolverState state, const Direction& r, double alpha) {
    state.x -= alpha * r.r;
    ++state.step;
    return state;
}

SolverState three_term_step(SolverState state, const Direction& r, double alpha, double damping) {
    if (state.q.size() != state.x.size()) state.q = Eigen::VectorXd::Zero(state.x.size());
    state.q = damping * state.q - alpha * r.r;
    state.x += alpha * state.q;
    ++state.step;
    return state;
}

Evaluation evaluate(const Model& model, const Layout& layout, const Eigen::VectorXd& x) {
    Evaluation out;
    const int n = layout.dofs().size();
    Eigen::VectorXd grad_w = Eigen::VectorXd::Zero(n);

    const bool functional = !layout.bindings(ElementRole::functional).empty();
    const bool elastic = !layout.bindings(ElementRole::elastic).empty();
    if (functional) {
        FunctionalValue value = eval_pi(model, layout, x);
        grad_w += value.grad;
        if (!elastic) out.pi = value.pi;
    }
    if (elastic || !model.loads.empty()) grad_w += assemble_omega(model, layout, x).omega;

    if (!layout.bindings(ElementRole::constrained).empty()) {
        const ConstraintSystem sys = build_constraints(model, layout, x);
        DualEstimate dual = dual_estimate(grad_w, sys);
        out.grad = std::move(dual.grad);
        out.lambda = std::move(dual.lambda);
        out.regularized = dual.regularized;
        out.residual_norm = sys.residual.norm();
    } else {
        out.grad = std::move(grad_w);
    }
    out.grad_norm = out.grad.norm();
    return out;
}

Eigen::VectorXd random_positions(std::uint64_t seed, int size, double range) {
    std::mt19937_64 engine(seed);
    Eigen::VectorXd out(size);
    for (int i = 0; i < size; ++i) {
        const double unit = static_cast<double>(engine() >> 11) * 0x1.0p-53;
        out[i] = -range + 2.0 * range * unit;
    }
    return out;
}

Relaxation::Relaxation(Model model) : model_((validate(model), std::move(model))), layout_(model_) {
    state_.x = gather_positions(model_, layout_.dofs());
    state_.q = Eigen::VectorXd::Zero(state_.x.size());
    state_.params = model_.solver;
}

const Evaluation& Relaxation::current() {
    if (!cache_) {
        try {
            cache_ = evaluate(model_, layout_, state_.x);
        } catch (const DegenerateElementError& err) {
            throw DegenerateElementError("step " + std::to_string(state_.step) + ": " + err.what(),
                                         err.element_id());
        } catch (const DivergenceError& err) {
            throw DivergenceError("step " + std::to_string(state_.step) + ": " + err.what(),
                                  state_.step);
        }
        if (cache_->regularized) {
            warn("step " + std::to_string(state_.step) +
                 ": constraint Jacobian near rank deficiency, regularized dual estimate");
        }
    }
    return *cache_;
}

bool Relaxation::converged() {
    const Evaluation& ev = current();
    return ev.grad_norm < state_.params.grad_tol && ev.residual_norm < state_.params.residual_tol;
}

bool Relaxation::step() {
    if (converged()) return false;
    const Evaluation& ev = current();
    state_.history.push_back(
        {state_.step, ev.pi, ev.grad_norm, ev.residual_norm, state_.params.alpha});

    Direction r;
    try {
        r = search_direction(ev.grad);
    } catch (const DivergenceError& err) {
        throw DivergenceError("step " + std::to_string(state_.step) + ": " + err.what(), state_.step);
    }
    const SolverParams params = state_.params;
    if (params.method == Method::two_term) {
        state_ = two_term_step(std::move(state_), r, params.alpha);
    } else {
        state_ = three_term_step(std::move(state_), r, params.alpha, params.damping);
    }

    if (!layout_.bindings(ElementRole::constrained).empty()) {
        try {
            const ConstraintSystem sys = build_constraints(model_, layout_, state_.x);
            Correction c = residual_correction(state_.x, sys, state_.params.constraint_relax);
            state_.x = std::move(c.x);
            if (c.regularized) {
                warn("step " + std::to_string(state_.step) + ": regularized residual correction");
            }
        } catch (const DegenerateElementError& err) {
            throw DegenerateElementError("step " + std::to_string(state_.step) + ": " + err.what(),
                                         err.element_id());
        }
    }
    if (!state_.x.allFinite()) {
        throw DivergenceError("step " + std::to_string(state_.step) +
                                  ": positions became non-finite; try a smaller alpha",
                              state_.step);
    }
    invalidate();
    return true;
}

int Relaxation::settle_constraints(int max_iterations) {
    if (layout_.bindings(ElementRole::constrained).empty()) return 0;
    int count = 0;
    for (; count < max_iterations; ++count) {
        const ConstraintSystem sys = build_constraints(model_, layout_, state_.x);
        if (sys.residual.norm() < state_.params.residual_tol) break;
        state_.x = residual_correction(state_.x, sys, state_.params.constraint_relax).x;
        invalidate();
    }
    return count;
}

Model Relaxation::solved_model() const {
    return scatter_positions(model_, layout_.dofs(), state_.x);
}

void Relaxation::record_change(std::string name, std::string detail) {
    changes_.push_back({state_.step, std::move(name), std::move(detail)});
}

void Relaxation::warn(std::string message) {
    constexpr std::size_t limit = 50;
    if (warnings_.size() < limit) {
        warnings_.push_back(std::move(message));
    } else if (warnings_.size() == limit) {
        warnings_.push_back("further warnings suppressed");
    }
}

void Relaxation::reset_memory() { state_.q.setZero(); }

void Relaxation::set_alpha(double alpha) {
    SolverParams p = state_.params;
    p.alpha = alpha;
    validate(p);
    state_.params = p;
    model_.solver.alpha = alpha;
    reset_memory();
    record_change("alpha", format_number(alpha));
}

void Relaxation::set_damping(double damping) {
    SolverParams p = state_.params;
    p.damping = damping;
    validate(p);
    state_.params = p;
    model_.solver.damping = damping;
    record_change("damping", format_number(damping));
}

void Relaxation::set_constraint_relax(double relax) {
    SolverParams p = state_.params;
    p.constraint_relax = relax;
    validate(p);
    state_.params = p;
    model_.solver.constraint_relax = relax;
    record_change("constraint_relax", format_number(relax));
}

void Relaxation::set_weight(int element_id, double weight) {
    model_ = update_weight(model_, element_id, weight);
    invalidate();
    reset_memory();
    record_change("weight", "element " + std::to_string(element_id) + " = " + format_number(weight));
}

void Relaxation::set_target(int element_id, double target) {
    Element* e = model_.find_element(element_id);
    if (e == nullptr) throw ValidationError("unknown element " + std::to_string(element_id));
    if (e->role != ElementRole::constrained) {
        throw ValidationError("element " + std::to_string(element_id) + " is not constrained");
    }
    if (!(target > 0.0) || !std::isfinite(target)) {
        throw ValidationError("element " + std::to_string(element_id) + ": target must be > 0");
    }
    e->target = target;
    invalidate();
    reset_memory();
    record_change("target", "element " + std::to_string(element_id) + " = " + format_number(target));
}

void Relaxation::move_fixed_node(int node_id, const Vec3& position) {
    Node* node = model_.find_node(node_id);
    if (node == nullptr) throw ValidationError("unknown node " + std::to_string(node_id));
    if (!node->fixed) throw ValidationError("node " + std::to_string(node_id) + " is not fixed");
    if (!position.allFinite()) throw ValidationError("node position must be finite");
    node->position = position;
    invalidate();
    reset_memory();
    std::ostringstream detail;
    detail << "node " << node_id << " = [" << format_number(position.x()) << ","
           << format_number(position.y()) << "," << format_number(position.z()) << "]";
    record_change("fixed_node", detail.str());
}

void Relaxation::set_positions(const Eigen::VectorXd& x) {
    if (x.size() != state_.x.size()) {
        throw DimensionError("position vector has length " + std::to_string(x.size()) +
                             ", expected " + std::to_string(state_.x.size()));
    }
    state_.x = x;
    invalidate();
    reset_memory();
}

void Relaxation::randomize(std::uint64_t seed, double range) {
    if (!(range > 0.0) || !std::isfinite(range)) throw ValidationError("range must be > 0");
    set_positions(random_positions(seed, static_cast<int>(state_.x.size()), range));
    record_change("randomize", "seed " + std::to_string(seed) + " range " + format_number(range));
}

namespace {

RunResult finish(Relaxation& relax, const RunOptions& options) {
    if (options.settle_constraints) relax.settle_constraints();
    RunResult out;
    out.terminal = relax.current();
    out.converged = relax.converged();
    out.model = relax.solved_model();
    out.state = relax.state();
    out.seed = options.seed;
    out.changes = relax.changes();
    out.warnings = relax.warnings();
    return out;
}

Relaxation start(const Model& model, const RunOptions& options) {
    Relaxation relax(model);
    if (options.seed) {
        if (!(options.random_range > 0.0)) throw ValidationError("random range must be > 0");
        relax.set_positions(
            random_positions(*options.seed, relax.layout().dofs().size(), options.random_range));
    }
    return relax;
}

}  // namespace

RunResult run(const Model& model, const RunOptions& options) {
    Relaxation relax = start(model, options);
    const int max_steps = relax.state().params.max_steps;
    while (relax.state().step < max_steps && relax.step()) {
    }
    return finish(relax, options);
}

RunResult run_schedule(const Model& model, const std::vector<AlphaStage>& stages,
                       const RunOptions& options) {
    Relaxation relax = start(model, options);
    for (const AlphaStage& stage : stages) {
        if (relax.converged()) break;
        if (stage.alpha != relax.state().params.alpha) relax.set_alpha(stage.alpha);
        for (int i = 0; i < stage.steps; ++i) {
            if (!relax.step()) break;
        }
    }
    return finish(relax, options);
}

}  // namespace formfind
