#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "formfind/model.hpp"

namespace formfind {

struct HistoryRecord {
    int step = 0;
    std::optional<double> pi;  // absent whenever elastic elements take part
    double grad_norm = 0.0;
    double residual_norm = 0.0;
    double alpha = 0.0;

    friend bool operator==(const HistoryRecord&, const HistoryRecord&) = default;
};

struct SolverState {
    Eigen::VectorXd x;
    Eigen::VectorXd q;  // three-term memory; stays zero for two-term runs
    int step = 0;
    std::vector<HistoryRecord> history;
    SolverParams params;
};

/// Normalised search direction. `converged` marks a vanishing gradient, in
/// which case `r` is the zero vector.
struct Direction {
    Eigen::VectorXd r;
    bool converged = false;
};

/// grad / |grad|, or the zero direction when |grad| <= 1e-14.
/// Throws DivergenceError for non-finite input, naming the largest DOF.
Direction search_direction(const Eigen::VectorXd& grad);

/// x <- x - alpha r.
SolverState two_term_step(SolverState state, const Direction& r, double alpha);

/// q <- damping q - alpha r;  x <- x + alpha q.
SolverState three_term_step(SolverState state, const Direction& r, double alpha, double damping);

/// Everything the loop needs at one configuration.
struct Evaluation {
    std::optional<double> pi;
    Eigen::VectorXd grad;  // constrained gradient (or omega) over the unknowns
    double grad_norm = 0.0;
    double residual_norm = 0.0;
    Eigen::VectorXd lambda;  // empty without constraints
    bool regularized = false;
};

/// Gradient of the functional part plus assembled elastic omega minus
/// loads, projected by the dual estimate when constraints are present.
Evaluation evaluate(const Model& model, const Layout& layout, const Eigen::VectorXd& x);

/// Uniform values in [-range, range] from a seeded 64-bit Mersenne twister.
/// The double conversion is done by hand so that the sequence is identical
/// on every standard library.
Eigen::VectorXd random_positions(std::uint64_t seed, int size, double range);

struct ParameterChange {
    int step = 0;
    std::string name;
    std::string detail;
};

/// Stepwise relaxation of one model. Parameter setters take effect from the
/// next step and reset the three-term memory q.
class Relaxation {
public:
    explicit Relaxation(Model model);

    const Model& model() const noexcept { return model_; }
    const SolverState& state() const noexcept { return state_; }
    const Layout& layout() const noexcept { return layout_; }
    const std::vector<ParameterChange>& changes() const noexcept { return changes_; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

    /// Evaluation at the current x (cached until x or the model changes).
    const Evaluation& current();

    /// True when both |gradient| < grad_tol and |residual| < residual_tol.
    bool converged();

    /// One iteration: evaluate, record history, step, correct constraints.
    /// Returns false (and does nothing) when already converged.
    bool step();

    /// Applies residual corrections alone until |residual| < residual_tol or
    /// `max_iterations` is reached. Returns the number of corrections.
    int settle_constraints(int max_iterations = 1000);

    /// Model with the current free-node positions written back.
    Model solved_model() const;

    void set_alpha(double alpha);
    void set_damping(double damping);
    void set_constraint_relax(double relax);
    void set_weight(int element_id, double weight);
    void set_target(int element_id, double target);
    void move_fixed_node(int node_id, const Vec3& position);
    void set_positions(const Eigen::VectorXd& x);
    void randomize(std::uint64_t seed, double range);

private:
    void record_change(std::string name, std::string detail);
    void reset_memory();
    void warn(std::string message);
    void invalidate() { cache_.reset(); }

    Model model_;
    Layout layout_;
    SolverState state_;
    std::optional<Evaluation> cache_;
    std::vector<ParameterChange> changes_;
    std::vector<std::string> warnings_;
};

struct RunOptions {
    std::optional<std::uint64_t> seed;  // random initial positions when set
    double random_range = 2.5;
    bool settle_constraints = true;
};

struct RunResult {
    Model model;  // final coordinates
    SolverState state;
    Evaluation terminal;
    bool converged = false;
    std::optional<std::uint64_t> seed;
    std::vector<ParameterChange> changes;
    std::vector<std::string> warnings;
};

/// Iterates until convergence or solver.max_steps, then (with constraints)
/// settles the remaining residual.
RunResult run(const Model& model, const RunOptions& options = {});

/// One stage of a manual step-size schedule.
struct AlphaStage {
    double alpha = 0.2;
    int steps = 0;
};

/// Runs the stages back to back on one Relaxation, as an operator lowering
/// the step-size factor by hand would. Stops early on convergence.
RunResult run_schedule(const Model& model, const std::vector<AlphaStage>& stages,
                       const RunOptions& options = {});

}  // namespace formfind
