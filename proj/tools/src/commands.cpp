#include "commands.hpp"

#include <chrono>
#include <fstream>
#include <ostream>

#include "formfind/element_forces.hpp"
#include "formfind/errors.hpp"
#include "formfind/history.hpp"
#include "formfind/model_io.hpp"
#include "formfind/scenarios.hpp"
#include "gradient_check.hpp"

namespace formfind::tools {

using nlohmann::json;

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw Error("cannot write " + path.string());
    file << text;
    if (!file) throw Error("failed writing " + path.string());
}

json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

std::vector<AlphaStage> parse_schedule(const std::string& text) {
    std::vector<AlphaStage> stages;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string part = text.substr(pos, comma - pos);
        const std::size_t colon = part.find(':');
        if (colon == std::string::npos) throw ValidationError("schedule stage \"" + part + "\" is not alpha:steps");
        AlphaStage stage;
        try {
            std::size_t used = 0;
            stage.alpha = std::stod(part.substr(0, colon), &used);
            if (used != colon) throw std::invalid_argument(part);
            const std::string steps = part.substr(colon + 1);
            stage.steps = std::stoi(steps, &used);
            if (used != steps.size()) throw std::invalid_argument(part);
        } catch (const std::logic_error&) {
            throw ValidationError("schedule stage \"" + part + "\" is not alpha:steps");
        }
        if (!(stage.alpha > 0.0) || stage.steps < 0) {
            throw ValidationError("schedule stage \"" + part + "\" needs alpha > 0 and steps >= 0");
        }
        stages.push_back(stage);
        pos = comma + 1;
    }
    return stages;
}

std::filesystem::path default_report_path(const std::filesystem::path& out) {
    std::filesystem::path p = out;
    p.replace_extension();
    p += ".report.json";
    return p;
}

json run_report(const RunResult& result, double wall_seconds) {
    const Model& m = result.model;
    const Layout layout(m);
    const Eigen::VectorXd x = gather_positions(m, layout.dofs());

    json report;
    report["converged"] = result.converged;
    report["steps"] = result.state.step;
    report["wall_time_s"] = wall_seconds;
    json terminal = {{"grad_norm", result.terminal.grad_norm}, {"residual_norm", result.terminal.residual_norm}};
    terminal["pi"] = result.terminal.pi ? json(*result.terminal.pi) : json(nullptr);
    report["terminal"] = std::move(terminal);
    report["alpha"] = result.state.params.alpha;
    report["method"] = std::string(to_string(result.state.params.method));

    json lambda = json::array();
    const auto constrained = layout.bindings(ElementRole::constrained);
    for (std::size_t k = 0; k < constrained.size() && static_cast<Eigen::Index>(k) < result.terminal.lambda.size(); ++k) {
        lambda.push_back({{"element", m.elements[constrained[k].element].id},
                          {"value", result.terminal.lambda[static_cast<Eigen::Index>(k)]}});
    }
    report["lambda"] = std::move(lambda);

    json elements = json::array();
    for (const ElementState& s : element_states(m, layout, x)) {
        json e = {{"id", s.element_id}, {"measure", s.measure}};
        if (s.stress.size() > 0) e["stress"] = matrix_json(s.stress);
        elements.push_back(std::move(e));
    }
    report["elements"] = std::move(elements);
    report["seed"] = result.seed ? json(*result.seed) : json(nullptr);

    json changes = json::array();
    for (const ParameterChange& c : result.changes) {
        changes.push_back({{"step", c.step}, {"name", c.name}, {"detail", c.detail}});
    }
    report["changes"] = std::move(changes);
    report["warnings"] = result.warnings;
    return report;
}

int cmd_solve(const SolveOptions& options, std::ostream& out, std::ostream& err) {
    try {
        Model model = load_model(options.model);
        if (options.alpha) model.solver.alpha = *options.alpha;
        if (options.method) {
            const auto method = parse_method(*options.method);
            if (!method) throw ValidationError("method must be two_term or three_term");
            model.solver.method = *method;
        }
        if (options.max_steps) model.solver.max_steps = *options.max_steps;
        validate(model.solver);

        RunOptions run_options;
        run_options.seed = options.seed;
        run_options.random_range = options.range;

        const auto start = std::chrono::steady_clock::now();
        const RunResult result = options.alpha_schedule
                                     ? run_schedule(model, parse_schedule(*options.alpha_schedule), run_options)
                                     : run(model, run_options);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        if (options.out) {
            save_model(result.model, *options.out);
        }
        const std::optional<std::filesystem::path> report_path =
            options.report ? options.report
                           : (options.out ? std::optional(default_report_path(*options.out)) : std::nullopt);
        if (report_path) write_text(*report_path, run_report(result, wall).dump(2) + "\n");
        if (options.history) write_text(*options.history, history_csv(result.state.history));

        out << (result.converged ? "converged" : "not converged") << " after " << result.state.step
            << " steps: |gradient| " << format_number(result.terminal.grad_norm) << ", |residual| "
            << format_number(result.terminal.residual_norm);
        if (result.terminal.pi) out << ", pi " << format_number(*result.terminal.pi);
        out << "\n";
        for (const std::string& w : result.warnings) err << "warning: " << w << "\n";
        return result.converged ? exit_ok : exit_not_converged;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_error;
    }
}

int cmd_check_gradients(const std::filesystem::path& path, int trials, std::ostream& out, std::ostream& err) {
    try {
        const Model model = load_model(path);
        if (trials <= 0) {
            err << "warning: no trials requested, nothing checked\n";
            return exit_ok;
        }
        const GradientReport report = check_gradients(model, trials);
        for (const std::string& line : report.degenerate) err << "degenerate: " << line << "\n";
        for (const auto& [category, worst] : report.worst) {
            out << category << ": worst relative error " << format_number(worst) << " over "
                << report.checked.at(category) << " checks\n";
        }
        constexpr double tolerance = 1e-5;
        const bool ok = report.passed(tolerance);
        out << (ok ? "all gradients agree" : "gradient mismatch") << " (tolerance " << tolerance << ")\n";
        return ok ? exit_ok : exit_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_error;
    }
}

int cmd_generate(const std::string& kind, const std::map<std::string, double>& params,
                 const std::optional<std::filesystem::path>& path, std::ostream& out, std::ostream& err) {
    try {
        const auto parsed = parse_scenario_kind(kind);
        if (!parsed) throw ValidationError("unknown scenario kind \"" + kind + "\"");
        const GeneratedScenario g = generate({*parsed, params});
        if (path) {
            save_model(g.model, *path);
            for (const auto& [key, value] : g.metadata) out << key << " = " << format_number(value) << "\n";
        } else {
            out << serialize_model(g.model);
        }
        return exit_ok;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_error;
    }
}

}  // namespace formfind::tools
