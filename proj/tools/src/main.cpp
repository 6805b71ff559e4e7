#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "formfind/errors.hpp"
#include "formfind/model_io.hpp"
#include "server.hpp"

using namespace formfind::tools;

namespace {

std::map<std::string, double> parse_params(const std::vector<std::string>& items) {
    std::map<std::string, double> out;
    for (const std::string& item : items) {
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw formfind::ValidationError("parameter \"" + item + "\" is not name=value");
        }
        std::size_t used = 0;
        const std::string value = item.substr(eq + 1);
        double v = 0.0;
        try {
            v = std::stod(value, &used);
        } catch (const std::logic_error&) {
            used = 0;
        }
        if (used == 0 || used != value.size()) {
            throw formfind::ValidationError("parameter \"" + item + "\" needs a numeric value");
        }
        out[item.substr(0, eq)] = v;
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Form finding of tension structures by direct minimization"};
    app.require_subcommand(1);

    SolveOptions solve;
    std::string method;
    std::string schedule;
    std::string out_path, report_path, history_path;
    auto* solve_cmd = app.add_subcommand("solve", "Relax a model file");
    solve_cmd->add_option("model", solve.model, "Model file")->required();
    solve_cmd->add_option_function<double>("--alpha", [&](const double& v) { solve.alpha = v; }, "Step-size factor");
    solve_cmd->add_option("--method", method, "two_term or three_term");
    solve_cmd->add_option_function<int>("--max-steps", [&](const int& v) { solve.max_steps = v; }, "Step limit");
    solve_cmd->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& v) { solve.seed = v; },
                                                  "Random initial positions from this seed");
    solve_cmd->add_option("--range", solve.range, "Range of random initial positions")->capture_default_str();
    solve_cmd->add_option("--alpha-schedule", schedule, "Manual alpha stages, e.g. 0.2:1000,0.05:1000");
    solve_cmd->add_option("--out", out_path, "Solved model file (report goes next to it)");
    solve_cmd->add_option("--report", report_path, "Run report file");
    solve_cmd->add_option("--history", history_path, "History CSV");

    std::string check_model;
    int trials = 3;
    auto* check_cmd = app.add_subcommand("check-gradients", "Compare analytic gradients with finite differences");
    check_cmd->add_option("model", check_model, "Model file")->required();
    check_cmd->add_option("--trials", trials, "Configurations to check")->capture_default_str();

    std::string kind;
    std::vector<std::string> params;
    std::string generate_out;
    auto* generate_cmd = app.add_subcommand("generate", "Write a scenario model");
    generate_cmd->add_option("kind", kind, "Scenario kind")->required();
    generate_cmd->add_option("--param", params, "name=value (repeatable)");
    generate_cmd->add_option("--out", generate_out, "Output file (stdout if omitted)");

    int port = 8765;
    std::string serve_model;
    auto* serve_cmd = app.add_subcommand("serve", "Host a steering session over WebSocket at /session");
    serve_cmd->add_option("--port", port, "TCP port")->capture_default_str()->check(CLI::Range(0, 65535));
    serve_cmd->add_option("--model", serve_model, "Model to preload");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_error;
    }

    if (*solve_cmd) {
        if (!method.empty()) solve.method = method;
        if (!schedule.empty()) solve.alpha_schedule = schedule;
        if (!out_path.empty()) solve.out = out_path;
        if (!report_path.empty()) solve.report = report_path;
        if (!history_path.empty()) solve.history = history_path;
        return cmd_solve(solve, std::cout, std::cerr);
    }
    if (*check_cmd) return cmd_check_gradients(check_model, trials, std::cout, std::cerr);
    if (*generate_cmd) {
        try {
            const auto parsed = parse_params(params);
            return cmd_generate(kind, parsed, generate_out.empty() ? std::nullopt : std::optional(std::filesystem::path(generate_out)),
                                std::cout, std::cerr);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return exit_error;
        }
    }
    if (*serve_cmd) {
        try {
            std::optional<formfind::Model> preload;
            if (!serve_model.empty()) preload = formfind::load_model(serve_model);
            SteeringServer server(static_cast<unsigned short>(port), std::move(preload));
            std::cout << "serving ws://127.0.0.1:" << server.port() << "/session" << std::endl;
            server.run(true);
            return exit_ok;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return exit_error;
        }
    }
    return exit_error;
}
