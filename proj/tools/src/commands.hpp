#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "formfind/solver.hpp"

namespace formfind::tools {

enum ExitCode : int { exit_ok = 0, exit_error = 1, exit_not_converged = 2 };

struct SolveOptions {
    std::filesystem::path model;
    std::optional<double> alpha;
    std::optional<std::string> method;
    std::optional<int> max_steps;
    std::optional<std::uint64_t> seed;
    double range = 2.5;
    std::optional<std::string> alpha_schedule;  // "0.2:1000,0.05:1000"
    std::optional<std::filesystem::path> out;
    std::optional<std::filesystem::path> report;  // defaults next to --out
    std::optional<std::filesystem::path> history;
};

/// Parses "alpha:steps,alpha:steps,...". Throws ValidationError.
std::vector<AlphaStage> parse_schedule(const std::string& text);

/// Report of a finished run as JSON.
nlohmann::json run_report(const RunResult& result, double wall_seconds);

/// Where the report goes when only --out is given: "<stem>.report.json".
std::filesystem::path default_report_path(const std::filesystem::path& out);

int cmd_solve(const SolveOptions& options, std::ostream& out, std::ostream& err);
int cmd_check_gradients(const std::filesystem::path& model, int trials, std::ostream& out, std::ostream& err);
int cmd_generate(const std::string& kind, const std::map<std::string, double>& params,
                 const std::optional<std::filesystem::path>& path, std::ostream& out, std::ostream& err);

}  // namespace formfind::tools
