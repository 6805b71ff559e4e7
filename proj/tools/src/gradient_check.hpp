#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "formfind/model.hpp"

namespace formfind::tools {

/// Worst relative error per category ("length", "area", "metric", "pi_w",
/// "omega") over all trials. Categories with nothing to check are absent.
struct GradientReport {
    std::map<std::string, double> worst;
    std::map<std::string, int> checked;
    std::vector<std::string> degenerate;  // one line per degenerate element and trial
    int trials = 0;

    bool passed(double tolerance) const;
};

/// Compares every analytic gradient the model uses with central finite
/// differences. Trial 0 uses the model as given; later trials perturb all
/// node positions by a seeded amount proportional to the model size.
GradientReport check_gradients(const Model& model, int trials, std::uint64_t seed = 1);

/// |a - b| / max(|a|, |b|), zero when both vanish.
double relative_error(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric);

}  // namespace formfind::tools
