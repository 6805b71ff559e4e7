#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "formfind/solver.hpp"

namespace formfind {

/// CSV with header `step,pi,grad_norm,residual_norm,alpha`; pi is left empty
/// when absent. Values use 17 significant digits.
void write_history_csv(std::ostream& out, std::span<const HistoryRecord> history);
std::string history_csv(std::span<const HistoryRecord> history);

/// Decimal text with round-trip precision (17 significant digits).
std::string format_number(double value);

}  // namespace formfind
