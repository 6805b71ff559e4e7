#include "formfind/history.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>

namespace formfind {

std::string format_number(double value) {
    char buffer[32];
    const int written = std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return std::string(buffer, static_cast<std::size_t>(written));
}

void write_history_csv(std::ostream& out, std::span<const HistoryRecord> history) {
    out << "step,pi,grad_norm,residual_norm,alpha\n";
    for (const HistoryRecord& h : history) {
        out << h.step << ',' << (h.pi ? format_number(*h.pi) : std::string()) << ','
            << format_number(h.grad_norm) << ',' << format_number(h.residual_norm) << ','
            << format_number(h.alpha) << '\n';
    }
}

std::string history_csv(std::span<const HistoryRecord> history) {
    std::ostringstream out;
    write_history_csv(out, history);
    return out.str();
}

}  // namespace formfind
