#pragma once

// Generation history as CSV. Only deterministic columns are emitted
// (wall-clock timing stays out of the file) so reruns of the same config
// produce byte-identical output.

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rcrc/trainer.hpp"

namespace rcrc {

/// Shortest exact decimal form of a double ("%.17g" round-trips bitwise).
inline std::string csv_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string history_csv(const std::vector<GenerationReport>& history) {
    std::string out = "generation,best_index,best_mean";
    const std::size_t n = history.empty() ? 0 : history.front().scores.size();
    for (std::size_t i = 0; i < n; ++i) out += ",score_" + std::to_string(i);
    out += "\n";
    for (const auto& report : history) {
        out += std::to_string(report.generation);
        out += "," + std::to_string(report.best_index);
        out += "," + csv_double(report.best_mean);
        for (double s : report.scores) out += "," + csv_double(s);
        out += "\n";
    }
    return out;
}

inline void write_history_csv(const std::string& path,
                              const std::vector<GenerationReport>& history) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("history: cannot open " + path + " for writing");
    out << history_csv(history);
    if (!out) throw std::runtime_error("history: write failed for " + path);
}

}  // namespace rcrc
