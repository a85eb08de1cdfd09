#pragma once

#include <string>

#include "pfbart/sampler.hpp"

namespace pfbart {

// Versioned decimal-text trace format (format "pfbart-trace v1", documented
// in the README): config echo, per-draw sigma, per-variable split counts,
// per-row fitted sums (raw scale), then the forests. Field order is fixed;
// reals are printed with 17 significant digits so reloads are exact.
std::string serialize_trace(const Trace& trace);
Trace parse_trace(const std::string& text);

void save_trace(const Trace& trace, const std::string& path);
Trace load_trace(const std::string& path);

}  // namespace pfbart
