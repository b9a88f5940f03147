#pragma once

#include <string>
#include <vector>

namespace tagprof {

/// Collects non-fatal warnings raised while a pipeline step runs.
/// Functions take an optional pointer; passing nullptr discards warnings.
struct Diagnostics {
    std::vector<std::string> warnings;

    void warn(std::string message) { warnings.push_back(std::move(message)); }
    bool empty() const noexcept { return warnings.empty(); }
};

inline void warn(Diagnostics* diag, std::string message) {
    if (diag != nullptr) {
        diag->warn(std::move(message));
    }
}

}  // namespace tagprof
