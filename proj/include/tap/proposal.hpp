#pragma once

#include <optional>
#include <string>

#include "tap/geometry.hpp"

namespace tap {

/// A candidate interval submitted to recall/AP evaluation. class_id is -1
/// until a classifier assigns one (-1 also means background).
struct Proposal {
    std::string video_id;
    TemporalWindow window;
    double score = 0.0;
    bool is_trigger = false;
    int class_id = -1;
    std::optional<TemporalWindow> regressed_window;

    /// Matching and ranking use the regressed window when present.
    const TemporalWindow& eval_window() const {
        return regressed_window ? *regressed_window : window;
    }
};

}  // namespace tap
