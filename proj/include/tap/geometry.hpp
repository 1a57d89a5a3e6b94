#pragma once

#include <cstdint>
#include <string>

#include "tap/rng.hpp"

namespace tap {

/// A temporal window [left, right) over frame indices. span = right - left.
struct TemporalWindow {
    int left = 0;
    int right = 0;

    int span() const { return right - left; }
    bool valid() const { return left >= 0 && left < right; }
    bool valid_in(int video_len) const { return valid() && right <= video_len; }

    bool operator==(const TemporalWindow&) const = default;
};

/// The seven actions available to the search agent. Ordinals are stable:
/// they index Q-network outputs and the one-hot action history rows.
enum class AgentAction : int {
    MoveLeft = 0,
    MoveRight = 1,
    ExpandLeft = 2,
    ExpandRight = 3,
    Shrink = 4,
    Jump = 5,
    Trigger = 6,
};

constexpr int kActionCount = 7;

const char* action_name(AgentAction a);

enum class JumpMode {
    RandomSide,   // training: equal-span window one span away, side uniform
    ForwardLeap,  // testing: deterministic translation right by 2*d
};

struct TransformConfig {
    double alpha = 0.2;   // step size as a fraction of the current span
    int min_span = 8;
    JumpMode jump_mode = JumpMode::RandomSide;
};

/// Step distance for a window: round(alpha * span), at least 1 frame.
int transform_step(const TemporalWindow& w, const TransformConfig& cfg);

/// Temporal IoU of two windows: span(intersection) / span(union), in [0, 1].
double iou(const TemporalWindow& w, const TemporalWindow& g);

/// Shift a window inside [0, video_len], preserving span where possible,
/// and grow it to min_span (or the whole video if shorter) if undersized.
TemporalWindow clamp_window(std::int64_t left, std::int64_t right, int video_len, int min_span);

/// Apply one of the six transform actions. Trigger is not a transform and
/// is rejected. The rng is consumed only by Jump in RandomSide mode.
TemporalWindow apply_transform(const TemporalWindow& w, AgentAction a, const TransformConfig& cfg,
                               int video_len, Rng& rng);

/// The jump transform on its own: random relocation one span away during
/// training, a deterministic double-step leap forward during testing.
TemporalWindow jump(const TemporalWindow& w, const TransformConfig& cfg, int video_len, Rng& rng);

}  // namespace tap
