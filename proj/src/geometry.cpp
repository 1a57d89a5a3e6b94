#include "tap/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tap {

const char* action_name(AgentAction a) {
    switch (a) {
        case AgentAction::MoveLeft: return "move_left";
        case AgentAction::MoveRight: return "move_right";
        case AgentAction::ExpandLeft: return "expand_left";
        case AgentAction::ExpandRight: return "expand_right";
        case AgentAction::Shrink: return "shrink";
        case AgentAction::Jump: return "jump";
        case AgentAction::Trigger: return "trigger";
    }
    return "?";
}

int transform_step(const TemporalWindow& w, const TransformConfig& cfg) {
    return std::max(1, static_cast<int>(std::lround(cfg.alpha * w.span())));
}

double iou(const TemporalWindow& w, const TemporalWindow& g) {
    const int inter = std::min(w.right, g.right) - std::max(w.left, g.left);
    if (inter <= 0) return 0.0;
    const int uni = w.span() + g.span() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

TemporalWindow clamp_window(std::int64_t left, std::int64_t right, int video_len, int min_span) {
    const std::int64_t floor_span = std::min<std::int64_t>(std::max(min_span, 1), video_len);
    std::int64_t span = right - left;
    if (span < floor_span) {
        // grow around the midpoint
        left = (left + right - floor_span) / 2;
        right = left + floor_span;
        span = floor_span;
    }
    if (span >= video_len) return TemporalWindow{0, video_len};
    if (left < 0) {
        right -= left;
        left = 0;
    } else if (right > video_len) {
        left -= right - video_len;
        right = video_len;
    }
    return TemporalWindow{static_cast<int>(left), static_cast<int>(right)};
}

TemporalWindow apply_transform(const TemporalWindow& w, AgentAction a, const TransformConfig& cfg,
                               int video_len, Rng& rng) {
    if (a == AgentAction::Trigger) {
        throw std::invalid_argument("trigger is not a window transform");
    }
    if (a == AgentAction::Jump) {
        return jump(w, cfg, video_len, rng);
    }
    const std::int64_t d = transform_step(w, cfg);
    std::int64_t l = w.left;
    std::int64_t r = w.right;
    switch (a) {
        case AgentAction::MoveLeft:
            l -= d;
            r -= d;
            break;
        case AgentAction::MoveRight:
            l += d;
            r += d;
            break;
        case AgentAction::ExpandLeft:
            l -= d;
            break;
        case AgentAction::ExpandRight:
            r += d;
            break;
        case AgentAction::Shrink:
            // split d so the span always shrinks by exactly d
            l += d / 2;
            r -= d - d / 2;
            break;
        default:
            break;
    }
    return clamp_window(l, r, video_len, cfg.min_span);
}

TemporalWindow jump(const TemporalWindow& w, const TransformConfig& cfg, int video_len, Rng& rng) {
    const std::int64_t span = w.span();
    if (cfg.jump_mode == JumpMode::ForwardLeap) {
        const std::int64_t d = transform_step(w, cfg);
        return clamp_window(w.left + 2 * d, w.right + 2 * d, video_len, cfg.min_span);
    }
    // RandomSide: same span, one full span of gap away from the current site
    if (coin_flip(rng)) {
        return clamp_window(w.right + span, w.right + 2 * span, video_len, cfg.min_span);
    }
    return clamp_window(w.left - 2 * span, w.left - span, video_len, cfg.min_span);
}

}  // namespace tap
