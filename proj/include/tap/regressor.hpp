#pragma once

#include <functional>
#include <vector>

#include "tap/geometry.hpp"
#include "tap/net.hpp"
#include "tap/proposal.hpp"

namespace tap {

/// Span-relative boundary offsets between a predicted window and a target:
/// o_s = (pred.left - gt.left) / span(pred), o_e likewise for right.
struct OffsetPair {
    double o_s = 0.0;
    double o_e = 0.0;
};

OffsetPair encode_offsets(const TemporalWindow& pred, const TemporalWindow& gt);

/// Inverse of encode_offsets, rounded to whole frames and clamped into the
/// video. Degenerate offsets fall back to a min-span window at the midpoint.
TemporalWindow decode_offsets(const TemporalWindow& pred, const OffsetPair& o, int video_len,
                              int min_span);

/// Attach a regressed window to every trigger proposal; everything else
/// passes through untouched. feature_of binds the video lookup and feature
/// mode; video_len_of the frame count of the proposal's video.
void refine_proposals(std::vector<Proposal>& proposals, const NetworkParams& regressor,
                      const std::function<std::vector<float>(const Proposal&)>& feature_of,
                      const std::function<int(const Proposal&)>& video_len_of, int min_span);

}  // namespace tap
