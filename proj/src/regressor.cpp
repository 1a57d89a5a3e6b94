#include "tap/regressor.hpp"

#include <cmath>
#include <stdexcept>

namespace tap {

OffsetPair encode_offsets(const TemporalWindow& pred, const TemporalWindow& gt) {
    if (pred.span() <= 0) throw std::invalid_argument("encode_offsets: zero-span prediction");
    const double span = pred.span();
    return OffsetPair{(pred.left - gt.left) / span, (pred.right - gt.right) / span};
}

TemporalWindow decode_offsets(const TemporalWindow& pred, const OffsetPair& o, int video_len,
                              int min_span) {
    const double span = pred.span();
    const std::int64_t left = std::llround(pred.left - o.o_s * span);
    const std::int64_t right = std::llround(pred.right - o.o_e * span);
    if (left >= right) {
        // degenerate offsets: rebuild a min-span window around the midpoint
        const std::int64_t mid = (left + right) / 2;
        return clamp_window(mid - min_span / 2, mid - min_span / 2 + min_span, video_len, min_span);
    }
    return clamp_window(left, right, video_len, min_span);
}

void refine_proposals(std::vector<Proposal>& proposals, const NetworkParams& regressor,
                      const std::function<std::vector<float>(const Proposal&)>& feature_of,
                      const std::function<int(const Proposal&)>& video_len_of, int min_span) {
    for (Proposal& p : proposals) {
        if (!p.is_trigger) continue;
        const std::vector<float> feature = feature_of(p);
        std::vector<double> x(feature.begin(), feature.end());
        const std::vector<double> out = forward(regressor, x, false, nullptr, nullptr);
        if (out.size() != 2) throw std::invalid_argument("regressor must have two outputs");
        p.regressed_window =
            decode_offsets(p.window, OffsetPair{out[0], out[1]}, video_len_of(p), min_span);
    }
}

}  // namespace tap
