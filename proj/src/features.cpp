#include "tap/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tap {

const char* feature_mode_name(FeatureMode m) {
    return m == FeatureMode::AveragePool ? "average_pool" : "uniform16";
}

FeatureMode parse_feature_mode(const std::string& s) {
    if (s == "average_pool") return FeatureMode::AveragePool;
    if (s == "uniform16") return FeatureMode::UniformSample16;
    throw std::invalid_argument("unknown feature mode: " + s);
}

std::vector<float> window_feature(const VideoRecord& v, const TemporalWindow& w, FeatureMode mode) {
    if (!w.valid_in(v.frame_count)) {
        throw std::invalid_argument("window [" + std::to_string(w.left) + "," +
                                    std::to_string(w.right) + ") outside video " + v.id);
    }
    const int dim = v.feature_dim;
    std::vector<double> acc(dim, 0.0);
    int n = 0;
    if (mode == FeatureMode::AveragePool) {
        for (int f = w.left; f < w.right; ++f) {
            const auto row = v.frame(f);
            for (int j = 0; j < dim; ++j) acc[j] += row[j];
        }
        n = w.span();
    } else {
        constexpr int kSamples = 16;
        for (int i = 0; i < kSamples; ++i) {
            const int f = w.left + static_cast<int>(static_cast<std::int64_t>(i) * w.span() / kSamples);
            const auto row = v.frame(f);
            for (int j = 0; j < dim; ++j) acc[j] += row[j];
        }
        n = kSamples;
    }
    std::vector<float> out(dim);
    for (int j = 0; j < dim; ++j) out[j] = static_cast<float>(acc[j] / n);
    return out;
}

void SyntheticSpec::validate() const {
    if (video_count < 1) throw std::invalid_argument("video_count must be >= 1");
    if (feature_dim < 1) throw std::invalid_argument("feature_dim must be >= 1");
    if (class_names.empty()) throw std::invalid_argument("class_names must not be empty");
    if (len_min < 1 || len_max < len_min) throw std::invalid_argument("bad video length range");
    if (k_min < 0 || k_max < k_min) throw std::invalid_argument("bad instance count range");
    if (inst_len_min < 1 || inst_len_max < inst_len_min)
        throw std::invalid_argument("bad instance length range");
    if (gap_min < 0) throw std::invalid_argument("gap_min must be >= 0");
    if (sigma < 0.0) throw std::invalid_argument("sigma must be >= 0");
    if (ramp < 0) throw std::invalid_argument("ramp must be >= 0");
    // worst case must fit the shortest video, otherwise placement can fail
    const std::int64_t need = static_cast<std::int64_t>(k_max) * inst_len_max +
                              static_cast<std::int64_t>(std::max(0, k_max - 1)) * gap_min;
    if (need > len_min) {
        throw std::invalid_argument("infeasible spec: " + std::to_string(k_max) + " instances of up to " +
                                    std::to_string(inst_len_max) + " frames plus gaps cannot fit a " +
                                    std::to_string(len_min) + "-frame video");
    }
}

std::vector<std::vector<float>> make_class_embeddings(std::uint64_t seed, int class_count, int dim) {
    Rng rng(derive_seed(seed, 0x7061646573ull));
    std::vector<std::vector<float>> embs;
    embs.reserve(class_count + 1);
    for (int c = 0; c <= class_count; ++c) {  // last one is background
        std::vector<float> e(dim);
        double norm2 = 0.0;
        for (int j = 0; j < dim; ++j) {
            const double x = gaussian(rng);
            e[j] = static_cast<float>(x);
            norm2 += x * x;
        }
        const double inv = 1.0 / std::sqrt(norm2);
        for (int j = 0; j < dim; ++j) e[j] = static_cast<float>(e[j] * inv);
        embs.push_back(std::move(e));
    }
    return embs;
}

namespace {

// Place k non-overlapping instances separated by >= gap_min, distributing
// the leftover slack uniformly across the k+1 gaps.
std::vector<TemporalWindow> place_instances(int video_len, const std::vector<int>& lengths,
                                            int gap_min, Rng& rng) {
    const int k = static_cast<int>(lengths.size());
    std::int64_t used = 0;
    for (int l : lengths) used += l;
    used += static_cast<std::int64_t>(std::max(0, k - 1)) * gap_min;
    std::int64_t slack = video_len - used;
    if (slack < 0) throw std::runtime_error("instance placement does not fit");

    std::vector<std::int64_t> extra(k + 1, 0);
    for (int i = 0; i < k + 1; ++i) {
        const std::int64_t e = slack > 0 ? uniform_int(rng, 0, slack) : 0;
        extra[i] = e;
        slack -= e;
    }
    extra[k] += slack;

    std::vector<TemporalWindow> out;
    out.reserve(k);
    std::int64_t cursor = 0;
    for (int i = 0; i < k; ++i) {
        cursor += extra[i];
        if (i > 0) cursor += gap_min;
        out.push_back(TemporalWindow{static_cast<int>(cursor), static_cast<int>(cursor + lengths[i])});
        cursor += lengths[i];
    }
    return out;
}

}  // namespace

std::vector<VideoRecord> generate_synthetic_dataset(const SyntheticSpec& spec, std::uint64_t seed) {
    spec.validate();
    const int dim = spec.feature_dim;
    const int classes = spec.class_count();
    const auto embs = make_class_embeddings(seed, classes, dim);
    const auto& bg = embs[classes];

    std::vector<VideoRecord> videos;
    videos.reserve(spec.video_count);
    for (int vi = 0; vi < spec.video_count; ++vi) {
        Rng rng(derive_seed(seed, 1000 + static_cast<std::uint64_t>(vi)));
        VideoRecord v;
        char name[32];
        std::snprintf(name, sizeof(name), "video_%04d", vi);
        v.id = name;
        v.feature_dim = dim;
        v.class_count = classes;
        v.frame_count = static_cast<int>(uniform_int(rng, spec.len_min, spec.len_max));

        const int k = static_cast<int>(uniform_int(rng, spec.k_min, spec.k_max));
        std::vector<int> lengths(k);
        for (int i = 0; i < k; ++i)
            lengths[i] = static_cast<int>(uniform_int(rng, spec.inst_len_min, spec.inst_len_max));
        const auto spans = place_instances(v.frame_count, lengths, spec.gap_min, rng);
        for (int i = 0; i < k; ++i) {
            const int cls = static_cast<int>(uniform_int(rng, 0, classes - 1));
            v.ground_truths.push_back(GroundTruth{spans[i], cls});
        }

        v.frame_features.assign(static_cast<std::size_t>(v.frame_count) * dim, 0.0f);
        for (int f = 0; f < v.frame_count; ++f) {
            const float* src = bg.data();
            double blend = 0.0;  // weight of the class embedding
            for (const auto& gt : v.ground_truths) {
                if (f >= gt.window.left && f < gt.window.right) {
                    const int dist = std::min(f - gt.window.left, gt.window.right - 1 - f);
                    blend = spec.ramp == 0
                                ? 1.0
                                : std::min(1.0, static_cast<double>(dist + 1) / (spec.ramp + 1));
                    src = embs[gt.class_id].data();
                    break;
                }
            }
            float* dst = v.frame_features.data() + static_cast<std::size_t>(f) * dim;
            for (int j = 0; j < dim; ++j) {
                double x = blend == 0.0 ? bg[j] : (blend >= 1.0 ? src[j] : blend * src[j] + (1.0 - blend) * bg[j]);
                if (spec.sigma > 0.0) x += spec.sigma * gaussian(rng);
                dst[j] = static_cast<float>(x);
            }
        }
        videos.push_back(std::move(v));
    }
    return videos;
}

}  // namespace tap
