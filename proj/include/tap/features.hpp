#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tap/geometry.hpp"
#include "tap/rng.hpp"

namespace tap {

struct GroundTruth {
    TemporalWindow window;
    int class_id = 0;
};

/// One labeled video: per-frame feature rows plus ground-truth intervals.
/// Immutable after generation/loading.
struct VideoRecord {
    std::string id;
    int frame_count = 0;
    int feature_dim = 0;
    int class_count = 0;
    std::vector<float> frame_features;  // frame_count x feature_dim, row-major
    std::vector<GroundTruth> ground_truths;

    std::span<const float> frame(int f) const {
        return {frame_features.data() + static_cast<std::size_t>(f) * feature_dim,
                static_cast<std::size_t>(feature_dim)};
    }
};

enum class FeatureMode {
    UniformSample16,  // mean over 16 evenly spaced frames of the window
    AveragePool,      // mean over every frame of the window
};

const char* feature_mode_name(FeatureMode m);
FeatureMode parse_feature_mode(const std::string& s);

/// Fixed-dimension descriptor of (video, window) under the given mode.
/// Deterministic; throws std::invalid_argument on an out-of-bounds window.
std::vector<float> window_feature(const VideoRecord& v, const TemporalWindow& w, FeatureMode mode);

/// Parameters of the synthetic dataset generator.
struct SyntheticSpec {
    int video_count = 20;
    int len_min = 600;
    int len_max = 1200;
    int k_min = 1;        // instances per video
    int k_max = 3;
    int gap_min = 48;     // min separation between instances
    int inst_len_min = 40;
    int inst_len_max = 160;
    double sigma = 0.3;   // per-coordinate gaussian noise
    int ramp = 5;         // linear blend width at instance boundaries
    int feature_dim = 64;
    std::vector<std::string> class_names = {"class_a", "class_b"};

    int class_count() const { return static_cast<int>(class_names.size()); }
    void validate() const;  // throws std::invalid_argument on an infeasible spec
};

/// Unit-norm embeddings derived from the dataset seed alone; index
/// class_count holds the background embedding.
std::vector<std::vector<float>> make_class_embeddings(std::uint64_t seed, int class_count, int dim);

/// Generate the full dataset. Reproducible: the same (spec, seed) pair
/// yields byte-identical videos.
std::vector<VideoRecord> generate_synthetic_dataset(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace tap
