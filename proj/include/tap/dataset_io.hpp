#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "tap/features.hpp"

namespace tap {

/// A dataset directory on disk: manifest.json plus one .tapv file per video
/// (frame count, ground truths, float32 frame-feature matrix).
struct Dataset {
    std::uint64_t seed = 0;
    SyntheticSpec spec;
    std::vector<VideoRecord> videos;

    int feature_dim() const { return spec.feature_dim; }
    int class_count() const { return spec.class_count(); }

    const VideoRecord* find_video(const std::string& id) const;

    /// Videos containing at least one instance of class c, with their
    /// ground truths filtered down to that class.
    std::vector<VideoRecord> videos_for_class(int c) const;
};

void save_dataset(const std::filesystem::path& dir, const Dataset& ds);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace tap
