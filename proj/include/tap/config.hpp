#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tap/environment.hpp"
#include "tap/trainer.hpp"

namespace tap {

/// Every tunable of the pipeline in one flat record. Defaults follow the
/// published settings where they exist. Serialized as flat key-value JSON;
/// unknown keys are rejected.
struct RunConfig {
    // window transforms
    double alpha = 0.2;
    int min_span = 8;
    // rewards
    double eta = 3.0;
    double tau = 0.5;
    bool punish_stall = false;
    // episode control
    int max_steps = 15;
    int train_step_budget = 40;
    bool forced_jump_training = true;
    int min_init_span = 32;
    int max_init_span = 128;
    int test_init_span = 64;
    std::string feature_mode = "average_pool";
    // q-learning
    double gamma = 0.9;
    double eps_start = 1.0;
    double eps_end = 0.1;
    int replay_capacity = 2000;
    int batch_size = 200;
    int epochs = 30;
    int episodes_per_video = 3;
    int target_sync_interval = 100;
    bool use_target_net = true;
    // networks
    std::vector<int> hidden_dims = {256, 128};
    double dropout = 0.2;
    double lr_dqn = 1e-3;
    double lr_decay_dqn = 5e-5;
    double lr_reg = 1e-4;
    double lr_decay_reg = 9e-5;
    // evaluation
    double trigger_bonus = 1e6;
    int eval_avg_proposals = 50;
    int eval_max_k = 100;
    double centroid_threshold = 0.5;
    bool nms = false;
    double nms_iou = 0.5;
    // randomness
    std::uint64_t seed = 1;

    void validate() const;

    EpisodeConfig episode_config() const;
    TrainConfig train_config() const;
};

RunConfig config_from_json_text(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
std::string config_to_json_text(const RunConfig& cfg);

}  // namespace tap
