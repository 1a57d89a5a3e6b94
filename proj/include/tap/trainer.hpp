#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tap/environment.hpp"
#include "tap/net.hpp"
#include "tap/regressor.hpp"

namespace tap {

/// One replay record. States are stored flattened (feature ++ history);
/// the first feature_dim entries double as the regressor input. Trigger
/// transitions are terminal: the search ends there, so no next state.
struct Transition {
    std::vector<double> state;
    AgentAction action = AgentAction::MoveLeft;
    double reward = 0.0;
    std::optional<std::vector<double>> next_state;
    bool terminal = false;
    std::optional<OffsetPair> regression_target;  // present for correct triggers
};

/// Bounded ring buffer; insertion beyond capacity evicts the oldest record.
class ReplayMemory {
public:
    explicit ReplayMemory(std::size_t capacity) : capacity_(capacity) {}

    void push(Transition t);
    std::size_t size() const { return buffer_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& at(std::size_t i) const;  // 0 = oldest surviving record

    /// Uniform sampling with replacement; throws until size >= batch_size.
    std::vector<const Transition*> sample_batch(std::size_t batch_size, Rng& rng) const;

private:
    std::size_t capacity_;
    std::size_t head_ = 0;  // index of the oldest record once full
    std::vector<Transition> buffer_;
};

struct TrainConfig {
    int epochs = 30;
    int episodes_per_video = 3;
    int batch_size = 200;
    double gamma = 0.9;
    double eps_start = 1.0;
    double eps_end = 0.1;
    int target_sync_interval = 100;  // updates between frozen-target syncs
    bool use_target_net = true;
    std::size_t replay_capacity = 2000;
    std::vector<int> hidden_dims = {256, 128};
    double dropout = 0.2;
    double lr_dqn = 1e-3;
    double lr_decay_dqn = 5e-5;
    double lr_reg = 1e-4;
    double lr_decay_reg = 9e-5;
    std::uint64_t seed = 1;
};

/// Linear anneal over training progress in [0, 1].
double epsilon_at(double progress, const TrainConfig& cfg);

/// Epsilon-greedy: uniform with probability epsilon, else the Q argmax
/// with ties broken toward the lowest ordinal.
AgentAction select_action(const NetworkParams& qnet, const AgentState& state, double epsilon,
                          Rng& rng);

/// Target value for one transition: r for terminal records, else
/// r + gamma * max_a Q_target(s', a).
double td_target(const Transition& t, const NetworkParams& target_net, double gamma);

struct EpochStats {
    int epoch = 0;
    double avg_reward = 0.0;    // mean total episode reward
    double avg_td_loss = 0.0;
    double avg_reg_loss = 0.0;
    double epsilon = 0.0;
    double trigger_precision = 0.0;
    std::vector<double> episode_rewards;
};

struct TrainingLog {
    std::vector<EpochStats> epochs;
    std::string to_csv() const;
};

struct TrainedModel {
    NetworkParams qnet;
    NetworkParams regressor;
    OptimizerState qnet_opt;
    OptimizerState reg_opt;
    TrainingLog log;
};

/// Full per-class training loop: episodes feed the replay memory, one
/// minibatch TD update per environment step once the memory is warm, with
/// the regressor trained on the correct-trigger records of each minibatch.
/// Passing resume_from continues that model (optimizer steps included)
/// instead of starting fresh.
TrainedModel train_class_model(const std::vector<VideoRecord>& videos, const TrainConfig& cfg,
                               const EpisodeConfig& env_cfg,
                               const TrainedModel* resume_from = nullptr);

/// Greedy policy over a trained Q-net; value is the max Q at the state.
Policy greedy_policy(const NetworkParams& qnet);

/// Baseline policy choosing uniformly among all seven actions.
Policy uniform_random_policy(std::uint64_t seed);

}  // namespace tap
