#include "tap/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>

#include "tap/util.hpp"

namespace tap {

void ReplayMemory::push(Transition t) {
    if (capacity_ == 0) return;
    if (buffer_.size() < capacity_) {
        buffer_.push_back(std::move(t));
    } else {
        buffer_[head_] = std::move(t);
        head_ = (head_ + 1) % capacity_;
    }
}

const Transition& ReplayMemory::at(std::size_t i) const {
    if (i >= buffer_.size()) throw std::out_of_range("replay index");
    if (buffer_.size() < capacity_) return buffer_[i];
    return buffer_[(head_ + i) % capacity_];
}

std::vector<const Transition*> ReplayMemory::sample_batch(std::size_t batch_size, Rng& rng) const {
    if (buffer_.size() < batch_size) {
        throw std::runtime_error("replay memory not warm: " + std::to_string(buffer_.size()) +
                                 " < " + std::to_string(batch_size));
    }
    std::vector<const Transition*> batch;
    batch.reserve(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i) {
        batch.push_back(&buffer_[uniform_below(rng, buffer_.size())]);
    }
    return batch;
}

double epsilon_at(double progress, const TrainConfig& cfg) {
    if (progress < 0.0 || progress > 1.0) throw std::invalid_argument("progress outside [0,1]");
    // two-term form keeps both endpoints exact
    return cfg.eps_start * (1.0 - progress) + cfg.eps_end * progress;
}

AgentAction select_action(const NetworkParams& qnet, const AgentState& state, double epsilon,
                          Rng& rng) {
    if (epsilon > 0.0 && uniform_real(rng) < epsilon) {
        return static_cast<AgentAction>(uniform_below(rng, kActionCount));
    }
    const std::vector<double> q = forward(qnet, state.flatten(), false, nullptr, nullptr);
    int best = 0;
    for (int a = 1; a < kActionCount; ++a)
        if (q[a] > q[best]) best = a;
    return static_cast<AgentAction>(best);
}

double td_target(const Transition& t, const NetworkParams& target_net, double gamma) {
    if (t.terminal) return t.reward;
    const std::vector<double> q = forward(target_net, *t.next_state, false, nullptr, nullptr);
    double max_q = q[0];
    for (std::size_t a = 1; a < q.size(); ++a) max_q = std::max(max_q, q[a]);
    return t.reward + gamma * max_q;
}

std::string TrainingLog::to_csv() const {
    std::string out = "epoch,avg_reward,avg_td_loss,avg_reg_loss,epsilon,trigger_precision\n";
    for (const auto& e : epochs) {
        out += std::to_string(e.epoch);
        out += ',';
        out += format_double(e.avg_reward);
        out += ',';
        out += format_double(e.avg_td_loss);
        out += ',';
        out += format_double(e.avg_reg_loss);
        out += ',';
        out += format_double(e.epsilon);
        out += ',';
        out += format_double(e.trigger_precision);
        out += '\n';
    }
    return out;
}

namespace {

struct MinibatchTrainer {
    const TrainConfig& cfg;
    NetworkParams& qnet;
    NetworkParams& regressor;
    NetworkParams target;
    OptimizerState& qnet_opt;
    OptimizerState& reg_opt;
    GradientSet q_grads;
    GradientSet r_grads;
    std::uint64_t updates = 0;

    MinibatchTrainer(const TrainConfig& c, NetworkParams& q, NetworkParams& r, OptimizerState& qo,
                     OptimizerState& ro)
        : cfg(c), qnet(q), regressor(r), target(q), qnet_opt(qo), reg_opt(ro),
          q_grads(make_gradient_set(q)), r_grads(make_gradient_set(r)) {}

    // One TD minibatch plus an L1 update on its correct-trigger records.
    // Returns (td_loss, reg_loss or nan when the batch held no triggers).
    std::pair<double, double> update(const ReplayMemory& memory, Rng& rng) {
        const NetworkParams& bootstrap = cfg.use_target_net ? target : qnet;
        const auto batch = memory.sample_batch(cfg.batch_size, rng);

        zero_gradients(q_grads);
        double td_loss = 0.0;
        ForwardCache cache;
        int n_end = 0;
        double reg_loss = 0.0;
        zero_gradients(r_grads);
        const int feature_dim = regressor.config.input_dim;
        for (const Transition* t : batch) {
            const double target_value = td_target(*t, bootstrap, cfg.gamma);
            forward(qnet, t->state, true, &rng, &cache);
            td_loss += backward_td_acc(qnet, cache, static_cast<int>(t->action), target_value,
                                       q_grads);
            if (t->regression_target) {
                forward(regressor, std::span<const double>(t->state.data(), feature_dim), true,
                        &rng, &cache);
                const double tgt[2] = {t->regression_target->o_s, t->regression_target->o_e};
                reg_loss += backward_l1_acc(regressor, cache, tgt, r_grads);
                ++n_end;
            }
        }
        scale_gradients(q_grads, 1.0 / cfg.batch_size);
        sgd_step(qnet, q_grads, qnet_opt);
        ++updates;
        if (cfg.use_target_net && cfg.target_sync_interval > 0 &&
            updates % static_cast<std::uint64_t>(cfg.target_sync_interval) == 0) {
            target = qnet;
        }
        if (n_end > 0) {
            scale_gradients(r_grads, 1.0 / n_end);
            sgd_step(regressor, r_grads, reg_opt);
        }
        return {td_loss / cfg.batch_size,
                n_end > 0 ? reg_loss / n_end : std::numeric_limits<double>::quiet_NaN()};
    }
};

// Target offsets against the highest-IoU ground truth of the triggered window.
std::optional<OffsetPair> trigger_regression_target(const VideoRecord& v, const TemporalWindow& w) {
    const GroundTruth* best = nullptr;
    double best_v = 0.0;
    for (const auto& gt : v.ground_truths) {
        const double o = iou(w, gt.window);
        if (o > best_v) {
            best_v = o;
            best = &gt;
        }
    }
    if (best == nullptr) return std::nullopt;
    return encode_offsets(w, best->window);
}

}  // namespace

TrainedModel train_class_model(const std::vector<VideoRecord>& videos, const TrainConfig& cfg,
                               const EpisodeConfig& env_cfg, const TrainedModel* resume_from) {
    if (videos.empty()) throw std::invalid_argument("train_class_model needs at least one video");
    for (const auto& v : videos)
        if (v.ground_truths.empty())
            throw std::invalid_argument("training video without ground truths: " + v.id);
    if (cfg.batch_size > static_cast<int>(cfg.replay_capacity))
        throw std::invalid_argument("batch_size exceeds replay capacity");

    const int feature_dim = videos.front().feature_dim;

    TrainedModel model;
    if (resume_from) {
        model = *resume_from;
        model.log = TrainingLog{};
        if (model.qnet.config.input_dim != feature_dim + kHistoryDepth * kActionCount)
            throw std::invalid_argument("resume checkpoint does not match the dataset dimension");
    } else {
        NetworkConfig q_cfg;
        q_cfg.input_dim = feature_dim + kHistoryDepth * kActionCount;
        q_cfg.hidden_dims = cfg.hidden_dims;
        q_cfg.output_dim = kActionCount;
        q_cfg.dropout_rate = cfg.dropout;
        q_cfg.seed = derive_seed(cfg.seed, 11);

        NetworkConfig r_cfg = q_cfg;
        r_cfg.input_dim = feature_dim;
        r_cfg.output_dim = 2;
        r_cfg.seed = derive_seed(cfg.seed, 13);

        model.qnet = init_network(q_cfg);
        model.regressor = init_network(r_cfg);
        model.qnet_opt = OptimizerState{cfg.lr_dqn, cfg.lr_decay_dqn, 0};
        model.reg_opt = OptimizerState{cfg.lr_reg, cfg.lr_decay_reg, 0};
    }

    if (cfg.epochs <= 0) return model;

    Rng rng(derive_seed(cfg.seed, 17));
    ReplayMemory memory(cfg.replay_capacity);
    MinibatchTrainer trainer(cfg, model.qnet, model.regressor, model.qnet_opt, model.reg_opt);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double progress = cfg.epochs > 1 ? static_cast<double>(epoch) / (cfg.epochs - 1) : 0.0;
        const double epsilon = epsilon_at(progress, cfg);

        EpochStats stats;
        stats.epoch = epoch;
        stats.epsilon = epsilon;
        double td_loss_sum = 0.0;
        int td_updates = 0;
        double reg_loss_sum = 0.0;
        int reg_updates = 0;
        int triggers = 0;
        int correct_triggers = 0;

        for (const VideoRecord& video : videos) {
            for (int e = 0; e < cfg.episodes_per_video; ++e) {
                Episode ep(video, EpisodeMode::Train, env_cfg,
                           Episode::random_start(video, env_cfg, rng), rng);
                double episode_reward = 0.0;
                while (!ep.terminated()) {
                    const AgentAction chosen = select_action(model.qnet, ep.state(), epsilon, rng);
                    const std::vector<double> state_flat = ep.state().flatten();
                    const TemporalWindow window_before = ep.window();
                    const StepOutcome out = ep.step(chosen);
                    episode_reward += out.reward;

                    Transition t;
                    t.state = state_flat;
                    t.action = out.executed;
                    t.reward = out.reward;
                    t.terminal = out.executed == AgentAction::Trigger;
                    if (!t.terminal) t.next_state = out.next_state.flatten();
                    if (out.trigger_correct) {
                        ++triggers;
                        if (*out.trigger_correct) {
                            ++correct_triggers;
                            t.regression_target = trigger_regression_target(video, window_before);
                        }
                    }
                    memory.push(std::move(t));

                    if (memory.size() >= static_cast<std::size_t>(cfg.batch_size)) {
                        const auto [td, reg] = trainer.update(memory, rng);
                        td_loss_sum += td;
                        ++td_updates;
                        if (!std::isnan(reg)) {
                            reg_loss_sum += reg;
                            ++reg_updates;
                        }
                    }
                }
                stats.episode_rewards.push_back(episode_reward);
            }
        }

        double reward_sum = 0.0;
        for (double r : stats.episode_rewards) reward_sum += r;
        stats.avg_reward =
            stats.episode_rewards.empty() ? 0.0 : reward_sum / stats.episode_rewards.size();
        stats.avg_td_loss = td_updates > 0 ? td_loss_sum / td_updates : 0.0;
        stats.avg_reg_loss = reg_updates > 0 ? reg_loss_sum / reg_updates : 0.0;
        stats.trigger_precision =
            triggers > 0 ? static_cast<double>(correct_triggers) / triggers : 0.0;
        model.log.epochs.push_back(std::move(stats));
    }
    return model;
}

Policy greedy_policy(const NetworkParams& qnet) {
    return [&qnet](const AgentState& state, const TemporalWindow&) {
        const std::vector<double> q = forward(qnet, state.flatten(), false, nullptr, nullptr);
        int best = 0;
        for (int a = 1; a < kActionCount; ++a)
            if (q[a] > q[best]) best = a;
        return PolicyDecision{static_cast<AgentAction>(best), q[best]};
    };
}

Policy uniform_random_policy(std::uint64_t seed) {
    auto rng = std::make_shared<Rng>(seed);
    return [rng](const AgentState&, const TemporalWindow&) {
        return PolicyDecision{static_cast<AgentAction>(uniform_below(*rng, kActionCount)), 0.0};
    };
}

}  // namespace tap
