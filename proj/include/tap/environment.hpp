#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tap/features.hpp"
#include "tap/geometry.hpp"

namespace tap {

constexpr int kHistoryDepth = 10;

/// Rolling record of the last 10 actions, row 0 most recent. Flattens to a
/// 10x7 one-hot block appended to the window feature.
class ActionHistory {
public:
    ActionHistory() { rows_.fill(-1); }

    void push(AgentAction a) {
        for (int i = kHistoryDepth - 1; i > 0; --i) rows_[i] = rows_[i - 1];
        rows_[0] = static_cast<int>(a);
    }

    int row(int i) const { return rows_[i]; }  // -1 = empty row

    void append_flat(std::vector<double>& out) const {
        for (int i = 0; i < kHistoryDepth; ++i)
            for (int j = 0; j < kActionCount; ++j) out.push_back(rows_[i] == j ? 1.0 : 0.0);
    }

    bool operator==(const ActionHistory&) const = default;

private:
    std::array<int, kHistoryDepth> rows_;
};

struct AgentState {
    std::vector<float> feature;
    ActionHistory history;

    /// feature ++ flattened history, dimension feature_dim + 70.
    std::vector<double> flatten() const {
        std::vector<double> x;
        x.reserve(feature.size() + kHistoryDepth * kActionCount);
        for (float f : feature) x.push_back(f);
        history.append_flat(x);
        return x;
    }
};

AgentState make_state(const VideoRecord& v, const TemporalWindow& w, const ActionHistory& history,
                      FeatureMode mode);

struct RewardConfig {
    double eta = 3.0;  // trigger reward magnitude
    double tau = 0.5;  // trigger IoU threshold
    bool punish_stall = false;  // score a zero IoU delta as -1 instead of 0
};

/// Best IoU of w against any ground truth of the video (0 when none).
double best_iou(const VideoRecord& v, const TemporalWindow& w);

/// Sign-of-improvement step reward: max_i sign(IoU(w_next,g_i) - IoU(w,g_i)).
/// Requires at least one ground truth.
double step_reward(const VideoRecord& v, const TemporalWindow& w, const TemporalWindow& w_next,
                   bool punish_stall = false);

/// +eta when some ground truth overlaps w at IoU >= tau, else -eta.
double trigger_reward(const VideoRecord& v, const TemporalWindow& w, const RewardConfig& cfg);

enum class EpisodeMode { Train, Test };

struct EpisodeConfig {
    int max_steps = 15;          // test-time budget per search
    int train_step_budget = 40;  // steps per training episode
    FeatureMode feature_mode = FeatureMode::AveragePool;
    TransformConfig transform;
    RewardConfig reward;
    bool forced_jump_training = true;
    int min_init_span = 32;
    int max_init_span = 128;
    int test_init_span = 64;
};

struct StepOutcome {
    AgentState next_state;
    double reward = 0.0;
    bool terminated = false;
    TemporalWindow window;                  // window after the action
    std::optional<bool> trigger_correct;    // present iff the action was Trigger
    AgentAction executed = AgentAction::MoveLeft;  // differs from the chosen action on forced jumps
};

/// One search episode over a single video. Training episodes run to a fixed
/// step budget and survive triggers (a correct trigger relocates the window
/// and starts a fresh history); test episodes stop on Trigger or max_steps.
class Episode {
public:
    Episode(const VideoRecord& video, EpisodeMode mode, const EpisodeConfig& cfg,
            TemporalWindow start, Rng& rng);

    static TemporalWindow random_start(const VideoRecord& video, const EpisodeConfig& cfg, Rng& rng);

    StepOutcome step(AgentAction chosen);

    const AgentState& state() const { return state_; }
    const TemporalWindow& window() const { return window_; }
    bool terminated() const { return terminated_; }
    int steps_taken() const { return steps_; }

private:
    const VideoRecord& video_;
    EpisodeMode mode_;
    EpisodeConfig cfg_;
    Rng& rng_;
    TemporalWindow window_;
    ActionHistory history_;
    AgentState state_;
    bool terminated_ = false;
    int steps_ = 0;
};

/// What a policy returns for one state: the action plus the value the
/// proposal scorer should attach to the attended window (max Q for learned
/// policies, 0 for the oracle and random baselines).
struct PolicyDecision {
    AgentAction action;
    double value = 0.0;
};

using Policy = std::function<PolicyDecision(const AgentState&, const TemporalWindow&)>;

/// One attended region of a test-time search, annotated for scoring,
/// tracing and evaluation.
struct VisitedWindow {
    TemporalWindow window;
    double value = 0.0;   // policy value at the state that produced this window
    bool is_trigger = false;
    int search_index = 0;
    int step_index = 0;   // 1-based step within the search
    AgentAction action = AgentAction::MoveLeft;
    double reward = 0.0;
    double iou_best = 0.0;
};

struct SearchResult {
    std::vector<VisitedWindow> visited;
    int search_count = 0;
};

/// Sequential test-time protocol: searches sweep the video left to right,
/// each restarting from the back bound of its predecessor's final window.
/// Jumps leap forward deterministically.
SearchResult test_search(const VideoRecord& video, const Policy& policy, const EpisodeConfig& cfg);

/// CSV rows (step,action,left,right,reward,iou_best,triggered) for a trace.
std::string trace_csv_header(bool with_search_column);
std::string trace_csv_row(const VisitedWindow& w, bool with_search_column);

}  // namespace tap
