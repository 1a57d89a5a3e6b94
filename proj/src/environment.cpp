#include "tap/environment.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace tap {

AgentState make_state(const VideoRecord& v, const TemporalWindow& w, const ActionHistory& history,
                      FeatureMode mode) {
    return AgentState{window_feature(v, w, mode), history};
}

double best_iou(const VideoRecord& v, const TemporalWindow& w) {
    double best = 0.0;
    for (const auto& gt : v.ground_truths) best = std::max(best, iou(w, gt.window));
    return best;
}

double step_reward(const VideoRecord& v, const TemporalWindow& w, const TemporalWindow& w_next,
                   bool punish_stall) {
    if (v.ground_truths.empty()) {
        throw std::invalid_argument("step_reward requires a video with ground truths: " + v.id);
    }
    int best = -1;
    for (const auto& gt : v.ground_truths) {
        const double delta = iou(w_next, gt.window) - iou(w, gt.window);
        const int s = delta > 0.0 ? 1 : (delta < 0.0 ? -1 : 0);
        best = std::max(best, s);
        if (best == 1) break;
    }
    if (best == 0 && punish_stall) best = -1;
    return static_cast<double>(best);
}

double trigger_reward(const VideoRecord& v, const TemporalWindow& w, const RewardConfig& cfg) {
    return best_iou(v, w) >= cfg.tau ? cfg.eta : -cfg.eta;
}

Episode::Episode(const VideoRecord& video, EpisodeMode mode, const EpisodeConfig& cfg,
                 TemporalWindow start, Rng& rng)
    : video_(video), mode_(mode), cfg_(cfg), rng_(rng), window_(start) {
    state_ = make_state(video_, window_, history_, cfg_.feature_mode);
}

TemporalWindow Episode::random_start(const VideoRecord& video, const EpisodeConfig& cfg, Rng& rng) {
    const int span = static_cast<int>(uniform_int(rng, cfg.min_init_span, cfg.max_init_span));
    const int max_left = std::max(0, video.frame_count - span);
    const int left = static_cast<int>(uniform_int(rng, 0, max_left));
    return clamp_window(left, left + span, video.frame_count, cfg.transform.min_span);
}

StepOutcome Episode::step(AgentAction chosen) {
    if (terminated_) throw std::logic_error("step() on a terminated episode");

    AgentAction executed = chosen;
    if (mode_ == EpisodeMode::Train && cfg_.forced_jump_training &&
        best_iou(video_, window_) == 0.0) {
        executed = AgentAction::Jump;
    }

    StepOutcome out;
    out.executed = executed;
    ++steps_;

    const int budget = mode_ == EpisodeMode::Train ? cfg_.train_step_budget : cfg_.max_steps;

    if (executed == AgentAction::Trigger) {
        out.reward = trigger_reward(video_, window_, cfg_.reward);
        out.trigger_correct = out.reward > 0.0;
        out.window = window_;
        if (mode_ == EpisodeMode::Test) {
            terminated_ = true;
        } else {
            terminated_ = steps_ >= budget;
            if (*out.trigger_correct) {
                // search restarts elsewhere: relocate and clear the history
                TransformConfig tc = cfg_.transform;
                tc.jump_mode = JumpMode::RandomSide;
                window_ = jump(window_, tc, video_.frame_count, rng_);
                history_ = ActionHistory{};
            } else {
                history_.push(executed);
            }
        }
    } else {
        const TemporalWindow next = apply_transform(window_, executed, cfg_.transform,
                                                    video_.frame_count, rng_);
        out.reward = video_.ground_truths.empty()
                         ? 0.0
                         : step_reward(video_, window_, next, cfg_.reward.punish_stall);
        window_ = next;
        out.window = next;
        history_.push(executed);
        terminated_ = steps_ >= budget;
    }

    state_ = make_state(video_, window_, history_, cfg_.feature_mode);
    out.next_state = state_;
    out.terminated = terminated_;
    return out;
}

SearchResult test_search(const VideoRecord& video, const Policy& policy, const EpisodeConfig& cfg) {
    EpisodeConfig test_cfg = cfg;
    test_cfg.transform.jump_mode = JumpMode::ForwardLeap;

    SearchResult result;
    Rng rng(0);  // unused: forward-leap jumps are deterministic
    const int len = video.frame_count;
    const int min_span = std::max(1, cfg.transform.min_span);

    int origin = 0;
    while (origin < len - min_span || (origin == 0 && result.search_count == 0)) {
        const TemporalWindow start =
            clamp_window(origin, origin + cfg.test_init_span, len, min_span);
        Episode ep(video, EpisodeMode::Test, test_cfg, start, rng);
        const int search = result.search_count++;
        int step = 0;
        std::size_t pending = result.visited.size();  // rows awaiting their window's value
        while (!ep.terminated()) {
            const PolicyDecision d = policy(ep.state(), ep.window());
            // d.value scores the currently attended window, which is the
            // previous row's post-action window (or the start window)
            if (result.visited.size() > pending) result.visited.back().value = d.value;
            const StepOutcome out = ep.step(d.action);
            ++step;
            VisitedWindow vw;
            vw.window = out.window;
            vw.value = d.value;  // provisional; overwritten once this window is scored
            vw.is_trigger = d.action == AgentAction::Trigger;
            vw.search_index = search;
            vw.step_index = step;
            vw.action = d.action;
            vw.reward = out.reward;
            vw.iou_best = best_iou(video, out.window);
            result.visited.push_back(vw);
        }
        if (!result.visited.empty() && result.visited.size() > pending &&
            !result.visited.back().is_trigger) {
            // final window of an exhausted search: score it directly
            result.visited.back().value =
                policy(ep.state(), ep.window()).value;
        }
        origin = std::max(ep.window().right, origin + 1);
    }
    return result;
}

std::string trace_csv_header(bool with_search_column) {
    return with_search_column ? "search,step,action,left,right,reward,iou_best,triggered"
                              : "step,action,left,right,reward,iou_best,triggered";
}

std::string trace_csv_row(const VisitedWindow& w, bool with_search_column) {
    char buf[160];
    if (with_search_column) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%s,%d,%d,%.9g,%.9g,%d", w.search_index, w.step_index,
                      action_name(w.action), w.window.left, w.window.right, w.reward, w.iou_best,
                      w.is_trigger ? 1 : 0);
    } else {
        std::snprintf(buf, sizeof(buf), "%d,%s,%d,%d,%.9g,%.9g,%d", w.step_index,
                      action_name(w.action), w.window.left, w.window.right, w.reward, w.iou_best,
                      w.is_trigger ? 1 : 0);
    }
    return buf;
}

}  // namespace tap
