#include "tap/config.hpp"

#include <json.hpp>

#include "tap/util.hpp"

namespace tap {

using nlohmann::json;

void RunConfig::validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DataError("alpha must be in (0,1]");
    if (min_span < 2) throw DataError("min_span must be >= 2");
    if (eta <= 0.0) throw DataError("eta must be > 0");
    if (!(tau > 0.0 && tau < 1.0)) throw DataError("tau must be in (0,1)");
    if (max_steps < 1) throw DataError("max_steps must be >= 1");
    if (train_step_budget < 1) throw DataError("train_step_budget must be >= 1");
    if (min_init_span < 2 || max_init_span < min_init_span)
        throw DataError("bad init span range");
    if (test_init_span < 2) throw DataError("test_init_span must be >= 2");
    parse_feature_mode(feature_mode);
    if (!(gamma >= 0.0 && gamma < 1.0)) throw DataError("gamma must be in [0,1)");
    if (eps_start < eps_end) throw DataError("eps_start must be >= eps_end");
    if (eps_start > 1.0 || eps_end < 0.0) throw DataError("epsilon endpoints outside [0,1]");
    if (replay_capacity < 1) throw DataError("replay_capacity must be >= 1");
    if (batch_size < 1 || batch_size > replay_capacity)
        throw DataError("batch_size must be in [1, replay_capacity]");
    if (epochs < 0) throw DataError("epochs must be >= 0");
    if (episodes_per_video < 1) throw DataError("episodes_per_video must be >= 1");
    if (hidden_dims.empty()) throw DataError("hidden_dims must not be empty");
    for (int h : hidden_dims)
        if (h < 1) throw DataError("hidden_dims entries must be >= 1");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw DataError("dropout must be in [0,1)");
    if (lr_dqn <= 0.0 || lr_reg <= 0.0) throw DataError("learning rates must be > 0");
    if (lr_decay_dqn < 0.0 || lr_decay_reg < 0.0) throw DataError("decay rates must be >= 0");
    if (eval_avg_proposals < 1) throw DataError("eval_avg_proposals must be >= 1");
    if (eval_max_k < 1) throw DataError("eval_max_k must be >= 1");
    if (!(nms_iou > 0.0 && nms_iou <= 1.0)) throw DataError("nms_iou must be in (0,1]");
}

EpisodeConfig RunConfig::episode_config() const {
    EpisodeConfig e;
    e.max_steps = max_steps;
    e.train_step_budget = train_step_budget;
    e.feature_mode = parse_feature_mode(feature_mode);
    e.transform.alpha = alpha;
    e.transform.min_span = min_span;
    e.reward.eta = eta;
    e.reward.tau = tau;
    e.reward.punish_stall = punish_stall;
    e.forced_jump_training = forced_jump_training;
    e.min_init_span = min_init_span;
    e.max_init_span = max_init_span;
    e.test_init_span = test_init_span;
    return e;
}

TrainConfig RunConfig::train_config() const {
    TrainConfig t;
    t.epochs = epochs;
    t.episodes_per_video = episodes_per_video;
    t.batch_size = batch_size;
    t.gamma = gamma;
    t.eps_start = eps_start;
    t.eps_end = eps_end;
    t.target_sync_interval = target_sync_interval;
    t.use_target_net = use_target_net;
    t.replay_capacity = static_cast<std::size_t>(replay_capacity);
    t.hidden_dims = hidden_dims;
    t.dropout = dropout;
    t.lr_dqn = lr_dqn;
    t.lr_decay_dqn = lr_decay_dqn;
    t.lr_reg = lr_reg;
    t.lr_decay_reg = lr_decay_reg;
    t.seed = seed;
    return t;
}

namespace {

template <typename T>
void read_key(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

const char* kKnownKeys[] = {
    "alpha", "min_span", "eta", "tau", "punish_stall", "max_steps", "train_step_budget",
    "forced_jump_training", "min_init_span", "max_init_span", "test_init_span", "feature_mode",
    "gamma", "eps_start", "eps_end", "replay_capacity", "batch_size", "epochs",
    "episodes_per_video", "target_sync_interval", "use_target_net", "hidden_dims", "dropout",
    "lr_dqn", "lr_decay_dqn", "lr_reg", "lr_decay_reg", "trigger_bonus", "eval_avg_proposals",
    "eval_max_k", "centroid_threshold", "nms", "nms_iou", "seed"};

}  // namespace

RunConfig config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("bad config: ") + e.what());
    }
    if (!j.is_object()) throw DataError("config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* k : kKnownKeys)
            if (key == k) known = true;
        if (!known) throw DataError("unknown config key: " + key);
    }

    RunConfig cfg;
    try {
        read_key(j, "alpha", cfg.alpha);
        read_key(j, "min_span", cfg.min_span);
        read_key(j, "eta", cfg.eta);
        read_key(j, "tau", cfg.tau);
        read_key(j, "punish_stall", cfg.punish_stall);
        read_key(j, "max_steps", cfg.max_steps);
        read_key(j, "train_step_budget", cfg.train_step_budget);
        read_key(j, "forced_jump_training", cfg.forced_jump_training);
        read_key(j, "min_init_span", cfg.min_init_span);
        read_key(j, "max_init_span", cfg.max_init_span);
        read_key(j, "test_init_span", cfg.test_init_span);
        read_key(j, "feature_mode", cfg.feature_mode);
        read_key(j, "gamma", cfg.gamma);
        read_key(j, "eps_start", cfg.eps_start);
        read_key(j, "eps_end", cfg.eps_end);
        read_key(j, "replay_capacity", cfg.replay_capacity);
        read_key(j, "batch_size", cfg.batch_size);
        read_key(j, "epochs", cfg.epochs);
        read_key(j, "episodes_per_video", cfg.episodes_per_video);
        read_key(j, "target_sync_interval", cfg.target_sync_interval);
        read_key(j, "use_target_net", cfg.use_target_net);
        read_key(j, "hidden_dims", cfg.hidden_dims);
        read_key(j, "dropout", cfg.dropout);
        read_key(j, "lr_dqn", cfg.lr_dqn);
        read_key(j, "lr_decay_dqn", cfg.lr_decay_dqn);
        read_key(j, "lr_reg", cfg.lr_reg);
        read_key(j, "lr_decay_reg", cfg.lr_decay_reg);
        read_key(j, "trigger_bonus", cfg.trigger_bonus);
        read_key(j, "eval_avg_proposals", cfg.eval_avg_proposals);
        read_key(j, "eval_max_k", cfg.eval_max_k);
        read_key(j, "centroid_threshold", cfg.centroid_threshold);
        read_key(j, "nms", cfg.nms);
        read_key(j, "nms_iou", cfg.nms_iou);
        read_key(j, "seed", cfg.seed);
    } catch (const json::exception& e) {
        throw DataError(std::string("bad config value: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    return config_from_json_text(read_file_text(path));
}

std::string config_to_json_text(const RunConfig& cfg) {
    json j;
    j["alpha"] = cfg.alpha;
    j["min_span"] = cfg.min_span;
    j["eta"] = cfg.eta;
    j["tau"] = cfg.tau;
    j["punish_stall"] = cfg.punish_stall;
    j["max_steps"] = cfg.max_steps;
    j["train_step_budget"] = cfg.train_step_budget;
    j["forced_jump_training"] = cfg.forced_jump_training;
    j["min_init_span"] = cfg.min_init_span;
    j["max_init_span"] = cfg.max_init_span;
    j["test_init_span"] = cfg.test_init_span;
    j["feature_mode"] = cfg.feature_mode;
    j["gamma"] = cfg.gamma;
    j["eps_start"] = cfg.eps_start;
    j["eps_end"] = cfg.eps_end;
    j["replay_capacity"] = cfg.replay_capacity;
    j["batch_size"] = cfg.batch_size;
    j["epochs"] = cfg.epochs;
    j["episodes_per_video"] = cfg.episodes_per_video;
    j["target_sync_interval"] = cfg.target_sync_interval;
    j["use_target_net"] = cfg.use_target_net;
    j["hidden_dims"] = cfg.hidden_dims;
    j["dropout"] = cfg.dropout;
    j["lr_dqn"] = cfg.lr_dqn;
    j["lr_decay_dqn"] = cfg.lr_decay_dqn;
    j["lr_reg"] = cfg.lr_reg;
    j["lr_decay_reg"] = cfg.lr_decay_reg;
    j["trigger_bonus"] = cfg.trigger_bonus;
    j["eval_avg_proposals"] = cfg.eval_avg_proposals;
    j["eval_max_k"] = cfg.eval_max_k;
    j["centroid_threshold"] = cfg.centroid_threshold;
    j["nms"] = cfg.nms;
    j["nms_iou"] = cfg.nms_iou;
    j["seed"] = cfg.seed;
    return j.dump(2) + "\n";
}

}  // namespace tap
