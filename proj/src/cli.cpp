#include "tap/cli.hpp"

#include <algorithm>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <json.hpp>

#include "tap/dataset_io.hpp"
#include "tap/evaluation.hpp"
#include "tap/regressor.hpp"
#include "tap/trainer.hpp"
#include "tap/util.hpp"

namespace tap {

using nlohmann::json;

namespace {

json spec_to_json(const SyntheticSpec& spec) {
    json j;
    j["video_count"] = spec.video_count;
    j["len_min"] = spec.len_min;
    j["len_max"] = spec.len_max;
    j["k_min"] = spec.k_min;
    j["k_max"] = spec.k_max;
    j["gap_min"] = spec.gap_min;
    j["inst_len_min"] = spec.inst_len_min;
    j["inst_len_max"] = spec.inst_len_max;
    j["sigma"] = spec.sigma;
    j["ramp"] = spec.ramp;
    j["feature_dim"] = spec.feature_dim;
    j["class_names"] = spec.class_names;
    return j;
}

SyntheticSpec spec_from_json(const json& j) {
    if (!j.is_object()) throw DataError("dataset spec must be a JSON object");
    static const char* known[] = {"video_count", "len_min", "len_max", "k_min", "k_max",
                                  "gap_min", "inst_len_min", "inst_len_max", "sigma", "ramp",
                                  "feature_dim", "class_names"};
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* k : known)
            if (key == k) ok = true;
        if (!ok) throw DataError("unknown dataset spec key: " + key);
    }
    SyntheticSpec spec;
    try {
        if (j.contains("video_count")) spec.video_count = j.at("video_count").get<int>();
        if (j.contains("len_min")) spec.len_min = j.at("len_min").get<int>();
        if (j.contains("len_max")) spec.len_max = j.at("len_max").get<int>();
        if (j.contains("k_min")) spec.k_min = j.at("k_min").get<int>();
        if (j.contains("k_max")) spec.k_max = j.at("k_max").get<int>();
        if (j.contains("gap_min")) spec.gap_min = j.at("gap_min").get<int>();
        if (j.contains("inst_len_min")) spec.inst_len_min = j.at("inst_len_min").get<int>();
        if (j.contains("inst_len_max")) spec.inst_len_max = j.at("inst_len_max").get<int>();
        if (j.contains("sigma")) spec.sigma = j.at("sigma").get<double>();
        if (j.contains("ramp")) spec.ramp = j.at("ramp").get<int>();
        if (j.contains("feature_dim")) spec.feature_dim = j.at("feature_dim").get<int>();
        if (j.contains("class_names"))
            spec.class_names = j.at("class_names").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw DataError(std::string("bad dataset spec value: ") + e.what());
    }
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw DataError(e.what());
    }
    return spec;
}

void write_manifest(const std::filesystem::path& dir, const std::string& command, json inputs,
                    const json& config) {
    json m;
    m["tool"] = "taplab";
    m["command"] = command;
    m["inputs"] = std::move(inputs);
    m["config"] = config;
    std::filesystem::create_directories(dir);
    atomic_write_file(dir / "run_manifest.json", m.dump(2) + "\n");
}

struct AblationSwitches {
    FeatureMode mode;
    bool refine;
};

AblationSwitches parse_ablation(const std::string& s) {
    if (s == "full") return {FeatureMode::AveragePool, true};
    if (s == "no-pool") return {FeatureMode::UniformSample16, true};
    if (s == "no-pool-no-rgn") return {FeatureMode::UniformSample16, false};
    throw DataError("unknown ablation: " + s);
}

struct ClassModelFiles {
    int class_id = 0;
    std::string name;
    std::string dqn_file;
    std::string rgn_file;
};

json models_manifest_json(const std::vector<ClassModelFiles>& models, int feature_dim,
                          const RunConfig& cfg) {
    json m;
    m["format"] = "tap-models-v1";
    m["feature_dim"] = feature_dim;
    json classes = json::array();
    for (const auto& cm : models) {
        json c;
        c["id"] = cm.class_id;
        c["name"] = cm.name;
        c["dqn"] = cm.dqn_file;
        c["regressor"] = cm.rgn_file;
        classes.push_back(c);
    }
    m["classes"] = classes;
    m["config"] = json::parse(config_to_json_text(cfg));
    return m;
}

std::vector<ClassModelFiles> load_models_manifest(const std::filesystem::path& dir,
                                                  int* feature_dim) {
    json m;
    try {
        m = json::parse(read_file_text(dir / "models.json"));
    } catch (const json::exception& e) {
        throw DataError("bad models manifest in " + dir.string() + ": " + e.what());
    }
    if (m.value("format", "") != "tap-models-v1")
        throw DataError("unknown models format in " + dir.string());
    if (feature_dim) *feature_dim = m.at("feature_dim").get<int>();
    std::vector<ClassModelFiles> out;
    for (const auto& c : m.at("classes")) {
        ClassModelFiles cm;
        cm.class_id = c.at("id").get<int>();
        cm.name = c.at("name").get<std::string>();
        cm.dqn_file = c.at("dqn").get<std::string>();
        cm.rgn_file = c.at("regressor").get<std::string>();
        out.push_back(std::move(cm));
    }
    return out;
}

}  // namespace

void cmd_generate(const GenerateArgs& args) {
    json spec_json;
    try {
        spec_json = json::parse(read_file_text(args.spec_file));
    } catch (const json::exception& e) {
        throw DataError("bad dataset spec " + args.spec_file.string() + ": " + e.what());
    }
    const SyntheticSpec spec = spec_from_json(spec_json);

    Dataset ds;
    ds.seed = args.seed;
    ds.spec = spec;
    ds.videos = generate_synthetic_dataset(spec, args.seed);
    save_dataset(args.out_dir, ds);

    json inputs;
    inputs["spec"] = spec_to_json(spec);
    inputs["seed"] = args.seed;
    write_manifest(args.out_dir, "generate", inputs, json::object());

    int total_instances = 0;
    for (const auto& v : ds.videos) total_instances += static_cast<int>(v.ground_truths.size());
    std::cout << "generated " << ds.videos.size() << " videos, " << total_instances
              << " instances -> " << args.out_dir.string() << "\n";
    if (spec.k_max == 0) {
        std::cout << "warning: k_max = 0, dataset has no action instances; training on it is "
                     "impossible\n";
    }
}

void cmd_train(const TrainArgs& args) {
    const RunConfig& cfg = args.config;
    cfg.validate();
    const Dataset ds = load_dataset(args.data_dir);
    const EpisodeConfig env_cfg = cfg.episode_config();
    std::filesystem::create_directories(args.out_dir);

    std::vector<ClassModelFiles> resume_models;
    if (args.resume_dir) {
        int dim = 0;
        resume_models = load_models_manifest(*args.resume_dir, &dim);
        if (dim != ds.feature_dim())
            throw DataError("resume models were trained with feature_dim " + std::to_string(dim) +
                            ", dataset has " + std::to_string(ds.feature_dim()));
    }

    struct ClassJob {
        int class_id;
        std::vector<VideoRecord> videos;
        TrainedModel model;
    };
    std::vector<ClassJob> jobs;
    for (int c = 0; c < ds.class_count(); ++c) {
        auto videos = ds.videos_for_class(c);
        if (videos.empty()) {
            std::cout << "warning: no training videos for class " << ds.spec.class_names[c]
                      << ", skipping\n";
            continue;
        }
        jobs.push_back(ClassJob{c, std::move(videos), {}});
    }

    parallel_for(static_cast<int>(jobs.size()), [&](int i) {
        ClassJob& job = jobs[static_cast<std::size_t>(i)];
        TrainConfig tc = cfg.train_config();
        tc.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(job.class_id));
        std::optional<TrainedModel> resume;
        if (args.resume_dir) {
            for (const auto& cm : resume_models) {
                if (cm.class_id == job.class_id) {
                    TrainedModel m;
                    auto dqn = load_network(*args.resume_dir / cm.dqn_file);
                    auto rgn = load_network(*args.resume_dir / cm.rgn_file);
                    m.qnet = std::move(dqn.params);
                    m.regressor = std::move(rgn.params);
                    m.qnet_opt = dqn.opt.value_or(OptimizerState{tc.lr_dqn, tc.lr_decay_dqn, 0});
                    m.reg_opt = rgn.opt.value_or(OptimizerState{tc.lr_reg, tc.lr_decay_reg, 0});
                    resume = std::move(m);
                }
            }
        }
        job.model = train_class_model(job.videos, tc, env_cfg, resume ? &*resume : nullptr);
    });

    std::vector<ClassModelFiles> written;
    for (const auto& job : jobs) {
        ClassModelFiles cm;
        cm.class_id = job.class_id;
        cm.name = ds.spec.class_names[job.class_id];
        cm.dqn_file = "dqn_class" + std::to_string(job.class_id) + ".net";
        cm.rgn_file = "rgn_class" + std::to_string(job.class_id) + ".net";
        save_network(args.out_dir / cm.dqn_file, job.model.qnet, &job.model.qnet_opt);
        save_network(args.out_dir / cm.rgn_file, job.model.regressor, &job.model.reg_opt);
        atomic_write_file(args.out_dir / ("train_log_class" + std::to_string(job.class_id) + ".csv"),
                          job.model.log.to_csv());
        written.push_back(std::move(cm));

        if (!job.model.log.epochs.empty()) {
            const auto& first = job.model.log.epochs.front();
            const auto& last = job.model.log.epochs.back();
            std::cout << "class " << ds.spec.class_names[job.class_id] << ": avg episode reward "
                      << first.avg_reward << " -> " << last.avg_reward << " over "
                      << job.model.log.epochs.size() << " epochs\n";
        }
    }

    atomic_write_file(args.out_dir / "models.json",
                      models_manifest_json(written, ds.feature_dim(), cfg).dump(2) + "\n");

    json inputs;
    inputs["data"] = args.data_dir.string();
    if (args.resume_dir) inputs["resume"] = args.resume_dir->string();
    write_manifest(args.out_dir, "train", inputs, json::parse(config_to_json_text(cfg)));
}

void cmd_detect(const DetectArgs& args) {
    const RunConfig& cfg = args.config;
    cfg.validate();
    const AblationSwitches ablation = parse_ablation(args.ablation);
    const Dataset ds = load_dataset(args.data_dir);

    int model_dim = 0;
    const auto model_files = load_models_manifest(args.models_dir, &model_dim);
    if (model_dim != ds.feature_dim())
        throw DataError("model/data dim mismatch: models expect feature_dim " +
                        std::to_string(model_dim) + ", dataset has " +
                        std::to_string(ds.feature_dim()));

    struct ClassModel {
        int class_id;
        std::string name;
        NetworkParams qnet;
        NetworkParams regressor;
    };
    std::vector<ClassModel> models;
    const int state_dim = ds.feature_dim() + kHistoryDepth * kActionCount;
    for (const auto& cm : model_files) {
        ClassModel m;
        m.class_id = cm.class_id;
        m.name = cm.name;
        m.qnet = load_network(args.models_dir / cm.dqn_file).params;
        m.regressor = load_network(args.models_dir / cm.rgn_file).params;
        if (m.qnet.config.input_dim != state_dim)
            throw DataError("model/data dim mismatch: Q-net expects input " +
                            std::to_string(m.qnet.config.input_dim) + ", dataset state is " +
                            std::to_string(state_dim));
        models.push_back(std::move(m));
    }

    EpisodeConfig env_cfg = cfg.episode_config();
    env_cfg.feature_mode = ablation.mode;

    const std::filesystem::path out_dir = args.out_file.parent_path();
    if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
    const std::filesystem::path trace_root =
        (out_dir.empty() ? std::filesystem::path(".") : out_dir) / "traces";

    struct Cell {
        std::vector<Proposal> proposals;
        std::string trace;
    };
    const int n_videos = static_cast<int>(ds.videos.size());
    const int n_models = static_cast<int>(models.size());
    std::vector<Cell> cells(static_cast<std::size_t>(n_videos) * n_models);

    parallel_for(n_videos * n_models, [&](int idx) {
        const int vi = idx / n_models;
        const int mi = idx % n_models;
        const VideoRecord& video = ds.videos[vi];
        const ClassModel& model = models[mi];
        const SearchResult sr = test_search(video, greedy_policy(model.qnet), env_cfg);

        Cell& cell = cells[idx];
        cell.trace = trace_csv_header(true) + "\n";
        for (const auto& vw : sr.visited) cell.trace += trace_csv_row(vw, true) + "\n";

        cell.proposals = score_proposals(video.id, sr.visited, cfg.trigger_bonus);
        if (ablation.refine) {
            refine_proposals(
                cell.proposals, model.regressor,
                [&](const Proposal& p) { return window_feature(video, p.window, ablation.mode); },
                [&](const Proposal&) { return video.frame_count; }, cfg.min_span);
        }
    });

    std::vector<Proposal> all;
    for (int vi = 0; vi < n_videos; ++vi) {
        for (int mi = 0; mi < n_models; ++mi) {
            const Cell& cell = cells[static_cast<std::size_t>(vi) * n_models + mi];
            all.insert(all.end(), cell.proposals.begin(), cell.proposals.end());
            const auto dir = trace_root / models[mi].name;
            std::filesystem::create_directories(dir);
            atomic_write_file(dir / (ds.videos[vi].id + ".csv"), cell.trace);
        }
    }
    save_proposals(args.out_file, all);

    json inputs;
    inputs["data"] = args.data_dir.string();
    inputs["models"] = args.models_dir.string();
    inputs["ablation"] = args.ablation;
    inputs["feature_mode"] = feature_mode_name(ablation.mode);  // resolved switches
    inputs["refine"] = ablation.refine;
    write_manifest(out_dir.empty() ? "." : out_dir, "detect", inputs,
                   json::parse(config_to_json_text(cfg)));

    std::cout << "wrote " << all.size() << " proposals for " << n_videos << " videos x "
              << n_models << " class models -> " << args.out_file.string() << "\n";
}

void cmd_eval(const EvalArgs& args) {
    const RunConfig& cfg = args.config;
    cfg.validate();
    const ClassifierMode classifier_mode = parse_classifier_mode(args.classifier);
    const Dataset ds = load_dataset(args.data_dir);
    std::vector<Proposal> proposals = load_proposals(args.proposals_file);
    std::filesystem::create_directories(args.out_dir);

    if (proposals.empty()) {
        std::cout << "warning: empty proposal file, all metrics are zero\n";
    }
    for (const auto& p : proposals) {
        if (ds.find_video(p.video_id) == nullptr)
            throw DataError("proposal references unknown video " + p.video_id);
    }
    if (cfg.nms) proposals = temporal_nms(std::move(proposals), cfg.nms_iou);

    std::vector<int> k_grid;
    for (int k = 1; k <= cfg.eval_max_k; ++k) k_grid.push_back(k);
    const RecallCurve r_vs_n = recall_vs_num_proposals(proposals, ds, 0.5, k_grid);
    const RecallCurve r_vs_iou = recall_vs_iou(proposals, ds, 100);

    std::vector<Proposal> capped = cap_average_proposals(proposals, ds, cfg.eval_avg_proposals);
    const FeatureMode fmode = parse_feature_mode(cfg.feature_mode);
    ClassifierStub classifier(classifier_mode, ds, fmode, cfg.centroid_threshold);
    classifier.classify_all(capped);
    std::vector<double> per_class;
    const double map05 = map_at(capped, ds, 0.5, &per_class);

    atomic_write_file(args.out_dir / "recall_vs_num_proposals.csv",
                      curve_to_csv(r_vs_n, "avg_proposals", "recall"));
    atomic_write_file(args.out_dir / "recall_vs_iou.csv", curve_to_csv(r_vs_iou, "iou", "recall"));
    std::string ap_csv = "class_id,class_name,ap\n";
    for (int c = 0; c < ds.class_count(); ++c) {
        ap_csv += std::to_string(c) + "," + ds.spec.class_names[c] + "," +
                  format_double(per_class.empty() ? 0.0 : per_class[c]) + "\n";
    }
    atomic_write_file(args.out_dir / "ap_per_class.csv", ap_csv);

    json summary;
    summary["map_0_5"] = map05;
    summary["avg_proposals_cap"] = cfg.eval_avg_proposals;
    summary["classifier"] = args.classifier;
    summary["proposal_count"] = proposals.size();
    summary["video_count"] = ds.videos.size();
    summary["recall_0_5_at_max_k"] = r_vs_n.empty() ? 0.0 : r_vs_n.back().second;
    json ap_json = json::object();
    for (int c = 0; c < ds.class_count(); ++c)
        ap_json[ds.spec.class_names[c]] = per_class.empty() ? 0.0 : per_class[c];
    summary["per_class_ap"] = ap_json;
    atomic_write_file(args.out_dir / "summary.json", summary.dump(2) + "\n");

    json inputs;
    inputs["proposals"] = args.proposals_file.string();
    inputs["data"] = args.data_dir.string();
    inputs["classifier"] = args.classifier;
    write_manifest(args.out_dir, "eval", inputs, json::parse(config_to_json_text(cfg)));

    std::cout << "mAP@0.5 (" << cfg.eval_avg_proposals << " avg proposals, " << args.classifier
              << " classifier): " << map05 << "\n";
}

void cmd_replay(const std::filesystem::path& manifest_file, const std::filesystem::path& out) {
    json m;
    try {
        m = json::parse(read_file_text(manifest_file));
    } catch (const json::exception& e) {
        throw DataError("bad run manifest " + manifest_file.string() + ": " + e.what());
    }
    const std::string command = m.value("command", "");
    const json inputs = m.value("inputs", json::object());
    try {
        if (command == "generate") {
            GenerateArgs args;
            args.out_dir = out;
            args.seed = inputs.at("seed").get<std::uint64_t>();
            // inline spec: write it to a temp file inside the output dir
            std::filesystem::create_directories(out);
            const auto spec_path = out / ".replay_spec.json";
            atomic_write_file(spec_path, inputs.at("spec").dump(2) + "\n");
            args.spec_file = spec_path;
            cmd_generate(args);
            std::filesystem::remove(spec_path);
        } else if (command == "train") {
            TrainArgs args;
            args.data_dir = inputs.at("data").get<std::string>();
            if (inputs.contains("resume"))
                args.resume_dir = std::filesystem::path(inputs.at("resume").get<std::string>());
            args.out_dir = out;
            args.config = config_from_json_text(m.at("config").dump());
            cmd_train(args);
        } else if (command == "detect") {
            DetectArgs args;
            args.data_dir = inputs.at("data").get<std::string>();
            args.models_dir = inputs.at("models").get<std::string>();
            args.ablation = inputs.at("ablation").get<std::string>();
            args.out_file = out / "proposals.csv";
            args.config = config_from_json_text(m.at("config").dump());
            cmd_detect(args);
        } else if (command == "eval") {
            EvalArgs args;
            args.proposals_file = inputs.at("proposals").get<std::string>();
            args.data_dir = inputs.at("data").get<std::string>();
            args.classifier = inputs.at("classifier").get<std::string>();
            args.out_dir = out;
            args.config = config_from_json_text(m.at("config").dump());
            cmd_eval(args);
        } else {
            throw DataError("run manifest has unknown command: " + command);
        }
    } catch (const json::exception& e) {
        throw DataError("bad run manifest " + manifest_file.string() + ": " + e.what());
    }
}

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"Reinforcement-learning laboratory for temporal action proposals"};
    app.require_subcommand(1);

    GenerateArgs gen_args;
    TrainArgs train_args;
    DetectArgs detect_args;
    EvalArgs eval_args;
    std::filesystem::path replay_manifest, replay_out;
    std::string train_config_file, detect_config_file, eval_config_file, resume_dir;
    std::vector<std::string> overrides;

    auto* gen = app.add_subcommand("generate", "Generate a synthetic feature dataset");
    gen->add_option("--spec", gen_args.spec_file, "dataset spec JSON")
        ->required()
        ->check(CLI::ExistingFile);
    gen->add_option("--out", gen_args.out_dir, "output dataset directory")->required();
    gen->add_option("--seed", gen_args.seed, "dataset seed");

    auto add_config_options = [&overrides](CLI::App* cmd, std::string& file) {
        cmd->add_option("--config", file, "run config JSON")->check(CLI::ExistingFile);
        cmd->add_option("--set", overrides, "override a config key, e.g. --set epochs=5")
            ->take_all();
    };

    auto* train = app.add_subcommand("train", "Train one DQN + regressor pair per class");
    train->add_option("--data", train_args.data_dir, "dataset directory")->required();
    train->add_option("--out", train_args.out_dir, "output models directory")->required();
    train->add_option("--resume", resume_dir, "models directory to continue from");
    add_config_options(train, train_config_file);

    auto* detect = app.add_subcommand("detect", "Run the test-time search and emit proposals");
    detect->add_option("--data", detect_args.data_dir, "dataset directory")->required();
    detect->add_option("--models", detect_args.models_dir, "models directory")->required();
    detect->add_option("--ablation", detect_args.ablation, "full | no-pool | no-pool-no-rgn")
        ->check(CLI::IsMember({"full", "no-pool", "no-pool-no-rgn"}));
    detect->add_option("--out", detect_args.out_file, "output proposals CSV")->required();
    add_config_options(detect, detect_config_file);

    auto* eval = app.add_subcommand("eval", "Score a proposal file against a dataset");
    eval->add_option("--proposals", eval_args.proposals_file, "proposals CSV")
        ->required()
        ->check(CLI::ExistingFile);
    eval->add_option("--data", eval_args.data_dir, "dataset directory")->required();
    eval->add_option("--classifier", eval_args.classifier, "oracle | centroid")
        ->check(CLI::IsMember({"oracle", "centroid"}));
    eval->add_option("--out", eval_args.out_dir, "output metrics directory")->required();
    add_config_options(eval, eval_config_file);

    auto* replay = app.add_subcommand("replay", "Re-run a command from its run manifest");
    replay->add_option("--manifest", replay_manifest, "run_manifest.json")
        ->required()
        ->check(CLI::ExistingFile);
    replay->add_option("--out", replay_out, "new output location")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    auto resolve_config = [&](const std::string& file) {
        json j = json::object();
        if (!file.empty()) {
            try {
                j = json::parse(read_file_text(file));
            } catch (const json::exception& e) {
                throw DataError("bad config " + file + ": " + e.what());
            }
        }
        for (const std::string& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw DataError("--set expects key=value, got: " + kv);
            const std::string key = kv.substr(0, eq);
            const std::string value = kv.substr(eq + 1);
            try {
                j[key] = json::parse(value);
            } catch (const json::exception&) {
                j[key] = value;  // plain string value
            }
        }
        return config_from_json_text(j.dump());
    };

    try {
        if (gen->parsed()) {
            cmd_generate(gen_args);
        } else if (train->parsed()) {
            train_args.config = resolve_config(train_config_file);
            if (!resume_dir.empty()) train_args.resume_dir = resume_dir;
            cmd_train(train_args);
        } else if (detect->parsed()) {
            detect_args.config = resolve_config(detect_config_file);
            cmd_detect(detect_args);
        } else if (eval->parsed()) {
            eval_args.config = resolve_config(eval_config_file);
            cmd_eval(eval_args);
        } else if (replay->parsed()) {
            cmd_replay(replay_manifest, replay_out);
        }
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

}  // namespace tap
