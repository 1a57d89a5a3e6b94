#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <map>
#include <vector>

#include "tap/cli.hpp"
#include "tap/dataset_io.hpp"
#include "tap/evaluation.hpp"
#include "tap/util.hpp"

using namespace tap;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) {
        path = fs::temp_directory_path() / name;
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv = {"taplab"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return cli_main(static_cast<int>(argv.size()), argv.data());
}

void write_spec(const fs::path& file, const std::string& extra = "") {
    atomic_write_file(file, std::string(R"({
  "video_count": 3,
  "len_min": 300,
  "len_max": 450,
  "k_min": 1,
  "k_max": 2,
  "gap_min": 24,
  "inst_len_min": 40,
  "inst_len_max": 80,
  "sigma": 0.1,
  "ramp": 2,
  "feature_dim": 8,
  "class_names": ["a", "b"])") +
                               extra + "\n}\n");
}

// every regular file under root, keyed by relative path
std::map<std::string, std::vector<std::uint8_t>> dir_contents(const fs::path& root) {
    std::map<std::string, std::vector<std::uint8_t>> out;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (entry.is_regular_file()) {
            out[fs::relative(entry.path(), root).string()] = read_file_bytes(entry.path());
        }
    }
    return out;
}

}  // namespace

TEST_CASE("generate is reproducible and replayable") {
    TempDir tmp("tap_cli_generate");
    write_spec(tmp.path / "spec.json");
    const auto out_a = (tmp.path / "ds_a").string();
    const auto out_b = (tmp.path / "ds_b").string();
    CHECK(run_cli({"generate", "--spec", (tmp.path / "spec.json").string(), "--out", out_a,
                   "--seed", "5"}) == 0);
    CHECK(run_cli({"generate", "--spec", (tmp.path / "spec.json").string(), "--out", out_b,
                   "--seed", "5"}) == 0);
    CHECK(dir_contents(out_a) == dir_contents(out_b));

    // replay from the emitted manifest reproduces the directory byte for byte
    const auto out_c = (tmp.path / "ds_c").string();
    CHECK(run_cli({"replay", "--manifest", out_a + "/run_manifest.json", "--out", out_c}) == 0);
    CHECK(dir_contents(out_a) == dir_contents(out_c));

    // a different seed changes the data
    const auto out_d = (tmp.path / "ds_d").string();
    CHECK(run_cli({"generate", "--spec", (tmp.path / "spec.json").string(), "--out", out_d,
                   "--seed", "6"}) == 0);
    CHECK(dir_contents(out_a) != dir_contents(out_d));
}

TEST_CASE("generate with k=0 warns but succeeds") {
    TempDir tmp("tap_cli_generate_k0");
    atomic_write_file(tmp.path / "spec.json", std::string(R"({
  "video_count": 2, "len_min": 100, "len_max": 150, "k_min": 0, "k_max": 0,
  "feature_dim": 4, "class_names": ["a"]})") + "\n");
    CHECK(run_cli({"generate", "--spec", (tmp.path / "spec.json").string(), "--out",
                   (tmp.path / "ds").string(), "--seed", "1"}) == 0);
    const auto ds = load_dataset(tmp.path / "ds");
    CHECK(ds.videos.size() == 2);
    for (const auto& v : ds.videos) CHECK(v.ground_truths.empty());
}

TEST_CASE("missing spec file is a usage error") {
    TempDir tmp("tap_cli_missing_spec");
    CHECK(run_cli({"generate", "--spec", (tmp.path / "nope.json").string(), "--out",
                   (tmp.path / "ds").string()}) == 1);
}

TEST_CASE("unknown spec keys are a data error") {
    TempDir tmp("tap_cli_bad_spec");
    write_spec(tmp.path / "spec.json", ", \"bogus\": 1");
    CHECK(run_cli({"generate", "--spec", (tmp.path / "spec.json").string(), "--out",
                   (tmp.path / "ds").string()}) == 2);
}

TEST_CASE("train, detect and eval run end to end") {
    TempDir tmp("tap_cli_pipeline");
    write_spec(tmp.path / "spec.json");
    const auto ds_dir = (tmp.path / "ds").string();
    REQUIRE(run_cli({"generate", "--spec", (tmp.path / "spec.json").string(), "--out", ds_dir,
                     "--seed", "11"}) == 0);

    // tiny training budget: this exercises the plumbing, not the learning
    const auto models = (tmp.path / "models").string();
    REQUIRE(run_cli({"train", "--data", ds_dir, "--out", models, "--set", "epochs=1",
                     "--set", "episodes_per_video=1", "--set", "batch_size=20",
                     "--set", "replay_capacity=100", "--set", "hidden_dims=[8,4]",
                     "--set", "train_step_budget=20", "--set", "seed=3"}) == 0);
    CHECK(fs::exists(fs::path(models) / "models.json"));
    CHECK(fs::exists(fs::path(models) / "dqn_class0.net"));
    CHECK(fs::exists(fs::path(models) / "rgn_class1.net"));
    CHECK(fs::exists(fs::path(models) / "train_log_class0.csv"));

    const auto detect_dir = tmp.path / "detect";
    REQUIRE(run_cli({"detect", "--data", ds_dir, "--models", models, "--ablation", "full",
                     "--out", (detect_dir / "proposals.csv").string()}) == 0);
    CHECK(fs::exists(detect_dir / "proposals.csv"));
    const auto props = load_proposals(detect_dir / "proposals.csv");
    CHECK(!props.empty());

    // trace files exist and respect the step cap
    const auto ds = load_dataset(ds_dir);
    const auto trace = read_file_text(detect_dir / "traces" / "a" / (ds.videos[0].id + ".csv"));
    std::map<int, int> rows_per_search;
    std::istringstream in(trace);
    std::string line;
    std::getline(in, line);  // header
    CHECK(line == "search,step,action,left,right,reward,iou_best,triggered");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        rows_per_search[std::stoi(line.substr(0, line.find(',')))]++;
    }
    for (const auto& [search, rows] : rows_per_search) CHECK(rows <= 15);

    const auto eval_dir = tmp.path / "eval";
    REQUIRE(run_cli({"eval", "--proposals", (detect_dir / "proposals.csv").string(), "--data",
                     ds_dir, "--classifier", "oracle", "--out", eval_dir.string()}) == 0);
    CHECK(fs::exists(eval_dir / "summary.json"));
    CHECK(fs::exists(eval_dir / "recall_vs_num_proposals.csv"));
    CHECK(fs::exists(eval_dir / "recall_vs_iou.csv"));
    CHECK(fs::exists(eval_dir / "ap_per_class.csv"));

    // eval reruns bit-exactly
    const auto eval_dir2 = tmp.path / "eval2";
    REQUIRE(run_cli({"eval", "--proposals", (detect_dir / "proposals.csv").string(), "--data",
                     ds_dir, "--classifier", "oracle", "--out", eval_dir2.string()}) == 0);
    CHECK(dir_contents(eval_dir) == dir_contents(eval_dir2));

    // detect replays byte-identically from its manifest
    const auto detect_replay = tmp.path / "detect_replay";
    REQUIRE(run_cli({"replay", "--manifest", (detect_dir / "run_manifest.json").string(),
                     "--out", detect_replay.string()}) == 0);
    CHECK(dir_contents(detect_dir) == dir_contents(detect_replay));
}

TEST_CASE("train with zero epochs writes untrained checkpoints and empty logs") {
    TempDir tmp("tap_cli_epoch0");
    write_spec(tmp.path / "spec.json");
    const auto ds_dir = (tmp.path / "ds").string();
    REQUIRE(run_cli({"generate", "--spec", (tmp.path / "spec.json").string(), "--out", ds_dir,
                     "--seed", "12"}) == 0);
    const auto models = (tmp.path / "models").string();
    REQUIRE(run_cli({"train", "--data", ds_dir, "--out", models, "--set", "epochs=0",
                     "--set", "hidden_dims=[8]"}) == 0);
    const auto log = read_file_text(fs::path(models) / "train_log_class0.csv");
    CHECK(log == "epoch,avg_reward,avg_td_loss,avg_reg_loss,epsilon,trigger_precision\n");
    const auto net = load_network(fs::path(models) / "dqn_class0.net");
    CHECK(net.opt->step_count == 0);
}

TEST_CASE("corrupt dataset yields exit code 2") {
    TempDir tmp("tap_cli_corrupt");
    write_spec(tmp.path / "spec.json");
    const auto ds_dir = tmp.path / "ds";
    REQUIRE(run_cli({"generate", "--spec", (tmp.path / "spec.json").string(), "--out",
                     ds_dir.string(), "--seed", "13"}) == 0);
    atomic_write_file(ds_dir / "manifest.json", std::string("{broken"));
    CHECK(run_cli({"train", "--data", ds_dir.string(), "--out", (tmp.path / "m").string()}) == 2);
}

TEST_CASE("empty proposal file evaluates to zero metrics with exit 0") {
    TempDir tmp("tap_cli_empty_props");
    write_spec(tmp.path / "spec.json");
    const auto ds_dir = (tmp.path / "ds").string();
    REQUIRE(run_cli({"generate", "--spec", (tmp.path / "spec.json").string(), "--out", ds_dir,
                     "--seed", "14"}) == 0);
    const auto props = tmp.path / "empty.csv";
    atomic_write_file(props, std::string("video_id,left,right,score,is_trigger,class_id\n"));
    const auto eval_dir = tmp.path / "eval";
    CHECK(run_cli({"eval", "--proposals", props.string(), "--data", ds_dir, "--out",
                   eval_dir.string()}) == 0);
    const auto summary = read_file_text(eval_dir / "summary.json");
    CHECK(summary.find("\"map_0_5\": 0.0") != std::string::npos);
}

TEST_CASE("usage errors exit with code 1") {
    CHECK(run_cli({}) == 1);
    CHECK(run_cli({"frobnicate"}) == 1);
    CHECK(run_cli({"generate"}) == 1);  // missing required flags
    TempDir tmp("tap_cli_usage");
    write_spec(tmp.path / "spec.json");
    CHECK(run_cli({"detect", "--data", "x", "--models", "y", "--ablation", "bogus", "--out",
                   "z.csv"}) == 1);
}

TEST_CASE("model/data dimension mismatch is a data error") {
    TempDir tmp("tap_cli_dim_mismatch");
    write_spec(tmp.path / "spec.json");
    const auto ds8 = (tmp.path / "ds8").string();
    REQUIRE(run_cli({"generate", "--spec", (tmp.path / "spec.json").string(), "--out", ds8,
                     "--seed", "15"}) == 0);
    atomic_write_file(tmp.path / "spec16.json", std::string(R"({
  "video_count": 2, "len_min": 300, "len_max": 400, "k_min": 1, "k_max": 1,
  "inst_len_min": 40, "inst_len_max": 60, "feature_dim": 16, "class_names": ["a", "b"]})") +
                                                    "\n");
    const auto ds16 = (tmp.path / "ds16").string();
    REQUIRE(run_cli({"generate", "--spec", (tmp.path / "spec16.json").string(), "--out", ds16,
                     "--seed", "15"}) == 0);
    const auto models = (tmp.path / "models").string();
    REQUIRE(run_cli({"train", "--data", ds8, "--out", models, "--set", "epochs=0",
                     "--set", "hidden_dims=[4]"}) == 0);
    CHECK(run_cli({"detect", "--data", ds16, "--models", models, "--out",
                   (tmp.path / "p.csv").string()}) == 2);
}

TEST_CASE("resumed training continues the optimizer step count") {
    TempDir tmp("tap_cli_resume");
    write_spec(tmp.path / "spec.json");
    const auto ds_dir = (tmp.path / "ds").string();
    REQUIRE(run_cli({"generate", "--spec", (tmp.path / "spec.json").string(), "--out", ds_dir,
                     "--seed", "16"}) == 0);
    const auto m1 = (tmp.path / "m1").string();
    const std::vector<std::string> small = {"--set", "epochs=1", "--set", "episodes_per_video=1",
                                            "--set", "batch_size=10", "--set",
                                            "replay_capacity=50", "--set", "hidden_dims=[8]",
                                            "--set", "train_step_budget=15"};
    std::vector<std::string> args = {"train", "--data", ds_dir, "--out", m1};
    args.insert(args.end(), small.begin(), small.end());
    REQUIRE(run_cli(args) == 0);
    const auto before = load_network(fs::path(m1) / "dqn_class0.net").opt->step_count;
    CHECK(before > 0);

    const auto m2 = (tmp.path / "m2").string();
    args = {"train", "--data", ds_dir, "--out", m2, "--resume", m1};
    args.insert(args.end(), small.begin(), small.end());
    REQUIRE(run_cli(args) == 0);
    const auto after = load_network(fs::path(m2) / "dqn_class0.net").opt->step_count;
    CHECK(after > before);
}
