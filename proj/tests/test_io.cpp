#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "tap/config.hpp"
#include "tap/dataset_io.hpp"
#include "tap/util.hpp"

using namespace tap;

namespace {

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name) {
        path = std::filesystem::temp_directory_path() / name;
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

Dataset small_dataset(std::uint64_t seed) {
    SyntheticSpec spec;
    spec.video_count = 3;
    spec.len_min = 200;
    spec.len_max = 320;
    spec.k_min = 1;
    spec.k_max = 2;
    spec.gap_min = 20;
    spec.inst_len_min = 30;
    spec.inst_len_max = 60;
    spec.sigma = 0.25;
    spec.ramp = 3;
    spec.feature_dim = 12;
    spec.class_names = {"a", "b"};
    Dataset ds;
    ds.seed = seed;
    ds.spec = spec;
    ds.videos = generate_synthetic_dataset(spec, seed);
    return ds;
}

}  // namespace

TEST_CASE("dataset save/load round trip is lossless") {
    TempDir dir("tap_test_dataset");
    const auto ds = small_dataset(91);
    save_dataset(dir.path, ds);
    const auto loaded = load_dataset(dir.path);
    CHECK(loaded.seed == ds.seed);
    CHECK(loaded.spec.sigma == ds.spec.sigma);
    CHECK(loaded.spec.class_names == ds.spec.class_names);
    REQUIRE(loaded.videos.size() == ds.videos.size());
    for (std::size_t i = 0; i < ds.videos.size(); ++i) {
        CHECK(loaded.videos[i].id == ds.videos[i].id);
        CHECK(loaded.videos[i].frame_count == ds.videos[i].frame_count);
        CHECK(loaded.videos[i].frame_features == ds.videos[i].frame_features);  // bit-exact
        REQUIRE(loaded.videos[i].ground_truths.size() == ds.videos[i].ground_truths.size());
        for (std::size_t g = 0; g < ds.videos[i].ground_truths.size(); ++g) {
            CHECK(loaded.videos[i].ground_truths[g].window == ds.videos[i].ground_truths[g].window);
            CHECK(loaded.videos[i].ground_truths[g].class_id ==
                  ds.videos[i].ground_truths[g].class_id);
        }
    }
}

TEST_CASE("saving twice produces identical bytes") {
    TempDir a("tap_test_dataset_a");
    TempDir b("tap_test_dataset_b");
    const auto ds = small_dataset(17);
    save_dataset(a.path, ds);
    save_dataset(b.path, ds);
    for (const auto& entry : std::filesystem::directory_iterator(a.path)) {
        const auto name = entry.path().filename();
        CHECK(read_file_bytes(entry.path()) == read_file_bytes(b.path / name));
    }
}

TEST_CASE("corrupt video files are reported") {
    TempDir dir("tap_test_dataset_corrupt");
    const auto ds = small_dataset(23);
    save_dataset(dir.path, ds);
    // truncate one video file
    const auto victim = dir.path / (ds.videos[0].id + ".tapv");
    const auto bytes = read_file_bytes(victim);
    atomic_write_file(victim, bytes.data(), bytes.size() / 2);
    CHECK_THROWS_AS(load_dataset(dir.path), DataError);
}

TEST_CASE("missing manifest is a data error") {
    TempDir dir("tap_test_dataset_missing");
    CHECK_THROWS_AS(load_dataset(dir.path), DataError);
}

TEST_CASE("videos_for_class filters ground truths") {
    auto ds = small_dataset(29);
    for (int c = 0; c < ds.class_count(); ++c) {
        for (const auto& v : ds.videos_for_class(c)) {
            CHECK(!v.ground_truths.empty());
            for (const auto& gt : v.ground_truths) CHECK(gt.class_id == c);
        }
    }
}

TEST_CASE("config defaults reflect the published settings") {
    RunConfig cfg;
    CHECK(cfg.alpha == 0.2);
    CHECK(cfg.eta == 3.0);
    CHECK(cfg.tau == 0.5);
    CHECK(cfg.eps_start == 1.0);
    CHECK(cfg.eps_end == 0.1);
    CHECK(cfg.replay_capacity == 2000);
    CHECK(cfg.batch_size == 200);
    CHECK(cfg.lr_dqn == 1e-3);
    CHECK(cfg.lr_decay_dqn == 5e-5);
    CHECK(cfg.lr_reg == 1e-4);
    CHECK(cfg.lr_decay_reg == 9e-5);
    CHECK(cfg.dropout == 0.2);
    CHECK(cfg.max_steps == 15);
    cfg.validate();
}

TEST_CASE("config json round trip preserves every field") {
    RunConfig cfg;
    cfg.alpha = 0.3;
    cfg.epochs = 7;
    cfg.hidden_dims = {32, 16, 8};
    cfg.use_target_net = false;
    cfg.seed = 999;
    const auto text = config_to_json_text(cfg);
    const auto back = config_from_json_text(text);
    CHECK(back.alpha == cfg.alpha);
    CHECK(back.epochs == cfg.epochs);
    CHECK(back.hidden_dims == cfg.hidden_dims);
    CHECK(back.use_target_net == cfg.use_target_net);
    CHECK(back.seed == cfg.seed);
}

TEST_CASE("unknown config keys are rejected") {
    CHECK_THROWS_AS(config_from_json_text(R"({"alpha": 0.2, "learning_rate": 1.0})"), DataError);
    CHECK_THROWS_AS(config_from_json_text("not json at all"), DataError);
}

TEST_CASE("invalid config values are rejected") {
    CHECK_THROWS_AS(config_from_json_text(R"({"alpha": 0.0})"), DataError);
    CHECK_THROWS_AS(config_from_json_text(R"({"tau": 1.5})"), DataError);
    CHECK_THROWS_AS(config_from_json_text(R"({"batch_size": 5000})"), DataError);
    CHECK_THROWS_AS(config_from_json_text(R"({"eps_start": 0.0, "eps_end": 0.5})"), DataError);
}
