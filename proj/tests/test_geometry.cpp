#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tap/geometry.hpp"

using namespace tap;

namespace {

// Independent IoU oracle: count shared vs covered frames directly.
double iou_by_enumeration(const TemporalWindow& a, const TemporalWindow& b) {
    int inter = 0;
    int uni = 0;
    const int lo = std::min(a.left, b.left);
    const int hi = std::max(a.right, b.right);
    for (int f = lo; f < hi; ++f) {
        const bool in_a = f >= a.left && f < a.right;
        const bool in_b = f >= b.left && f < b.right;
        if (in_a && in_b) ++inter;
        if (in_a || in_b) ++uni;
    }
    return uni == 0 ? 0.0 : static_cast<double>(inter) / uni;
}

TemporalWindow random_window(Rng& rng, int video_len, int min_span = 1) {
    const int span = static_cast<int>(uniform_int(rng, min_span, std::max(min_span, video_len / 2)));
    const int left = static_cast<int>(uniform_int(rng, 0, video_len - span));
    return TemporalWindow{left, left + span};
}

}  // namespace

TEST_CASE("iou basics") {
    CHECK(iou({10, 20}, {10, 20}) == 1.0);
    CHECK(iou({0, 10}, {20, 30}) == 0.0);
    CHECK(iou({0, 10}, {5, 15}) == doctest::Approx(5.0 / 15.0));
    // abutting windows share no frame
    CHECK(iou({0, 10}, {10, 20}) == 0.0);
}

TEST_CASE("iou matches frame enumeration on random pairs") {
    Rng rng(42);
    for (int i = 0; i < 2000; ++i) {
        const auto a = random_window(rng, 500);
        const auto b = random_window(rng, 500);
        CHECK(iou(a, b) == iou_by_enumeration(a, b));
        CHECK(iou(a, b) == iou(b, a));
        CHECK(iou(a, b) >= 0.0);
        CHECK(iou(a, b) <= 1.0);
    }
}

TEST_CASE("transform table") {
    TransformConfig cfg;
    cfg.alpha = 0.2;
    cfg.min_span = 8;
    Rng rng(1);
    const TemporalWindow w{100, 200};
    const int len = 1000;

    CHECK(apply_transform(w, AgentAction::MoveLeft, cfg, len, rng) == TemporalWindow{80, 180});
    CHECK(apply_transform(w, AgentAction::MoveRight, cfg, len, rng) == TemporalWindow{120, 220});
    CHECK(apply_transform(w, AgentAction::ExpandLeft, cfg, len, rng) == TemporalWindow{80, 200});
    CHECK(apply_transform(w, AgentAction::ExpandRight, cfg, len, rng) == TemporalWindow{100, 220});
    CHECK(apply_transform(w, AgentAction::Shrink, cfg, len, rng) == TemporalWindow{110, 190});
}

TEST_CASE("trigger is not a transform") {
    TransformConfig cfg;
    Rng rng(1);
    CHECK_THROWS_AS(apply_transform({0, 10}, AgentAction::Trigger, cfg, 100, rng),
                    std::invalid_argument);
}

TEST_CASE("step distance is at least one frame") {
    TransformConfig cfg;
    cfg.alpha = 0.2;
    cfg.min_span = 2;
    Rng rng(1);
    const TemporalWindow w{50, 52};  // alpha*span rounds to 0
    CHECK(transform_step(w, cfg) == 1);
    CHECK(apply_transform(w, AgentAction::MoveRight, cfg, 100, rng) == TemporalWindow{51, 53});
}

TEST_CASE("clamping shifts the window inward, preserving span") {
    TransformConfig cfg;
    cfg.alpha = 0.2;
    cfg.min_span = 8;
    Rng rng(1);
    // left boundary: d=10 move clamps back to the original position
    CHECK(apply_transform({0, 50}, AgentAction::MoveLeft, cfg, 1000, rng) == TemporalWindow{0, 50});
    // right boundary symmetric
    CHECK(apply_transform({950, 1000}, AgentAction::MoveRight, cfg, 1000, rng) ==
          TemporalWindow{950, 1000});
    // expand at the right edge keeps the grown span by shifting left
    const auto g = apply_transform({960, 1000}, AgentAction::ExpandRight, cfg, 1000, rng);
    CHECK(g.span() == 48);
    CHECK(g.right == 1000);
}

TEST_CASE("shrink respects the span floor") {
    TransformConfig cfg;
    cfg.alpha = 0.5;
    cfg.min_span = 8;
    Rng rng(1);
    TemporalWindow w{100, 110};
    for (int i = 0; i < 10; ++i) w = apply_transform(w, AgentAction::Shrink, cfg, 1000, rng);
    CHECK(w.span() == 8);
}

TEST_CASE("jump forward leap is deterministic") {
    TransformConfig cfg;
    cfg.alpha = 0.2;
    cfg.min_span = 8;
    cfg.jump_mode = JumpMode::ForwardLeap;
    Rng rng(1);
    CHECK(jump({100, 200}, cfg, 1000, rng) == TemporalWindow{140, 240});
    CHECK(apply_transform({100, 200}, AgentAction::Jump, cfg, 1000, rng) ==
          TemporalWindow{140, 240});
}

TEST_CASE("jump random side lands one span away") {
    TransformConfig cfg;
    cfg.min_span = 8;
    cfg.jump_mode = JumpMode::RandomSide;
    const TemporalWindow w{100, 200};
    Rng rng(7);
    bool saw_left = false;
    bool saw_right = false;
    for (int i = 0; i < 64; ++i) {
        const auto j = jump(w, cfg, 1000, rng);
        CHECK(j.span() == w.span());
        if (j == TemporalWindow{300, 400}) saw_right = true;
        // the pure left placement [-100, 0] clamps to [0, 100]
        if (j == TemporalWindow{0, 100}) saw_left = true;
        const bool disjoint = j.right <= w.left || j.left >= w.right;
        CHECK(disjoint);
    }
    CHECK(saw_left);
    CHECK(saw_right);
}

TEST_CASE("jump random side clamps at the video start") {
    TransformConfig cfg;
    cfg.min_span = 8;
    cfg.jump_mode = JumpMode::RandomSide;
    const TemporalWindow w{10, 110};
    Rng rng(3);
    for (int i = 0; i < 64; ++i) {
        const auto j = jump(w, cfg, 1000, rng);
        CHECK(j.span() == 100);
        if (j.left < w.left) CHECK(j == TemporalWindow{0, 100});
        if (j.left > w.left) CHECK(j == TemporalWindow{210, 310});
    }
}

TEST_CASE("move left then move right returns within rounding distance") {
    TransformConfig cfg;
    cfg.alpha = 0.2;
    cfg.min_span = 8;
    Rng rng(11);
    for (int i = 0; i < 500; ++i) {
        // keep a margin so clamping never engages
        const int span = static_cast<int>(uniform_int(rng, 10, 100));
        const int left = static_cast<int>(uniform_int(rng, span, 1000 - 2 * span));
        const TemporalWindow w{left, left + span};
        const auto there = apply_transform(w, AgentAction::MoveLeft, cfg, 1000, rng);
        const auto back = apply_transform(there, AgentAction::MoveRight, cfg, 1000, rng);
        CHECK(std::abs(back.left - w.left) <= 1);
        CHECK(std::abs(back.right - w.right) <= 1);
    }
}

TEST_CASE("span change matches the transform table away from boundaries") {
    TransformConfig cfg;
    cfg.alpha = 0.2;
    cfg.min_span = 8;
    Rng rng(13);
    for (int i = 0; i < 500; ++i) {
        const int span = static_cast<int>(uniform_int(rng, 20, 100));
        const int left = static_cast<int>(uniform_int(rng, 2 * span, 2000 - 3 * span));
        const TemporalWindow w{left, left + span};
        const int d = transform_step(w, cfg);
        CHECK(apply_transform(w, AgentAction::MoveLeft, cfg, 2000, rng).span() == span);
        CHECK(apply_transform(w, AgentAction::MoveRight, cfg, 2000, rng).span() == span);
        CHECK(apply_transform(w, AgentAction::ExpandLeft, cfg, 2000, rng).span() == span + d);
        CHECK(apply_transform(w, AgentAction::ExpandRight, cfg, 2000, rng).span() == span + d);
        CHECK(apply_transform(w, AgentAction::Shrink, cfg, 2000, rng).span() ==
              std::max(cfg.min_span, span - d));
    }
}

TEST_CASE("clamped results are always valid windows") {
    TransformConfig cfg;
    cfg.alpha = 0.3;
    cfg.min_span = 8;
    Rng rng(17);
    for (int i = 0; i < 2000; ++i) {
        const int len = static_cast<int>(uniform_int(rng, 10, 400));
        const auto w = random_window(rng, len);
        const auto a = static_cast<AgentAction>(uniform_below(rng, 6));  // all but trigger
        const auto r = apply_transform(w, a, cfg, len, rng);
        CHECK(r.left >= 0);
        CHECK(r.left < r.right);
        CHECK(r.right <= len);
        CHECK(r.span() >= std::min(cfg.min_span, len));
    }
}
