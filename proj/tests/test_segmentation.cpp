#include <doctest.h>

#include <random>

#include "diarkit/segmentation.hpp"
#include "test_util.hpp"

using namespace diarkit;

// === plan validation ===

TEST_CASE("default plan is valid: five scales, hop = window/2, equal weights") {
    auto plan = default_plan();
    REQUIRE(plan.scales.size() == 5);
    CHECK(plan.scales.front().window_s == doctest::Approx(1.5));
    CHECK(plan.scales.back().window_s == doctest::Approx(0.5));
    for (const auto& s : plan.scales) CHECK(s.hop_s == doctest::Approx(s.window_s / 2));
    CHECK_NOTHROW(validate_plan(plan));
}

TEST_CASE("validate_plan rejects broken plans") {
    MultiScalePlan p;
    CHECK_THROWS_AS(validate_plan(p), std::invalid_argument);  // no scales

    p.scales = {{1.0, 1.5}};
    p.weights = {1.0};
    CHECK_THROWS_AS(validate_plan(p), std::invalid_argument);  // hop > window

    p.scales = {{1.0, 0.5}, {1.5, 0.75}};
    p.weights = {0.5, 0.5};
    CHECK_THROWS_AS(validate_plan(p), std::invalid_argument);  // not coarsest-first

    p.scales = {{1.5, 0.75}, {1.0, 0.5}};
    p.weights = {0.5, 0.6};
    CHECK_THROWS_AS(validate_plan(p), std::invalid_argument);  // weights sum != 1

    p.weights = {0.5, 0.5};
    CHECK_NOTHROW(validate_plan(p));
}

// === plan_windows ===

TEST_CASE("plan_windows enumerates hop-spaced windows") {
    MultiScalePlan plan;
    plan.scales = {{1.5, 0.75}};
    plan.weights = {1.0};
    auto w = plan_windows({{0.0, 3.0}}, plan);
    REQUIRE(w.size() == 1);
    REQUIRE(w[0].size() == 3);
    CHECK(w[0][0] == Window{0.0, 1.5, 0});
    CHECK(w[0][1].start_s == doctest::Approx(0.75));
    CHECK(w[0][1].end_s == doctest::Approx(2.25));
    CHECK(w[0][2].start_s == doctest::Approx(1.5));
    CHECK(w[0][2].end_s == doctest::Approx(3.0));
}

TEST_CASE("plan_windows short segment and empty speech") {
    MultiScalePlan plan;
    plan.scales = {{1.5, 0.75}};
    plan.weights = {1.0};
    auto w = plan_windows({{0.0, 0.4}}, plan);
    REQUIRE(w[0].size() == 1);
    CHECK(w[0][0].start_s == doctest::Approx(0.0));
    CHECK(w[0][0].end_s == doctest::Approx(0.4));

    auto e = plan_windows({}, plan);
    REQUIRE(e.size() == 1);
    CHECK(e[0].empty());
}

TEST_CASE("flush trailing window appears only when the remainder is half a window") {
    // hop > window/2 leaves room for a tail the regular stride cannot cover
    MultiScalePlan plan;
    plan.scales = {{1.0, 0.8}};
    plan.weights = {1.0};

    // remainder 0.4 < 0.5: no flush
    auto a = plan_windows({{0.0, 2.2}}, plan);
    REQUIRE(a[0].size() == 2);
    CHECK(a[0][1].end_s == doctest::Approx(1.8));

    // remainder 0.7 >= 0.5: flush window ends at the segment end
    auto b = plan_windows({{0.0, 2.5}}, plan);
    REQUIRE(b[0].size() == 3);
    CHECK(b[0][2].start_s == doctest::Approx(1.5));
    CHECK(b[0][2].end_s == doctest::Approx(2.5));
}

TEST_CASE("windows stay inside their speech segment and match the count formula") {
    std::mt19937_64 rng(41);
    auto plan = default_plan();
    for (int iter = 0; iter < 100; ++iter) {
        std::vector<SpeechSegment> speech;
        double t = 0;
        int nseg = 1 + static_cast<int>(rng() % 6);
        for (int s = 0; s < nseg; ++s) {
            t += 0.05 + testutil::uniform01(rng);
            double dur = 0.05 + 4.0 * testutil::uniform01(rng);
            speech.push_back({t, t + dur});
            t += dur;
        }
        auto per_scale = plan_windows(speech, plan);
        REQUIRE(per_scale.size() == plan.scales.size());
        for (size_t sc = 0; sc < per_scale.size(); ++sc) {
            double w = plan.scales[sc].window_s, h = plan.scales[sc].hop_s;
            std::vector<int> count(speech.size(), 0);
            for (const auto& win : per_scale[sc]) {
                const auto& seg = speech[win.segment_index];
                CHECK(win.start_s >= seg.start_s - 1e-9);
                CHECK(win.end_s <= seg.end_s + 1e-9);
                CHECK(win.end_s > win.start_s);
                ++count[win.segment_index];
            }
            for (size_t s = 0; s < speech.size(); ++s) {
                double L = speech[s].dur_s();
                if (L < w - 1e-9) {
                    CHECK(count[s] == 1);
                } else {
                    int regular = static_cast<int>(std::floor((L - w) / h + 1e-9)) + 1;
                    double remainder = L - ((regular - 1) * h + w);
                    int flush = remainder > 1e-9 && remainder >= w / 2 - 1e-9 ? 1 : 0;
                    CHECK(count[s] == regular + flush);
                }
            }
        }
    }
}

// === group_by_base_scale ===

TEST_CASE("grouping picks nearest centers with earlier-window ties") {
    SUBCASE("single window per scale") {
        std::vector<ScaleWindows> w = {{{0.0, 1.5, 0}}, {{0.0, 0.5, 0}}};
        auto g = group_by_base_scale(w);
        REQUIRE(g.size() == 1);
        CHECK(g[0].scale_indices == std::vector<int>{0, 0});
    }
    SUBCASE("both base windows map to the only coarse window") {
        std::vector<ScaleWindows> w = {{{0.0, 1.0, 0}},
                                       {{0.0, 0.5, 0}, {0.5, 1.0, 0}}};  // centers .25, .75 vs .5
        auto g = group_by_base_scale(w);
        REQUIRE(g.size() == 2);
        CHECK(g[0].scale_indices[0] == 0);
        CHECK(g[1].scale_indices[0] == 0);
        CHECK(g[0].scale_indices[1] == 0);
        CHECK(g[1].scale_indices[1] == 1);
    }
    SUBCASE("equidistant tie goes to the earlier coarse window") {
        // coarse centers 0.5 and 1.5; base center 1.0 is equidistant
        std::vector<ScaleWindows> w = {{{0.0, 1.0, 0}, {1.0, 2.0, 0}}, {{0.75, 1.25, 0}}};
        auto g = group_by_base_scale(w);
        REQUIRE(g.size() == 1);
        CHECK(g[0].scale_indices[0] == 0);
    }
    SUBCASE("coarse windows never cross segments") {
        // segment 1 has a base window but no coarse window: malformed input
        std::vector<ScaleWindows> w = {{{0.0, 1.5, 0}}, {{0.0, 0.5, 0}, {2.0, 2.5, 1}}};
        CHECK_THROWS_AS(group_by_base_scale(w), std::invalid_argument);
    }
    SUBCASE("empty base scale gives no groups") {
        std::vector<ScaleWindows> w = {{}, {}};
        CHECK(group_by_base_scale(w).empty());
    }
}

TEST_CASE("grouping is deterministic and total over planned windows") {
    std::mt19937_64 rng(43);
    auto plan = default_plan();
    for (int iter = 0; iter < 50; ++iter) {
        std::vector<SpeechSegment> speech;
        double t = 0;
        for (int s = 0; s < 3; ++s) {
            t += 0.3 + testutil::uniform01(rng);
            double dur = 0.6 + 3.0 * testutil::uniform01(rng);
            speech.push_back({t, t + dur});
            t += dur;
        }
        auto windows = plan_windows(speech, plan);
        auto g1 = group_by_base_scale(windows);
        auto g2 = group_by_base_scale(windows);
        REQUIRE(g1.size() == windows.back().size());
        for (size_t i = 0; i < g1.size(); ++i) {
            CHECK(g1[i].scale_indices == g2[i].scale_indices);
            REQUIRE(g1[i].scale_indices.size() == plan.scales.size());
            CHECK(g1[i].scale_indices.back() == static_cast<int>(i));
            // every referenced window shares the base window's segment
            int seg = windows.back()[i].segment_index;
            for (size_t sc = 0; sc < plan.scales.size(); ++sc)
                CHECK(windows[sc][g1[i].scale_indices[sc]].segment_index == seg);
        }
    }
}

// === windows file ===

TEST_CASE("windows file round-trip preserves the plan and every window") {
    WindowsFile wf;
    wf.file_id = "lesson_07";
    wf.plan = default_plan();
    wf.windows = plan_windows({{0.25, 2.0}, {2.5, 6.125}}, wf.plan);
    auto back = parse_windows_file(write_windows_file(wf));
    CHECK(back.file_id == wf.file_id);
    REQUIRE(back.plan.scales.size() == wf.plan.scales.size());
    for (size_t i = 0; i < wf.plan.scales.size(); ++i) {
        CHECK(back.plan.scales[i].window_s == wf.plan.scales[i].window_s);
        CHECK(back.plan.scales[i].hop_s == wf.plan.scales[i].hop_s);
        CHECK(back.plan.weights[i] == wf.plan.weights[i]);
    }
    REQUIRE(back.windows.size() == wf.windows.size());
    for (size_t s = 0; s < wf.windows.size(); ++s) CHECK(back.windows[s] == wf.windows[s]);
}

TEST_CASE("windows file parser reports bad lines") {
    CHECK_THROWS_AS(parse_windows_file("not a windows file\n"), ParseError);
    CHECK_THROWS_AS(parse_windows_file("#diarkit-windows v1\n#file_id=f\n#scales=1.0\n"
                                       "#hops=0.5\n#scale=0\n0.0 banana 0\n"),
                    ParseError);
}
