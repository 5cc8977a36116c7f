#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "diarkit/formats.hpp"
#include "diarkit/tuning.hpp"
#include "diarkit/vad.hpp"

using namespace diarkit;
namespace fs = std::filesystem;

namespace {

SpeakerTurn turn(const std::string& spk, double start, double end,
                 const std::string& file = "dev0") {
    SpeakerTurn t;
    t.file_id = file;
    t.speaker = spk;
    t.start_s = start;
    t.dur_s = end - start;
    return t;
}

// Dev file whose decode reproduces the reference at exactly (0.50, 0.30) with
// alpha 1.0 and nowhere else on the default grid:
//   - frames 19/20 straddle the onset (0.48 / 0.52), so only onset 0.50 opens
//     the segment at the right frame;
//   - the 0.33 plateaus must be bridged and the trailing 0.28 must close the
//     segment, pinning the offset to 0.30;
//   - the ASR track claims speech exactly where the frame track is
//     sub-threshold, so any alpha < 1 opens early or closes late.
DevFile planted_dev_file() {
    DevFile f;
    f.file_id = "dev0";
    f.frame_vad.frame_ms = 20;
    f.frame_vad.probs.assign(150, 0.0);
    auto put = [&](int lo, int hi, double v) {
        for (int i = lo; i <= hi; ++i) f.frame_vad.probs[static_cast<size_t>(i)] = v;
    };
    put(19, 19, 0.48);
    put(20, 20, 0.52);
    put(21, 34, 0.95);
    put(35, 40, 0.33);
    put(41, 49, 0.95);
    put(50, 50, 0.28);
    put(79, 79, 0.48);
    put(80, 80, 0.52);
    put(81, 99, 0.95);
    put(100, 105, 0.33);
    put(106, 119, 0.95);
    put(120, 120, 0.28);
    f.asr.frame_ms = 20;
    f.asr.origin = TrackOrigin::asr;
    f.asr.probs.assign(150, 0.0);
    for (int i : {79, 80, 100, 101, 102, 103, 104, 105, 120}) f.asr.probs[static_cast<size_t>(i)] = 1.0;
    f.has_asr = true;
    f.ref = {turn("spk0", 0.40, 1.00), turn("spk0", 1.60, 2.40)};
    return f;
}

GridRange point(double v) { return {v, v, 0.05}; }

}  // namespace

// === grid values ===

TEST_CASE("grid values cover the documented ranges") {
    GridSpec def;
    auto onsets = grid_values(def.onset);
    auto offsets = grid_values(def.offset);
    auto alphas = grid_values(def.alpha);
    REQUIRE(onsets.size() == 13);
    REQUIRE(offsets.size() == 15);
    REQUIRE(alphas.size() == 21);
    // snapping keeps every value an exact grid literal
    CHECK(onsets.front() == 0.3);
    CHECK(onsets[1] == 0.35);
    CHECK(onsets.back() == 0.9);
    CHECK(offsets[4] == 0.3);
    CHECK(alphas.back() == 1.0);

    SUBCASE("a degenerate range is a single point") {
        auto one = grid_values({0.5, 0.5, 0.05});
        REQUIRE(one.size() == 1);
        CHECK(one[0] == 0.5);
    }
    SUBCASE("an endpoint off the step grid is not emitted") {
        auto vals = grid_values({0.0, 0.12, 0.05});
        CHECK(vals == std::vector<double>{0.0, 0.05, 0.1});
    }
    SUBCASE("bad ranges are rejected") {
        CHECK_THROWS_AS(grid_values({0.0, 1.0, 0.0}), std::invalid_argument);
        CHECK_THROWS_AS(grid_values({-0.1, 0.5, 0.05}), std::invalid_argument);
        CHECK_THROWS_AS(grid_values({0.0, 1.1, 0.05}), std::invalid_argument);
        CHECK_THROWS_AS(grid_values({0.6, 0.5, 0.05}), std::invalid_argument);
    }
}

// === grid search ===

TEST_CASE("the planted optimum ranks first in an exhaustive search") {
    std::vector<DevFile> dev = {planted_dev_file()};
    auto res = grid_search(dev, GridSpec{}, CountMethod::oracle, 42);

    // 13*15*21 triples, minus the offset > onset corner
    CHECK(res.evaluated == 2940);
    CHECK(res.infeasible == 1155);
    CHECK(res.evaluated + res.infeasible == 13 * 15 * 21);
    CHECK(res.failed.empty());
    REQUIRE(res.ranked.size() == 2940);

    const auto& best = res.ranked.front();
    CHECK(best.onset == 0.5);
    CHECK(best.offset == 0.3);
    CHECK(best.alpha == 1.0);
    CHECK(best.mean_der <= 1e-9);

    int zeros = 0;
    for (const auto& t : res.ranked) {
        if (t.mean_der <= 1e-9) ++zeros;
        CHECK(t.offset <= t.onset + 1e-12);  // infeasible pairs never run
        CHECK(std::abs(t.mean_der - (t.mean_fa + t.mean_miss + t.mean_cer)) <= 1e-9);
    }
    CHECK(zeros == 1);
    CHECK(res.ranked[1].mean_der >= 0.005);
    for (size_t i = 0; i + 1 < res.ranked.size(); ++i)
        CHECK(res.ranked[i].mean_der <= res.ranked[i + 1].mean_der);
}

TEST_CASE("the search ranking is deterministic") {
    std::vector<DevFile> dev = {planted_dev_file()};
    auto a = grid_search(dev, GridSpec{}, CountMethod::oracle, 42);
    auto b = grid_search(dev, GridSpec{}, CountMethod::oracle, 42);
    REQUIRE(a.ranked.size() == b.ranked.size());
    for (size_t i = 0; i < a.ranked.size(); ++i) {
        CHECK(a.ranked[i].onset == b.ranked[i].onset);
        CHECK(a.ranked[i].offset == b.ranked[i].offset);
        CHECK(a.ranked[i].alpha == b.ranked[i].alpha);
        CHECK(a.ranked[i].mean_der == b.ranked[i].mean_der);
    }
}

TEST_CASE("an alpha range of [1,1] reproduces the no-asr arm") {
    std::vector<DevFile> with_asr = {planted_dev_file()};
    std::vector<DevFile> without = {planted_dev_file()};
    without[0].has_asr = false;
    without[0].asr.probs.clear();

    GridSpec grid;
    grid.alpha = point(1.0);
    auto a = grid_search(with_asr, grid, CountMethod::oracle, 42);
    auto b = grid_search(without, grid, CountMethod::oracle, 42);

    CHECK(a.evaluated == 140);  // 13*15 - 55 infeasible pairs
    CHECK(a.infeasible == 55);
    REQUIRE(a.ranked.size() == b.ranked.size());
    for (size_t i = 0; i < a.ranked.size(); ++i) {
        CHECK(a.ranked[i].onset == b.ranked[i].onset);
        CHECK(a.ranked[i].offset == b.ranked[i].offset);
        CHECK(a.ranked[i].alpha == 1.0);
        CHECK(a.ranked[i].mean_der == b.ranked[i].mean_der);
        CHECK(a.ranked[i].mean_fa == b.ranked[i].mean_fa);
        CHECK(a.ranked[i].mean_miss == b.ranked[i].mean_miss);
        CHECK(a.ranked[i].mean_cer == b.ranked[i].mean_cer);
    }
}

TEST_CASE("a single-point grid runs exactly one trial") {
    std::vector<DevFile> dev = {planted_dev_file()};
    GridSpec grid{point(0.5), point(0.3), point(1.0)};
    auto res = grid_search(dev, grid, CountMethod::oracle, 42);
    CHECK(res.evaluated == 1);
    CHECK(res.infeasible == 0);
    REQUIRE(res.ranked.size() == 1);
    CHECK(res.ranked[0].mean_der <= 1e-9);
}

TEST_CASE("failing files surface as failed trials, not rankings") {
    std::vector<DevFile> dev = {planted_dev_file()};
    dev[0].asr.frame_ms = 10;  // fuse rejects the rate mismatch
    GridSpec grid{point(0.5), point(0.3), {0.0, 1.0, 0.5}};
    auto res = grid_search(dev, grid, CountMethod::oracle, 42);
    CHECK(res.evaluated == 3);
    CHECK(res.ranked.empty());
    REQUIRE(res.failed.size() == 3);
    for (const auto& t : res.failed) {
        CHECK(t.failed);
        CHECK(t.fail_reason.find("frame_ms mismatch") != std::string::npos);
    }
    CHECK_THROWS_AS(grid_search({}, GridSpec{}, CountMethod::oracle, 42), std::invalid_argument);
}

TEST_CASE("a clustered dev file reaches zero DER at the planted triple") {
    DevFile f;
    f.file_id = "dev1";
    f.frame_vad.frame_ms = 20;
    f.frame_vad.probs.assign(210, 0.0);
    for (int i = 0; i < 100; ++i) f.frame_vad.probs[static_cast<size_t>(i)] = 0.95;
    for (int i = 110; i < 210; ++i) f.frame_vad.probs[static_cast<size_t>(i)] = 0.95;
    f.ref = {turn("spk0", 0.0, 2.0, "dev1"), turn("spk1", 2.2, 4.2, "dev1")};
    f.plan.scales = {{1.0, 0.5}};
    f.plan.weights = {1.0};
    f.has_embeddings = true;
    auto emb = [&](double start, double end, int hot) {
        EmbeddingRecord r;
        r.scale_index = 0;
        r.start_s = start;
        r.end_s = end;
        r.vec.assign(8, 0.0);
        r.vec[static_cast<size_t>(hot)] = 1.0;
        f.embeddings.push_back(r);
    };
    emb(0.0, 1.0, 0);
    emb(0.5, 1.5, 0);
    emb(1.0, 2.0, 0);
    emb(2.2, 3.2, 1);
    emb(2.7, 3.7, 1);
    emb(3.2, 4.2, 1);

    GridSpec grid{point(0.5), point(0.3), point(1.0)};
    SUBCASE("with the oracle speaker count") {
        auto res = grid_search({f}, grid, CountMethod::oracle, 42);
        REQUIRE(res.ranked.size() == 1);
        CHECK(res.ranked[0].mean_der <= 1e-9);
    }
    SUBCASE("with the estimated speaker count") {
        auto res = grid_search({f}, grid, CountMethod::eigen_gap, 42);
        REQUIRE(res.ranked.size() == 1);
        CHECK(res.ranked[0].mean_der <= 1e-9);
    }
}

// === vad metrics ===

TEST_CASE("vad metrics follow the documented examples") {
    std::vector<SpeakerTurn> ref = {turn("A", 0, 10)};
    SUBCASE("matching support scores zero") {
        auto [fa, miss] = vad_metrics({{0.0, 10.0}}, ref);
        CHECK(fa == 0.0);
        CHECK(miss == 0.0);
    }
    SUBCASE("an empty hypothesis misses everything") {
        auto [fa, miss] = vad_metrics({}, ref);
        CHECK(fa == 0.0);
        CHECK(miss == doctest::Approx(1.0));
    }
    SUBCASE("extra hypothesis speech is a false alarm") {
        auto [fa, miss] = vad_metrics({{0.0, 12.0}}, ref);
        CHECK(fa == doctest::Approx(0.2));
        CHECK(miss == 0.0);
    }
    SUBCASE("overlapping reference turns count once") {
        std::vector<SpeakerTurn> two = {turn("A", 0, 10), turn("B", 5, 15)};
        auto zero = vad_metrics({{0.0, 15.0}}, two);
        CHECK(zero.first == 0.0);
        CHECK(zero.second == 0.0);
        auto tail = vad_metrics({{0.0, 10.0}}, two);
        CHECK(tail.first == 0.0);
        CHECK(tail.second == doctest::Approx(5.0 / 15.0));
    }
    SUBCASE("no reference speech is an error") {
        CHECK_THROWS_WITH_AS(vad_metrics({{0.0, 1.0}}, {}),
                             doctest::Contains("no reference speech"), std::runtime_error);
    }
}

// === dev manifest ===

TEST_CASE("the dev manifest parses five columns with dashes for absences") {
    std::string text =
        "# comment line\n"
        "\n"
        "a.track b.track ref.rttm emb.jsonl win.txt\n"
        "c.track - ref2.rttm - -\n";
    auto rows = parse_dev_manifest(text);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].frame_track == "a.track");
    CHECK(rows[0].asr_track == "b.track");
    CHECK(rows[0].windows == "win.txt");
    CHECK(rows[1].asr_track.empty());
    CHECK(rows[1].embeddings.empty());
    CHECK(rows[1].windows.empty());

    SUBCASE("wrong column counts carry the line number") {
        try {
            parse_dev_manifest("# header\na.track b.track ref.rttm\n");
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
            CHECK(std::string(e.what()).find("expected 5 columns") != std::string::npos);
        }
    }
    SUBCASE("required columns cannot be dashes") {
        CHECK_THROWS_WITH_AS(parse_dev_manifest("- a.track ref.rttm - -\n"),
                             doctest::Contains("frame_track column is required"), ParseError);
        CHECK_THROWS_WITH_AS(parse_dev_manifest("a.track - - - -\n"),
                             doctest::Contains("ref_rttm column is required"), ParseError);
    }
}

TEST_CASE("load_dev_set reads every referenced file") {
    auto dir = fs::temp_directory_path() / "diarkit_tuning_test";
    fs::remove_all(dir);
    fs::create_directories(dir);

    FrameTrack track;
    track.frame_ms = 20;
    track.probs = {0.0, 0.9, 0.9, 0.0};
    write_text_file((dir / "a.track").string(), write_frame_track(track));
    write_text_file((dir / "a.rttm").string(), write_rttm({turn("spk0", 0.02, 0.06, "fileA")}));

    SUBCASE("a minimal row fills in defaults") {
        auto dev = load_dev_set({{"a.track", "", "a.rttm", "", ""}}, dir.string());
        REQUIRE(dev.size() == 1);
        CHECK(dev[0].file_id == "fileA");
        CHECK(dev[0].frame_vad.probs.size() == 4);
        CHECK(!dev[0].has_asr);
        CHECK(!dev[0].has_embeddings);
    }
    SUBCASE("embeddings without a windows file get the default plan") {
        EmbeddingRecord r;
        r.scale_index = 0;
        r.start_s = 0.0;
        r.end_s = 1.5;
        r.vec = {1.0, 0.0};
        write_text_file((dir / "a.jsonl").string(), write_embeddings({r}));
        auto dev = load_dev_set({{"a.track", "", "a.rttm", "a.jsonl", ""}}, dir.string());
        REQUIRE(dev.size() == 1);
        CHECK(dev[0].has_embeddings);
        CHECK(dev[0].plan.scales.size() == default_plan().scales.size());
    }
    SUBCASE("a windows file overrides the plan") {
        WindowsFile wf;
        wf.file_id = "fileA";
        wf.plan.scales = {{1.0, 0.5}};
        wf.plan.weights = {1.0};
        wf.windows.resize(1);
        write_text_file((dir / "a.windows").string(), write_windows_file(wf));
        EmbeddingRecord r;
        r.scale_index = 0;
        r.start_s = 0.0;
        r.end_s = 1.0;
        r.vec = {1.0, 0.0};
        write_text_file((dir / "a.jsonl").string(), write_embeddings({r}));
        auto dev = load_dev_set({{"a.track", "", "a.rttm", "a.jsonl", "a.windows"}}, dir.string());
        REQUIRE(dev.size() == 1);
        REQUIRE(dev[0].plan.scales.size() == 1);
        CHECK(dev[0].plan.scales[0].window_s == 1.0);
    }
    SUBCASE("an empty reference is rejected") {
        write_text_file((dir / "empty.rttm").string(), "");
        CHECK_THROWS_WITH_AS(load_dev_set({{"a.track", "", "empty.rttm", "", ""}}, dir.string()),
                             doctest::Contains("empty reference"), std::runtime_error);
    }
    SUBCASE("a reference spanning two files is rejected") {
        write_text_file((dir / "two.rttm").string(),
                        write_rttm({turn("s", 0, 1, "fileA"), turn("s", 0, 1, "fileB")}));
        CHECK_THROWS_WITH_AS(load_dev_set({{"a.track", "", "two.rttm", "", ""}}, dir.string()),
                             doctest::Contains("single file"), std::runtime_error);
    }
    SUBCASE("missing files are errors") {
        CHECK_THROWS(load_dev_set({{"missing.track", "", "a.rttm", "", ""}}, dir.string()));
    }
    fs::remove_all(dir);
}
