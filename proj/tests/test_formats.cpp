#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "diarkit/formats.hpp"

using namespace diarkit;

// === RTTM ===

TEST_CASE("parse_rttm maps the documented columns") {
    auto turns = parse_rttm("SPEAKER f1 1 3.250 1.500 <NA> <NA> teacher <NA> <NA>\n");
    REQUIRE(turns.size() == 1);
    CHECK(turns[0].file_id == "f1");
    CHECK(turns[0].channel == 1);
    CHECK(turns[0].start_s == doctest::Approx(3.25));
    CHECK(turns[0].dur_s == doctest::Approx(1.5));
    CHECK(turns[0].speaker == "teacher");
}

TEST_CASE("parse_rttm empty input and comments") {
    CHECK(parse_rttm("").empty());
    CHECK(parse_rttm(";; a comment\n\n").empty());
}

TEST_CASE("parse_rttm rejects bad lines with 1-based line numbers") {
    SUBCASE("zero duration") {
        try {
            parse_rttm("SPEAKER f1 1 0.000 0.000 <NA> <NA> s <NA> <NA>\n");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 1);
        }
    }
    SUBCASE("too few fields, second line") {
        try {
            parse_rttm("SPEAKER f1 1 0.0 1.0 <NA> <NA> s <NA> <NA>\nSPEAKER f1 1 0.0\n");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
        }
    }
    SUBCASE("non-numeric start") {
        CHECK_THROWS_AS(parse_rttm("SPEAKER f1 1 abc 1.0 <NA> <NA> s <NA> <NA>\n"), ParseError);
    }
    SUBCASE("wrong record type") {
        CHECK_THROWS_AS(parse_rttm("LEXEME f1 1 0.0 1.0 <NA> <NA> s <NA> <NA>\n"), ParseError);
    }
    SUBCASE("negative start") {
        CHECK_THROWS_AS(parse_rttm("SPEAKER f1 1 -0.5 1.0 <NA> <NA> s <NA> <NA>\n"), ParseError);
    }
}

TEST_CASE("write_rttm canonical formatting and sorting") {
    std::vector<SpeakerTurn> turns = {
        {"f", 1, 2.0, 1.0, "b"},
        {"f", 1, 0.0, 0.02, "s"},
    };
    std::string text = write_rttm(turns);
    CHECK(text == "SPEAKER f 1 0.000 0.020 <NA> <NA> s <NA> <NA>\n"
                  "SPEAKER f 1 2.000 1.000 <NA> <NA> b <NA> <NA>\n");
}

TEST_CASE("rttm round-trip is identity at 3 decimals over random lists") {
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    std::uniform_int_distribution<int> nspk(1, 4);
    for (int iter = 0; iter < 50; ++iter) {
        std::vector<SpeakerTurn> turns;
        int n = 1 + static_cast<int>(rng() % 20);
        for (int i = 0; i < n; ++i) {
            double start = std::round(u(rng) * 1000.0) / 1000.0;
            double dur = std::round((0.001 + u(rng) / 10.0) * 1000.0) / 1000.0;
            if (dur <= 0) dur = 0.001;
            turns.push_back({"f" + std::to_string(rng() % 3), 1, start, dur,
                             "spk" + std::to_string(nspk(rng))});
        }
        auto parsed = parse_rttm(write_rttm(turns));
        REQUIRE(parsed.size() == turns.size());
        auto sorted = parse_rttm(write_rttm(parsed));  // second pass: must be a fixed point
        for (size_t i = 0; i < parsed.size(); ++i) {
            CHECK(parsed[i].file_id == sorted[i].file_id);
            CHECK(parsed[i].start_s == doctest::Approx(sorted[i].start_s).epsilon(1e-12));
            CHECK(parsed[i].dur_s == doctest::Approx(sorted[i].dur_s).epsilon(1e-12));
            CHECK(parsed[i].speaker == sorted[i].speaker);
        }
    }
}

// === CTM ===

TEST_CASE("parse_ctm maps the documented columns") {
    auto words = parse_ctm("f1 1 0.50 0.60 hello\n");
    REQUIRE(words.size() == 1);
    CHECK(words[0].token == "hello");
    CHECK(words[0].start_s == doctest::Approx(0.5));
    CHECK(words[0].end_s == doctest::Approx(1.1));
}

TEST_CASE("parse_ctm skips ;; comments") {
    auto words = parse_ctm(";; header\nf1 1 0.0 0.5 hi\n");
    CHECK(words.size() == 1);
}

TEST_CASE("parse_ctm rejects non-positive durations with the line number") {
    try {
        parse_ctm("f1 1 0.0 0.5 hi\nf1 1 1.0 -0.2 oops\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("ctm round-trip") {
    std::vector<Word> words = {{"a", 0.0, 0.25}, {"b", 0.3, 0.9}};
    auto parsed = parse_ctm(write_ctm("f", words));
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[1].token == "b");
    CHECK(parsed[1].end_s == doctest::Approx(0.9));
}

// === frame tracks ===

TEST_CASE("parse_frame_track header and defaults") {
    auto t = parse_frame_track("#frame_ms=20\n0.1\n0.9\n");
    CHECK(t.frame_ms == 20);
    REQUIRE(t.frames() == 2);
    CHECK(t.probs[0] == doctest::Approx(0.1));

    auto d = parse_frame_track("0.5\n");
    CHECK(d.frame_ms == 20);  // documented default

    auto o = parse_frame_track("#frame_ms=10\n#origin=asr\n1\n");
    CHECK(o.frame_ms == 10);
    CHECK(o.origin == TrackOrigin::asr);
}

TEST_CASE("parse_frame_track rejects bad input") {
    CHECK_THROWS_AS(parse_frame_track("1.2\n"), ParseError);       // outside [0,1]
    CHECK_THROWS_AS(parse_frame_track("-0.1\n"), ParseError);
    CHECK_THROWS_AS(parse_frame_track("0.5\n\n0.5\n"), ParseError);  // missing value
    CHECK_THROWS_AS(parse_frame_track("0.5\n#frame_ms=20\n"), ParseError);  // header after data
    CHECK_THROWS_AS(parse_frame_track("#frame_ms=0\n"), ParseError);
    CHECK_THROWS_AS(parse_frame_track("#origin=magic\n"), ParseError);
    try {
        parse_frame_track("0.1\n0.2\nnope\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("frame track round-trip is exact") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    FrameTrack t;
    t.frame_ms = 20;
    t.origin = TrackOrigin::fused;
    for (int i = 0; i < 200; ++i) t.probs.push_back(u(rng));
    auto back = parse_frame_track(write_frame_track(t));
    CHECK(back == t);
}

// === embeddings ===

TEST_CASE("parse_embeddings accepts records and tracks source lines") {
    std::string text =
        R"({"scale":0,"start":0.0,"end":1.5,"vec":[1.0,0.0]})" "\n"
        R"({"scale":1,"start":0.0,"end":1.0,"vec":[0.5,0.5,0.1]})" "\n";
    auto recs = parse_embeddings(text);
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].scale_index == 0);
    CHECK(recs[0].vec.size() == 2);
    CHECK(recs[0].source_line == 1);
    CHECK(recs[1].source_line == 2);
    CHECK(parse_embeddings("").empty());
}

TEST_CASE("parse_embeddings enforces per-scale dimensions naming the line") {
    std::string text =
        R"({"scale":0,"start":0.0,"end":1.5,"vec":[1,2,3]})" "\n"
        R"({"scale":0,"start":0.75,"end":2.25,"vec":[1,2]})" "\n";
    try {
        parse_embeddings(text);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(std::string(e.what()).find("dimension") != std::string::npos);
    }
}

TEST_CASE("parse_embeddings rejects malformed records") {
    CHECK_THROWS_AS(parse_embeddings("not json\n"), ParseError);
    CHECK_THROWS_AS(parse_embeddings(R"({"scale":0,"start":0,"end":1})" "\n"), ParseError);
    CHECK_THROWS_AS(parse_embeddings(R"({"scale":0,"start":1,"end":1,"vec":[1]})" "\n"),
                    ParseError);
    CHECK_THROWS_AS(parse_embeddings(R"({"scale":-1,"start":0,"end":1,"vec":[1]})" "\n"),
                    ParseError);
    CHECK_THROWS_AS(parse_embeddings(R"({"scale":0,"start":0,"end":1,"vec":[]})" "\n"), ParseError);
}

TEST_CASE("embeddings round-trip") {
    std::vector<EmbeddingRecord> recs;
    recs.push_back({0, 0.0, 1.5, {0.25, -0.75, 1.0}, 0});
    recs.push_back({0, 0.75, 2.25, {1.0, 2.0, 3.0}, 0});
    auto back = parse_embeddings(write_embeddings(recs));
    REQUIRE(back.size() == 2);
    CHECK(back[1].vec == recs[1].vec);
    CHECK(back[1].start_s == doctest::Approx(0.75));
}

// === role maps ===

TEST_CASE("parse_role_map") {
    auto roles = parse_role_map("alice teacher\nbob student\n# note\n");
    CHECK(roles.at("alice") == "teacher");
    CHECK(roles.at("bob") == "student");
    CHECK_THROWS_AS(parse_role_map("alice janitor\n"), ParseError);
    CHECK_THROWS_AS(parse_role_map("alice teacher\nalice student\n"), ParseError);
    CHECK_THROWS_AS(parse_role_map("alice\n"), ParseError);
    auto back = parse_role_map(write_role_map(roles));
    CHECK(back == roles);
}
