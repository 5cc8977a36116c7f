#include "diarkit/formats.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include "text_util.hpp"

namespace diarkit {

using detail::fmt17;
using detail::fmt3;
using detail::is_blank;
using detail::parse_double_tok;
using detail::parse_int_tok;
using detail::split_lines;
using detail::split_ws;

const char* to_string(TrackOrigin o) {
    switch (o) {
        case TrackOrigin::frame_vad: return "frame_vad";
        case TrackOrigin::asr: return "asr";
        case TrackOrigin::fused: return "fused";
        case TrackOrigin::reference: return "reference";
    }
    return "frame_vad";
}

bool track_origin_from_string(const std::string& s, TrackOrigin* out) {
    if (s == "frame_vad") *out = TrackOrigin::frame_vad;
    else if (s == "asr") *out = TrackOrigin::asr;
    else if (s == "fused") *out = TrackOrigin::fused;
    else if (s == "reference") *out = TrackOrigin::reference;
    else return false;
    return true;
}

// === RTTM ===

std::vector<SpeakerTurn> parse_rttm(const std::string& text) {
    std::vector<SpeakerTurn> turns;
    auto lines = split_lines(text);
    for (size_t li = 0; li < lines.size(); ++li) {
        int ln = static_cast<int>(li) + 1;
        std::string_view line = lines[li];
        if (is_blank(line) || line.substr(0, 2) == ";;") continue;
        auto f = split_ws(line);
        if (f.size() < 9) throw ParseError(ln, "expected >= 9 fields, got " + std::to_string(f.size()));
        if (f[0] != "SPEAKER") throw ParseError(ln, "expected type SPEAKER, got '" + std::string(f[0]) + "'");
        SpeakerTurn t;
        t.file_id = std::string(f[1]);
        t.channel = parse_int_tok(f[2], ln, "channel");
        t.start_s = parse_double_tok(f[3], ln, "start");
        t.dur_s = parse_double_tok(f[4], ln, "duration");
        t.speaker = std::string(f[7]);
        if (t.channel < 1) throw ParseError(ln, "channel must be >= 1");
        if (t.start_s < 0) throw ParseError(ln, "negative start time");
        if (!(t.dur_s > 0)) throw ParseError(ln, "duration must be > 0");
        turns.push_back(std::move(t));
    }
    return turns;
}

std::string write_rttm(const std::vector<SpeakerTurn>& turns) {
    std::vector<SpeakerTurn> sorted = turns;
    std::sort(sorted.begin(), sorted.end(), [](const SpeakerTurn& a, const SpeakerTurn& b) {
        if (a.file_id != b.file_id) return a.file_id < b.file_id;
        if (a.start_s != b.start_s) return a.start_s < b.start_s;
        return a.speaker < b.speaker;
    });
    std::string out;
    for (const auto& t : sorted) {
        out += "SPEAKER " + t.file_id + " " + std::to_string(t.channel) + " " + fmt3(t.start_s) +
               " " + fmt3(t.dur_s) + " <NA> <NA> " + t.speaker + " <NA> <NA>\n";
    }
    return out;
}

// === CTM ===

std::vector<Word> parse_ctm(const std::string& text) {
    std::vector<Word> words;
    auto lines = split_lines(text);
    for (size_t li = 0; li < lines.size(); ++li) {
        int ln = static_cast<int>(li) + 1;
        std::string_view line = lines[li];
        if (is_blank(line) || line.substr(0, 2) == ";;") continue;
        auto f = split_ws(line);
        if (f.size() < 5) throw ParseError(ln, "expected >= 5 fields, got " + std::to_string(f.size()));
        double start = parse_double_tok(f[2], ln, "start");
        double dur = parse_double_tok(f[3], ln, "duration");
        if (start < 0) throw ParseError(ln, "negative start time");
        if (!(dur > 0)) throw ParseError(ln, "duration must be > 0");
        words.push_back(Word{std::string(f[4]), start, start + dur});
    }
    return words;
}

std::string write_ctm(const std::string& file_id, const std::vector<Word>& words) {
    std::string out;
    for (const auto& w : words)
        out += file_id + " 1 " + fmt3(w.start_s) + " " + fmt3(w.end_s - w.start_s) + " " + w.token + "\n";
    return out;
}

// === frame tracks ===

std::vector<EmbeddingRecord> parse_embeddings(const std::string& text) {
    std::vector<EmbeddingRecord> records;
    std::map<int, size_t> dim_by_scale;
    auto lines = split_lines(text);
    for (size_t li = 0; li < lines.size(); ++li) {
        int ln = static_cast<int>(li) + 1;
        if (is_blank(lines[li])) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(lines[li]);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(ln, std::string("bad record: ") + e.what());
        }
        if (!j.is_object() || !j.contains("scale") || !j.contains("start") || !j.contains("end") ||
            !j.contains("vec"))
            throw ParseError(ln, "record needs keys scale, start, end, vec");
        EmbeddingRecord r;
        try {
            r.scale_index = j.at("scale").get<int>();
            r.start_s = j.at("start").get<double>();
            r.end_s = j.at("end").get<double>();
            r.vec = j.at("vec").get<std::vector<double>>();
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(ln, std::string("bad record: ") + e.what());
        }
        r.source_line = ln;
        if (r.scale_index < 0) throw ParseError(ln, "scale must be >= 0");
        if (!(r.end_s > r.start_s)) throw ParseError(ln, "end must be > start");
        if (r.vec.empty()) throw ParseError(ln, "empty vec");
        auto [it, inserted] = dim_by_scale.try_emplace(r.scale_index, r.vec.size());
        if (!inserted && it->second != r.vec.size())
            throw ParseError(ln, "scale " + std::to_string(r.scale_index) + " vector dimension " +
                                     std::to_string(r.vec.size()) + " != " + std::to_string(it->second));
        records.push_back(std::move(r));
    }
    return records;
}

std::string write_embeddings(const std::vector<EmbeddingRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        nlohmann::json j;
        j["scale"] = r.scale_index;
        j["start"] = r.start_s;
        j["end"] = r.end_s;
        j["vec"] = r.vec;
        out += j.dump() + "\n";
    }
    return out;
}

FrameTrack parse_frame_track(const std::string& text) {
    FrameTrack track;
    bool saw_value = false;
    auto lines = split_lines(text);
    for (size_t li = 0; li < lines.size(); ++li) {
        int ln = static_cast<int>(li) + 1;
        std::string_view line = lines[li];
        if (!line.empty() && line[0] == '#') {
            if (saw_value) throw ParseError(ln, "header after data");
            if (line.substr(0, 10) == "#frame_ms=") {
                track.frame_ms = parse_int_tok(line.substr(10), ln, "frame_ms");
                if (track.frame_ms <= 0) throw ParseError(ln, "frame_ms must be > 0");
            } else if (line.substr(0, 8) == "#origin=") {
                if (!track_origin_from_string(std::string(line.substr(8)), &track.origin))
                    throw ParseError(ln, "unknown origin '" + std::string(line.substr(8)) + "'");
            } else {
                throw ParseError(ln, "unknown header '" + std::string(line) + "'");
            }
            continue;
        }
        if (is_blank(line)) throw ParseError(ln, "missing value");
        auto toks = split_ws(line);
        if (toks.size() != 1) throw ParseError(ln, "expected one value per line");
        double p = parse_double_tok(toks[0], ln, "probability");
        if (!(p >= 0.0 && p <= 1.0)) throw ParseError(ln, "probability outside [0,1]");
        track.probs.push_back(p);
        saw_value = true;
    }
    return track;
}

std::string write_frame_track(const FrameTrack& track) {
    std::string out = "#frame_ms=" + std::to_string(track.frame_ms) + "\n#origin=" +
                      to_string(track.origin) + "\n";
    for (double p : track.probs) out += fmt17(p) + "\n";
    return out;
}

// === role maps ===

std::map<std::string, std::string> parse_role_map(const std::string& text) {
    std::map<std::string, std::string> roles;
    auto lines = split_lines(text);
    for (size_t li = 0; li < lines.size(); ++li) {
        int ln = static_cast<int>(li) + 1;
        std::string_view line = lines[li];
        if (is_blank(line) || line[0] == '#') continue;
        auto f = split_ws(line);
        if (f.size() != 2) throw ParseError(ln, "expected 'speaker role'");
        std::string role(f[1]);
        if (role != "teacher" && role != "student")
            throw ParseError(ln, "role must be teacher or student, got '" + role + "'");
        auto [it, inserted] = roles.try_emplace(std::string(f[0]), role);
        (void)it;
        if (!inserted) throw ParseError(ln, "duplicate speaker '" + std::string(f[0]) + "'");
    }
    return roles;
}

std::string write_role_map(const std::map<std::string, std::string>& roles) {
    std::string out;
    for (const auto& [speaker, role] : roles) out += speaker + " " + role + "\n";
    return out;
}

// === files ===

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace diarkit
