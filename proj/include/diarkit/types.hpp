#pragma once

// Core domain types shared across the pipeline stages.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace diarkit {

// Parse failure carrying the 1-based line number of the offending input line.
class ParseError : public std::runtime_error {
public:
    ParseError(int line, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

// One speaker-labelled interval, as carried by RTTM.
struct SpeakerTurn {
    std::string file_id;
    int channel = 1;
    double start_s = 0.0;
    double dur_s = 0.0;
    std::string speaker;

    double end_s() const { return start_s + dur_s; }
    bool operator==(const SpeakerTurn&) const = default;
};

// One recognized word with timestamps, as carried by CTM.
struct Word {
    std::string token;
    double start_s = 0.0;
    double end_s = 0.0;

    bool operator==(const Word&) const = default;
};

enum class TrackOrigin { frame_vad, asr, fused, reference };

const char* to_string(TrackOrigin o);
bool track_origin_from_string(const std::string& s, TrackOrigin* out);

// Per-frame speech probabilities at a fixed frame duration. The lingua franca
// between VAD sources: frame-wise models, ASR word timestamps and their fusion
// all end up here.
struct FrameTrack {
    int frame_ms = 20;
    std::vector<double> probs;
    TrackOrigin origin = TrackOrigin::frame_vad;

    std::int64_t frames() const { return static_cast<std::int64_t>(probs.size()); }
    double frame_s() const { return frame_ms / 1000.0; }
    double duration_s() const { return static_cast<double>(frames()) * frame_s(); }
    bool operator==(const FrameTrack&) const = default;
};

// Unlabelled speech interval; lists are kept sorted and non-overlapping.
struct SpeechSegment {
    double start_s = 0.0;
    double end_s = 0.0;

    double dur_s() const { return end_s - start_s; }
    bool operator==(const SpeechSegment&) const = default;
};

// Segment-wise VAD output: one speech probability per analysis window.
struct WindowScore {
    double start_s = 0.0;
    double end_s = 0.0;
    double prob = 0.0;
};

// One speaker-embedding vector with its source window, ingested from file.
struct EmbeddingRecord {
    int scale_index = 0;
    double start_s = 0.0;
    double end_s = 0.0;
    std::vector<double> vec;
    int source_line = 0;  // 1-based when parsed from a file, 0 for synthetic records

    double center_s() const { return 0.5 * (start_s + end_s); }
};

}  // namespace diarkit
