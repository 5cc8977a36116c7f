#pragma once

// Voice-activity plumbing: convert word timestamps and window scores onto
// the frame grid, fuse frame tracks, and decode a track into speech
// segments with two-threshold hysteresis.

#include <cstdint>
#include <vector>

#include "diarkit/types.hpp"

namespace diarkit {

struct VadThresholds {
    double onset = 0.7;
    double offset = 0.3;
    double min_duration_on_s = 0.1;
    double min_duration_off_s = 0.1;
    double pad_onset_s = 0.0;
    double pad_offset_s = 0.0;
};

struct FusionWeight {
    double alpha = 1.0;  // weight of the frame-VAD track; 1-alpha goes to the ASR track
};

// prob = 1.0 for every frame whose interval overlaps any word, else 0.0.
FrameTrack words_to_frames(const std::vector<Word>& words, int frame_ms, std::int64_t total_frames);

// Each frame's prob is the mean score of the windows covering its midpoint.
FrameTrack merge_window_scores(const std::vector<WindowScore>& windows, int frame_ms,
                               std::int64_t total_frames);

// Y_i = alpha * frame_vad_i + (1 - alpha) * asr_i; the shorter track is
// zero-padded to the longer one.
FrameTrack fuse(const FrameTrack& frame_vad, const FrameTrack& asr, FusionWeight w);

// Two-state automaton: enter speech at prob >= onset, leave at prob < offset;
// then pad, merge gaps < min_duration_off_s, drop segments < min_duration_on_s.
std::vector<SpeechSegment> hysteresis_decode(const FrameTrack& track, const VadThresholds& th);

FrameTrack segments_to_frames(const std::vector<SpeechSegment>& segs, int frame_ms,
                              std::int64_t total_frames);

double total_speech_s(const std::vector<SpeechSegment>& segs);

}  // namespace diarkit
