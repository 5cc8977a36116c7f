#include "diarkit/vad.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace diarkit {

namespace {

// Word/segment boundaries land on the frame grid via integer milliseconds,
// so 0.54 s is frame 27 exactly rather than 26.999....
std::int64_t to_ms(double seconds) { return std::llround(seconds * 1000.0); }

// Marks every frame whose [i*frame_ms, (i+1)*frame_ms) interval overlaps
// [start_ms, end_ms); intervals beyond total_frames are clipped.
void mark_overlap(std::vector<double>& probs, std::int64_t start_ms, std::int64_t end_ms,
                  int frame_ms) {
    if (end_ms <= start_ms) return;
    std::int64_t first = std::max<std::int64_t>(0, start_ms / frame_ms);
    std::int64_t last = std::min<std::int64_t>(static_cast<std::int64_t>(probs.size()) - 1,
                                               (end_ms - 1) / frame_ms);
    for (std::int64_t i = first; i <= last; ++i) probs[i] = 1.0;
}

}  // namespace

FrameTrack words_to_frames(const std::vector<Word>& words, int frame_ms, std::int64_t total_frames) {
    if (frame_ms <= 0) throw std::invalid_argument("frame_ms must be > 0");
    if (total_frames < 0) throw std::invalid_argument("total_frames must be >= 0");
    FrameTrack t;
    t.frame_ms = frame_ms;
    t.origin = TrackOrigin::asr;
    t.probs.assign(total_frames, 0.0);
    for (const auto& w : words) mark_overlap(t.probs, to_ms(w.start_s), to_ms(w.end_s), frame_ms);
    return t;
}

FrameTrack merge_window_scores(const std::vector<WindowScore>& windows, int frame_ms,
                               std::int64_t total_frames) {
    if (frame_ms <= 0) throw std::invalid_argument("frame_ms must be > 0");
    FrameTrack t;
    t.frame_ms = frame_ms;
    t.origin = TrackOrigin::frame_vad;
    t.probs.assign(total_frames, 0.0);
    size_t lo = 0;  // windows are sorted by start; slide past the ones ending before the midpoint
    for (std::int64_t i = 0; i < total_frames; ++i) {
        double mid = (static_cast<double>(i) + 0.5) * frame_ms / 1000.0;
        while (lo < windows.size() && windows[lo].end_s <= mid) ++lo;
        double sum = 0.0;
        int count = 0;
        for (size_t j = lo; j < windows.size() && windows[j].start_s <= mid; ++j) {
            if (mid < windows[j].end_s) {
                sum += windows[j].prob;
                ++count;
            }
        }
        if (count > 0) t.probs[i] = sum / count;
    }
    return t;
}

FrameTrack fuse(const FrameTrack& frame_vad, const FrameTrack& asr, FusionWeight w) {
    if (frame_vad.frame_ms != asr.frame_ms)
        throw std::invalid_argument("frame_ms mismatch: " + std::to_string(frame_vad.frame_ms) +
                                    " vs " + std::to_string(asr.frame_ms));
    if (w.alpha < 0.0 || w.alpha > 1.0) throw std::invalid_argument("alpha must be in [0,1]");
    FrameTrack out;
    out.frame_ms = frame_vad.frame_ms;
    out.origin = TrackOrigin::fused;
    size_t n = std::max(frame_vad.probs.size(), asr.probs.size());
    out.probs.resize(n);
    for (size_t i = 0; i < n; ++i) {
        double a = i < frame_vad.probs.size() ? frame_vad.probs[i] : 0.0;
        double b = i < asr.probs.size() ? asr.probs[i] : 0.0;
        out.probs[i] = w.alpha * a + (1.0 - w.alpha) * b;
    }
    return out;
}

std::vector<SpeechSegment> hysteresis_decode(const FrameTrack& track, const VadThresholds& th) {
    if (!(th.offset <= th.onset) || th.onset < 0.0 || th.onset > 1.0 || th.offset < 0.0)
        throw std::invalid_argument("need 0 <= offset <= onset <= 1");
    if (th.min_duration_on_s < 0 || th.min_duration_off_s < 0 || th.pad_onset_s < 0 ||
        th.pad_offset_s < 0)
        throw std::invalid_argument("durations must be >= 0");

    const double frame_s = track.frame_s();
    const double track_end = track.duration_s();
    std::vector<SpeechSegment> raw;
    bool in_speech = false;
    double start = 0.0;
    for (std::int64_t i = 0; i < track.frames(); ++i) {
        double p = track.probs[i];
        if (!in_speech && p >= th.onset) {
            in_speech = true;
            start = static_cast<double>(i) * frame_s;
        } else if (in_speech && p < th.offset) {
            in_speech = false;
            raw.push_back({start, static_cast<double>(i) * frame_s});
        }
    }
    if (in_speech) raw.push_back({start, track_end});

    // pad, then merge close segments, then drop short ones
    for (auto& s : raw) {
        s.start_s = std::max(0.0, s.start_s - th.pad_onset_s);
        s.end_s = std::min(track_end, s.end_s + th.pad_offset_s);
    }
    std::vector<SpeechSegment> merged;
    for (const auto& s : raw) {
        if (!merged.empty() && s.start_s - merged.back().end_s < th.min_duration_off_s)
            merged.back().end_s = std::max(merged.back().end_s, s.end_s);
        else
            merged.push_back(s);
    }
    std::vector<SpeechSegment> out;
    for (const auto& s : merged)
        if (!(s.dur_s() < th.min_duration_on_s)) out.push_back(s);
    return out;
}

FrameTrack segments_to_frames(const std::vector<SpeechSegment>& segs, int frame_ms,
                              std::int64_t total_frames) {
    if (frame_ms <= 0) throw std::invalid_argument("frame_ms must be > 0");
    FrameTrack t;
    t.frame_ms = frame_ms;
    t.origin = TrackOrigin::reference;
    t.probs.assign(total_frames, 0.0);
    for (const auto& s : segs) mark_overlap(t.probs, to_ms(s.start_s), to_ms(s.end_s), frame_ms);
    return t;
}

double total_speech_s(const std::vector<SpeechSegment>& segs) {
    double total = 0.0;
    for (const auto& s : segs) total += s.dur_s();
    return total;
}

}  // namespace diarkit
