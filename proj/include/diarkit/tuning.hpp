#pragma once

// Exhaustive grid search over (onset, offset, alpha) against a development
// set: every feasible triple runs the fuse -> decode -> segment -> cluster ->
// score pipeline per file and triples are ranked by duration-weighted mean
// DER (ties: lower FA, then lower onset/offset/alpha). Trials are
// independent and run in parallel; the ranking is deterministic.

#include <cstdint>
#include <string>
#include <vector>

#include "diarkit/clustering.hpp"
#include "diarkit/segmentation.hpp"
#include "diarkit/types.hpp"

namespace diarkit {

struct GridRange {
    double lo = 0.0, hi = 1.0, step = 0.05;
};

// lo, lo+step, ... up to hi inclusive, snapped to cancel accumulation error.
std::vector<double> grid_values(const GridRange& r);

struct GridSpec {
    GridRange onset{0.3, 0.9, 0.05};
    GridRange offset{0.1, 0.8, 0.05};
    GridRange alpha{0.0, 1.0, 0.05};
};

struct DevFile {
    std::string file_id;
    FrameTrack frame_vad;
    FrameTrack asr;  // zero-length when absent; treated as all-non-speech
    bool has_asr = false;
    std::vector<SpeakerTurn> ref;
    std::vector<EmbeddingRecord> embeddings;  // empty -> VAD-only scoring
    bool has_embeddings = false;
    MultiScalePlan plan;  // used only when embeddings are present
};

struct TrialResult {
    double onset = 0.0, offset = 0.0, alpha = 0.0;
    double mean_der = 0.0, mean_fa = 0.0, mean_miss = 0.0, mean_cer = 0.0;
    bool failed = false;
    std::string fail_reason;
};

struct GridSearchResult {
    std::vector<TrialResult> ranked;  // successful trials, best first
    std::vector<TrialResult> failed;
    int evaluated = 0;   // feasible triples
    int infeasible = 0;  // triples skipped because offset > onset
};

GridSearchResult grid_search(const std::vector<DevFile>& dev, const GridSpec& grid,
                             CountMethod k_mode, std::uint64_t seed);

// Speech/non-speech scoring only: (fa_rate, miss_rate) against the union of
// reference speech, normalized by total reference speech.
std::pair<double, double> vad_metrics(const std::vector<SpeechSegment>& hyp_speech,
                                      const std::vector<SpeakerTurn>& ref);

// Dev manifest: five whitespace-separated columns per line
// (frame_track asr_track ref_rttm embeddings windows), "-" for absent.
struct DevManifestRow {
    std::string frame_track, asr_track, ref_rttm, embeddings, windows;
};

std::vector<DevManifestRow> parse_dev_manifest(const std::string& text);

// Reads every referenced file; relative paths resolve against base_dir.
std::vector<DevFile> load_dev_set(const std::vector<DevManifestRow>& rows,
                                  const std::string& base_dir);

}  // namespace diarkit
