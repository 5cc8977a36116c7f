#pragma once

// End-to-end run: fuse -> decode -> plan windows -> ingest embeddings ->
// cluster -> turns, emitting a hypothesis RTTM plus a JSON run report with
// every effective parameter, stage timings and stage counts. Reruns with
// the same config and seed produce byte-identical RTTM.

#include <cstdint>
#include <string>

#include <json.hpp>

#include "diarkit/segmentation.hpp"
#include "diarkit/vad.hpp"

namespace diarkit {

struct RunConfig {
    std::string frame_vad_path;
    std::string asr_ctm_path;    // at most one ASR source
    std::string asr_track_path;
    std::string embeddings_path;
    std::string out_rttm_path;
    std::string report_json_path;  // optional
    std::string file_id = "file";
    double alpha = 1.0;
    VadThresholds thresholds;
    MultiScalePlan plan;  // empty -> default_plan()
    int num_speakers = 0;  // 0 = estimate by eigen-gap
    int max_speakers = 10;
    bool vad_only = false;
    std::uint64_t seed = 42;
};

nlohmann::json diarize(const RunConfig& cfg);

// Human-readable rendering of a run or score report: DER/FA/MISS/CER table
// (percentages, one decimal), breakdown grid when present.
std::string render_report(const nlohmann::json& report);

nlohmann::json der_report_to_json(const struct DerReport& rep);
nlohmann::json breakdown_to_json(const struct ErrorBreakdown& bd);

}  // namespace diarkit
