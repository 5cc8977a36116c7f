#pragma once

// DER scoring with optimal speaker mapping, plus the role/duration error
// breakdown and Spearman rank correlation used for error analysis.
//
// DER = (FA + MISS + CER) / total reference speech. The timeline is cut at
// every turn boundary; within a slice with reference speaker set R and
// hypothesis set H (after mapping): MISS gains max(0,|R|-|H|), FA gains
// max(0,|H|-|R|) and CER gains min(|R|,|H|) minus the correctly mapped
// count, each times the slice length.

#include <array>
#include <map>
#include <string>
#include <vector>

#include "diarkit/types.hpp"

namespace diarkit {

struct OverlapMatrix {
    std::vector<std::string> ref_speakers;  // sorted unique
    std::vector<std::string> hyp_speakers;  // sorted unique
    std::vector<double> seconds;            // row-major ref x hyp

    double& at(size_t r, size_t h) { return seconds[r * hyp_speakers.size() + h]; }
    double at(size_t r, size_t h) const { return seconds[r * hyp_speakers.size() + h]; }
};

// Seconds during which each (ref, hyp) speaker pair is simultaneously active.
OverlapMatrix overlap_matrix(const std::vector<SpeakerTurn>& ref,
                             const std::vector<SpeakerTurn>& hyp);

// Maximum-overlap one-to-one assignment (Hungarian, exact). Zero-overlap
// pairs stay unmapped; ties resolve to the lexicographically first optimal
// mapping over (ref index, hyp index).
std::vector<std::pair<int, int>> optimal_mapping(const OverlapMatrix& m);

struct DerReport {
    double total_ref_speech_s = 0.0;
    double fa_s = 0.0, miss_s = 0.0, cer_s = 0.0;
    double der = 0.0, fa_rate = 0.0, miss_rate = 0.0, cer_rate = 0.0;
    double collar_s = 0.0;
    bool score_overlap = true;
    // per file: hypothesis speaker -> reference speaker
    std::map<std::string, std::map<std::string, std::string>> mapping;
};

// Scores per file (mapping chosen per file on the scored timeline), then
// aggregates seconds across files. collar_s excises that margin around
// every reference boundary; score_overlap=false drops slices where the
// reference has more than one active speaker.
DerReport der(const std::vector<SpeakerTurn>& ref, const std::vector<SpeakerTurn>& hyp,
              double collar_s = 0.0, bool score_overlap = true);

// Table of per-column percentages by role and reference-segment duration:
// short < 2 s, medium 2-5 s, long > 5 s.
struct BreakdownCell {
    double cer_pct = 0.0, fa_pct = 0.0, miss_pct = 0.0, correct_pct = 0.0;
    double ratio_pct = 0.0;  // bucket share of the role's segment count
    bool empty = true;
};

struct ErrorBreakdown {
    static constexpr std::array<const char*, 3> bucket_names = {"short", "medium", "long"};
    std::map<std::string, std::array<BreakdownCell, 3>> cells;  // role -> buckets
};

ErrorBreakdown error_breakdown(const std::vector<SpeakerTurn>& ref,
                               const std::vector<SpeakerTurn>& hyp,
                               const std::map<std::string, std::string>& roles);

// Pearson correlation of fractional ranks, ties averaged.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace diarkit
