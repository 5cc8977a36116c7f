#pragma once

// Multi-scale embedding windows over decoded speech, plus the cross-scale
// grouping that affinity computation consumes. The finest scale (last in
// the plan) is the base scale: one group per base window, each coarser
// scale contributing its nearest-center window from the same segment.

#include <string>
#include <vector>

#include "diarkit/types.hpp"

namespace diarkit {

struct ScaleSpec {
    double window_s = 1.5;
    double hop_s = 0.75;
};

struct MultiScalePlan {
    std::vector<ScaleSpec> scales;  // coarsest first, finest last
    std::vector<double> weights;    // one per scale, summing to 1
};

// Five scales 1.5..0.5 s, hop = window/2, equal weights.
MultiScalePlan default_plan();

void validate_plan(const MultiScalePlan& plan);

struct Window {
    double start_s = 0.0;
    double end_s = 0.0;
    int segment_index = 0;  // which speech segment produced it

    double center_s() const { return 0.5 * (start_s + end_s); }
    bool operator==(const Window&) const = default;
};

using ScaleWindows = std::vector<Window>;

std::vector<ScaleWindows> plan_windows(const std::vector<SpeechSegment>& speech,
                                       const MultiScalePlan& plan);

struct WindowGroup {
    std::vector<int> scale_indices;  // one window index per scale; last = base index
};

std::vector<WindowGroup> group_by_base_scale(const std::vector<ScaleWindows>& windows);

// Window-list file: plan header plus "start end segment_index" rows per scale.
struct WindowsFile {
    std::string file_id;
    MultiScalePlan plan;
    std::vector<ScaleWindows> windows;
};

std::string write_windows_file(const WindowsFile& wf);
WindowsFile parse_windows_file(const std::string& text);

}  // namespace diarkit
