#include "diarkit/segmentation.hpp"

#include <cmath>
#include <stdexcept>

#include "text_util.hpp"

namespace diarkit {

namespace {

constexpr double kEps = 1e-9;

std::string join_csv(const std::vector<double>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += detail::fmt17(v[i]);
    }
    return out;
}

std::vector<double> parse_csv(std::string_view s, int ln, const char* what) {
    std::vector<double> out;
    size_t pos = 0;
    while (pos <= s.size()) {
        size_t comma = s.find(',', pos);
        if (comma == std::string_view::npos) comma = s.size();
        out.push_back(detail::parse_double_tok(s.substr(pos, comma - pos), ln, what));
        pos = comma + 1;
        if (comma == s.size()) break;
    }
    return out;
}

}  // namespace

MultiScalePlan default_plan() {
    MultiScalePlan p;
    p.scales = {{1.5, 0.75}, {1.25, 0.625}, {1.0, 0.5}, {0.75, 0.375}, {0.5, 0.25}};
    p.weights = {0.2, 0.2, 0.2, 0.2, 0.2};
    return p;
}

void validate_plan(const MultiScalePlan& plan) {
    if (plan.scales.empty()) throw std::invalid_argument("plan needs at least one scale");
    if (plan.weights.size() != plan.scales.size())
        throw std::invalid_argument("one weight per scale required");
    double sum = 0.0;
    for (double w : plan.weights) {
        if (w < 0.0) throw std::invalid_argument("weights must be >= 0");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("weights must sum to 1");
    for (size_t i = 0; i < plan.scales.size(); ++i) {
        const auto& s = plan.scales[i];
        if (!(s.hop_s > 0.0) || s.hop_s > s.window_s + kEps)
            throw std::invalid_argument("need 0 < hop <= window per scale");
        if (i > 0 && s.window_s > plan.scales[i - 1].window_s + kEps)
            throw std::invalid_argument("scales must go from coarsest to finest");
    }
}

std::vector<ScaleWindows> plan_windows(const std::vector<SpeechSegment>& speech,
                                       const MultiScalePlan& plan) {
    validate_plan(plan);
    std::vector<ScaleWindows> out(plan.scales.size());
    for (size_t si = 0; si < plan.scales.size(); ++si) {
        const double w = plan.scales[si].window_s;
        const double h = plan.scales[si].hop_s;
        for (size_t gi = 0; gi < speech.size(); ++gi) {
            const double S = speech[gi].start_s, E = speech[gi].end_s;
            const double L = E - S;
            const int seg = static_cast<int>(gi);
            if (L < w - kEps) {  // short segment: one window spanning it
                out[si].push_back({S, E, seg});
                continue;
            }
            double last_end = S;
            for (int k = 0;; ++k) {
                double ws = S + k * h;
                if (ws + w > E + kEps) break;
                double we = std::min(ws + w, E);
                out[si].push_back({ws, we, seg});
                last_end = we;
            }
            double remainder = E - last_end;
            if (remainder > kEps && remainder >= w / 2.0 - kEps)
                out[si].push_back({E - w, E, seg});
        }
    }
    return out;
}

std::vector<WindowGroup> group_by_base_scale(const std::vector<ScaleWindows>& windows) {
    if (windows.empty()) return {};
    const size_t n_scales = windows.size();
    const ScaleWindows& base = windows.back();

    // windows are emitted segment-major, so each scale's windows for one
    // segment form a contiguous index range
    int max_seg = -1;
    for (const auto& sw : windows)
        for (const auto& win : sw) max_seg = std::max(max_seg, win.segment_index);
    std::vector<std::vector<std::pair<int, int>>> ranges(
        n_scales, std::vector<std::pair<int, int>>(max_seg + 1, {0, 0}));
    for (size_t s = 0; s < n_scales; ++s) {
        for (int i = 0; i < static_cast<int>(windows[s].size()); ++i) {
            int seg = windows[s][i].segment_index;
            auto& r = ranges[s][seg];
            if (r.first == r.second) r = {i, i + 1};
            else r.second = i + 1;
        }
    }

    std::vector<WindowGroup> groups(base.size());
    for (size_t bi = 0; bi < base.size(); ++bi) {
        const double c = base[bi].center_s();
        const int seg = base[bi].segment_index;
        WindowGroup g;
        g.scale_indices.resize(n_scales);
        for (size_t s = 0; s + 1 < n_scales; ++s) {
            auto [lo, hi] = ranges[s][seg];
            if (lo == hi)
                throw std::invalid_argument("no scale-" + std::to_string(s) +
                                            " window in segment " + std::to_string(seg));
            int best = lo;
            double best_d = std::abs(windows[s][lo].center_s() - c);
            for (int i = lo + 1; i < hi; ++i) {
                double d = std::abs(windows[s][i].center_s() - c);
                if (d < best_d) {  // ties keep the earlier window
                    best_d = d;
                    best = i;
                }
            }
            g.scale_indices[s] = best;
        }
        g.scale_indices[n_scales - 1] = static_cast<int>(bi);
        groups[bi] = std::move(g);
    }
    return groups;
}

// === windows file ===

std::string write_windows_file(const WindowsFile& wf) {
    validate_plan(wf.plan);
    if (wf.windows.size() != wf.plan.scales.size())
        throw std::invalid_argument("one window list per scale required");
    std::string out = "#diarkit-windows v1\n";
    out += "#file_id=" + wf.file_id + "\n";
    std::vector<double> scales, hops;
    for (const auto& s : wf.plan.scales) {
        scales.push_back(s.window_s);
        hops.push_back(s.hop_s);
    }
    out += "#scales=" + join_csv(scales) + "\n";
    out += "#hops=" + join_csv(hops) + "\n";
    out += "#weights=" + join_csv(wf.plan.weights) + "\n";
    for (size_t s = 0; s < wf.windows.size(); ++s) {
        out += "#scale=" + std::to_string(s) + "\n";
        for (const auto& w : wf.windows[s])
            out += detail::fmt17(w.start_s) + " " + detail::fmt17(w.end_s) + " " +
                   std::to_string(w.segment_index) + "\n";
    }
    return out;
}

WindowsFile parse_windows_file(const std::string& text) {
    auto lines = detail::split_lines(text);
    if (lines.empty() || lines[0] != "#diarkit-windows v1")
        throw ParseError(1, "expected '#diarkit-windows v1' header");
    WindowsFile wf;
    std::vector<double> scales, hops;
    int cur_scale = -1;
    for (size_t li = 1; li < lines.size(); ++li) {
        int ln = static_cast<int>(li) + 1;
        std::string_view line = lines[li];
        if (detail::is_blank(line)) continue;
        if (line[0] == '#') {
            if (line.substr(0, 9) == "#file_id=") wf.file_id = std::string(line.substr(9));
            else if (line.substr(0, 8) == "#scales=") scales = parse_csv(line.substr(8), ln, "scale");
            else if (line.substr(0, 6) == "#hops=") hops = parse_csv(line.substr(6), ln, "hop");
            else if (line.substr(0, 9) == "#weights=")
                wf.plan.weights = parse_csv(line.substr(9), ln, "weight");
            else if (line.substr(0, 7) == "#scale=") {
                int s = detail::parse_int_tok(line.substr(7), ln, "scale index");
                if (s != cur_scale + 1) throw ParseError(ln, "scale sections must be in order");
                cur_scale = s;
                wf.windows.emplace_back();
            } else {
                throw ParseError(ln, "unknown header '" + std::string(line) + "'");
            }
            continue;
        }
        if (cur_scale < 0) throw ParseError(ln, "window row before any #scale section");
        auto f = detail::split_ws(line);
        if (f.size() != 3) throw ParseError(ln, "expected 'start end segment_index'");
        Window w;
        w.start_s = detail::parse_double_tok(f[0], ln, "start");
        w.end_s = detail::parse_double_tok(f[1], ln, "end");
        w.segment_index = detail::parse_int_tok(f[2], ln, "segment index");
        if (!(w.end_s > w.start_s)) throw ParseError(ln, "window end must be > start");
        if (w.segment_index < 0) throw ParseError(ln, "segment index must be >= 0");
        wf.windows[cur_scale].push_back(w);
    }
    if (scales.size() != hops.size()) throw ParseError(1, "scales and hops differ in length");
    for (size_t i = 0; i < scales.size(); ++i) wf.plan.scales.push_back({scales[i], hops[i]});
    if (wf.plan.weights.empty() && !wf.plan.scales.empty())
        wf.plan.weights.assign(wf.plan.scales.size(), 1.0 / wf.plan.scales.size());
    validate_plan(wf.plan);
    if (wf.windows.size() != wf.plan.scales.size())
        throw ParseError(1, "window sections do not match declared scales");
    return wf;
}

}  // namespace diarkit
