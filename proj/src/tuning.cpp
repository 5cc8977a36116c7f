#include "diarkit/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <stdexcept>
#include <tuple>

#include "diarkit/formats.hpp"
#include "diarkit/scoring.hpp"
#include "diarkit/vad.hpp"
#include "text_util.hpp"

namespace diarkit {

namespace {

int oracle_speaker_count(const std::vector<SpeakerTurn>& ref) {
    std::set<std::string> s;
    for (const auto& t : ref) s.insert(t.speaker);
    return static_cast<int>(s.size());
}

// One (onset, offset, alpha) evaluation over the whole dev set,
// duration-weighted across files.
TrialResult run_trial(const std::vector<DevFile>& dev, double onset, double offset, double alpha,
                      CountMethod k_mode, std::uint64_t seed) {
    TrialResult res;
    res.onset = onset;
    res.offset = offset;
    res.alpha = alpha;
    double total = 0.0, fa = 0.0, miss = 0.0, cer = 0.0;
    try {
        for (const auto& file : dev) {
            FrameTrack asr = file.has_asr ? file.asr : FrameTrack{file.frame_vad.frame_ms, {},
                                                                  TrackOrigin::asr};
            FrameTrack fused = fuse(file.frame_vad, asr, {alpha});
            VadThresholds th;
            th.onset = onset;
            th.offset = offset;
            auto speech = hysteresis_decode(fused, th);

            std::vector<SpeakerTurn> hyp;
            if (file.has_embeddings && !speech.empty()) {
                auto windows = plan_windows(speech, file.plan);
                if (!windows.back().empty()) {
                    auto groups = group_by_base_scale(windows);
                    auto set = align_embeddings(file.embeddings, windows);
                    auto aff = multi_scale_affinity(set, groups, file.plan.weights);
                    int k = k_mode == CountMethod::oracle
                                ? oracle_speaker_count(file.ref)
                                : estimate_num_speakers(aff, 10);
                    k = std::min(k, aff.n());
                    auto labels = spectral_cluster(aff, k, seed);
                    hyp = labels_to_turns(windows.back(), labels.labels, file.file_id);
                }
            } else {
                for (const auto& s : speech)
                    hyp.push_back({file.file_id, 1, s.start_s, s.dur_s(), "speech"});
            }
            DerReport rep = der(file.ref, hyp);
            total += rep.total_ref_speech_s;
            fa += rep.fa_s;
            miss += rep.miss_s;
            cer += rep.cer_s;
        }
        if (!(total > 0.0)) throw std::runtime_error("no reference speech in dev set");
        res.mean_fa = fa / total;
        res.mean_miss = miss / total;
        res.mean_cer = cer / total;
        res.mean_der = res.mean_fa + res.mean_miss + res.mean_cer;
    } catch (const std::exception& e) {
        res.failed = true;
        res.fail_reason = e.what();
    }
    return res;
}

std::string resolve(const std::string& path, const std::string& base_dir) {
    namespace fs = std::filesystem;
    fs::path p(path);
    if (p.is_absolute() || base_dir.empty()) return path;
    return (fs::path(base_dir) / p).string();
}

}  // namespace

std::vector<double> grid_values(const GridRange& r) {
    if (!(r.step > 0.0)) throw std::invalid_argument("grid step must be > 0");
    if (r.lo < 0.0 || r.hi > 1.0 || r.lo > r.hi)
        throw std::invalid_argument("grid range must lie within [0,1]");
    std::vector<double> vals;
    int count = static_cast<int>(std::floor((r.hi - r.lo) / r.step + 1e-9)) + 1;
    for (int i = 0; i < count; ++i) {
        double v = r.lo + i * r.step;
        vals.push_back(std::round(v * 1e9) / 1e9);  // snap accumulated error
    }
    return vals;
}

GridSearchResult grid_search(const std::vector<DevFile>& dev, const GridSpec& grid,
                             CountMethod k_mode, std::uint64_t seed) {
    if (dev.empty()) throw std::invalid_argument("dev set is empty");
    const auto onsets = grid_values(grid.onset);
    const auto offsets = grid_values(grid.offset);
    const auto alphas = grid_values(grid.alpha);

    struct Triple {
        double onset, offset, alpha;
    };
    std::vector<Triple> triples;
    int infeasible = 0;
    for (double on : onsets) {
        for (double off : offsets) {
            if (off > on + 1e-12) {
                infeasible += static_cast<int>(alphas.size());
                continue;
            }
            for (double al : alphas) triples.push_back({on, off, al});
        }
    }

    std::vector<TrialResult> results(triples.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(triples.size()); ++i)
        results[i] = run_trial(dev, triples[i].onset, triples[i].offset, triples[i].alpha, k_mode,
                               seed);

    GridSearchResult out;
    out.evaluated = static_cast<int>(triples.size());
    out.infeasible = infeasible;
    for (auto& r : results) (r.failed ? out.failed : out.ranked).push_back(std::move(r));
    std::sort(out.ranked.begin(), out.ranked.end(), [](const TrialResult& a, const TrialResult& b) {
        return std::tie(a.mean_der, a.mean_fa, a.onset, a.offset, a.alpha) <
               std::tie(b.mean_der, b.mean_fa, b.onset, b.offset, b.alpha);
    });
    return out;
}

std::pair<double, double> vad_metrics(const std::vector<SpeechSegment>& hyp_speech,
                                      const std::vector<SpeakerTurn>& ref) {
    std::vector<std::pair<double, double>> ref_iv;
    for (const auto& t : ref) ref_iv.push_back({t.start_s, t.end_s()});
    std::sort(ref_iv.begin(), ref_iv.end());
    std::vector<std::pair<double, double>> ref_union;
    for (const auto& iv : ref_iv) {
        if (!ref_union.empty() && iv.first <= ref_union.back().second)
            ref_union.back().second = std::max(ref_union.back().second, iv.second);
        else
            ref_union.push_back(iv);
    }
    double total_ref = 0.0;
    for (const auto& iv : ref_union) total_ref += iv.second - iv.first;
    if (!(total_ref > 0.0)) throw std::runtime_error("no reference speech");

    std::vector<double> cuts;
    for (const auto& iv : ref_union) {
        cuts.push_back(iv.first);
        cuts.push_back(iv.second);
    }
    for (const auto& s : hyp_speech) {
        cuts.push_back(s.start_s);
        cuts.push_back(s.end_s);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    auto covered = [](const std::vector<std::pair<double, double>>& ivs, double t) {
        for (const auto& iv : ivs)
            if (iv.first <= t && t < iv.second) return true;
        return false;
    };
    std::vector<std::pair<double, double>> hyp_iv;
    for (const auto& s : hyp_speech) hyp_iv.push_back({s.start_s, s.end_s});

    double fa = 0.0, miss = 0.0;
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
        double dt = cuts[i + 1] - cuts[i];
        if (dt <= 0.0) continue;
        double mid = 0.5 * (cuts[i] + cuts[i + 1]);
        bool in_ref = covered(ref_union, mid);
        bool in_hyp = covered(hyp_iv, mid);
        if (in_hyp && !in_ref) fa += dt;
        if (in_ref && !in_hyp) miss += dt;
    }
    return {fa / total_ref, miss / total_ref};
}

std::vector<DevManifestRow> parse_dev_manifest(const std::string& text) {
    std::vector<DevManifestRow> rows;
    auto lines = detail::split_lines(text);
    for (size_t li = 0; li < lines.size(); ++li) {
        int ln = static_cast<int>(li) + 1;
        auto line = lines[li];
        if (detail::is_blank(line) || line[0] == '#') continue;
        auto f = detail::split_ws(line);
        if (f.size() != 5)
            throw ParseError(ln, "expected 5 columns (frame_track asr_track ref_rttm embeddings "
                                 "windows), got " + std::to_string(f.size()));
        auto col = [](std::string_view v) { return v == "-" ? std::string() : std::string(v); };
        DevManifestRow row{col(f[0]), col(f[1]), col(f[2]), col(f[3]), col(f[4])};
        if (row.frame_track.empty()) throw ParseError(ln, "frame_track column is required");
        if (row.ref_rttm.empty()) throw ParseError(ln, "ref_rttm column is required");
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<DevFile> load_dev_set(const std::vector<DevManifestRow>& rows,
                                  const std::string& base_dir) {
    std::vector<DevFile> dev;
    for (const auto& row : rows) {
        DevFile f;
        f.frame_vad = parse_frame_track(read_text_file(resolve(row.frame_track, base_dir)));
        if (!row.asr_track.empty()) {
            f.asr = parse_frame_track(read_text_file(resolve(row.asr_track, base_dir)));
            f.has_asr = true;
        }
        f.ref = parse_rttm(read_text_file(resolve(row.ref_rttm, base_dir)));
        if (f.ref.empty()) throw std::runtime_error(row.ref_rttm + ": empty reference");
        f.file_id = f.ref.front().file_id;
        for (const auto& t : f.ref)
            if (t.file_id != f.file_id)
                throw std::runtime_error(row.ref_rttm + ": reference must cover a single file");
        if (!row.embeddings.empty()) {
            f.embeddings = parse_embeddings(read_text_file(resolve(row.embeddings, base_dir)));
            f.has_embeddings = true;
            if (!row.windows.empty()) {
                WindowsFile wf = parse_windows_file(read_text_file(resolve(row.windows, base_dir)));
                f.plan = wf.plan;
            } else {
                f.plan = default_plan();
            }
        }
        dev.push_back(std::move(f));
    }
    return dev;
}

}  // namespace diarkit
