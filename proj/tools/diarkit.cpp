// diarkit — command-line front end for the diarization pipeline stages.
//
// Subcommands: denoise, vad fuse, vad decode, segment, cluster, diarize,
// score, analyze, tune, report. Options can also come from an INI config
// file (--config); flags given on the command line win. DIARKIT_SEED
// overrides the default seed where one applies.

#include <algorithm>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "diarkit/clustering.hpp"
#include "diarkit/denoise.hpp"
#include "diarkit/formats.hpp"
#include "diarkit/pipeline.hpp"
#include "diarkit/scoring.hpp"
#include "diarkit/segmentation.hpp"
#include "diarkit/tuning.hpp"
#include "diarkit/vad.hpp"

namespace {

using namespace diarkit;

// ===================== small helpers =====================

std::string pct1(double rate) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", rate * 100.0);
    return buf;
}

std::vector<double> parse_csv_doubles(const std::string& s, const char* flag) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            size_t pos = 0;
            double v = std::stod(tok, &pos);
            if (pos != tok.size()) throw std::invalid_argument(tok);
            out.push_back(v);
        } catch (const std::exception&) {
            throw std::runtime_error(std::string(flag) + ": '" + tok + "' is not a number");
        }
    }
    if (out.empty()) throw std::runtime_error(std::string(flag) + ": empty list");
    return out;
}

// --scales/--hops/--weights -> plan; all empty -> default five-scale plan.
MultiScalePlan build_plan(const std::string& scales, const std::string& hops,
                          const std::string& weights) {
    if (scales.empty()) return default_plan();
    auto ws = parse_csv_doubles(scales, "--scales");
    if (hops.empty()) throw std::runtime_error("--scales needs --hops");
    auto hs = parse_csv_doubles(hops, "--hops");
    if (hs.size() != ws.size())
        throw std::runtime_error("expected " + std::to_string(ws.size()) + " hops for " +
                                 std::to_string(ws.size()) + " scales, got " +
                                 std::to_string(hs.size()));
    MultiScalePlan plan;
    for (size_t i = 0; i < ws.size(); ++i) plan.scales.push_back({ws[i], hs[i]});
    if (weights.empty()) {
        plan.weights.assign(ws.size(), 1.0 / static_cast<double>(ws.size()));
    } else {
        plan.weights = parse_csv_doubles(weights, "--weights");
    }
    validate_plan(plan);
    return plan;
}

// "auto" -> 0 (estimate), otherwise a positive integer.
int parse_num_speakers(const std::string& s) {
    if (s == "auto") return 0;
    try {
        size_t pos = 0;
        int k = std::stoi(s, &pos);
        if (pos != s.size() || k < 1) throw std::invalid_argument(s);
        return k;
    } catch (const std::exception&) {
        throw std::runtime_error("--num-speakers must be a positive integer or 'auto', got '" + s +
                                 "'");
    }
}

// "lo:hi:step" or a single value.
GridRange parse_grid_range(const std::string& s, const char* flag) {
    auto parts = parse_csv_doubles([&] {
        std::string t = s;
        std::replace(t.begin(), t.end(), ':', ',');
        return t;
    }(), flag);
    if (parts.size() == 1) return {parts[0], parts[0], 1.0};
    if (parts.size() == 3) return {parts[0], parts[1], parts[2]};
    throw std::runtime_error(std::string(flag) + ": expected lo:hi:step or a single value");
}

// Union of turn intervals, sorted and merged.
std::vector<SpeechSegment> turn_support(std::vector<SpeakerTurn> turns) {
    std::sort(turns.begin(), turns.end(), [](const SpeakerTurn& a, const SpeakerTurn& b) {
        return a.start_s < b.start_s;
    });
    std::vector<SpeechSegment> out;
    for (const auto& t : turns) {
        if (!out.empty() && t.start_s <= out.back().end_s)
            out.back().end_s = std::max(out.back().end_s, t.end_s());
        else
            out.push_back({t.start_s, t.end_s()});
    }
    return out;
}

FrameTrack asr_track_from_ctm(const std::vector<Word>& words, int frame_ms,
                              std::int64_t min_frames) {
    std::int64_t frames = min_frames;
    for (const auto& w : words) {
        std::int64_t end_ms = std::llround(w.end_s * 1000.0);
        frames = std::max(frames, (end_ms + frame_ms - 1) / frame_ms);
    }
    return words_to_frames(words, frame_ms, frames);
}

std::string resolve_path(const std::string& base, const std::string& p) {
    std::filesystem::path rel(p);
    if (rel.is_absolute() || base.empty()) return p;
    return (std::filesystem::path(base) / rel).string();
}

// ===================== denoise =====================

struct DenoiseOpts {
    std::vector<std::string> inputs;
    std::string out_dir;
    std::string manifest_path;
    SpectralGateConfig cfg;
};

void run_denoise(const DenoiseOpts& o) {
    auto entries = make_augmentation_manifest(o.inputs, o.out_dir, o.cfg);
    for (const auto& e : entries) std::printf("%s -> %s\n", e.original.c_str(), e.denoised.c_str());
    if (!o.manifest_path.empty()) {
        write_text_file(o.manifest_path, write_manifest(entries));
        std::printf("wrote %s (%zu entries)\n", o.manifest_path.c_str(), entries.size());
    }
}

// ===================== vad fuse / vad decode =====================

struct FuseOpts {
    std::string frame_vad, asr_ctm, asr_track, out;
    double alpha = 1.0;
};

void run_fuse(const FuseOpts& o) {
    FrameTrack fvad = parse_frame_track(read_text_file(o.frame_vad));
    FrameTrack asr;
    if (!o.asr_ctm.empty()) {
        asr = asr_track_from_ctm(parse_ctm(read_text_file(o.asr_ctm)), fvad.frame_ms,
                                 fvad.frames());
    } else if (!o.asr_track.empty()) {
        asr = parse_frame_track(read_text_file(o.asr_track));
    } else {
        throw std::runtime_error("give an ASR source: --asr-ctm or --asr-track");
    }
    FrameTrack fused = fuse(fvad, asr, {o.alpha});
    write_text_file(o.out, write_frame_track(fused));
    std::printf("wrote %s (%" PRId64 " frames at %d ms)\n", o.out.c_str(), fused.frames(),
                fused.frame_ms);
}

struct DecodeOpts {
    std::string track, out, file_id = "file";
    VadThresholds th;
};

void run_decode(const DecodeOpts& o) {
    FrameTrack track = parse_frame_track(read_text_file(o.track));
    auto speech = hysteresis_decode(track, o.th);
    std::vector<SpeakerTurn> turns;
    for (const auto& s : speech) turns.push_back({o.file_id, 1, s.start_s, s.dur_s(), "speech"});
    write_text_file(o.out, write_rttm(turns));
    std::printf("wrote %s (%zu segments, %.3f s speech)\n", o.out.c_str(), speech.size(),
                total_speech_s(speech));
}

// ===================== segment =====================

struct SegmentOpts {
    std::string speech, out, file_id;
    std::string scales, hops, weights;
};

void run_segment(const SegmentOpts& o) {
    auto turns = parse_rttm(read_text_file(o.speech));
    WindowsFile wf;
    wf.file_id = !o.file_id.empty() ? o.file_id : (turns.empty() ? "file" : turns[0].file_id);
    wf.plan = build_plan(o.scales, o.hops, o.weights);
    wf.windows = plan_windows(turn_support(turns), wf.plan);
    write_text_file(o.out, write_windows_file(wf));
    size_t total = 0;
    for (const auto& sw : wf.windows) total += sw.size();
    std::printf("wrote %s (%zu windows across %zu scales)\n", o.out.c_str(), total,
                wf.windows.size());
}

// ===================== cluster =====================

struct ClusterOpts {
    std::string embeddings, windows, out;
    std::string num_speakers = "auto";
    int max_speakers = 10;
    std::uint64_t seed = 42;
};

void run_cluster(const ClusterOpts& o) {
    WindowsFile wf = parse_windows_file(read_text_file(o.windows));
    auto records = parse_embeddings(read_text_file(o.embeddings));
    auto groups = group_by_base_scale(wf.windows);
    if (groups.empty()) {
        write_text_file(o.out, write_rttm({}));
        std::printf("wrote %s (no speech windows)\n", o.out.c_str());
        return;
    }
    EmbeddingSet set = align_embeddings(records, wf.windows);
    AffinityMatrix aff = multi_scale_affinity(set, groups, wf.plan.weights);
    int k = parse_num_speakers(o.num_speakers);
    CountMethod method = CountMethod::oracle;
    if (k == 0) {
        k = estimate_num_speakers(aff, o.max_speakers);
        method = CountMethod::eigen_gap;
    }
    ClusterResult res = spectral_cluster(aff, k, o.seed);
    auto turns = labels_to_turns(wf.windows.back(), res.labels, wf.file_id);
    write_text_file(o.out, write_rttm(turns));
    std::printf("wrote %s (%d speakers%s, %zu turns)\n", o.out.c_str(), res.k,
                method == CountMethod::eigen_gap ? " by eigen-gap" : "", turns.size());
}

// ===================== diarize =====================

struct DiarizeOpts {
    RunConfig cfg;
    std::string num_speakers = "auto";
    std::string scales, hops, weights;
};

void run_diarize(DiarizeOpts o) {
    o.cfg.plan = build_plan(o.scales, o.hops, o.weights);
    o.cfg.num_speakers = parse_num_speakers(o.num_speakers);
    nlohmann::json report = diarize(o.cfg);
    std::fputs(render_report(report).c_str(), stdout);
}

// ===================== score =====================

struct ScoreOpts {
    std::string ref, hyp, roles, json_out;
    double collar = 0.0;
    bool no_overlap = false;
    bool breakdown = false;
};

void run_score(const ScoreOpts& o) {
    auto ref = parse_rttm(read_text_file(o.ref));
    auto hyp = parse_rttm(read_text_file(o.hyp));
    DerReport rep = der(ref, hyp, o.collar, !o.no_overlap);
    nlohmann::json report;
    report["score"] = der_report_to_json(rep);
    if (o.breakdown || !o.roles.empty()) {
        if (o.roles.empty()) throw std::runtime_error("--breakdown needs --roles");
        auto roles = parse_role_map(read_text_file(o.roles));
        report["breakdown"] = breakdown_to_json(error_breakdown(ref, hyp, roles));
    }
    std::fputs(render_report(report).c_str(), stdout);
    if (!o.json_out.empty()) {
        write_text_file(o.json_out, report.dump(2) + "\n");
        std::printf("wrote %s\n", o.json_out.c_str());
    }
}

// ===================== analyze =====================

struct AnalyzeOpts {
    std::string pairs, roles, json_out;
    double collar = 0.0;
    bool no_overlap = false;
};

struct PairRow {
    std::string ref, hyp;
};

std::vector<PairRow> parse_pairs_manifest(const std::string& text) {
    std::vector<PairRow> rows;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::stringstream ls(line);
        std::string ref, hyp, extra;
        if (!(ls >> ref) || ref[0] == '#') continue;
        if (!(ls >> hyp)) throw ParseError(lineno, "expected 'ref.rttm hyp.rttm'");
        if (ls >> extra) throw ParseError(lineno, "trailing field '" + extra + "'");
        rows.push_back({ref, hyp});
    }
    return rows;
}

void run_analyze(const AnalyzeOpts& o) {
    auto rows = parse_pairs_manifest(read_text_file(o.pairs));
    if (rows.empty()) throw std::runtime_error("no ref/hyp pairs in " + o.pairs);
    std::string base = std::filesystem::path(o.pairs).parent_path().string();

    std::vector<double> ders, vad_errs;
    double total_s = 0, fa_s = 0, miss_s = 0, cer_s = 0;
    std::vector<SpeakerTurn> all_ref, all_hyp;
    nlohmann::json files = nlohmann::json::array();

    std::printf("%-28s %8s %8s %8s %8s %8s\n", "file", "DER", "FA", "MISS", "CER", "FA+MISS");
    for (const auto& row : rows) {
        auto ref = parse_rttm(read_text_file(resolve_path(base, row.ref)));
        auto hyp = parse_rttm(read_text_file(resolve_path(base, row.hyp)));
        DerReport rep = der(ref, hyp, o.collar, !o.no_overlap);
        ders.push_back(rep.der);
        vad_errs.push_back(rep.fa_rate + rep.miss_rate);
        total_s += rep.total_ref_speech_s;
        fa_s += rep.fa_s;
        miss_s += rep.miss_s;
        cer_s += rep.cer_s;
        all_ref.insert(all_ref.end(), ref.begin(), ref.end());
        all_hyp.insert(all_hyp.end(), hyp.begin(), hyp.end());
        std::printf("%-28s %8s %8s %8s %8s %8s\n", row.ref.c_str(), pct1(rep.der).c_str(),
                    pct1(rep.fa_rate).c_str(), pct1(rep.miss_rate).c_str(),
                    pct1(rep.cer_rate).c_str(), pct1(rep.fa_rate + rep.miss_rate).c_str());
        nlohmann::json f;
        f["ref"] = row.ref;
        f["hyp"] = row.hyp;
        f["score"] = der_report_to_json(rep);
        files.push_back(f);
    }

    double overall_der = (fa_s + miss_s + cer_s) / total_s;
    std::printf("%-28s %8s %8s %8s %8s %8s\n", "overall", pct1(overall_der).c_str(),
                pct1(fa_s / total_s).c_str(), pct1(miss_s / total_s).c_str(),
                pct1(cer_s / total_s).c_str(), pct1((fa_s + miss_s) / total_s).c_str());

    nlohmann::json report;
    report["files"] = files;
    nlohmann::json overall;
    overall["der"] = overall_der;
    overall["fa_rate"] = fa_s / total_s;
    overall["miss_rate"] = miss_s / total_s;
    overall["cer_rate"] = cer_s / total_s;
    overall["total_ref_speech_s"] = total_s;
    overall["fa_s"] = fa_s;
    overall["miss_s"] = miss_s;
    overall["cer_s"] = cer_s;
    overall["collar_s"] = o.collar;
    overall["score_overlap"] = !o.no_overlap;
    report["overall"] = overall;

    // DER vs. VAD-only error across files; undefined for constant columns.
    report["spearman_der_vs_vad"] = nullptr;
    try {
        double rho = spearman(ders, vad_errs);
        std::printf("spearman(DER, FA+MISS): %.3f\n", rho);
        report["spearman_der_vs_vad"] = rho;
    } catch (const std::exception& e) {
        std::printf("spearman(DER, FA+MISS): %s\n", e.what());
    }

    if (!o.roles.empty()) {
        std::map<std::string, int> seen;  // file_id -> pair index, to catch collisions
        for (size_t i = 0; i < rows.size(); ++i) {
            auto turns = parse_rttm(read_text_file(resolve_path(base, rows[i].ref)));
            for (const auto& t : turns) {
                auto it = seen.find(t.file_id);
                if (it != seen.end() && it->second != static_cast<int>(i))
                    throw std::runtime_error("file_id '" + t.file_id +
                                             "' appears in more than one pair; breakdown needs "
                                             "distinct file ids");
                seen[t.file_id] = static_cast<int>(i);
            }
        }
        auto roles = parse_role_map(read_text_file(o.roles));
        report["breakdown"] = breakdown_to_json(error_breakdown(all_ref, all_hyp, roles));
        nlohmann::json bd_only;
        bd_only["breakdown"] = report["breakdown"];
        std::fputs(render_report(bd_only).c_str(), stdout);
    }

    if (!o.json_out.empty()) {
        write_text_file(o.json_out, report.dump(2) + "\n");
        std::printf("wrote %s\n", o.json_out.c_str());
    }
}

// ===================== tune =====================

struct TuneOpts {
    std::string manifest, out;
    std::string onset = "0.3:0.9:0.05", offset = "0.1:0.8:0.05", alpha = "0.0:1.0:0.05";
    bool no_asr = false;
    std::string num_speakers = "oracle";
    std::uint64_t seed = 42;
};

void run_tune(const TuneOpts& o) {
    auto rows = parse_dev_manifest(read_text_file(o.manifest));
    std::string base = std::filesystem::path(o.manifest).parent_path().string();
    auto dev = load_dev_set(rows, base);

    GridSpec grid;
    grid.onset = parse_grid_range(o.onset, "--onset");
    grid.offset = parse_grid_range(o.offset, "--offset");
    grid.alpha = o.no_asr ? GridRange{1.0, 1.0, 1.0} : parse_grid_range(o.alpha, "--alpha");

    CountMethod k_mode;
    if (o.num_speakers == "oracle")
        k_mode = CountMethod::oracle;
    else if (o.num_speakers == "auto")
        k_mode = CountMethod::eigen_gap;
    else
        throw std::runtime_error("--num-speakers must be 'oracle' or 'auto', got '" +
                                 o.num_speakers + "'");

    GridSearchResult res = grid_search(dev, grid, k_mode, o.seed);

    size_t n_on = grid_values(grid.onset).size();
    size_t n_off = grid_values(grid.offset).size();
    size_t n_al = grid_values(grid.alpha).size();
    std::printf("grid: %zu onset x %zu offset x %zu alpha = %zu triples, %d evaluated, %d "
                "infeasible\n",
                n_on, n_off, n_al, n_on * n_off * n_al, res.evaluated, res.infeasible);
    if (!res.failed.empty())
        std::printf("failed trials: %zu (first: %s)\n", res.failed.size(),
                    res.failed.front().fail_reason.c_str());
    if (res.ranked.empty())
        throw std::runtime_error("all " + std::to_string(res.evaluated) + " trials failed (first: " +
                                 (res.failed.empty() ? std::string("none") : res.failed.front().fail_reason) +
                                 ")");

    std::string csv = "onset,offset,alpha,der,fa,miss,cer\n";
    char line[256];
    for (const auto& t : res.ranked) {
        std::snprintf(line, sizeof(line), "%.6g,%.6g,%.6g,%.9g,%.9g,%.9g,%.9g\n", t.onset,
                      t.offset, t.alpha, t.mean_der, t.mean_fa, t.mean_miss, t.mean_cer);
        csv += line;
    }
    write_text_file(o.out, csv);

    const auto& best = res.ranked.front();
    std::printf("best: onset %.2f, offset %.2f, alpha %.2f -> DER %s%% (FA %s%%, MISS %s%%, CER "
                "%s%%)\n",
                best.onset, best.offset, best.alpha, pct1(best.mean_der).c_str(),
                pct1(best.mean_fa).c_str(), pct1(best.mean_miss).c_str(),
                pct1(best.mean_cer).c_str());
    std::printf("wrote %s (%zu rows)\n", o.out.c_str(), res.ranked.size());
}

// ===================== report =====================

struct ReportOpts {
    std::string file;
    bool raw_json = false;
};

void run_report(const ReportOpts& o) {
    std::string text = read_text_file(o.file);
    if (o.raw_json) {
        std::fputs(text.c_str(), stdout);
        return;
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(o.file + ": not a valid report: " + e.what());
    }
    std::fputs(render_report(j).c_str(), stdout);
}

}  // namespace

// ===================== wiring =====================

int main(int argc, char** argv) {
    CLI::App app{"diarkit — speaker diarization toolkit (VAD fusion, segmentation, clustering, "
                 "scoring, tuning)"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read options from an INI file (sections per subcommand)");

    auto dn = std::make_shared<DenoiseOpts>();
    auto* denoise_cmd = app.add_subcommand("denoise", "spectral-gate WAV files into a directory");
    denoise_cmd->add_option("--in", dn->inputs, "input WAV files")->required()->expected(-1);
    denoise_cmd->add_option("--out-dir", dn->out_dir, "output directory")->required();
    denoise_cmd->add_option("--n-std", dn->cfg.n_std_thresh, "gate threshold in noise std units")
        ->capture_default_str();
    denoise_cmd->add_option("--prop-decrease", dn->cfg.prop_decrease, "attenuation proportion")
        ->capture_default_str();
    denoise_cmd->add_option("--fft", dn->cfg.fft_size, "FFT size")->capture_default_str();
    denoise_cmd->add_option("--hop", dn->cfg.hop, "hop size")->capture_default_str();
    denoise_cmd->add_option("--freq-smooth", dn->cfg.freq_smooth_bins, "mask smoothing width, bins")
        ->capture_default_str();
    denoise_cmd
        ->add_option("--time-smooth", dn->cfg.time_smooth_frames, "mask smoothing width, frames")
        ->capture_default_str();
    denoise_cmd->add_option("--manifest", dn->manifest_path, "write original/denoised pairs here");
    denoise_cmd->callback([dn] { run_denoise(*dn); });

    auto* vad_cmd = app.add_subcommand("vad", "frame-track fusion and decoding");
    vad_cmd->require_subcommand(1);

    auto fu = std::make_shared<FuseOpts>();
    auto* fuse_cmd = vad_cmd->add_subcommand("fuse", "fuse a frame-VAD track with an ASR track");
    fuse_cmd->add_option("--frame-vad", fu->frame_vad, "frame-VAD probability track")->required();
    auto* fu_ctm = fuse_cmd->add_option("--asr-ctm", fu->asr_ctm, "ASR word alignment (CTM)");
    auto* fu_trk = fuse_cmd->add_option("--asr-track", fu->asr_track, "ASR frame track");
    fu_ctm->excludes(fu_trk);
    fuse_cmd->add_option("--alpha", fu->alpha, "frame-VAD weight in [0,1]")->capture_default_str();
    fuse_cmd->add_option("--out", fu->out, "output track path")->required();
    fuse_cmd->callback([fu] { run_fuse(*fu); });

    auto de = std::make_shared<DecodeOpts>();
    auto* decode_cmd = vad_cmd->add_subcommand("decode", "hysteresis-decode a track into speech");
    decode_cmd->add_option("--track", de->track, "probability track")->required();
    decode_cmd->add_option("--onset", de->th.onset, "enter-speech threshold")
        ->capture_default_str();
    decode_cmd->add_option("--offset", de->th.offset, "leave-speech threshold")
        ->capture_default_str();
    decode_cmd->add_option("--min-on", de->th.min_duration_on_s, "drop segments shorter than this")
        ->capture_default_str();
    decode_cmd->add_option("--min-off", de->th.min_duration_off_s, "merge gaps shorter than this")
        ->capture_default_str();
    decode_cmd->add_option("--pad-onset", de->th.pad_onset_s, "extend starts by this many seconds")
        ->capture_default_str();
    decode_cmd->add_option("--pad-offset", de->th.pad_offset_s, "extend ends by this many seconds")
        ->capture_default_str();
    decode_cmd->add_option("--out", de->out, "output RTTM (speaker 'speech')")->required();
    decode_cmd->add_option("--file-id", de->file_id, "RTTM file id")->capture_default_str();
    decode_cmd->callback([de] { run_decode(*de); });

    auto sg = std::make_shared<SegmentOpts>();
    auto* segment_cmd = app.add_subcommand("segment", "plan multi-scale windows over speech");
    segment_cmd->add_option("--speech", sg->speech, "speech RTTM (from vad decode)")->required();
    auto* sg_scales = segment_cmd->add_option("--scales", sg->scales, "window lengths, seconds");
    segment_cmd->add_option("--hops", sg->hops, "hops, seconds")->needs(sg_scales);
    segment_cmd->add_option("--weights", sg->weights, "per-scale weights")->needs(sg_scales);
    segment_cmd->add_option("--out", sg->out, "output windows file")->required();
    segment_cmd->add_option("--file-id", sg->file_id, "override the RTTM file id");
    segment_cmd->callback([sg] { run_segment(*sg); });

    auto cl = std::make_shared<ClusterOpts>();
    auto* cluster_cmd = app.add_subcommand("cluster", "spectral-cluster embeddings into speakers");
    cluster_cmd->add_option("--embeddings", cl->embeddings, "embedding records (JSONL)")
        ->required();
    cluster_cmd->add_option("--windows", cl->windows, "windows file (from segment)")->required();
    cluster_cmd->add_option("--num-speakers", cl->num_speakers, "speaker count or 'auto'")
        ->capture_default_str();
    cluster_cmd->add_option("--max-speakers", cl->max_speakers, "eigen-gap search cap")
        ->capture_default_str();
    cluster_cmd->add_option("--seed", cl->seed, "k-means seed")
        ->envname("DIARKIT_SEED")
        ->capture_default_str();
    cluster_cmd->add_option("--out", cl->out, "output RTTM")->required();
    cluster_cmd->callback([cl] { run_cluster(*cl); });

    auto di = std::make_shared<DiarizeOpts>();
    auto* diarize_cmd = app.add_subcommand("diarize", "run the full pipeline on one file");
    diarize_cmd->add_option("--frame-vad", di->cfg.frame_vad_path, "frame-VAD probability track")
        ->required();
    auto* di_ctm = diarize_cmd->add_option("--asr-ctm", di->cfg.asr_ctm_path, "ASR CTM");
    auto* di_trk = diarize_cmd->add_option("--asr-track", di->cfg.asr_track_path, "ASR track");
    di_ctm->excludes(di_trk);
    diarize_cmd->add_option("--alpha", di->cfg.alpha, "frame-VAD fusion weight")
        ->capture_default_str();
    diarize_cmd->add_option("--onset", di->cfg.thresholds.onset, "enter-speech threshold")
        ->capture_default_str();
    diarize_cmd->add_option("--offset", di->cfg.thresholds.offset, "leave-speech threshold")
        ->capture_default_str();
    diarize_cmd
        ->add_option("--min-on", di->cfg.thresholds.min_duration_on_s, "minimum segment length")
        ->capture_default_str();
    diarize_cmd
        ->add_option("--min-off", di->cfg.thresholds.min_duration_off_s, "minimum gap length")
        ->capture_default_str();
    diarize_cmd->add_option("--pad-onset", di->cfg.thresholds.pad_onset_s, "start padding")
        ->capture_default_str();
    diarize_cmd->add_option("--pad-offset", di->cfg.thresholds.pad_offset_s, "end padding")
        ->capture_default_str();
    diarize_cmd->add_option("--embeddings", di->cfg.embeddings_path, "embedding records (JSONL)");
    diarize_cmd->add_option("--num-speakers", di->num_speakers, "speaker count or 'auto'")
        ->capture_default_str();
    diarize_cmd->add_option("--max-speakers", di->cfg.max_speakers, "eigen-gap search cap")
        ->capture_default_str();
    diarize_cmd->add_option("--scales", di->scales, "window lengths, seconds");
    diarize_cmd->add_option("--hops", di->hops, "hops, seconds");
    diarize_cmd->add_option("--weights", di->weights, "per-scale weights");
    diarize_cmd->add_flag("--vad-only", di->cfg.vad_only, "stop after VAD (single 'speech' label)");
    diarize_cmd->add_option("--out", di->cfg.out_rttm_path, "output RTTM")->required();
    diarize_cmd->add_option("--report", di->cfg.report_json_path, "write the JSON run report here");
    diarize_cmd->add_option("--file-id", di->cfg.file_id, "RTTM file id")->capture_default_str();
    diarize_cmd->add_option("--seed", di->cfg.seed, "k-means seed")
        ->envname("DIARKIT_SEED")
        ->capture_default_str();
    diarize_cmd->callback([di] { run_diarize(*di); });

    auto sc = std::make_shared<ScoreOpts>();
    auto* score_cmd = app.add_subcommand("score", "DER against a reference RTTM");
    score_cmd->add_option("--ref", sc->ref, "reference RTTM")->required();
    score_cmd->add_option("--hyp", sc->hyp, "hypothesis RTTM")->required();
    score_cmd->add_option("--collar", sc->collar, "no-score margin around reference boundaries")
        ->capture_default_str();
    score_cmd->add_flag("--no-overlap", sc->no_overlap, "skip overlapped reference speech");
    auto* sc_roles = score_cmd->add_option("--roles", sc->roles, "speaker role map");
    score_cmd->add_flag("--breakdown", sc->breakdown, "role/duration error breakdown")
        ->needs(sc_roles);
    score_cmd->add_option("--json", sc->json_out, "write the JSON report here");
    score_cmd->callback([sc] { run_score(*sc); });

    auto an = std::make_shared<AnalyzeOpts>();
    auto* analyze_cmd = app.add_subcommand("analyze", "per-file DER table over many ref/hyp pairs");
    analyze_cmd->add_option("--pairs", an->pairs, "manifest: one 'ref.rttm hyp.rttm' per line")
        ->required();
    analyze_cmd->add_option("--roles", an->roles, "speaker role map (enables the breakdown)");
    analyze_cmd->add_option("--collar", an->collar, "no-score margin around reference boundaries")
        ->capture_default_str();
    analyze_cmd->add_flag("--no-overlap", an->no_overlap, "skip overlapped reference speech");
    analyze_cmd->add_option("--json", an->json_out, "write the JSON report here");
    analyze_cmd->callback([an] { run_analyze(*an); });

    auto tu = std::make_shared<TuneOpts>();
    auto* tune_cmd = app.add_subcommand("tune", "grid-search onset/offset/alpha on a dev set");
    tune_cmd->add_option("--manifest", tu->manifest, "dev manifest (see docs)")->required();
    tune_cmd->add_option("--onset", tu->onset, "onset grid lo:hi:step")->capture_default_str();
    tune_cmd->add_option("--offset", tu->offset, "offset grid lo:hi:step")->capture_default_str();
    auto* tu_alpha =
        tune_cmd->add_option("--alpha", tu->alpha, "alpha grid lo:hi:step")->capture_default_str();
    tune_cmd->add_flag("--no-asr", tu->no_asr, "fix alpha = 1 (frame-VAD only)")
        ->excludes(tu_alpha);
    tune_cmd->add_option("--num-speakers", tu->num_speakers, "'oracle' or 'auto'")
        ->capture_default_str();
    tune_cmd->add_option("--seed", tu->seed, "k-means seed")
        ->envname("DIARKIT_SEED")
        ->capture_default_str();
    tune_cmd->add_option("--out", tu->out, "output trials CSV")->required();
    tune_cmd->callback([tu] { run_tune(*tu); });

    auto rp = std::make_shared<ReportOpts>();
    auto* report_cmd = app.add_subcommand("report", "render a JSON run/score report");
    report_cmd->add_option("file", rp->file, "report JSON path")->required();
    report_cmd->add_flag("--json", rp->raw_json, "print the raw JSON instead of the table");
    report_cmd->callback([rp] { run_report(*rp); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "diarkit: %s\n", e.what());
        return 1;
    }
    return 0;
}
