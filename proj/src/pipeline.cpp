#include "diarkit/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "diarkit/clustering.hpp"
#include "diarkit/formats.hpp"
#include "diarkit/scoring.hpp"

namespace diarkit {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string pct1(double rate) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", rate * 100.0);
    return buf;
}

std::string sec3(double s) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", s);
    return buf;
}

// FNV-1a over the canonical config dump; ties a report to its exact inputs.
std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

nlohmann::json config_json(const RunConfig& cfg, const MultiScalePlan& plan) {
    nlohmann::json j;
    j["frame_vad"] = cfg.frame_vad_path;
    j["asr_ctm"] = cfg.asr_ctm_path;
    j["asr_track"] = cfg.asr_track_path;
    j["embeddings"] = cfg.embeddings_path;
    j["out_rttm"] = cfg.out_rttm_path;
    j["file_id"] = cfg.file_id;
    j["alpha"] = cfg.alpha;
    j["onset"] = cfg.thresholds.onset;
    j["offset"] = cfg.thresholds.offset;
    j["min_duration_on"] = cfg.thresholds.min_duration_on_s;
    j["min_duration_off"] = cfg.thresholds.min_duration_off_s;
    j["pad_onset"] = cfg.thresholds.pad_onset_s;
    j["pad_offset"] = cfg.thresholds.pad_offset_s;
    std::vector<double> scales, hops;
    for (const auto& s : plan.scales) {
        scales.push_back(s.window_s);
        hops.push_back(s.hop_s);
    }
    j["scales"] = scales;
    j["hops"] = hops;
    j["weights"] = plan.weights;
    j["num_speakers"] = cfg.num_speakers;
    j["max_speakers"] = cfg.max_speakers;
    j["vad_only"] = cfg.vad_only;
    j["seed"] = cfg.seed;
    return j;
}

}  // namespace

nlohmann::json diarize(const RunConfig& cfg) {
    if (cfg.frame_vad_path.empty()) throw std::runtime_error("a frame-VAD track is required");
    if (!cfg.asr_ctm_path.empty() && !cfg.asr_track_path.empty())
        throw std::runtime_error("give either an ASR CTM or an ASR track, not both");
    if (!cfg.vad_only && cfg.embeddings_path.empty())
        throw std::runtime_error("clustering needs --embeddings; use --vad-only to stop after VAD");

    MultiScalePlan plan = cfg.plan.scales.empty() ? default_plan() : cfg.plan;
    validate_plan(plan);
    nlohmann::json report;
    report["config"] = config_json(cfg, plan);
    report["config_hash"] = fnv1a_hex(report["config"].dump());
    nlohmann::json timings, counts;

    auto t0 = Clock::now();
    FrameTrack frame_vad = parse_frame_track(read_text_file(cfg.frame_vad_path));
    FrameTrack asr{frame_vad.frame_ms, {}, TrackOrigin::asr};
    if (!cfg.asr_ctm_path.empty()) {
        auto words = parse_ctm(read_text_file(cfg.asr_ctm_path));
        std::int64_t frames = frame_vad.frames();
        for (const auto& w : words) {
            std::int64_t end_ms = std::llround(w.end_s * 1000.0);
            frames = std::max(frames, (end_ms + frame_vad.frame_ms - 1) / frame_vad.frame_ms);
        }
        asr = words_to_frames(words, frame_vad.frame_ms, frames);
    } else if (!cfg.asr_track_path.empty()) {
        asr = parse_frame_track(read_text_file(cfg.asr_track_path));
    }
    timings["load_ms"] = ms_since(t0);
    counts["frames"] = frame_vad.frames();

    t0 = Clock::now();
    FrameTrack fused = fuse(frame_vad, asr, {cfg.alpha});
    auto speech = hysteresis_decode(fused, cfg.thresholds);
    timings["vad_ms"] = ms_since(t0);
    counts["speech_segments"] = speech.size();
    counts["speech_total_s"] = total_speech_s(speech);

    std::vector<SpeakerTurn> hyp;
    if (cfg.vad_only) {
        for (const auto& s : speech)
            hyp.push_back({cfg.file_id, 1, s.start_s, s.dur_s(), "speech"});
        counts["speakers"] = hyp.empty() ? 0 : 1;
    } else {
        t0 = Clock::now();
        auto windows = plan_windows(speech, plan);
        std::vector<std::int64_t> per_scale;
        for (const auto& sw : windows) per_scale.push_back(static_cast<std::int64_t>(sw.size()));
        counts["windows_per_scale"] = per_scale;
        timings["segment_ms"] = ms_since(t0);

        if (windows.back().empty()) {
            counts["groups"] = 0;
            counts["speakers"] = 0;
        } else {
            t0 = Clock::now();
            auto groups = group_by_base_scale(windows);
            auto records = parse_embeddings(read_text_file(cfg.embeddings_path));
            auto set = align_embeddings(records, windows);
            auto aff = multi_scale_affinity(set, groups, plan.weights);
            counts["groups"] = groups.size();
            timings["affinity_ms"] = ms_since(t0);

            t0 = Clock::now();
            int k;
            CountMethod method;
            if (cfg.num_speakers > 0) {
                k = std::min(cfg.num_speakers, aff.n());
                method = CountMethod::oracle;
            } else {
                k = estimate_num_speakers(aff, cfg.max_speakers);
                method = CountMethod::eigen_gap;
            }
            auto labels = spectral_cluster(aff, k, cfg.seed);
            hyp = labels_to_turns(windows.back(), labels.labels, cfg.file_id);
            timings["cluster_ms"] = ms_since(t0);
            counts["speakers"] = k;
            counts["speaker_count_method"] =
                method == CountMethod::oracle ? "oracle" : "eigen_gap";
        }
    }
    counts["turns"] = hyp.size();

    t0 = Clock::now();
    if (!cfg.out_rttm_path.empty()) write_text_file(cfg.out_rttm_path, write_rttm(hyp));
    timings["write_ms"] = ms_since(t0);

    report["timings"] = timings;
    report["counts"] = counts;
    if (!cfg.report_json_path.empty()) write_text_file(cfg.report_json_path, report.dump(2) + "\n");
    return report;
}

nlohmann::json der_report_to_json(const DerReport& rep) {
    nlohmann::json j;
    j["der"] = rep.der;
    j["fa_rate"] = rep.fa_rate;
    j["miss_rate"] = rep.miss_rate;
    j["cer_rate"] = rep.cer_rate;
    j["total_ref_speech_s"] = rep.total_ref_speech_s;
    j["fa_s"] = rep.fa_s;
    j["miss_s"] = rep.miss_s;
    j["cer_s"] = rep.cer_s;
    j["collar_s"] = rep.collar_s;
    j["score_overlap"] = rep.score_overlap;
    j["mapping"] = rep.mapping;
    return j;
}

nlohmann::json breakdown_to_json(const ErrorBreakdown& bd) {
    nlohmann::json j;
    for (const auto& [role, cells] : bd.cells) {
        nlohmann::json role_j;
        for (int b = 0; b < 3; ++b) {
            nlohmann::json cell;
            cell["empty"] = cells[b].empty;
            cell["cer_pct"] = cells[b].cer_pct;
            cell["fa_pct"] = cells[b].fa_pct;
            cell["miss_pct"] = cells[b].miss_pct;
            cell["correct_pct"] = cells[b].correct_pct;
            cell["ratio_pct"] = cells[b].ratio_pct;
            role_j[ErrorBreakdown::bucket_names[b]] = cell;
        }
        j[role] = role_j;
    }
    return j;
}

std::string render_report(const nlohmann::json& report) {
    std::string out;
    char line[256];
    if (report.contains("score")) {
        const auto& s = report["score"];
        std::snprintf(line, sizeof(line), "%8s %8s %8s %8s\n", "DER", "FA", "MISS", "CER");
        out += line;
        std::snprintf(line, sizeof(line), "%8s %8s %8s %8s\n",
                      pct1(s.at("der").get<double>()).c_str(),
                      pct1(s.at("fa_rate").get<double>()).c_str(),
                      pct1(s.at("miss_rate").get<double>()).c_str(),
                      pct1(s.at("cer_rate").get<double>()).c_str());
        out += line;
        std::snprintf(line, sizeof(line), "total speech %s s, collar %s s, overlap %s\n",
                      sec3(s.at("total_ref_speech_s").get<double>()).c_str(),
                      sec3(s.at("collar_s").get<double>()).c_str(),
                      s.at("score_overlap").get<bool>() ? "scored" : "skipped");
        out += line;
        if (s.contains("mapping")) {
            for (const auto& [file, fmap] : s.at("mapping").items()) {
                if (fmap.empty()) continue;
                out += "map " + file + ":";
                for (const auto& [h, r] : fmap.items())
                    out += " " + h + "->" + r.get<std::string>();
                out += "\n";
            }
        }
    }
    if (report.contains("breakdown") && !report["breakdown"].empty()) {
        const auto& bd = report["breakdown"];
        if (!out.empty()) out += "\n";
        std::snprintf(line, sizeof(line), "%-10s", "");
        out += line;
        for (const auto& [role, cells] : bd.items()) {
            (void)cells;
            std::snprintf(line, sizeof(line), " %23s", role.c_str());
            out += line;
        }
        out += "\n";
        std::snprintf(line, sizeof(line), "%-10s", "");
        out += line;
        for (size_t i = 0; i < bd.size(); ++i) {
            std::snprintf(line, sizeof(line), " %7s %7s %7s", "long", "medium", "short");
            out += line;
        }
        out += "\n";
        const char* rows[] = {"cer_pct", "fa_pct", "miss_pct", "correct_pct", "ratio_pct"};
        const char* row_names[] = {"CER", "FA", "MISS", "Correct", "Ratio"};
        for (int r = 0; r < 5; ++r) {
            std::snprintf(line, sizeof(line), "%-10s", row_names[r]);
            out += line;
            for (const auto& [role, cells] : bd.items()) {
                (void)role;
                for (const char* bucket : {"long", "medium", "short"}) {
                    const auto& cell = cells.at(bucket);
                    bool dash = cell.at("empty").get<bool>() && r != 4;  // Ratio prints even when empty
                    char val[32];
                    if (dash) std::snprintf(val, sizeof(val), "%s", "-");
                    else std::snprintf(val, sizeof(val), "%.1f", cell.at(rows[r]).get<double>());
                    std::snprintf(line, sizeof(line), " %7s", val);
                    out += line;
                }
            }
            out += "\n";
        }
    }
    if (report.contains("config")) {
        const auto& c = report["config"];
        if (!out.empty()) out += "\n";
        out += "run config hash " + report.value("config_hash", std::string("-")) + "\n";
        std::snprintf(line, sizeof(line),
                      "alpha %.2f onset %.2f offset %.2f seed %llu vad_only %s\n",
                      c.value("alpha", 0.0), c.value("onset", 0.0), c.value("offset", 0.0),
                      static_cast<unsigned long long>(c.value("seed", 0ULL)),
                      c.value("vad_only", false) ? "yes" : "no");
        out += line;
    }
    if (report.contains("counts")) {
        const auto& c = report["counts"];
        out += "counts:";
        for (const auto& [k, v] : c.items()) {
            // seconds render at fixed 3-decimal precision, like every other time
            if (k.size() > 2 && k.compare(k.size() - 2, 2, "_s") == 0 && v.is_number())
                out += " " + k + "=" + sec3(v.get<double>());
            else
                out += " " + k + "=" + v.dump();
        }
        out += "\n";
    }
    if (report.contains("timings")) {
        const auto& t = report["timings"];
        out += "timings (ms):";
        for (const auto& [k, v] : t.items()) {
            std::snprintf(line, sizeof(line), " %s=%.1f", k.c_str(), v.get<double>());
            out += line;
        }
        out += "\n";
    }
    if (out.empty()) throw std::runtime_error("report has no recognized sections");
    return out;
}

}  // namespace diarkit
