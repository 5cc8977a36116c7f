#include "diarkit/denoise.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <stdexcept>

#include "diarkit/types.hpp"

namespace diarkit {

namespace {

constexpr double kLogFloor = 1e-12;  // keeps log finite on silent cells

// Box half-width for a full filter width: width 3 -> +-1, width <= 1 -> off,
// even widths round down to the next odd filter.
int half_width(int full) { return full >= 3 ? (full - 1) / 2 : 0; }

double raw_mask_cell(double logmag, double mean, double std, double n_std, double prop_decrease) {
    return logmag > mean + n_std * std ? 1.0 : 1.0 - prop_decrease;
}

// Mean of raw[t][k] over the in-range box neighbourhood in frequency.
double smooth_freq_cell(const std::vector<double>& raw, std::int64_t t, int k, int nb, int hw) {
    int k0 = std::max(0, k - hw), k1 = std::min(nb - 1, k + hw);
    double s = 0.0;
    for (int kk = k0; kk <= k1; ++kk) s += raw[t * nb + kk];
    return s / (k1 - k0 + 1);
}

double smooth_time_cell(const std::vector<double>& raw, std::int64_t t, int k, int nb,
                        std::int64_t nt, int hw) {
    std::int64_t t0 = std::max<std::int64_t>(0, t - hw), t1 = std::min<std::int64_t>(nt - 1, t + hw);
    double s = 0.0;
    for (std::int64_t tt = t0; tt <= t1; ++tt) s += raw[tt * nb + k];
    return s / static_cast<double>(t1 - t0 + 1);
}

void check_config(const SpectralGateConfig& cfg) {
    if (cfg.prop_decrease < 0.0 || cfg.prop_decrease > 1.0)
        throw std::invalid_argument("prop_decrease must be in [0,1]");
    if (cfg.freq_smooth_bins < 0 || cfg.time_smooth_frames < 0)
        throw std::invalid_argument("smoothing widths must be >= 0");
}

std::vector<double> log_magnitudes(const Spectrogram& spec) {
    std::vector<double> lm(spec.bins.size());
    for (size_t i = 0; i < spec.bins.size(); ++i) lm[i] = std::log(std::abs(spec.bins[i]) + kLogFloor);
    return lm;
}

}  // namespace

NoiseProfile estimate_noise_profile(const Spectrogram& spec) {
    if (spec.num_frames < 2) throw std::invalid_argument("noise profile needs at least 2 frames");
    const int nb = spec.num_bins();
    const std::int64_t nt = spec.num_frames;
    const auto lm = log_magnitudes(spec);
    NoiseProfile prof;
    prof.mean.assign(nb, 0.0);
    prof.std.assign(nb, 0.0);
    for (int k = 0; k < nb; ++k) {
        double s = 0.0;
        for (std::int64_t t = 0; t < nt; ++t) s += lm[t * nb + k];
        double mean = s / static_cast<double>(nt);
        double v = 0.0;
        for (std::int64_t t = 0; t < nt; ++t) {
            double d = lm[t * nb + k] - mean;
            v += d * d;
        }
        prof.mean[k] = mean;
        prof.std[k] = std::sqrt(v / static_cast<double>(nt));
    }
    return prof;
}

AudioBuffer spectral_gate(const AudioBuffer& buf, const SpectralGateConfig& cfg) {
    check_config(cfg);
    Spectrogram spec = stft(buf, cfg.fft_size, cfg.hop);
    if (spec.num_frames < 2) return istft(spec);  // too short to profile; pass through
    const int nb = spec.num_bins();
    const std::int64_t nt = spec.num_frames;
    const NoiseProfile prof = estimate_noise_profile(spec);
    const auto lm = log_magnitudes(spec);

    std::vector<double> mask(lm.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(lm.size()); ++i) {
        int k = static_cast<int>(i % nb);
        mask[i] = raw_mask_cell(lm[i], prof.mean[k], prof.std[k], cfg.n_std_thresh, cfg.prop_decrease);
    }

    const int hf = half_width(cfg.freq_smooth_bins);
    if (hf > 0) {
        std::vector<double> sm(mask.size());
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(mask.size()); ++i)
            sm[i] = smooth_freq_cell(mask, i / nb, static_cast<int>(i % nb), nb, hf);
        mask.swap(sm);
    }
    const int ht = half_width(cfg.time_smooth_frames);
    if (ht > 0) {
        std::vector<double> sm(mask.size());
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(mask.size()); ++i)
            sm[i] = smooth_time_cell(mask, i / nb, static_cast<int>(i % nb), nb, nt, ht);
        mask.swap(sm);
    }

#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(mask.size()); ++i) spec.bins[i] *= mask[i];
    return istft(spec);
}

namespace serial {

AudioBuffer spectral_gate(const AudioBuffer& buf, const SpectralGateConfig& cfg) {
    check_config(cfg);
    Spectrogram spec = serial::stft(buf, cfg.fft_size, cfg.hop);
    if (spec.num_frames < 2) return serial::istft(spec);
    const int nb = spec.num_bins();
    const std::int64_t nt = spec.num_frames;
    const NoiseProfile prof = estimate_noise_profile(spec);
    const auto lm = log_magnitudes(spec);

    std::vector<double> mask(lm.size());
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(lm.size()); ++i) {
        int k = static_cast<int>(i % nb);
        mask[i] = raw_mask_cell(lm[i], prof.mean[k], prof.std[k], cfg.n_std_thresh, cfg.prop_decrease);
    }
    const int hf = half_width(cfg.freq_smooth_bins);
    if (hf > 0) {
        std::vector<double> sm(mask.size());
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(mask.size()); ++i)
            sm[i] = smooth_freq_cell(mask, i / nb, static_cast<int>(i % nb), nb, hf);
        mask.swap(sm);
    }
    const int ht = half_width(cfg.time_smooth_frames);
    if (ht > 0) {
        std::vector<double> sm(mask.size());
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(mask.size()); ++i)
            sm[i] = smooth_time_cell(mask, i / nb, static_cast<int>(i % nb), nb, nt, ht);
        mask.swap(sm);
    }
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(mask.size()); ++i) spec.bins[i] *= mask[i];
    return serial::istft(spec);
}

}  // namespace serial

std::vector<ManifestEntry> make_augmentation_manifest(const std::vector<std::string>& inputs,
                                                      const std::string& out_dir,
                                                      const SpectralGateConfig& cfg) {
    namespace fs = std::filesystem;
    std::set<std::string> seen_inputs, seen_outputs;
    std::vector<std::string> out_paths;
    out_paths.reserve(inputs.size());
    for (const auto& in : inputs) {
        if (!seen_inputs.insert(in).second) throw std::runtime_error("duplicate input path: " + in);
        std::string out = (fs::path(out_dir) / (fs::path(in).stem().string() + ".denoised.wav")).string();
        if (!seen_outputs.insert(out).second)
            throw std::runtime_error("output collision: " + in + " -> " + out);
        out_paths.push_back(std::move(out));
    }
    // Read everything up front so an unreadable input fails the whole batch
    // before any output is written.
    std::vector<AudioBuffer> bufs;
    bufs.reserve(inputs.size());
    for (const auto& in : inputs) bufs.push_back(read_wav_file(in));

    if (!inputs.empty()) fs::create_directories(out_dir);
    std::vector<ManifestEntry> manifest(inputs.size());
    for (size_t i = 0; i < inputs.size(); ++i) {
        AudioBuffer denoised = spectral_gate(bufs[i], cfg);
        write_wav_file(out_paths[i], denoised);
        manifest[i] = {inputs[i], out_paths[i]};
    }
    return manifest;
}

std::string write_manifest(const std::vector<ManifestEntry>& entries) {
    std::string out;
    for (const auto& e : entries) out += e.original + " " + e.denoised + "\n";
    return out;
}

std::vector<ManifestEntry> parse_manifest(const std::string& text) {
    std::vector<ManifestEntry> entries;
    int ln = 0;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        std::string line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++ln;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        size_t sp = line.find(' ');
        if (sp == std::string::npos || sp == 0 || sp + 1 >= line.size())
            throw ParseError(ln, "expected 'original denoised'");
        std::string denoised = line.substr(sp + 1);
        if (!denoised.empty() && denoised.back() == '\r') denoised.pop_back();
        entries.push_back({line.substr(0, sp), denoised});
    }
    return entries;
}

}  // namespace diarkit
