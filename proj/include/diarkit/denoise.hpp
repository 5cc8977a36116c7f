#pragma once

// Stationary spectral gating: per-bin log-magnitude statistics over the
// whole signal set the gate threshold; the binary mask is softened by a
// separable box filter before being applied to the complex bins.
// Offered as preprocessing/augmentation only — never applied implicitly
// by the scoring or diarization paths.

#include <string>
#include <vector>

#include "diarkit/audio.hpp"
#include "diarkit/stft.hpp"

namespace diarkit {

struct SpectralGateConfig {
    int fft_size = 1024;
    int hop = 256;
    double n_std_thresh = 1.5;
    double prop_decrease = 1.0;   // 1 = remove gated cells entirely, 0 = no-op
    int freq_smooth_bins = 3;     // full box width; 0 or 1 disables
    int time_smooth_frames = 5;   // full box width; 0 or 1 disables
};

struct NoiseProfile {
    std::vector<double> mean;  // per-bin mean of log magnitude
    std::vector<double> std;   // per-bin standard deviation
};

NoiseProfile estimate_noise_profile(const Spectrogram& spec);

AudioBuffer spectral_gate(const AudioBuffer& buf, const SpectralGateConfig& cfg);

namespace serial {
AudioBuffer spectral_gate(const AudioBuffer& buf, const SpectralGateConfig& cfg);
}  // namespace serial

// Batch augmentation: denoise every input into out_dir and pair each
// original with its denoised copy, in input order.
struct ManifestEntry {
    std::string original;
    std::string denoised;

    bool operator==(const ManifestEntry&) const = default;
};

std::vector<ManifestEntry> make_augmentation_manifest(const std::vector<std::string>& inputs,
                                                      const std::string& out_dir,
                                                      const SpectralGateConfig& cfg);

std::string write_manifest(const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> parse_manifest(const std::string& text);

}  // namespace diarkit
