#pragma once

// Short-time Fourier analysis/synthesis with a periodic Hann window.
// Frame t covers samples [t*hop, t*hop + fft_size) of the zero-padded
// signal; ceil(N/hop) frames total. Synthesis uses weighted overlap-add
// normalized by the summed squared window, which reconstructs the
// interior exactly up to FFT rounding.
//
// The functions in diarkit:: parallelize over frames/samples with OpenMP;
// diarkit::serial:: holds the plain-loop reference implementations. Both
// produce bit-identical results.

#include <complex>
#include <cstdint>
#include <vector>

#include "diarkit/audio.hpp"

namespace diarkit {

struct Spectrogram {
    int fft_size = 1024;
    int hop = 256;
    int sample_rate_hz = 16000;
    std::int64_t num_samples = 0;  // original signal length, for exact resynthesis
    std::int64_t num_frames = 0;
    std::vector<std::complex<double>> bins;  // frame-major, num_frames * num_bins()

    int num_bins() const { return fft_size / 2 + 1; }
    std::complex<double>& at(std::int64_t frame, int bin) {
        return bins[frame * num_bins() + bin];
    }
    const std::complex<double>& at(std::int64_t frame, int bin) const {
        return bins[frame * num_bins() + bin];
    }
};

std::vector<double> hann_window(int n);

// In-place iterative radix-2 transform; inverse includes the 1/n scale.
void fft_radix2(std::vector<std::complex<double>>& a, bool inverse);

Spectrogram stft(const AudioBuffer& buf, int fft_size = 1024, int hop = 256);
AudioBuffer istft(const Spectrogram& spec);

namespace serial {
Spectrogram stft(const AudioBuffer& buf, int fft_size = 1024, int hop = 256);
AudioBuffer istft(const Spectrogram& spec);
}  // namespace serial

}  // namespace diarkit
