#include "diarkit/stft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace diarkit {

namespace {

void check_params(int fft_size, int hop) {
    if (fft_size < 4 || (fft_size & (fft_size - 1)) != 0)
        throw std::invalid_argument("fft_size must be a power of two >= 4");
    if (hop < 1 || hop > fft_size) throw std::invalid_argument("hop must be in [1, fft_size]");
    if (fft_size % hop != 0) throw std::invalid_argument("hop must divide fft_size");
}

void check_spec(const Spectrogram& s) {
    check_params(s.fft_size, s.hop);
    if (s.bins.size() != static_cast<size_t>(s.num_frames) * s.num_bins())
        throw std::invalid_argument("inconsistent spectrogram dimensions");
    if (s.num_samples < 0 || s.num_frames != (s.num_samples + s.hop - 1) / s.hop)
        throw std::invalid_argument("frame count does not match sample count");
}

// Windowed frame t of the zero-padded signal, as a complex FFT input.
void load_frame(const AudioBuffer& buf, std::int64_t t, int fft_size, int hop,
                const std::vector<double>& win, std::vector<std::complex<double>>& scratch) {
    const std::int64_t n = static_cast<std::int64_t>(buf.samples.size());
    const std::int64_t base = t * hop;
    for (int i = 0; i < fft_size; ++i) {
        std::int64_t s = base + i;
        double x = (s < n) ? static_cast<double>(buf.samples[s]) : 0.0;
        scratch[i] = {x * win[i], 0.0};
    }
}

void store_bins(Spectrogram& spec, std::int64_t t, const std::vector<std::complex<double>>& scratch) {
    const int nb = spec.num_bins();
    for (int k = 0; k < nb; ++k) spec.bins[t * nb + k] = scratch[k];
}

// Full conjugate-symmetric spectrum of frame t, inverse transformed: yields
// the windowed time-domain frame when the bins are untouched.
void inverse_frame(const Spectrogram& spec, std::int64_t t, std::vector<std::complex<double>>& scratch) {
    const int n = spec.fft_size;
    const int nb = spec.num_bins();
    for (int k = 0; k < nb; ++k) scratch[k] = spec.bins[t * nb + k];
    for (int k = nb; k < n; ++k) scratch[k] = std::conj(spec.bins[t * nb + (n - k)]);
    fft_radix2(scratch, true);
}

Spectrogram make_spec(const AudioBuffer& buf, int fft_size, int hop) {
    Spectrogram spec;
    spec.fft_size = fft_size;
    spec.hop = hop;
    spec.sample_rate_hz = buf.sample_rate_hz;
    spec.num_samples = static_cast<std::int64_t>(buf.samples.size());
    spec.num_frames = (spec.num_samples + hop - 1) / hop;
    spec.bins.assign(static_cast<size_t>(spec.num_frames) * spec.num_bins(), {0.0, 0.0});
    return spec;
}

// Overlap-add value at sample n, gathering the covering frames in ascending
// order so that serial and parallel synthesis accumulate identically. The
// normalization denominator is floored at a fraction of the full-coverage
// window-square sum: at the signal head only a sliver of the first window
// covers, and dividing by its raw (near-zero) weight would blow up any
// spectral modification there. Fully covered samples are unaffected.
double ola_sample(const std::vector<double>& frames_td, std::int64_t n, int fft_size, int hop,
                  std::int64_t num_frames, const std::vector<double>& win) {
    std::int64_t t0 = (n >= fft_size) ? (n - fft_size) / hop + 1 : 0;
    std::int64_t t1 = n / hop;
    if (t1 >= num_frames) t1 = num_frames - 1;
    double num = 0.0, den = 0.0;
    for (std::int64_t t = t0; t <= t1; ++t) {
        int o = static_cast<int>(n - t * hop);
        num += frames_td[t * fft_size + o] * win[o];
        den += win[o] * win[o];
    }
    const double den_full = 0.375 * fft_size / hop;  // sum of hann^2 at full overlap
    const double floor = 0.05 * den_full;
    return num / std::max(den, floor);
}

}  // namespace

std::vector<double> hann_window(int n) {
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i)
        w[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / n));
    return w;
}

void fft_radix2(std::vector<std::complex<double>>& a, bool inverse) {
    const size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("fft size must be a power of two");
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        double ang = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (size_t k = 0; k < len / 2; ++k) {
                std::complex<double> u = a[i + k];
                std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        for (auto& x : a) x /= static_cast<double>(n);
    }
}

Spectrogram stft(const AudioBuffer& buf, int fft_size, int hop) {
    check_params(fft_size, hop);
    Spectrogram spec = make_spec(buf, fft_size, hop);
    const auto win = hann_window(fft_size);
#pragma omp parallel
    {
        std::vector<std::complex<double>> scratch(fft_size);
#pragma omp for schedule(static)
        for (std::int64_t t = 0; t < spec.num_frames; ++t) {
            load_frame(buf, t, fft_size, hop, win, scratch);
            fft_radix2(scratch, false);
            store_bins(spec, t, scratch);
        }
    }
    return spec;
}

AudioBuffer istft(const Spectrogram& spec) {
    check_spec(spec);
    const int n = spec.fft_size;
    const auto win = hann_window(n);
    std::vector<double> frames_td(static_cast<size_t>(spec.num_frames) * n);
#pragma omp parallel
    {
        std::vector<std::complex<double>> scratch(n);
#pragma omp for schedule(static)
        for (std::int64_t t = 0; t < spec.num_frames; ++t) {
            inverse_frame(spec, t, scratch);
            for (int i = 0; i < n; ++i) frames_td[t * n + i] = scratch[i].real();
        }
    }
    AudioBuffer out;
    out.sample_rate_hz = spec.sample_rate_hz;
    out.samples.resize(spec.num_samples);
#pragma omp parallel for schedule(static)
    for (std::int64_t s = 0; s < spec.num_samples; ++s)
        out.samples[s] = static_cast<float>(ola_sample(frames_td, s, n, spec.hop, spec.num_frames, win));
    return out;
}

namespace serial {

Spectrogram stft(const AudioBuffer& buf, int fft_size, int hop) {
    check_params(fft_size, hop);
    Spectrogram spec = make_spec(buf, fft_size, hop);
    const auto win = hann_window(fft_size);
    std::vector<std::complex<double>> scratch(fft_size);
    for (std::int64_t t = 0; t < spec.num_frames; ++t) {
        load_frame(buf, t, fft_size, hop, win, scratch);
        fft_radix2(scratch, false);
        store_bins(spec, t, scratch);
    }
    return spec;
}

AudioBuffer istft(const Spectrogram& spec) {
    check_spec(spec);
    const int n = spec.fft_size;
    const auto win = hann_window(n);
    std::vector<double> frames_td(static_cast<size_t>(spec.num_frames) * n);
    std::vector<std::complex<double>> scratch(n);
    for (std::int64_t t = 0; t < spec.num_frames; ++t) {
        inverse_frame(spec, t, scratch);
        for (int i = 0; i < n; ++i) frames_td[t * n + i] = scratch[i].real();
    }
    AudioBuffer out;
    out.sample_rate_hz = spec.sample_rate_hz;
    out.samples.resize(spec.num_samples);
    for (std::int64_t s = 0; s < spec.num_samples; ++s)
        out.samples[s] = static_cast<float>(ola_sample(frames_td, s, n, spec.hop, spec.num_frames, win));
    return out;
}

}  // namespace serial

}  // namespace diarkit
