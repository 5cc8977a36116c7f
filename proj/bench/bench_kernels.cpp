// Microbenchmarks pitting the OpenMP kernels against their serial reference
// implementations. Bit-identical agreement between the pairs is asserted in
// the unit suite; this target only measures the speed difference.

#include <benchmark/benchmark.h>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "diarkit/clustering.hpp"
#include "diarkit/denoise.hpp"
#include "diarkit/stft.hpp"

namespace {

using namespace diarkit;

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// 10 s of pseudo-noise with a tone buried in it, 16 kHz.
const AudioBuffer& audio() {
    static const AudioBuffer buf = [] {
        AudioBuffer b;
        std::mt19937_64 rng(7);
        b.samples.reserve(160000);
        for (int i = 0; i < 160000; ++i) {
            double t = i / 16000.0;
            b.samples.push_back(static_cast<float>(0.2 * std::sin(2.0 * M_PI * 440.0 * t) +
                                                   0.1 * (2.0 * uniform01(rng) - 1.0)));
        }
        return b;
    }();
    return buf;
}

const Spectrogram& spec() {
    static const Spectrogram s = stft(audio());
    return s;
}

// Two scales, 300 base windows, 192-dim unit vectors.
struct AffinityInput {
    EmbeddingSet set;
    std::vector<WindowGroup> groups;
    std::vector<double> weights{0.6, 0.4};
};

const AffinityInput& affinity_input() {
    static const AffinityInput in = [] {
        AffinityInput a;
        std::mt19937_64 rng(11);
        const int n = 300, dim = 192;
        a.set.vecs.resize(2);
        a.set.source_lines.resize(2);
        for (int s = 0; s < 2; ++s) {
            for (int w = 0; w < n; ++w) {
                std::vector<double> v(static_cast<size_t>(dim));
                double norm = 0.0;
                for (double& x : v) {
                    x = 2.0 * uniform01(rng) - 1.0;
                    norm += x * x;
                }
                norm = std::sqrt(norm);
                for (double& x : v) x /= norm;
                a.set.vecs[static_cast<size_t>(s)].push_back(std::move(v));
                a.set.source_lines[static_cast<size_t>(s)].push_back(w + 1);
            }
        }
        for (int w = 0; w < n; ++w) a.groups.push_back({{w, w}});
        return a;
    }();
    return in;
}

void bm_stft_serial(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(serial::stft(audio()));
}

void bm_stft_openmp(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(stft(audio()));
}

void bm_istft_serial(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(serial::istft(spec()));
}

void bm_istft_openmp(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(istft(spec()));
}

void bm_spectral_gate_serial(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(serial::spectral_gate(audio(), {}));
}

void bm_spectral_gate_openmp(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(spectral_gate(audio(), {}));
}

void bm_affinity_serial(benchmark::State& state) {
    const auto& in = affinity_input();
    for (auto _ : state)
        benchmark::DoNotOptimize(serial::multi_scale_affinity(in.set, in.groups, in.weights));
}

void bm_affinity_openmp(benchmark::State& state) {
    const auto& in = affinity_input();
    for (auto _ : state)
        benchmark::DoNotOptimize(multi_scale_affinity(in.set, in.groups, in.weights));
}

}  // namespace

BENCHMARK(bm_stft_serial);
BENCHMARK(bm_stft_openmp);
BENCHMARK(bm_istft_serial);
BENCHMARK(bm_istft_openmp);
BENCHMARK(bm_spectral_gate_serial);
BENCHMARK(bm_spectral_gate_openmp);
BENCHMARK(bm_affinity_serial);
BENCHMARK(bm_affinity_openmp);

BENCHMARK_MAIN();
