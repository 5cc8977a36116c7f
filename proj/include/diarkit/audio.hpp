#pragma once

// Mono WAV input/output. PCM 16-bit and IEEE float 32-bit are accepted;
// the writer always emits PCM 16-bit.

#include <cstdint>
#include <string>
#include <vector>

namespace diarkit {

struct AudioBuffer {
    int sample_rate_hz = 16000;
    std::vector<float> samples;  // [-1, 1]

    double duration_s() const {
        return static_cast<double>(samples.size()) / sample_rate_hz;
    }
};

AudioBuffer decode_wav(const std::vector<std::uint8_t>& bytes);
// clipped, when given, receives the count of samples outside [-1,1] that were clamped.
std::vector<std::uint8_t> encode_wav(const AudioBuffer& buf, int* clipped = nullptr);

AudioBuffer read_wav_file(const std::string& path);
void write_wav_file(const std::string& path, const AudioBuffer& buf, int* clipped = nullptr);

}  // namespace diarkit
