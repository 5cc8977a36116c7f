#include "diarkit/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace diarkit {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;

std::uint32_t read_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::vector<std::uint8_t>& v, std::uint32_t x) {
    v.push_back(x & 0xff);
    v.push_back((x >> 8) & 0xff);
    v.push_back((x >> 16) & 0xff);
    v.push_back((x >> 24) & 0xff);
}

void put_u16(std::vector<std::uint8_t>& v, std::uint16_t x) {
    v.push_back(x & 0xff);
    v.push_back((x >> 8) & 0xff);
}

void put_tag(std::vector<std::uint8_t>& v, const char* tag) {
    v.insert(v.end(), tag, tag + 4);
}

}  // namespace

AudioBuffer decode_wav(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
        throw std::runtime_error("not a RIFF/WAVE file");

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t sample_rate = 0;
    bool have_fmt = false;
    const std::uint8_t* data = nullptr;
    std::uint32_t data_size = 0;

    size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const std::uint8_t* p = bytes.data() + pos;
        std::uint32_t chunk_size = read_u32(p + 4);
        if (pos + 8 + chunk_size > bytes.size())
            throw std::runtime_error("truncated chunk");
        if (std::memcmp(p, "fmt ", 4) == 0) {
            if (chunk_size < 16) throw std::runtime_error("fmt chunk too small");
            format = read_u16(p + 8);
            channels = read_u16(p + 10);
            sample_rate = read_u32(p + 12);
            bits = read_u16(p + 22);
            have_fmt = true;
        } else if (std::memcmp(p, "data", 4) == 0) {
            data = p + 8;
            data_size = chunk_size;
        }
        pos += 8 + chunk_size + (chunk_size & 1);  // chunks are word-aligned
    }
    if (!have_fmt || data == nullptr) throw std::runtime_error("missing fmt or data chunk");
    if (channels != 1)
        throw std::runtime_error("only mono input is supported (" + std::to_string(channels) +
                                 " channels); downmix first");
    if (sample_rate == 0) throw std::runtime_error("zero sample rate");

    AudioBuffer buf;
    buf.sample_rate_hz = static_cast<int>(sample_rate);
    if (format == kFormatPcm && bits == 16) {
        size_t n = data_size / 2;
        buf.samples.resize(n);
        for (size_t i = 0; i < n; ++i) {
            std::int16_t s = static_cast<std::int16_t>(read_u16(data + 2 * i));
            buf.samples[i] = static_cast<float>(s) / 32768.0f;
        }
    } else if (format == kFormatFloat && bits == 32) {
        size_t n = data_size / 4;
        buf.samples.resize(n);
        for (size_t i = 0; i < n; ++i) {
            std::uint32_t u = read_u32(data + 4 * i);
            float f;
            std::memcpy(&f, &u, 4);
            buf.samples[i] = std::clamp(f, -1.0f, 1.0f);
        }
    } else {
        throw std::runtime_error("unsupported codec: format " + std::to_string(format) + ", " +
                                 std::to_string(bits) + " bits (need PCM16 or float32)");
    }
    return buf;
}

std::vector<std::uint8_t> encode_wav(const AudioBuffer& buf, int* clipped) {
    if (buf.sample_rate_hz <= 0) throw std::runtime_error("sample rate must be > 0");
    int clip_count = 0;
    std::uint32_t data_size = static_cast<std::uint32_t>(buf.samples.size() * 2);

    std::vector<std::uint8_t> out;
    out.reserve(44 + data_size);
    put_tag(out, "RIFF");
    put_u32(out, 36 + data_size);
    put_tag(out, "WAVE");
    put_tag(out, "fmt ");
    put_u32(out, 16);
    put_u16(out, kFormatPcm);
    put_u16(out, 1);  // mono
    put_u32(out, static_cast<std::uint32_t>(buf.sample_rate_hz));
    put_u32(out, static_cast<std::uint32_t>(buf.sample_rate_hz) * 2);  // byte rate
    put_u16(out, 2);                                                   // block align
    put_u16(out, 16);
    put_tag(out, "data");
    put_u32(out, data_size);
    for (float x : buf.samples) {
        if (x > 1.0f || x < -1.0f) {
            ++clip_count;
            x = std::clamp(x, -1.0f, 1.0f);
        }
        long q = std::lround(static_cast<double>(x) * 32768.0);
        q = std::clamp(q, -32768L, 32767L);
        put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    }
    if (clipped) *clipped = clip_count;
    return out;
}

AudioBuffer read_wav_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    try {
        return decode_wav(bytes);
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

void write_wav_file(const std::string& path, const AudioBuffer& buf, int* clipped) {
    auto bytes = encode_wav(buf, clipped);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace diarkit
