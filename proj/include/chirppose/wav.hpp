#pragma once

// Mono 16-bit PCM RIFF/WAVE reader and writer. Floats in [-1, 1] map to
// int16 via round(s * 32767); reading divides by 32767.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace chirppose {

struct AudioBuffer {
    std::vector<double> samples;
    int sample_rate = 48000;

    double duration_s() const {
        return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
    }
};

namespace detail {

inline void put_u32(std::string& s, std::uint32_t v) {
    s.push_back(static_cast<char>(v & 0xff));
    s.push_back(static_cast<char>((v >> 8) & 0xff));
    s.push_back(static_cast<char>((v >> 16) & 0xff));
    s.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline void put_u16(std::string& s, std::uint16_t v) {
    s.push_back(static_cast<char>(v & 0xff));
    s.push_back(static_cast<char>((v >> 8) & 0xff));
}

inline std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t get_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace detail

inline void write_wav(const std::string& path, const AudioBuffer& audio) {
    const std::uint32_t n = static_cast<std::uint32_t>(audio.samples.size());
    const std::uint32_t data_bytes = n * 2;
    std::string out;
    out.reserve(44 + data_bytes);
    out += "RIFF";
    detail::put_u32(out, 36 + data_bytes);
    out += "WAVEfmt ";
    detail::put_u32(out, 16);
    detail::put_u16(out, 1);  // PCM
    detail::put_u16(out, 1);  // mono
    detail::put_u32(out, static_cast<std::uint32_t>(audio.sample_rate));
    detail::put_u32(out, static_cast<std::uint32_t>(audio.sample_rate) * 2);
    detail::put_u16(out, 2);   // block align
    detail::put_u16(out, 16);  // bits per sample
    out += "data";
    detail::put_u32(out, data_bytes);
    for (double s : audio.samples) {
        const double clamped = std::clamp(s, -1.0, 1.0);
        const auto v = static_cast<std::int16_t>(std::lround(clamped * 32767.0));
        detail::put_u16(out, static_cast<std::uint16_t>(v));
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_wav: cannot open " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw std::runtime_error("write_wav: short write to " + path);
}

inline AudioBuffer read_wav(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_wav: cannot open " + path);
    std::vector<unsigned char> raw((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (raw.size() < 44 || std::memcmp(raw.data(), "RIFF", 4) != 0 || std::memcmp(raw.data() + 8, "WAVE", 4) != 0)
        throw std::runtime_error("read_wav: " + path + " is not a RIFF/WAVE file");

    int sample_rate = 0;
    int channels = 0;
    int bits = 0;
    std::size_t pos = 12;
    AudioBuffer audio;
    bool have_fmt = false, have_data = false;
    while (pos + 8 <= raw.size()) {
        const std::string id(reinterpret_cast<const char*>(raw.data() + pos), 4);
        const std::uint32_t len = detail::get_u32(raw.data() + pos + 4);
        pos += 8;
        if (pos + len > raw.size()) throw std::runtime_error("read_wav: truncated chunk in " + path);
        if (id == "fmt ") {
            if (len < 16) throw std::runtime_error("read_wav: bad fmt chunk in " + path);
            const int format = detail::get_u16(raw.data() + pos);
            channels = detail::get_u16(raw.data() + pos + 2);
            sample_rate = static_cast<int>(detail::get_u32(raw.data() + pos + 4));
            bits = detail::get_u16(raw.data() + pos + 14);
            if (format != 1) throw std::runtime_error("read_wav: only PCM supported");
            have_fmt = true;
        } else if (id == "data") {
            if (!have_fmt) throw std::runtime_error("read_wav: data before fmt in " + path);
            if (bits != 16) throw std::runtime_error("read_wav: only 16-bit PCM supported");
            if (channels < 1) throw std::runtime_error("read_wav: bad channel count");
            const std::size_t frames = len / (2 * static_cast<std::size_t>(channels));
            audio.samples.resize(frames);
            for (std::size_t i = 0; i < frames; ++i) {
                // First channel only; inputs we produce are mono anyway.
                const auto* p = raw.data() + pos + i * 2 * channels;
                const auto v = static_cast<std::int16_t>(detail::get_u16(p));
                audio.samples[i] = static_cast<double>(v) / 32767.0;
            }
            have_data = true;
        }
        pos += len + (len & 1);
    }
    if (!have_data) throw std::runtime_error("read_wav: no data chunk in " + path);
    audio.sample_rate = sample_rate;
    return audio;
}

}  // namespace chirppose
