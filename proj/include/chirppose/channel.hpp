#pragma once

// Conferencing-channel emulation: a variable-bitrate transform codec
// (windowed MDCT, coefficient retention, uniform quantization) composed
// with segment-level network loss and optional receiver-side noise/gain.
// Stages preserve the sample count exactly and are deterministic under a
// fixed seed.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "chirppose/fft.hpp"
#include "chirppose/wav.hpp"

namespace chirppose {

struct CodecSegment {
    double duration_ms = 0.0;  // 0 on the last segment: extends to the end
    double frame_ms = 20.0;    // MDCT window span, 2.5..60 ms
    double bitrate_kbps = 64.0;  // 6..256 kbps
};

struct CodecSchedule {
    std::vector<CodecSegment> segments{CodecSegment{}};

    void validate() const {
        if (segments.empty()) throw std::invalid_argument("codec schedule: needs at least one segment");
        for (std::size_t i = 0; i < segments.size(); ++i) {
            const auto& s = segments[i];
            if (!(s.frame_ms >= 2.5 && s.frame_ms <= 60.0))
                throw std::invalid_argument("codec schedule: frame size must be within 2.5..60 ms");
            if (!(s.bitrate_kbps >= 6.0 && s.bitrate_kbps <= 256.0))
                throw std::invalid_argument("codec schedule: bitrate must be within 6..256 kbps");
            if (s.duration_ms < 0.0) throw std::invalid_argument("codec schedule: negative segment duration");
            if (s.duration_ms == 0.0 && i + 1 != segments.size())
                throw std::invalid_argument("codec schedule: only the last segment may be open-ended");
        }
    }
};

// Fraction of MDCT coefficients that survive at a given bitrate.
inline double retained_fraction(double bitrate_kbps) {
    return std::clamp(bitrate_kbps / 128.0, 0.125, 1.0);
}

// Uniform quantizer step at a given bitrate. The base step is calibrated
// so the default 64 kbps / 20 ms setting keeps a full-band chirp sweep at
// or above 30 dB SNR.
inline constexpr double kBaseQuantStep = 0.02;

inline double quant_step(double bitrate_kbps) { return kBaseQuantStep * 64.0 / bitrate_kbps; }

namespace channel_detail {

// Forward MDCT of one windowed frame (length n, even); n/2 coefficients.
// X[k] = sum_n z[n] cos(2*pi/n * (i + 0.5 + n/4)(k + 0.5)) via an FFT with
// pre/post twiddles.
inline std::vector<double> forward_mdct(const std::vector<double>& z) {
    const std::size_t n = z.size();
    const std::size_t half = n / 2;
    std::vector<dsp::cplx> u(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double ang = -dsp::kPi * static_cast<double>(i) / static_cast<double>(n);
        u[i] = z[i] * dsp::cplx(std::cos(ang), std::sin(ang));
    }
    u = dsp::fft(std::move(u), false);
    const double n0 = 0.5 + static_cast<double>(n) / 4.0;
    std::vector<double> x(half);
    for (std::size_t k = 0; k < half; ++k) {
        const double ang = -2.0 * dsp::kPi * n0 * (static_cast<double>(k) + 0.5) / static_cast<double>(n);
        x[k] = (u[k] * dsp::cplx(std::cos(ang), std::sin(ang))).real();
    }
    return x;
}

// Inverse MDCT: n output samples from n/2 coefficients, scaled so that
// sine-windowed 50%-overlap-add reconstructs the input exactly.
inline std::vector<double> inverse_mdct(const std::vector<double>& x) {
    const std::size_t half = x.size();
    const std::size_t n = 2 * half;
    const double n0 = 0.5 + static_cast<double>(n) / 4.0;
    std::vector<dsp::cplx> v(n, dsp::cplx(0, 0));
    for (std::size_t k = 0; k < half; ++k) {
        const double ang = 2.0 * dsp::kPi * n0 * (static_cast<double>(k) + 0.5) / static_cast<double>(n);
        v[k] = x[k] * dsp::cplx(std::cos(ang), std::sin(ang));
    }
    v = dsp::fft(std::move(v), true);  // unscaled inverse transform
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double ang = dsp::kPi * static_cast<double>(i) / static_cast<double>(n);
        y[i] = (4.0 / static_cast<double>(n)) * (v[i] * dsp::cplx(std::cos(ang), std::sin(ang))).real();
    }
    return y;
}

// Zero all but the strongest coefficients by magnitude (ties keep the lower
// index), then quantize the survivors.
inline void retain_and_quantize(std::vector<double>& x, double fraction, double step) {
    const std::size_t total = x.size();
    const auto keep = static_cast<std::size_t>(
        std::max<long long>(1, std::llround(fraction * static_cast<double>(total))));
    if (keep < total) {
        std::vector<std::size_t> idx(total);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(keep), idx.end(),
                         [&x](std::size_t a, std::size_t b) {
                             const double ma = std::abs(x[a]);
                             const double mb = std::abs(x[b]);
                             return ma > mb || (ma == mb && a < b);
                         });
        std::vector<bool> kept(total, false);
        for (std::size_t i = 0; i < keep; ++i) kept[idx[i]] = true;
        for (std::size_t i = 0; i < total; ++i)
            if (!kept[i]) x[i] = 0.0;
    }
    if (step > 0.0)
        for (double& c : x) c = static_cast<double>(std::llround(c / step)) * step;
}

// One schedule segment: sine-windowed MDCT / retain / quantize / IMDCT with
// 50% overlap-add. Half a window of zero padding on both sides gives every
// input sample full overlap coverage, so a no-op coefficient stage is a
// perfect reconstruction.
inline std::vector<double> process_codec_segment(const double* x, std::size_t len, double frame_ms,
                                                 double bitrate_kbps, int sample_rate) {
    const auto n = static_cast<std::size_t>(
        2 * std::llround(sample_rate * frame_ms / 2000.0));  // window length, even
    if (n < 4) throw std::invalid_argument("codec: frame too short for this sample rate");
    const std::size_t half = n / 2;
    const std::size_t frames = (len + half - 1) / half + 1;
    const std::size_t padded = frames * half + half;

    std::vector<double> window(n);
    for (std::size_t i = 0; i < n; ++i)
        window[i] = std::sin(dsp::kPi * (static_cast<double>(i) + 0.5) / static_cast<double>(n));

    std::vector<double> in(padded, 0.0);
    std::copy(x, x + len, in.begin() + static_cast<std::ptrdiff_t>(half));
    std::vector<double> out(padded, 0.0);

    const double fraction = retained_fraction(bitrate_kbps);
    const double step = quant_step(bitrate_kbps);
    std::vector<double> z(n);
    for (std::size_t f = 0; f < frames; ++f) {
        const std::size_t s = f * half;
        for (std::size_t i = 0; i < n; ++i) z[i] = in[s + i] * window[i];
        auto coeff = forward_mdct(z);
        retain_and_quantize(coeff, fraction, step);
        const auto y = inverse_mdct(coeff);
        for (std::size_t i = 0; i < n; ++i) out[s + i] += y[i] * window[i];
    }
    return std::vector<double>(out.begin() + static_cast<std::ptrdiff_t>(half),
                               out.begin() + static_cast<std::ptrdiff_t>(half + len));
}

inline AudioBuffer resample_linear(const AudioBuffer& in, int target_rate) {
    if (in.sample_rate == target_rate || in.samples.empty()) {
        AudioBuffer out = in;
        out.sample_rate = target_rate;
        return out;
    }
    AudioBuffer out;
    out.sample_rate = target_rate;
    const double ratio = static_cast<double>(in.sample_rate) / target_rate;
    const auto n = static_cast<std::size_t>(
        std::llround(static_cast<double>(in.samples.size()) / ratio));
    out.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double pos = static_cast<double>(i) * ratio;
        const auto lo = std::min(static_cast<std::size_t>(pos), in.samples.size() - 1);
        const auto hi = std::min(lo + 1, in.samples.size() - 1);
        const double t = pos - static_cast<double>(lo);
        out.samples[i] = (1.0 - t) * in.samples[lo] + t * in.samples[hi];
    }
    return out;
}

}  // namespace channel_detail

inline AudioBuffer apply_codec(const AudioBuffer& in, const CodecSchedule& schedule) {
    schedule.validate();
    AudioBuffer out;
    out.sample_rate = in.sample_rate;
    out.samples.reserve(in.samples.size());
    std::size_t pos = 0;
    for (std::size_t i = 0; i < schedule.segments.size() && pos < in.samples.size(); ++i) {
        const auto& seg = schedule.segments[i];
        const bool last = i + 1 == schedule.segments.size();
        std::size_t len = in.samples.size() - pos;
        if (!last && seg.duration_ms > 0.0) {
            const auto want = static_cast<std::size_t>(std::llround(seg.duration_ms * in.sample_rate / 1000.0));
            len = std::min(len, want);
        }
        const auto piece = channel_detail::process_codec_segment(in.samples.data() + pos, len, seg.frame_ms,
                                                                 seg.bitrate_kbps, in.sample_rate);
        out.samples.insert(out.samples.end(), piece.begin(), piece.end());
        pos += len;
    }
    return out;
}

struct NetworkModel {
    double segment_ms = 20.0;  // loss granularity
    double loss_prob = 0.0;
    enum class Concealment { Zero, RepeatLast } concealment = Concealment::Zero;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(segment_ms > 0.0)) throw std::invalid_argument("network: segment duration must be positive");
        if (!(loss_prob >= 0.0 && loss_prob <= 1.0))
            throw std::invalid_argument("network: loss probability must be in [0,1]");
    }
};

// Drop whole segments independently with probability loss_prob. The drop
// mask depends only on the seed and segment count, never on the
// concealment mode. Draws avoid distribution classes so the mask is
// bit-stable across standard library implementations.
inline AudioBuffer apply_network(const AudioBuffer& in, const NetworkModel& net) {
    net.validate();
    AudioBuffer out = in;
    const auto unit = static_cast<std::size_t>(std::llround(net.segment_ms * in.sample_rate / 1000.0));
    if (unit == 0) throw std::invalid_argument("network: segment shorter than one sample");
    std::mt19937_64 rng(net.seed);
    std::size_t last_good = std::numeric_limits<std::size_t>::max();
    for (std::size_t s = 0; s < out.samples.size(); s += unit) {
        const std::size_t e = std::min(s + unit, out.samples.size());
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        if (u < net.loss_prob) {
            if (net.concealment == NetworkModel::Concealment::RepeatLast &&
                last_good != std::numeric_limits<std::size_t>::max()) {
                for (std::size_t i = s; i < e; ++i) out.samples[i] = out.samples[last_good + (i - s)];
            } else {
                std::fill(out.samples.begin() + static_cast<std::ptrdiff_t>(s),
                          out.samples.begin() + static_cast<std::ptrdiff_t>(e), 0.0);
            }
        } else {
            last_good = s;
        }
    }
    return out;
}

struct ChannelConfig {
    enum class CodecMode { Identity, Emulated, External } codec_mode = CodecMode::Emulated;
    CodecSchedule schedule;         // used in Emulated mode
    std::string external_command;   // used in External mode; {in}/{out} placeholders
    NetworkModel network;
    std::optional<double> post_snr_db;  // additive white noise relative to signal power
    double gain = 1.0;
};

// Round-trip through a user-supplied encoder/decoder command. The template
// must contain {in} and {out} placeholders; a failing or missing tool is a
// hard error naming the command, never a silent fallback.
inline AudioBuffer external_codec_passthrough(const AudioBuffer& in, const std::string& command_template) {
    namespace fs = std::filesystem;
    if (command_template.find("{in}") == std::string::npos ||
        command_template.find("{out}") == std::string::npos)
        throw std::invalid_argument("external codec: command template must contain {in} and {out}");

    static std::atomic<unsigned> counter{0};
    const auto tag = std::to_string(
                         std::chrono::steady_clock::now().time_since_epoch().count()) +
                     "_" + std::to_string(counter.fetch_add(1));
    const fs::path dir = fs::temp_directory_path();
    const fs::path in_path = dir / ("chirppose_ext_" + tag + "_in.wav");
    const fs::path out_path = dir / ("chirppose_ext_" + tag + "_out.wav");

    const auto substitute = [](std::string s, const std::string& key, const std::string& value) {
        for (std::size_t p = s.find(key); p != std::string::npos; p = s.find(key, p + value.size()))
            s.replace(p, key.size(), value);
        return s;
    };
    const std::string cmd =
        substitute(substitute(command_template, "{in}", in_path.string()), "{out}", out_path.string());

    write_wav(in_path.string(), in);
    const int status = std::system(cmd.c_str());
    const auto cleanup = [&] {
        std::error_code ec;
        fs::remove(in_path, ec);
        fs::remove(out_path, ec);
    };
    if (status != 0) {
        cleanup();
        throw std::runtime_error("external codec command failed (status " + std::to_string(status) +
                                 "): " + cmd);
    }
    if (!fs::exists(out_path)) {
        cleanup();
        throw std::runtime_error("external codec produced no output file: " + cmd);
    }
    AudioBuffer out = read_wav(out_path.string());
    cleanup();
    if (out.sample_rate != in.sample_rate) out = channel_detail::resample_linear(out, in.sample_rate);
    out.samples.resize(in.samples.size(), 0.0);  // channel stages preserve length
    return out;
}

inline constexpr std::uint64_t kPostNoiseSeedSalt = 0x9e3779b97f4a7c15ull;

// Full channel: codec, then network loss, then receiver-side noise and
// gain. The noise generator is seeded from the network seed plus a fixed
// salt so the two stages draw independent streams.
inline AudioBuffer apply_channel(const AudioBuffer& in, const ChannelConfig& cfg) {
    AudioBuffer x = in;
    switch (cfg.codec_mode) {
        case ChannelConfig::CodecMode::Identity: break;
        case ChannelConfig::CodecMode::Emulated: x = apply_codec(x, cfg.schedule); break;
        case ChannelConfig::CodecMode::External: x = external_codec_passthrough(x, cfg.external_command); break;
    }
    x = apply_network(x, cfg.network);
    if (cfg.post_snr_db) {
        double power = 0.0;
        for (double s : x.samples) power += s * s;
        power /= std::max<std::size_t>(1, x.samples.size());
        if (power > 0.0) {
            const double sigma = std::sqrt(power / std::pow(10.0, *cfg.post_snr_db / 10.0));
            std::mt19937_64 rng(cfg.network.seed ^ kPostNoiseSeedSalt);
            std::normal_distribution<double> noise(0.0, sigma);
            for (double& s : x.samples) s += noise(rng);
        }
    }
    if (cfg.gain != 1.0)
        for (double& s : x.samples) s *= cfg.gain;
    return x;
}

// Signal-to-distortion ratio in dB between a reference and a processed
// copy of the same length; the measurement tool for codec calibration.
inline double snr_db(const std::vector<double>& reference, const std::vector<double>& processed) {
    if (reference.size() != processed.size() || reference.empty())
        throw std::invalid_argument("snr_db: length mismatch");
    double sig = 0.0, err = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        sig += reference[i] * reference[i];
        const double d = processed[i] - reference[i];
        err += d * d;
    }
    if (err == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(sig / err);
}

}  // namespace chirppose
