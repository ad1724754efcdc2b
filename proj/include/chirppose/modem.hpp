#pragma once

// Acoustic modem: 16-ary chirp spread spectrum (plus an FSK baseline) in
// the 4-16 kHz band at 48 kHz. Frames are
//   [1 kHz delimiter | 3 up-chirp preamble symbols | header symbol | payload]
// where the preamble is always chirped; header and payload use the
// configured scheme. Detection is a normalized matched filter on the
// delimiter; fine alignment dechirps the preamble and maximizes the summed
// zero-bin magnitude over candidate offsets.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chirppose/fft.hpp"
#include "chirppose/pose.hpp"
#include "chirppose/wav.hpp"

namespace chirppose {

struct ModemConfig {
    int sample_rate = 48000;
    int modulation_order = 16;  // M, a power of two
    int symbol_rate = 1500;     // symbols per second
    double band_low_hz = 4000.0;
    double band_high_hz = 16000.0;
    double delimiter_freq_hz = 1000.0;
    int delimiter_samples = 610;
    int preamble_symbols = 3;
    double detection_threshold = 0.6;  // normalized correlation, in [0,1]
    double amplitude = 0.8;
    enum class Scheme { Css, Fsk } scheme = Scheme::Css;

    int samples_per_symbol() const { return sample_rate / symbol_rate; }

    int bits_per_symbol() const {
        int bits = 0, m = modulation_order;
        while (m > 1) {
            m >>= 1;
            ++bits;
        }
        return bits;
    }

    // Payload bit rate, exact (framing overhead excluded).
    int bit_rate() const { return symbol_rate * bits_per_symbol(); }

    void validate() const {
        if (sample_rate <= 0 || symbol_rate <= 0) throw std::invalid_argument("modem: rates must be positive");
        if (sample_rate % symbol_rate != 0)
            throw std::invalid_argument("modem: sample rate must be an integer multiple of the symbol rate");
        if (modulation_order < 2 || (modulation_order & (modulation_order - 1)) != 0)
            throw std::invalid_argument("modem: modulation order must be a power of two");
        if (!(band_high_hz > band_low_hz) || !(band_low_hz > 0))
            throw std::invalid_argument("modem: need 0 < band_low < band_high");
        if (sample_rate < 2.0 * band_high_hz)
            throw std::invalid_argument("modem: sample rate violates Nyquist for the band");
        if (!(delimiter_freq_hz > 0) || delimiter_freq_hz >= band_low_hz)
            throw std::invalid_argument("modem: delimiter tone must sit below the chirp band");
        if (delimiter_samples <= 0 || preamble_symbols <= 0)
            throw std::invalid_argument("modem: delimiter/preamble lengths must be positive");
        if (!(detection_threshold >= 0.0 && detection_threshold <= 1.0))
            throw std::invalid_argument("modem: detection threshold must be in [0,1]");
        if (!(amplitude > 0.0 && amplitude <= 1.0))
            throw std::invalid_argument("modem: amplitude must be in (0,1]");
    }
};

// Data-rate presets: 1.5 / 3 / 6 kbit/s keep M=16 and stretch the symbol
// (128 / 64 / 32 samples per symbol at 48 kHz).
inline ModemConfig modem_preset_kbps(double kbps, ModemConfig base = {}) {
    if (kbps == 1.5)
        base.symbol_rate = 375;
    else if (kbps == 3.0)
        base.symbol_rate = 750;
    else if (kbps == 6.0)
        base.symbol_rate = 1500;
    else
        throw std::invalid_argument("modem preset: supported rates are 1.5, 3, 6 kbit/s");
    base.validate();
    return base;
}

inline std::uint8_t header_symbol_for(FrameType t) {
    switch (t) {
        case FrameType::Complete: return 0;
        case FrameType::Displacement: return 5;
        case FrameType::OneHand: return 10;
        case FrameType::JustBody: return 15;
    }
    throw std::invalid_argument("header_symbol_for: bad frame type");
}

// Nearest-codepoint correction for a corrupted header, cyclic in symbol
// space (chirp shifts wrap). nullopt means an exact tie: drop the frame.
inline std::optional<FrameType> frame_type_from_header(int symbol, int modulation_order = 16) {
    static constexpr FrameType kTypes[4] = {FrameType::Complete, FrameType::Displacement, FrameType::OneHand,
                                            FrameType::JustBody};
    int best = -1, best_dist = 1 << 20;
    bool tie = false;
    for (int i = 0; i < 4; ++i) {
        const int code = header_symbol_for(kTypes[i]);
        const int lin = std::abs(symbol - code);
        const int dist = std::min(lin, modulation_order - lin);
        if (dist < best_dist) {
            best_dist = dist;
            best = i;
            tie = false;
        } else if (dist == best_dist) {
            tie = true;
        }
    }
    if (tie) return std::nullopt;
    return kTypes[best];
}

// Shared by coarse detection (fills coarse_start, correlation) and fine
// synchronization (fills fine_offset, score). The refined delimiter start
// is coarse_start + fine_offset.
struct SyncResult {
    std::size_t coarse_start = 0;  // delimiter start estimate, sample index
    int fine_offset = 0;           // correction in [-N_s, N_s]
    double score = 0.0;            // summed dechirped zero-bin magnitude
    double correlation = 0.0;      // matched filter peak
};

struct DemodResult {
    std::uint8_t symbol = 0;
    double magnitude = 0.0;  // winning bin magnitude; ~0 flags garbage input
};

class Modem {
public:
    explicit Modem(ModemConfig cfg) : cfg_(cfg) {
        cfg_.validate();
        build_tables();
    }

    const ModemConfig& config() const { return cfg_; }

    // --- synthesis -----------------------------------------------------------

    std::vector<double> modulate(const std::vector<std::uint8_t>& symbols) const {
        return cfg_.scheme == ModemConfig::Scheme::Css ? modulate_css(symbols) : modulate_fsk(symbols);
    }

    std::vector<double> modulate_css(const std::vector<std::uint8_t>& symbols) const {
        return concat_waves(symbols, css_wave_);
    }

    std::vector<double> modulate_fsk(const std::vector<std::uint8_t>& symbols) const {
        return concat_waves(symbols, fsk_wave_);
    }

    const std::vector<double>& delimiter() const { return delimiter_; }

    std::size_t frame_samples(FrameType t) const {
        return static_cast<std::size_t>(cfg_.delimiter_samples) +
               static_cast<std::size_t>(cfg_.preamble_symbols + 1 + payload_symbol_count(t)) *
                   cfg_.samples_per_symbol();
    }

    AudioBuffer build_frame(const FramePayload& payload) const {
        if (cfg_.modulation_order != 16)
            throw std::invalid_argument("build_frame: frame headers assume 16-ary symbols");
        if (static_cast<int>(payload.symbols.size()) != payload_symbol_count(payload.frame_type))
            throw std::invalid_argument("build_frame: payload symbol count does not match frame type");
        for (auto s : payload.symbols)
            if (s >= cfg_.modulation_order) throw std::domain_error("build_frame: symbol out of range");

        AudioBuffer out;
        out.sample_rate = cfg_.sample_rate;
        out.samples.reserve(frame_samples(payload.frame_type));
        append(out.samples, delimiter_);
        for (int i = 0; i < cfg_.preamble_symbols; ++i) append(out.samples, css_wave_[0]);
        const std::uint8_t header = header_symbol_for(payload.frame_type);
        append(out.samples, cfg_.scheme == ModemConfig::Scheme::Css ? css_wave_[header] : fsk_wave_[header]);
        for (auto s : payload.symbols)
            append(out.samples, cfg_.scheme == ModemConfig::Scheme::Css ? css_wave_[s] : fsk_wave_[s]);
        return out;
    }

    // --- symbol demodulation ---------------------------------------------------

    DemodResult demodulate_symbol(const double* x) const {
        return cfg_.scheme == ModemConfig::Scheme::Css ? demodulate_css(x) : demodulate_fsk(x);
    }

    // Multiply by the conjugate reference up-chirp, FFT, and compare the M
    // calibrated bins. Ties resolve to the smallest symbol, so all-zero
    // input returns symbol 0 with zero magnitude.
    DemodResult demodulate_css(const double* x) const {
        const int ns = cfg_.samples_per_symbol();
        std::vector<dsp::cplx> p(fft_size_, dsp::cplx(0, 0));
        for (int n = 0; n < ns; ++n) p[n] = x[n] * dechirp_[n];
        dsp::fft_pow2(p, false);
        DemodResult best;
        best.magnitude = -1.0;
        for (int v = 0; v < cfg_.modulation_order; ++v) {
            const double mag = std::abs(p[css_bin_[v]]);
            if (mag > best.magnitude) {
                best.magnitude = mag;
                best.symbol = static_cast<std::uint8_t>(v);
            }
        }
        return best;
    }

    // Tone detector: zero-padded FFT, argmax over the M calibrated tone
    // bins. Ties resolve to the smallest symbol, so all-zero input returns
    // symbol 0 with zero magnitude.
    DemodResult demodulate_fsk(const double* x) const {
        const int ns = cfg_.samples_per_symbol();
        std::vector<dsp::cplx> p(fft_size_, dsp::cplx(0, 0));
        for (int n = 0; n < ns; ++n) p[n] = x[n];
        dsp::fft_pow2(p, false);
        DemodResult best;
        best.magnitude = -1.0;
        for (int v = 0; v < cfg_.modulation_order; ++v) {
            const double mag = std::abs(p[fsk_bin_[v]]);
            if (mag > best.magnitude) {
                best.magnitude = mag;
                best.symbol = static_cast<std::uint8_t>(v);
            }
        }
        return best;
    }

    // --- synchronization -------------------------------------------------------

    // Normalized cross-correlation with the delimiter template. Scans from
    // `from`, takes the earliest threshold exceedance, and returns the
    // correlation argmax within one delimiter length of it.
    std::optional<SyncResult> matched_filter_detect(const std::vector<double>& x, std::size_t from = 0) const {
        const std::size_t L = static_cast<std::size_t>(cfg_.delimiter_samples);
        if (x.size() < L || from + L > x.size()) return std::nullopt;
        std::vector<double> cum(x.size() + 1, 0.0);
        for (std::size_t i = 0; i < x.size(); ++i) cum[i + 1] = cum[i] + x[i] * x[i];

        const auto corr_at = [&](std::size_t p) {
            const double energy = cum[p + L] - cum[p];
            if (energy < 1e-24) return 0.0;
            double dot = 0.0;
            for (std::size_t i = 0; i < L; ++i) dot += x[p + i] * delimiter_[i];
            return dot / (delim_norm_ * std::sqrt(energy));
        };

        const std::size_t last = x.size() - L;
        for (std::size_t p = from; p <= last; ++p) {
            if (corr_at(p) < cfg_.detection_threshold) continue;
            std::size_t best = p;
            double best_corr = corr_at(p);
            const std::size_t region_end = std::min(p + L, last);
            for (std::size_t q = p + 1; q <= region_end; ++q) {
                const double c = corr_at(q);
                if (c > best_corr) {
                    best_corr = c;
                    best = q;
                }
            }
            SyncResult r;
            r.coarse_start = best;
            r.correlation = best_corr;
            return r;
        }
        return std::nullopt;
    }

    // Refine a coarse delimiter estimate by sliding the preamble window
    // through [-Ns, Ns] and summing dechirped zero-bin magnitudes; clean
    // aligned preambles peak exactly at the true offset. nullopt: not
    // enough samples yet.
    //
    // Ties resolve toward the smallest |offset|, and scores within a small
    // margin of the peak count as tied. The margin matters: a frame whose
    // header symbol is 0 extends the preamble to four identical chirps, so
    // the score at offset+Ns equals the true peak up to noise, and only the
    // proximity prior from the coarse estimate can break that ambiguity.
    // One sample of misalignment already costs ~10% of the score, so a 5%
    // margin never blurs genuinely distinct offsets.
    std::optional<SyncResult> fine_sync(const std::vector<double>& x, std::size_t coarse_delim_start) const {
        const int ns = cfg_.samples_per_symbol();
        const std::size_t base = coarse_delim_start + static_cast<std::size_t>(cfg_.delimiter_samples);
        if (base < static_cast<std::size_t>(ns)) return std::nullopt;
        const std::size_t need = base + static_cast<std::size_t>(ns) +
                                 static_cast<std::size_t>(cfg_.preamble_symbols) * ns;
        if (need > x.size()) return std::nullopt;

        std::vector<double> score(static_cast<std::size_t>(2 * ns + 1));
        double peak = -1.0;
        for (int k = -ns; k <= ns; ++k) {
            double s = 0.0;
            for (int m = 0; m < cfg_.preamble_symbols; ++m) {
                dsp::cplx acc(0, 0);
                const double* seg = x.data() + base + k + static_cast<std::size_t>(m) * ns;
                for (int n = 0; n < ns; ++n) acc += seg[n] * dechirp_[n];
                s += std::abs(acc);
            }
            score[static_cast<std::size_t>(k + ns)] = s;
            peak = std::max(peak, s);
        }

        SyncResult best;
        best.coarse_start = coarse_delim_start;
        bool have = false;
        for (int k = -ns; k <= ns; ++k) {
            const double s = score[static_cast<std::size_t>(k + ns)];
            if (s < (1.0 - kSyncTieMargin) * peak) continue;
            const bool better = !have || std::abs(k) < std::abs(best.fine_offset) ||
                                (std::abs(k) == std::abs(best.fine_offset) && k < best.fine_offset);
            if (better) {
                best.fine_offset = k;
                best.score = s;
                have = true;
            }
        }
        return best;
    }

    static constexpr double kSyncTieMargin = 0.05;

    double delimiter_norm() const { return delim_norm_; }
    int fft_size() const { return fft_size_; }

private:
    static void append(std::vector<double>& out, const std::vector<double>& w) {
        out.insert(out.end(), w.begin(), w.end());
    }

    static void normalize_rms(std::vector<double>& w, double target_rms) {
        double e = 0.0;
        for (double s : w) e += s * s;
        const double r = std::sqrt(e / static_cast<double>(w.size()));
        if (r > 0.0)
            for (double& s : w) s *= target_rms / r;
    }

    std::vector<double> concat_waves(const std::vector<std::uint8_t>& symbols,
                                     const std::vector<std::vector<double>>& waves) const {
        std::vector<double> out;
        out.reserve(symbols.size() * cfg_.samples_per_symbol());
        for (auto s : symbols) {
            if (s >= cfg_.modulation_order) throw std::domain_error("modulate: symbol out of range");
            append(out, waves[s]);
        }
        return out;
    }

    void build_tables() {
        const int ns = cfg_.samples_per_symbol();
        const int m = cfg_.modulation_order;
        const double fs = cfg_.sample_rate;
        const double bw = cfg_.band_high_hz - cfg_.band_low_hz;

        // Cyclic up-chirps: symbol v starts at f0 + v*B/M, sweeps up, wraps
        // from f1 back to f0. Phase accumulates within the symbol. Each wave
        // is then scaled to exactly the ideal constant-envelope RMS, taking
        // out the small discrete-sampling energy ripple so symbol energy is
        // value-independent.
        css_wave_.assign(m, std::vector<double>(ns));
        for (int v = 0; v < m; ++v) {
            double phase = 0.0;
            for (int n = 0; n < ns; ++n) {
                css_wave_[v][n] = cfg_.amplitude * std::sin(phase);
                const double sweep = std::fmod(static_cast<double>(v) / m + static_cast<double>(n) / ns, 1.0);
                const double freq = cfg_.band_low_hz + bw * sweep;
                phase += 2.0 * dsp::kPi * freq / fs;
            }
            normalize_rms(css_wave_[v], cfg_.amplitude / std::sqrt(2.0));
        }

        // FSK baseline: M tones spread evenly across the same band, equal
        // transmit energy per symbol.
        fsk_wave_.assign(m, std::vector<double>(ns));
        for (int v = 0; v < m; ++v) {
            const double freq = cfg_.band_low_hz + bw * static_cast<double>(v) / (m - 1);
            for (int n = 0; n < ns; ++n)
                fsk_wave_[v][n] = cfg_.amplitude * std::sin(2.0 * dsp::kPi * freq * n / fs);
            normalize_rms(fsk_wave_[v], cfg_.amplitude / std::sqrt(2.0));
        }

        // Conjugate analytic reference up-chirp for dechirping.
        dechirp_.resize(ns);
        {
            double phase = 0.0;
            for (int n = 0; n < ns; ++n) {
                dechirp_[n] = dsp::cplx(std::cos(phase), -std::sin(phase));
                const double freq = cfg_.band_low_hz + bw * (static_cast<double>(n) / ns);
                phase += 2.0 * dsp::kPi * freq / fs;
            }
        }

        delimiter_.resize(cfg_.delimiter_samples);
        double d2 = 0.0;
        for (int n = 0; n < cfg_.delimiter_samples; ++n) {
            delimiter_[n] = cfg_.amplitude * std::sin(2.0 * dsp::kPi * cfg_.delimiter_freq_hz * n / fs);
            d2 += delimiter_[n] * delimiter_[n];
        }
        delim_norm_ = std::sqrt(d2);

        // Calibrate the dechirped FFT bin of each clean symbol once; the
        // decision rule compares exactly these M bins.
        fft_size_ = static_cast<int>(dsp::next_pow2(static_cast<std::size_t>(4 * ns)));
        css_bin_.assign(m, 0);
        std::vector<bool> used(fft_size_, false);
        for (int v = 0; v < m; ++v) {
            std::vector<dsp::cplx> p(fft_size_, dsp::cplx(0, 0));
            for (int n = 0; n < ns; ++n) p[n] = css_wave_[v][n] * dechirp_[n];
            dsp::fft_pow2(p, false);
            int best = 0;
            double best_mag = -1.0;
            for (int k = 0; k < fft_size_; ++k) {
                const double mag = std::abs(p[k]);
                if (mag > best_mag) {
                    best_mag = mag;
                    best = k;
                }
            }
            if (used[best]) throw std::logic_error("modem: chirp bin calibration collision");
            used[best] = true;
            css_bin_[v] = best;
        }

        // Same one-time calibration for the FSK tone bins.
        fsk_bin_.assign(m, 0);
        std::vector<bool> tone_used(fft_size_, false);
        for (int v = 0; v < m; ++v) {
            std::vector<dsp::cplx> p(fft_size_, dsp::cplx(0, 0));
            for (int n = 0; n < ns; ++n) p[n] = fsk_wave_[v][n];
            dsp::fft_pow2(p, false);
            int best = 0;
            double best_mag = -1.0;
            for (int k = 0; k < fft_size_ / 2; ++k) {
                const double mag = std::abs(p[k]);
                if (mag > best_mag) {
                    best_mag = mag;
                    best = k;
                }
            }
            if (tone_used[best]) throw std::logic_error("modem: tone bin calibration collision");
            tone_used[best] = true;
            fsk_bin_[v] = best;
        }
    }

    ModemConfig cfg_;
    std::vector<std::vector<double>> css_wave_;
    std::vector<std::vector<double>> fsk_wave_;
    std::vector<dsp::cplx> dechirp_;
    std::vector<double> delimiter_;
    std::vector<int> css_bin_;
    std::vector<int> fsk_bin_;
    double delim_norm_ = 1.0;
    int fft_size_ = 0;
};

// --- symbol error rate ---------------------------------------------------------

// Mismatch fraction between aligned symbol sequences; a length mismatch
// counts its tail as errors against the longer length.
inline double ser(const std::vector<std::uint8_t>& sent, const std::vector<std::uint8_t>& received) {
    if (sent.empty() && received.empty()) throw std::invalid_argument("ser: both sequences empty");
    const std::size_t overlap = std::min(sent.size(), received.size());
    std::size_t errors = std::max(sent.size(), received.size()) - overlap;
    for (std::size_t i = 0; i < overlap; ++i) errors += sent[i] != received[i] ? 1 : 0;
    return static_cast<double>(errors) / static_cast<double>(std::max(sent.size(), received.size()));
}

// --- streaming decoder -----------------------------------------------------------

struct DecodedFrame {
    FramePayload payload;
    std::size_t frame_start = 0;  // sample index of the (refined) delimiter start
    double correlation = 0.0;     // matched filter peak
    double sync_score = 0.0;      // fine sync score
};

struct DecoderStats {
    std::size_t frames_decoded = 0;
    // Runs of energetic signal, at least one delimiter long, that never
    // completed a frame (zeroed delimiter, truncated tail, aborted sync).
    // Contiguous runs coalesce; the count is a heuristic that is exact on
    // quiet-background streams.
    std::size_t frame_loss_events = 0;
};

// Incremental decoder; feed arbitrary chunk sizes, results are identical
// to single-shot decoding of the concatenated stream.
class StreamDecoder {
public:
    explicit StreamDecoder(ModemConfig cfg)
        : modem_(cfg),
          ns_(static_cast<std::size_t>(cfg.samples_per_symbol())),
          delim_len_(static_cast<std::size_t>(cfg.delimiter_samples)) {}

    const Modem& modem() const { return modem_; }
    const DecoderStats& stats() const { return stats_; }

    std::vector<DecodedFrame> push(const double* samples, std::size_t n) {
        buf_.insert(buf_.end(), samples, samples + n);
        std::vector<DecodedFrame> out;
        run(out, false);
        return out;
    }

    std::vector<DecodedFrame> push(const std::vector<double>& samples) {
        return push(samples.data(), samples.size());
    }

    // Signal end of stream: anything still buffered can never complete.
    std::vector<DecodedFrame> flush() {
        std::vector<DecodedFrame> out;
        run(out, true);
        account_scanned(end_abs());
        discard_to(end_abs());
        pending_.reset();
        return out;
    }

private:
    struct Pending {
        std::size_t exceed_pos = 0;           // first threshold exceedance (absolute)
        std::optional<std::size_t> t0;        // refined coarse delimiter start
        std::optional<std::size_t> preamble;  // fine-synced preamble start
        std::optional<FrameType> type;
        double correlation = 0.0;
        double sync_score = 0.0;
    };

    std::size_t end_abs() const { return origin_ + buf_.size(); }

    // Correlation from the window contents alone, so results cannot depend
    // on how the stream was chunked.
    double corr_at_abs(std::size_t p) const {
        const std::size_t rel = p - origin_;
        double energy = 0.0;
        for (std::size_t i = 0; i < delim_len_; ++i) energy += buf_[rel + i] * buf_[rel + i];
        if (energy < 1e-24) return 0.0;
        const auto& d = modem_.delimiter();
        double dot = 0.0;
        for (std::size_t i = 0; i < delim_len_; ++i) dot += buf_[rel + i] * d[i];
        return dot / (modem_.delimiter_norm() * std::sqrt(energy));
    }

    // Loss accounting: every sample that leaves the buffer without being
    // part of a decoded frame flows through here, in stream order, exactly
    // once. An energetic run one delimiter long counts one event; only a
    // quiet gap of at least one symbol breaks a run, since waveforms pass
    // near zero at every crossing.
    void feed_dead_sample(double s) {
        if (std::abs(s) > kSilenceEps) {
            quiet_gap_ = 0;
            ++skip_run_;
            if (skip_run_ >= delim_len_ && !run_counted_) {
                ++stats_.frame_loss_events;
                run_counted_ = true;
            }
        } else if (++quiet_gap_ >= ns_) {
            skip_run_ = 0;
            run_counted_ = false;
        }
    }

    void account_scanned(std::size_t to) {
        to = std::min(to, end_abs());
        for (std::size_t p = std::max(fed_pos_, origin_); p < to; ++p) feed_dead_sample(buf_[p - origin_]);
        fed_pos_ = std::max(fed_pos_, to);
    }

    // Logical discard with amortized compaction, so one huge push is not
    // quadratic in repeated front erases.
    void discard_to(std::size_t to) {
        fed_pos_ = std::max(fed_pos_, std::min(to, end_abs()));
        if (to <= origin_) return;
        const std::size_t n = std::min(to - origin_, buf_.size());
        if (n >= kCompactChunk || 2 * n >= buf_.size()) {
            buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(n));
            origin_ += n;
        }
        if (scan_pos_ < to) scan_pos_ = to;
    }

    void run(std::vector<DecodedFrame>& out, bool flushing) {
        for (;;) {
            if (!pending_) {
                if (!scan(flushing)) return;
            }
            if (!advance(out, flushing)) return;
        }
    }

    // Search for a threshold exceedance. Returns true when one is pending.
    bool scan(bool flushing) {
        if (scan_pos_ < origin_) scan_pos_ = origin_;
        while (scan_pos_ + delim_len_ <= end_abs()) {
            if (corr_at_abs(scan_pos_) >= modem_.config().detection_threshold) {
                pending_ = Pending{scan_pos_, std::nullopt, std::nullopt, std::nullopt, 0.0, 0.0};
                return true;
            }
            ++scan_pos_;
        }
        if (!flushing) {
            // Everything before scan_pos_ is scanned and dead; drop it.
            account_scanned(scan_pos_);
            discard_to(scan_pos_);
        }
        return false;
    }

    // Drive a pending frame through argmax -> fine sync -> header -> payload.
    // Returns false when more samples are needed (or the frame was dropped
    // and scanning should resume).
    bool advance(std::vector<DecodedFrame>& out, bool flushing) {
        auto& p = *pending_;

        if (!p.t0) {
            // Argmax of the correlation within one delimiter length of the
            // first exceedance; needs a full window at every candidate.
            const std::size_t region_end = p.exceed_pos + delim_len_;
            if (region_end + delim_len_ > end_abs()) {
                if (!flushing) return false;
                // Truncated stream: fall back to what is scannable.
            }
            const std::size_t last_scannable =
                end_abs() >= delim_len_ ? end_abs() - delim_len_ : 0;
            const std::size_t hi = std::min(region_end, last_scannable);
            std::size_t best = p.exceed_pos;
            double best_corr = corr_at_abs(p.exceed_pos);
            for (std::size_t q = p.exceed_pos + 1; q <= hi; ++q) {
                const double c = corr_at_abs(q);
                if (c > best_corr) {
                    best_corr = c;
                    best = q;
                }
            }
            p.t0 = best;
            p.correlation = best_corr;
            // The skipped stretch before the frame never decoded; account it.
            account_scanned(best);
            discard_to(best);
        }

        if (!p.preamble) {
            const std::size_t rel_t0 = *p.t0 - origin_;
            const std::size_t need = rel_t0 + delim_len_ + ns_ + static_cast<std::size_t>(modem_.config().preamble_symbols) * ns_;
            if (need > buf_.size()) {
                if (flushing) return drop_pending();
                return false;
            }
            const auto fine = modem_.fine_sync(buf_, rel_t0);
            if (!fine) return flushing ? drop_pending() : false;
            p.sync_score = fine->score;
            const long long base = static_cast<long long>(*p.t0 + delim_len_);
            p.preamble = static_cast<std::size_t>(base + fine->fine_offset);  // |offset| <= ns < base
        }

        const std::size_t header_pos = *p.preamble + static_cast<std::size_t>(modem_.config().preamble_symbols) * ns_;
        if (!p.type) {
            if (header_pos + ns_ > end_abs()) return flushing ? drop_pending() : false;
            const auto header = modem_.demodulate_symbol(buf_.data() + (header_pos - origin_));
            const auto type = frame_type_from_header(header.symbol, modem_.config().modulation_order);
            if (!type) return drop_pending();  // ambiguous header: lose the frame
            p.type = *type;
        }

        const std::size_t count = static_cast<std::size_t>(payload_symbol_count(*p.type));
        const std::size_t payload_pos = header_pos + ns_;
        const std::size_t frame_end = payload_pos + count * ns_;
        if (frame_end > end_abs()) return flushing ? drop_pending() : false;

        DecodedFrame frame;
        frame.payload.frame_type = *p.type;
        frame.payload.symbols.reserve(count);
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t pos = payload_pos + i * ns_ - origin_;
            frame.payload.symbols.push_back(modem_.demodulate_symbol(buf_.data() + pos).symbol);
        }
        frame.frame_start = *p.preamble - delim_len_;
        frame.correlation = p.correlation;
        frame.sync_score = p.sync_score;
        out.push_back(std::move(frame));
        ++stats_.frames_decoded;

        pending_.reset();
        skip_run_ = 0;  // a completed frame breaks any loss run
        run_counted_ = false;
        scan_pos_ = frame_end;
        discard_to(frame_end);
        return true;
    }

    // A pending frame that cannot complete: count it and resume scanning
    // past its delimiter. Marking the run as counted keeps the frame body,
    // which the resumed scan will walk over, from counting a second time.
    bool drop_pending() {
        if (!run_counted_) ++stats_.frame_loss_events;
        run_counted_ = true;
        skip_run_ = delim_len_;
        const std::size_t resume = (pending_->t0 ? *pending_->t0 : pending_->exceed_pos) + delim_len_;
        pending_.reset();
        scan_pos_ = std::max(scan_pos_, resume);
        return true;
    }

    static constexpr double kSilenceEps = 1e-3;
    static constexpr std::size_t kCompactChunk = 1 << 14;

    Modem modem_;
    std::size_t ns_;
    std::size_t delim_len_;
    std::vector<double> buf_;
    std::size_t origin_ = 0;    // absolute stream index of buf_[0]
    std::size_t scan_pos_ = 0;  // next absolute position to correlate
    std::size_t fed_pos_ = 0;   // loss accounting has seen everything before this
    std::optional<Pending> pending_;
    std::size_t skip_run_ = 0;   // energetic dead samples in the current run
    std::size_t quiet_gap_ = 0;  // consecutive dead samples below the floor
    bool run_counted_ = false;   // current run already produced an event
    DecoderStats stats_;
};

struct DecodeResult {
    std::vector<DecodedFrame> frames;
    DecoderStats stats;
};

inline DecodeResult decode_audio(const AudioBuffer& audio, const ModemConfig& cfg) {
    StreamDecoder dec(cfg);
    DecodeResult out;
    out.frames = dec.push(audio.samples);
    auto tail = dec.flush();
    out.frames.insert(out.frames.end(), tail.begin(), tail.end());
    out.stats = dec.stats();
    return out;
}

}  // namespace chirppose
