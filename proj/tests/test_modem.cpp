#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "chirppose/modem.hpp"
#include "chirppose/pose.hpp"

using namespace chirppose;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double rms(const std::vector<double>& x) {
    double e = 0.0;
    for (double s : x) e += s * s;
    return std::sqrt(e / x.size());
}

// DFT magnitude at an arbitrary analysis frequency.
double tone_magnitude(const std::vector<double>& x, double freq_hz, int sample_rate) {
    std::complex<double> acc(0, 0);
    for (std::size_t n = 0; n < x.size(); ++n) {
        const double ang = 2.0 * dsp::kPi * freq_hz * static_cast<double>(n) / sample_rate;
        acc += x[n] * std::complex<double>(std::cos(ang), -std::sin(ang));
    }
    return std::abs(acc);
}

// Independent re-derivation of the conjugate reference up-chirp.
std::vector<std::complex<double>> reference_dechirp(const ModemConfig& cfg) {
    const int ns = cfg.samples_per_symbol();
    std::vector<std::complex<double>> ref(ns);
    double phase = 0.0;
    for (int n = 0; n < ns; ++n) {
        ref[n] = std::complex<double>(std::cos(phase), -std::sin(phase));
        const double f = cfg.band_low_hz + (cfg.band_high_hz - cfg.band_low_hz) * (static_cast<double>(n) / ns);
        phase += 2.0 * dsp::kPi * f / cfg.sample_rate;
    }
    return ref;
}

void add_awgn(std::vector<double>& x, double snr_db, std::mt19937& rng, double signal_power = 0.8 * 0.8 / 2.0) {
    const double sigma = std::sqrt(signal_power / std::pow(10.0, snr_db / 10.0));
    std::normal_distribution<double> noise(0.0, sigma);
    for (double& s : x) s += noise(rng);
}

std::vector<std::uint8_t> random_symbols(std::size_t n, std::mt19937& rng) {
    std::uniform_int_distribution<int> d(0, 15);
    std::vector<std::uint8_t> out(n);
    for (auto& s : out) s = static_cast<std::uint8_t>(d(rng));
    return out;
}

std::vector<double> silence(std::size_t n) { return std::vector<double>(n, 0.0); }

void append(std::vector<double>& dst, const std::vector<double>& src) {
    dst.insert(dst.end(), src.begin(), src.end());
}

void append_frames(std::vector<DecodedFrame>& dst, std::vector<DecodedFrame> src) {
    for (auto& f : src) dst.push_back(std::move(f));
}

FramePayload random_payload(FrameType t, std::mt19937& rng) {
    FramePayload p;
    p.frame_type = t;
    p.symbols = random_symbols(static_cast<std::size_t>(payload_symbol_count(t)), rng);
    return p;
}

FramePayload complete_payload(std::mt19937& rng) { return random_payload(FrameType::Complete, rng); }

}  // namespace

TEST_CASE("modem config derives rates exactly") {
    ModemConfig cfg;
    CHECK(cfg.samples_per_symbol() == 32);
    CHECK(cfg.bits_per_symbol() == 4);
    CHECK(cfg.bit_rate() == 6000);

    CHECK(modem_preset_kbps(1.5).samples_per_symbol() == 128);
    CHECK(modem_preset_kbps(3.0).samples_per_symbol() == 64);
    CHECK(modem_preset_kbps(6.0).samples_per_symbol() == 32);
    CHECK(modem_preset_kbps(1.5).bit_rate() == 1500);
    CHECK(modem_preset_kbps(3.0).bit_rate() == 3000);
    CHECK(modem_preset_kbps(6.0).bit_rate() == 6000);
    CHECK_THROWS_AS(modem_preset_kbps(4.0), std::invalid_argument);
}

TEST_CASE("modem config validation rejects inconsistent parameters") {
    ModemConfig cfg;
    CHECK_NOTHROW(cfg.validate());

    ModemConfig bad = cfg;
    bad.symbol_rate = 1700;  // 48000 % 1700 != 0
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = cfg;
    bad.modulation_order = 12;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = cfg;
    bad.band_high_hz = 30000.0;  // violates Nyquist at 48 kHz
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = cfg;
    bad.delimiter_freq_hz = 5000.0;  // inside the chirp band
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = cfg;
    bad.detection_threshold = 1.5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = cfg;
    bad.amplitude = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("chirp symbols keep a constant envelope") {
    Modem m(ModemConfig{});
    for (int v = 0; v < 16; ++v) {
        const auto wave = m.modulate_css({static_cast<std::uint8_t>(v)});
        REQUIRE(wave.size() == 32);
        CHECK_THAT(rms(wave), WithinRel(0.8 / std::sqrt(2.0), 0.01));
        // Peak stays near the nominal amplitude and inside the PCM range.
        for (double s : wave) CHECK(std::abs(s) <= 0.85);
    }
    CHECK_THROWS_AS(m.modulate_css({16}), std::domain_error);
}

TEST_CASE("fsk symbols are tones spread across the band") {
    // Longer symbols sharpen the spectral check.
    Modem m(modem_preset_kbps(1.5));
    const int fs = m.config().sample_rate;
    for (int v : {0, 5, 10, 15}) {
        const auto wave = m.modulate_fsk({static_cast<std::uint8_t>(v)});
        const double expected = 4000.0 + 800.0 * v;
        const double on = tone_magnitude(wave, expected, fs);
        CHECK(on > 5.0 * tone_magnitude(wave, expected + 800.0 * (v < 15 ? 1 : -1), fs));
        CHECK(on > 5.0 * tone_magnitude(wave, 2000.0, fs));
    }
}

TEST_CASE("both schemes round-trip every symbol value cleanly") {
    for (double kbps : {1.5, 3.0, 6.0}) {
        for (auto scheme : {ModemConfig::Scheme::Css, ModemConfig::Scheme::Fsk}) {
            ModemConfig cfg = modem_preset_kbps(kbps);
            cfg.scheme = scheme;
            Modem m(cfg);
            for (int v = 0; v < 16; ++v) {
                const auto wave = m.modulate({static_cast<std::uint8_t>(v)});
                const auto r = m.demodulate_symbol(wave.data());
                INFO("kbps=" << kbps << " scheme=" << (scheme == ModemConfig::Scheme::Css ? "css" : "fsk")
                             << " symbol=" << v);
                CHECK(r.symbol == v);
                CHECK(r.magnitude > 1.0);
            }
        }
    }
}

TEST_CASE("all-zero input demodulates deterministically with zero magnitude") {
    Modem m(ModemConfig{});
    const std::vector<double> zeros(32, 0.0);
    const auto r = m.demodulate_symbol(zeros.data());
    CHECK(r.symbol == 0);
    CHECK_THAT(r.magnitude, WithinAbs(0.0, 1e-12));
}

TEST_CASE("chirp demodulation survives 10 dB noise") {
    Modem m(ModemConfig{});
    std::mt19937 rng(1234);
    int correct = 0;
    const int trials = 1000;
    for (int t = 0; t < trials; ++t) {
        auto wave = m.modulate_css({3});
        add_awgn(wave, 10.0, rng);
        if (m.demodulate_symbol(wave.data()).symbol == 3) ++correct;
    }
    CHECK(correct >= static_cast<int>(0.99 * trials));
}

TEST_CASE("frame layout matches the symbol arithmetic") {
    Modem m(ModemConfig{});
    std::mt19937 rng(7);

    const auto payload = complete_payload(rng);
    const auto frame = m.build_frame(payload);
    CHECK(frame.samples.size() == 4322);  // 610 + (3 + 1 + 112) * 32
    CHECK(frame.sample_rate == 48000);
    CHECK(m.frame_samples(FrameType::Complete) == 4322);
    CHECK(m.frame_samples(FrameType::Displacement) == 610 + (3 + 1 + 48) * 32);
    CHECK(m.frame_samples(FrameType::OneHand) == 610 + (3 + 1 + 71) * 32);
    CHECK(m.frame_samples(FrameType::JustBody) == 610 + (3 + 1 + 28) * 32);

    // Complete frames at the top rate sustain 10-13 poses per second.
    const double poses_per_s = 48000.0 / static_cast<double>(m.frame_samples(FrameType::Complete));
    CHECK(poses_per_s >= 10.0);
    CHECK(poses_per_s <= 13.0);

    FramePayload wrong = payload;
    wrong.symbols.pop_back();
    CHECK_THROWS_AS(m.build_frame(wrong), std::invalid_argument);
}

TEST_CASE("header symbols encode the frame type") {
    CHECK(header_symbol_for(FrameType::Complete) == 0);
    CHECK(header_symbol_for(FrameType::Displacement) == 5);
    CHECK(header_symbol_for(FrameType::OneHand) == 10);
    CHECK(header_symbol_for(FrameType::JustBody) == 15);

    Modem m(ModemConfig{});
    FramePayload p;
    p.frame_type = FrameType::JustBody;
    p.symbols.assign(static_cast<std::size_t>(payload_symbol_count(FrameType::JustBody)), 0);
    const auto frame = m.build_frame(p);
    const std::size_t header_pos = 610 + 3 * 32;
    CHECK(m.demodulate_symbol(frame.samples.data() + header_pos).symbol == 15);
}

TEST_CASE("corrupted headers snap to the nearest type on the symbol cycle") {
    // Codepoints 0/5/10/15 on a 16-cycle; no 16-ary symbol ties between two
    // codepoints, so every value maps to a definite type.
    const FrameType expected[16] = {
        FrameType::Complete,     FrameType::Complete,     FrameType::Complete,      // 0 1 2
        FrameType::Displacement, FrameType::Displacement, FrameType::Displacement,  // 3 4 5
        FrameType::Displacement, FrameType::Displacement,                           // 6 7
        FrameType::OneHand,      FrameType::OneHand,      FrameType::OneHand,       // 8 9 10
        FrameType::OneHand,      FrameType::OneHand,                                // 11 12
        FrameType::JustBody,     FrameType::JustBody,     FrameType::JustBody};     // 13 14 15
    for (int s = 0; s < 16; ++s) {
        const auto t = frame_type_from_header(s);
        REQUIRE(t.has_value());
        CHECK(*t == expected[s]);
    }
}

TEST_CASE("delimiter is a one kilohertz burst") {
    Modem m(ModemConfig{});
    const auto& d = m.delimiter();
    REQUIRE(d.size() == 610);
    const double on = tone_magnitude(d, 1000.0, 48000);
    CHECK(on > 5.0 * tone_magnitude(d, 500.0, 48000));
    CHECK(on > 5.0 * tone_magnitude(d, 2000.0, 48000));
    CHECK(on > 5.0 * tone_magnitude(d, 4000.0, 48000));
}

TEST_CASE("matched filter locates a clean delimiter exactly") {
    Modem m(ModemConfig{});
    std::mt19937 rng(11);
    auto stream = silence(1000);
    append(stream, m.build_frame(complete_payload(rng)).samples);
    append(stream, silence(800));

    const auto hit = m.matched_filter_detect(stream);
    REQUIRE(hit.has_value());
    CHECK(hit->coarse_start == 1000);
    CHECK(hit->correlation > 0.99);

    CHECK_FALSE(m.matched_filter_detect(silence(4000)).has_value());
    CHECK_FALSE(m.matched_filter_detect(stream, 2000).has_value());
}

TEST_CASE("fine sync recovers every deliberate misalignment exactly") {
    Modem m(ModemConfig{});
    std::mt19937 rng(21);
    // JustBody keeps the header chirp distinct from the preamble chirps, so
    // the score peak is unique across the whole window.
    auto stream = silence(1000);
    append(stream, m.build_frame(random_payload(FrameType::JustBody, rng)).samples);
    append(stream, silence(400));

    const int ns = m.config().samples_per_symbol();
    for (int o = -ns; o <= ns; ++o) {
        // A coarse estimate off by o must be corrected by exactly -o.
        const auto fine = m.fine_sync(stream, static_cast<std::size_t>(1000 + o));
        REQUIRE(fine.has_value());
        INFO("offset " << o);
        CHECK(fine->fine_offset == -o);
    }
}

TEST_CASE("frames shifted against the coarse estimate sync exactly") {
    Modem m(ModemConfig{});
    std::mt19937 rng(22);
    for (int o : {0, 7}) {
        auto stream = silence(static_cast<std::size_t>(1000 + o));
        append(stream, m.build_frame(random_payload(FrameType::JustBody, rng)).samples);
        append(stream, silence(200));
        const auto fine = m.fine_sync(stream, 1000);
        REQUIRE(fine.has_value());
        CHECK(fine->fine_offset == o);
    }
}

TEST_CASE("fine sync score dominates away from the peak") {
    ModemConfig cfg;
    Modem m(cfg);
    std::mt19937 rng(23);
    const int o = 7;
    auto stream = silence(static_cast<std::size_t>(1000 + o));
    append(stream, m.build_frame(random_payload(FrameType::JustBody, rng)).samples);
    append(stream, silence(200));

    // Re-derive S(k) independently of the modem internals.
    const auto ref = reference_dechirp(cfg);
    const int ns = cfg.samples_per_symbol();
    const std::size_t base = 1000 + 610;
    std::vector<double> score;
    for (int k = -ns; k <= ns; ++k) {
        double s = 0.0;
        for (int mm = 0; mm < 3; ++mm) {
            std::complex<double> acc(0, 0);
            for (int n = 0; n < ns; ++n) {
                const auto idx = static_cast<std::size_t>(static_cast<long long>(base) + k + mm * ns + n);
                acc += stream[idx] * ref[n];
            }
            s += std::abs(acc);
        }
        score.push_back(s);
    }

    const auto fine = m.fine_sync(stream, 1000);
    REQUIRE(fine.has_value());
    REQUIRE(fine->fine_offset == o);
    const std::size_t peak_idx = static_cast<std::size_t>(o + ns);
    CHECK_THAT(fine->score, WithinRel(score[peak_idx], 1e-9));
    for (std::size_t i = 0; i < score.size(); ++i) {
        const int k = static_cast<int>(i) - ns;
        if (std::abs(k - o) < 2) continue;
        INFO("k=" << k);
        CHECK(score[peak_idx] > score[i]);
    }
}

TEST_CASE("fine sync reports insufficient data and handles silence") {
    Modem m(ModemConfig{});
    CHECK_FALSE(m.fine_sync(silence(700), 500).has_value());  // preamble window runs past the end
    const auto quiet = m.fine_sync(silence(4000), 1000);
    REQUIRE(quiet.has_value());
    CHECK(quiet->fine_offset == 0);  // all-zero scores tie toward zero offset
    CHECK_THAT(quiet->score, WithinAbs(0.0, 1e-12));
}

TEST_CASE("noisy detection lands within two samples") {
    Modem m(ModemConfig{});
    std::mt19937 rng(333);
    const int trials = 200;
    int good = 0;
    for (int t = 0; t < trials; ++t) {
        auto stream = silence(1000);
        append(stream, m.build_frame(complete_payload(rng)).samples);
        append(stream, silence(300));
        add_awgn(stream, 20.0, rng);

        const auto hit = m.matched_filter_detect(stream);
        if (!hit) continue;
        const auto fine = m.fine_sync(stream, hit->coarse_start);
        if (!fine) continue;
        const long long refined = static_cast<long long>(hit->coarse_start) + fine->fine_offset;
        if (std::llabs(refined - 1000) <= 2) ++good;
    }
    CHECK(good >= static_cast<int>(0.95 * trials));
}

TEST_CASE("stream decoder recovers a padded frame and its position") {
    ModemConfig cfg;
    Modem m(cfg);
    std::mt19937 rng(5);
    const auto payload = complete_payload(rng);

    AudioBuffer audio;
    audio.samples = silence(1000);
    append(audio.samples, m.build_frame(payload).samples);
    append(audio.samples, silence(1200));

    const auto result = decode_audio(audio, cfg);
    REQUIRE(result.frames.size() == 1);
    CHECK(result.frames[0].frame_start == 1000);
    CHECK(result.frames[0].payload.frame_type == FrameType::Complete);
    CHECK(result.frames[0].payload.symbols == payload.symbols);
    CHECK(result.stats.frames_decoded == 1);
    CHECK(result.stats.frame_loss_events == 0);
}

TEST_CASE("stream decoder handles back-to-back frames of mixed types") {
    ModemConfig cfg;
    Modem m(cfg);
    std::mt19937 rng(6);

    std::vector<FramePayload> sent;
    for (FrameType t : {FrameType::Complete, FrameType::JustBody, FrameType::OneHand})
        sent.push_back(random_payload(t, rng));

    AudioBuffer audio;
    audio.sample_rate = cfg.sample_rate;
    for (const auto& p : sent) append(audio.samples, m.build_frame(p).samples);

    const auto result = decode_audio(audio, cfg);
    REQUIRE(result.frames.size() == 3);
    std::size_t expect_start = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(result.frames[i].payload.frame_type == sent[i].frame_type);
        CHECK(result.frames[i].payload.symbols == sent[i].symbols);
        CHECK(result.frames[i].frame_start == expect_start);
        expect_start += m.frame_samples(sent[i].frame_type);
    }
    CHECK(result.stats.frame_loss_events == 0);
}

TEST_CASE("one-sample pushes decode identically to a single shot") {
    ModemConfig cfg;
    Modem m(cfg);
    std::mt19937 rng(8);

    std::vector<double> stream = silence(700);
    append(stream, m.build_frame(complete_payload(rng)).samples);
    append(stream, silence(150));

    AudioBuffer whole;
    whole.samples = stream;
    const auto single = decode_audio(whole, cfg);
    REQUIRE(single.frames.size() == 1);

    StreamDecoder dec(cfg);
    std::vector<DecodedFrame> chunked;
    for (double s : stream) append_frames(chunked, dec.push(&s, 1));
    append_frames(chunked, dec.flush());

    REQUIRE(single.frames.size() == chunked.size());
    for (std::size_t i = 0; i < chunked.size(); ++i) {
        CHECK(chunked[i].payload.frame_type == single.frames[i].payload.frame_type);
        CHECK(chunked[i].payload.symbols == single.frames[i].payload.symbols);
        CHECK(chunked[i].frame_start == single.frames[i].frame_start);
    }
    CHECK(dec.stats().frames_decoded == single.stats.frames_decoded);
    CHECK(dec.stats().frame_loss_events == single.stats.frame_loss_events);
}

TEST_CASE("random chunk partitions decode identically") {
    ModemConfig cfg;
    Modem m(cfg);
    std::mt19937 rng(9);

    std::vector<double> stream = silence(350);
    for (int i = 0; i < 3; ++i) {
        append(stream, m.build_frame(complete_payload(rng)).samples);
        append(stream, silence(static_cast<std::size_t>(90 * i)));
    }
    add_awgn(stream, 25.0, rng);

    AudioBuffer whole;
    whole.samples = stream;
    const auto single = decode_audio(whole, cfg);
    REQUIRE(single.frames.size() == 3);

    std::mt19937 part_rng(10);
    for (int rep = 0; rep < 5; ++rep) {
        StreamDecoder dec(cfg);
        std::vector<DecodedFrame> frames;
        std::size_t pos = 0;
        std::uniform_int_distribution<std::size_t> len(1, 997);
        while (pos < stream.size()) {
            const std::size_t n = std::min(len(part_rng), stream.size() - pos);
            append_frames(frames, dec.push(stream.data() + pos, n));
            pos += n;
        }
        append_frames(frames, dec.flush());

        REQUIRE(frames.size() == single.frames.size());
        for (std::size_t i = 0; i < frames.size(); ++i) {
            CHECK(frames[i].payload.symbols == single.frames[i].payload.symbols);
            CHECK(frames[i].frame_start == single.frames[i].frame_start);
        }
        CHECK(dec.stats().frames_decoded == single.stats.frames_decoded);
        CHECK(dec.stats().frame_loss_events == single.stats.frame_loss_events);
    }
}

TEST_CASE("a zeroed delimiter costs the frame and is counted once") {
    ModemConfig cfg;
    Modem m(cfg);
    std::mt19937 rng(12);

    const auto lost = complete_payload(rng);
    const auto kept = complete_payload(rng);

    auto broken = m.build_frame(lost).samples;
    std::fill(broken.begin(), broken.begin() + 610, 0.0);

    SECTION("alone in the stream") {
        StreamDecoder dec(cfg);
        auto frames = dec.push(broken);
        append_frames(frames, dec.flush());
        CHECK(frames.empty());
        CHECK(dec.stats().frames_decoded == 0);
        CHECK(dec.stats().frame_loss_events == 1);
    }

    SECTION("followed by an intact frame") {
        std::vector<double> stream = broken;
        append(stream, m.build_frame(kept).samples);
        StreamDecoder dec(cfg);
        auto frames = dec.push(stream);
        append_frames(frames, dec.flush());
        REQUIRE(frames.size() == 1);
        CHECK(frames[0].payload.symbols == kept.symbols);
        CHECK(frames[0].frame_start == m.frame_samples(FrameType::Complete));
        CHECK(dec.stats().frame_loss_events == 1);
    }
}

TEST_CASE("a truncated frame surfaces as a loss event on flush") {
    ModemConfig cfg;
    Modem m(cfg);
    std::mt19937 rng(13);

    auto stream = m.build_frame(complete_payload(rng)).samples;
    stream.resize(stream.size() / 2);  // cut mid-payload

    StreamDecoder dec(cfg);
    auto frames = dec.push(stream);
    CHECK(frames.empty());
    append_frames(frames, dec.flush());
    CHECK(frames.empty());
    CHECK(dec.stats().frames_decoded == 0);
    CHECK(dec.stats().frame_loss_events == 1);
}

TEST_CASE("pure silence produces nothing") {
    ModemConfig cfg;
    StreamDecoder dec(cfg);
    auto frames = dec.push(silence(20000));
    append_frames(frames, dec.flush());
    CHECK(frames.empty());
    CHECK(dec.stats().frames_decoded == 0);
    CHECK(dec.stats().frame_loss_events == 0);
}

TEST_CASE("a corrupted header reframes as the nearest type") {
    ModemConfig cfg;
    Modem m(cfg);
    std::mt19937 rng(14);

    auto stream = m.build_frame(complete_payload(rng)).samples;
    // Overwrite the header chirp (symbol 0) with symbol 9: nearest codepoint
    // is 10, so the decoder reads a shorter one-hand payload instead.
    const auto sym9 = m.modulate_css({9});
    std::copy(sym9.begin(), sym9.end(), stream.begin() + 610 + 3 * 32);
    append(stream, silence(700));

    StreamDecoder dec(cfg);
    auto frames = dec.push(stream);
    append_frames(frames, dec.flush());
    REQUIRE(frames.size() == 1);
    CHECK(frames[0].payload.frame_type == FrameType::OneHand);
    CHECK(frames[0].payload.symbols.size() == 71);
    // The unread payload tail is an energetic dead run longer than a
    // delimiter, so it registers as one loss event.
    CHECK(dec.stats().frame_loss_events == 1);
}

TEST_CASE("symbol error rate counts mismatches and length differences") {
    std::vector<std::uint8_t> sent(112);
    for (std::size_t i = 0; i < sent.size(); ++i) sent[i] = static_cast<std::uint8_t>(i % 16);

    CHECK_THAT(ser(sent, sent), WithinAbs(0.0, 0.0));

    auto flipped = sent;
    flipped[10] = static_cast<std::uint8_t>((flipped[10] + 1) % 16);
    CHECK_THAT(ser(sent, flipped), WithinRel(1.0 / 112.0, 1e-12));

    auto truncated = sent;
    truncated.resize(100);
    CHECK_THAT(ser(sent, truncated), WithinRel(12.0 / 112.0, 1e-12));

    auto longer = sent;
    longer.push_back(3);
    CHECK_THAT(ser(sent, longer), WithinRel(1.0 / 113.0, 1e-12));

    CHECK_THROWS_AS(ser({}, {}), std::invalid_argument);
}

TEST_CASE("pose payloads survive the full acoustic path") {
    FullPose pose;
    pose.t_ms = 0;
    for (int i = 0; i < 33; ++i)
        pose.body[i] = Keypoint{0.2 + 0.5 * i / 32.0, 0.3 + 0.4 * i / 32.0, true};
    for (int i = 0; i < 21; ++i) {
        pose.left_hand[i] = Keypoint{0.2 + 0.004 * i, 0.61 + 0.005 * i, true};
        pose.right_hand[i] = Keypoint{0.7 + 0.004 * i, 0.62 + 0.005 * i, true};
    }

    PoseEncoder enc;
    const auto encoded = enc.encode(pose);
    REQUIRE(encoded.payload.frame_type == FrameType::Complete);

    ModemConfig cfg;
    Modem m(cfg);
    AudioBuffer audio;
    audio.samples = silence(480);
    append(audio.samples, m.build_frame(encoded.payload).samples);
    append(audio.samples, silence(480));

    const auto result = decode_audio(audio, cfg);
    REQUIRE(result.frames.size() == 1);

    const auto unpacked = unpack_payload(result.frames[0].payload);
    REQUIRE(std::holds_alternative<QuantizedPose>(unpacked));
    const auto& q = std::get<QuantizedPose>(unpacked);
    CHECK(q.shape == FrameType::Complete);
    CHECK(q.values == encoded.pose.values);
}
