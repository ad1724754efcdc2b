// Command line front end: pose corpora, audio framing, channel simulation,
// model training, rendering, and the end-to-end pipeline. Every subcommand
// accepts --config FILE (JSON, keys matching the long flag names); explicit
// flags override config values, which override built-in defaults.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "chirppose/harness.hpp"

namespace {

using namespace chirppose;
namespace fs = std::filesystem;

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in.good()) throw std::runtime_error("cannot open " + path);
    json j;
    in >> j;
    return j;
}

// Pulled out of argv before CLI11 parsing so config values can seed the
// option defaults; flags given on the command line still win.
json scan_config(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc) return load_json_file(argv[i + 1]);
        if (arg.rfind("--config=", 0) == 0) return load_json_file(arg.substr(9));
    }
    return json::object();
}

template <typename T>
void fallback(std::optional<T>& v, const json& cfg, const char* key) {
    if (!v && cfg.contains(key)) v = cfg.at(key).get<T>();
}

template <typename T>
T need(const std::optional<T>& v, const char* what) {
    if (!v) throw std::runtime_error(std::string(what) + " is required (flag or config key)");
    return *v;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    if (const auto dir = fs::path(path).parent_path(); !dir.empty()) fs::create_directories(dir);
    std::ofstream out(path, std::ios::binary);
    if (!out.good()) throw std::runtime_error("cannot write " + path);
    out << text;
}

void write_report(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

// --- modem flags ---------------------------------------------------------------

struct ModemFlags {
    std::optional<double> rate_kbps;
    std::optional<std::string> scheme;
    std::optional<int> sample_rate, modulation_order, symbol_rate, delimiter_samples, preamble_symbols;
    std::optional<double> band_low_hz, band_high_hz, delimiter_freq_hz, detection_threshold, amplitude;
};

void add_modem_flags(CLI::App* sub, ModemFlags& f) {
    sub->add_option("--rate-kbps", f.rate_kbps, "payload rate preset: 1.5, 3 or 6 kbit/s");
    sub->add_option("--scheme", f.scheme, "modulation scheme: css or fsk");
    sub->add_option("--sample-rate", f.sample_rate, "audio sample rate in Hz");
    sub->add_option("--modulation-order", f.modulation_order, "symbols alphabet size M");
    sub->add_option("--symbol-rate", f.symbol_rate, "symbols per second");
    sub->add_option("--band-low-hz", f.band_low_hz, "chirp band lower edge");
    sub->add_option("--band-high-hz", f.band_high_hz, "chirp band upper edge");
    sub->add_option("--delimiter-freq-hz", f.delimiter_freq_hz, "frame delimiter tone frequency");
    sub->add_option("--delimiter-samples", f.delimiter_samples, "frame delimiter length in samples");
    sub->add_option("--preamble-symbols", f.preamble_symbols, "sync preamble chirp count");
    sub->add_option("--detection-threshold", f.detection_threshold, "matched filter threshold in [0,1]");
    sub->add_option("--amplitude", f.amplitude, "transmit amplitude");
}

void fill_modem(ModemFlags& f, const json& cfg) {
    fallback(f.rate_kbps, cfg, "rate-kbps");
    fallback(f.scheme, cfg, "scheme");
    fallback(f.sample_rate, cfg, "sample-rate");
    fallback(f.modulation_order, cfg, "modulation-order");
    fallback(f.symbol_rate, cfg, "symbol-rate");
    fallback(f.band_low_hz, cfg, "band-low-hz");
    fallback(f.band_high_hz, cfg, "band-high-hz");
    fallback(f.delimiter_freq_hz, cfg, "delimiter-freq-hz");
    fallback(f.delimiter_samples, cfg, "delimiter-samples");
    fallback(f.preamble_symbols, cfg, "preamble-symbols");
    fallback(f.detection_threshold, cfg, "detection-threshold");
    fallback(f.amplitude, cfg, "amplitude");
}

ModemConfig::Scheme parse_scheme(const std::string& s) {
    if (s == "css") return ModemConfig::Scheme::Css;
    if (s == "fsk") return ModemConfig::Scheme::Fsk;
    throw std::runtime_error("unknown scheme '" + s + "' (expected css or fsk)");
}

// apply_preset=false leaves rate handling to the caller (the pipeline applies
// its own preset on top of the base config).
ModemConfig build_modem(const ModemFlags& f, bool apply_preset = true) {
    ModemConfig cfg;
    if (apply_preset && f.rate_kbps) cfg = modem_preset_kbps(*f.rate_kbps, cfg);
    if (f.scheme) cfg.scheme = parse_scheme(*f.scheme);
    if (f.sample_rate) cfg.sample_rate = *f.sample_rate;
    if (f.modulation_order) cfg.modulation_order = *f.modulation_order;
    if (f.symbol_rate) cfg.symbol_rate = *f.symbol_rate;
    if (f.band_low_hz) cfg.band_low_hz = *f.band_low_hz;
    if (f.band_high_hz) cfg.band_high_hz = *f.band_high_hz;
    if (f.delimiter_freq_hz) cfg.delimiter_freq_hz = *f.delimiter_freq_hz;
    if (f.delimiter_samples) cfg.delimiter_samples = *f.delimiter_samples;
    if (f.preamble_symbols) cfg.preamble_symbols = *f.preamble_symbols;
    if (f.detection_threshold) cfg.detection_threshold = *f.detection_threshold;
    if (f.amplitude) cfg.amplitude = *f.amplitude;
    return cfg;
}

// --- channel flags -------------------------------------------------------------

struct ChannelFlags {
    std::optional<std::string> codec, schedule_file, conceal, external_cmd;
    std::optional<double> frame_ms, bitrate_kbps, loss_prob, segment_ms, snr_db, gain;
    std::optional<std::uint64_t> seed;
};

void add_channel_flags(CLI::App* sub, ChannelFlags& f) {
    sub->add_option("--codec", f.codec, "codec mode: identity, emulated or external");
    sub->add_option("--codec-frame-ms", f.frame_ms, "codec frame size in ms");
    sub->add_option("--codec-bitrate-kbps", f.bitrate_kbps, "codec bitrate in kbit/s");
    sub->add_option("--schedule", f.schedule_file, "JSON file with a list of codec segments");
    sub->add_option("--loss-prob", f.loss_prob, "network segment loss probability");
    sub->add_option("--loss-segment-ms", f.segment_ms, "network loss granularity in ms");
    sub->add_option("--conceal", f.conceal, "loss concealment: zero or repeat");
    sub->add_option("--snr-db", f.snr_db, "additive white noise SNR after the codec");
    sub->add_option("--gain", f.gain, "output gain");
    sub->add_option("--external-cmd", f.external_cmd,
                    "external codec command with {in} and {out} placeholders");
}

void fill_channel(ChannelFlags& f, const json& cfg) {
    fallback(f.codec, cfg, "codec");
    fallback(f.frame_ms, cfg, "codec-frame-ms");
    fallback(f.bitrate_kbps, cfg, "codec-bitrate-kbps");
    fallback(f.schedule_file, cfg, "schedule");
    fallback(f.loss_prob, cfg, "loss-prob");
    fallback(f.segment_ms, cfg, "loss-segment-ms");
    fallback(f.conceal, cfg, "conceal");
    fallback(f.snr_db, cfg, "snr-db");
    fallback(f.gain, cfg, "gain");
    fallback(f.external_cmd, cfg, "external-cmd");
    fallback(f.seed, cfg, "seed");
}

CodecSchedule parse_schedule(const std::string& path) {
    const json j = load_json_file(path);
    if (!j.is_array() || j.empty())
        throw std::runtime_error("schedule file must be a non-empty JSON array of segments");
    CodecSchedule sched;
    sched.segments.clear();
    for (const auto& seg : j) {
        CodecSegment s;
        s.duration_ms = seg.value("duration_ms", s.duration_ms);
        s.frame_ms = seg.value("frame_ms", s.frame_ms);
        s.bitrate_kbps = seg.value("bitrate_kbps", s.bitrate_kbps);
        sched.segments.push_back(s);
    }
    return sched;
}

ChannelConfig build_channel(const ChannelFlags& f) {
    ChannelConfig cfg;
    if (f.codec) {
        if (*f.codec == "identity") cfg.codec_mode = ChannelConfig::CodecMode::Identity;
        else if (*f.codec == "emulated") cfg.codec_mode = ChannelConfig::CodecMode::Emulated;
        else if (*f.codec == "external") cfg.codec_mode = ChannelConfig::CodecMode::External;
        else throw std::runtime_error("unknown codec mode '" + *f.codec + "'");
    } else if (f.external_cmd) {
        cfg.codec_mode = ChannelConfig::CodecMode::External;
    }
    if (f.schedule_file) {
        cfg.schedule = parse_schedule(*f.schedule_file);
    } else if (f.frame_ms || f.bitrate_kbps) {
        CodecSegment s;
        if (f.frame_ms) s.frame_ms = *f.frame_ms;
        if (f.bitrate_kbps) s.bitrate_kbps = *f.bitrate_kbps;
        cfg.schedule.segments = {s};
    }
    if (f.external_cmd) cfg.external_command = *f.external_cmd;
    if (f.loss_prob) cfg.network.loss_prob = *f.loss_prob;
    if (f.segment_ms) cfg.network.segment_ms = *f.segment_ms;
    if (f.conceal) {
        if (*f.conceal == "zero") cfg.network.concealment = NetworkModel::Concealment::Zero;
        else if (*f.conceal == "repeat") cfg.network.concealment = NetworkModel::Concealment::RepeatLast;
        else throw std::runtime_error("unknown concealment '" + *f.conceal + "' (expected zero or repeat)");
    }
    if (f.seed) cfg.network.seed = *f.seed;
    if (f.snr_db) cfg.post_snr_db = *f.snr_db;
    if (f.gain) cfg.gain = *f.gain;
    return cfg;
}

// --- training helpers ----------------------------------------------------------

struct TrainFlags {
    std::optional<int> epochs, batch;
    std::optional<double> lr;
    std::optional<std::uint64_t> seed;
    std::optional<double> split;
};

void add_train_flags(CLI::App* sub, TrainFlags& f) {
    sub->add_option("--epochs", f.epochs, "training epochs");
    sub->add_option("--batch", f.batch, "mini-batch size");
    sub->add_option("--lr", f.lr, "Adam learning rate");
    sub->add_option("--seed", f.seed, "training seed");
    sub->add_option("--split", f.split, "training fraction of the corpus");
}

void fill_train(TrainFlags& f, const json& cfg) {
    fallback(f.epochs, cfg, "epochs");
    fallback(f.batch, cfg, "batch");
    fallback(f.lr, cfg, "lr");
    fallback(f.seed, cfg, "seed");
    fallback(f.split, cfg, "split");
}

TrainConfig build_train(const TrainFlags& f, int default_epochs) {
    TrainConfig tc;
    tc.epochs = f.epochs.value_or(default_epochs);
    if (f.batch) tc.batch_size = *f.batch;
    if (f.lr) tc.learning_rate = *f.lr;
    if (f.seed) tc.seed = *f.seed;
    return tc;
}

json metrics_json(const PredictionMetrics& m) {
    json j{{"mse_px2", m.mse_px2}, {"mae_px", m.mae_px}, {"coordinates", m.coordinates}};
    j["r2"] = m.r2 ? json(*m.r2) : json();
    return j;
}

json classification_json(const ClassificationMetrics& m) {
    json j{{"accuracy", m.accuracy},
           {"true_positives", m.tp},
           {"true_negatives", m.tn},
           {"false_positives", m.fp},
           {"false_negatives", m.fn}};
    j["precision"] = m.precision ? json(*m.precision) : json();
    j["recall"] = m.recall ? json(*m.recall) : json();
    j["f1"] = m.f1 ? json(*m.f1) : json();
    return j;
}

std::string default_report_path(const std::string& model_path) {
    return fs::path(model_path).replace_extension(".metrics.json").string();
}

// Evaluates one hand's model, interpolation, and regression on a test split.
json hand_eval_json(const Dataset& train_set, const Dataset& test_set, const PredictorModel* model,
                    Hand side, int width, int height) {
    std::vector<std::vector<double>> interp, lin, mlp;
    interp.reserve(test_set.inputs.size());
    const auto reg = fit_linear_regression(train_set);
    for (const auto& x : test_set.inputs) {
        interp.push_back(interpolate_hand_vector(x));
        auto y = predict_linear(reg, x);
        for (auto& v : y) v = std::clamp(v, 0.0, 1.0);
        lin.push_back(std::move(y));
        if (model) mlp.push_back(predict_hand_vector(x, *model, side));
    }
    json j;
    j["test_samples"] = test_set.inputs.size();
    j["interpolation"] = metrics_json(prediction_metrics(interp, test_set.targets, width, height));
    j["regression"] = metrics_json(prediction_metrics(lin, test_set.targets, width, height));
    if (model) j["model"] = metrics_json(prediction_metrics(mlp, test_set.targets, width, height));
    return j;
}

// --- subcommands ---------------------------------------------------------------

int run_encode(const ModemFlags& mf, const std::string& in, const std::string& out, int pad,
               int delta_threshold) {
    const auto poses = read_pose_jsonl(in);
    const ModemConfig cfg = build_modem(mf);
    const Modem modem(cfg);
    PoseEncoder encoder(delta_threshold);

    AudioBuffer tx;
    tx.sample_rate = cfg.sample_rate;
    tx.samples.assign(static_cast<std::size_t>(pad), 0.0);
    std::size_t symbols = 0;
    for (const auto& pose : poses) {
        const auto enc = encoder.encode(pose);
        symbols += enc.payload.symbols.size();
        const AudioBuffer frame = modem.build_frame(enc.payload);
        tx.samples.insert(tx.samples.end(), frame.samples.begin(), frame.samples.end());
    }
    tx.samples.insert(tx.samples.end(), static_cast<std::size_t>(pad), 0.0);
    write_wav(out, tx);
    std::cout << "encoded " << poses.size() << " poses, " << symbols << " symbols, "
              << static_cast<double>(tx.samples.size()) / cfg.sample_rate << " s -> " << out << "\n";
    return 0;
}

int run_decode(const ModemFlags& mf, const std::string& in, const std::string& out) {
    const AudioBuffer audio = read_wav(in);
    const ModemConfig cfg = build_modem(mf);
    const DecodeResult res = decode_audio(audio, cfg);

    PoseAssembler assembler;
    std::vector<FullPose> poses;
    std::size_t unreconstructed = 0;
    for (const auto& frame : res.frames) {
        const auto q = assembler.assemble(unpack_payload(frame.payload));
        if (!q) {
            ++unreconstructed;
            continue;
        }
        const auto t_ms = static_cast<std::int64_t>(
            std::llround(1000.0 * static_cast<double>(frame.frame_start) / cfg.sample_rate));
        poses.push_back(expand_keypoints(dequantize(*q), t_ms));
    }
    write_pose_jsonl(out, poses);
    std::cout << "decoded " << res.frames.size() << " frames (" << unreconstructed
              << " without reference, " << res.stats.frame_loss_events << " loss events) -> " << out
              << "\n";
    return 0;
}

int run_channel(const ChannelFlags& cf, const std::string& in, const std::string& out) {
    const AudioBuffer audio = read_wav(in);
    const AudioBuffer shaped = apply_channel(audio, build_channel(cf));
    write_wav(out, shaped);
    std::cout << "channel: " << audio.samples.size() << " samples -> " << out << "\n";
    return 0;
}

struct PipelineFlags {
    std::optional<std::string> poses, out_dir, predictor, detector;
    std::optional<int> width, height, pad;
    bool render = false;
};

int run_pipeline_cmd(const ModemFlags& mf, const ChannelFlags& cf, const PipelineFlags& pf) {
    PipelineConfig pc;
    pc.modem = build_modem(mf, false);
    if (mf.rate_kbps) pc.data_rate_kbps = *mf.rate_kbps;
    pc.channel = build_channel(cf);
    pc.input_pose_file = need(pf.poses, "--poses");
    if (pf.out_dir) pc.output_dir = *pf.out_dir;
    if (pf.predictor) pc.predictor_path = *pf.predictor;
    if (pf.detector) pc.detector_path = *pf.detector;
    pc.render_frames = pf.render;
    if (pf.width) pc.canvas_width = *pf.width;
    if (pf.height) pc.canvas_height = *pf.height;
    if (pf.pad) pc.pad_samples = *pf.pad;

    const MetricsReport report = run_pipeline(pc);
    std::cout << harness_detail::report_summary(report);
    return 0;
}

struct SweepFlags {
    std::optional<std::vector<double>> rates, frames, bitrates;
    std::optional<int> seeds;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    bool no_identity = false, no_fsk = false;
};

int run_sweep(const SweepFlags& f) {
    SweepConfig cfg;
    if (f.rates) cfg.rates_kbps = *f.rates;
    if (f.frames || f.bitrates) {
        const std::vector<double> fr = f.frames.value_or(std::vector<double>{60.0, 20.0, 10.0});
        const std::vector<double> br = f.bitrates.value_or(std::vector<double>{128.0, 64.0, 32.0});
        cfg.cells.clear();
        for (double a : fr)
            for (double b : br) cfg.cells.push_back({a, b});
    }
    if (f.seeds) cfg.seeds = *f.seeds;
    if (f.seed) cfg.payload_seed_base = *f.seed;
    cfg.include_identity = !f.no_identity;
    cfg.include_fsk = !f.no_fsk;
    write_text(f.out.value_or(""), sweep_csv(ser_sweep(cfg)));
    return 0;
}

int run_gen_corpus(const json& cfg, std::optional<std::string> out, std::optional<std::uint64_t> seed,
                   std::optional<int> frames, std::optional<int> interval,
                   std::optional<double> motion_step) {
    SyntheticCorpusConfig cc;
    cc.seed = cfg.value("seed", cc.seed);
    cc.n_frames = cfg.value("frames", cc.n_frames);
    cc.frame_interval_ms = cfg.value("interval-ms", cc.frame_interval_ms);
    cc.motion_step = cfg.value("motion-step", cc.motion_step);
    cc.shoulder_width = cfg.value("shoulder-width", cc.shoulder_width);
    cc.hip_width = cfg.value("hip-width", cc.hip_width);
    cc.neck_length = cfg.value("neck-length", cc.neck_length);
    cc.torso_length = cfg.value("torso-length", cc.torso_length);
    cc.upper_arm = cfg.value("upper-arm", cc.upper_arm);
    cc.forearm = cfg.value("forearm", cc.forearm);
    cc.palm_length = cfg.value("palm-length", cc.palm_length);
    cc.finger_segment = cfg.value("finger-segment", cc.finger_segment);
    cc.shoulder_min = cfg.value("shoulder-min", cc.shoulder_min);
    cc.shoulder_max = cfg.value("shoulder-max", cc.shoulder_max);
    cc.elbow_max = cfg.value("elbow-max", cc.elbow_max);
    cc.wrist_max = cfg.value("wrist-max", cc.wrist_max);
    cc.curl_max = cfg.value("curl-max", cc.curl_max);
    cc.tilt_min = cfg.value("tilt-min", cc.tilt_min);
    cc.tilt_max = cfg.value("tilt-max", cc.tilt_max);
    cc.tilt_axis_range = cfg.value("tilt-axis-range", cc.tilt_axis_range);
    if (seed) cc.seed = *seed;
    if (frames) cc.n_frames = *frames;
    if (interval) cc.frame_interval_ms = *interval;
    if (motion_step) cc.motion_step = *motion_step;

    const std::string path = need(out, "--out");
    generate_corpus_file(cc, path);
    std::cout << "wrote " << cc.n_frames << " poses -> " << path << "\n";
    return 0;
}

struct PredictorTrainFlags {
    std::optional<std::string> poses, out, report;
    std::optional<int> width, height;
    bool noise = false;
    std::optional<double> noise_mean_px, noise_std_px, noise_fraction;
};

int run_train_predictor(const PredictorTrainFlags& f, const TrainFlags& tf) {
    const auto poses = read_pose_jsonl(need(f.poses, "--poses"));
    const auto hd = build_hand_datasets(poses);
    const double split = tf.split.value_or(0.8);
    const auto [left_train, left_test] = split_dataset(hd.left, split);
    const auto [right_train, right_test] = split_dataset(hd.right, split);

    TrainConfig tc = build_train(tf, 120);
    NoiseParams np;
    np.mean_px = f.noise_mean_px.value_or(10.0);
    np.stddev_px = f.noise_std_px.value_or(4.0);
    np.canvas_width = f.width.value_or(1280);
    np.canvas_height = f.height.value_or(720);
    if (f.noise) tc.noise = noise_injection_from_params(np, f.noise_fraction.value_or(0.5));

    PredictorModel model = fit_predictor(left_train, right_train, tc);
    if (f.noise) {
        model.noise_mean_px = np.mean_px;
        model.noise_std_px = np.stddev_px;
    }
    const std::string model_path = need(f.out, "--out");
    save_predictor(model, model_path);

    json report;
    report["model"] = model_path;
    report["train"] = {{"epochs", tc.epochs},
                       {"learning_rate", tc.learning_rate},
                       {"batch_size", tc.batch_size},
                       {"seed", tc.seed},
                       {"split", split},
                       {"samples", {{"left", left_train.inputs.size()}, {"right", right_train.inputs.size()}}}};
    report["train"]["noise"] =
        f.noise ? json{{"mean_px", np.mean_px}, {"stddev_px", np.stddev_px},
                       {"sample_fraction", f.noise_fraction.value_or(0.5)}}
                : json();
    report["left"] = hand_eval_json(left_train, left_test, &model, Hand::Left, np.canvas_width,
                                    np.canvas_height);
    report["right"] = hand_eval_json(right_train, right_test, &model, Hand::Right, np.canvas_width,
                                     np.canvas_height);
    const std::string report_path = f.report.value_or(default_report_path(model_path));
    write_report(report_path, report);
    std::cout << "model -> " << model_path << "\nmetrics -> " << report_path << "\n";
    return 0;
}

struct DetectorTrainFlags {
    std::optional<std::string> poses, out, report;
    std::optional<int> hidden, latent;
    std::optional<double> corrupt_displacement, corrupt_fraction;
    std::optional<std::uint64_t> corrupt_seed;
};

int run_train_detector(const DetectorTrainFlags& f, const TrainFlags& tf) {
    const auto poses = read_pose_jsonl(need(f.poses, "--poses"));
    const auto vecs = build_detector_dataset(poses);
    const double split = tf.split.value_or(0.8);
    const auto n_train = static_cast<std::size_t>(static_cast<double>(vecs.size()) * split);
    if (n_train == 0 || n_train == vecs.size())
        throw std::runtime_error("train-detector: split leaves an empty side");
    const std::vector<std::vector<double>> train_set(vecs.begin(), vecs.begin() + n_train);
    const std::vector<std::vector<double>> holdout(vecs.begin() + n_train, vecs.end());

    DetectorDims dims;
    if (f.hidden) dims.hidden = *f.hidden;
    if (f.latent) dims.latent = *f.latent;
    const TrainConfig tc = build_train(tf, 50);
    const DetectorModel det = fit_detector(train_set, dims, tc);
    const std::string model_path = need(f.out, "--out");
    save_detector(det, model_path);

    std::size_t clean_flagged = 0;
    for (const auto& x : holdout) clean_flagged += detect_error(x, det).is_erroneous ? 1 : 0;

    CorruptionConfig corr;
    if (f.corrupt_displacement) corr.displacement = *f.corrupt_displacement;
    if (f.corrupt_fraction) corr.corrupt_fraction = *f.corrupt_fraction;
    corr.seed = f.corrupt_seed.value_or(tc.seed + 1);
    const auto labeled = corrupt_poses(holdout, corr);

    json report;
    report["model"] = model_path;
    report["threshold"] = det.loss_threshold;
    report["train"] = {{"epochs", tc.epochs},
                       {"learning_rate", tc.learning_rate},
                       {"batch_size", tc.batch_size},
                       {"seed", tc.seed},
                       {"split", split},
                       {"samples", train_set.size()},
                       {"hidden", dims.hidden},
                       {"latent", dims.latent}};
    report["holdout"] = {{"samples", holdout.size()},
                         {"clean_flag_rate",
                          static_cast<double>(clean_flagged) / static_cast<double>(holdout.size())},
                         {"labeled", classification_json(evaluate_detector(det, labeled))},
                         {"corruption",
                          {{"displacement", corr.displacement},
                           {"corrupt_fraction", corr.corrupt_fraction},
                           {"seed", corr.seed}}}};
    report["pca_baseline"] = {
        {"components", dims.latent},
        {"labeled", classification_json(
                        evaluate_pca_detector(fit_pca_detector(train_set, dims.latent), labeled))}};
    const std::string report_path = f.report.value_or(default_report_path(model_path));
    write_report(report_path, report);
    std::cout << "model -> " << model_path << "\nmetrics -> " << report_path << "\n";
    return 0;
}

struct RenderFlags {
    std::optional<std::string> poses, out_dir, predictor, detector;
    std::optional<int> width, height;
};

int run_render(const RenderFlags& f) {
    const auto poses = read_pose_jsonl(need(f.poses, "--poses"));
    const fs::path dir = need(f.out_dir, "--out");
    fs::create_directories(dir);

    std::optional<PredictorModel> predictor;
    if (f.predictor) predictor = load_predictor(*f.predictor);
    std::optional<DetectorModel> detector;
    if (f.detector) detector = load_detector(*f.detector);
    const int width = f.width.value_or(1280);
    const int height = f.height.value_or(720);

    json index = json::array();
    char name[32];
    for (std::size_t i = 0; i < poses.size(); ++i) {
        const TransmitPose tp = select_keypoints(poses[i]);
        json entry{{"seq", i}, {"t_ms", poses[i].t_ms}, {"flagged", false}};
        if (detector && tp.left_present && tp.right_present) {
            const Detection d = detect_error(transmit_vector(tp), *detector);
            entry["flagged"] = d.is_erroneous;
            entry["detector_loss"] = d.loss;
        }
        const RenderPose rp = assemble_render_pose(tp, predictor ? &*predictor : nullptr);
        const Image img = render_skeleton(rp, width, height);
        std::snprintf(name, sizeof name, "frame_%05zu.png", i);
        write_png((dir / name).string(), img);
        entry["file"] = name;
        index.push_back(std::move(entry));
    }
    write_report((dir / "index.json").string(), index);
    std::cout << "rendered " << poses.size() << " frames -> " << dir.string() << "\n";
    return 0;
}

int run_detect(const std::optional<std::string>& poses_path, const std::optional<std::string>& detector_path,
               const std::string& out) {
    const auto poses = read_pose_jsonl(need(poses_path, "--poses"));
    const DetectorModel det = load_detector(need(detector_path, "--detector"));

    json frames = json::array();
    std::size_t evaluated = 0, flagged = 0;
    for (std::size_t i = 0; i < poses.size(); ++i) {
        const TransmitPose tp = select_keypoints(poses[i]);
        json entry{{"seq", i}, {"t_ms", poses[i].t_ms}};
        if (tp.left_present && tp.right_present) {
            const Detection d = detect_error(transmit_vector(tp), det);
            entry["loss"] = d.loss;
            entry["erroneous"] = d.is_erroneous;
            ++evaluated;
            flagged += d.is_erroneous ? 1 : 0;
        } else {
            entry["skipped"] = "needs both hands";
        }
        frames.push_back(std::move(entry));
    }
    write_report(out, json{{"summary",
                            {{"frames", poses.size()},
                             {"evaluated", evaluated},
                             {"flagged", flagged},
                             {"threshold", det.loss_threshold}}},
                           {"frames", frames}});
    return 0;
}

int run_predict(const std::optional<std::string>& poses_path,
                const std::optional<std::string>& predictor_path, const std::optional<std::string>& out) {
    const auto poses = read_pose_jsonl(need(poses_path, "--poses"));
    const PredictorModel model = load_predictor(need(predictor_path, "--predictor"));

    std::vector<FullPose> completed;
    completed.reserve(poses.size());
    for (const auto& pose : poses) {
        const TransmitPose tp = select_keypoints(pose);
        FullPose fp = expand_keypoints(tp, pose.t_ms);
        const auto fill = [&](Hand side, std::array<Keypoint, 21>& hand) {
            const auto pts = predict_hand(hand_points(tp, side), model, side);
            for (int k = 0; k < 21; ++k) hand[k] = {pts[k].x, pts[k].y, true};
        };
        if (tp.left_present) fill(Hand::Left, fp.left_hand);
        if (tp.right_present) fill(Hand::Right, fp.right_hand);
        completed.push_back(std::move(fp));
    }
    write_pose_jsonl(need(out, "--out"), completed);
    std::cout << "predicted hands for " << completed.size() << " poses\n";
    return 0;
}

int run_estimate_noise(const std::optional<std::string>& truth_path,
                       const std::optional<std::string>& received_path, const std::string& out,
                       std::optional<int> width, std::optional<int> height,
                       std::optional<double> fraction) {
    const auto truth = read_pose_jsonl(need(truth_path, "--truth"));
    const auto received = read_pose_jsonl(need(received_path, "--received"));
    if (truth.size() != received.size())
        throw std::runtime_error("estimate-noise: pose counts differ (" + std::to_string(truth.size()) +
                                 " vs " + std::to_string(received.size()) + ")");

    std::vector<std::pair<TransmitPose, TransmitPose>> pairs;
    pairs.reserve(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i)
        pairs.emplace_back(select_keypoints(truth[i]), select_keypoints(received[i]));

    const NoiseParams np = estimate_noise_params(pairs, width.value_or(1280), height.value_or(720));
    const auto inj = noise_injection_from_params(np, fraction.value_or(0.5));
    write_report(out, json{{"mean_px", np.mean_px},
                           {"stddev_px", np.stddev_px},
                           {"canvas", {{"width", np.canvas_width}, {"height", np.canvas_height}}},
                           {"pairs", pairs.size()},
                           {"injection",
                            {{"mean", inj.mean},
                             {"stddev", inj.stddev},
                             {"sample_fraction", inj.sample_fraction},
                             {"min_joints", inj.min_joints},
                             {"max_joints", inj.max_joints}}}});
    return 0;
}

int run_ser_test(const ModemFlags& mf, const ChannelFlags& cf, int trials, std::uint64_t seed,
                 const std::string& out) {
    const double rate = mf.rate_kbps.value_or(6.0);
    const auto scheme = mf.scheme ? parse_scheme(*mf.scheme) : ModemConfig::Scheme::Css;
    const ChannelConfig channel = build_channel(cf);
    const double ser = mean_cell_ser(scheme, rate, channel, trials, seed);
    write_report(out, json{{"scheme", scheme == ModemConfig::Scheme::Css ? "css" : "fsk"},
                           {"rate_kbps", rate},
                           {"trials", trials},
                           {"mean_ser", ser}});
    return 0;
}

int run_sync_bench(const ModemFlags& mf, int trials, double snr_db, int tolerance, std::uint64_t seed,
                   const std::string& out) {
    const ModemConfig cfg = build_modem(mf);
    const Modem modem(cfg);
    std::mt19937_64 rng(seed);

    std::size_t hits = 0, detected = 0;
    std::size_t max_err = 0;
    for (int t = 0; t < trials; ++t) {
        FramePayload payload;
        payload.frame_type = FrameType::Complete;
        payload.symbols.resize(static_cast<std::size_t>(payload_symbol_count(FrameType::Complete)));
        for (auto& s : payload.symbols) s = static_cast<std::uint8_t>(rng() & 15u);
        const AudioBuffer frame = modem.build_frame(payload);

        const std::size_t offset = 1200 + static_cast<std::size_t>(rng() % 4800);
        AudioBuffer audio;
        audio.sample_rate = cfg.sample_rate;
        audio.samples.assign(offset, 0.0);
        audio.samples.insert(audio.samples.end(), frame.samples.begin(), frame.samples.end());
        audio.samples.insert(audio.samples.end(), 1200, 0.0);

        double power = 0.0;
        for (double s : frame.samples) power += s * s;
        power /= static_cast<double>(frame.samples.size());
        const double sigma = std::sqrt(power * std::pow(10.0, -snr_db / 10.0));
        for (auto& s : audio.samples) s += sigma * nn_detail::gaussian(rng);

        const auto res = decode_audio(audio, cfg);
        if (res.frames.empty()) continue;
        ++detected;
        const auto got = res.frames.front().frame_start;
        const std::size_t err = got > offset ? got - offset : offset - got;
        max_err = std::max(max_err, err);
        if (err <= static_cast<std::size_t>(tolerance)) ++hits;
    }
    write_report(out, json{{"trials", trials},
                           {"snr_db", snr_db},
                           {"tolerance_samples", tolerance},
                           {"frames_detected", detected},
                           {"within_tolerance", hits},
                           {"fraction", static_cast<double>(hits) / static_cast<double>(trials)},
                           {"max_abs_error", max_err}});
    return 0;
}

struct EvalFlags {
    std::optional<std::string> poses, predictor, detector, out;
    std::optional<double> split;
    std::optional<int> width, height, pca_components;
    std::optional<double> corrupt_displacement, corrupt_fraction;
    std::optional<std::uint64_t> seed;
};

int run_eval(const EvalFlags& f) {
    if (!f.predictor && !f.detector)
        throw std::runtime_error("eval: pass --predictor and/or --detector");
    const auto poses = read_pose_jsonl(need(f.poses, "--poses"));
    const double split = f.split.value_or(0.8);
    const int width = f.width.value_or(1280);
    const int height = f.height.value_or(720);

    json report;
    report["poses"] = poses.size();
    if (f.predictor) {
        const PredictorModel model = load_predictor(*f.predictor);
        const auto hd = build_hand_datasets(poses);
        const auto [lt, le] = split_dataset(hd.left, split);
        const auto [rt, re] = split_dataset(hd.right, split);
        report["predictor"] = {{"model", *f.predictor},
                               {"trained_with_noise", model.trained_with_noise},
                               {"left", hand_eval_json(lt, le, &model, Hand::Left, width, height)},
                               {"right", hand_eval_json(rt, re, &model, Hand::Right, width, height)}};
    }
    if (f.detector) {
        const DetectorModel det = load_detector(*f.detector);
        const auto vecs = build_detector_dataset(poses);
        const auto n_train = static_cast<std::size_t>(static_cast<double>(vecs.size()) * split);
        if (n_train == 0 || n_train == vecs.size())
            throw std::runtime_error("eval: split leaves an empty side");
        const std::vector<std::vector<double>> train_set(vecs.begin(), vecs.begin() + n_train);
        const std::vector<std::vector<double>> holdout(vecs.begin() + n_train, vecs.end());

        CorruptionConfig corr;
        if (f.corrupt_displacement) corr.displacement = *f.corrupt_displacement;
        if (f.corrupt_fraction) corr.corrupt_fraction = *f.corrupt_fraction;
        corr.seed = f.seed.value_or(corr.seed);
        const auto labeled = corrupt_poses(holdout, corr);
        const int components = f.pca_components.value_or(16);
        report["detector"] = {
            {"model", *f.detector},
            {"threshold", det.loss_threshold},
            {"labeled", classification_json(evaluate_detector(det, labeled))},
            {"pca_baseline",
             {{"components", components},
              {"labeled", classification_json(
                              evaluate_pca_detector(fit_pca_detector(train_set, components), labeled))}}},
            {"corruption",
             {{"displacement", corr.displacement},
              {"corrupt_fraction", corr.corrupt_fraction},
              {"seed", corr.seed}}}};
    }
    write_report(f.out.value_or(""), report);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pose keypoints over the audio channel: encode, shape, decode, repair, render"};
    app.require_subcommand(1);

    json cfg;
    try {
        cfg = scan_config(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::string config_path;  // consumed by scan_config; registered so parsing accepts it

    int exit_code = 0;
    const auto guard = [&](auto fn) {
        return [&, fn] {
            try {
                exit_code = fn();
            } catch (const std::exception& e) {
                std::cerr << "error: " << e.what() << "\n";
                exit_code = 1;
            }
        };
    };

    // encode
    auto* enc = app.add_subcommand("encode", "pose JSONL -> framed audio WAV");
    static ModemFlags enc_mf;
    static std::optional<std::string> enc_in, enc_out;
    static std::optional<int> enc_pad, enc_delta;
    enc->add_option("--config", config_path, "JSON config file");
    enc->add_option("--in", enc_in, "input pose JSONL");
    enc->add_option("--out", enc_out, "output WAV path");
    enc->add_option("--pad-samples", enc_pad, "silence around the frame train");
    enc->add_option("--delta-threshold", enc_delta, "displacement-frame eligibility threshold");
    add_modem_flags(enc, enc_mf);
    enc->callback(guard([&] {
        fill_modem(enc_mf, cfg);
        fallback(enc_in, cfg, "in");
        fallback(enc_out, cfg, "out");
        fallback(enc_pad, cfg, "pad-samples");
        fallback(enc_delta, cfg, "delta-threshold");
        return run_encode(enc_mf, need(enc_in, "--in"), need(enc_out, "--out"), enc_pad.value_or(1200),
                          enc_delta.value_or(kDefaultDeltaThreshold));
    }));

    // decode
    auto* dec = app.add_subcommand("decode", "framed audio WAV -> pose JSONL");
    static ModemFlags dec_mf;
    static std::optional<std::string> dec_in, dec_out;
    dec->add_option("--config", config_path, "JSON config file");
    dec->add_option("--in", dec_in, "input WAV");
    dec->add_option("--out", dec_out, "output pose JSONL");
    add_modem_flags(dec, dec_mf);
    dec->callback(guard([&] {
        fill_modem(dec_mf, cfg);
        fallback(dec_in, cfg, "in");
        fallback(dec_out, cfg, "out");
        return run_decode(dec_mf, need(dec_in, "--in"), need(dec_out, "--out"));
    }));

    // channel
    auto* chan = app.add_subcommand("channel", "apply the codec/network channel to a WAV");
    static ChannelFlags chan_cf;
    static std::optional<std::string> chan_in, chan_out;
    chan->add_option("--config", config_path, "JSON config file");
    chan->add_option("--in", chan_in, "input WAV");
    chan->add_option("--out", chan_out, "output WAV");
    chan->add_option("--seed", chan_cf.seed, "network loss seed");
    add_channel_flags(chan, chan_cf);
    chan->callback(guard([&] {
        fill_channel(chan_cf, cfg);
        fallback(chan_in, cfg, "in");
        fallback(chan_out, cfg, "out");
        return run_channel(chan_cf, need(chan_in, "--in"), need(chan_out, "--out"));
    }));

    // pipeline
    auto* pipe = app.add_subcommand("pipeline", "full encode -> channel -> decode -> render run");
    static ModemFlags pipe_mf;
    static ChannelFlags pipe_cf;
    static PipelineFlags pipe_pf;
    pipe->add_option("--config", config_path, "JSON config file");
    pipe->add_option("--poses", pipe_pf.poses, "input pose JSONL");
    pipe->add_option("--out", pipe_pf.out_dir, "output directory for reports and frames");
    pipe->add_option("--predictor", pipe_pf.predictor, "predictor model JSON");
    pipe->add_option("--detector", pipe_pf.detector, "detector model JSON");
    pipe->add_flag("--render", pipe_pf.render, "write skeleton PNG frames");
    pipe->add_option("--canvas-width", pipe_pf.width, "render canvas width");
    pipe->add_option("--canvas-height", pipe_pf.height, "render canvas height");
    pipe->add_option("--pad-samples", pipe_pf.pad, "silence around the frame train");
    pipe->add_option("--seed", pipe_cf.seed, "network loss seed");
    add_modem_flags(pipe, pipe_mf);
    add_channel_flags(pipe, pipe_cf);
    pipe->callback(guard([&] {
        fill_modem(pipe_mf, cfg);
        fill_channel(pipe_cf, cfg);
        fallback(pipe_pf.poses, cfg, "poses");
        fallback(pipe_pf.out_dir, cfg, "out");
        fallback(pipe_pf.predictor, cfg, "predictor");
        fallback(pipe_pf.detector, cfg, "detector");
        if (!pipe_pf.render) pipe_pf.render = cfg.value("render", false);
        fallback(pipe_pf.width, cfg, "canvas-width");
        fallback(pipe_pf.height, cfg, "canvas-height");
        fallback(pipe_pf.pad, cfg, "pad-samples");
        return run_pipeline_cmd(pipe_mf, pipe_cf, pipe_pf);
    }));

    // ser-sweep
    auto* sweep = app.add_subcommand("ser-sweep", "symbol error rate grid over rates and codec cells");
    static SweepFlags sweep_f;
    sweep->add_option("--config", config_path, "JSON config file");
    sweep->add_option("--rates", sweep_f.rates, "payload rates in kbit/s");
    sweep->add_option("--frame-ms", sweep_f.frames, "codec frame sizes in ms");
    sweep->add_option("--bitrate-kbps", sweep_f.bitrates, "codec bitrates in kbit/s");
    sweep->add_option("--seeds", sweep_f.seeds, "trials per cell");
    sweep->add_option("--seed", sweep_f.seed, "payload seed base");
    sweep->add_option("--out", sweep_f.out, "CSV output path (default stdout)");
    sweep->add_flag("--no-identity", sweep_f.no_identity, "skip the identity-codec column");
    sweep->add_flag("--no-fsk", sweep_f.no_fsk, "skip the FSK comparison rows");
    sweep->callback(guard([&] {
        fallback(sweep_f.rates, cfg, "rates");
        fallback(sweep_f.frames, cfg, "frame-ms");
        fallback(sweep_f.bitrates, cfg, "bitrate-kbps");
        fallback(sweep_f.seeds, cfg, "seeds");
        fallback(sweep_f.seed, cfg, "seed");
        fallback(sweep_f.out, cfg, "out");
        if (!sweep_f.no_identity) sweep_f.no_identity = cfg.value("no-identity", false);
        if (!sweep_f.no_fsk) sweep_f.no_fsk = cfg.value("no-fsk", false);
        return run_sweep(sweep_f);
    }));

    // gen-corpus
    auto* gen = app.add_subcommand("gen-corpus", "generate a synthetic signing corpus");
    static std::optional<std::string> gen_out;
    static std::optional<std::uint64_t> gen_seed;
    static std::optional<int> gen_frames, gen_interval;
    static std::optional<double> gen_step;
    gen->add_option("--config", config_path, "JSON config file (any corpus field)");
    gen->add_option("--out", gen_out, "output pose JSONL");
    gen->add_option("--seed", gen_seed, "corpus seed");
    gen->add_option("--frames", gen_frames, "number of poses");
    gen->add_option("--interval-ms", gen_interval, "pose spacing in ms");
    gen->add_option("--motion-step", gen_step, "random-walk step fraction");
    gen->callback(guard([&] {
        fallback(gen_out, cfg, "out");
        return run_gen_corpus(cfg, gen_out, gen_seed, gen_frames, gen_interval, gen_step);
    }));

    // train-predictor
    auto* tp = app.add_subcommand("train-predictor", "fit the excluded-keypoint prediction model");
    static PredictorTrainFlags tp_f;
    static TrainFlags tp_tf;
    tp->add_option("--config", config_path, "JSON config file");
    tp->add_option("--poses", tp_f.poses, "training pose JSONL");
    tp->add_option("--out", tp_f.out, "output model JSON");
    tp->add_option("--report", tp_f.report, "metrics report path (default <model>.metrics.json)");
    tp->add_option("--canvas-width", tp_f.width, "canvas width for pixel metrics");
    tp->add_option("--canvas-height", tp_f.height, "canvas height for pixel metrics");
    tp->add_flag("--noise", tp_f.noise, "retrain with injected joint noise after the clean pass");
    tp->add_option("--noise-mean-px", tp_f.noise_mean_px, "noise displacement mean in px");
    tp->add_option("--noise-std-px", tp_f.noise_std_px, "noise displacement spread in px");
    tp->add_option("--noise-fraction", tp_f.noise_fraction, "fraction of samples perturbed per batch");
    add_train_flags(tp, tp_tf);
    tp->callback(guard([&] {
        fill_train(tp_tf, cfg);
        fallback(tp_f.poses, cfg, "poses");
        fallback(tp_f.out, cfg, "out");
        fallback(tp_f.report, cfg, "report");
        fallback(tp_f.width, cfg, "canvas-width");
        fallback(tp_f.height, cfg, "canvas-height");
        if (!tp_f.noise) tp_f.noise = cfg.value("noise", false);
        fallback(tp_f.noise_mean_px, cfg, "noise-mean-px");
        fallback(tp_f.noise_std_px, cfg, "noise-std-px");
        fallback(tp_f.noise_fraction, cfg, "noise-fraction");
        return run_train_predictor(tp_f, tp_tf);
    }));

    // train-detector
    auto* td = app.add_subcommand("train-detector", "fit the autoencoder error detector");
    static DetectorTrainFlags td_f;
    static TrainFlags td_tf;
    td->add_option("--config", config_path, "JSON config file");
    td->add_option("--poses", td_f.poses, "training pose JSONL");
    td->add_option("--out", td_f.out, "output model JSON");
    td->add_option("--report", td_f.report, "metrics report path (default <model>.metrics.json)");
    td->add_option("--hidden", td_f.hidden, "autoencoder hidden width");
    td->add_option("--latent", td_f.latent, "autoencoder latent width");
    td->add_option("--corrupt-displacement", td_f.corrupt_displacement,
                   "evaluation corruption displacement (normalized)");
    td->add_option("--corrupt-fraction", td_f.corrupt_fraction, "fraction of holdout poses corrupted");
    td->add_option("--corrupt-seed", td_f.corrupt_seed, "evaluation corruption seed");
    add_train_flags(td, td_tf);
    td->callback(guard([&] {
        fill_train(td_tf, cfg);
        fallback(td_f.poses, cfg, "poses");
        fallback(td_f.out, cfg, "out");
        fallback(td_f.report, cfg, "report");
        fallback(td_f.hidden, cfg, "hidden");
        fallback(td_f.latent, cfg, "latent");
        fallback(td_f.corrupt_displacement, cfg, "corrupt-displacement");
        fallback(td_f.corrupt_fraction, cfg, "corrupt-fraction");
        fallback(td_f.corrupt_seed, cfg, "corrupt-seed");
        return run_train_detector(td_f, td_tf);
    }));

    // render
    auto* ren = app.add_subcommand("render", "rasterize poses to skeleton PNG frames");
    static RenderFlags ren_f;
    ren->add_option("--config", config_path, "JSON config file");
    ren->add_option("--poses", ren_f.poses, "input pose JSONL");
    ren->add_option("--out", ren_f.out_dir, "output directory");
    ren->add_option("--predictor", ren_f.predictor, "predictor model for hand completion");
    ren->add_option("--detector", ren_f.detector, "detector model; decisions land in the index");
    ren->add_option("--width", ren_f.width, "canvas width");
    ren->add_option("--height", ren_f.height, "canvas height");
    ren->callback(guard([&] {
        fallback(ren_f.poses, cfg, "poses");
        fallback(ren_f.out_dir, cfg, "out");
        fallback(ren_f.predictor, cfg, "predictor");
        fallback(ren_f.detector, cfg, "detector");
        fallback(ren_f.width, cfg, "width");
        fallback(ren_f.height, cfg, "height");
        return run_render(ren_f);
    }));

    // detect
    auto* det = app.add_subcommand("detect", "score poses with the error detector");
    static std::optional<std::string> det_poses, det_model, det_out;
    det->add_option("--config", config_path, "JSON config file");
    det->add_option("--poses", det_poses, "input pose JSONL");
    det->add_option("--detector", det_model, "detector model JSON");
    det->add_option("--out", det_out, "report path (default stdout)");
    det->callback(guard([&] {
        fallback(det_poses, cfg, "poses");
        fallback(det_model, cfg, "detector");
        fallback(det_out, cfg, "out");
        return run_detect(det_poses, det_model, det_out.value_or(""));
    }));

    // predict
    auto* pred = app.add_subcommand("predict", "complete hands with the prediction model");
    static std::optional<std::string> pred_poses, pred_model, pred_out;
    pred->add_option("--config", config_path, "JSON config file");
    pred->add_option("--poses", pred_poses, "input pose JSONL");
    pred->add_option("--predictor", pred_model, "predictor model JSON");
    pred->add_option("--out", pred_out, "output pose JSONL");
    pred->callback(guard([&] {
        fallback(pred_poses, cfg, "poses");
        fallback(pred_model, cfg, "predictor");
        fallback(pred_out, cfg, "out");
        return run_predict(pred_poses, pred_model, pred_out);
    }));

    // estimate-noise
    auto* noise = app.add_subcommand("estimate-noise", "fit noise statistics from pose pairs");
    static std::optional<std::string> noise_truth, noise_rx, noise_out;
    static std::optional<int> noise_w, noise_h;
    static std::optional<double> noise_frac;
    noise->add_option("--config", config_path, "JSON config file");
    noise->add_option("--truth", noise_truth, "ground-truth pose JSONL");
    noise->add_option("--received", noise_rx, "received pose JSONL, aligned by index");
    noise->add_option("--out", noise_out, "report path (default stdout)");
    noise->add_option("--width", noise_w, "canvas width for pixel units");
    noise->add_option("--height", noise_h, "canvas height for pixel units");
    noise->add_option("--fraction", noise_frac, "suggested injection sample fraction");
    noise->callback(guard([&] {
        fallback(noise_truth, cfg, "truth");
        fallback(noise_rx, cfg, "received");
        fallback(noise_out, cfg, "out");
        fallback(noise_w, cfg, "width");
        fallback(noise_h, cfg, "height");
        fallback(noise_frac, cfg, "fraction");
        return run_estimate_noise(noise_truth, noise_rx, noise_out.value_or(""), noise_w, noise_h,
                                  noise_frac);
    }));

    // ser-test
    auto* st = app.add_subcommand("ser-test", "frame loopback symbol error rate");
    static ModemFlags st_mf;
    static ChannelFlags st_cf;
    static std::optional<int> st_trials;
    static std::optional<std::uint64_t> st_seed;
    static std::optional<std::string> st_out;
    st->add_option("--config", config_path, "JSON config file");
    st->add_option("--trials", st_trials, "frames per measurement");
    st->add_option("--seed", st_seed, "payload seed base");
    st->add_option("--out", st_out, "report path (default stdout)");
    add_modem_flags(st, st_mf);
    add_channel_flags(st, st_cf);
    st->callback(guard([&] {
        fill_modem(st_mf, cfg);
        fill_channel(st_cf, cfg);
        fallback(st_trials, cfg, "trials");
        fallback(st_seed, cfg, "seed");
        fallback(st_out, cfg, "out");
        return run_ser_test(st_mf, st_cf, st_trials.value_or(20), st_seed.value_or(7100),
                            st_out.value_or(""));
    }));

    // sync-bench
    auto* sb = app.add_subcommand("sync-bench", "frame start recovery under additive noise");
    static ModemFlags sb_mf;
    static std::optional<int> sb_trials, sb_tol;
    static std::optional<double> sb_snr;
    static std::optional<std::uint64_t> sb_seed;
    static std::optional<std::string> sb_out;
    sb->add_option("--config", config_path, "JSON config file");
    sb->add_option("--trials", sb_trials, "number of trials");
    sb->add_option("--snr-db", sb_snr, "additive white noise SNR");
    sb->add_option("--tolerance", sb_tol, "allowed start error in samples");
    sb->add_option("--seed", sb_seed, "trial seed");
    sb->add_option("--out", sb_out, "report path (default stdout)");
    add_modem_flags(sb, sb_mf);
    sb->callback(guard([&] {
        fill_modem(sb_mf, cfg);
        fallback(sb_trials, cfg, "trials");
        fallback(sb_snr, cfg, "snr-db");
        fallback(sb_tol, cfg, "tolerance");
        fallback(sb_seed, cfg, "seed");
        fallback(sb_out, cfg, "out");
        return run_sync_bench(sb_mf, sb_trials.value_or(200), sb_snr.value_or(20.0),
                              sb_tol.value_or(2), sb_seed.value_or(0), sb_out.value_or(""));
    }));

    // eval
    auto* ev = app.add_subcommand("eval", "evaluate trained models against a pose corpus");
    static EvalFlags ev_f;
    ev->add_option("--config", config_path, "JSON config file");
    ev->add_option("--poses", ev_f.poses, "evaluation pose JSONL");
    ev->add_option("--predictor", ev_f.predictor, "predictor model JSON");
    ev->add_option("--detector", ev_f.detector, "detector model JSON");
    ev->add_option("--out", ev_f.out, "report path (default stdout)");
    ev->add_option("--split", ev_f.split, "training fraction for baselines");
    ev->add_option("--canvas-width", ev_f.width, "canvas width for pixel metrics");
    ev->add_option("--canvas-height", ev_f.height, "canvas height for pixel metrics");
    ev->add_option("--pca-components", ev_f.pca_components, "PCA baseline component count");
    ev->add_option("--corrupt-displacement", ev_f.corrupt_displacement,
                   "detector corruption displacement (normalized)");
    ev->add_option("--corrupt-fraction", ev_f.corrupt_fraction, "fraction of holdout poses corrupted");
    ev->add_option("--seed", ev_f.seed, "corruption seed");
    ev->callback(guard([&] {
        fallback(ev_f.poses, cfg, "poses");
        fallback(ev_f.predictor, cfg, "predictor");
        fallback(ev_f.detector, cfg, "detector");
        fallback(ev_f.out, cfg, "out");
        fallback(ev_f.split, cfg, "split");
        fallback(ev_f.width, cfg, "canvas-width");
        fallback(ev_f.height, cfg, "canvas-height");
        fallback(ev_f.pca_components, cfg, "pca-components");
        fallback(ev_f.corrupt_displacement, cfg, "corrupt-displacement");
        fallback(ev_f.corrupt_fraction, cfg, "corrupt-fraction");
        fallback(ev_f.seed, cfg, "seed");
        return run_eval(ev_f);
    }));

    CLI11_PARSE(app, argc, argv);
    return exit_code;
}
