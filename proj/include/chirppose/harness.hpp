#pragma once

// End-to-end orchestration: synthetic pose corpus generation, the full
// encode -> modem -> channel -> decode -> render pipeline with metrics,
// SER sweep grids, and classification/regression evaluation helpers.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include <chirppose/channel.hpp>
#include <chirppose/modem.hpp>
#include <chirppose/pose.hpp>
#include <chirppose/pose_io.hpp>
#include <chirppose/renderer.hpp>
#include <chirppose/tinynn.hpp>
#include <chirppose/wav.hpp>

namespace chirppose {

// --- synthetic corpus ---------------------------------------------------------

// Planar upper-body kinematics: fixed bone lengths, seeded random-walk joint
// angles, one global similarity transform per sequence. Proportions and the
// transform envelope are sized so no landmark ever leaves [0,1]^2, which
// keeps bone lengths rigid after the defensive clamp.
struct SyntheticCorpusConfig {
    std::uint64_t seed = 0;
    int n_frames = 100;
    int frame_interval_ms = 90;

    // skeleton proportions, normalized image units
    double shoulder_width = 0.20;
    double hip_width = 0.16;
    double neck_length = 0.11;
    double torso_length = 0.34;
    double upper_arm = 0.13;
    double forearm = 0.115;
    double palm_length = 0.06;
    double finger_segment = 0.022;  // proximal phalanx; later segments shrink

    // articulation ranges, radians
    double shoulder_min = -0.35;
    double shoulder_max = 1.35;
    double elbow_max = 2.3;
    double wrist_max = 0.6;
    double curl_max = 1.6;

    // out-of-plane hand tilt: fingers live on a plane that pivots toward the
    // camera, so projected hand geometry is anisotropically compressed
    double tilt_min = 0.0;
    double tilt_max = 1.3;
    double tilt_axis_range = 2.5;

    double motion_step = 0.08;  // random-walk step as a fraction of each range

    void validate() const {
        if (n_frames < 1) throw std::invalid_argument("corpus: need at least one frame");
        if (frame_interval_ms < 1) throw std::invalid_argument("corpus: frame interval must be positive");
        for (double b : {shoulder_width, hip_width, neck_length, torso_length, upper_arm, forearm,
                         palm_length, finger_segment})
            if (!(b > 0.0)) throw std::invalid_argument("corpus: bone lengths must be positive");
        if (!(shoulder_max > shoulder_min)) throw std::invalid_argument("corpus: empty shoulder range");
        if (!(elbow_max > 0.0 && wrist_max > 0.0 && curl_max > 0.0))
            throw std::invalid_argument("corpus: articulation ranges must be positive");
        if (!(tilt_min >= 0.0 && tilt_max > tilt_min && tilt_max < 1.5708))
            throw std::invalid_argument("corpus: tilt range must fit in [0, pi/2)");
        if (!(tilt_axis_range > 0.0)) throw std::invalid_argument("corpus: tilt axis range must be positive");
        if (!(motion_step > 0.0 && motion_step <= 1.0))
            throw std::invalid_argument("corpus: motion step must be in (0,1]");
    }
};

namespace harness_detail {

// Per-finger layout constants, thumb first: fan-out angle from the palm
// axis, palm-length scale to the knuckle, and phalanx-length scale.
constexpr double kFingerSpread[5] = {1.05, 0.28, 0.02, -0.22, -0.50};
constexpr double kPalmScale[5] = {0.50, 1.00, 1.03, 0.97, 0.85};
constexpr double kSegmentScale[5] = {1.15, 1.05, 1.15, 1.05, 0.80};
// Curl distributes over the three chain joints; the thumb curls less.
constexpr double kCurlShare[3] = {0.55, 0.95, 0.60};
constexpr double kThumbCurlFactor = 0.6;
constexpr double kSegmentTaper[3] = {1.0, 0.65, 0.50};

struct WalkParam {
    double value = 0.0;
    double lo = 0.0;
    double hi = 1.0;

    void init(std::mt19937_64& rng) { value = lo + nn_detail::uniform01(rng) * (hi - lo); }

    void step(std::mt19937_64& rng, double fraction) {
        value += fraction * (hi - lo) * nn_detail::gaussian(rng);
        if (value > hi) value = 2.0 * hi - value;
        if (value < lo) value = 2.0 * lo - value;
        value = std::clamp(value, lo, hi);
    }
};

struct GlobalTransform {
    double rot = 0.0;
    double scale = 1.0;
    double tx = 0.0;
    double ty = 0.0;

    Point apply(Point p) const {
        const double cx = p.x - 0.5;
        const double cy = p.y - 0.45;
        const double c = std::cos(rot);
        const double s = std::sin(rot);
        return {0.5 + tx + scale * (c * cx - s * cy), 0.45 + ty + scale * (s * cx + c * cy)};
    }
};

inline Point advance(Point from, double angle, double length, double side) {
    return {from.x + side * length * std::sin(angle), from.y + length * std::cos(angle)};
}

}  // namespace harness_detail

inline std::vector<FullPose> generate_corpus(const SyntheticCorpusConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);

    harness_detail::GlobalTransform tf;
    tf.rot = -0.2 + 0.4 * nn_detail::uniform01(rng);
    tf.scale = 0.85 + 0.12 * nn_detail::uniform01(rng);
    tf.tx = -0.03 + 0.06 * nn_detail::uniform01(rng);
    tf.ty = -0.03 + 0.06 * nn_detail::uniform01(rng);

    // walk state: per-side shoulder swing, elbow flexion, wrist deflection,
    // five curls per hand, then per-hand tilt amount and tilt axis
    std::array<harness_detail::WalkParam, 20> walk;
    for (int s = 0; s < 2; ++s) {
        walk[s] = {0.0, cfg.shoulder_min, cfg.shoulder_max};
        walk[2 + s] = {0.0, 0.0, cfg.elbow_max};
        walk[4 + s] = {0.0, -cfg.wrist_max, cfg.wrist_max};
        for (int f = 0; f < 5; ++f) walk[6 + 5 * s + f] = {0.0, 0.0, cfg.curl_max};
        walk[16 + s] = {0.0, cfg.tilt_min, cfg.tilt_max};
        walk[18 + s] = {0.0, -cfg.tilt_axis_range, cfg.tilt_axis_range};
    }
    for (auto& p : walk) p.init(rng);

    const auto place = [&tf](Keypoint& kp, Point p) {
        const Point t = tf.apply(p);
        kp.x = std::clamp(t.x, 0.0, 1.0);
        kp.y = std::clamp(t.y, 0.0, 1.0);
        kp.visible = true;
    };

    std::vector<FullPose> out;
    out.reserve(static_cast<std::size_t>(cfg.n_frames));
    for (int frame = 0; frame < cfg.n_frames; ++frame) {
        if (frame > 0)
            for (auto& p : walk) p.step(rng, cfg.motion_step);

        FullPose pose;
        pose.t_ms = static_cast<std::int64_t>(frame) * cfg.frame_interval_ms;

        const Point center = {0.5, 0.38};
        const Point nose = {center.x, center.y - cfg.neck_length};
        const Point midhip = {center.x, center.y + cfg.torso_length};
        place(pose.body[body_kp::nose], nose);
        place(pose.body[body_kp::left_hip], {midhip.x + cfg.hip_width / 2, midhip.y});
        place(pose.body[body_kp::right_hip], {midhip.x - cfg.hip_width / 2, midhip.y});

        for (int s = 0; s < 2; ++s) {
            const double side = s == 0 ? 1.0 : -1.0;  // left keypoints sit at +x
            const Point shoulder = {center.x + side * cfg.shoulder_width / 2, center.y};
            const double swing = walk[s].value;
            const double flex = walk[2 + s].value;
            const double deflect = walk[4 + s].value;

            const Point elbow = harness_detail::advance(shoulder, swing, cfg.upper_arm, side);
            const double forearm_angle = swing - flex;
            const Point wrist = harness_detail::advance(elbow, forearm_angle, cfg.forearm, side);
            const double hand_angle = forearm_angle + deflect;

            place(pose.body[s == 0 ? body_kp::left_shoulder : body_kp::right_shoulder], shoulder);
            place(pose.body[s == 0 ? body_kp::left_elbow : body_kp::right_elbow], elbow);
            place(pose.body[s == 0 ? body_kp::left_wrist : body_kp::right_wrist], wrist);

            // Hands are three-dimensional: the palm plane tilts out of the
            // image plane about an axis through the wrist, and fingers curl
            // out of the palm plane. Landmarks are the orthographic
            // projection, so curled segments foreshorten and drift along the
            // projected plane normal.
            const double ct = std::cos(walk[16 + s].value);
            const double st = std::sin(walk[16 + s].value);
            const double ca = std::cos(walk[18 + s].value);
            const double sa = std::sin(walk[18 + s].value);
            const auto plane_dir = [&](double beta) {
                const double vx = side * std::sin(beta);
                const double vy = std::cos(beta);
                const double along = ca * vx + sa * vy;
                return Point{ct * vx + (1.0 - ct) * along * ca, ct * vy + (1.0 - ct) * along * sa};
            };
            const Point plane_normal{st * sa, -st * ca};

            auto& hand = s == 0 ? pose.left_hand : pose.right_hand;
            place(hand[0], wrist);
            for (int f = 0; f < 5; ++f) {
                double curl = walk[6 + 5 * s + f].value;
                if (f == 0) curl *= harness_detail::kThumbCurlFactor;
                const double base_angle = hand_angle + harness_detail::kFingerSpread[f];
                const Point axis = plane_dir(base_angle);
                Point joint = {wrist.x + cfg.palm_length * harness_detail::kPalmScale[f] * axis.x,
                               wrist.y + cfg.palm_length * harness_detail::kPalmScale[f] * axis.y};
                place(hand[1 + 4 * f], joint);
                double flex = 0.0;
                for (int k = 0; k < 3; ++k) {
                    flex += curl * harness_detail::kCurlShare[k];
                    const double len = cfg.finger_segment * harness_detail::kSegmentScale[f] *
                                       harness_detail::kSegmentTaper[k];
                    joint.x += len * (std::cos(flex) * axis.x - std::sin(flex) * plane_normal.x);
                    joint.y += len * (std::cos(flex) * axis.y - std::sin(flex) * plane_normal.y);
                    place(hand[2 + 4 * f + k], joint);
                }
            }
        }
        out.push_back(std::move(pose));
    }
    return out;
}

inline void generate_corpus_file(const SyntheticCorpusConfig& cfg, const std::string& path) {
    write_pose_jsonl(path, generate_corpus(cfg));
}

// --- dataset construction -------------------------------------------------------

struct HandDatasets {
    Dataset left;
    Dataset right;
};

// Inputs are the 12 on-air landmarks (canonical subset order), targets the
// full 21-landmark hand, both flattened x,y.
inline HandDatasets build_hand_datasets(const std::vector<FullPose>& poses) {
    HandDatasets out;
    for (const auto& pose : poses) {
        for (int s = 0; s < 2; ++s) {
            const auto& hand = s == 0 ? pose.left_hand : pose.right_hand;
            bool all_visible = true;
            for (const auto& kp : hand) all_visible = all_visible && kp.visible;
            if (!all_visible) continue;
            std::vector<double> in(2 * kHandSlots);
            for (int i = 0; i < kHandSlots; ++i) {
                in[2 * i] = hand[kHandSubset[i]].x;
                in[2 * i + 1] = hand[kHandSubset[i]].y;
            }
            std::vector<double> target(42);
            for (int i = 0; i < 21; ++i) {
                target[2 * i] = hand[i].x;
                target[2 * i + 1] = hand[i].y;
            }
            auto& d = s == 0 ? out.left : out.right;
            d.inputs.push_back(std::move(in));
            d.targets.push_back(std::move(target));
        }
    }
    return out;
}

inline std::vector<std::vector<double>> build_detector_dataset(const std::vector<FullPose>& poses) {
    std::vector<std::vector<double>> out;
    for (const auto& pose : poses) {
        const TransmitPose t = select_keypoints(pose);
        if (!t.left_present || !t.right_present) continue;
        out.push_back(transmit_vector(t));
    }
    return out;
}

// Leading fraction goes to the first split; frames stay in sequence order.
inline std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double train_fraction) {
    data.validate();
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("split_dataset: fraction must be in (0,1)");
    const auto n_train = static_cast<std::size_t>(train_fraction * static_cast<double>(data.inputs.size()));
    if (n_train == 0 || n_train == data.inputs.size())
        throw std::invalid_argument("split_dataset: a split would be empty");
    Dataset train, test;
    train.inputs.assign(data.inputs.begin(), data.inputs.begin() + static_cast<std::ptrdiff_t>(n_train));
    train.targets.assign(data.targets.begin(), data.targets.begin() + static_cast<std::ptrdiff_t>(n_train));
    test.inputs.assign(data.inputs.begin() + static_cast<std::ptrdiff_t>(n_train), data.inputs.end());
    test.targets.assign(data.targets.begin() + static_cast<std::ptrdiff_t>(n_train), data.targets.end());
    return {std::move(train), std::move(test)};
}

// --- labeled corruption ----------------------------------------------------------

// Labeling rule: a pose is erroneous when some joint moved farther than
// threshold_fraction of the normalized coordinate range.
struct CorruptionConfig {
    double corrupt_fraction = 0.5;
    double displacement = 0.30;
    double threshold_fraction = 0.20;
    int min_joints = 1;
    int max_joints = 2;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(corrupt_fraction >= 0.0 && corrupt_fraction <= 1.0))
            throw std::invalid_argument("corruption: fraction must be in [0,1]");
        if (!(displacement >= 0.0)) throw std::invalid_argument("corruption: negative displacement");
        if (min_joints < 1 || max_joints < min_joints)
            throw std::invalid_argument("corruption: bad joint count range");
    }
};

struct LabeledPoses {
    std::vector<std::vector<double>> poses;
    std::vector<bool> erroneous;
};

inline LabeledPoses corrupt_poses(const std::vector<std::vector<double>>& clean,
                                  const CorruptionConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    LabeledPoses out;
    out.poses.reserve(clean.size());
    out.erroneous.reserve(clean.size());
    for (const auto& pose : clean) {
        std::vector<double> sample = pose;
        bool corrupt = nn_detail::uniform01(rng) < cfg.corrupt_fraction;
        if (corrupt) {
            const std::size_t joints = sample.size() / 2;
            const auto span = static_cast<std::size_t>(cfg.max_joints - cfg.min_joints + 1);
            std::size_t count = static_cast<std::size_t>(cfg.min_joints) +
                                nn_detail::uniform_index(rng, span);
            count = std::min(count, joints);
            for (std::size_t k = 0; k < count; ++k) {
                const std::size_t j = nn_detail::uniform_index(rng, joints);
                // keep the displaced joint inside the frame so clipping never
                // shrinks the displacement below the labeling threshold
                for (int attempt = 0; attempt < 64; ++attempt) {
                    const double theta = 2.0 * 3.14159265358979323846 * nn_detail::uniform01(rng);
                    const double nx = sample[2 * j] + cfg.displacement * std::cos(theta);
                    const double ny = sample[2 * j + 1] + cfg.displacement * std::sin(theta);
                    if (nx >= 0.0 && nx <= 1.0 && ny >= 0.0 && ny <= 1.0) {
                        sample[2 * j] = nx;
                        sample[2 * j + 1] = ny;
                        break;
                    }
                }
            }
        }
        out.poses.push_back(std::move(sample));
        out.erroneous.push_back(corrupt && cfg.displacement > cfg.threshold_fraction);
    }
    return out;
}

// --- classification metrics ---------------------------------------------------------

struct ClassificationMetrics {
    std::size_t tp = 0;
    std::size_t tn = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    double accuracy = 0.0;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
};

inline ClassificationMetrics classification_metrics(const std::vector<bool>& predicted,
                                                    const std::vector<bool>& actual) {
    if (predicted.empty() || predicted.size() != actual.size())
        throw std::invalid_argument("classification_metrics: need matching nonempty label vectors");
    ClassificationMetrics m;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i] && actual[i]) ++m.tp;
        else if (!predicted[i] && !actual[i]) ++m.tn;
        else if (predicted[i]) ++m.fp;
        else ++m.fn;
    }
    m.accuracy = static_cast<double>(m.tp + m.tn) / static_cast<double>(predicted.size());
    if (m.tp + m.fp > 0) m.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
    if (m.tp + m.fn > 0) m.recall = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
    if (m.precision && m.recall && *m.precision + *m.recall > 0.0)
        m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
    return m;
}

inline ClassificationMetrics evaluate_detector(const DetectorModel& det, const LabeledPoses& set) {
    std::vector<bool> predicted;
    predicted.reserve(set.poses.size());
    for (const auto& pose : set.poses) predicted.push_back(detect_error(pose, det).is_erroneous);
    return classification_metrics(predicted, set.erroneous);
}

inline ClassificationMetrics evaluate_pca_detector(const PcaDetector& det, const LabeledPoses& set) {
    std::vector<bool> predicted;
    predicted.reserve(set.poses.size());
    for (const auto& pose : set.poses) predicted.push_back(pca_detect(pose, det).is_erroneous);
    return classification_metrics(predicted, set.erroneous);
}

// --- joint error ---------------------------------------------------------------

struct JointErrorStats {
    std::array<double, kTransmitSlots> per_slot_mean_px{};
    std::array<std::size_t, kTransmitSlots> per_slot_count{};
    double body_mean_px = 0.0;
    double hand_mean_px = 0.0;
    double overall_mean_px = 0.0;
    int worst_slot = -1;
    double worst_slot_mean_px = 0.0;
    std::size_t frames_compared = 0;
};

inline JointErrorStats joint_error(const std::vector<TransmitPose>& truth,
                                   const std::vector<TransmitPose>& received, int canvas_width = 1280,
                                   int canvas_height = 720) {
    if (truth.empty() || truth.size() != received.size())
        throw std::invalid_argument("joint_error: no aligned frames");
    if (canvas_width < 1 || canvas_height < 1) throw std::invalid_argument("joint_error: zero canvas");

    JointErrorStats stats;
    stats.frames_compared = truth.size();
    std::array<double, kTransmitSlots> sums{};
    double body_sum = 0.0, hand_sum = 0.0;
    std::size_t body_n = 0, hand_n = 0;
    for (std::size_t f = 0; f < truth.size(); ++f) {
        for (int s = 0; s < kTransmitSlots; ++s) {
            if (!truth[f].slot_visible[s] || !received[f].slot_visible[s]) continue;
            const double dx = (received[f].slots[s].x - truth[f].slots[s].x) * canvas_width;
            const double dy = (received[f].slots[s].y - truth[f].slots[s].y) * canvas_height;
            const double dist = std::hypot(dx, dy);
            sums[static_cast<std::size_t>(s)] += dist;
            ++stats.per_slot_count[static_cast<std::size_t>(s)];
            (s < kBodySlots ? body_sum : hand_sum) += dist;
            ++(s < kBodySlots ? body_n : hand_n);
        }
    }
    for (int s = 0; s < kTransmitSlots; ++s) {
        const auto n = stats.per_slot_count[static_cast<std::size_t>(s)];
        if (n == 0) continue;
        stats.per_slot_mean_px[static_cast<std::size_t>(s)] =
            sums[static_cast<std::size_t>(s)] / static_cast<double>(n);
        if (stats.per_slot_mean_px[static_cast<std::size_t>(s)] > stats.worst_slot_mean_px ||
            stats.worst_slot < 0) {
            stats.worst_slot = s;
            stats.worst_slot_mean_px = stats.per_slot_mean_px[static_cast<std::size_t>(s)];
        }
    }
    if (body_n > 0) stats.body_mean_px = body_sum / static_cast<double>(body_n);
    if (hand_n > 0) stats.hand_mean_px = hand_sum / static_cast<double>(hand_n);
    if (body_n + hand_n > 0)
        stats.overall_mean_px = (body_sum + hand_sum) / static_cast<double>(body_n + hand_n);
    return stats;
}

// --- regression metrics -----------------------------------------------------------

struct PredictionMetrics {
    double mae_px = 0.0;
    double mse_px2 = 0.0;
    std::optional<double> r2;
    std::size_t coordinates = 0;
};

// Pools every coordinate, x errors scaled by width and y by height.
inline PredictionMetrics prediction_metrics(const std::vector<std::vector<double>>& predicted,
                                            const std::vector<std::vector<double>>& target,
                                            int canvas_width = 1280, int canvas_height = 720) {
    if (predicted.empty() || predicted.size() != target.size())
        throw std::invalid_argument("prediction_metrics: need matching nonempty sets");
    PredictionMetrics m;
    double abs_sum = 0.0, sq_sum = 0.0, t_sum = 0.0, t_sq_sum = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i].size() != target[i].size() || predicted[i].size() % 2 != 0)
            throw std::invalid_argument("prediction_metrics: ragged coordinate rows");
        for (std::size_t c = 0; c < predicted[i].size(); ++c) {
            const double scale = c % 2 == 0 ? canvas_width : canvas_height;
            const double err = (predicted[i][c] - target[i][c]) * scale;
            const double t = target[i][c] * scale;
            abs_sum += std::abs(err);
            sq_sum += err * err;
            t_sum += t;
            t_sq_sum += t * t;
            ++m.coordinates;
        }
    }
    const auto n = static_cast<double>(m.coordinates);
    m.mae_px = abs_sum / n;
    m.mse_px2 = sq_sum / n;
    const double t_var = t_sq_sum / n - (t_sum / n) * (t_sum / n);
    if (t_var > 0.0) m.r2 = 1.0 - (sq_sum / n) / t_var;
    return m;
}

// --- SER sweep -------------------------------------------------------------------

// One frame through modem and channel; empty decode counts as total loss.
inline double frame_trial_ser(ModemConfig::Scheme scheme, double rate_kbps, const ChannelConfig& channel,
                              std::uint64_t payload_seed) {
    ModemConfig base;
    base.scheme = scheme;
    const ModemConfig cfg = modem_preset_kbps(rate_kbps, base);
    const Modem modem(cfg);

    std::mt19937_64 rng(payload_seed);
    FramePayload payload;
    payload.frame_type = FrameType::Complete;
    payload.symbols.resize(static_cast<std::size_t>(payload_symbol_count(FrameType::Complete)));
    for (auto& s : payload.symbols) s = static_cast<std::uint8_t>(rng() & 15u);

    AudioBuffer audio = modem.build_frame(payload);
    audio.samples.insert(audio.samples.begin(), 1200, 0.0);
    audio.samples.insert(audio.samples.end(), 1200, 0.0);
    const AudioBuffer received = apply_channel(audio, channel);
    const DecodeResult decoded = decode_audio(received, cfg);
    if (decoded.frames.empty()) return 1.0;
    return ser(payload.symbols, decoded.frames.front().payload.symbols);
}

inline double mean_cell_ser(ModemConfig::Scheme scheme, double rate_kbps, const ChannelConfig& channel,
                            int seeds, std::uint64_t payload_seed_base = 7100) {
    if (seeds < 1) throw std::invalid_argument("mean_cell_ser: need at least one seed");
    double acc = 0.0;
    for (int s = 0; s < seeds; ++s)
        acc += frame_trial_ser(scheme, rate_kbps, channel, payload_seed_base + static_cast<std::uint64_t>(s));
    return acc / seeds;
}

struct SweepCell {
    double frame_ms = 20.0;
    double bitrate_kbps = 64.0;
};

struct SweepConfig {
    std::vector<double> rates_kbps = {1.5, 3.0, 6.0};
    std::vector<SweepCell> cells = {{60, 128}, {60, 64}, {60, 32}, {20, 128}, {20, 64},
                                    {20, 32},  {10, 128}, {10, 64}, {10, 32}};
    bool include_identity = true;
    bool include_fsk = true;
    int seeds = 20;
    std::uint64_t payload_seed_base = 7100;
};

struct SweepRow {
    std::string scheme;
    double rate_kbps = 0.0;
    std::string codec;  // "identity" or "emulated"
    double frame_ms = 0.0;
    double bitrate_kbps = 0.0;
    int seeds = 0;
    double mean_ser = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
};

inline SweepResult ser_sweep(const SweepConfig& cfg) {
    if (cfg.seeds < 1) throw std::invalid_argument("ser_sweep: need at least one seed");
    if (cfg.rates_kbps.empty()) throw std::invalid_argument("ser_sweep: no data rates");

    std::vector<ModemConfig::Scheme> schemes = {ModemConfig::Scheme::Css};
    if (cfg.include_fsk) schemes.push_back(ModemConfig::Scheme::Fsk);

    SweepResult result;
    for (const auto scheme : schemes) {
        const std::string scheme_name = scheme == ModemConfig::Scheme::Css ? "css" : "fsk";
        for (const double rate : cfg.rates_kbps) {
            if (cfg.include_identity) {
                ChannelConfig identity;
                identity.codec_mode = ChannelConfig::CodecMode::Identity;
                SweepRow row;
                row.scheme = scheme_name;
                row.rate_kbps = rate;
                row.codec = "identity";
                row.seeds = cfg.seeds;
                row.mean_ser = mean_cell_ser(scheme, rate, identity, cfg.seeds, cfg.payload_seed_base);
                result.rows.push_back(std::move(row));
            }
            for (const auto& cell : cfg.cells) {
                ChannelConfig channel;
                channel.schedule.segments = {CodecSegment{0.0, cell.frame_ms, cell.bitrate_kbps}};
                SweepRow row;
                row.scheme = scheme_name;
                row.rate_kbps = rate;
                row.codec = "emulated";
                row.frame_ms = cell.frame_ms;
                row.bitrate_kbps = cell.bitrate_kbps;
                row.seeds = cfg.seeds;
                row.mean_ser = mean_cell_ser(scheme, rate, channel, cfg.seeds, cfg.payload_seed_base);
                result.rows.push_back(std::move(row));
            }
        }
    }
    return result;
}

inline std::string sweep_csv(const SweepResult& result) {
    std::string out = "scheme,rate_kbps,codec,frame_ms,bitrate_kbps,seeds,mean_ser\n";
    char line[160];
    for (const auto& r : result.rows) {
        std::snprintf(line, sizeof(line), "%s,%g,%s,%g,%g,%d,%.6f\n", r.scheme.c_str(), r.rate_kbps,
                      r.codec.c_str(), r.frame_ms, r.bitrate_kbps, r.seeds, r.mean_ser);
        out += line;
    }
    return out;
}

// --- pipeline ---------------------------------------------------------------------

struct PipelineConfig {
    ModemConfig modem;
    double data_rate_kbps = 6.0;  // preset: 1.5, 3, or 6
    ChannelConfig channel;
    std::string input_pose_file;
    std::string output_dir;       // empty: no files written
    std::string predictor_path;   // empty: hands expanded by interpolation
    std::string detector_path;    // empty: no error filtering
    bool render_frames = false;
    int canvas_width = 1280;
    int canvas_height = 720;
    int pad_samples = 1200;       // silence around the transmitted stream
};

struct MetricsReport {
    double ser = 0.0;
    std::size_t symbols_sent = 0;
    std::size_t symbol_errors = 0;
    std::size_t frames_sent = 0;
    std::size_t frames_received = 0;
    std::size_t frames_dropped = 0;
    std::size_t frames_unreconstructed = 0;  // decoded but missing their reference
    std::size_t frames_flagged = 0;          // detector-rejected
    std::size_t frames_displayed = 0;
    std::optional<JointErrorStats> joints;           // over displayed frames
    std::optional<PredictionMetrics> hand_recon;     // full 21-landmark hands vs truth
    double audio_seconds = 0.0;
    double poses_per_second = 0.0;
};

namespace harness_detail {

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("pipeline [") + name + "]: " + e.what());
    }
}

inline nlohmann::json report_to_json(const MetricsReport& r) {
    nlohmann::json j;
    j["ser"] = r.ser;
    j["symbols_sent"] = r.symbols_sent;
    j["symbol_errors"] = r.symbol_errors;
    j["frames"] = {{"sent", r.frames_sent},
                   {"received", r.frames_received},
                   {"dropped", r.frames_dropped},
                   {"unreconstructed", r.frames_unreconstructed},
                   {"flagged", r.frames_flagged},
                   {"displayed", r.frames_displayed}};
    if (r.joints) {
        nlohmann::json slots = nlohmann::json::array();
        for (int s = 0; s < kTransmitSlots; ++s) {
            if (r.joints->per_slot_count[static_cast<std::size_t>(s)] == 0)
                slots.push_back(nullptr);
            else
                slots.push_back(r.joints->per_slot_mean_px[static_cast<std::size_t>(s)]);
        }
        j["joint_error_px"] = {{"body_mean", r.joints->body_mean_px},
                               {"hand_mean", r.joints->hand_mean_px},
                               {"overall_mean", r.joints->overall_mean_px},
                               {"worst_slot", r.joints->worst_slot},
                               {"worst_slot_mean", r.joints->worst_slot_mean_px},
                               {"per_slot_mean", slots},
                               {"frames_compared", r.joints->frames_compared}};
    }
    if (r.hand_recon) {
        j["hand_reconstruction_px"] = {{"mae", r.hand_recon->mae_px},
                                       {"mse", r.hand_recon->mse_px2},
                                       {"coordinates", r.hand_recon->coordinates}};
        if (r.hand_recon->r2) j["hand_reconstruction_px"]["r2"] = *r.hand_recon->r2;
    }
    j["audio_seconds"] = r.audio_seconds;
    j["poses_per_second"] = r.poses_per_second;
    return j;
}

inline std::string report_summary(const MetricsReport& r) {
    char buf[256];
    std::string out;
    std::snprintf(buf, sizeof(buf), "frames: sent %zu, received %zu, dropped %zu, flagged %zu, displayed %zu\n",
                  r.frames_sent, r.frames_received, r.frames_dropped, r.frames_flagged, r.frames_displayed);
    out += buf;
    std::snprintf(buf, sizeof(buf), "symbols: %zu sent, %zu errors, ser %.6f\n", r.symbols_sent,
                  r.symbol_errors, r.ser);
    out += buf;
    if (r.joints) {
        std::snprintf(buf, sizeof(buf),
                      "joint error px: body %.3f, hand %.3f, overall %.3f (worst slot %d at %.3f)\n",
                      r.joints->body_mean_px, r.joints->hand_mean_px, r.joints->overall_mean_px,
                      r.joints->worst_slot, r.joints->worst_slot_mean_px);
        out += buf;
    }
    if (r.hand_recon) {
        const std::string r2 =
            r.hand_recon->r2 ? ", r2 " + std::to_string(*r.hand_recon->r2) : std::string();
        std::snprintf(buf, sizeof(buf), "hand reconstruction px: mae %.3f, mse %.3f%s\n",
                      r.hand_recon->mae_px, r.hand_recon->mse_px2, r2.c_str());
        out += buf;
    }
    std::snprintf(buf, sizeof(buf), "throughput: %.2f poses/s over %.2f s of audio\n", r.poses_per_second,
                  r.audio_seconds);
    out += buf;
    return out;
}

}  // namespace harness_detail

inline MetricsReport run_pipeline(const PipelineConfig& cfg, const std::vector<FullPose>& poses) {
    namespace fs = std::filesystem;
    if (poses.empty()) throw std::invalid_argument("pipeline [input]: no poses");
    if (cfg.canvas_width < 1 || cfg.canvas_height < 1)
        throw std::invalid_argument("pipeline [render]: zero canvas");

    const ModemConfig modem_cfg = harness_detail::stage("modem", [&] {
        return modem_preset_kbps(cfg.data_rate_kbps, cfg.modem);
    });
    const Modem modem(modem_cfg);

    std::optional<PredictorModel> predictor;
    if (!cfg.predictor_path.empty())
        predictor = harness_detail::stage("models", [&] { return load_predictor(cfg.predictor_path); });
    std::optional<DetectorModel> detector;
    if (!cfg.detector_path.empty())
        detector = harness_detail::stage("models", [&] { return load_detector(cfg.detector_path); });

    // encode + transmit
    struct SentFrame {
        FramePayload payload;
        TransmitPose truth;
        const FullPose* full = nullptr;
        std::size_t start = 0;  // sample index of the frame's delimiter
        std::size_t samples = 0;
    };
    std::vector<SentFrame> sent(poses.size());
    AudioBuffer tx;
    tx.sample_rate = modem_cfg.sample_rate;
    tx.samples.assign(static_cast<std::size_t>(cfg.pad_samples), 0.0);
    harness_detail::stage("encode", [&] {
        PoseEncoder encoder;
        for (std::size_t i = 0; i < poses.size(); ++i) {
            sent[i].payload = encoder.encode(poses[i]).payload;
            sent[i].truth = select_keypoints(poses[i]);
            sent[i].full = &poses[i];
            sent[i].start = tx.samples.size();
            const AudioBuffer frame = modem.build_frame(sent[i].payload);
            sent[i].samples = frame.samples.size();
            tx.samples.insert(tx.samples.end(), frame.samples.begin(), frame.samples.end());
        }
        return 0;
    });
    tx.samples.insert(tx.samples.end(), static_cast<std::size_t>(cfg.pad_samples), 0.0);

    MetricsReport report;
    report.frames_sent = sent.size();
    report.audio_seconds = static_cast<double>(tx.samples.size()) / modem_cfg.sample_rate;
    report.poses_per_second = static_cast<double>(sent.size()) / report.audio_seconds;

    const AudioBuffer rx = harness_detail::stage("channel", [&] { return apply_channel(tx, cfg.channel); });
    const DecodeResult decoded =
        harness_detail::stage("decode", [&] { return decode_audio(rx, modem_cfg); });

    // out-of-band alignment: frames pair with the nearest expected start
    struct ReceivedFrame {
        std::size_t sent_index = 0;
        const DecodedFrame* frame = nullptr;
    };
    std::vector<ReceivedFrame> matched;
    {
        std::size_t k = 0;
        for (const auto& d : decoded.frames) {
            while (k + 1 < sent.size() &&
                   (d.frame_start > sent[k + 1].start
                        ? d.frame_start - sent[k + 1].start
                        : sent[k + 1].start - d.frame_start) <=
                       (d.frame_start > sent[k].start ? d.frame_start - sent[k].start
                                                      : sent[k].start - d.frame_start))
                ++k;
            const std::size_t gap =
                d.frame_start > sent[k].start ? d.frame_start - sent[k].start : sent[k].start - d.frame_start;
            if (gap <= sent[k].samples / 2 && (matched.empty() || matched.back().sent_index < k))
                matched.push_back({k, &d});
        }
    }
    report.frames_received = matched.size();
    report.frames_dropped = report.frames_sent - report.frames_received;

    // symbol accounting over matched frames; unmatched sent frames count in
    // frame loss, not SER, mirroring a receiver that knows what was scheduled
    for (const auto& m : matched) {
        const auto& s = sent[m.sent_index].payload.symbols;
        const auto& r = m.frame->payload.symbols;
        const std::size_t overlap = std::min(s.size(), r.size());
        std::size_t errors = std::max(s.size(), r.size()) - overlap;
        for (std::size_t i = 0; i < overlap; ++i) errors += s[i] != r[i] ? 1 : 0;
        report.symbols_sent += std::max(s.size(), r.size());
        report.symbol_errors += errors;
    }
    report.ser = report.symbols_sent == 0
                     ? 0.0
                     : static_cast<double>(report.symbol_errors) / static_cast<double>(report.symbols_sent);

    // reconstruct, filter, render
    struct DisplayFrame {
        std::size_t sent_index = 0;
        TransmitPose pose;
        bool flagged = false;
        double detector_loss = 0.0;
    };
    std::vector<DisplayFrame> displayed;
    PoseAssembler assembler;
    for (const auto& m : matched) {
        const auto assembled = assembler.assemble(unpack_payload(m.frame->payload));
        if (!assembled) {
            ++report.frames_unreconstructed;
            continue;
        }
        DisplayFrame frame;
        frame.sent_index = m.sent_index;
        frame.pose = dequantize(*assembled);
        if (detector && frame.pose.left_present && frame.pose.right_present) {
            const Detection d = detect_error(transmit_vector(frame.pose), *detector);
            frame.flagged = d.is_erroneous;
            frame.detector_loss = d.loss;
        }
        if (frame.flagged) {
            ++report.frames_flagged;
            continue;
        }
        displayed.push_back(std::move(frame));
    }
    report.frames_displayed = displayed.size();

    if (!displayed.empty()) {
        std::vector<TransmitPose> truth_seq, rx_seq;
        truth_seq.reserve(displayed.size());
        rx_seq.reserve(displayed.size());
        for (const auto& d : displayed) {
            truth_seq.push_back(sent[d.sent_index].truth);
            rx_seq.push_back(d.pose);
        }
        report.joints = joint_error(truth_seq, rx_seq, cfg.canvas_width, cfg.canvas_height);

        std::vector<std::vector<double>> recon, truth_hands;
        for (const auto& d : displayed) {
            const FullPose& full = *sent[d.sent_index].full;
            for (const Hand side : {Hand::Left, Hand::Right}) {
                const bool present = side == Hand::Left ? d.pose.left_present : d.pose.right_present;
                if (!present) continue;
                const auto& truth_hand = side == Hand::Left ? full.left_hand : full.right_hand;
                bool all_visible = true;
                for (const auto& kp : truth_hand) all_visible = all_visible && kp.visible;
                if (!all_visible) continue;
                const auto pts = hand_points(d.pose, side);
                const auto expanded =
                    predictor ? predict_hand(pts, *predictor, side) : interpolate_hand(pts);
                recon.push_back(flatten_points(expanded.data(), expanded.size()));
                std::vector<double> t(42);
                for (int i = 0; i < 21; ++i) {
                    t[2 * i] = truth_hand[i].x;
                    t[2 * i + 1] = truth_hand[i].y;
                }
                truth_hands.push_back(std::move(t));
            }
        }
        if (!recon.empty())
            report.hand_recon =
                prediction_metrics(recon, truth_hands, cfg.canvas_width, cfg.canvas_height);
    }

    if (!cfg.output_dir.empty()) {
        harness_detail::stage("report", [&] {
            fs::create_directories(cfg.output_dir);
            std::ofstream js(fs::path(cfg.output_dir) / "report.json");
            js << harness_detail::report_to_json(report).dump(2) << "\n";
            std::ofstream txt(fs::path(cfg.output_dir) / "report.txt");
            txt << harness_detail::report_summary(report);
            if (!js.good() || !txt.good())
                throw std::runtime_error("cannot write report files to " + cfg.output_dir);
            return 0;
        });
        if (cfg.render_frames) {
            harness_detail::stage("render", [&] {
                const fs::path frame_dir = fs::path(cfg.output_dir) / "frames";
                fs::create_directories(frame_dir);
                nlohmann::json index = nlohmann::json::array();
                for (const auto& d : displayed) {
                    const RenderPose rp =
                        assemble_render_pose(d.pose, predictor ? &*predictor : nullptr);
                    const Image img = render_skeleton(rp, cfg.canvas_width, cfg.canvas_height);
                    char name[48];
                    std::snprintf(name, sizeof(name), "frame_%05zu.png", d.sent_index);
                    write_png((frame_dir / name).string(), img);
                    nlohmann::json entry;
                    entry["seq"] = d.sent_index;
                    entry["file"] = std::string("frames/") + name;
                    entry["t_ms"] = sent[d.sent_index].full->t_ms;
                    entry["flagged"] = d.flagged;
                    if (detector) entry["detector_loss"] = d.detector_loss;
                    index.push_back(std::move(entry));
                }
                std::ofstream idx(fs::path(cfg.output_dir) / "index.json");
                idx << index.dump(2) << "\n";
                if (!idx.good()) throw std::runtime_error("cannot write frame index");
                return 0;
            });
        }
    }
    return report;
}

inline MetricsReport run_pipeline(const PipelineConfig& cfg) {
    const auto poses = harness_detail::stage(
        "input", [&] { return read_pose_jsonl(cfg.input_pose_file); });
    return run_pipeline(cfg, poses);
}

}  // namespace chirppose
