#pragma once

// Receiver-side pose processing: autoencoder error detection with a PCA
// baseline, learned hand-keypoint prediction with linear interpolation and
// linear regression baselines, channel-noise estimation, and skeleton
// rasterization.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include <chirppose/image.hpp>
#include <chirppose/pose.hpp>
#include <chirppose/tinynn.hpp>

namespace chirppose {

// --- pose vectorization ------------------------------------------------------

// Flattens all 32 transmit slots to {x0, y0, x1, y1, ...}. The detector
// consumes complete poses, so both hands must be present.
inline std::vector<double> transmit_vector(const TransmitPose& pose) {
    if (!pose.left_present || !pose.right_present)
        throw std::invalid_argument("transmit_vector: needs a complete pose with both hands");
    std::vector<double> v(2 * kTransmitSlots);
    for (int s = 0; s < kTransmitSlots; ++s) {
        v[2 * s] = pose.slots[s].x;
        v[2 * s + 1] = pose.slots[s].y;
    }
    return v;
}

inline std::array<Point, kHandSlots> hand_points(const TransmitPose& pose, Hand side) {
    if (side == Hand::Left ? !pose.left_present : !pose.right_present)
        throw std::invalid_argument("hand_points: requested hand is absent");
    const int base = side == Hand::Left ? kLeftSlotBase : kRightSlotBase;
    std::array<Point, kHandSlots> out{};
    for (int i = 0; i < kHandSlots; ++i) out[i] = pose.slots[base + i];
    return out;
}

inline std::vector<double> flatten_points(const Point* pts, std::size_t count) {
    std::vector<double> v(2 * count);
    for (std::size_t i = 0; i < count; ++i) {
        v[2 * i] = pts[i].x;
        v[2 * i + 1] = pts[i].y;
    }
    return v;
}

// --- error detector ----------------------------------------------------------

struct DetectorDims {
    int hidden = 64;
    int latent = 16;
};

struct DetectorModel {
    MlpModel autoencoder;
    double loss_threshold = 0.0;
};

struct Detection {
    bool is_erroneous = false;
    double loss = 0.0;
};

// Trains a reconstruction autoencoder on known-good poses and sets the
// decision threshold 20% above the worst training reconstruction loss.
inline DetectorModel fit_detector(const std::vector<std::vector<double>>& clean_poses,
                                  DetectorDims dims = {}, TrainConfig cfg = {}) {
    if (clean_poses.empty()) throw std::invalid_argument("fit_detector: empty dataset");
    if (dims.hidden < 1 || dims.latent < 1)
        throw std::invalid_argument("fit_detector: layer sizes must be positive");
    const std::size_t dim = clean_poses.front().size();
    if (dim == 0) throw std::invalid_argument("fit_detector: zero-width pose vectors");

    Dataset data;
    data.inputs = clean_poses;
    data.targets = clean_poses;

    auto ae = make_mlp({dim, static_cast<std::size_t>(dims.hidden), static_cast<std::size_t>(dims.latent),
                        static_cast<std::size_t>(dims.hidden), dim},
                       {Activation::ReLU, Activation::Identity, Activation::ReLU, Activation::Identity},
                       cfg.seed);
    TrainResult result = train(std::move(ae), data, cfg);

    double worst = 0.0;
    for (const auto& x : clean_poses)
        worst = std::max(worst, loss_mse(forward(result.model, x), x));

    DetectorModel det;
    det.autoencoder = std::move(result.model);
    det.loss_threshold = 1.2 * worst;
    return det;
}

inline Detection detect_error(const std::vector<double>& pose, const DetectorModel& det) {
    const double loss = loss_mse(forward(det.autoencoder, pose), pose);
    return {loss > det.loss_threshold, loss};
}

inline constexpr const char* kDetectorFormatName = "chirppose-detector";
inline constexpr int kDetectorFormatVersion = 1;

inline void save_detector(const DetectorModel& det, const std::string& path) {
    nlohmann::json j;
    j["format"] = kDetectorFormatName;
    j["version"] = kDetectorFormatVersion;
    j["loss_threshold"] = det.loss_threshold;
    j["autoencoder"] = mlp_to_json(det.autoencoder);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_detector: cannot write " + path);
    out << j.dump(2) << "\n";
    if (!out.good()) throw std::runtime_error("save_detector: write failed for " + path);
}

inline DetectorModel load_detector(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_detector: cannot read " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("load_detector: malformed file " + path + ": " + e.what());
    }
    if (!j.contains("format") || j["format"] != kDetectorFormatName)
        throw std::runtime_error("load_detector: not a " + std::string(kDetectorFormatName) + " file: " + path);
    if (!j.contains("version") || j["version"].get<int>() != kDetectorFormatVersion)
        throw std::runtime_error("load_detector: unsupported format version in " + path);
    DetectorModel det;
    try {
        det.loss_threshold = j.at("loss_threshold").get<double>();
        det.autoencoder = mlp_from_json(j.at("autoencoder"));
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("load_detector: malformed file " + path + ": " + e.what());
    }
    return det;
}

// --- PCA baseline detector ---------------------------------------------------

namespace renderer_detail {

// Cyclic Jacobi eigendecomposition of a symmetric matrix (row-major, n x n).
// Returns eigenvalues and matching eigenvectors (rows), sorted descending.
inline std::pair<std::vector<double>, std::vector<double>> symmetric_eigen(std::vector<double> a,
                                                                           std::size_t n) {
    std::vector<double> v(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

    const auto off_diagonal = [&] {
        double s = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) s += a[p * n + q] * a[p * n + q];
        return s;
    };

    double norm = 0.0;
    for (double x : a) norm += x * x;
    const double tol = 1e-24 * std::max(norm, 1e-300);

    for (int sweep = 0; sweep < 100 && off_diagonal() > tol; ++sweep) {
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (apq == 0.0) continue;
                const double tau = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                a[p * n + p] -= t * apq;
                a[q * n + q] += t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (i == p || i == q) continue;
                    const double aip = a[i * n + p];
                    const double aiq = a[i * n + q];
                    a[i * n + p] = c * aip - s * aiq;
                    a[p * n + i] = a[i * n + p];
                    a[i * n + q] = s * aip + c * aiq;
                    a[q * n + i] = a[i * n + q];
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = v[i * n + p];
                    const double viq = v[i * n + q];
                    v[i * n + p] = c * vip - s * viq;
                    v[i * n + q] = s * vip + c * viq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return a[x * n + x] > a[y * n + y]; });

    std::vector<double> evals(n);
    std::vector<double> evecs(n * n);
    for (std::size_t k = 0; k < n; ++k) {
        evals[k] = a[order[k] * n + order[k]];
        for (std::size_t i = 0; i < n; ++i) evecs[k * n + i] = v[i * n + order[k]];
    }
    return {std::move(evals), std::move(evecs)};
}

}  // namespace renderer_detail

struct PcaDetector {
    std::size_t dim = 0;
    std::size_t n_components = 0;
    std::vector<double> mean;        // dim
    std::vector<double> components;  // n_components x dim, descending variance
    double loss_threshold = 0.0;
};

inline double pca_score(const std::vector<double>& pose, const PcaDetector& det) {
    if (pose.size() != det.dim) throw std::invalid_argument("pca_score: input length mismatch");
    std::vector<double> centered(det.dim);
    for (std::size_t i = 0; i < det.dim; ++i) centered[i] = pose[i] - det.mean[i];
    std::vector<double> recon(det.dim, 0.0);
    for (std::size_t k = 0; k < det.n_components; ++k) {
        const double* comp = det.components.data() + k * det.dim;
        double coeff = 0.0;
        for (std::size_t i = 0; i < det.dim; ++i) coeff += comp[i] * centered[i];
        for (std::size_t i = 0; i < det.dim; ++i) recon[i] += coeff * comp[i];
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < det.dim; ++i) {
        const double d = centered[i] - recon[i];
        acc += d * d;
    }
    return acc / static_cast<double>(det.dim);
}

inline PcaDetector fit_pca_detector(const std::vector<std::vector<double>>& clean_poses,
                                    std::size_t n_components) {
    if (clean_poses.empty()) throw std::invalid_argument("fit_pca_detector: empty dataset");
    const std::size_t dim = clean_poses.front().size();
    if (dim == 0) throw std::invalid_argument("fit_pca_detector: zero-width pose vectors");
    if (n_components < 1 || n_components > dim)
        throw std::invalid_argument("fit_pca_detector: component count outside [1, dim]");
    for (const auto& row : clean_poses)
        if (row.size() != dim) throw std::invalid_argument("fit_pca_detector: ragged dataset");

    PcaDetector det;
    det.dim = dim;
    det.n_components = n_components;
    det.mean.assign(dim, 0.0);
    const double inv_n = 1.0 / static_cast<double>(clean_poses.size());
    for (const auto& row : clean_poses)
        for (std::size_t i = 0; i < dim; ++i) det.mean[i] += row[i] * inv_n;

    std::vector<double> cov(dim * dim, 0.0);
    for (const auto& row : clean_poses) {
        for (std::size_t i = 0; i < dim; ++i) {
            const double di = row[i] - det.mean[i];
            for (std::size_t j = i; j < dim; ++j) cov[i * dim + j] += di * (row[j] - det.mean[j]);
        }
    }
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = i; j < dim; ++j) {
            cov[i * dim + j] *= inv_n;
            cov[j * dim + i] = cov[i * dim + j];
        }

    auto [evals, evecs] = renderer_detail::symmetric_eigen(std::move(cov), dim);
    det.components.assign(evecs.begin(), evecs.begin() + static_cast<std::ptrdiff_t>(n_components * dim));

    double worst = 0.0;
    for (const auto& row : clean_poses) worst = std::max(worst, pca_score(row, det));
    det.loss_threshold = 1.2 * worst;
    return det;
}

inline Detection pca_detect(const std::vector<double>& pose, const PcaDetector& det) {
    const double loss = pca_score(pose, det);
    return {loss > det.loss_threshold, loss};
}

// --- hand keypoint prediction --------------------------------------------------

constexpr std::size_t kPredictorInputs = 2 * kHandSlots;  // 24
constexpr std::size_t kPredictorOutputs = 42;             // full 21-landmark hand
constexpr std::size_t kPredictorHidden = 128;

struct PredictorModel {
    MlpModel left;
    MlpModel right;
    bool trained_with_noise = false;
    double noise_mean_px = 0.0;
    double noise_std_px = 0.0;
};

// Trains one 24 -> 128 -> 128 -> 42 network per hand. Left uses cfg.seed,
// right uses cfg.seed + 1, so the two do not share initializations.
inline PredictorModel fit_predictor(const Dataset& left_data, const Dataset& right_data,
                                    TrainConfig cfg = {}) {
    for (const Dataset* d : {&left_data, &right_data}) {
        d->validate();
        if (d->inputs[0].size() != kPredictorInputs || d->targets[0].size() != kPredictorOutputs)
            throw std::invalid_argument("fit_predictor: dataset rows must be 24 inputs and 42 targets");
    }
    const std::vector<std::size_t> dims = {kPredictorInputs, kPredictorHidden, kPredictorHidden,
                                           kPredictorOutputs};
    const std::vector<Activation> acts = {Activation::ReLU, Activation::ReLU, Activation::Identity};

    // Noise-aware training is a retraining pass: converge on clean data first,
    // then continue the same schedule with corruption injected. Starting the
    // noisy phase from random weights trades away too much base accuracy.
    const auto fit_hand = [&](const Dataset& data, std::uint64_t seed) {
        TrainConfig clean_cfg = cfg;
        clean_cfg.seed = seed;
        clean_cfg.noise.reset();
        MlpModel net = train(make_mlp(dims, acts, seed), data, clean_cfg).model;
        if (cfg.noise) {
            TrainConfig noise_cfg = cfg;
            noise_cfg.seed = seed + 7;
            net = train(std::move(net), data, noise_cfg).model;
        }
        return net;
    };

    PredictorModel m;
    m.trained_with_noise = cfg.noise.has_value();
    m.left = fit_hand(left_data, cfg.seed);
    m.right = fit_hand(right_data, cfg.seed + 1);
    return m;
}

inline std::vector<double> predict_hand_vector(const std::vector<double>& transmitted,
                                               const PredictorModel& m, Hand side) {
    if (transmitted.size() != kPredictorInputs)
        throw std::invalid_argument("predict_hand: expected 24 input coordinates");
    auto out = forward(side == Hand::Left ? m.left : m.right, transmitted);
    for (double& v : out) v = std::clamp(v, 0.0, 1.0);
    return out;
}

inline std::array<Point, 21> predict_hand(const std::array<Point, kHandSlots>& transmitted,
                                          const PredictorModel& m, Hand side) {
    const auto out = predict_hand_vector(flatten_points(transmitted.data(), transmitted.size()), m, side);
    std::array<Point, 21> hand{};
    for (std::size_t i = 0; i < 21; ++i) hand[i] = {out[2 * i], out[2 * i + 1]};
    return hand;
}

// Places untransmitted joints on straight segments: PIP at 1/3 and DIP at 2/3
// of knuckle -> tip, thumb IP halfway, thumb CMC halfway wrist -> knuckle.
inline std::array<Point, 21> interpolate_hand(const std::array<Point, kHandSlots>& s) {
    const auto lerp = [](Point a, Point b, double t) {
        return Point{a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t};
    };
    std::array<Point, 21> h{};
    h[0] = s[0];  // wrist

    h[2] = s[1];  // thumb MCP
    h[4] = s[2];  // thumb tip
    h[1] = lerp(h[0], h[2], 0.5);
    h[3] = lerp(h[2], h[4], 0.5);

    h[5] = s[3];  // index MCP
    h[6] = s[4];  // index PIP (transmitted)
    h[8] = s[5];  // index tip
    h[7] = lerp(h[5], h[8], 2.0 / 3.0);

    const int mcp_landmark[4] = {9, 13, 17, 0};
    for (int f = 0; f < 3; ++f) {  // middle, ring, pinky
        const int mcp = mcp_landmark[f];
        h[mcp] = s[6 + 2 * f];
        h[mcp + 3] = s[7 + 2 * f];
        h[mcp + 1] = lerp(h[mcp], h[mcp + 3], 1.0 / 3.0);
        h[mcp + 2] = lerp(h[mcp], h[mcp + 3], 2.0 / 3.0);
    }
    return h;
}

inline std::vector<double> interpolate_hand_vector(const std::vector<double>& transmitted) {
    if (transmitted.size() != kPredictorInputs)
        throw std::invalid_argument("interpolate_hand: expected 24 input coordinates");
    std::array<Point, kHandSlots> pts{};
    for (int i = 0; i < kHandSlots; ++i) pts[i] = {transmitted[2 * i], transmitted[2 * i + 1]};
    const auto hand = interpolate_hand(pts);
    return flatten_points(hand.data(), hand.size());
}

inline constexpr const char* kPredictorFormatName = "chirppose-predictor";
inline constexpr int kPredictorFormatVersion = 1;

inline void save_predictor(const PredictorModel& m, const std::string& path) {
    nlohmann::json j;
    j["format"] = kPredictorFormatName;
    j["version"] = kPredictorFormatVersion;
    j["trained_with_noise"] = m.trained_with_noise;
    j["noise_mean_px"] = m.noise_mean_px;
    j["noise_std_px"] = m.noise_std_px;
    j["left"] = mlp_to_json(m.left);
    j["right"] = mlp_to_json(m.right);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_predictor: cannot write " + path);
    out << j.dump(2) << "\n";
    if (!out.good()) throw std::runtime_error("save_predictor: write failed for " + path);
}

inline PredictorModel load_predictor(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_predictor: cannot read " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("load_predictor: malformed file " + path + ": " + e.what());
    }
    if (!j.contains("format") || j["format"] != kPredictorFormatName)
        throw std::runtime_error("load_predictor: not a " + std::string(kPredictorFormatName) +
                                 " file: " + path);
    if (!j.contains("version") || j["version"].get<int>() != kPredictorFormatVersion)
        throw std::runtime_error("load_predictor: unsupported format version in " + path);
    PredictorModel m;
    try {
        m.trained_with_noise = j.at("trained_with_noise").get<bool>();
        m.noise_mean_px = j.at("noise_mean_px").get<double>();
        m.noise_std_px = j.at("noise_std_px").get<double>();
        m.left = mlp_from_json(j.at("left"));
        m.right = mlp_from_json(j.at("right"));
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("load_predictor: malformed file " + path + ": " + e.what());
    }
    return m;
}

// --- linear regression baseline -----------------------------------------------

struct LinearModel {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> coef;  // out x (in + 1), bias last
};

inline std::vector<double> predict_linear(const LinearModel& m, const std::vector<double>& x) {
    if (x.size() != m.in) throw std::invalid_argument("predict_linear: input length mismatch");
    std::vector<double> y(m.out);
    for (std::size_t r = 0; r < m.out; ++r) {
        const double* row = m.coef.data() + r * (m.in + 1);
        double acc = row[m.in];
        for (std::size_t i = 0; i < m.in; ++i) acc += row[i] * x[i];
        y[r] = acc;
    }
    return y;
}

// Least squares via normal equations; a small ridge term keeps duplicated and
// constant columns solvable.
inline LinearModel fit_linear_regression(const Dataset& data, double ridge = 1e-8) {
    data.validate();
    const std::size_t n = data.inputs.size();
    const std::size_t in = data.inputs[0].size();
    const std::size_t out = data.targets[0].size();
    const std::size_t d = in + 1;

    std::vector<double> gram(d * d, 0.0);  // X^T X with bias column
    std::vector<double> moment(d * out, 0.0);
    std::vector<double> xrow(d, 1.0);
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t i = 0; i < in; ++i) xrow[i] = data.inputs[s][i];
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = i; j < d; ++j) gram[i * d + j] += xrow[i] * xrow[j];
            for (std::size_t r = 0; r < out; ++r) moment[i * out + r] += xrow[i] * data.targets[s][r];
        }
    }
    for (std::size_t i = 0; i < d; ++i) {
        gram[i * d + i] += ridge;
        for (std::size_t j = 0; j < i; ++j) gram[i * d + j] = gram[j * d + i];
    }

    // Gaussian elimination with partial pivoting on [gram | moment].
    std::vector<std::size_t> perm(d);
    for (std::size_t i = 0; i < d; ++i) perm[i] = i;
    for (std::size_t col = 0; col < d; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < d; ++r)
            if (std::abs(gram[perm[r] * d + col]) > std::abs(gram[perm[pivot] * d + col])) pivot = r;
        std::swap(perm[col], perm[pivot]);
        const double diag = gram[perm[col] * d + col];
        if (diag == 0.0) throw std::runtime_error("fit_linear_regression: singular normal equations");
        for (std::size_t r = col + 1; r < d; ++r) {
            const double factor = gram[perm[r] * d + col] / diag;
            if (factor == 0.0) continue;
            for (std::size_t j = col; j < d; ++j) gram[perm[r] * d + j] -= factor * gram[perm[col] * d + j];
            for (std::size_t t = 0; t < out; ++t)
                moment[perm[r] * out + t] -= factor * moment[perm[col] * out + t];
        }
    }

    LinearModel m;
    m.in = in;
    m.out = out;
    m.coef.assign(out * d, 0.0);
    for (std::size_t col = d; col-- > 0;) {
        for (std::size_t t = 0; t < out; ++t) {
            double acc = moment[perm[col] * out + t];
            for (std::size_t j = col + 1; j < d; ++j) acc -= gram[perm[col] * d + j] * m.coef[t * d + j];
            m.coef[t * d + col] = acc / gram[perm[col] * d + col];
        }
    }
    return m;
}

// --- channel noise estimation ---------------------------------------------------

struct NoiseParams {
    double mean_px = 0.0;
    double stddev_px = 0.0;
    int canvas_width = 1280;
    int canvas_height = 720;
};

// Pools per-joint Euclidean pixel distances between aligned truth/received
// poses over every slot visible on both sides.
inline NoiseParams estimate_noise_params(const std::vector<std::pair<TransmitPose, TransmitPose>>& pairs,
                                         int canvas_width = 1280, int canvas_height = 720) {
    if (pairs.empty()) throw std::invalid_argument("estimate_noise_params: no pose pairs");
    if (canvas_width < 1 || canvas_height < 1)
        throw std::invalid_argument("estimate_noise_params: zero canvas");

    double sum = 0.0;
    double sum_sq = 0.0;
    std::size_t count = 0;
    for (const auto& [truth, received] : pairs) {
        for (int s = 0; s < kTransmitSlots; ++s) {
            if (!truth.slot_visible[s] || !received.slot_visible[s]) continue;
            const double dx = (received.slots[s].x - truth.slots[s].x) * canvas_width;
            const double dy = (received.slots[s].y - truth.slots[s].y) * canvas_height;
            const double dist = std::hypot(dx, dy);
            sum += dist;
            sum_sq += dist * dist;
            ++count;
        }
    }
    if (count == 0) throw std::invalid_argument("estimate_noise_params: no jointly visible slots");

    NoiseParams p;
    p.canvas_width = canvas_width;
    p.canvas_height = canvas_height;
    p.mean_px = sum / static_cast<double>(count);
    p.stddev_px = std::sqrt(std::max(0.0, sum_sq / static_cast<double>(count) - p.mean_px * p.mean_px));
    return p;
}

// Converts a pixel-scale displacement distribution into normalized-coordinate
// training noise. Scale is the RMS of the canvas dimensions, so a given pixel
// radius maps to one isotropic radius in [0,1]^2.
inline TrainConfig::NoiseInjection noise_injection_from_params(const NoiseParams& p,
                                                               double sample_fraction = 0.5) {
    const double scale = std::sqrt((static_cast<double>(p.canvas_width) * p.canvas_width +
                                    static_cast<double>(p.canvas_height) * p.canvas_height) /
                                   2.0);
    TrainConfig::NoiseInjection noise;
    noise.mean = p.mean_px / scale;
    noise.stddev = p.stddev_px / scale;
    noise.sample_fraction = sample_fraction;
    return noise;
}

// --- skeleton rendering -----------------------------------------------------------

struct RenderPose {
    std::array<Point, kBodySlots> body{};
    std::optional<std::array<Point, 21>> left;
    std::optional<std::array<Point, 21>> right;
};

// Builds a displayable pose from a received transmit subset: body passes
// through untouched, present hands are expanded to all 21 landmarks by the
// predictor when one is supplied, else by interpolation.
inline RenderPose assemble_render_pose(const TransmitPose& pose,
                                       const PredictorModel* predictor = nullptr) {
    RenderPose out;
    for (int s = 0; s < kBodySlots; ++s) out.body[s] = pose.slots[s];
    for (const Hand side : {Hand::Left, Hand::Right}) {
        const bool present = side == Hand::Left ? pose.left_present : pose.right_present;
        if (!present) continue;
        const auto pts = hand_points(pose, side);
        auto& slot = side == Hand::Left ? out.left : out.right;
        slot = predictor ? predict_hand(pts, *predictor, side) : interpolate_hand(pts);
    }
    return out;
}

namespace renderer_detail {

constexpr Rgb kBoneColor = {190, 190, 190};
constexpr Rgb kBodyJointColor = {240, 240, 240};
constexpr Rgb kFingerColors[5] = {
    {231, 76, 60},    // thumb
    {241, 196, 15},   // index
    {46, 204, 113},   // middle
    {52, 152, 219},   // ring
    {155, 89, 182},   // pinky
};

// -1 for the wrist, else 0..4 from thumb to pinky.
inline int finger_of_landmark(int i) { return i == 0 ? -1 : (i - 1) / 4; }

constexpr std::pair<int, int> kBodyEdges[] = {
    {0, 1}, {0, 2},          // nose to shoulders
    {1, 2},                  // shoulder line
    {1, 3}, {3, 5},          // left arm
    {2, 4}, {4, 6},          // right arm
    {1, 7}, {2, 7},          // torso to mid-hip
};

constexpr std::pair<int, int> kPalmEdges[] = {{0, 1}, {0, 5}, {5, 9}, {9, 13}, {13, 17}, {0, 17}};

inline std::pair<int, int> to_pixel(Point p, int width, int height) {
    return {static_cast<int>(std::llround(p.x * width)), static_cast<int>(std::llround(p.y * height))};
}

inline void draw_hand(Image& img, const std::array<Point, 21>& hand, int joint_radius) {
    for (const auto& [a, b] : kPalmEdges) {
        const auto pa = to_pixel(hand[a], img.width, img.height);
        const auto pb = to_pixel(hand[b], img.width, img.height);
        draw_line(img, pa.first, pa.second, pb.first, pb.second, kBoneColor);
    }
    for (int f = 0; f < 5; ++f) {
        const int base = 1 + 4 * f;
        for (int i = base + 1; i < base + 4; ++i) {
            const auto pa = to_pixel(hand[i - 1], img.width, img.height);
            const auto pb = to_pixel(hand[i], img.width, img.height);
            draw_line(img, pa.first, pa.second, pb.first, pb.second, kFingerColors[f]);
        }
    }
    for (int i = 0; i < 21; ++i) {
        const auto p = to_pixel(hand[i], img.width, img.height);
        const int f = finger_of_landmark(i);
        draw_disk(img, p.first, p.second, joint_radius, f < 0 ? kBodyJointColor : kFingerColors[f]);
    }
}

}  // namespace renderer_detail

inline Image render_skeleton(const RenderPose& pose, int width = 1280, int height = 720) {
    if (width < 1 || height < 1) throw std::invalid_argument("render_skeleton: zero canvas");
    Image img(width, height);

    const int body_radius = std::max(2, height / 160);
    const int hand_radius = std::max(1, height / 288);

    for (const auto& [a, b] : renderer_detail::kBodyEdges) {
        const auto pa = renderer_detail::to_pixel(pose.body[a], width, height);
        const auto pb = renderer_detail::to_pixel(pose.body[b], width, height);
        draw_line(img, pa.first, pa.second, pb.first, pb.second, renderer_detail::kBoneColor);
    }
    for (int s = 0; s < kBodySlots; ++s) {
        const auto p = renderer_detail::to_pixel(pose.body[s], width, height);
        draw_disk(img, p.first, p.second, body_radius, renderer_detail::kBodyJointColor);
    }
    if (pose.left) renderer_detail::draw_hand(img, *pose.left, hand_radius);
    if (pose.right) renderer_detail::draw_hand(img, *pose.right, hand_radius);
    return img;
}

}  // namespace chirppose
