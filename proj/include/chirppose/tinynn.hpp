#pragma once

// Minimal dense feed-forward network engine: forward pass, exact
// backpropagation, seeded mini-batch Adam with optional joint-noise
// injection, and a versioned JSON model format. Training is a pure
// function of (dataset, config, seed); random draws use explicit
// integer-to-unit mappings so results are bit-stable across standard
// library implementations.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace chirppose {

enum class Activation { ReLU, Identity };

struct MlpLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> weights;  // row-major, out x in
    std::vector<double> biases;   // out
    Activation activation = Activation::ReLU;
};

struct MlpModel {
    std::vector<MlpLayer> layers;
    std::uint64_t seed = 0;

    void validate() const {
        if (layers.empty()) throw std::invalid_argument("mlp: needs at least one layer");
        for (std::size_t i = 0; i < layers.size(); ++i) {
            const auto& l = layers[i];
            if (l.in == 0 || l.out == 0) throw std::invalid_argument("mlp: zero layer dimension");
            if (l.weights.size() != l.in * l.out || l.biases.size() != l.out)
                throw std::invalid_argument("mlp: parameter shapes do not match layer dimensions");
            if (i + 1 < layers.size() && l.out != layers[i + 1].in)
                throw std::invalid_argument("mlp: adjacent layer dimensions do not chain");
            for (double w : l.weights)
                if (!std::isfinite(w)) throw std::invalid_argument("mlp: non-finite weight");
            for (double b : l.biases)
                if (!std::isfinite(b)) throw std::invalid_argument("mlp: non-finite bias");
        }
    }

    std::size_t input_dim() const { return layers.front().in; }
    std::size_t output_dim() const { return layers.back().out; }
};

namespace nn_detail {

inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
}

// Box-Muller on explicit uniforms, one value per call.
inline double gaussian(std::mt19937_64& rng) {
    const double u1 = 1.0 - uniform01(rng);  // (0, 1]
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t bound) {
    return std::min(bound - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(bound)));
}

inline double activate(double z, Activation a) { return a == Activation::ReLU ? (z > 0.0 ? z : 0.0) : z; }

// ReLU subgradient at zero is defined as zero.
inline double activate_grad(double z, Activation a) {
    return a == Activation::ReLU ? (z > 0.0 ? 1.0 : 0.0) : 1.0;
}

}  // namespace nn_detail

// Layer sizes dims[0..k]; activations per layer (dims.size()-1 of them).
// Weights start uniform in +-sqrt(6/(fan_in+fan_out)), biases at zero.
inline MlpModel make_mlp(const std::vector<std::size_t>& dims, const std::vector<Activation>& activations,
                         std::uint64_t seed) {
    if (dims.size() < 2) throw std::invalid_argument("make_mlp: need input and output dimensions");
    if (activations.size() != dims.size() - 1)
        throw std::invalid_argument("make_mlp: one activation per layer required");
    MlpModel m;
    m.seed = seed;
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        MlpLayer l;
        l.in = dims[i];
        l.out = dims[i + 1];
        l.activation = activations[i];
        const double limit = std::sqrt(6.0 / static_cast<double>(l.in + l.out));
        l.weights.resize(l.in * l.out);
        for (double& w : l.weights) w = limit * (2.0 * nn_detail::uniform01(rng) - 1.0);
        l.biases.assign(l.out, 0.0);
        m.layers.push_back(std::move(l));
    }
    m.validate();
    return m;
}

inline std::vector<double> forward(const MlpModel& model, const std::vector<double>& x) {
    if (model.layers.empty() || x.size() != model.input_dim())
        throw std::invalid_argument("forward: input length does not match the first layer");
    std::vector<double> a = x;
    std::vector<double> next;
    for (const auto& l : model.layers) {
        next.assign(l.out, 0.0);
        for (std::size_t r = 0; r < l.out; ++r) {
            double z = l.biases[r];
            const double* w = l.weights.data() + r * l.in;
            for (std::size_t c = 0; c < l.in; ++c) z += w[c] * a[c];
            next[r] = nn_detail::activate(z, l.activation);
        }
        a.swap(next);
    }
    return a;
}

inline double loss_mse(const std::vector<double>& pred, const std::vector<double>& target) {
    if (pred.size() != target.size() || pred.empty())
        throw std::invalid_argument("loss_mse: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        acc += d * d;
    }
    return acc / static_cast<double>(pred.size());
}

struct Gradients {
    std::vector<std::vector<double>> weights;  // same layout as the model layers
    std::vector<std::vector<double>> biases;

    void accumulate(const Gradients& g) {
        for (std::size_t l = 0; l < weights.size(); ++l) {
            for (std::size_t i = 0; i < weights[l].size(); ++i) weights[l][i] += g.weights[l][i];
            for (std::size_t i = 0; i < biases[l].size(); ++i) biases[l][i] += g.biases[l][i];
        }
    }

    void scale(double s) {
        for (auto& w : weights)
            for (double& v : w) v *= s;
        for (auto& b : biases)
            for (double& v : b) v *= s;
    }
};

inline Gradients zero_gradients(const MlpModel& model) {
    Gradients g;
    for (const auto& l : model.layers) {
        g.weights.emplace_back(l.weights.size(), 0.0);
        g.biases.emplace_back(l.biases.size(), 0.0);
    }
    return g;
}

// Exact gradient of the mean-squared error at one sample.
inline Gradients backward(const MlpModel& model, const std::vector<double>& x,
                          const std::vector<double>& target) {
    if (x.size() != model.input_dim()) throw std::invalid_argument("backward: input length mismatch");
    if (target.size() != model.output_dim()) throw std::invalid_argument("backward: target length mismatch");

    const std::size_t depth = model.layers.size();
    std::vector<std::vector<double>> pre(depth);   // pre-activations
    std::vector<std::vector<double>> act(depth + 1);
    act[0] = x;
    for (std::size_t li = 0; li < depth; ++li) {
        const auto& l = model.layers[li];
        pre[li].assign(l.out, 0.0);
        act[li + 1].assign(l.out, 0.0);
        for (std::size_t r = 0; r < l.out; ++r) {
            double z = l.biases[r];
            const double* w = l.weights.data() + r * l.in;
            for (std::size_t c = 0; c < l.in; ++c) z += w[c] * act[li][c];
            pre[li][r] = z;
            act[li + 1][r] = nn_detail::activate(z, l.activation);
        }
    }

    Gradients g = zero_gradients(model);
    const std::size_t n = model.output_dim();
    std::vector<double> delta(n);
    for (std::size_t r = 0; r < n; ++r)
        delta[r] = 2.0 * (act[depth][r] - target[r]) / static_cast<double>(n) *
                   nn_detail::activate_grad(pre[depth - 1][r], model.layers[depth - 1].activation);

    for (std::size_t li = depth; li-- > 0;) {
        const auto& l = model.layers[li];
        for (std::size_t r = 0; r < l.out; ++r) {
            g.biases[li][r] = delta[r];
            double* gw = g.weights[li].data() + r * l.in;
            for (std::size_t c = 0; c < l.in; ++c) gw[c] = delta[r] * act[li][c];
        }
        if (li == 0) break;
        const auto& prev = model.layers[li - 1];
        std::vector<double> next(l.in, 0.0);
        for (std::size_t c = 0; c < l.in; ++c) {
            double acc = 0.0;
            for (std::size_t r = 0; r < l.out; ++r) acc += model.layers[li].weights[r * l.in + c] * delta[r];
            next[c] = acc * nn_detail::activate_grad(pre[li - 1][c], prev.activation);
        }
        delta.swap(next);
    }
    return g;
}

struct Dataset {
    std::vector<std::vector<double>> inputs;
    std::vector<std::vector<double>> targets;

    void validate() const {
        if (inputs.empty() || inputs.size() != targets.size())
            throw std::invalid_argument("dataset: needs matching nonempty inputs and targets");
        for (std::size_t i = 0; i < inputs.size(); ++i)
            if (inputs[i].size() != inputs[0].size() || targets[i].size() != targets[0].size())
                throw std::invalid_argument("dataset: ragged sample shapes");
    }
};

struct TrainConfig {
    double learning_rate = 0.001;
    int batch_size = 100;
    int epochs = 50;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::uint64_t seed = 0;

    // Perturbs 1..2 joints (consecutive x,y input pairs) of a fraction of
    // batch samples with a Gaussian-magnitude, uniform-direction
    // displacement. Inputs only; targets stay clean.
    struct NoiseInjection {
        double mean = 0.0;
        double stddev = 0.0;
        double sample_fraction = 0.0;
        int min_joints = 1;
        int max_joints = 2;
    };
    std::optional<NoiseInjection> noise;

    void validate() const {
        if (!(learning_rate > 0.0)) throw std::invalid_argument("train: learning rate must be positive");
        if (batch_size < 1) throw std::invalid_argument("train: batch size must be at least 1");
        if (epochs < 0) throw std::invalid_argument("train: negative epoch count");
        if (noise) {
            if (noise->stddev < 0.0) throw std::invalid_argument("train: negative noise spread");
            if (!(noise->sample_fraction >= 0.0 && noise->sample_fraction <= 1.0))
                throw std::invalid_argument("train: noise fraction must be in [0,1]");
            if (noise->min_joints < 1 || noise->max_joints < noise->min_joints)
                throw std::invalid_argument("train: bad joint count range");
        }
    }
};

struct TrainResult {
    MlpModel model;
    std::vector<double> epoch_mse;  // clean full-dataset loss after each epoch
};

namespace nn_detail {

inline void inject_joint_noise(std::vector<double>& x, const TrainConfig::NoiseInjection& noise,
                               std::mt19937_64& rng) {
    const std::size_t joints = x.size() / 2;
    if (joints == 0) return;
    const auto span = static_cast<std::size_t>(noise.max_joints - noise.min_joints + 1);
    std::size_t count = static_cast<std::size_t>(noise.min_joints) + uniform_index(rng, span);
    count = std::min(count, joints);

    std::vector<std::size_t> pick(joints);
    for (std::size_t i = 0; i < joints; ++i) pick[i] = i;
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + uniform_index(rng, joints - i);
        std::swap(pick[i], pick[j]);
        const double r = noise.mean + noise.stddev * gaussian(rng);
        const double theta = 2.0 * 3.14159265358979323846 * uniform01(rng);
        x[2 * pick[i]] += r * std::cos(theta);
        x[2 * pick[i] + 1] += r * std::sin(theta);
    }
}

}  // namespace nn_detail

inline TrainResult train(MlpModel model, const Dataset& data, const TrainConfig& cfg) {
    cfg.validate();
    model.validate();
    data.validate();
    if (data.inputs[0].size() != model.input_dim() || data.targets[0].size() != model.output_dim())
        throw std::invalid_argument("train: dataset shapes do not match the model");

    std::mt19937_64 rng(cfg.seed);
    Gradients m1 = zero_gradients(model);
    Gradients m2 = zero_gradients(model);
    long long step = 0;

    const std::size_t n = data.inputs.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    TrainResult result;
    std::vector<double> noisy;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = n; i-- > 1;) {
            const std::size_t j = nn_detail::uniform_index(rng, i + 1);
            std::swap(order[i], order[j]);
        }

        for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
            Gradients batch = zero_gradients(model);
            double batch_loss = 0.0;
            for (std::size_t k = start; k < end; ++k) {
                const auto& sample = data.inputs[order[k]];
                const auto& target = data.targets[order[k]];
                const std::vector<double>* input = &sample;
                if (cfg.noise && nn_detail::uniform01(rng) < cfg.noise->sample_fraction) {
                    noisy = sample;
                    nn_detail::inject_joint_noise(noisy, *cfg.noise, rng);
                    input = &noisy;
                }
                batch.accumulate(backward(model, *input, target));
                batch_loss += loss_mse(forward(model, *input), target);
            }
            const double inv = 1.0 / static_cast<double>(end - start);
            batch.scale(inv);
            batch_loss *= inv;
            if (!std::isfinite(batch_loss))
                throw std::runtime_error("train aborted: non-finite loss at epoch " +
                                         std::to_string(epoch) + ", batch " + std::to_string(start));

            ++step;
            const double c1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(step));
            for (std::size_t li = 0; li < model.layers.size(); ++li) {
                auto adam_update = [&](std::vector<double>& p, std::vector<double>& m,
                                       std::vector<double>& v, const std::vector<double>& g) {
                    for (std::size_t i = 0; i < p.size(); ++i) {
                        m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * g[i];
                        v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * g[i] * g[i];
                        p[i] -= cfg.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg.adam_epsilon);
                        if (!std::isfinite(p[i]))
                            throw std::runtime_error("train aborted: non-finite parameter at epoch " +
                                                     std::to_string(epoch));
                    }
                };
                adam_update(model.layers[li].weights, m1.weights[li], m2.weights[li], batch.weights[li]);
                adam_update(model.layers[li].biases, m1.biases[li], m2.biases[li], batch.biases[li]);
            }
        }

        double epoch_loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) epoch_loss += loss_mse(forward(model, data.inputs[i]), data.targets[i]);
        result.epoch_mse.push_back(epoch_loss / static_cast<double>(n));
    }

    result.model = std::move(model);
    return result;
}

// --- model files -----------------------------------------------------------

inline constexpr const char* kMlpFormatName = "chirppose-mlp";
inline constexpr int kMlpFormatVersion = 1;

inline nlohmann::json mlp_to_json(const MlpModel& model) {
    model.validate();
    nlohmann::json j;
    j["format"] = kMlpFormatName;
    j["version"] = kMlpFormatVersion;
    j["seed"] = model.seed;
    j["layers"] = nlohmann::json::array();
    for (const auto& l : model.layers) {
        nlohmann::json lj;
        lj["in"] = l.in;
        lj["out"] = l.out;
        lj["activation"] = l.activation == Activation::ReLU ? "relu" : "identity";
        lj["weights"] = l.weights;
        lj["biases"] = l.biases;
        j["layers"].push_back(std::move(lj));
    }
    return j;
}

inline MlpModel mlp_from_json(const nlohmann::json& j) {
    if (!j.contains("format") || j["format"] != kMlpFormatName)
        throw std::runtime_error(std::string("mlp_from_json: not a ") + kMlpFormatName + " object");
    if (!j.contains("version") || j["version"].get<int>() != kMlpFormatVersion)
        throw std::runtime_error("mlp_from_json: unsupported model format version");

    MlpModel m;
    m.seed = j.value("seed", std::uint64_t{0});
    for (const auto& lj : j.at("layers")) {
        MlpLayer l;
        l.in = lj.at("in").get<std::size_t>();
        l.out = lj.at("out").get<std::size_t>();
        const auto act = lj.at("activation").get<std::string>();
        if (act == "relu")
            l.activation = Activation::ReLU;
        else if (act == "identity")
            l.activation = Activation::Identity;
        else
            throw std::runtime_error("mlp_from_json: unknown activation '" + act + "'");
        l.weights = lj.at("weights").get<std::vector<double>>();
        l.biases = lj.at("biases").get<std::vector<double>>();
        m.layers.push_back(std::move(l));
    }
    m.validate();
    return m;
}

inline void save_mlp(const MlpModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_mlp: cannot write " + path);
    out << mlp_to_json(model).dump(2) << "\n";
    if (!out.good()) throw std::runtime_error("save_mlp: write failed for " + path);
}

inline MlpModel load_mlp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_mlp: cannot read " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("load_mlp: malformed model file " + path + ": " + e.what());
    }
    try {
        return mlp_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("load_mlp: malformed model file " + path + ": " + e.what());
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(std::string(e.what()) + " (" + path + ")");
    }
}

}  // namespace chirppose
