#pragma once

// Pose-side data model: full estimator output (33 body + 2x21 hand
// keypoints), the 32-keypoint transmitted subset, 7-bit quantization,
// temporal differencing, and payload bit packing into 4-bit symbols.
//
// Canonical slot order (documented in docs/keypoints.md and frozen by a
// golden test vector): 8 body slots, then 12 left-hand, then 12 right-hand.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace chirppose {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct Keypoint {
    double x = 0.0;
    double y = 0.0;
    bool visible = false;
};

// One frame of pose-estimator output, all coordinates normalized to [0,1].
struct FullPose {
    std::int64_t t_ms = 0;
    std::array<Keypoint, 33> body{};
    std::array<Keypoint, 21> left_hand{};
    std::array<Keypoint, 21> right_hand{};
};

enum class Hand : std::uint8_t { Left, Right };

enum class FrameType : std::uint8_t { Complete, Displacement, OneHand, JustBody };

inline const char* frame_type_name(FrameType t) {
    switch (t) {
        case FrameType::Complete: return "complete";
        case FrameType::Displacement: return "displacement";
        case FrameType::OneHand: return "onehand";
        case FrameType::JustBody: return "justbody";
    }
    return "?";
}

// Source indices in the 33-point body array for the 8 transmitted body slots.
// The mid-hip slot is synthesized as the average of both hips.
namespace body_kp {
constexpr int nose = 0;
constexpr int left_shoulder = 11;
constexpr int right_shoulder = 12;
constexpr int left_elbow = 13;
constexpr int right_elbow = 14;
constexpr int left_wrist = 15;
constexpr int right_wrist = 16;
constexpr int left_hip = 23;
constexpr int right_hip = 24;
}  // namespace body_kp

// The 12 of 21 hand landmarks that go on air: wrist, thumb MCP/tip,
// index MCP/PIP/tip, middle MCP/tip, ring MCP/tip, pinky MCP/tip.
constexpr std::array<int, 12> kHandSubset = {0, 2, 4, 5, 6, 8, 9, 12, 13, 16, 17, 20};

constexpr int kBodySlots = 8;
constexpr int kHandSlots = 12;
constexpr int kTransmitSlots = kBodySlots + 2 * kHandSlots;  // 32
constexpr int kLeftSlotBase = kBodySlots;
constexpr int kRightSlotBase = kBodySlots + kHandSlots;

// Transmitted subset of one frame. Slots for an absent hand are marked
// (present flag false, coordinates NaN) rather than silently zeroed.
struct TransmitPose {
    std::array<Point, kTransmitSlots> slots{};
    std::array<bool, kTransmitSlots> slot_visible{};
    bool left_present = false;
    bool right_present = false;

    int value_count() const {
        return 2 * (kBodySlots + (left_present ? kHandSlots : 0) + (right_present ? kHandSlots : 0));
    }
};

// 7-bit quantized coordinates in canonical order. 64 values for Complete
// (both hands), 40 for OneHand, 16 for JustBody; x then y per slot.
struct QuantizedPose {
    FrameType shape = FrameType::Complete;  // never Displacement
    std::optional<Hand> side;                // set iff shape == OneHand
    std::vector<int> values;
};

// Per-value signed deltas against a retained reference, each in [-4, 3].
struct Displacement {
    std::vector<int> deltas;
};

// Payload symbols for one frame: 4-bit values ready for the modem.
struct FramePayload {
    FrameType frame_type = FrameType::Complete;
    std::optional<Hand> side;
    std::vector<std::uint8_t> symbols;
};

constexpr int kDeltaMin = -4;
constexpr int kDeltaMax = 3;
constexpr int kDefaultDeltaThreshold = 3;

inline int payload_symbol_count(FrameType t) {
    switch (t) {
        case FrameType::Complete: return 112;
        case FrameType::Displacement: return 48;
        case FrameType::OneHand: return 71;  // 70 coordinate symbols + 1 side symbol
        case FrameType::JustBody: return 28;
    }
    throw std::invalid_argument("payload_symbol_count: bad frame type");
}

// --- scalar quantization ---------------------------------------------------

// round(v*127) with halves away from zero; v must be in [0,1] up to 1e-6 slack.
inline int quantize_value(double v) {
    if (!(v >= -1e-6 && v <= 1.0 + 1e-6))
        throw std::domain_error("quantize_value: coordinate " + std::to_string(v) + " outside [0,1]");
    const double clamped = std::clamp(v, 0.0, 1.0);
    const int q = static_cast<int>(std::lround(clamped * 127.0));
    return std::clamp(q, 0, 127);
}

inline double dequantize_value(int q) {
    if (q < 0 || q > 127) throw std::domain_error("dequantize_value: level out of range");
    return static_cast<double>(q) / 127.0;
}

// --- subset selection --------------------------------------------------------

namespace detail {

inline int visible_count(const std::array<Keypoint, 21>& hand) {
    int n = 0;
    for (const auto& k : hand) n += k.visible ? 1 : 0;
    return n;
}

constexpr double kAbsentMark = std::numeric_limits<double>::quiet_NaN();

}  // namespace detail

constexpr int kHandPresenceMinVisible = 6;

// Reduce a FullPose to the 32 transmitted slots. A hand with fewer than
// 6 visible landmarks is absent. Invisible landmarks keep their estimator
// coordinates here; the PoseEncoder substitutes held values for them.
inline TransmitPose select_keypoints(const FullPose& pose) {
    TransmitPose out;

    const auto put = [&](int slot, const Keypoint& k) {
        out.slots[slot] = {k.x, k.y};
        out.slot_visible[slot] = k.visible;
    };
    put(0, pose.body[body_kp::nose]);
    put(1, pose.body[body_kp::left_shoulder]);
    put(2, pose.body[body_kp::right_shoulder]);
    put(3, pose.body[body_kp::left_elbow]);
    put(4, pose.body[body_kp::right_elbow]);
    put(5, pose.body[body_kp::left_wrist]);
    put(6, pose.body[body_kp::right_wrist]);
    const auto& lh = pose.body[body_kp::left_hip];
    const auto& rh = pose.body[body_kp::right_hip];
    out.slots[7] = {(lh.x + rh.x) / 2.0, (lh.y + rh.y) / 2.0};
    out.slot_visible[7] = lh.visible && rh.visible;

    out.left_present = detail::visible_count(pose.left_hand) >= kHandPresenceMinVisible;
    out.right_present = detail::visible_count(pose.right_hand) >= kHandPresenceMinVisible;
    for (int i = 0; i < kHandSlots; ++i) {
        if (out.left_present) {
            put(kLeftSlotBase + i, pose.left_hand[kHandSubset[i]]);
        } else {
            out.slots[kLeftSlotBase + i] = {detail::kAbsentMark, detail::kAbsentMark};
            out.slot_visible[kLeftSlotBase + i] = false;
        }
        if (out.right_present) {
            put(kRightSlotBase + i, pose.right_hand[kHandSubset[i]]);
        } else {
            out.slots[kRightSlotBase + i] = {detail::kAbsentMark, detail::kAbsentMark};
            out.slot_visible[kRightSlotBase + i] = false;
        }
    }
    return out;
}

// Inverse of select_keypoints, up to what the 32 slots can carry: both hips
// land on the transmitted midpoint and untransmitted landmarks stay invisible.
inline FullPose expand_keypoints(const TransmitPose& pose, std::int64_t t_ms = 0) {
    FullPose out;
    out.t_ms = t_ms;

    const auto put = [&](Keypoint& k, int slot) {
        k.x = pose.slots[slot].x;
        k.y = pose.slots[slot].y;
        k.visible = pose.slot_visible[slot];
    };
    put(out.body[body_kp::nose], 0);
    put(out.body[body_kp::left_shoulder], 1);
    put(out.body[body_kp::right_shoulder], 2);
    put(out.body[body_kp::left_elbow], 3);
    put(out.body[body_kp::right_elbow], 4);
    put(out.body[body_kp::left_wrist], 5);
    put(out.body[body_kp::right_wrist], 6);
    put(out.body[body_kp::left_hip], 7);
    put(out.body[body_kp::right_hip], 7);

    for (int i = 0; i < kHandSlots; ++i) {
        if (pose.left_present) put(out.left_hand[kHandSubset[i]], kLeftSlotBase + i);
        if (pose.right_present) put(out.right_hand[kHandSubset[i]], kRightSlotBase + i);
    }
    return out;
}

// --- pose quantization -------------------------------------------------------

inline QuantizedPose quantize(const TransmitPose& pose) {
    QuantizedPose q;
    if (pose.left_present && pose.right_present) {
        q.shape = FrameType::Complete;
    } else if (pose.left_present || pose.right_present) {
        q.shape = FrameType::OneHand;
        q.side = pose.left_present ? Hand::Left : Hand::Right;
    } else {
        q.shape = FrameType::JustBody;
    }

    const auto push_slot = [&](int slot) {
        q.values.push_back(quantize_value(pose.slots[slot].x));
        q.values.push_back(quantize_value(pose.slots[slot].y));
    };
    for (int i = 0; i < kBodySlots; ++i) push_slot(i);
    if (pose.left_present)
        for (int i = 0; i < kHandSlots; ++i) push_slot(kLeftSlotBase + i);
    if (pose.right_present)
        for (int i = 0; i < kHandSlots; ++i) push_slot(kRightSlotBase + i);
    return q;
}

inline TransmitPose dequantize(const QuantizedPose& q) {
    TransmitPose out;
    out.left_present = q.shape == FrameType::Complete || (q.shape == FrameType::OneHand && q.side == Hand::Left);
    out.right_present = q.shape == FrameType::Complete || (q.shape == FrameType::OneHand && q.side == Hand::Right);

    const int expect = 2 * (kBodySlots + (out.left_present ? kHandSlots : 0) + (out.right_present ? kHandSlots : 0));
    if (static_cast<int>(q.values.size()) != expect)
        throw std::invalid_argument("dequantize: value count does not match shape");

    std::size_t v = 0;
    const auto pop_slot = [&](int slot) {
        out.slots[slot].x = dequantize_value(q.values[v++]);
        out.slots[slot].y = dequantize_value(q.values[v++]);
        out.slot_visible[slot] = true;
    };
    for (int i = 0; i < kBodySlots; ++i) pop_slot(i);
    if (out.left_present)
        for (int i = 0; i < kHandSlots; ++i) pop_slot(kLeftSlotBase + i);
    if (out.right_present)
        for (int i = 0; i < kHandSlots; ++i) pop_slot(kRightSlotBase + i);
    for (int i = 0; i < kTransmitSlots; ++i) {
        if (!out.slot_visible[i]) out.slots[i] = {detail::kAbsentMark, detail::kAbsentMark};
    }
    return out;
}

// --- temporal differencing ---------------------------------------------------

// Deltas of current against reference when every one fits within the
// threshold; nullopt means the caller must send a full replacement.
inline std::optional<Displacement> diff_pose(const QuantizedPose& current, const QuantizedPose& reference,
                                             int delta_threshold = kDefaultDeltaThreshold) {
    if (current.values.size() != reference.values.size())
        throw std::invalid_argument("diff_pose: mismatched value counts");
    if (delta_threshold < 0 || delta_threshold > kDeltaMax)
        throw std::invalid_argument("diff_pose: threshold must be in [0,3]");
    Displacement d;
    d.deltas.reserve(current.values.size());
    for (std::size_t i = 0; i < current.values.size(); ++i) {
        const int delta = current.values[i] - reference.values[i];
        if (std::abs(delta) > delta_threshold) return std::nullopt;
        d.deltas.push_back(delta);
    }
    return d;
}

inline QuantizedPose apply_displacement(const QuantizedPose& reference, const Displacement& d) {
    if (reference.values.size() != d.deltas.size())
        throw std::invalid_argument("apply_displacement: mismatched value counts");
    QuantizedPose out = reference;
    for (std::size_t i = 0; i < d.deltas.size(); ++i)
        out.values[i] = std::clamp(reference.values[i] + d.deltas[i], 0, 127);
    return out;
}

// --- payload packing ---------------------------------------------------------

namespace detail {

class BitWriter {
public:
    void put(std::uint32_t value, int width) {
        for (int b = width - 1; b >= 0; --b) bits_.push_back((value >> b) & 1u);
    }
    // Chop into 4-bit symbols, MSB first, zero-padded at the tail.
    std::vector<std::uint8_t> symbols() const {
        std::vector<std::uint8_t> out;
        out.reserve((bits_.size() + 3) / 4);
        for (std::size_t i = 0; i < bits_.size(); i += 4) {
            std::uint8_t s = 0;
            for (std::size_t b = 0; b < 4; ++b)
                s = static_cast<std::uint8_t>((s << 1) | (i + b < bits_.size() ? bits_[i + b] : 0));
            out.push_back(s);
        }
        return out;
    }

private:
    std::vector<std::uint8_t> bits_;
};

class BitReader {
public:
    explicit BitReader(const std::vector<std::uint8_t>& symbols) {
        bits_.reserve(symbols.size() * 4);
        for (auto s : symbols)
            for (int b = 3; b >= 0; --b) bits_.push_back((s >> b) & 1u);
    }
    std::uint32_t get(int width) {
        std::uint32_t v = 0;
        for (int b = 0; b < width; ++b) {
            if (pos_ >= bits_.size()) throw std::out_of_range("BitReader: payload too short");
            v = (v << 1) | bits_[pos_++];
        }
        return v;
    }

private:
    std::vector<std::uint8_t> bits_;
    std::size_t pos_ = 0;
};

inline std::uint8_t side_symbol(Hand h) { return h == Hand::Left ? 0 : 15; }

}  // namespace detail

inline FramePayload pack_payload(const QuantizedPose& pose) {
    FramePayload out;
    out.frame_type = pose.shape;
    out.side = pose.side;
    detail::BitWriter w;
    for (int v : pose.values) {
        if (v < 0 || v > 127) throw std::domain_error("pack_payload: quantized value out of range");
        w.put(static_cast<std::uint32_t>(v), 7);
    }
    out.symbols = w.symbols();
    if (pose.shape == FrameType::OneHand) {
        if (!pose.side) throw std::invalid_argument("pack_payload: OneHand pose without a side");
        out.symbols.insert(out.symbols.begin(), detail::side_symbol(*pose.side));
    }
    if (static_cast<int>(out.symbols.size()) != payload_symbol_count(pose.shape))
        throw std::logic_error("pack_payload: unexpected symbol count");
    return out;
}

inline FramePayload pack_payload(const Displacement& d) {
    if (static_cast<int>(d.deltas.size()) != 64)
        throw std::invalid_argument("pack_payload: displacement must carry 64 deltas");
    FramePayload out;
    out.frame_type = FrameType::Displacement;
    detail::BitWriter w;
    for (int delta : d.deltas) {
        if (delta < kDeltaMin || delta > kDeltaMax)
            throw std::domain_error("pack_payload: delta out of 3-bit range");
        w.put(static_cast<std::uint32_t>(delta) & 0x7u, 3);  // two's complement in 3 bits
    }
    out.symbols = w.symbols();
    if (static_cast<int>(out.symbols.size()) != payload_symbol_count(FrameType::Displacement))
        throw std::logic_error("pack_payload: unexpected displacement symbol count");
    return out;
}

using UnpackedFrame = std::variant<QuantizedPose, Displacement>;

inline UnpackedFrame unpack_payload(const FramePayload& payload) {
    for (auto s : payload.symbols)
        if (s > 15) throw std::domain_error("unpack_payload: symbol exceeds 4 bits");
    if (static_cast<int>(payload.symbols.size()) != payload_symbol_count(payload.frame_type))
        throw std::invalid_argument("unpack_payload: wrong symbol count for frame type");

    if (payload.frame_type == FrameType::Displacement) {
        detail::BitReader r(payload.symbols);
        Displacement d;
        d.deltas.reserve(64);
        for (int i = 0; i < 64; ++i) {
            const auto raw = r.get(3);
            d.deltas.push_back(raw >= 4 ? static_cast<int>(raw) - 8 : static_cast<int>(raw));
        }
        return d;
    }

    QuantizedPose pose;
    pose.shape = payload.frame_type;
    std::vector<std::uint8_t> coord_symbols = payload.symbols;
    if (payload.frame_type == FrameType::OneHand) {
        // A corrupted side symbol still resolves to the nearer codepoint.
        pose.side = coord_symbols.front() < 8 ? Hand::Left : Hand::Right;
        coord_symbols.erase(coord_symbols.begin());
    }
    const int n_values = payload.frame_type == FrameType::Complete ? 64
                       : payload.frame_type == FrameType::OneHand  ? 40
                                                                    : 16;
    detail::BitReader r(coord_symbols);
    pose.values.reserve(n_values);
    for (int i = 0; i < n_values; ++i) pose.values.push_back(static_cast<int>(r.get(7)));
    return pose;
}

// --- sender/receiver state ---------------------------------------------------

// Sender-side wrapper: substitutes held values for momentarily invisible
// keypoints inside present parts and decides Displacement vs full frames.
// Displacement only ever references a Complete-shaped pose (its payload
// carries exactly 64 deltas); any other shape forces a full replacement.
class PoseEncoder {
public:
    explicit PoseEncoder(int delta_threshold = kDefaultDeltaThreshold) : delta_threshold_(delta_threshold) {}

    struct Encoded {
        FramePayload payload;
        QuantizedPose pose;  // quantized pose after displacement resolution
    };

    Encoded encode(const FullPose& full) {
        TransmitPose t = select_keypoints(full);
        for (int i = 0; i < kTransmitSlots; ++i) {
            const bool part_present = i < kBodySlots || (i < kRightSlotBase ? t.left_present : t.right_present);
            if (!part_present) continue;
            if (!t.slot_visible[i] && held_valid_[i]) t.slots[i] = held_[i];
            held_[i] = t.slots[i];
            held_valid_[i] = true;
        }

        QuantizedPose q = quantize(t);
        Encoded out;
        out.pose = q;
        if (q.shape == FrameType::Complete && reference_) {
            if (auto d = diff_pose(q, *reference_, delta_threshold_)) {
                reference_ = apply_displacement(*reference_, *d);
                out.pose = *reference_;  // what the receiver will reconstruct
                out.payload = pack_payload(*d);
                return out;
            }
        }
        reference_ = q.shape == FrameType::Complete ? std::optional<QuantizedPose>(q) : std::nullopt;
        out.payload = pack_payload(q);
        return out;
    }

    void reset() {
        reference_.reset();
        held_valid_.fill(false);
    }

private:
    int delta_threshold_;
    std::optional<QuantizedPose> reference_;
    std::array<Point, kTransmitSlots> held_{};
    std::array<bool, kTransmitSlots> held_valid_{};
};

// Receiver-side mirror of the encoder's reference policy.
class PoseAssembler {
public:
    // Returns the reconstructed pose, or nullopt for a Displacement frame
    // that arrived without a usable Complete reference.
    std::optional<QuantizedPose> assemble(const UnpackedFrame& frame) {
        if (std::holds_alternative<Displacement>(frame)) {
            if (!reference_) return std::nullopt;
            reference_ = apply_displacement(*reference_, std::get<Displacement>(frame));
            return reference_;
        }
        const auto& pose = std::get<QuantizedPose>(frame);
        reference_ = pose.shape == FrameType::Complete ? std::optional<QuantizedPose>(pose) : std::nullopt;
        return pose;
    }

    void reset() { reference_.reset(); }

private:
    std::optional<QuantizedPose> reference_;
};

}  // namespace chirppose
