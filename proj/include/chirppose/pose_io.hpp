#pragma once

// JSON Lines ingestion and emission of pose streams. One object per line:
//   {"t_ms": 0, "body": [[x,y,vis] x33], "left": [[x,y,vis] x21], "right": ...}
// "left"/"right" may be null (hand not tracked). Visibility >= 0.5 marks a
// keypoint visible; visible keypoints must have coordinates in [0,1].

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "chirppose/pose.hpp"

namespace chirppose {

using json = nlohmann::json;

namespace detail {

template <std::size_t N>
inline void parse_keypoints(const json& arr, std::array<Keypoint, N>& out, const char* part, int line_no) {
    const auto fail = [&](const std::string& why) {
        throw std::runtime_error("pose line " + std::to_string(line_no) + ": " + part + " " + why);
    };
    if (!arr.is_array() || arr.size() != N) fail("must be an array of " + std::to_string(N) + " keypoints");
    for (std::size_t i = 0; i < N; ++i) {
        const auto& kp = arr[i];
        if (!kp.is_array() || kp.size() != 3) fail("keypoint " + std::to_string(i) + " must be [x,y,vis]");
        out[i].x = kp[0].get<double>();
        out[i].y = kp[1].get<double>();
        out[i].visible = kp[2].get<double>() >= 0.5;
        if (out[i].visible && !(out[i].x >= 0.0 && out[i].x <= 1.0 && out[i].y >= 0.0 && out[i].y <= 1.0))
            fail("keypoint " + std::to_string(i) + " is visible but outside [0,1]");
    }
}

template <std::size_t N>
inline json keypoints_json(const std::array<Keypoint, N>& kps) {
    json arr = json::array();
    for (const auto& k : kps) arr.push_back({k.x, k.y, k.visible ? 1.0 : 0.0});
    return arr;
}

}  // namespace detail

inline FullPose pose_from_json(const json& j, int line_no = 0) {
    FullPose pose;
    if (!j.is_object()) throw std::runtime_error("pose line " + std::to_string(line_no) + ": not an object");
    pose.t_ms = j.value("t_ms", static_cast<std::int64_t>(0));
    if (!j.contains("body")) throw std::runtime_error("pose line " + std::to_string(line_no) + ": missing body");
    detail::parse_keypoints(j.at("body"), pose.body, "body", line_no);
    if (j.contains("left") && !j.at("left").is_null())
        detail::parse_keypoints(j.at("left"), pose.left_hand, "left", line_no);
    if (j.contains("right") && !j.at("right").is_null())
        detail::parse_keypoints(j.at("right"), pose.right_hand, "right", line_no);
    return pose;
}

inline json pose_to_json(const FullPose& pose) {
    json j;
    j["t_ms"] = pose.t_ms;
    j["body"] = detail::keypoints_json(pose.body);
    j["left"] = detail::keypoints_json(pose.left_hand);
    j["right"] = detail::keypoints_json(pose.right_hand);
    return j;
}

inline std::vector<FullPose> read_pose_jsonl(std::istream& in) {
    std::vector<FullPose> poses;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw std::runtime_error("pose line " + std::to_string(line_no) + ": " + e.what());
        }
        poses.push_back(pose_from_json(j, line_no));
    }
    return poses;
}

inline std::vector<FullPose> read_pose_jsonl(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("read_pose_jsonl: cannot open " + path);
    return read_pose_jsonl(f);
}

inline void write_pose_jsonl(std::ostream& out, const std::vector<FullPose>& poses) {
    for (const auto& p : poses) out << pose_to_json(p).dump() << "\n";
}

inline void write_pose_jsonl(const std::string& path, const std::vector<FullPose>& poses) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_pose_jsonl: cannot open " + path);
    write_pose_jsonl(f, poses);
}

}  // namespace chirppose
