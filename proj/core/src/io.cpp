/*
 * facemotion - joint face detection and facial motion retargeting toolkit.
 *
 * File: core/src/io.cpp
 *
 * Copyright 2026 The facemotion authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "facemotion/io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

static_assert(std::endian::native == std::endian::little,
              "binary tensor formats are little-endian");

namespace facemotion {

namespace {

void write_blob(const std::filesystem::path& path, const char magic[4],
                const std::vector<uint32_t>& dims, const std::vector<double>& values)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path.string());
    out.write(magic, 4);
    out.write(reinterpret_cast<const char*>(dims.data()),
              static_cast<std::streamsize>(dims.size() * sizeof(uint32_t)));
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!out)
        throw std::runtime_error("write failed: " + path.string());
}

std::vector<double> read_blob(const std::filesystem::path& path, const char magic[4],
                              const std::vector<uint32_t>& expected_dims)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::invalid_argument("cannot open for reading: " + path.string());

    std::array<char, 4> got_magic{};
    in.read(got_magic.data(), 4);
    if (!in || std::memcmp(got_magic.data(), magic, 4) != 0)
        throw std::invalid_argument("bad magic in " + path.string());

    std::vector<uint32_t> dims(expected_dims.size());
    in.read(reinterpret_cast<char*>(dims.data()),
            static_cast<std::streamsize>(dims.size() * sizeof(uint32_t)));
    if (!in || dims != expected_dims)
        throw std::invalid_argument("unexpected dimensions in " + path.string());

    size_t count = 1;
    for (uint32_t d : dims)
        count *= d;
    std::vector<double> values(count);
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!in)
        throw std::invalid_argument("truncated blob: " + path.string());
    return values;
}

template <typename Derived>
std::vector<double> to_vector(const Eigen::MatrixBase<Derived>& m)
{
    std::vector<double> v(static_cast<size_t>(m.size()));
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
            v[static_cast<size_t>(i) * m.cols() + j] = m(i, j);
    return v;
}

} // namespace

void save_face_tensor(const FaceTensor& tensor, const std::filesystem::path& path)
{
    write_blob(path, "FT3D", {kVertexCoords, kIdentityDims, kExpressionBases}, tensor.data());
}

FaceTensor load_face_tensor(const std::filesystem::path& path)
{
    FaceTensor tensor;
    tensor.data() = read_blob(path, "FT3D", {kVertexCoords, kIdentityDims, kExpressionBases});
    tensor.validate();
    return tensor;
}

void save_grid_tensor(const GridTensor& grid, const std::filesystem::path& path)
{
    write_blob(path, "GRD1", {kGridSize, kGridSize, kAnchorCount, kSlotLength}, grid.data());
}

GridTensor load_grid_tensor(const std::filesystem::path& path)
{
    GridTensor grid;
    grid.data() = read_blob(path, "GRD1", {kGridSize, kGridSize, kAnchorCount, kSlotLength});
    return grid;
}

nlohmann::json params_to_json(const FaceParams& params)
{
    return {{"w_id", to_vector(params.w_id)},
            {"w_exp", to_vector(params.expression.w_free)},
            {"quat", std::vector<double>{params.pose.rotation.w, params.pose.rotation.x,
                                         params.pose.rotation.y, params.pose.rotation.z}},
            {"t", to_vector(params.pose.translation)},
            {"f", params.pose.focal}};
}

FaceParams params_from_json(const nlohmann::json& j)
{
    FaceParams params;
    const auto w_id = j.at("w_id").get<std::vector<double>>();
    const auto w_exp = j.at("w_exp").get<std::vector<double>>();
    const auto quat = j.at("quat").get<std::vector<double>>();
    const auto t = j.at("t").get<std::vector<double>>();
    if (w_id.size() != kIdentityDims || w_exp.size() != kFreeExpressionDims ||
        quat.size() != 4 || t.size() != 3)
        throw std::invalid_argument("FaceParams JSON: wrong field lengths");
    for (int i = 0; i < kIdentityDims; ++i)
        params.w_id[i] = w_id[i];
    for (int i = 0; i < kFreeExpressionDims; ++i)
        params.expression.w_free[i] = w_exp[i];
    params.pose.rotation = {quat[0], quat[1], quat[2], quat[3]};
    params.pose.translation = {t[0], t[1], t[2]};
    params.pose.focal = j.at("f").get<double>();
    params.validate();
    return params;
}

nlohmann::json landmarks_to_json(const Landmarks2D& landmarks)
{
    nlohmann::json points = nlohmann::json::array();
    for (int v = 0; v < kLandmarkCount; ++v)
        points.push_back({landmarks(v, 0), landmarks(v, 1)});
    return {{"landmarks", points}};
}

Landmarks2D landmarks_from_json(const nlohmann::json& j)
{
    const nlohmann::json& points = j.at("landmarks");
    if (points.size() != kLandmarkCount)
        throw std::invalid_argument("Landmarks JSON: expected 68 points");
    Landmarks2D landmarks;
    for (int v = 0; v < kLandmarkCount; ++v)
    {
        landmarks(v, 0) = points[v].at(0).get<double>();
        landmarks(v, 1) = points[v].at(1).get<double>();
    }
    if (!landmarks.allFinite())
        throw std::invalid_argument("Landmarks JSON: non-finite point");
    return landmarks;
}

nlohmann::json detection_to_json(const DetectionBox& box)
{
    nlohmann::json j = {{"bx", box.bx}, {"by", box.by},  {"bw", box.bw},
                        {"bh", box.bh}, {"obj", box.objectness}};
    j["params"] = params_to_json(box.params);
    j["landmarks"] = landmarks_to_json(box.landmarks)["landmarks"];
    return j;
}

DetectionBox detection_from_json(const nlohmann::json& j)
{
    DetectionBox box;
    box.bx = j.at("bx").get<double>();
    box.by = j.at("by").get<double>();
    box.bw = j.at("bw").get<double>();
    box.bh = j.at("bh").get<double>();
    box.objectness = j.at("obj").get<double>();
    box.params = params_from_json(j.at("params"));
    box.landmarks = landmarks_from_json({{"landmarks", j.at("landmarks")}});
    return box;
}

nlohmann::json eval_box_to_json(const EvalBox& box)
{
    return {{"x0", box.x0}, {"y0", box.y0}, {"x1", box.x1}, {"y1", box.y1},
            {"score", box.score}};
}

EvalBox eval_box_from_json(const nlohmann::json& j)
{
    EvalBox box;
    box.x0 = j.at("x0").get<double>();
    box.y0 = j.at("y0").get<double>();
    box.x1 = j.at("x1").get<double>();
    box.y1 = j.at("y1").get<double>();
    box.score = j.value("score", 1.0);
    box.validate();
    return box;
}

nlohmann::json fit_result_to_json(const FitResult& result)
{
    nlohmann::json j = {{"final_rmse", result.final_rmse},
                        {"iterations", result.iterations},
                        {"converged", result.converged}};
    j["params"] = params_to_json(result.params);
    return j;
}

nlohmann::json loss_to_json(const LossBreakdown& loss)
{
    return {{"id_l1", loss.id_l1},
            {"exp_l1", loss.exp_l1},
            {"rot_l1", loss.rot_l1},
            {"landmark_rmse", loss.landmark_rmse},
            {"total", loss.total}};
}

RigMapping rig_mapping_from_json(const nlohmann::json& j)
{
    RigMapping mapping;
    mapping.pass_pose = j.value("pass_pose", true);
    for (const nlohmann::json& e : j.at("entries"))
    {
        RigMapping::Entry entry;
        entry.source_index = e.at("source").get<int>();
        entry.target_name = e.at("target").get<std::string>();
        entry.gain = e.value("gain", 1.0);
        entry.clamp_lo = e.value("clamp_lo", 0.0);
        entry.clamp_hi = e.value("clamp_hi", 1.0);
        mapping.entries.push_back(std::move(entry));
    }
    mapping.validate();
    return mapping;
}

nlohmann::json rig_pose_to_json(const RigPose& pose)
{
    return {{"weights", pose.weights},
            {"rotation", {pose.rotation.w, pose.rotation.x, pose.rotation.y, pose.rotation.z}}};
}

} // namespace facemotion
