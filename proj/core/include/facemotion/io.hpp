/*
 * facemotion - joint face detection and facial motion retargeting toolkit.
 *
 * File: core/include/facemotion/io.hpp
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
#pragma once

#include "facemotion/detection_eval.hpp"
#include "facemotion/grid_codec.hpp"
#include "facemotion/loss.hpp"
#include "facemotion/param_fitting.hpp"
#include "facemotion/retarget.hpp"
#include "facemotion/types.hpp"

#include <json.hpp>

#include <filesystem>

namespace facemotion {

// Binary blobs: 4-byte magic, u32 little-endian dimensions, then 64-bit
// little-endian floats in row-major layout. Magic "FT3D" for the face
// tensor (204,50,47), "GRD1" for grid tensors (9,9,5,109).
void save_face_tensor(const FaceTensor& tensor, const std::filesystem::path& path);
FaceTensor load_face_tensor(const std::filesystem::path& path);

void save_grid_tensor(const GridTensor& grid, const std::filesystem::path& path);
GridTensor load_grid_tensor(const std::filesystem::path& path);

// JSON representations. FaceParams: {"w_id": [50], "w_exp": [46],
// "quat": [4], "t": [3], "f": number}; Landmarks2D: {"landmarks": [[x,y] x68]}.
nlohmann::json params_to_json(const FaceParams& params);
FaceParams params_from_json(const nlohmann::json& j);

nlohmann::json landmarks_to_json(const Landmarks2D& landmarks);
Landmarks2D landmarks_from_json(const nlohmann::json& j);

nlohmann::json detection_to_json(const DetectionBox& box);
DetectionBox detection_from_json(const nlohmann::json& j);

nlohmann::json eval_box_to_json(const EvalBox& box);
EvalBox eval_box_from_json(const nlohmann::json& j);

nlohmann::json fit_result_to_json(const FitResult& result);

nlohmann::json loss_to_json(const LossBreakdown& loss);

RigMapping rig_mapping_from_json(const nlohmann::json& j);
nlohmann::json rig_pose_to_json(const RigPose& pose);

} // namespace facemotion
