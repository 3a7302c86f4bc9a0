/*
 * facemotion - joint face detection and facial motion retargeting toolkit.
 *
 * File: core/include/facemotion/morphable_model.hpp
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

#include "facemotion/types.hpp"

#include <Eigen/Core>

namespace facemotion {

/**
 * Generates a deterministic synthetic face tensor. Stand-in for a captured
 * blendshape rig: the neutral slice is a face-scaled point set (coordinates
 * within [-100, 100] model units), expression bases are bounded offsets
 * (|offset| <= 30), and identity basis i is scaled by 1/(1+i) to mimic
 * PCA ordering.
 */
FaceTensor generate_synthetic_tensor(unsigned int seed);

/**
 * Contracts the tensor with identity and expression weights:
 * mesh[v] = sum_ij tensor[v,i,j] * w_id[i] * w_exp_full[j], as a 68x3
 * landmark mesh in model units. Bilinear in (id, exp).
 */
LandmarkMesh synth_landmark_mesh(const FaceTensor& tensor, const IdentityWeights& id,
                                 const ExpressionWeights& exp);

/**
 * Rotation matrix of a quaternion. The input is normalized internally, so
 * the map is scale-invariant and q, -q give the same matrix. Throws
 * std::invalid_argument on zero-norm input.
 */
Eigen::Matrix3d quat_to_matrix(const Quaternion& q);

/**
 * Weak-perspective projection of the synthesized landmark mesh:
 * p = f * (R * X + t)_xy per vertex, in pixel coordinates
 * (origin top-left, y downward). t_z never influences the output.
 */
Landmarks2D project_landmarks(const FaceTensor& tensor, const FaceParams& params);

/// Projection of an already-synthesized mesh; used where the mesh is reused.
Landmarks2D project_mesh(const LandmarkMesh& mesh, const Pose& pose);

} // namespace facemotion
