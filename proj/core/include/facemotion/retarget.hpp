/*
 * facemotion - joint face detection and facial motion retargeting toolkit.
 *
 * File: core/include/facemotion/retarget.hpp
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
#include "facemotion/param_fitting.hpp"
#include "facemotion/types.hpp"

#include <map>
#include <string>
#include <vector>

namespace facemotion {

/**
 * Correspondence from source expression coefficients to target character
 * blendshapes: per entry a linear gain followed by a clamp. Identity,
 * translation and focal are never transferred; pose optionally is.
 */
struct RigMapping
{
    struct Entry
    {
        int source_index = 1; // 1..46, blendshape-offset index
        std::string target_name;
        double gain = 1.0;
        double clamp_lo = 0.0;
        double clamp_hi = 1.0;
    };
    std::vector<Entry> entries;
    bool pass_pose = true;

    void validate() const;

    /// One-to-one mapping of all 46 coefficients with unit gain.
    static RigMapping identity_mapping();
};

/// Target-rig pose: named blendshape weights plus an optional head rotation.
struct RigPose
{
    std::map<std::string, double> weights;
    Quaternion rotation;
};

/**
 * Applies the mapping: target weight = clamp(gain * w_free[src], lo, hi);
 * rotation is copied verbatim when pass_pose is set, identity otherwise.
 * Throws std::invalid_argument when a target name appears twice.
 */
RigPose map_to_rig(const FaceParams& params, const RigMapping& mapping);

/**
 * Bounding box for the next video frame from the previous frame's
 * landmarks: the axis-aligned landmark bounds padded by
 * margin * max(width, height) on each side. Throws on degenerate
 * (all-identical) landmarks.
 */
EvalBox track_next_bbox(const Landmarks2D& prev_landmarks, double margin = 0.1);

struct SceneFace
{
    FaceParams params;
    Landmarks2D landmarks = Landmarks2D::Zero();
    EvalBox bbox; // pixel-space landmark bounds
};

struct SynthScene
{
    std::vector<SceneFace> faces;
    GridGroundTruth gt;
    GridTensor grid;
};

/**
 * Deterministic synthetic multi-face scene: up to 20 non-overlapping faces
 * (center rejection sampling, every box at least 2% of the image
 * dimension), each face's landmarks produced by the projection model, plus
 * the encoded grid ground truth. Throws std::invalid_argument for
 * n_faces outside 1..20 and std::runtime_error when placement fails after
 * 10000 attempts.
 */
SynthScene synth_scene(const FaceTensor& tensor, int n_faces, unsigned int seed,
                       const GridCodecConfig& cfg = {});

struct WeakGroundTruth
{
    GridGroundTruth gt;
    GridTensor grid;
    std::vector<FitResult> fits; // per-face fit diagnostics, same order as input
};

/**
 * Weakly supervised grid ground truth: fits face parameters to each
 * landmark set independently, then encodes the fitted faces into the grid.
 * Errors from fitting and encoding (including slot collisions) propagate.
 */
WeakGroundTruth weak_gt_generate(const FaceTensor& tensor,
                                 const std::vector<Landmarks2D>& face_landmarks,
                                 const FitConfig& fit_cfg = {},
                                 const GridCodecConfig& codec_cfg = {});

} // namespace facemotion
