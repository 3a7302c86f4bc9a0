/*
 * facemotion - joint face detection and facial motion retargeting toolkit.
 *
 * File: core/include/facemotion/loss.hpp
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

#include "facemotion/grid_codec.hpp"
#include "facemotion/types.hpp"

namespace facemotion {

struct LossSchedule
{
    int epoch = 1;
};

/**
 * Decomposed single-face loss: mean L1 terms over identity (50),
 * free expression (46) and sign-canonicalized quaternion (4) components,
 * a landmark RMSE in pixels, and the scheduled total
 * tau * (id + exp + rot) + landmark_rmse.
 */
struct LossBreakdown
{
    double id_l1 = 0.0;
    double exp_l1 = 0.0;
    double rot_l1 = 0.0;
    double landmark_rmse = 0.0;
    double total = 0.0;
};

/// Parameter/landmark pair as predicted or fitted for one face.
struct FacePrediction
{
    FaceParams params;
    Landmarks2D landmarks = Landmarks2D::Zero();
};

/// Ground-truth trust decay: 10 / epoch. Throws for epoch < 1.
double tau(const LossSchedule& schedule);

LossBreakdown sfn_loss(const FacePrediction& pred, const FacePrediction& gt,
                       const LossSchedule& schedule);

/**
 * Grid loss: the single-face terms summed over exactly the (cell, anchor)
 * slots marked responsible in the ground truth; the landmark term is one
 * global square root over the indicator-masked mean. Slots without a face
 * contribute nothing. Throws std::invalid_argument on out-of-range or
 * duplicate (cell, anchor) entries.
 */
LossBreakdown grid_loss(const FaceTensor& face_tensor, const GridTensor& pred_grid,
                        const GridGroundTruth& gt, const LossSchedule& schedule,
                        const GridCodecConfig& cfg = {});

/// Detector-inherited box/objectness part, kept separate from the
/// parameter loss: sum-squared error on (sigmoid-space x,y; log-space w,h)
/// for responsible slots, objectness squared error over all slots.
struct BoxObjectnessLoss
{
    double box_sse = 0.0;
    double objectness_sse = 0.0;
};

BoxObjectnessLoss box_objectness_loss(const GridTensor& pred_grid, const GridTensor& gt_grid,
                                      const GridGroundTruth& gt);

} // namespace facemotion
