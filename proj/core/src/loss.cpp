/*
 * facemotion - joint face detection and facial motion retargeting toolkit.
 *
 * File: core/src/loss.cpp
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
#include "facemotion/loss.hpp"

#include <cmath>
#include <set>

namespace facemotion {

namespace {

double quat_l1(const Quaternion& a, const Quaternion& b)
{
    const Eigen::Vector4d da = a.normalized().coeffs() - b.normalized().coeffs();
    return da.cwiseAbs().sum() / 4.0;
}

struct ParamTerms
{
    double id = 0.0, exp = 0.0, rot = 0.0, lm_sq = 0.0; // lm_sq: summed squared distances
};

ParamTerms face_terms(const FacePrediction& pred, const FacePrediction& gt)
{
    ParamTerms t;
    t.id = (pred.params.w_id - gt.params.w_id).cwiseAbs().sum() / kIdentityDims;
    t.exp = (pred.params.expression.w_free - gt.params.expression.w_free).cwiseAbs().sum() /
            kFreeExpressionDims;
    t.rot = quat_l1(pred.params.pose.rotation, gt.params.pose.rotation);
    t.lm_sq = (pred.landmarks - gt.landmarks).rowwise().squaredNorm().sum();
    return t;
}

} // namespace

double tau(const LossSchedule& schedule)
{
    if (schedule.epoch < 1)
        throw std::invalid_argument("tau: epoch must be >= 1");
    return 10.0 / schedule.epoch;
}

LossBreakdown sfn_loss(const FacePrediction& pred, const FacePrediction& gt,
                       const LossSchedule& schedule)
{
    const ParamTerms t = face_terms(pred, gt);
    LossBreakdown out;
    out.id_l1 = t.id;
    out.exp_l1 = t.exp;
    out.rot_l1 = t.rot;
    out.landmark_rmse = std::sqrt(t.lm_sq / kLandmarkCount);
    out.total = tau(schedule) * (out.id_l1 + out.exp_l1 + out.rot_l1) + out.landmark_rmse;
    return out;
}

LossBreakdown grid_loss(const FaceTensor& face_tensor, const GridTensor& pred_grid,
                        const GridGroundTruth& gt, const LossSchedule& schedule,
                        const GridCodecConfig& cfg)
{
    std::set<std::tuple<int, int, int>> seen;
    LossBreakdown out;
    double lm_sq = 0.0;
    for (const GridGroundTruth::Entry& entry : gt.entries)
    {
        if (!seen.insert({entry.cell_x, entry.cell_y, entry.anchor}).second)
            throw std::invalid_argument("grid_loss: duplicate (cell, anchor) entry");

        // slot() validates the indices.
        const DetectionBox pred =
            decode_slot(face_tensor, pred_grid.slot(entry.cell_x, entry.cell_y, entry.anchor),
                        entry.cell_x, entry.cell_y, cfg.priors[entry.anchor], cfg);

        const ParamTerms t = face_terms({pred.params, pred.landmarks},
                                        {entry.target.params, entry.target.landmarks});
        out.id_l1 += t.id;
        out.exp_l1 += t.exp;
        out.rot_l1 += t.rot;
        lm_sq += t.lm_sq;
    }
    out.landmark_rmse = std::sqrt(lm_sq / kLandmarkCount);
    out.total = tau(schedule) * (out.id_l1 + out.exp_l1 + out.rot_l1) + out.landmark_rmse;
    return out;
}

BoxObjectnessLoss box_objectness_loss(const GridTensor& pred_grid, const GridTensor& gt_grid,
                                      const GridGroundTruth& gt)
{
    BoxObjectnessLoss out;
    for (int cy = 0; cy < kGridSize; ++cy)
        for (int cx = 0; cx < kGridSize; ++cx)
            for (int a = 0; a < kAnchorCount; ++a)
            {
                const auto p = pred_grid.slot(cx, cy, a);
                const auto g = gt_grid.slot(cx, cy, a);
                const double d_obj = sigmoid(p[4]) - sigmoid(g[4]);
                out.objectness_sse += d_obj * d_obj;
            }
    for (const GridGroundTruth::Entry& entry : gt.entries)
    {
        const auto p = pred_grid.slot(entry.cell_x, entry.cell_y, entry.anchor);
        const auto g = gt_grid.slot(entry.cell_x, entry.cell_y, entry.anchor);
        const double dx = sigmoid(p[0]) - sigmoid(g[0]);
        const double dy = sigmoid(p[1]) - sigmoid(g[1]);
        const double dw = p[2] - g[2];
        const double dh = p[3] - g[3];
        out.box_sse += dx * dx + dy * dy + dw * dw + dh * dh;
    }
    return out;
}

} // namespace facemotion
