/*
 * facemotion - joint face detection and facial motion retargeting toolkit.
 *
 * File: core/src/grid_codec.cpp
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
#include "facemotion/grid_codec.hpp"

#include "facemotion/morphable_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace facemotion {

namespace {

// Raw slot offsets.
constexpr int kTx = 0, kTy = 1, kTw = 2, kTh = 3, kTo = 4;
constexpr int kId = 5;
constexpr int kExp = kId + kIdentityDims;               // 55
constexpr int kQuat = kExp + kFreeExpressionDims;       // 101
constexpr int kTrans = kQuat + 4;                       // 105
constexpr int kFocal = kTrans + 3;                      // 108
static_assert(kFocal == kSlotLength - 1);

} // namespace

GridCollisionError::GridCollisionError(int cx, int cy, int a, size_t fa, size_t fb)
    : std::runtime_error("encode_gt: faces " + std::to_string(fa) + " and " + std::to_string(fb) +
                         " collide at cell (" + std::to_string(cx) + "," + std::to_string(cy) +
                         ") anchor " + std::to_string(a)),
      cell_x(cx), cell_y(cy), anchor(a), face_a(fa), face_b(fb)
{
}

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

double logit(double p) { return std::log(p / (1.0 - p)); }

double prior_iou(double bw, double bh, const AnchorPrior& prior)
{
    const double inter = std::min(bw, prior.p_w) * std::min(bh, prior.p_h);
    const double uni = bw * bh + prior.p_w * prior.p_h - inter;
    return inter / uni;
}

Landmarks2D landmark_denorm(double bx, double by, double bw, double bh,
                            const Landmarks2D& normalized, const GridCodecConfig& cfg)
{
    if (!(bw > 0.0 && bh > 0.0))
        throw std::invalid_argument("landmark_denorm: non-positive box dimensions");
    Landmarks2D out;
    out.col(0) = (normalized.col(0) * bw).array() + bx;
    out.col(1) = (normalized.col(1) * bh).array() + by;
    return out * cfg.cell_to_pixels();
}

DetectionBox decode_slot(const FaceTensor& face_tensor, std::span<const double, kSlotLength> raw,
                         int cell_x, int cell_y, const AnchorPrior& prior,
                         const GridCodecConfig& cfg)
{
    DetectionBox box;
    box.bx = sigmoid(raw[kTx]) + cell_x;
    box.by = sigmoid(raw[kTy]) + cell_y;
    box.bw = prior.p_w * std::exp(raw[kTw]);
    box.bh = prior.p_h * std::exp(raw[kTh]);
    box.objectness = sigmoid(raw[kTo]);

    for (int i = 0; i < kIdentityDims; ++i)
        box.params.w_id[i] = raw[kId + i];
    for (int i = 0; i < kFreeExpressionDims; ++i)
        box.params.expression.w_free[i] = sigmoid(raw[kExp + i]);
    const Quaternion q_raw{raw[kQuat], raw[kQuat + 1], raw[kQuat + 2], raw[kQuat + 3]};
    // Degenerate raw rotations decode to identity rather than failing.
    box.params.pose.rotation = (q_raw.norm() > 1e-12) ? q_raw.normalized() : Quaternion{};
    box.params.pose.translation = {raw[kTrans], raw[kTrans + 1], 0.0};
    box.params.pose.focal =
        cfg.focal_min + sigmoid(raw[kFocal]) * (cfg.focal_max - cfg.focal_min);

    // Landmarks: project the decoded parameters, then route through the
    // box-relative normalization and back, as the decoded outputs are defined.
    const Landmarks2D projected = project_landmarks(face_tensor, box.params);
    const double to_cells = 1.0 / cfg.cell_to_pixels();
    Landmarks2D normalized;
    normalized.col(0) = ((projected.col(0) * to_cells).array() - box.bx) / box.bw;
    normalized.col(1) = ((projected.col(1) * to_cells).array() - box.by) / box.bh;
    box.landmarks = landmark_denorm(box.bx, box.by, box.bw, box.bh, normalized, cfg);
    return box;
}

std::pair<GridGroundTruth, GridTensor> encode_gt(const FaceTensor& face_tensor,
                                                 const std::vector<DetectionBox>& faces,
                                                 const GridCodecConfig& cfg)
{
    const double eps = cfg.logit_eps;
    const auto clamp01 = [eps](double p) { return std::clamp(p, eps, 1.0 - eps); };

    GridTensor grid;
    // All inactive slots decode to saturated-low objectness and identity rotation.
    for (int cy = 0; cy < kGridSize; ++cy)
        for (int cx = 0; cx < kGridSize; ++cx)
            for (int a = 0; a < kAnchorCount; ++a)
            {
                grid.slot(cx, cy, a)[kTo] = logit(eps);
                grid.slot(cx, cy, a)[kQuat] = 1.0;
            }

    GridGroundTruth gt;
    std::map<std::tuple<int, int, int>, size_t> occupied;
    for (size_t face_idx = 0; face_idx < faces.size(); ++face_idx)
    {
        const DetectionBox& face = faces[face_idx];
        face.validate();

        const int cx = std::min(static_cast<int>(std::floor(face.bx)), kGridSize - 1);
        const int cy = std::min(static_cast<int>(std::floor(face.by)), kGridSize - 1);

        int best_anchor = 0;
        double best_iou = -1.0;
        for (int a = 0; a < kAnchorCount; ++a)
        {
            const double iou = prior_iou(face.bw, face.bh, cfg.priors[a]);
            if (iou > best_iou)
            {
                best_iou = iou;
                best_anchor = a;
            }
        }

        const auto key = std::make_tuple(cx, cy, best_anchor);
        if (auto it = occupied.find(key); it != occupied.end())
            throw GridCollisionError(cx, cy, best_anchor, it->second, face_idx);
        occupied[key] = face_idx;

        const AnchorPrior& prior = cfg.priors[best_anchor];
        auto slot = grid.slot(cx, cy, best_anchor);
        slot[kTx] = logit(clamp01(face.bx - cx));
        slot[kTy] = logit(clamp01(face.by - cy));
        slot[kTw] = std::log(face.bw / prior.p_w);
        slot[kTh] = std::log(face.bh / prior.p_h);
        slot[kTo] = logit(clamp01(face.objectness));
        for (int i = 0; i < kIdentityDims; ++i)
            slot[kId + i] = face.params.w_id[i];
        for (int i = 0; i < kFreeExpressionDims; ++i)
            slot[kExp + i] = logit(clamp01(face.params.expression.w_free[i]));
        const Eigen::Vector4d q = face.params.pose.rotation.normalized().coeffs();
        for (int i = 0; i < 4; ++i)
            slot[kQuat + i] = q[i];
        slot[kTrans] = face.params.pose.translation.x();
        slot[kTrans + 1] = face.params.pose.translation.y();
        slot[kTrans + 2] = 0.0;
        slot[kFocal] = logit(clamp01((face.params.pose.focal - cfg.focal_min) /
                                     (cfg.focal_max - cfg.focal_min)));

        // Target values are the decode of what was written, so clamping is
        // reflected consistently in the ground truth.
        GridGroundTruth::Entry entry;
        entry.cell_x = cx;
        entry.cell_y = cy;
        entry.anchor = best_anchor;
        entry.target = decode_slot(face_tensor, grid.slot(cx, cy, best_anchor), cx, cy, prior, cfg);
        gt.entries.push_back(std::move(entry));
    }
    return {std::move(gt), std::move(grid)};
}

std::vector<DetectionBox> decode_grid(const FaceTensor& face_tensor, const GridTensor& grid,
                                      double objectness_threshold, const GridCodecConfig& cfg)
{
    if (!(objectness_threshold >= 0.0 && objectness_threshold < 1.0))
        throw std::invalid_argument("decode_grid: threshold must lie in [0,1)");

    std::vector<DetectionBox> boxes;
    for (int cy = 0; cy < kGridSize; ++cy)
        for (int cx = 0; cx < kGridSize; ++cx)
            for (int a = 0; a < kAnchorCount; ++a)
            {
                DetectionBox box =
                    decode_slot(face_tensor, grid.slot(cx, cy, a), cx, cy, cfg.priors[a], cfg);
                if (box.objectness > objectness_threshold)
                    boxes.push_back(std::move(box));
            }
    std::stable_sort(boxes.begin(), boxes.end(), [](const DetectionBox& a, const DetectionBox& b) {
        return a.objectness > b.objectness;
    });
    return boxes;
}

} // namespace facemotion
