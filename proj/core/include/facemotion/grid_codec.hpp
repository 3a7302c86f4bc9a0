/*
 * facemotion - joint face detection and facial motion retargeting toolkit.
 *
 * File: core/include/facemotion/grid_codec.hpp
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

#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace facemotion {

inline constexpr int kGridSize = 9;
inline constexpr int kAnchorCount = 5;
// Per-slot layout: t_x, t_y, t_w, t_h, t_o, 50 identity, 46 expression,
// 4 rotation, 3 translation, 1 focal.
inline constexpr int kSlotLength = 4 + 1 + kIdentityDims + kFreeExpressionDims + 4 + 3 + 1;
static_assert(kSlotLength == 109);
inline constexpr int kSlotCount = kGridSize * kGridSize * kAnchorCount;

/// Box-prior dimensions in grid-cell units.
struct AnchorPrior
{
    double p_w = 1.0;
    double p_h = 1.0;
};

struct GridCodecConfig
{
    std::array<AnchorPrior, kAnchorCount> priors = {
        AnchorPrior{1.0, 1.4}, AnchorPrior{1.6, 2.2}, AnchorPrior{2.4, 3.2},
        AnchorPrior{3.4, 4.6}, AnchorPrior{5.0, 6.6}};
    double image_size = 288.0;  // square input, pixels
    double focal_min = 0.2;     // decoded focal range (sigmoid rescale)
    double focal_max = 5.0;
    double logit_eps = 1e-9;    // clamp for invertible sigmoid encoding

    double cell_to_pixels() const { return image_size / kGridSize; }
};

/// Raw cell predictions, 9 x 9 cells x 5 anchors x 109 values.
class GridTensor
{
public:
    GridTensor() : raw_(static_cast<size_t>(kSlotCount) * kSlotLength, 0.0) {}

    std::span<double, kSlotLength> slot(int cell_x, int cell_y, int anchor)
    {
        return std::span<double, kSlotLength>(raw_.data() + offset(cell_x, cell_y, anchor),
                                              kSlotLength);
    }
    std::span<const double, kSlotLength> slot(int cell_x, int cell_y, int anchor) const
    {
        return std::span<const double, kSlotLength>(raw_.data() + offset(cell_x, cell_y, anchor),
                                                    kSlotLength);
    }

    const std::vector<double>& data() const { return raw_; }
    std::vector<double>& data() { return raw_; }

private:
    static size_t offset(int cx, int cy, int anchor)
    {
        if (cx < 0 || cx >= kGridSize || cy < 0 || cy >= kGridSize || anchor < 0 ||
            anchor >= kAnchorCount)
            throw std::invalid_argument("GridTensor: slot index out of range");
        return (static_cast<size_t>(cy * kGridSize + cx) * kAnchorCount + anchor) * kSlotLength;
    }
    std::vector<double> raw_;
};

/**
 * Decoded detection: box center/dimensions in cell units, objectness in
 * (0,1), face parameters and landmarks in image pixels.
 */
struct DetectionBox
{
    double bx = 0.0, by = 0.0;
    double bw = 1.0, bh = 1.0;
    double objectness = 0.5;
    FaceParams params;
    Landmarks2D landmarks = Landmarks2D::Zero();

    void validate() const
    {
        if (!(bx >= 0.0 && bx <= kGridSize && by >= 0.0 && by <= kGridSize))
            throw std::invalid_argument("DetectionBox: center outside grid");
        if (!(bw > 0.0 && bh > 0.0))
            throw std::invalid_argument("DetectionBox: non-positive dimensions");
        if (!(objectness > 0.0 && objectness < 1.0))
            throw std::invalid_argument("DetectionBox: objectness outside (0,1)");
    }
};

/// Responsibility assignment: which (cell, anchor) slots carry a face.
struct GridGroundTruth
{
    struct Entry
    {
        int cell_x = 0, cell_y = 0;
        int anchor = 0;
        DetectionBox target; // decoded-space target values for the slot
    };
    std::vector<Entry> entries;
};

/// Two ground-truth faces competing for the same (cell, anchor) slot.
class GridCollisionError : public std::runtime_error
{
public:
    GridCollisionError(int cell_x, int cell_y, int anchor, size_t face_a, size_t face_b);
    int cell_x, cell_y, anchor;
    size_t face_a, face_b;
};

double sigmoid(double t);
double logit(double p);

/**
 * Width/height-only IoU of a box against an anchor prior, both co-centered.
 * Used for responsibility assignment during encoding.
 */
double prior_iou(double bw, double bh, const AnchorPrior& prior);

/**
 * Decodes one 109-vector against its cell offset and anchor prior:
 * bx = sigmoid(t_x) + c_x, bw = p_w * exp(t_w), objectness = sigmoid(t_o),
 * identity raw, expression through sigmoid, quaternion normalized,
 * translation raw with t_z forced to 0, focal sigmoid-rescaled to
 * [focal_min, focal_max]. Landmarks are projected from the decoded
 * parameters and re-expressed through the box-relative denormalization.
 */
DetectionBox decode_slot(const FaceTensor& face_tensor, std::span<const double, kSlotLength> raw,
                         int cell_x, int cell_y, const AnchorPrior& prior,
                         const GridCodecConfig& cfg = {});

/**
 * Box-relative landmarks to image pixels:
 * lm = (b_xy + b_wh * normalized) * cell_to_pixels.
 */
Landmarks2D landmark_denorm(double bx, double by, double bw, double bh,
                            const Landmarks2D& normalized, const GridCodecConfig& cfg = {});

/**
 * Assigns each ground-truth face to the cell containing its center and the
 * prior with maximal width/height IoU, then writes the inverse of
 * decode_slot into the grid (logit/log encoding, expression clamped to
 * [eps, 1-eps] before the logit). Inactive slots keep zero values with
 * saturated-low objectness. Throws GridCollisionError when two faces map
 * to the same slot.
 */
std::pair<GridGroundTruth, GridTensor> encode_gt(const FaceTensor& face_tensor,
                                                 const std::vector<DetectionBox>& faces,
                                                 const GridCodecConfig& cfg = {});

/**
 * Decodes all 405 slots, keeps objectness > threshold, sorted by
 * descending objectness (stable). Threshold must lie in [0,1).
 */
std::vector<DetectionBox> decode_grid(const FaceTensor& face_tensor, const GridTensor& grid,
                                      double objectness_threshold,
                                      const GridCodecConfig& cfg = {});

} // namespace facemotion
