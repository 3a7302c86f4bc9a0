/*
 * facemotion - joint face detection and facial motion retargeting toolkit.
 *
 * File: core/include/facemotion/detection_eval.hpp
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

#include <stdexcept>
#include <vector>

namespace facemotion {

/// Axis-aligned pixel box with a detection score.
struct EvalBox
{
    double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
    double score = 1.0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double area() const { return width() * height(); }

    void validate() const
    {
        if (!(x1 > x0 && y1 > y0))
            throw std::invalid_argument("EvalBox: corners must satisfy x1 > x0, y1 > y0");
    }
};

/// Intersection over union, in [0,1].
double iou(const EvalBox& a, const EvalBox& b);

/**
 * Greedy non-maximum suppression by descending score (stable on ties);
 * a box is suppressed when its IoU against any kept box exceeds the
 * threshold. Output sorted by score.
 */
std::vector<EvalBox> nms(const std::vector<EvalBox>& boxes, double iou_threshold = 0.45);

struct APResult
{
    std::vector<double> thresholds;
    std::vector<double> ap_per_threshold;
    double mean_ap = 0.0;
};

/// COCO-style IoU thresholds 0.5:0.05:0.95.
std::vector<double> coco_iou_thresholds();

/**
 * Average precision at each IoU threshold plus the mean. Greedy matching:
 * predictions in descending score order, each matched to the unmatched
 * ground-truth box with the highest IoU at or above the threshold; the
 * precision-recall curve is integrated by 101-point interpolation.
 */
APResult average_precision(const std::vector<EvalBox>& preds, const std::vector<EvalBox>& gts,
                           const std::vector<double>& iou_thresholds = coco_iou_thresholds());

} // namespace facemotion
