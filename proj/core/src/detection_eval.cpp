/*
 * facemotion - joint face detection and facial motion retargeting toolkit.
 *
 * File: core/src/detection_eval.cpp
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
#include "facemotion/detection_eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace facemotion {

double iou(const EvalBox& a, const EvalBox& b)
{
    a.validate();
    b.validate();
    const double ix = std::max(0.0, std::min(a.x1, b.x1) - std::max(a.x0, b.x0));
    const double iy = std::max(0.0, std::min(a.y1, b.y1) - std::max(a.y0, b.y0));
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    return inter / uni;
}

namespace {

// Indices sorted by descending score, stable on ties.
std::vector<size_t> score_order(const std::vector<EvalBox>& boxes)
{
    std::vector<size_t> order(boxes.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return boxes[a].score > boxes[b].score; });
    return order;
}

} // namespace

std::vector<EvalBox> nms(const std::vector<EvalBox>& boxes, double iou_threshold)
{
    if (!(iou_threshold >= 0.0 && iou_threshold <= 1.0))
        throw std::invalid_argument("nms: threshold must lie in [0,1]");

    std::vector<EvalBox> kept;
    for (size_t i : score_order(boxes))
    {
        const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const EvalBox& k) {
            return iou(k, boxes[i]) > iou_threshold;
        });
        if (!suppressed)
            kept.push_back(boxes[i]);
    }
    return kept;
}

std::vector<double> coco_iou_thresholds()
{
    std::vector<double> t;
    for (int i = 0; i < 10; ++i)
        t.push_back(0.5 + 0.05 * i);
    return t;
}

namespace {

double ap_at_threshold(const std::vector<EvalBox>& preds, const std::vector<size_t>& order,
                       const std::vector<EvalBox>& gts, double iou_threshold)
{
    if (gts.empty())
        return 0.0;

    std::vector<bool> gt_matched(gts.size(), false);
    std::vector<bool> is_tp;
    is_tp.reserve(order.size());
    for (size_t i : order)
    {
        int best = -1;
        double best_iou = iou_threshold;
        for (size_t g = 0; g < gts.size(); ++g)
        {
            if (gt_matched[g])
                continue;
            const double v = iou(preds[i], gts[g]);
            if (v >= best_iou)
            {
                best_iou = v;
                best = static_cast<int>(g);
            }
        }
        if (best >= 0)
            gt_matched[best] = true;
        is_tp.push_back(best >= 0);
    }

    // Precision at each recall level, then 101-point interpolation.
    std::vector<double> recalls, precisions;
    int tp = 0, fp = 0;
    for (bool hit : is_tp)
    {
        hit ? ++tp : ++fp;
        recalls.push_back(static_cast<double>(tp) / gts.size());
        precisions.push_back(static_cast<double>(tp) / (tp + fp));
    }
    // Monotone envelope from the right.
    for (int i = static_cast<int>(precisions.size()) - 2; i >= 0; --i)
        precisions[i] = std::max(precisions[i], precisions[i + 1]);

    double ap = 0.0;
    for (int r = 0; r <= 100; ++r)
    {
        const double recall = r / 100.0;
        const auto it = std::lower_bound(recalls.begin(), recalls.end(), recall);
        if (it != recalls.end())
            ap += precisions[static_cast<size_t>(it - recalls.begin())];
    }
    return ap / 101.0;
}

} // namespace

APResult average_precision(const std::vector<EvalBox>& preds, const std::vector<EvalBox>& gts,
                           const std::vector<double>& iou_thresholds)
{
    for (const EvalBox& b : preds)
    {
        b.validate();
        if (!std::isfinite(b.score))
            throw std::invalid_argument("average_precision: non-finite score");
    }
    for (const EvalBox& b : gts)
        b.validate();

    const std::vector<size_t> order = score_order(preds);

    APResult result;
    result.thresholds = iou_thresholds;
    for (double t : iou_thresholds)
        result.ap_per_threshold.push_back(ap_at_threshold(preds, order, gts, t));
    if (!result.ap_per_threshold.empty())
        result.mean_ap = std::accumulate(result.ap_per_threshold.begin(),
                                         result.ap_per_threshold.end(), 0.0) /
                         result.ap_per_threshold.size();
    return result;
}

} // namespace facemotion
