/*
 * facemotion - joint face detection and facial motion retargeting toolkit.
 *
 * File: core/src/landmark_metrics.cpp
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
#include "facemotion/landmark_metrics.hpp"

#include <cmath>

namespace facemotion {

double nme(const Landmarks2D& pred, const Landmarks2D& gt, const EvalBox& bbox)
{
    bbox.validate();
    const double normalizer = std::sqrt(bbox.width() * bbox.height());
    if (!(normalizer > 0.0) || !std::isfinite(normalizer))
        throw std::invalid_argument("nme: degenerate bounding box");
    const double mean_dist = (pred - gt).rowwise().norm().mean();
    return mean_dist / normalizer;
}

double ced_auc(const std::vector<double>& errors, double cutoff)
{
    if (errors.empty())
        throw std::invalid_argument("ced_auc: empty error list");
    if (!(cutoff > 0.0))
        throw std::invalid_argument("ced_auc: cutoff must be positive");

    // The CED is a step function; each error below the cutoff contributes
    // a rectangle of width (cutoff - e) and height 1/n, which is what the
    // trapezoid rule over the exact breakpoints yields.
    double area = 0.0;
    for (double e : errors)
        if (e <= cutoff)
            area += cutoff - e;
    return area / (cutoff * errors.size());
}

double expression_metric(const ExpressionWeights& pred, const std::vector<int>& active_indices)
{
    if (active_indices.empty())
        throw std::invalid_argument("expression_metric: no active indices");
    double sum = 0.0;
    for (int idx : active_indices)
    {
        if (idx < 1 || idx > kFreeExpressionDims)
            throw std::invalid_argument("expression_metric: index outside 1..46");
        sum += std::abs(1.0 - pred.w_free[idx - 1]);
    }
    return sum / active_indices.size();
}

} // namespace facemotion
