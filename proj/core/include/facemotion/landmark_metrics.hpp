/*
 * facemotion - joint face detection and facial motion retargeting toolkit.
 *
 * File: core/include/facemotion/landmark_metrics.hpp
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
#include "facemotion/types.hpp"

#include <vector>

namespace facemotion {

/**
 * Normalized mean error: mean point distance over 68 landmarks, divided
 * by sqrt(w*h) of the bounding box. Returned as a fraction (multiply by
 * 100 for percentage tables). Throws on a degenerate bbox.
 */
double nme(const Landmarks2D& pred, const Landmarks2D& gt, const EvalBox& bbox);

/**
 * Area under the cumulative error distribution over [0, cutoff],
 * normalized by the cutoff; in [0,1]. Throws on an empty error list or
 * non-positive cutoff.
 */
double ced_auc(const std::vector<double>& errors, double cutoff = 0.08);

/**
 * Mean absolute distance of the active expression coefficients from 1,
 * the value of a fully-acted micro-expression. Indices are 1-based
 * blendshape-offset indices (1..46). Lower is better.
 */
double expression_metric(const ExpressionWeights& pred, const std::vector<int>& active_indices);

} // namespace facemotion
