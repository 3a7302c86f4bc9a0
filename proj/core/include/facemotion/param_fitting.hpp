/*
 * facemotion - joint face detection and facial motion retargeting toolkit.
 *
 * File: core/include/facemotion/param_fitting.hpp
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

#include "facemotion/morphable_model.hpp"
#include "facemotion/types.hpp"

#include <Eigen/Core>

namespace facemotion {

// Parameter vector layout used by the fitter and the Jacobian:
// [0,50)  identity weights
// [50,96) free expression coefficients
// [96,100) quaternion (w,x,y,z), ambient
// [100,102) t_x, t_y
// [102]   focal
// [103]   t_z (unobservable under weak perspective; column kept zero)
inline constexpr int kParamDims = 104;
inline constexpr int kResidualDims = 2 * kLandmarkCount;

using ParamVector = Eigen::Matrix<double, kParamDims, 1>;
using ResidualVector = Eigen::Matrix<double, kResidualDims, 1>;
using JacobianMatrix = Eigen::Matrix<double, kResidualDims, kParamDims>;

struct FitConfig
{
    int max_iters = 200;
    double damping_init = 1e-3;   // initial Levenberg-Marquardt lambda
    double tol_step = 1e-10;      // absolute, on squared step norm
    double tol_residual = 1e-12;  // relative, on residual decrease
    double w_id_bound = 3.0;

    void validate() const
    {
        if (max_iters < 1)
            throw std::invalid_argument("FitConfig: max_iters must be >= 1");
        if (!(damping_init > 0.0) || !(tol_step > 0.0) || !(tol_residual > 0.0) ||
            !(w_id_bound > 0.0))
            throw std::invalid_argument("FitConfig: tolerances must be positive");
    }
};

struct FitResult
{
    FaceParams params;
    double final_rmse = 0.0; // pixels, sqrt(mean squared point distance)
    int iterations = 0;
    bool converged = false;
};

ParamVector pack_params(const FaceParams& params);
FaceParams unpack_params(const ParamVector& theta);

/// Clamps the vector onto the feasible set (weights, simplex, unit
/// quaternion with w >= 0, positive focal, t_z = 0).
ParamVector project_constraints(const ParamVector& theta, double w_id_bound);

/**
 * Interleaved (x,y) residuals, projected minus observed, length 136.
 */
ResidualVector residuals(const FaceTensor& tensor, const FaceParams& params,
                         const Landmarks2D& observed);

/**
 * Analytic Jacobian of the residuals with respect to the parameter vector.
 * Quaternion columns are ambient derivatives of the normalize-then-rotate
 * map (tangent derivative projected back to the ambient 4-space); the t_z
 * column is identically zero.
 */
JacobianMatrix jacobian(const FaceTensor& tensor, const FaceParams& params);

/**
 * Constrained Levenberg-Marquardt fit of the face parameters to observed
 * 2D landmarks. Damping is multiplicative (x10 on reject, /10 on accept)
 * and each accepted step is projected onto the constraint set, so the
 * accepted residual norms are non-increasing and the returned parameters
 * always satisfy the type invariants.
 *
 * Throws std::invalid_argument when the residual at init is non-finite.
 */
FitResult fit_params(const FaceTensor& tensor, const Landmarks2D& observed,
                     const FaceParams& init, const FitConfig& cfg = {});

/**
 * Heuristic initialization: unit identity weights, neutral expression,
 * identity rotation, focal from the landmark bbox width against a
 * reference model width, translation from the landmark centroid.
 */
FaceParams default_init(const FaceTensor& tensor, const Landmarks2D& observed);

/**
 * Fits from default_init, then (only if that fit is not already exact)
 * retries from a small deterministic grid of initial rotations and focal
 * scales and returns the best result. Intended for landmark sets with no
 * parameter prior, where a single frontal init can land in a wrong basin.
 */
FitResult fit_params_multistart(const FaceTensor& tensor, const Landmarks2D& observed,
                                const FitConfig& cfg = {});

/**
 * Rescales along the gauge direction (f, w_id, t) -> (m f, w_id / m,
 * t / m), which never changes the projected landmarks, so that the focal
 * equals target_focal; the rescale is capped so |w_id| stays within 90%
 * of the bound. Useful before encoding, where the focal must sit inside
 * the codec's sigmoid range.
 */
FaceParams rescale_gauge(const FaceParams& params, double target_focal,
                         double w_id_bound = 3.0);

} // namespace facemotion
