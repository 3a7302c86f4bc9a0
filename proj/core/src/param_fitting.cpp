/*
 * facemotion - joint face detection and facial motion retargeting toolkit.
 *
 * File: core/src/param_fitting.cpp
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
#include "facemotion/param_fitting.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

namespace facemotion {

namespace {

constexpr int kIdOffset = 0;
constexpr int kExpOffset = 50;
constexpr int kQuatOffset = 96;
constexpr int kTransOffset = 100;
constexpr int kFocalOffset = 102;
constexpr int kTzOffset = 103;

// d(R)/d(u_c) of the unit-quaternion rotation formula, u = (w,x,y,z).
std::array<Eigen::Matrix3d, 4> rotation_derivatives(double w, double x, double y, double z)
{
    std::array<Eigen::Matrix3d, 4> g;
    g[0] << 0, -z, y,
            z, 0, -x,
            -y, x, 0;
    g[1] << 0, y, z,
            y, -2 * x, -w,
            z, w, -2 * x;
    g[2] << -2 * y, x, w,
            x, 0, z,
            -w, z, -2 * y;
    g[3] << -2 * z, -w, x,
            w, -2 * z, y,
            x, y, 0;
    for (auto& m : g)
        m *= 2.0;
    return g;
}

} // namespace

ParamVector pack_params(const FaceParams& params)
{
    ParamVector theta;
    theta.segment<kIdentityDims>(kIdOffset) = params.w_id;
    theta.segment<kFreeExpressionDims>(kExpOffset) = params.expression.w_free;
    theta.segment<4>(kQuatOffset) = params.pose.rotation.coeffs();
    theta[kTransOffset] = params.pose.translation.x();
    theta[kTransOffset + 1] = params.pose.translation.y();
    theta[kFocalOffset] = params.pose.focal;
    theta[kTzOffset] = params.pose.translation.z();
    return theta;
}

FaceParams unpack_params(const ParamVector& theta)
{
    FaceParams params;
    params.w_id = theta.segment<kIdentityDims>(kIdOffset);
    params.expression.w_free = theta.segment<kFreeExpressionDims>(kExpOffset);
    params.pose.rotation = {theta[kQuatOffset], theta[kQuatOffset + 1], theta[kQuatOffset + 2],
                            theta[kQuatOffset + 3]};
    params.pose.translation = {theta[kTransOffset], theta[kTransOffset + 1], theta[kTzOffset]};
    params.pose.focal = theta[kFocalOffset];
    return params;
}

ParamVector project_constraints(const ParamVector& theta, double w_id_bound)
{
    ParamVector out = theta;

    for (int i = 0; i < kIdentityDims; ++i)
        out[kIdOffset + i] = std::clamp(out[kIdOffset + i], -w_id_bound, w_id_bound);

    // Euclidean projection onto {w >= 0, sum w <= 1}: clamp negatives; if
    // the sum still exceeds 1, shift by the usual sorted-threshold rule for
    // the probability simplex.
    for (int i = 0; i < kFreeExpressionDims; ++i)
        out[kExpOffset + i] = std::max(out[kExpOffset + i], 0.0);
    if (out.segment<kFreeExpressionDims>(kExpOffset).sum() > 1.0)
    {
        std::array<double, kFreeExpressionDims> sorted;
        for (int i = 0; i < kFreeExpressionDims; ++i)
            sorted[i] = out[kExpOffset + i];
        std::sort(sorted.begin(), sorted.end(), std::greater<>());
        double cumulative = 0.0, shift = 0.0;
        for (int k = 0; k < kFreeExpressionDims; ++k)
        {
            cumulative += sorted[k];
            const double candidate = (cumulative - 1.0) / (k + 1);
            if (candidate < sorted[k])
                shift = candidate;
        }
        for (int i = 0; i < kFreeExpressionDims; ++i)
            out[kExpOffset + i] = std::max(out[kExpOffset + i] - shift, 0.0);
    }

    const Quaternion q = Quaternion{out[kQuatOffset], out[kQuatOffset + 1], out[kQuatOffset + 2],
                                    out[kQuatOffset + 3]}
                             .normalized();
    out.segment<4>(kQuatOffset) = q.coeffs();

    out[kFocalOffset] = std::max(out[kFocalOffset], 1e-6);
    out[kTzOffset] = 0.0;
    return out;
}

ResidualVector residuals(const FaceTensor& tensor, const FaceParams& params,
                         const Landmarks2D& observed)
{
    const Landmarks2D projected = project_landmarks(tensor, params);
    ResidualVector r;
    for (int v = 0; v < kLandmarkCount; ++v)
    {
        r[2 * v] = projected(v, 0) - observed(v, 0);
        r[2 * v + 1] = projected(v, 1) - observed(v, 1);
    }
    return r;
}

JacobianMatrix jacobian(const FaceTensor& tensor, const FaceParams& params)
{
    const Eigen::Matrix<double, kExpressionBases, 1> w_exp = params.expression.full();
    const double f = params.pose.focal;

    // d(mesh)/d(w_id): column i is the tensor contracted with w_exp.
    Eigen::Matrix<double, kVertexCoords, kIdentityDims> d_id;
    // d(mesh)/d(w_free): basis k+1 minus the neutral basis, contracted with w_id.
    Eigen::Matrix<double, kVertexCoords, kFreeExpressionDims> d_exp;
    for (int vc = 0; vc < kVertexCoords; ++vc)
    {
        Eigen::Map<const Eigen::Matrix<double, kIdentityDims, kExpressionBases, Eigen::RowMajor>>
            slice(tensor.data().data() +
                  static_cast<size_t>(vc) * kIdentityDims * kExpressionBases);
        d_id.row(vc) = (slice * w_exp).transpose();
        d_exp.row(vc) =
            params.w_id.transpose() * (slice.rightCols<kFreeExpressionDims>() -
                                       slice.col(0).replicate<1, kFreeExpressionDims>());
    }

    const Eigen::Matrix3d rot = quat_to_matrix(params.pose.rotation);

    // Ambient quaternion derivative: chain the unit-sphere derivative
    // through the normalization map q -> q/|q|.
    const Eigen::Vector4d q_raw = params.pose.rotation.coeffs();
    const double n = q_raw.norm();
    const Eigen::Vector4d u = q_raw / n;
    const auto unit_derivs = rotation_derivatives(u[0], u[1], u[2], u[3]);
    const Eigen::Matrix4d chain = (Eigen::Matrix4d::Identity() - u * u.transpose()) / n;
    std::array<Eigen::Matrix3d, 4> d_rot;
    for (int c = 0; c < 4; ++c)
    {
        d_rot[c].setZero();
        for (int d = 0; d < 4; ++d)
            d_rot[c] += unit_derivs[d] * chain(d, c);
    }

    JacobianMatrix jac = JacobianMatrix::Zero();
    for (int v = 0; v < kLandmarkCount; ++v)
    {
        const Eigen::Vector3d vertex =
            Eigen::Vector3d(params.w_id.dot(d_id.row(3 * v)), params.w_id.dot(d_id.row(3 * v + 1)),
                            params.w_id.dot(d_id.row(3 * v + 2)));

        const Eigen::Matrix<double, 2, 3> fr = f * rot.topRows<2>();
        jac.block<2, kIdentityDims>(2 * v, kIdOffset) = fr * d_id.middleRows<3>(3 * v);
        jac.block<2, kFreeExpressionDims>(2 * v, kExpOffset) = fr * d_exp.middleRows<3>(3 * v);
        for (int c = 0; c < 4; ++c)
            jac.block<2, 1>(2 * v, kQuatOffset + c) = f * (d_rot[c] * vertex).head<2>();
        jac(2 * v, kTransOffset) = f;
        jac(2 * v + 1, kTransOffset + 1) = f;
        jac.block<2, 1>(2 * v, kFocalOffset) =
            (rot * vertex + params.pose.translation).head<2>();
        // t_z column stays zero: weak perspective never observes it.
    }
    return jac;
}

FitResult fit_params(const FaceTensor& tensor, const Landmarks2D& observed,
                     const FaceParams& init, const FitConfig& cfg)
{
    cfg.validate();
    init.validate(cfg.w_id_bound);

    ParamVector theta = project_constraints(pack_params(init), cfg.w_id_bound);
    ResidualVector r = residuals(tensor, unpack_params(theta), observed);
    if (!r.allFinite())
        throw std::invalid_argument("fit_params: non-finite residual at init");

    double cost = r.squaredNorm();
    double lambda = cfg.damping_init;

    FitResult result;
    for (int iter = 1; iter <= cfg.max_iters && cost > 0.0; ++iter)
    {
        const FaceParams current = unpack_params(theta);
        const JacobianMatrix jac = jacobian(tensor, current);
        const Eigen::Matrix<double, kParamDims, kParamDims> hessian = jac.transpose() * jac;
        const ParamVector gradient = jac.transpose() * r;

        bool accepted = false;
        while (lambda <= 1e14)
        {
            // Marquardt scaling: damp each diagonal in proportion to its
            // own curvature so the step is usable across the very
            // different parameter scales (weights vs pixels).
            Eigen::Matrix<double, kParamDims, kParamDims> damped = hessian;
            damped.diagonal() +=
                lambda * hessian.diagonal().cwiseMax(1e-12);
            ParamVector step = damped.ldlt().solve(-gradient);

            // Active-set refinement: a coordinate the projection would clamp
            // at a simple box bound contributes nothing; freezing it and
            // re-solving avoids the slow zigzag of pure projected steps.
            std::array<bool, kParamDims> frozen{};
            for (int pass = 0; pass < 4; ++pass)
            {
                bool grew = false;
                for (int i = 0; i < kIdentityDims; ++i)
                {
                    const int c = kIdOffset + i;
                    if (!frozen[c] && std::abs(theta[c]) >= cfg.w_id_bound - 1e-12 &&
                        std::abs(theta[c] + step[c]) > cfg.w_id_bound)
                        frozen[c] = grew = true;
                }
                for (int i = 0; i < kFreeExpressionDims; ++i)
                {
                    const int c = kExpOffset + i;
                    if (!frozen[c] && theta[c] + step[c] < 0.0 && theta[c] <= 0.0)
                        frozen[c] = grew = true;
                }
                if (!grew)
                    break;
                Eigen::Matrix<double, kParamDims, kParamDims> reduced = damped;
                ParamVector g = gradient;
                for (int c = 0; c < kParamDims; ++c)
                {
                    if (!frozen[c])
                        continue;
                    reduced.row(c).setZero();
                    reduced.col(c).setZero();
                    reduced(c, c) = 1.0;
                    g[c] = 0.0;
                }
                step = reduced.ldlt().solve(-g);
            }

            const ParamVector theta_try = project_constraints(theta + step, cfg.w_id_bound);
            const ResidualVector r_try = residuals(tensor, unpack_params(theta_try), observed);

            // Gain ratio of actual to linearized decrease for the projected
            // step. A step can lower the cost while leaving the region
            // where the linearization holds (and hop into another basin);
            // demand a minimum ratio before accepting.
            const ResidualVector r_lin = r + jac * (theta_try - theta);
            const double pred_decrease = cost - r_lin.squaredNorm();
            const double actual_decrease = cost - r_try.squaredNorm();
            const bool good_gain =
                pred_decrease <= 0.0 || actual_decrease >= 0.25 * pred_decrease;
            if (r_try.allFinite() && r_try.squaredNorm() <= cost && good_gain)
            {
                const double step_sq = (theta_try - theta).squaredNorm();
                const double decrease = cost - r_try.squaredNorm();
                theta = theta_try;
                r = r_try;
                cost = r.squaredNorm();
                lambda = std::max(lambda * 0.1, 1e-12);
                accepted = true;
                result.iterations = iter;

                // The model is bilinear, so (f, w_id, t) -> (m f, w_id/m,
                // t/m) never changes the residual. Left free, iterates
                // drift along this gauge direction until the identity
                // weights wedge against their box bound. After every
                // accepted step pick the gauge with max |w_id| = 1; the rule
                // is scale free in pixel space, which preserves the
                // translation and scale equivariance properties.
                const double id_max =
                    theta.segment<kIdentityDims>(kIdOffset).cwiseAbs().maxCoeff();
                const double m = (id_max > 1e-9) ? id_max : 1.0;
                if (std::abs(m - 1.0) > 1e-12)
                {
                    theta[kFocalOffset] *= m;
                    theta.segment<kIdentityDims>(kIdOffset) /= m;
                    theta[kTransOffset] /= m;
                    theta[kTransOffset + 1] /= m;
                    r = residuals(tensor, unpack_params(theta), observed);
                    cost = r.squaredNorm();
                }
                // The decrease tolerance is relative; an absolute threshold
                // would stop far from the optimum on pixel-scale costs.
                if (step_sq <= cfg.tol_step ||
                    decrease <= cfg.tol_residual * (1.0 + cost))
                    result.converged = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!accepted || result.converged)
            break;
    }
    if (cost == 0.0)
        result.converged = true;

    result.params = unpack_params(theta);
    result.final_rmse = std::sqrt(cost / kLandmarkCount);
    return result;
}

FaceParams default_init(const FaceTensor& tensor, const Landmarks2D& observed)
{
    ExpressionWeights neutral;
    const LandmarkMesh reference =
        synth_landmark_mesh(tensor, IdentityWeights::Ones(), neutral);
    const double model_width =
        reference.col(0).maxCoeff() - reference.col(0).minCoeff();
    const double bbox_width = observed.col(0).maxCoeff() - observed.col(0).minCoeff();

    FaceParams init;
    // The mesh is bilinear in w_id, so a zero identity vector collapses it;
    // start from the same unit-weight face the width heuristic measures.
    init.w_id = IdentityWeights::Ones();
    init.pose.focal = (model_width > 1e-9 && bbox_width > 0.0)
                          ? std::max(bbox_width / model_width, 1e-3)
                          : 1.0;
    const Eigen::RowVector2d centroid = observed.colwise().mean();
    const Eigen::RowVector3d model_centroid = reference.colwise().mean();
    init.pose.translation = {centroid.x() / init.pose.focal - model_centroid.x(),
                             centroid.y() / init.pose.focal - model_centroid.y(), 0.0};
    return init;
}

FitResult fit_params_multistart(const FaceTensor& tensor, const Landmarks2D& observed,
                                const FitConfig& cfg)
{
    constexpr double kGoodRmse = 1e-8;
    const FaceParams base = default_init(tensor, observed);
    FitResult best = fit_params(tensor, observed, base, cfg);
    if (best.final_rmse <= kGoodRmse)
        return best;

    // The frontal init's focal heuristic (bbox width over the unit-identity
    // model width) can be a few times off for faces whose identity weights
    // are small, which changes the basin reached; search a small grid of
    // focal scales and initial rotations, cheapest combinations first.
    const double s = 1.0 / std::sqrt(3.0);
    const std::array<Eigen::Vector3d, 7> axes = {
        Eigen::Vector3d{1, 0, 0},  Eigen::Vector3d{0, 1, 0},  Eigen::Vector3d{0, 0, 1},
        Eigen::Vector3d{s, s, s},  Eigen::Vector3d{s, -s, s}, Eigen::Vector3d{-s, s, s},
        Eigen::Vector3d{s, s, -s}};
    const std::array<double, 5> angles = {0.0, 12.0, -12.0, 24.0, -24.0};
    const std::array<double, 5> focal_scales = {1.0, 2.0, 2.5, 1.5, 4.0};
    for (const double k : focal_scales)
    {
        for (const double deg : angles)
        {
            for (const Eigen::Vector3d& axis : axes)
            {
                if (k == 1.0 && deg == 0.0)
                    break; // that is the initial fit above
                FaceParams init = base;
                init.pose.focal = base.pose.focal * k;
                init.pose.translation /= k; // keep the pixel offset f*t fixed
                init.pose.rotation = Quaternion::from_axis_angle(axis, deg * M_PI / 180.0);
                FitResult trial = fit_params(tensor, observed, init, cfg);
                if (trial.final_rmse < best.final_rmse)
                    best = std::move(trial);
                if (best.final_rmse <= kGoodRmse)
                    return best;
                if (deg == 0.0)
                    break; // the zero angle is axis independent
            }
        }
    }
    return best;
}

FaceParams rescale_gauge(const FaceParams& params, double target_focal, double w_id_bound)
{
    if (!(target_focal > 0.0) || !std::isfinite(target_focal))
        throw std::invalid_argument("rescale_gauge: target focal must be positive and finite");
    const double id_max = params.w_id.cwiseAbs().maxCoeff();
    const double m =
        std::max(target_focal / params.pose.focal, id_max / (0.9 * w_id_bound));
    FaceParams out = params;
    out.pose.focal *= m;
    out.w_id /= m;
    out.pose.translation.x() /= m;
    out.pose.translation.y() /= m;
    return out;
}

} // namespace facemotion
