/*
 * facemotion - joint face detection and facial motion retargeting toolkit.
 *
 * File: tests/test_helpers.hpp
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

#include "facemotion/param_fitting.hpp"
#include "facemotion/types.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace facemotion::testing {

inline Quaternion random_unit_quaternion(std::mt19937_64& rng)
{
    std::normal_distribution<double> gauss(0.0, 1.0);
    return Quaternion(gauss(rng), gauss(rng), gauss(rng), gauss(rng)).normalized();
}

/// Random parameters satisfying all invariants, comfortably inside bounds.
inline FaceParams random_params(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> sym(-1.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    FaceParams params;
    for (int i = 0; i < kIdentityDims; ++i)
        params.w_id[i] = 1.5 * sym(rng);
    for (int k = 0; k < 5; ++k)
    {
        const int idx = std::min(static_cast<int>(unit(rng) * kFreeExpressionDims),
                                 kFreeExpressionDims - 1);
        params.expression.w_free[idx] = 0.15 * unit(rng);
    }
    params.pose.rotation = random_unit_quaternion(rng);
    params.pose.translation = {50.0 * sym(rng), 50.0 * sym(rng), 0.0};
    params.pose.focal = 0.5 + 1.5 * unit(rng);
    return params;
}

/// Small perturbation of valid parameters: rotation by at most
/// max_angle_rad, additive weight noise, multiplicative focal factor.
/// The result is projected back onto the constraint set.
inline FaceParams perturb_params(const FaceParams& params, std::mt19937_64& rng,
                                 double max_angle_rad, double weight_noise, double focal_factor,
                                 double w_id_bound = 3.0)
{
    std::uniform_real_distribution<double> sym(-1.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    FaceParams out = params;
    for (int i = 0; i < kIdentityDims; ++i)
        out.w_id[i] += weight_noise * sym(rng);
    for (int i = 0; i < kFreeExpressionDims; ++i)
        out.expression.w_free[i] += weight_noise * sym(rng);

    const Eigen::Vector3d axis(gauss(rng), gauss(rng), gauss(rng));
    const Quaternion delta = Quaternion::from_axis_angle(axis, max_angle_rad * unit(rng));
    // Quaternion product delta * q.
    const Quaternion q = out.pose.rotation;
    out.pose.rotation = Quaternion(
        delta.w * q.w - delta.x * q.x - delta.y * q.y - delta.z * q.z,
        delta.w * q.x + delta.x * q.w + delta.y * q.z - delta.z * q.y,
        delta.w * q.y - delta.x * q.z + delta.y * q.w + delta.z * q.x,
        delta.w * q.z + delta.x * q.y - delta.y * q.x + delta.z * q.w);

    out.pose.focal *= focal_factor;
    return unpack_params(project_constraints(pack_params(out), w_id_bound));
}

/// Independent triple-loop contraction oracle for the landmark mesh.
inline LandmarkMesh mesh_oracle(const FaceTensor& tensor, const IdentityWeights& id,
                                const ExpressionWeights& exp)
{
    const auto w_exp = exp.full();
    LandmarkMesh mesh = LandmarkMesh::Zero();
    for (int v = 0; v < kLandmarkCount; ++v)
        for (int c = 0; c < 3; ++c)
        {
            double acc = 0.0;
            for (int i = 0; i < kIdentityDims; ++i)
                for (int j = 0; j < kExpressionBases; ++j)
                    acc += tensor.at(3 * v + c, i, j) * id[i] * w_exp[j];
            mesh(v, c) = acc;
        }
    return mesh;
}

} // namespace facemotion::testing
