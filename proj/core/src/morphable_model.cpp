/*
 * facemotion - joint face detection and facial motion retargeting toolkit.
 *
 * File: core/src/morphable_model.cpp
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
#include "facemotion/morphable_model.hpp"

#include <random>

namespace facemotion {

FaceTensor generate_synthetic_tensor(unsigned int seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> neutral(-100.0, 100.0);
    std::uniform_real_distribution<double> offset(-30.0, 30.0);

    FaceTensor tensor;
    for (int vc = 0; vc < kVertexCoords; ++vc)
    {
        for (int i = 0; i < kIdentityDims; ++i)
        {
            const double decay = 1.0 / (1.0 + i); // PCA-like magnitude ordering
            for (int j = 0; j < kExpressionBases; ++j)
            {
                const double base = (j == 0) ? neutral(rng) : offset(rng);
                tensor.at(vc, i, j) = base * decay;
            }
        }
    }
    return tensor;
}

LandmarkMesh synth_landmark_mesh(const FaceTensor& tensor, const IdentityWeights& id,
                                 const ExpressionWeights& exp)
{
    const Eigen::Matrix<double, kExpressionBases, 1> w_exp = exp.full();

    LandmarkMesh mesh;
    for (int vc = 0; vc < kVertexCoords; ++vc)
    {
        // Row of the (identity x expression) slice for this coordinate.
        Eigen::Map<const Eigen::Matrix<double, kIdentityDims, kExpressionBases, Eigen::RowMajor>>
            slice(tensor.data().data() +
                  static_cast<size_t>(vc) * kIdentityDims * kExpressionBases);
        mesh(vc / 3, vc % 3) = id.dot(slice * w_exp);
    }
    return mesh;
}

Eigen::Matrix3d quat_to_matrix(const Quaternion& q)
{
    const Quaternion u = q.normalized();
    const double w = u.w, x = u.x, y = u.y, z = u.z;

    Eigen::Matrix3d r;
    r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
         2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
         2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return r;
}

Landmarks2D project_mesh(const LandmarkMesh& mesh, const Pose& pose)
{
    const Eigen::Matrix3d r = quat_to_matrix(pose.rotation);
    Landmarks2D out;
    for (int v = 0; v < kLandmarkCount; ++v)
    {
        const Eigen::Vector3d p = r * mesh.row(v).transpose() + pose.translation;
        out(v, 0) = pose.focal * p.x();
        out(v, 1) = pose.focal * p.y();
    }
    return out;
}

Landmarks2D project_landmarks(const FaceTensor& tensor, const FaceParams& params)
{
    return project_mesh(synth_landmark_mesh(tensor, params.w_id, params.expression), params.pose);
}

} // namespace facemotion
