/*
 * facemotion - joint face detection and facial motion retargeting toolkit.
 *
 * File: core/include/facemotion/types.hpp
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

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace facemotion {

// Model dimensions (reduced landmark-only face tensor).
inline constexpr int kLandmarkCount = 68;
inline constexpr int kVertexCoords = kLandmarkCount * 3; // 204
inline constexpr int kIdentityDims = 50;
inline constexpr int kExpressionBases = 47; // 1 neutral + 46 micro-expressions
inline constexpr int kFreeExpressionDims = kExpressionBases - 1;

using IdentityWeights = Eigen::Matrix<double, kIdentityDims, 1>;
using Landmarks2D = Eigen::Matrix<double, kLandmarkCount, 2>;
using LandmarkMesh = Eigen::Matrix<double, kLandmarkCount, 3>;

/**
 * Reduced multilinear face model: 68 landmark vertices x 50 identity bases
 * x 47 expression blendshapes, stored row-major by
 * (vertex-coordinate, identity-basis, expression-basis).
 *
 * Expression basis 0 is the neutral blendshape; bases 1..46 are
 * micro-expression offsets combined with convex weights.
 */
class FaceTensor
{
public:
    FaceTensor() : values_(static_cast<size_t>(kVertexCoords) * kIdentityDims * kExpressionBases, 0.0) {}

    double& at(int vertex_coord, int identity_basis, int expression_basis)
    {
        return values_[index(vertex_coord, identity_basis, expression_basis)];
    }
    double at(int vertex_coord, int identity_basis, int expression_basis) const
    {
        return values_[index(vertex_coord, identity_basis, expression_basis)];
    }

    const std::vector<double>& data() const { return values_; }
    std::vector<double>& data() { return values_; }

    /// Throws std::invalid_argument if any entry is non-finite.
    void validate() const
    {
        for (double v : values_)
            if (!std::isfinite(v))
                throw std::invalid_argument("FaceTensor: non-finite entry");
    }

private:
    static size_t index(int vc, int id, int exp)
    {
        return (static_cast<size_t>(vc) * kIdentityDims + id) * kExpressionBases + exp;
    }
    std::vector<double> values_;
};

/**
 * Expression weights store the 46 free coefficients (blendshapes 1..46);
 * the neutral weight is derived as 1 - sum so the full 47-vector lies on
 * the simplex.
 */
struct ExpressionWeights
{
    Eigen::Matrix<double, kFreeExpressionDims, 1> w_free =
        Eigen::Matrix<double, kFreeExpressionDims, 1>::Zero();

    double neutral_weight() const { return 1.0 - w_free.sum(); }

    /// Full 47-vector (neutral first) on the simplex.
    Eigen::Matrix<double, kExpressionBases, 1> full() const
    {
        Eigen::Matrix<double, kExpressionBases, 1> w;
        w[0] = neutral_weight();
        w.tail<kFreeExpressionDims>() = w_free;
        return w;
    }

    void validate() const
    {
        for (int i = 0; i < kFreeExpressionDims; ++i)
            if (!(w_free[i] >= 0.0 && w_free[i] <= 1.0))
                throw std::invalid_argument("ExpressionWeights: coefficient outside [0,1]");
        if (w_free.sum() > 1.0 + 1e-12)
            throw std::invalid_argument("ExpressionWeights: free coefficients sum above 1");
    }
};

/**
 * Unit quaternion in (w, x, y, z) order, sign-canonicalized to w >= 0
 * so that q and -q, which encode the same rotation, compare equal.
 */
struct Quaternion
{
    double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

    Quaternion() = default;
    Quaternion(double w_, double x_, double y_, double z_) : w(w_), x(x_), y(y_), z(z_) {}

    double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

    Eigen::Vector4d coeffs() const { return {w, x, y, z}; }

    /// Unit-norm, w >= 0 representative. Throws on (near-)zero norm.
    Quaternion normalized() const
    {
        const double n = norm();
        if (!(n > 1e-12) || !std::isfinite(n))
            throw std::invalid_argument("Quaternion: zero or non-finite norm");
        const double s = (w < 0.0) ? -1.0 / n : 1.0 / n;
        return {w * s, x * s, y * s, z * s};
    }

    static Quaternion from_axis_angle(const Eigen::Vector3d& axis, double angle_rad)
    {
        const Eigen::Vector3d u = axis.normalized();
        const double h = 0.5 * angle_rad;
        return Quaternion(std::cos(h), u.x() * std::sin(h), u.y() * std::sin(h), u.z() * std::sin(h))
            .normalized();
    }
};

/**
 * Weak-perspective pose: rotation, in-plane translation (model units;
 * t_z is unobservable under the projection and kept at 0), and the
 * model-units-to-pixels focal scale.
 */
struct Pose
{
    Quaternion rotation;
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();
    double focal = 1.0;

    void validate() const
    {
        if (!(focal > 0.0) || !std::isfinite(focal))
            throw std::invalid_argument("Pose: focal must be positive and finite");
        if (!translation.allFinite())
            throw std::invalid_argument("Pose: non-finite translation");
        if (translation.z() != 0.0)
            throw std::invalid_argument("Pose: t_z must be 0");
        rotation.normalized(); // throws on degenerate quaternion
    }
};

/// Full parameter set driving the model: identity, expression, pose.
struct FaceParams
{
    IdentityWeights w_id = IdentityWeights::Zero();
    ExpressionWeights expression;
    Pose pose;

    void validate(double w_id_bound = 3.0) const
    {
        if (!w_id.allFinite())
            throw std::invalid_argument("FaceParams: non-finite identity weights");
        if (w_id.cwiseAbs().maxCoeff() > w_id_bound + 1e-12)
            throw std::invalid_argument("FaceParams: identity weight outside bound");
        expression.validate();
        pose.validate();
    }
};

} // namespace facemotion
