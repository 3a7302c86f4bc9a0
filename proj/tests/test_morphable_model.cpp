/*
 * facemotion - joint face detection and facial motion retargeting toolkit.
 *
 * File: tests/test_morphable_model.cpp
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
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "facemotion/morphable_model.hpp"
#include "test_helpers.hpp"

#include <Eigen/LU>

#include <random>

using namespace facemotion;
namespace tt = facemotion::testing;

TEST_CASE("synthetic tensor is deterministic and seed-sensitive")
{
    const FaceTensor a = generate_synthetic_tensor(42);
    const FaceTensor b = generate_synthetic_tensor(42);
    CHECK(a.data() == b.data());

    const FaceTensor c = generate_synthetic_tensor(43);
    CHECK(a.data() != c.data());
}

TEST_CASE("synthetic tensor entries stay within documented bounds")
{
    const FaceTensor tensor = generate_synthetic_tensor(42);
    tensor.validate();
    for (int vc = 0; vc < kVertexCoords; ++vc)
        for (int i = 0; i < kIdentityDims; ++i)
            for (int j = 0; j < kExpressionBases; ++j)
            {
                const double v = tensor.at(vc, i, j);
                const double bound = ((j == 0) ? 100.0 : 30.0) / (1.0 + i);
                CHECK(std::isfinite(v));
                CHECK(std::abs(v) <= bound);
            }
}

TEST_CASE("constant tensor contracts to c * sum(w_id)")
{
    FaceTensor tensor;
    const double c = 2.5;
    for (double& v : tensor.data())
        v = c;

    IdentityWeights id;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> sym(-1.0, 1.0);
    for (int i = 0; i < kIdentityDims; ++i)
        id[i] = sym(rng);

    ExpressionWeights exp;
    exp.w_free[3] = 0.4;
    exp.w_free[10] = 0.1;

    const LandmarkMesh mesh = synth_landmark_mesh(tensor, id, exp);
    const double expected = c * id.sum(); // the expression simplex sums to 1
    for (int v = 0; v < kLandmarkCount; ++v)
        for (int k = 0; k < 3; ++k)
            CHECK(mesh(v, k) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("zero identity weights give the zero mesh")
{
    const FaceTensor tensor = generate_synthetic_tensor(42);
    ExpressionWeights exp;
    exp.w_free[5] = 0.7;
    const LandmarkMesh mesh = synth_landmark_mesh(tensor, IdentityWeights::Zero(), exp);
    CHECK(mesh.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mesh contraction matches the triple-loop oracle")
{
    const FaceTensor tensor = generate_synthetic_tensor(42);
    std::mt19937_64 rng(123);
    for (int trial = 0; trial < 5; ++trial)
    {
        const FaceParams params = tt::random_params(rng);
        const LandmarkMesh fast = synth_landmark_mesh(tensor, params.w_id, params.expression);
        const LandmarkMesh slow = tt::mesh_oracle(tensor, params.w_id, params.expression);
        const double scale = std::max(1.0, slow.cwiseAbs().maxCoeff());
        CHECK((fast - slow).cwiseAbs().maxCoeff() / scale < 1e-12);
    }
}

TEST_CASE("mesh is bilinear in the identity weights")
{
    const FaceTensor tensor = generate_synthetic_tensor(42);
    std::mt19937_64 rng(5);
    const FaceParams p1 = tt::random_params(rng);
    const FaceParams p2 = tt::random_params(rng);
    const double a = 0.3, b = -1.7;

    const IdentityWeights mixed = a * p1.w_id + b * p2.w_id;
    const LandmarkMesh lhs = synth_landmark_mesh(tensor, mixed, p1.expression);
    const LandmarkMesh rhs = a * synth_landmark_mesh(tensor, p1.w_id, p1.expression) +
                             b * synth_landmark_mesh(tensor, p2.w_id, p1.expression);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("quat_to_matrix basics")
{
    CHECK((quat_to_matrix({1, 0, 0, 0}) - Eigen::Matrix3d::Identity()).norm() < 1e-15);

    // 90 degrees about x maps (0,1,0) to (0,0,1).
    const double s = std::sqrt(0.5);
    const Eigen::Vector3d mapped = quat_to_matrix({s, s, 0, 0}) * Eigen::Vector3d(0, 1, 0);
    CHECK((mapped - Eigen::Vector3d(0, 0, 1)).norm() < 1e-12);

    CHECK_THROWS_AS(quat_to_matrix({0, 0, 0, 0}), std::invalid_argument);
}

TEST_CASE("random quaternions give proper rotations and q == -q")
{
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 1000; ++trial)
    {
        const Quaternion q = tt::random_unit_quaternion(rng);
        const Eigen::Matrix3d r = quat_to_matrix(q);
        CHECK((r * r.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-9);
        CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-9));

        const Eigen::Matrix3d r_neg = quat_to_matrix({-q.w, -q.x, -q.y, -q.z});
        CHECK((r - r_neg).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("projection drops z and is linear in focal and translation")
{
    const FaceTensor tensor = generate_synthetic_tensor(42);
    std::mt19937_64 rng(11);
    FaceParams params = tt::random_params(rng);

    const Landmarks2D base = project_landmarks(tensor, params);

    SUBCASE("doubling focal doubles all coordinates")
    {
        FaceParams doubled = params;
        doubled.pose.focal *= 2.0;
        const Landmarks2D scaled = project_landmarks(tensor, doubled);
        CHECK((scaled - 2.0 * base).cwiseAbs().maxCoeff() < 1e-9);
    }

    SUBCASE("translating by (dx,dy,0) shifts by (f*dx, f*dy)")
    {
        FaceParams shifted = params;
        shifted.pose.translation += Eigen::Vector3d(3.0, -2.0, 0.0);
        const Landmarks2D moved = project_landmarks(tensor, shifted);
        Landmarks2D expected = base;
        expected.col(0).array() += params.pose.focal * 3.0;
        expected.col(1).array() += params.pose.focal * -2.0;
        CHECK((moved - expected).cwiseAbs().maxCoeff() < 1e-9);
    }

    SUBCASE("t_z never influences the projection")
    {
        // Bypass the Pose invariant deliberately: the projection math must
        // ignore the third translation component regardless.
        FaceParams deep = params;
        deep.pose.translation.z() = 1234.5;
        const Landmarks2D moved = project_landmarks(tensor, deep);
        CHECK((moved - base).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("identity projection of a single conceptual vertex keeps x,y")
{
    // R = I, t = 0, f = 1: the projection of any mesh point is its (x,y).
    FaceTensor tensor;
    // One identity basis, neutral expression only: vertex 0 at (2,3,5).
    tensor.at(0, 0, 0) = 2.0;
    tensor.at(1, 0, 0) = 3.0;
    tensor.at(2, 0, 0) = 5.0;

    FaceParams params;
    params.w_id[0] = 1.0;

    const Landmarks2D projected = project_landmarks(tensor, params);
    CHECK(projected(0, 0) == doctest::Approx(2.0));
    CHECK(projected(0, 1) == doctest::Approx(3.0));
}

TEST_CASE("expression convexity: mesh is a convex combination of blendshape meshes")
{
    const FaceTensor tensor = generate_synthetic_tensor(42);
    std::mt19937_64 rng(17);
    const FaceParams params = tt::random_params(rng);

    LandmarkMesh combo = LandmarkMesh::Zero();
    const auto w_full = params.expression.full();
    for (int j = 0; j < kExpressionBases; ++j)
    {
        ExpressionWeights pure; // full weight on blendshape j
        if (j > 0)
            pure.w_free[j - 1] = 1.0;
        combo += w_full[j] * synth_landmark_mesh(tensor, params.w_id, pure);
    }
    const LandmarkMesh direct = synth_landmark_mesh(tensor, params.w_id, params.expression);
    CHECK((combo - direct).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("expression weights invariants are enforced")
{
    ExpressionWeights exp;
    exp.w_free[0] = -0.1;
    CHECK_THROWS_AS(exp.validate(), std::invalid_argument);

    exp.w_free.setConstant(0.5); // sums to 23
    CHECK_THROWS_AS(exp.validate(), std::invalid_argument);

    exp.w_free.setZero();
    exp.w_free[1] = 0.6;
    exp.w_free[2] = 0.3;
    CHECK_NOTHROW(exp.validate());
    CHECK(exp.neutral_weight() == doctest::Approx(0.1));
    CHECK(exp.full().sum() == doctest::Approx(1.0).epsilon(1e-15));
}
