/*
 * facemotion - joint face detection and facial motion retargeting toolkit.
 *
 * File: tests/test_retarget.cpp
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
#include "facemotion/retarget.hpp"
#include "test_helpers.hpp"

#include <random>

using namespace facemotion;
using namespace facemotion::testing;

TEST_CASE("identity mapping reproduces the free expression coefficients")
{
    std::mt19937_64 rng(1);
    const FaceParams params = random_params(rng);

    const RigPose pose = map_to_rig(params, RigMapping::identity_mapping());
    REQUIRE(pose.weights.size() == static_cast<size_t>(kFreeExpressionDims));
    for (int i = 0; i < kFreeExpressionDims; ++i)
    {
        const std::string name = "blendshape_" + std::to_string(i + 1);
        REQUIRE(pose.weights.count(name) == 1);
        CHECK(pose.weights.at(name) == params.expression.w_free[i]);
    }
    // map_to_rig renormalizes the quaternion, which can move the last bit.
    CHECK(pose.rotation.w == doctest::Approx(params.pose.rotation.w).epsilon(1e-15));
    CHECK(pose.rotation.x == doctest::Approx(params.pose.rotation.x).epsilon(1e-15));
}

TEST_CASE("gain and clamp are applied per entry")
{
    FaceParams params;
    params.expression.w_free[2] = 0.4;
    params.expression.w_free[9] = 0.5;

    RigMapping mapping;
    mapping.entries.push_back({3, "brow", 2.0, 0.0, 1.0});
    mapping.entries.push_back({10, "jaw", 3.0, 0.0, 0.9});
    mapping.entries.push_back({1, "lift", 1.0, 0.25, 1.0});
    mapping.pass_pose = false;

    const RigPose pose = map_to_rig(params, mapping);
    CHECK(pose.weights.at("brow") == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(pose.weights.at("jaw") == 0.9);  // 1.5 clamped from above
    CHECK(pose.weights.at("lift") == 0.25); // 0.0 clamped from below
    CHECK(pose.rotation.w == 1.0);          // pose withheld -> identity
    CHECK(pose.rotation.x == 0.0);
}

TEST_CASE("neutral face maps to all-zero rig weights")
{
    FaceParams params;
    const RigPose pose = map_to_rig(params, RigMapping::identity_mapping());
    for (const auto& [name, w] : pose.weights)
        CHECK(w == 0.0);
}

TEST_CASE("duplicate target names and bad entries are rejected")
{
    FaceParams params;
    RigMapping dup;
    dup.entries.push_back({1, "a", 1.0, 0.0, 1.0});
    dup.entries.push_back({2, "a", 1.0, 0.0, 1.0});
    CHECK_THROWS_AS(map_to_rig(params, dup), std::invalid_argument);

    RigMapping bad_index;
    bad_index.entries.push_back({0, "a", 1.0, 0.0, 1.0});
    CHECK_THROWS_AS(bad_index.validate(), std::invalid_argument);
    bad_index.entries[0].source_index = 47;
    CHECK_THROWS_AS(bad_index.validate(), std::invalid_argument);

    RigMapping bad_clamp;
    bad_clamp.entries.push_back({1, "a", 1.0, 0.8, 0.2});
    CHECK_THROWS_AS(bad_clamp.validate(), std::invalid_argument);
}

TEST_CASE("retargeted weights are invariant to translation and focal of the source")
{
    std::mt19937_64 rng(2);
    const FaceParams params = random_params(rng);

    FaceParams moved = params;
    moved.pose.translation[0] += 80.0;
    moved.pose.translation[1] -= 35.0;
    moved.pose.focal *= 2.3;

    const RigPose a = map_to_rig(params, RigMapping::identity_mapping());
    const RigPose b = map_to_rig(moved, RigMapping::identity_mapping());
    for (const auto& [name, w] : a.weights)
        CHECK(b.weights.at(name) == w);
}

TEST_CASE("track_next_bbox pads the landmark bounds")
{
    Landmarks2D lm = Landmarks2D::Zero();
    // Spread landmarks across a 40x20 box anchored at (10, 30).
    for (int v = 0; v < kLandmarkCount; ++v)
    {
        lm(v, 0) = 10.0 + 40.0 * v / (kLandmarkCount - 1);
        lm(v, 1) = 30.0 + 20.0 * v / (kLandmarkCount - 1);
    }
    const EvalBox box = track_next_bbox(lm, 0.1);
    CHECK(box.x0 == doctest::Approx(10.0 - 4.0).epsilon(1e-12));
    CHECK(box.x1 == doctest::Approx(50.0 + 4.0).epsilon(1e-12));
    CHECK(box.y0 == doctest::Approx(30.0 - 4.0).epsilon(1e-12));
    CHECK(box.y1 == doctest::Approx(50.0 + 4.0).epsilon(1e-12));

    CHECK_THROWS_AS(track_next_bbox(Landmarks2D::Zero()), std::invalid_argument);
}

TEST_CASE("tracking follows a drifting face over a short sequence")
{
    const FaceTensor tensor = generate_synthetic_tensor(7);
    std::mt19937_64 rng(3);
    FaceParams truth = random_params(rng);

    FitConfig cfg;
    FaceParams estimate = truth; // frame 0 assumed fitted exactly
    for (int frame = 1; frame <= 3; ++frame)
    {
        truth.pose.translation[0] += 3.0;
        truth.pose.translation[1] += 2.0;
        const Landmarks2D observed = project_landmarks(tensor, truth);

        // The new landmarks must stay inside the predicted search box.
        const EvalBox box = track_next_bbox(project_landmarks(tensor, estimate), 0.25);
        for (int v = 0; v < kLandmarkCount; ++v)
        {
            CHECK(observed(v, 0) >= box.x0);
            CHECK(observed(v, 0) <= box.x1);
            CHECK(observed(v, 1) >= box.y0);
            CHECK(observed(v, 1) <= box.y1);
        }

        // Warm-started fit recovers the moved face.
        const FitResult fit = fit_params(tensor, observed, estimate, cfg);
        CHECK(fit.final_rmse < 1e-6);
        estimate = fit.params;
    }
    // The bilinear gauge freedom rescales (f, w_id, t) jointly, so compare
    // the gauge-invariant pixel offset f * t instead of raw translation.
    CHECK(std::abs(estimate.pose.focal * estimate.pose.translation[0] -
                   truth.pose.focal * truth.pose.translation[0]) < 1e-6);
}

TEST_CASE("synth_scene is deterministic and validates n_faces")
{
    const FaceTensor tensor = generate_synthetic_tensor(11);
    CHECK_THROWS_AS(synth_scene(tensor, 0, 5), std::invalid_argument);
    CHECK_THROWS_AS(synth_scene(tensor, 21, 5), std::invalid_argument);

    const SynthScene a = synth_scene(tensor, 3, 42);
    const SynthScene b = synth_scene(tensor, 3, 42);
    REQUIRE(a.faces.size() == 3);
    REQUIRE(b.faces.size() == 3);
    for (size_t i = 0; i < a.faces.size(); ++i)
    {
        CHECK(a.faces[i].bbox.x0 == b.faces[i].bbox.x0);
        CHECK((a.faces[i].landmarks - b.faces[i].landmarks).cwiseAbs().maxCoeff() == 0.0);
        CHECK((a.faces[i].params.w_id - b.faces[i].params.w_id).cwiseAbs().maxCoeff() == 0.0);
    }
    const SynthScene c = synth_scene(tensor, 3, 43);
    CHECK((a.faces[0].landmarks - c.faces[0].landmarks).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("synth_scene faces do not overlap and respect the image bounds")
{
    const FaceTensor tensor = generate_synthetic_tensor(11);
    GridCodecConfig cfg;
    for (unsigned int seed : {1u, 2u, 3u})
    {
        const SynthScene scene = synth_scene(tensor, 5, seed, cfg);
        REQUIRE(scene.faces.size() == 5);
        REQUIRE(scene.gt.entries.size() == 5);
        for (const SceneFace& face : scene.faces)
        {
            CHECK(face.bbox.x0 >= 0.0);
            CHECK(face.bbox.y0 >= 0.0);
            CHECK(face.bbox.x1 <= cfg.image_size);
            CHECK(face.bbox.y1 <= cfg.image_size);
            face.params.validate();
        }
        for (size_t i = 0; i < scene.faces.size(); ++i)
            for (size_t j = i + 1; j < scene.faces.size(); ++j)
                CHECK(iou(scene.faces[i].bbox, scene.faces[j].bbox) == 0.0);
    }
}

TEST_CASE("synth_scene grid decodes back to the planted faces")
{
    const FaceTensor tensor = generate_synthetic_tensor(11);
    GridCodecConfig cfg;
    const SynthScene scene = synth_scene(tensor, 4, 9, cfg);

    const auto detections = decode_grid(tensor, scene.grid, 0.5, cfg);
    REQUIRE(detections.size() == 4);
    for (const SceneFace& face : scene.faces)
    {
        // Match by box center; every face must appear exactly once.
        const double cx = 0.5 * (face.bbox.x0 + face.bbox.x1) / cfg.cell_to_pixels();
        const double cy = 0.5 * (face.bbox.y0 + face.bbox.y1) / cfg.cell_to_pixels();
        int matches = 0;
        for (const DetectionBox& det : detections)
            if (std::abs(det.bx - cx) < 1e-6 && std::abs(det.by - cy) < 1e-6)
            {
                ++matches;
                CHECK((det.params.w_id - face.params.w_id).cwiseAbs().maxCoeff() < 1e-9);
                CHECK((det.params.expression.w_free - face.params.expression.w_free)
                          .cwiseAbs()
                          .maxCoeff() < 2e-7);
            }
        CHECK(matches == 1);
    }
}

TEST_CASE("weak ground truth round-trips the observed landmarks")
{
    const FaceTensor tensor = generate_synthetic_tensor(11);
    GridCodecConfig cfg;
    const SynthScene scene = synth_scene(tensor, 2, 17, cfg);

    std::vector<Landmarks2D> observed;
    for (const SceneFace& face : scene.faces)
        observed.push_back(face.landmarks);

    const WeakGroundTruth weak = weak_gt_generate(tensor, observed, {}, cfg);
    REQUIRE(weak.fits.size() == 2);
    REQUIRE(weak.gt.entries.size() == 2);
    for (size_t i = 0; i < weak.fits.size(); ++i)
    {
        CHECK(weak.fits[i].final_rmse < 1e-4);
        const Landmarks2D refit = project_landmarks(tensor, weak.fits[i].params);
        CHECK((refit - observed[i]).cwiseAbs().maxCoeff() < 1e-3);
    }
}

TEST_CASE("weak ground truth rejects empty input")
{
    const FaceTensor tensor = generate_synthetic_tensor(11);
    CHECK_THROWS_AS(weak_gt_generate(tensor, {}), std::invalid_argument);
}

TEST_CASE("weak ground truth surfaces slot collisions")
{
    const FaceTensor tensor = generate_synthetic_tensor(11);
    const SynthScene scene = synth_scene(tensor, 1, 23);

    // The same face twice lands in the same cell and anchor.
    const std::vector<Landmarks2D> twice{scene.faces[0].landmarks, scene.faces[0].landmarks};
    CHECK_THROWS_AS(weak_gt_generate(tensor, twice), GridCollisionError);
}
