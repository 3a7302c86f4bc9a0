/*
 * facemotion - joint face detection and facial motion retargeting toolkit.
 *
 * File: tests/test_io.cpp
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

#include "facemotion/io.hpp"
#include "facemotion/morphable_model.hpp"
#include "facemotion/retarget.hpp"
#include "test_helpers.hpp"

#include <filesystem>
#include <fstream>
#include <random>

using namespace facemotion;
using namespace facemotion::testing;
namespace fs = std::filesystem;

namespace {

struct TempDir
{
    fs::path path;
    TempDir()
    {
        path = fs::temp_directory_path() / fs::path("facemotion_io_test_" + std::to_string(
                   std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("face tensor blob round trip is bit exact")
{
    TempDir dir;
    const FaceTensor tensor = generate_synthetic_tensor(5);
    const fs::path file = dir.path / "tensor.ft3d";
    save_face_tensor(tensor, file);

    const FaceTensor loaded = load_face_tensor(file);
    REQUIRE(loaded.data().size() == tensor.data().size());
    for (size_t i = 0; i < tensor.data().size(); ++i)
        CHECK(loaded.data()[i] == tensor.data()[i]);
}

TEST_CASE("grid tensor blob round trip is bit exact")
{
    TempDir dir;
    const FaceTensor tensor = generate_synthetic_tensor(5);
    const SynthScene scene = synth_scene(tensor, 3, 8);
    const fs::path file = dir.path / "grid.grd1";
    save_grid_tensor(scene.grid, file);

    const GridTensor loaded = load_grid_tensor(file);
    REQUIRE(loaded.data().size() == scene.grid.data().size());
    for (size_t i = 0; i < scene.grid.data().size(); ++i)
        CHECK(loaded.data()[i] == scene.grid.data()[i]);
}

TEST_CASE("corrupt blobs are rejected")
{
    TempDir dir;
    const FaceTensor tensor = generate_synthetic_tensor(5);
    const fs::path good = dir.path / "tensor.ft3d";
    save_face_tensor(tensor, good);

    // Wrong magic.
    {
        std::fstream f(good, std::ios::in | std::ios::out | std::ios::binary);
        f.write("XXXX", 4);
    }
    CHECK_THROWS_AS(load_face_tensor(good), std::invalid_argument);

    // Truncated payload.
    save_face_tensor(tensor, good);
    fs::resize_file(good, fs::file_size(good) / 2);
    CHECK_THROWS_AS(load_face_tensor(good), std::invalid_argument);

    // Missing file.
    CHECK_THROWS_AS(load_face_tensor(dir.path / "missing.ft3d"), std::invalid_argument);

    // Face tensor loaded as grid and vice versa.
    save_face_tensor(tensor, good);
    CHECK_THROWS_AS(load_grid_tensor(good), std::invalid_argument);
}

TEST_CASE("params JSON round trip")
{
    std::mt19937_64 rng(1);
    const FaceParams params = random_params(rng);
    const FaceParams back = params_from_json(params_to_json(params));

    CHECK((back.w_id - params.w_id).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.expression.w_free - params.expression.w_free).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.pose.rotation.w == params.pose.rotation.w);
    CHECK(back.pose.rotation.z == params.pose.rotation.z);
    CHECK(back.pose.translation == params.pose.translation);
    CHECK(back.pose.focal == params.pose.focal);
}

TEST_CASE("params JSON validates shape and invariants")
{
    nlohmann::json j = params_to_json(FaceParams{});
    j["w_id"] = std::vector<double>(49, 0.0);
    CHECK_THROWS_AS(params_from_json(j), std::invalid_argument);

    j = params_to_json(FaceParams{});
    j["w_exp"][0] = 1.5; // outside [0,1]
    CHECK_THROWS_AS(params_from_json(j), std::invalid_argument);

    j = params_to_json(FaceParams{});
    j.erase("f");
    CHECK_THROWS(params_from_json(j));
}

TEST_CASE("landmarks JSON round trip")
{
    std::mt19937_64 rng(2);
    Landmarks2D lm;
    std::uniform_real_distribution<double> pix(0.0, 288.0);
    for (int v = 0; v < kLandmarkCount; ++v)
    {
        lm(v, 0) = pix(rng);
        lm(v, 1) = pix(rng);
    }
    const Landmarks2D back = landmarks_from_json(landmarks_to_json(lm));
    CHECK((back - lm).cwiseAbs().maxCoeff() == 0.0);

    nlohmann::json j = landmarks_to_json(lm);
    j["landmarks"].erase(0);
    CHECK_THROWS_AS(landmarks_from_json(j), std::invalid_argument);
}

TEST_CASE("detection and eval box JSON round trips")
{
    std::mt19937_64 rng(3);
    DetectionBox det;
    det.bx = 3.25;
    det.by = 4.5;
    det.bw = 1.75;
    det.bh = 2.0;
    det.objectness = 0.92;
    det.params = random_params(rng);
    const DetectionBox back = detection_from_json(detection_to_json(det));
    CHECK(back.bx == det.bx);
    CHECK(back.bh == det.bh);
    CHECK(back.objectness == det.objectness);
    CHECK((back.params.w_id - det.params.w_id).cwiseAbs().maxCoeff() == 0.0);

    const EvalBox box{1.5, 2.5, 10.0, 12.0, 0.8};
    const EvalBox box_back = eval_box_from_json(eval_box_to_json(box));
    CHECK(box_back.x0 == box.x0);
    CHECK(box_back.y1 == box.y1);
    CHECK(box_back.score == box.score);
}

TEST_CASE("rig mapping JSON parsing and rig pose serialization")
{
    const nlohmann::json j = {
        {"pass_pose", false},
        {"entries",
         {{{"source", 3}, {"target", "brow"}, {"gain", 2.0}},
          {{"source", 10}, {"target", "jaw"}, {"gain", 1.0}, {"clamp_lo", 0.1},
           {"clamp_hi", 0.9}}}},
    };
    const RigMapping mapping = rig_mapping_from_json(j);
    REQUIRE(mapping.entries.size() == 2);
    CHECK(mapping.entries[0].source_index == 3);
    CHECK(mapping.entries[0].gain == 2.0);
    CHECK(mapping.entries[0].clamp_hi == 1.0); // defaults applied
    CHECK(mapping.entries[1].clamp_lo == 0.1);
    CHECK_FALSE(mapping.pass_pose);

    FaceParams params;
    params.expression.w_free[2] = 0.3;
    const RigPose pose = map_to_rig(params, mapping);
    const nlohmann::json out = rig_pose_to_json(pose);
    CHECK(out["weights"]["brow"] == 0.6);
    CHECK(out["rotation"][0] == 1.0);

    nlohmann::json bad = j;
    bad["entries"][0]["source"] = 0;
    CHECK_THROWS_AS(rig_mapping_from_json(bad), std::invalid_argument);
}
