/*
 * facemotion - joint face detection and facial motion retargeting toolkit.
 *
 * File: benchmarks/benchmarks.cpp
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
#include "facemotion/detection_eval.hpp"
#include "facemotion/grid_codec.hpp"
#include "facemotion/morphable_model.hpp"
#include "facemotion/param_fitting.hpp"
#include "facemotion/retarget.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace facemotion;

namespace {

const FaceTensor& shared_tensor()
{
    static const FaceTensor tensor = generate_synthetic_tensor(1);
    return tensor;
}

FaceParams bench_params(unsigned int seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> sym(-1.0, 1.0);
    FaceParams params;
    for (int i = 0; i < kIdentityDims; ++i)
        params.w_id[i] = sym(rng);
    params.expression.w_free[3] = 0.2;
    params.expression.w_free[17] = 0.1;
    params.pose.rotation = Quaternion::from_axis_angle({0.3, 1.0, 0.1}, 0.2);
    params.pose.translation = {40.0, -25.0, 0.0};
    params.pose.focal = 1.3;
    return params;
}

void BM_synth_landmark_mesh(benchmark::State& state)
{
    const FaceTensor& tensor = shared_tensor();
    const FaceParams params = bench_params(2);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            synth_landmark_mesh(tensor, params.w_id, params.expression));
}
BENCHMARK(BM_synth_landmark_mesh);

void BM_jacobian(benchmark::State& state)
{
    const FaceTensor& tensor = shared_tensor();
    const FaceParams params = bench_params(3);
    for (auto _ : state)
        benchmark::DoNotOptimize(jacobian(tensor, params));
}
BENCHMARK(BM_jacobian);

void BM_fit_params(benchmark::State& state)
{
    const FaceTensor& tensor = shared_tensor();
    const FaceParams truth = bench_params(4);
    const Landmarks2D observed = project_landmarks(tensor, truth);
    FaceParams init = truth;
    init.pose.translation[0] += 5.0;
    init.w_id[0] += 0.2;
    for (auto _ : state)
        benchmark::DoNotOptimize(fit_params(tensor, observed, init));
}
BENCHMARK(BM_fit_params);

void BM_encode_decode_grid(benchmark::State& state)
{
    const FaceTensor& tensor = shared_tensor();
    const SynthScene scene = synth_scene(tensor, static_cast<int>(state.range(0)), 5);
    for (auto _ : state)
        benchmark::DoNotOptimize(decode_grid(tensor, scene.grid, 0.5));
}
BENCHMARK(BM_encode_decode_grid)->Arg(1)->Arg(5)->Arg(20);

void BM_nms(benchmark::State& state)
{
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> pos(0.0, 80.0);
    std::uniform_real_distribution<double> dim(5.0, 30.0);
    std::uniform_real_distribution<double> score(0.0, 1.0);
    std::vector<EvalBox> boxes(static_cast<size_t>(state.range(0)));
    for (EvalBox& b : boxes)
    {
        b.x0 = pos(rng);
        b.y0 = pos(rng);
        b.x1 = b.x0 + dim(rng);
        b.y1 = b.y0 + dim(rng);
        b.score = score(rng);
    }
    for (auto _ : state)
        benchmark::DoNotOptimize(nms(boxes, 0.45));
}
BENCHMARK(BM_nms)->Arg(20)->Arg(200);

} // namespace

BENCHMARK_MAIN();
