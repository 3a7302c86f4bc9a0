/*
 * facemotion - joint face detection and facial motion retargeting toolkit.
 *
 * File: core/src/retarget.cpp
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
#include "facemotion/retarget.hpp"

#include "facemotion/morphable_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <set>

namespace facemotion {

void RigMapping::validate() const
{
    std::set<int> sources;
    for (const Entry& e : entries)
    {
        if (e.source_index < 1 || e.source_index > kFreeExpressionDims)
            throw std::invalid_argument("RigMapping: source index outside 1..46");
        if (!sources.insert(e.source_index).second)
            throw std::invalid_argument("RigMapping: duplicate source index");
        if (!std::isfinite(e.gain))
            throw std::invalid_argument("RigMapping: non-finite gain");
        if (!(e.clamp_lo <= e.clamp_hi) || e.clamp_lo < 0.0 || e.clamp_hi > 1.0)
            throw std::invalid_argument("RigMapping: clamp interval outside [0,1]");
        if (e.target_name.empty())
            throw std::invalid_argument("RigMapping: empty target name");
    }
}

RigMapping RigMapping::identity_mapping()
{
    RigMapping mapping;
    for (int i = 1; i <= kFreeExpressionDims; ++i)
        mapping.entries.push_back({i, "blendshape_" + std::to_string(i), 1.0, 0.0, 1.0});
    return mapping;
}

RigPose map_to_rig(const FaceParams& params, const RigMapping& mapping)
{
    mapping.validate();
    RigPose pose;
    for (const RigMapping::Entry& e : mapping.entries)
    {
        const double w = std::clamp(e.gain * params.expression.w_free[e.source_index - 1],
                                    e.clamp_lo, e.clamp_hi);
        if (!pose.weights.emplace(e.target_name, w).second)
            throw std::invalid_argument("map_to_rig: target '" + e.target_name +
                                        "' mapped twice");
    }
    if (mapping.pass_pose)
        pose.rotation = params.pose.rotation.normalized();
    return pose;
}

EvalBox track_next_bbox(const Landmarks2D& prev_landmarks, double margin)
{
    if (margin < 0.0)
        throw std::invalid_argument("track_next_bbox: negative margin");
    EvalBox box;
    box.x0 = prev_landmarks.col(0).minCoeff();
    box.x1 = prev_landmarks.col(0).maxCoeff();
    box.y0 = prev_landmarks.col(1).minCoeff();
    box.y1 = prev_landmarks.col(1).maxCoeff();
    const double extent = std::max(box.x1 - box.x0, box.y1 - box.y0);
    if (!(extent > 1e-9))
        throw std::invalid_argument("track_next_bbox: degenerate landmarks");
    const double pad = margin * extent;
    box.x0 -= pad;
    box.x1 += pad;
    box.y0 -= pad;
    box.y1 += pad;
    return box;
}

namespace {

struct Placement
{
    double center_x, center_y; // pixels
    double size;               // pixels, max box dimension
};

bool boxes_overlap(const Placement& a, const Placement& b)
{
    // Padded rectangle test; placements are square-budgeted by size.
    const double gap = 0.05 * std::max(a.size, b.size);
    return std::abs(a.center_x - b.center_x) < (a.size + b.size) / 2.0 + gap &&
           std::abs(a.center_y - b.center_y) < (a.size + b.size) / 2.0 + gap;
}

} // namespace

SynthScene synth_scene(const FaceTensor& tensor, int n_faces, unsigned int seed,
                       const GridCodecConfig& cfg)
{
    if (n_faces < 1 || n_faces > 20)
        throw std::invalid_argument("synth_scene: n_faces must lie in 1..20");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> sym(-1.0, 1.0);

    const double image = cfg.image_size;
    const double cell_px = cfg.cell_to_pixels();
    // Face sizes: never below the 2% filter, shrink budget with crowding.
    const double min_frac = 0.06;
    const double max_frac = std::min(0.28, 0.9 / std::sqrt(static_cast<double>(n_faces)));

    SynthScene scene;
    std::vector<Placement> placements;
    std::set<std::pair<int, int>> used_cells;

    int attempts = 0;
    while (static_cast<int>(scene.faces.size()) < n_faces)
    {
        if (++attempts > 10000)
            throw std::runtime_error("synth_scene: could not place faces without overlap");

        const double frac = min_frac + (max_frac - min_frac) * unit(rng);
        Placement p;
        p.size = frac * image;
        p.center_x = p.size / 2.0 + (image - p.size) * unit(rng);
        p.center_y = p.size / 2.0 + (image - p.size) * unit(rng);

        // Keep centers away from cell boundaries so the logit encoding
        // round-trips cleanly, and one face per grid cell.
        const double fx = p.center_x / cell_px, fy = p.center_y / cell_px;
        if (fx - std::floor(fx) < 0.05 || fx - std::floor(fx) > 0.95 ||
            fy - std::floor(fy) < 0.05 || fy - std::floor(fy) > 0.95)
            continue;
        const std::pair<int, int> cell{static_cast<int>(fx), static_cast<int>(fy)};
        if (used_cells.count(cell))
            continue;
        if (std::any_of(placements.begin(), placements.end(),
                        [&](const Placement& q) { return boxes_overlap(p, q); }))
            continue;

        // Sample face parameters, then solve scale and translation so the
        // projected landmarks land in the placed box.
        FaceParams params;
        for (int i = 0; i < kIdentityDims; ++i)
            params.w_id[i] = sym(rng);
        for (int k = 0; k < 4; ++k)
        {
            const int idx = static_cast<int>(unit(rng) * kFreeExpressionDims);
            params.expression.w_free[std::min(idx, kFreeExpressionDims - 1)] = 0.2 * unit(rng);
        }
        const Eigen::Vector3d axis(sym(rng), sym(rng), sym(rng));
        const double angle = unit(rng) * 25.0 * M_PI / 180.0;
        params.pose.rotation = (axis.norm() > 1e-6) ? Quaternion::from_axis_angle(axis, angle)
                                                    : Quaternion{};

        LandmarkMesh mesh = synth_landmark_mesh(tensor, params.w_id, params.expression);
        Pose unit_pose;
        unit_pose.rotation = params.pose.rotation;
        Landmarks2D flat = project_mesh(mesh, unit_pose);
        const double extent = std::max(flat.col(0).maxCoeff() - flat.col(0).minCoeff(),
                                       flat.col(1).maxCoeff() - flat.col(1).minCoeff());
        if (!(extent > 1e-6))
            continue;

        // Rescale identity so the focal lands strictly inside the codec range.
        const double f_needed = p.size / extent;
        const double focal = std::clamp(f_needed, 0.5, 4.0);
        const double id_scale = f_needed / focal;
        if (std::abs(id_scale) * params.w_id.cwiseAbs().maxCoeff() > 3.0)
            continue;
        params.w_id *= id_scale;
        flat *= id_scale;
        params.pose.focal = focal;

        const double mid_x = (flat.col(0).maxCoeff() + flat.col(0).minCoeff()) / 2.0;
        const double mid_y = (flat.col(1).maxCoeff() + flat.col(1).minCoeff()) / 2.0;
        params.pose.translation = {p.center_x / focal - mid_x, p.center_y / focal - mid_y, 0.0};

        SceneFace face;
        face.params = params;
        face.landmarks = project_landmarks(tensor, params);
        face.bbox.x0 = face.landmarks.col(0).minCoeff();
        face.bbox.x1 = face.landmarks.col(0).maxCoeff();
        face.bbox.y0 = face.landmarks.col(1).minCoeff();
        face.bbox.y1 = face.landmarks.col(1).maxCoeff();
        face.bbox.score = 1.0;

        used_cells.insert(cell);
        placements.push_back(p);
        scene.faces.push_back(std::move(face));
    }

    std::vector<DetectionBox> gt_faces;
    for (const SceneFace& face : scene.faces)
    {
        DetectionBox box;
        box.bx = (face.bbox.x0 + face.bbox.x1) / 2.0 / cell_px;
        box.by = (face.bbox.y0 + face.bbox.y1) / 2.0 / cell_px;
        box.bw = face.bbox.width() / cell_px;
        box.bh = face.bbox.height() / cell_px;
        box.objectness = 1.0 - cfg.logit_eps;
        box.params = face.params;
        box.landmarks = face.landmarks;
        gt_faces.push_back(std::move(box));
    }
    auto [gt, grid] = encode_gt(tensor, gt_faces, cfg);
    scene.gt = std::move(gt);
    scene.grid = std::move(grid);
    return scene;
}

WeakGroundTruth weak_gt_generate(const FaceTensor& tensor,
                                 const std::vector<Landmarks2D>& face_landmarks,
                                 const FitConfig& fit_cfg, const GridCodecConfig& codec_cfg)
{
    if (face_landmarks.empty())
        throw std::invalid_argument("weak_gt_generate: no landmark sets given");
    const double cell_px = codec_cfg.cell_to_pixels();

    WeakGroundTruth out;
    std::vector<DetectionBox> fitted_faces;
    for (const Landmarks2D& observed : face_landmarks)
    {
        FitResult fit = fit_params_multistart(tensor, observed, fit_cfg);
        // Move the fit to the gauge where the focal sits mid-range of the
        // codec's sigmoid; the projected landmarks are unchanged but the
        // encode/decode round trip loses far less precision there.
        fit.params = rescale_gauge(fit.params, 1.0, fit_cfg.w_id_bound);

        DetectionBox box;
        box.bx = (observed.col(0).minCoeff() + observed.col(0).maxCoeff()) / 2.0 / cell_px;
        box.by = (observed.col(1).minCoeff() + observed.col(1).maxCoeff()) / 2.0 / cell_px;
        box.bw = (observed.col(0).maxCoeff() - observed.col(0).minCoeff()) / cell_px;
        box.bh = (observed.col(1).maxCoeff() - observed.col(1).minCoeff()) / cell_px;
        box.objectness = 1.0 - codec_cfg.logit_eps;
        box.params = fit.params;
        box.landmarks = project_landmarks(tensor, fit.params);
        fitted_faces.push_back(std::move(box));
        out.fits.push_back(std::move(fit));
    }
    auto [gt, grid] = encode_gt(tensor, fitted_faces, codec_cfg);
    out.gt = std::move(gt);
    out.grid = std::move(grid);
    return out;
}

} // namespace facemotion
