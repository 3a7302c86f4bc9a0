/*
 * facemotion - joint face detection and facial motion retargeting toolkit.
 *
 * File: tools/facemotion_cli.cpp
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
#include "facemotion/io.hpp"
#include "facemotion/landmark_metrics.hpp"
#include "facemotion/morphable_model.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

namespace fm = facemotion;
using nlohmann::json;

namespace {

json read_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open: " + path);
    json j;
    in >> j;
    return j;
}

void write_output(const json& j, const std::string& out_path)
{
    if (out_path.empty())
    {
        std::cout << j.dump(2) << "\n";
        return;
    }
    std::ofstream out(out_path);
    if (!out)
        throw std::invalid_argument("cannot open for writing: " + out_path);
    out << j.dump(2) << "\n";
}

// Common options every subcommand carries.
struct CommonOpts
{
    unsigned int seed = 42;
    std::string tensor_path;
    std::string out_path;

    void attach(CLI::App* cmd)
    {
        cmd->add_option("--seed", seed, "random seed");
        cmd->add_option("--tensor", tensor_path, "face tensor blob (FT3D)");
        cmd->add_option("--out", out_path, "output path (stdout if omitted)");
    }

    fm::FaceTensor load_tensor() const
    {
        if (tensor_path.empty())
            throw std::invalid_argument("--tensor is required for this command");
        return fm::load_face_tensor(tensor_path);
    }
};

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"face detection, parameter fitting and retargeting toolkit"};
    app.require_subcommand(1);

    // gen-tensor
    auto* gen = app.add_subcommand("gen-tensor", "generate a synthetic face tensor blob");
    CommonOpts gen_opts;
    gen_opts.attach(gen);

    // fit
    auto* fit = app.add_subcommand("fit", "fit face parameters to observed 2D landmarks");
    CommonOpts fit_opts;
    fit_opts.attach(fit);
    std::string fit_landmarks, fit_init;
    int fit_max_iters = 200;
    fit->add_option("--landmarks", fit_landmarks, "observed landmarks JSON")->required();
    fit->add_option("--init", fit_init, "initial parameters JSON (heuristic if omitted)");
    fit->add_option("--max-iters", fit_max_iters, "iteration cap");

    // loss
    auto* loss = app.add_subcommand("loss", "single-face loss between prediction and ground truth");
    CommonOpts loss_opts;
    loss_opts.attach(loss);
    std::string loss_pred, loss_gt;
    int loss_epoch = 1;
    loss->add_option("--pred", loss_pred, "prediction JSON {params, landmarks}")->required();
    loss->add_option("--gt", loss_gt, "ground truth JSON {params, landmarks}")->required();
    loss->add_option("--epoch", loss_epoch, "training epoch for the tau schedule");

    // eval-det
    auto* evdet = app.add_subcommand("eval-det", "average precision of detections");
    CommonOpts evdet_opts;
    evdet_opts.attach(evdet);
    std::string evdet_pred, evdet_gt;
    evdet->add_option("--pred", evdet_pred, "predicted boxes JSON array")->required();
    evdet->add_option("--gt", evdet_gt, "ground truth boxes JSON array")->required();

    // eval-lm
    auto* evlm = app.add_subcommand("eval-lm", "landmark NME and CED-AUC");
    CommonOpts evlm_opts;
    evlm_opts.attach(evlm);
    std::string evlm_pairs;
    double evlm_cutoff = 0.08;
    evlm->add_option("--pairs", evlm_pairs, "JSON array of {pred, gt, bbox}")->required();
    evlm->add_option("--cutoff", evlm_cutoff, "CED integration cutoff");

    // eval-expr
    auto* evexpr = app.add_subcommand("eval-expr", "expression accuracy metric");
    CommonOpts evexpr_opts;
    evexpr_opts.attach(evexpr);
    std::string evexpr_params;
    std::vector<int> evexpr_active;
    evexpr->add_option("--params", evexpr_params, "FaceParams JSON")->required();
    evexpr->add_option("--active", evexpr_active, "active blendshape indices (1..46)")->required();

    // synth-scene
    auto* synth = app.add_subcommand("synth-scene", "generate a synthetic multi-face scene");
    CommonOpts synth_opts;
    synth_opts.attach(synth);
    int synth_n = 1;
    double synth_image = 288.0;
    std::string synth_grid_out;
    synth->add_option("--n-faces", synth_n, "number of faces (1..20)");
    synth->add_option("--image-size", synth_image, "square image size, pixels");
    synth->add_option("--grid-out", synth_grid_out, "also write the encoded grid blob (GRD1)");

    // weak-gt
    auto* weak = app.add_subcommand("weak-gt", "fit per-face landmarks and encode grid ground truth");
    CommonOpts weak_opts;
    weak_opts.attach(weak);
    std::string weak_landmarks, weak_grid_out;
    double weak_image = 288.0;
    weak->add_option("--landmarks", weak_landmarks, "JSON array of landmark sets")->required();
    weak->add_option("--image-size", weak_image, "square image size, pixels");
    weak->add_option("--grid-out", weak_grid_out, "write the encoded grid blob (GRD1)");

    // decode-grid
    auto* decode = app.add_subcommand("decode-grid", "decode a grid blob into detections");
    CommonOpts decode_opts;
    decode_opts.attach(decode);
    std::string decode_grid_path;
    double decode_threshold = 0.5, decode_image = 288.0;
    decode->add_option("--grid", decode_grid_path, "grid tensor blob (GRD1)")->required();
    decode->add_option("--threshold", decode_threshold, "objectness threshold");
    decode->add_option("--image-size", decode_image, "square image size, pixels");

    // retarget
    auto* retarget = app.add_subcommand("retarget", "map expression and pose onto a target rig");
    CommonOpts retarget_opts;
    retarget_opts.attach(retarget);
    std::string retarget_params, retarget_mapping;
    retarget->add_option("--params", retarget_params, "FaceParams JSON")->required();
    retarget->add_option("--mapping", retarget_mapping,
                         "RigMapping JSON (identity mapping if omitted)");

    // track
    auto* track = app.add_subcommand("track", "next-frame bbox from previous-frame landmarks");
    CommonOpts track_opts;
    track_opts.attach(track);
    std::string track_landmarks;
    double track_margin = 0.1;
    track->add_option("--landmarks", track_landmarks, "previous frame landmarks JSON")->required();
    track->add_option("--margin", track_margin, "fractional padding");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (gen->parsed())
        {
            if (gen_opts.out_path.empty())
                throw std::invalid_argument("gen-tensor: --out is required");
            fm::save_face_tensor(fm::generate_synthetic_tensor(gen_opts.seed), gen_opts.out_path);
        }
        else if (fit->parsed())
        {
            const fm::FaceTensor tensor = fit_opts.load_tensor();
            const fm::Landmarks2D observed = fm::landmarks_from_json(read_json(fit_landmarks));
            fm::FitConfig cfg;
            cfg.max_iters = fit_max_iters;
            // Without an explicit init there is no pose prior; use the
            // multistart fitter, which is robust to the frontal heuristic
            // landing in a wrong basin.
            const fm::FitResult result =
                fit_init.empty()
                    ? fm::fit_params_multistart(tensor, observed, cfg)
                    : fm::fit_params(tensor, observed,
                                     fm::params_from_json(read_json(fit_init)), cfg);
            write_output(fm::fit_result_to_json(result), fit_opts.out_path);
        }
        else if (loss->parsed())
        {
            const json jp = read_json(loss_pred), jg = read_json(loss_gt);
            const fm::FacePrediction pred{fm::params_from_json(jp.at("params")),
                                          fm::landmarks_from_json(jp)};
            const fm::FacePrediction gt{fm::params_from_json(jg.at("params")),
                                        fm::landmarks_from_json(jg)};
            write_output(fm::loss_to_json(fm::sfn_loss(pred, gt, {loss_epoch})),
                         loss_opts.out_path);
        }
        else if (evdet->parsed())
        {
            std::vector<fm::EvalBox> preds, gts;
            for (const json& j : read_json(evdet_pred))
                preds.push_back(fm::eval_box_from_json(j));
            for (const json& j : read_json(evdet_gt))
                gts.push_back(fm::eval_box_from_json(j));
            const fm::APResult ap = fm::average_precision(preds, gts);
            write_output({{"AP", ap.mean_ap},
                          {"AP50", ap.ap_per_threshold.front()},
                          {"AP75", ap.ap_per_threshold[5]}},
                         evdet_opts.out_path);
        }
        else if (evlm->parsed())
        {
            std::vector<double> errors;
            for (const json& j : read_json(evlm_pairs))
                errors.push_back(fm::nme(fm::landmarks_from_json(j.at("pred")),
                                         fm::landmarks_from_json(j.at("gt")),
                                         fm::eval_box_from_json(j.at("bbox"))));
            double mean = 0.0;
            for (double e : errors)
                mean += e;
            mean /= errors.empty() ? 1.0 : errors.size();
            write_output({{"nme", mean}, {"auc", fm::ced_auc(errors, evlm_cutoff)}},
                         evlm_opts.out_path);
        }
        else if (evexpr->parsed())
        {
            const fm::FaceParams params = fm::params_from_json(read_json(evexpr_params));
            write_output({{"expression_metric",
                           fm::expression_metric(params.expression, evexpr_active)}},
                         evexpr_opts.out_path);
        }
        else if (synth->parsed())
        {
            fm::GridCodecConfig cfg;
            cfg.image_size = synth_image;
            const fm::SynthScene scene =
                fm::synth_scene(synth_opts.load_tensor(), synth_n, synth_opts.seed, cfg);
            json faces = json::array();
            for (const fm::SceneFace& face : scene.faces)
            {
                json j = {{"bbox", fm::eval_box_to_json(face.bbox)}};
                j["params"] = fm::params_to_json(face.params);
                j["landmarks"] = fm::landmarks_to_json(face.landmarks)["landmarks"];
                faces.push_back(std::move(j));
            }
            write_output({{"faces", faces}}, synth_opts.out_path);
            if (!synth_grid_out.empty())
                fm::save_grid_tensor(scene.grid, synth_grid_out);
        }
        else if (weak->parsed())
        {
            std::vector<fm::Landmarks2D> sets;
            for (const json& j : read_json(weak_landmarks))
                sets.push_back(fm::landmarks_from_json(j));
            fm::GridCodecConfig cfg;
            cfg.image_size = weak_image;
            const fm::WeakGroundTruth wgt =
                fm::weak_gt_generate(weak_opts.load_tensor(), sets, {}, cfg);
            json fits = json::array();
            for (const fm::FitResult& fit_result : wgt.fits)
                fits.push_back(fm::fit_result_to_json(fit_result));
            write_output({{"fits", fits}, {"n_entries", wgt.gt.entries.size()}},
                         weak_opts.out_path);
            if (!weak_grid_out.empty())
                fm::save_grid_tensor(wgt.grid, weak_grid_out);
        }
        else if (decode->parsed())
        {
            fm::GridCodecConfig cfg;
            cfg.image_size = decode_image;
            const auto boxes = fm::decode_grid(decode_opts.load_tensor(),
                                               fm::load_grid_tensor(decode_grid_path),
                                               decode_threshold, cfg);
            json out = json::array();
            for (const fm::DetectionBox& box : boxes)
                out.push_back(fm::detection_to_json(box));
            write_output(out, decode_opts.out_path);
        }
        else if (retarget->parsed())
        {
            const fm::FaceParams params = fm::params_from_json(read_json(retarget_params));
            const fm::RigMapping mapping =
                retarget_mapping.empty() ? fm::RigMapping::identity_mapping()
                                         : fm::rig_mapping_from_json(read_json(retarget_mapping));
            write_output(fm::rig_pose_to_json(fm::map_to_rig(params, mapping)),
                         retarget_opts.out_path);
        }
        else if (track->parsed())
        {
            const fm::Landmarks2D prev = fm::landmarks_from_json(read_json(track_landmarks));
            write_output(fm::eval_box_to_json(fm::track_next_bbox(prev, track_margin)),
                         track_opts.out_path);
        }
    }
    catch (const std::invalid_argument& e)
    {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    }
    catch (const fm::GridCollisionError& e)
    {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    }
    catch (const nlohmann::json::exception& e)
    {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
