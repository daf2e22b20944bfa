// Copyright Contributors to the edgesplat project
// SPDX-License-Identifier: Apache-2.0

#include "edgesplat/edge_detector.hpp"
#include "edgesplat/errors.hpp"
#include "edgesplat/io.hpp"
#include "edgesplat/metrics.hpp"
#include "edgesplat/rasterizer.hpp"
#include "edgesplat/scene.hpp"
#include "edgesplat/trainer.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace edgesplat;

namespace {

constexpr int kExitContract = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 1;

struct Globals {
    std::uint64_t seed = 0;
    int threads = 1;
};

// Normal maps in PNG form encode n = 2c - 1 per channel.
std::array<Image, 3> load_normals(const fs::path &path) {
    if (path.extension() == ".pfm") {
        throw ContractViolation("detect: normal maps must be RGB PNG (" + path.string() + ")");
    }
    std::array<Image, 3> n = read_png_rgb(path);
    for (Image &c : n) {
        for (double &v : c.data()) {
            v = 2.0 * v - 1.0;
        }
    }
    return n;
}

Image load_scalar(const fs::path &path) {
    return path.extension() == ".pfm" ? read_pfm(path) : read_png(path);
}

fs::path find_view(const fs::path &views, const std::string &prefix, std::size_t i) {
    for (const char *ext : {"pfm", "png"}) {
        const fs::path p = views / view_file(prefix, i, ext);
        if (fs::exists(p)) {
            return p;
        }
    }
    return {};
}

void run_detect(const fs::path &scene, const fs::path &alpha, const fs::path &depth,
                const fs::path &normal, const fs::path &out, const DetectorConfig &cfg) {
    validate(cfg);
    if (!scene.empty()) {
        const fs::path views = scene / "views";
        std::size_t done = 0;
        for (std::size_t i = 0;; ++i) {
            const fs::path a = find_view(views, "alpha", i);
            if (a.empty()) {
                break;
            }
            const fs::path d = find_view(views, "depth", i);
            const fs::path n = find_view(views, "normal", i);
            require(!d.empty() && !n.empty(),
                    "detect: view " + std::to_string(i) + " lacks depth or normal map");
            const GeoMaps maps{load_scalar(a), load_scalar(d), load_normals(n)};
            write_png(views / view_file("edge", i, "png"), detect_edges(maps, cfg), PngDepth::Bits16);
            ++done;
        }
        require(done > 0, "detect: no views/alpha_####.{png,pfm} found in " + scene.string());
        std::cout << "detected edges for " << done << " views\n";
        return;
    }
    require(!alpha.empty() && !depth.empty() && !normal.empty() && !out.empty(),
            "detect: give --scene or all of --alpha --depth --normal --out");
    const GeoMaps maps{load_scalar(alpha), load_scalar(depth), load_normals(normal)};
    write_png(out, detect_edges(maps, cfg), PngDepth::Bits16);
}

template <typename T>
void take(const nlohmann::json &j, const char *key, T &dst) {
    if (j.contains(key)) {
        dst = j.at(key).get<T>();
    }
}

void apply_config(const nlohmann::json &j, TrainConfig &cfg, TopoConfig &topo) {
    require(j.is_object(), "config: top level must be an object");
    static const std::vector<std::string> known = {
        "epochs", "step", "lr_points", "lr_opacity", "lr_logscale", "topology",
        "topology_warmup", "topology_interval", "filter_at_end", "loss_pixels_per_class",
        "init_scale", "th_connect", "th_neighbor", "th_overlap", "th_dir_deg", "th_offset",
        "th_vis", "view_invis_ratio", "edge_intensity_floor", "seed", "threads"};
    for (const auto &[key, value] : j.items()) {
        require(std::find(known.begin(), known.end(), key) != known.end(),
                "config: unknown key '" + key + "'");
    }
    try {
        take(j, "epochs", cfg.epochs);
        take(j, "step", cfg.step);
        take(j, "lr_points", cfg.lr_points);
        take(j, "lr_opacity", cfg.lr_opacity);
        take(j, "lr_logscale", cfg.lr_logscale);
        take(j, "topology", cfg.topology);
        take(j, "topology_warmup", cfg.topology_warmup);
        take(j, "topology_interval", cfg.topology_interval);
        take(j, "filter_at_end", cfg.filter_at_end);
        take(j, "loss_pixels_per_class", cfg.loss_pixels_per_class);
        take(j, "seed", cfg.seed);
        take(j, "threads", cfg.threads);
        if (j.contains("init_scale")) {
            const auto v = j.at("init_scale").get<std::vector<double>>();
            require(v.size() == 3, "config: init_scale needs three values");
            cfg.init_scale = Vec3(v[0], v[1], v[2]);
        }
        take(j, "th_connect", topo.th_connect);
        take(j, "th_neighbor", topo.th_neighbor);
        take(j, "th_overlap", topo.th_overlap);
        take(j, "th_dir_deg", topo.th_dir_deg);
        take(j, "th_offset", topo.th_offset);
        take(j, "th_vis", topo.th_vis);
        take(j, "view_invis_ratio", topo.view_invis_ratio);
        take(j, "edge_intensity_floor", topo.edge_intensity_floor);
    } catch (const nlohmann::json::exception &e) {
        throw ContractViolation(std::string("config: ") + e.what());
    }
}

void run_train(const fs::path &scene_dir, const fs::path &init_path, const fs::path &config,
               const fs::path &out, const fs::path &log_path, std::optional<int> epochs,
               bool no_topology, const Globals &g) {
    TrainConfig cfg;
    TopoConfig topo;
    cfg.seed = g.seed;
    cfg.threads = g.threads;
    if (!config.empty()) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(read_text(config));
        } catch (const nlohmann::json::parse_error &e) {
            throw ContractViolation(std::string("config: ") + e.what());
        }
        apply_config(j, cfg, topo);
    }
    if (epochs) {
        cfg.epochs = *epochs;
    }
    if (no_topology) {
        cfg.topology = false;
    }
    validate(cfg);
    validate(topo);

    std::vector<View> views = load_views(scene_dir);
    Scene scene;
    scene.sketches = load_sketches(init_path.empty() ? scene_dir / "edges_gt.json" : init_path);
    for (const View &v : views) {
        scene.cameras.push_back(v.camera);
    }
    const Normalization n = normalize_scene(scene);
    for (std::size_t i = 0; i < views.size(); ++i) {
        views[i].camera = scene.cameras[i];
    }

    TrainResult result = train(scene.sketches, views, cfg, topo, [](const TrainLogRow &row) {
        if (row.epoch % 100 == 0) {
            std::fprintf(stderr, "epoch %4d  loss %.6f  sketches %zu\n", row.epoch, row.loss,
                         row.sketches);
        }
    });
    if (!n.is_identity()) {
        Normalization inverse;
        inverse.scale = 1.0 / n.scale;
        inverse.offset = -n.offset / n.scale;
        transform_sketches(result.sketches, inverse);
    }
    save_sketches(out, result.sketches);
    EditReport edits;
    for (const TopologyEvent &ev : result.topology) {
        edits.endpoint_merges += ev.report.endpoint_merges;
        edits.overlap_merges += ev.report.overlap_merges;
        edits.colinear_merges += ev.report.colinear_merges;
        edits.filtered += ev.report.filtered;
        edits.points_removed += ev.report.points_removed;
    }
    std::fprintf(stderr,
                 "topology: %zu passes, %zu endpoint merges, %zu overlap merges, %zu colinear "
                 "merges, %zu filtered, %zu points removed\n",
                 result.topology.size(), edits.endpoint_merges, edits.overlap_merges,
                 edits.colinear_merges, edits.filtered, edits.points_removed);
    if (!log_path.empty()) {
        write_train_log(log_path, result.log);
    }
    std::cout << "wrote " << result.sketches.live_sketch_count() << " sketches to " << out.string()
              << "\n";
}

void print_report(const EvalReport &r) {
    std::printf("%-10s %10s\n", "metric", "value");
    std::printf("%-10s %10.3f\n", "A (mm)", r.accuracy_mm);
    std::printf("%-10s %10.3f\n", "C (mm)", r.completeness_mm);
    for (std::size_t k = 0; k < r.taus_mm.size(); ++k) {
        const int t = static_cast<int>(std::lround(r.taus_mm[k]));
        std::printf("P%-9d %10.2f\n", t, r.prf[k].precision);
        std::printf("R%-9d %10.2f\n", t, r.prf[k].recall);
        std::printf("F%-9d %10.2f\n", t, r.prf[k].fscore);
    }
    std::printf("%-10s %10zu\n", "e_num", r.edge_count);
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Parametric 3D edge reconstruction from multi-view edge images"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
    app.add_option("--threads", g.threads, "Worker threads for per-view work")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    // detect
    auto *detect = app.add_subcommand("detect", "Edge images from alpha/depth/normal maps");
    fs::path d_scene, d_alpha, d_depth, d_normal, d_out;
    DetectorConfig dcfg;
    detect->add_option("--scene", d_scene, "Scene dir with views/{alpha,depth,normal}_####");
    detect->add_option("--alpha", d_alpha, "Alpha mask (png/pfm)");
    detect->add_option("--depth", d_depth, "Depth map (png/pfm)");
    detect->add_option("--normal", d_normal, "Normal map (RGB png)");
    detect->add_option("--out", d_out, "Output edge PNG");
    detect->add_option("--t-d", dcfg.t_d, "Depth gradient threshold")->capture_default_str();
    detect->add_option("--t-n", dcfg.t_n, "Normal gradient threshold")->capture_default_str();
    detect->add_option("--sigma", dcfg.blur_sigma, "Blur sigma (px)")->capture_default_str();
    detect->add_option("--radius", dcfg.blur_radius, "Blur radius (px)")->capture_default_str();

    // synth
    auto *synth = app.add_subcommand("synth", "Generate a synthetic scene directory");
    SyntheticSpec spec;
    std::string shape = "mixed";
    fs::path s_out;
    bool png8 = false;
    synth->add_option("--out", s_out, "Output scene directory")->required();
    synth->add_option("--shape", shape, "cube | prism | bezier_star | mixed")->capture_default_str();
    synth->add_option("--views", spec.n_views, "Number of views")->capture_default_str();
    synth->add_option("--width", spec.width, "Image width")->capture_default_str();
    synth->add_option("--height", spec.height, "Image height")->capture_default_str();
    synth->add_option("--distance", spec.camera_distance, "Camera distance (m)")
        ->capture_default_str();
    synth->add_flag("--png8", png8, "Write 8-bit instead of 16-bit PNGs");

    // perturb / fragment
    auto *perturb = app.add_subcommand("perturb", "Add Gaussian noise to control points");
    fs::path p_in, p_out;
    double sigma = 0.02;
    perturb->add_option("--in", p_in, "Input sketch JSON")->required();
    perturb->add_option("--out", p_out, "Output sketch JSON")->required();
    perturb->add_option("--sigma", sigma, "Noise standard deviation (m)")->capture_default_str();

    auto *fragment = app.add_subcommand("fragment", "Split every sketch into pieces");
    fs::path f_in, f_out;
    int parts = 4;
    fragment->add_option("--in", f_in, "Input sketch JSON")->required();
    fragment->add_option("--out", f_out, "Output sketch JSON")->required();
    fragment->add_option("--parts", parts, "Pieces per sketch")->capture_default_str();

    // train
    auto *trainc = app.add_subcommand("train", "Optimize sketches against a scene");
    fs::path t_scene, t_init, t_config, t_out, t_log;
    std::optional<int> t_epochs;
    bool no_topology = false;
    trainc->add_option("--scene", t_scene, "Scene directory")->required();
    trainc->add_option("--init", t_init, "Initial sketches (default: scene edges_gt.json)");
    trainc->add_option("--config", t_config, "JSON training config");
    trainc->add_option("--out", t_out, "Output sketch JSON")->required();
    trainc->add_option("--log", t_log, "Per-epoch CSV log");
    trainc->add_option("--epochs", t_epochs, "Override epoch count");
    trainc->add_flag("--no-topology", no_topology, "Disable topology passes");

    // render
    auto *renderc = app.add_subcommand("render", "Render sketches from one camera");
    fs::path r_sketches, r_cameras, r_out;
    std::size_t r_view = 0;
    int bits = 8;
    double r_step = 0.005;
    renderc->add_option("--sketches", r_sketches, "Sketch JSON")->required();
    renderc->add_option("--cameras", r_cameras, "Camera JSON")->required();
    renderc->add_option("--view", r_view, "Camera index")->capture_default_str();
    renderc->add_option("--out", r_out, "Output PNG")->required();
    renderc->add_option("--bits", bits, "PNG bit depth")->check(CLI::IsMember({8, 16}))
        ->capture_default_str();
    renderc->add_option("--step", r_step, "Sampling step (m)")->capture_default_str();

    // eval
    auto *evalc = app.add_subcommand("eval", "Compare predicted and ground-truth sketches");
    fs::path e_pred, e_gt, e_out;
    double resolution = 0.005;
    evalc->add_option("--pred", e_pred, "Predicted sketch JSON")->required();
    evalc->add_option("--gt", e_gt, "Ground-truth sketch JSON")->required();
    evalc->add_option("--out", e_out, "Metrics JSON");
    evalc->add_option("--resolution", resolution, "Resampling step (m)")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitContract;
    }

    try {
        if (*detect) {
            run_detect(d_scene, d_alpha, d_depth, d_normal, d_out, dcfg);
        } else if (*synth) {
            spec.shape = parse_shape(shape);
            spec.seed = g.seed;
            const SyntheticScene s = generate_synthetic(spec);
            save_scene_dir(s_out, s, !png8);
            std::cout << "wrote " << s.images.size() << " views to " << s_out.string() << "\n";
        } else if (*perturb) {
            save_sketches(p_out, perturb_init(load_sketches(p_in), sigma, g.seed));
        } else if (*fragment) {
            save_sketches(f_out, fragment_init(load_sketches(f_in), parts));
        } else if (*trainc) {
            run_train(t_scene, t_init, t_config, t_out, t_log, t_epochs, no_topology, g);
        } else if (*renderc) {
            const std::vector<Camera> cams = load_cameras(r_cameras);
            require(r_view < cams.size(), "render: view index out of range");
            require(r_step > 0.0, "render: step must be positive");
            const auto gaussians = sketch_gaussians(load_sketches(r_sketches), r_step);
            write_png(r_out, render(gaussians, cams[r_view]),
                      bits == 16 ? PngDepth::Bits16 : PngDepth::Bits8);
        } else if (*evalc) {
            require(resolution > 0.0, "eval: resolution must be positive");
            const EvalReport r = evaluate(load_sketches(e_pred), load_sketches(e_gt), resolution);
            print_report(r);
            if (!e_out.empty()) {
                write_text(e_out, metrics_to_json(r));
            }
        }
    } catch (const ContractViolation &e) {
        std::cerr << "contract violation: " << e.what() << "\n";
        return kExitContract;
    } catch (const StructuralError &e) {
        std::cerr << "structural error: " << e.what() << "\n";
        return kExitContract;
    } catch (const NumericalAbort &e) {
        std::cerr << "numerical abort: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const IoError &e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    }
    return 0;
}
