// Copyright Contributors to the edgesplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "edgesplat/camera.hpp"
#include "edgesplat/image.hpp"
#include "edgesplat/metrics.hpp"
#include "edgesplat/sketch.hpp"
#include "edgesplat/trainer.hpp"

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace edgesplat {

/// Rounds to 9 significant digits, the precision written to JSON files.
double canonical(double v);

/// Sketch file: {"points": [[x,y,z],...], "sketches": [{"kind": "line"|"bezier3",
/// "ctrl": [...], "opacity": o, "scale": [sx,sy,sz]}]}. Opacity and scale are
/// stored mapped (in (0,1) and meters). Only live sketches/points are written.
std::string sketches_to_json(const SketchCollection &set);
SketchCollection sketches_from_json(const std::string &text);
void save_sketches(const std::filesystem::path &path, const SketchCollection &set);
SketchCollection load_sketches(const std::filesystem::path &path);

/// Camera file: [{"fx","fy","cx","cy","width","height","R": 9 floats row-major, "t": 3 floats}].
std::string cameras_to_json(const std::vector<Camera> &cams);
std::vector<Camera> cameras_from_json(const std::string &text);
void save_cameras(const std::filesystem::path &path, const std::vector<Camera> &cams);
std::vector<Camera> load_cameras(const std::filesystem::path &path);

enum class PngDepth { Bits8 = 8, Bits16 = 16 };

/// Grayscale PNG; values are clamped to [0,1] and quantized.
void write_png(const std::filesystem::path &path, const Image &img, PngDepth depth = PngDepth::Bits8);
/// Grayscale or RGB(A) PNG of 8 or 16 bits; color images are averaged.
/// Values are scaled to [0,1].
Image read_png(const std::filesystem::path &path);
/// Three channel PNG, each channel scaled to [0,1].
std::array<Image, 3> read_png_rgb(const std::filesystem::path &path);
void write_png_rgb(const std::filesystem::path &path, const std::array<Image, 3> &channels,
                   PngDepth depth = PngDepth::Bits16);

/// Single channel portable float map ("Pf").
Image read_pfm(const std::filesystem::path &path);
void write_pfm(const std::filesystem::path &path, const Image &img);

/// {A_mm, C_mm, R5, P5, F5, R10, P10, F10, R20, P20, F20, e_num}
std::string metrics_to_json(const EvalReport &report);

/// epoch,loss,n_sketches,n_points,wallclock_ms
void write_train_log(const std::filesystem::path &path, const std::vector<TrainLogRow> &rows);

std::string read_text(const std::filesystem::path &path);
void write_text(const std::filesystem::path &path, const std::string &text);

} // namespace edgesplat
