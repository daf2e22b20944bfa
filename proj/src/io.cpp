// Copyright Contributors to the edgesplat project
// SPDX-License-Identifier: Apache-2.0

#include "edgesplat/io.hpp"

#include "edgesplat/errors.hpp"

#include <json.hpp>
#include <png.h>

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

namespace edgesplat {

using nlohmann::json;

double canonical(double v) {
    if (!std::isfinite(v) || v == 0.0) {
        return v == 0.0 ? 0.0 : v;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return std::strtod(buf, nullptr);
}

std::string read_text(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path &path, const std::string &text) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << text;
}

namespace {

json vec_json(const Vec3 &v) { return json::array({canonical(v.x()), canonical(v.y()), canonical(v.z())}); }

Vec3 vec_from(const json &j, const char *what) {
    if (!j.is_array() || j.size() != 3) {
        throw ContractViolation(std::string(what) + ": expected 3 numbers");
    }
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json parse(const std::string &text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error &e) {
        throw IoError(std::string("invalid JSON: ") + e.what());
    }
}

} // namespace

std::string sketches_to_json(const SketchCollection &set) {
    std::vector<std::size_t> index(set.pool.size(), CompactionMap::npos);
    std::vector<bool> used(set.pool.size(), false);
    for (const Sketch &s : set.sketches) {
        if (s.alive) {
            for (const std::size_t i : s.ctrl) {
                used.at(i) = true;
            }
        }
    }
    json points = json::array();
    for (std::size_t i = 0; i < set.pool.size(); ++i) {
        if (set.pool.alive[i] && used[i]) {
            index[i] = points.size();
            points.push_back(vec_json(set.pool.points[i]));
        }
    }
    json sketches = json::array();
    for (const Sketch &s : set.sketches) {
        if (!s.alive) {
            continue;
        }
        json ctrl = json::array();
        for (const std::size_t i : s.ctrl) {
            if (index[i] == CompactionMap::npos) {
                throw StructuralError("sketch references dead pool point");
            }
            ctrl.push_back(index[i]);
        }
        sketches.push_back({{"kind", s.kind == SketchKind::Line ? "line" : "bezier3"},
                            {"ctrl", ctrl},
                            {"opacity", canonical(s.opacity())},
                            {"scale", vec_json(s.scale())}});
    }
    json doc = {{"points", points}, {"sketches", sketches}};
    return doc.dump(1) + "\n";
}

SketchCollection sketches_from_json(const std::string &text) {
    const json doc = parse(text);
    SketchCollection set;
    try {
        for (const json &p : doc.at("points")) {
            set.pool.add(vec_from(p, "points"));
        }
        for (const json &js : doc.at("sketches")) {
            Sketch s;
            const std::string kind = js.at("kind").get<std::string>();
            if (kind == "line") {
                s.kind = SketchKind::Line;
            } else if (kind == "bezier3") {
                s.kind = SketchKind::Bezier3;
            } else {
                throw ContractViolation("unknown sketch kind '" + kind + "'");
            }
            for (const json &c : js.at("ctrl")) {
                s.ctrl.push_back(c.get<std::size_t>());
            }
            if (s.ctrl.size() != control_count(s.kind)) {
                throw ContractViolation("sketch '" + kind + "' has " + std::to_string(s.ctrl.size()) +
                                        " control indices");
            }
            for (const std::size_t c : s.ctrl) {
                if (c >= set.pool.size()) {
                    throw ContractViolation("control index out of range");
                }
            }
            const double o = std::clamp(js.value("opacity", 0.5), 1e-9, 1.0 - 1e-9);
            s.opacity_raw = logit(o);
            const Vec3 sc = js.contains("scale") ? vec_from(js.at("scale"), "scale")
                                                 : Vec3::Constant(0.002);
            if (!(sc.array() > 0.0).all()) {
                throw ContractViolation("sketch scale must be positive");
            }
            s.log_scale = sc.array().log();
            set.sketches.push_back(std::move(s));
        }
    } catch (const json::exception &e) {
        throw ContractViolation(std::string("malformed sketch file: ") + e.what());
    }
    return set;
}

void save_sketches(const std::filesystem::path &path, const SketchCollection &set) {
    write_text(path, sketches_to_json(set));
}

SketchCollection load_sketches(const std::filesystem::path &path) { return sketches_from_json(read_text(path)); }

std::string cameras_to_json(const std::vector<Camera> &cams) {
    json doc = json::array();
    for (const Camera &c : cams) {
        json r = json::array();
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                r.push_back(c.rotation(i, j));
            }
        }
        doc.push_back({{"fx", c.fx},
                       {"fy", c.fy},
                       {"cx", c.cx},
                       {"cy", c.cy},
                       {"width", c.width},
                       {"height", c.height},
                       {"R", r},
                       {"t", json::array({c.translation.x(), c.translation.y(), c.translation.z()})}});
    }
    return doc.dump(1) + "\n";
}

std::vector<Camera> cameras_from_json(const std::string &text) {
    const json doc = parse(text);
    std::vector<Camera> out;
    try {
        for (const json &j : doc) {
            Camera c;
            c.fx = j.at("fx").get<double>();
            c.fy = j.at("fy").get<double>();
            c.cx = j.at("cx").get<double>();
            c.cy = j.at("cy").get<double>();
            c.width = j.at("width").get<int>();
            c.height = j.at("height").get<int>();
            const json &r = j.at("R");
            require(r.size() == 9, "camera R must have 9 entries");
            for (int i = 0; i < 9; ++i) {
                c.rotation(i / 3, i % 3) = r[i].get<double>();
            }
            c.translation = vec_from(j.at("t"), "t");
            validate(c);
            out.push_back(c);
        }
    } catch (const json::exception &e) {
        throw ContractViolation(std::string("malformed camera file: ") + e.what());
    }
    return out;
}

void save_cameras(const std::filesystem::path &path, const std::vector<Camera> &cams) {
    write_text(path, cameras_to_json(cams));
}

std::vector<Camera> load_cameras(const std::filesystem::path &path) {
    return cameras_from_json(read_text(path));
}

namespace {

struct FileCloser {
    void operator()(std::FILE *f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path &path, const char *mode) {
    if (mode[0] == 'w' && path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    FilePtr f(std::fopen(path.string().c_str(), mode));
    if (!f) {
        throw IoError("cannot open " + path.string());
    }
    return f;
}

void write_png_channels(const std::filesystem::path &path, const Image *const *channels, int count,
                        PngDepth depth) {
    const Image &first = *channels[0];
    const int w = first.width();
    const int h = first.height();
    FilePtr f = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("failed to write PNG " + path.string());
    }
    png_init_io(png, f.get());
    const int bits = static_cast<int>(depth);
    png_set_IHDR(png, info, w, h, bits, count == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const double maxv = bits == 8 ? 255.0 : 65535.0;
    const int bytes = bits / 8;
    std::vector<png_byte> row(static_cast<std::size_t>(w) * count * bytes);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < count; ++c) {
                const double v = std::clamp((*channels[c])(x, y), 0.0, 1.0);
                const auto q = static_cast<unsigned>(std::lround(v * maxv));
                const std::size_t at = (static_cast<std::size_t>(x) * count + c) * bytes;
                if (bytes == 1) {
                    row[at] = static_cast<png_byte>(q);
                } else {
                    row[at] = static_cast<png_byte>(q >> 8);
                    row[at + 1] = static_cast<png_byte>(q & 0xFF);
                }
            }
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

std::vector<Image> read_png_channels(const std::filesystem::path &path) {
    FilePtr f = open_file(path, "rb");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("failed to read PNG " + path.string());
    }
    png_init_io(png, f.get());
    png_read_info(png, info);
    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    const int color = png_get_color_type(png, info);
    int bits = png_get_bit_depth(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE) {
        png_set_palette_to_rgb(png);
        bits = 8;
    }
    if (color == PNG_COLOR_TYPE_GRAY && bits < 8) {
        png_set_expand_gray_1_2_4_to_8(png);
        bits = 8;
    }
    if (color & PNG_COLOR_MASK_ALPHA) {
        png_set_strip_alpha(png);
    }
    png_read_update_info(png, info);
    const int channels = png_get_channels(png, info);
    const int bytes = bits / 8;
    const double maxv = bits == 8 ? 255.0 : 65535.0;
    std::vector<Image> out(static_cast<std::size_t>(channels), Image(w, h));
    std::vector<png_byte> row(png_get_rowbytes(png, info));
    for (int y = 0; y < h; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < channels; ++c) {
                const std::size_t at = (static_cast<std::size_t>(x) * channels + c) * bytes;
                const unsigned q = bytes == 1 ? row[at] : (static_cast<unsigned>(row[at]) << 8) | row[at + 1];
                out[c](x, y) = q / maxv;
            }
        }
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

} // namespace

void write_png(const std::filesystem::path &path, const Image &img, PngDepth depth) {
    require(!img.empty(), "write_png: empty image");
    const Image *ch[1] = {&img};
    write_png_channels(path, ch, 1, depth);
}

void write_png_rgb(const std::filesystem::path &path, const std::array<Image, 3> &channels,
                   PngDepth depth) {
    require(!channels[0].empty(), "write_png_rgb: empty image");
    const Image *ch[3] = {&channels[0], &channels[1], &channels[2]};
    write_png_channels(path, ch, 3, depth);
}

Image read_png(const std::filesystem::path &path) {
    std::vector<Image> ch = read_png_channels(path);
    if (ch.size() == 1 || ch.size() == 2) {
        return std::move(ch[0]);
    }
    Image out(ch[0].width(), ch[0].height());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.data()[i] = (ch[0].data()[i] + ch[1].data()[i] + ch[2].data()[i]) / 3.0;
    }
    return out;
}

std::array<Image, 3> read_png_rgb(const std::filesystem::path &path) {
    std::vector<Image> ch = read_png_channels(path);
    if (ch.size() < 3) {
        throw IoError("expected a 3-channel PNG: " + path.string());
    }
    return {std::move(ch[0]), std::move(ch[1]), std::move(ch[2])};
}

Image read_pfm(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::string magic;
    int w = 0;
    int h = 0;
    double scale = 0.0;
    in >> magic >> w >> h >> scale;
    in.get();
    if (magic != "Pf" || w <= 0 || h <= 0 || scale == 0.0) {
        throw IoError("unsupported PFM header in " + path.string());
    }
    const bool little = scale < 0.0;
    std::vector<float> buf(static_cast<std::size_t>(w) * h);
    in.read(reinterpret_cast<char *>(buf.data()), static_cast<std::streamsize>(buf.size() * 4));
    if (!in) {
        throw IoError("truncated PFM " + path.string());
    }
    const bool host_little = std::endian::native == std::endian::little;
    Image out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            float v = buf[static_cast<std::size_t>(y) * w + x];
            if (little != host_little) {
                auto *b = reinterpret_cast<unsigned char *>(&v);
                std::swap(b[0], b[3]);
                std::swap(b[1], b[2]);
            }
            // PFM rows run bottom to top
            out(x, h - 1 - y) = v;
        }
    }
    return out;
}

void write_pfm(const std::filesystem::path &path, const Image &img) {
    FilePtr f = open_file(path, "wb");
    const bool little = std::endian::native == std::endian::little;
    std::fprintf(f.get(), "Pf\n%d %d\n%s\n", img.width(), img.height(), little ? "-1.0" : "1.0");
    std::vector<float> row(static_cast<std::size_t>(img.width()));
    for (int y = img.height() - 1; y >= 0; --y) {
        for (int x = 0; x < img.width(); ++x) {
            row[x] = static_cast<float>(img(x, y));
        }
        std::fwrite(row.data(), sizeof(float), row.size(), f.get());
    }
}

std::string metrics_to_json(const EvalReport &report) {
    json doc;
    doc["A_mm"] = canonical(report.accuracy_mm);
    doc["C_mm"] = canonical(report.completeness_mm);
    for (std::size_t i = 0; i < report.taus_mm.size(); ++i) {
        const std::string t = std::to_string(static_cast<long>(std::lround(report.taus_mm[i])));
        doc["R" + t] = canonical(report.prf[i].recall);
        doc["P" + t] = canonical(report.prf[i].precision);
        doc["F" + t] = canonical(report.prf[i].fscore);
    }
    doc["e_num"] = report.edge_count;
    return doc.dump(1) + "\n";
}

void write_train_log(const std::filesystem::path &path, const std::vector<TrainLogRow> &rows) {
    std::ostringstream out;
    out << "epoch,loss,n_sketches,n_points,wallclock_ms\n";
    char buf[160];
    for (const TrainLogRow &r : rows) {
        std::snprintf(buf, sizeof(buf), "%d,%.9g,%zu,%zu,%.3f\n", r.epoch, r.loss, r.sketches,
                      r.points, r.wallclock_ms);
        out << buf;
    }
    write_text(path, out.str());
}

} // namespace edgesplat
