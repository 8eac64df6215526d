#include "plrp/raster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "plrp/errors.hpp"

namespace plrp {

namespace {

std::size_t read_header_int(std::istream& in, const std::filesystem::path& path) {
    in >> std::ws;
    while (in.peek() == '#') {
        std::string comment;
        std::getline(in, comment);
        in >> std::ws;
    }
    long long v = -1;
    in >> v;
    if (!in || v <= 0) throw FormatError(path.string() + ": malformed raster header");
    return static_cast<std::size_t>(v);
}

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }

}  // namespace

void write_raster(const Raster& r, const std::filesystem::path& path) {
    if (r.channels != 1 && r.channels != 3) throw FormatError("rasters must have 1 or 3 channels");
    if (r.pixels.size() != r.width * r.height * r.channels) throw FormatError("raster pixel count mismatch");
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    out << (r.channels == 1 ? "P5" : "P6") << "\n" << r.width << " " << r.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(r.pixels.data()), static_cast<std::streamsize>(r.pixels.size()));
    if (!out) throw FormatError("write failed for " + path.string());
}

Raster read_raster(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    std::string magic;
    in >> magic;
    Raster r;
    if (magic == "P5")
        r.channels = 1;
    else if (magic == "P6")
        r.channels = 3;
    else
        throw FormatError(path.string() + ": expected a binary PGM (P5) or PPM (P6) raster");
    r.width = read_header_int(in, path);
    r.height = read_header_int(in, path);
    if (read_header_int(in, path) != 255) throw FormatError(path.string() + ": only maxval 255 is supported");
    in.get();
    r.pixels.resize(r.width * r.height * r.channels);
    in.read(reinterpret_cast<char*>(r.pixels.data()), static_cast<std::streamsize>(r.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(r.pixels.size()))
        throw FormatError(path.string() + ": truncated raster data");
    return r;
}

Raster to_raster(const Tensor& image) {
    if (image.shape.size() != 3 || (image.shape[0] != 1 && image.shape[0] != 3))
        throw ShapeError("rasters need a 1xHxW or 3xHxW tensor, got " + shape_to_string(image.shape));
    Raster r{image.shape[2], image.shape[1], image.shape[0], {}};
    r.pixels.resize(image.size());
    const std::size_t plane = r.width * r.height;
    for (std::size_t c = 0; c < r.channels; ++c)
        for (std::size_t i = 0; i < plane; ++i) r.pixels[i * r.channels + c] = to_byte(image[c * plane + i]);
    return r;
}

Tensor from_raster(const Raster& r) {
    Tensor t({r.channels, r.height, r.width});
    const std::size_t plane = r.width * r.height;
    for (std::size_t c = 0; c < r.channels; ++c)
        for (std::size_t i = 0; i < plane; ++i) t[c * plane + i] = r.pixels[i * r.channels + c] / 255.0;
    return t;
}

Raster heatmap(const Tensor& relevance) {
    std::size_t h = 0, w = 0, channels = 1;
    if (relevance.shape.size() == 2) {
        h = relevance.shape[0];
        w = relevance.shape[1];
    } else if (relevance.shape.size() == 3) {
        channels = relevance.shape[0];
        h = relevance.shape[1];
        w = relevance.shape[2];
    } else {
        throw ShapeError("heatmaps need HxW or CxHxW relevance, got " + shape_to_string(relevance.shape));
    }
    std::vector<double> map(h * w, 0.0);
    for (std::size_t c = 0; c < channels; ++c)
        for (std::size_t i = 0; i < h * w; ++i) map[i] += relevance[c * h * w + i];
    double scale = 0.0;
    for (double v : map) scale = std::max(scale, std::abs(v));
    Raster r{w, h, 3, std::vector<std::uint8_t>(h * w * 3, 0)};
    if (scale == 0.0) return r;
    for (std::size_t i = 0; i < h * w; ++i) {
        if (map[i] > 0.0) r.pixels[3 * i] = to_byte(map[i] / scale);
        if (map[i] < 0.0) r.pixels[3 * i + 2] = to_byte(-map[i] / scale);
    }
    return r;
}

}  // namespace plrp
