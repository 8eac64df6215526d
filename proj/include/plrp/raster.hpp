#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "plrp/tensor.hpp"

namespace plrp {

/// 8-bit raster with 1 (PGM) or 3 (PPM) interleaved channels.
struct Raster {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t channels = 1;
    std::vector<std::uint8_t> pixels;
};

/// Binary P5/P6 writer and reader (maxval 255).
void write_raster(const Raster& raster, const std::filesystem::path& path);
Raster read_raster(const std::filesystem::path& path);

/// CxHxW tensor in [0, 1] to a raster (C must be 1 or 3); values are rounded to 1/255 steps.
Raster to_raster(const Tensor& image);
Tensor from_raster(const Raster& raster);

/// Signed relevance heatmap of an HxW map (channels summed first when the
/// relevance is CxHxW): positive relevance in the red channel, negative in
/// blue, both scaled by max |r|.
Raster heatmap(const Tensor& relevance);

}  // namespace plrp
