#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "plrp/model.hpp"

namespace plrp {

/// Dense layer of the given size with zero parameters.
Dense make_dense(std::size_t in, std::size_t out);
Conv2D make_conv(std::size_t in_channels, std::size_t out_channels, std::size_t kernel_h, std::size_t kernel_w,
                 std::size_t pad_h = 0, std::size_t pad_w = 0);

/// Sequence CNN over a 1 x 4 x length one-hot input: a 4 x 12 conv with
/// `filters` channels, ReLU, 1 x 8 max pooling, a 16-unit hidden dense layer
/// and the class scores.
Model genome_cnn(std::size_t filters, std::size_t num_classes, std::size_t length = 250);

/// Two conv/ReLU/2x2-pool stages (8 and 16 channels, 3x3, same padding), a
/// 32-unit hidden dense layer and the class scores; 1 x size x size input.
Model shapes_cnn(std::size_t image_size, std::size_t num_classes);

/// ReLU MLP with the given layer widths (widths.front() is the input size).
Model mlp(const std::vector<std::size_t>& widths);

/// Named presets: "genome-4", "genome-32", "shapes". Weights He-initialized from `seed`.
Model make_preset(std::string_view name, const Shape& input_shape, std::size_t num_classes, std::uint64_t seed);

}  // namespace plrp
