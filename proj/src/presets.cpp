#include "plrp/presets.hpp"

#include <string>

#include "plrp/errors.hpp"
#include "plrp/train.hpp"

namespace plrp {

Dense make_dense(std::size_t in, std::size_t out) {
    return Dense{in, out, std::vector<double>(in * out, 0.0), std::vector<double>(out, 0.0)};
}

Conv2D make_conv(std::size_t in_channels, std::size_t out_channels, std::size_t kernel_h, std::size_t kernel_w,
                 std::size_t pad_h, std::size_t pad_w) {
    Conv2D c;
    c.in_channels = in_channels;
    c.out_channels = out_channels;
    c.kernel_h = kernel_h;
    c.kernel_w = kernel_w;
    c.pad_h = pad_h;
    c.pad_w = pad_w;
    c.weights.assign(out_channels * in_channels * kernel_h * kernel_w, 0.0);
    c.bias.assign(out_channels, 0.0);
    return c;
}

Model genome_cnn(std::size_t filters, std::size_t num_classes, std::size_t length) {
    constexpr std::size_t kKernel = 12, kPool = 8, kHidden = 16;
    if (length < kKernel + kPool) throw ConfigError("sequence too short for the genome CNN");
    const std::size_t conv_width = length - kKernel + 1;
    const std::size_t pooled = (conv_width - kPool) / kPool + 1;
    std::vector<Layer> layers{make_conv(1, filters, 4, kKernel), ReLU{}, MaxPool2D{1, kPool, 1, kPool}, Flatten{},
                              make_dense(filters * pooled, kHidden), ReLU{}, make_dense(kHidden, num_classes)};
    return Model({1, 4, length}, num_classes, std::move(layers));
}

Model shapes_cnn(std::size_t image_size, std::size_t num_classes) {
    if (image_size % 4 != 0) throw ConfigError("shapes CNN needs an image size divisible by 4");
    const std::size_t pooled = image_size / 4;
    std::vector<Layer> layers{make_conv(1, 8, 3, 3, 1, 1),  ReLU{}, MaxPool2D{},
                              make_conv(8, 16, 3, 3, 1, 1), ReLU{}, MaxPool2D{},
                              Flatten{},                    make_dense(16 * pooled * pooled, 32),
                              ReLU{},                       make_dense(32, num_classes)};
    return Model({1, image_size, image_size}, num_classes, std::move(layers));
}

Model mlp(const std::vector<std::size_t>& widths) {
    if (widths.size() < 2) throw ConfigError("an MLP needs at least an input and an output width");
    std::vector<Layer> layers;
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
        layers.emplace_back(make_dense(widths[i], widths[i + 1]));
        if (i + 2 < widths.size()) layers.emplace_back(ReLU{});
    }
    return Model({widths.front()}, widths.back(), std::move(layers));
}

Model make_preset(std::string_view name, const Shape& input_shape, std::size_t num_classes, std::uint64_t seed) {
    Model architecture = [&] {
        if (name == "genome-4" || name == "genome-32") {
            if (input_shape.size() != 3 || input_shape[0] != 1 || input_shape[1] != 4)
                throw ConfigError("genome presets need a 1x4xL input, got " + shape_to_string(input_shape));
            return genome_cnn(name == "genome-4" ? 4 : 32, num_classes, input_shape[2]);
        }
        if (name == "shapes") {
            if (input_shape.size() != 3 || input_shape[0] != 1 || input_shape[1] != input_shape[2])
                throw ConfigError("shapes preset needs a 1xSxS input, got " + shape_to_string(input_shape));
            return shapes_cnn(input_shape[1], num_classes);
        }
        throw ConfigError("unknown model preset '" + std::string(name) + "'");
    }();
    return initialize(architecture, seed);
}

}  // namespace plrp
