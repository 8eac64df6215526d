#pragma once

#include <cstddef>
#include <string_view>
#include <variant>
#include <vector>

#include "plrp/tensor.hpp"

namespace plrp {

/// Fully connected layer on a rank-1 input.
///
/// `weights` is in x out, row-major: weights[j * out + k] is w_jk, the edge
/// from input neuron j to output neuron k.
struct Dense {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> weights;
    std::vector<double> bias;

    double w(std::size_t j, std::size_t k) const { return weights[j * out + k]; }
};

/// 2-D convolution on a (channels, height, width) input with zero padding.
///
/// `weights` is out_channels x in_channels x kernel_h x kernel_w, row-major.
struct Conv2D {
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
    std::size_t kernel_h = 1;
    std::size_t kernel_w = 1;
    std::size_t stride_h = 1;
    std::size_t stride_w = 1;
    std::size_t pad_h = 0;
    std::size_t pad_w = 0;
    std::vector<double> weights;
    std::vector<double> bias;

    std::size_t weight_index(std::size_t o, std::size_t c, std::size_t ky, std::size_t kx) const {
        return ((o * in_channels + c) * kernel_h + ky) * kernel_w + kx;
    }
};

struct ReLU {};

/// Max pooling over (channels, height, width); no padding.
struct MaxPool2D {
    std::size_t window_h = 2;
    std::size_t window_w = 2;
    std::size_t stride_h = 2;
    std::size_t stride_w = 2;
};

/// Reshapes any input to rank 1, preserving row-major order.
struct Flatten {};

using Layer = std::variant<Dense, Conv2D, ReLU, MaxPool2D, Flatten>;

std::string_view kind_name(const Layer& layer);
bool is_parameterized(const Layer& layer);

/// Output shape of `layer` for an input of shape `in`; throws ShapeError.
Shape output_shape(const Layer& layer, const Shape& in);

/// Ordered layer stack computing pre-softmax class scores.
///
/// Immutable once constructed; the constructor validates that shapes chain,
/// parameter arrays have the declared sizes, and the last layer is a Dense
/// layer with `num_classes` outputs.
class Model {
public:
    Model(Shape input_shape, std::size_t num_classes, std::vector<Layer> layers);

    const Shape& input_shape() const { return input_shape_; }
    std::size_t num_classes() const { return num_classes_; }
    const std::vector<Layer>& layers() const { return layers_; }
    std::size_t depth() const { return layers_.size(); }

    /// Shapes at every trace index: [0] is the input, [depth()] the scores.
    const std::vector<Shape>& shapes() const { return shapes_; }

    std::size_t parameter_count() const;

    /// Index of the first parameterized layer.
    std::size_t first_parameterized() const;

private:
    Shape input_shape_;
    std::size_t num_classes_;
    std::vector<Layer> layers_;
    std::vector<Shape> shapes_;
};

}  // namespace plrp
