#include "plrp/model.hpp"

#include <cmath>
#include <string>

#include "overloaded.hpp"
#include "plrp/errors.hpp"

namespace plrp {

namespace {

using detail::overloaded;

std::size_t pooled_extent(std::size_t in, std::size_t window, std::size_t stride) {
    if (window == 0 || stride == 0 || in < window) return 0;
    return (in - window) / stride + 1;
}

void require_finite(const std::vector<double>& values, std::string_view what) {
    for (double v : values)
        if (!std::isfinite(v)) throw NumericalError(std::string(what) + " contains a non-finite value");
}

}  // namespace

std::string_view kind_name(const Layer& layer) {
    return std::visit(overloaded{[](const Dense&) { return std::string_view("Dense"); },
                                 [](const Conv2D&) { return std::string_view("Conv2D"); },
                                 [](const ReLU&) { return std::string_view("ReLU"); },
                                 [](const MaxPool2D&) { return std::string_view("MaxPool2D"); },
                                 [](const Flatten&) { return std::string_view("Flatten"); }},
                      layer);
}

bool is_parameterized(const Layer& layer) {
    return std::holds_alternative<Dense>(layer) || std::holds_alternative<Conv2D>(layer);
}

Shape output_shape(const Layer& layer, const Shape& in) {
    return std::visit(
        overloaded{
            [&](const Dense& d) -> Shape {
                if (in.size() != 1 || in[0] != d.in)
                    throw ShapeError("Dense expects input (" + std::to_string(d.in) + "), got " +
                                     shape_to_string(in));
                if (d.weights.size() != d.in * d.out || d.bias.size() != d.out)
                    throw ShapeError("Dense parameters do not match " + std::to_string(d.in) + "x" +
                                     std::to_string(d.out));
                return {d.out};
            },
            [&](const Conv2D& c) -> Shape {
                if (in.size() != 3 || in[0] != c.in_channels)
                    throw ShapeError("Conv2D expects (" + std::to_string(c.in_channels) +
                                     "xHxW) input, got " + shape_to_string(in));
                if (c.weights.size() != c.out_channels * c.in_channels * c.kernel_h * c.kernel_w ||
                    c.bias.size() != c.out_channels)
                    throw ShapeError("Conv2D parameters do not match the declared kernel");
                const std::size_t oh = pooled_extent(in[1] + 2 * c.pad_h, c.kernel_h, c.stride_h);
                const std::size_t ow = pooled_extent(in[2] + 2 * c.pad_w, c.kernel_w, c.stride_w);
                if (oh == 0 || ow == 0)
                    throw ShapeError("Conv2D kernel does not fit input " + shape_to_string(in));
                return {c.out_channels, oh, ow};
            },
            [&](const ReLU&) -> Shape { return in; },
            [&](const MaxPool2D& p) -> Shape {
                if (in.size() != 3) throw ShapeError("MaxPool2D expects CxHxW input, got " + shape_to_string(in));
                const std::size_t oh = pooled_extent(in[1], p.window_h, p.stride_h);
                const std::size_t ow = pooled_extent(in[2], p.window_w, p.stride_w);
                if (oh == 0 || ow == 0)
                    throw ShapeError("MaxPool2D window does not fit input " + shape_to_string(in));
                return {in[0], oh, ow};
            },
            [&](const Flatten&) -> Shape { return {shape_size(in)}; },
        },
        layer);
}

Model::Model(Shape input_shape, std::size_t num_classes, std::vector<Layer> layers)
    : input_shape_(std::move(input_shape)), num_classes_(num_classes), layers_(std::move(layers)) {
    if (input_shape_.empty() || shape_size(input_shape_) == 0)
        throw ShapeError("model input shape must be non-empty with positive extents");
    if (layers_.empty()) throw ShapeError("model has no layers");
    shapes_.push_back(input_shape_);
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        try {
            shapes_.push_back(output_shape(layers_[i], shapes_.back()));
        } catch (const ShapeError& e) {
            throw ShapeError("layer " + std::to_string(i) + " (" + std::string(kind_name(layers_[i])) +
                             "): " + e.what());
        }
        if (const auto* d = std::get_if<Dense>(&layers_[i])) {
            require_finite(d->weights, "Dense weights");
            require_finite(d->bias, "Dense bias");
        } else if (const auto* c = std::get_if<Conv2D>(&layers_[i])) {
            require_finite(c->weights, "Conv2D weights");
            require_finite(c->bias, "Conv2D bias");
        }
    }
    const auto* last = std::get_if<Dense>(&layers_.back());
    if (last == nullptr) throw ShapeError("last layer must be Dense (pre-softmax scores)");
    if (last->out != num_classes_)
        throw ShapeError("last layer has " + std::to_string(last->out) + " outputs but model declares " +
                         std::to_string(num_classes_) + " classes");
}

std::size_t Model::parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers_) {
        if (const auto* d = std::get_if<Dense>(&layer)) n += d->weights.size() + d->bias.size();
        if (const auto* c = std::get_if<Conv2D>(&layer)) n += c->weights.size() + c->bias.size();
    }
    return n;
}

std::size_t Model::first_parameterized() const {
    for (std::size_t i = 0; i < layers_.size(); ++i)
        if (is_parameterized(layers_[i])) return i;
    return layers_.size();
}

}  // namespace plrp
