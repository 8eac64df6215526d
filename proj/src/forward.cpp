#include "plrp/forward.hpp"

#include <algorithm>
#include <string>

#include "overloaded.hpp"
#include "plrp/errors.hpp"
#include "plrp/linear.hpp"

namespace plrp {

using detail::overloaded;

std::size_t argmax(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

Tensor apply_layer(const Layer& layer, const Tensor& in) {
    Shape out_shape = output_shape(layer, in.shape);
    return std::visit(
        overloaded{
            [&](const Dense& d) {
                Tensor out(out_shape, linear_forward(layer, in.shape, in.data));
                for (std::size_t k = 0; k < d.out; ++k) out[k] += d.bias[k];
                return out;
            },
            [&](const Conv2D& c) {
                Tensor out(out_shape, linear_forward(layer, in.shape, in.data));
                const std::size_t plane = out_shape[1] * out_shape[2];
                for (std::size_t o = 0; o < c.out_channels; ++o)
                    for (std::size_t i = 0; i < plane; ++i) out[o * plane + i] += c.bias[o];
                return out;
            },
            [&](const ReLU&) {
                Tensor out = in;
                for (double& v : out.data) v = v > 0.0 ? v : 0.0;
                return out;
            },
            [&](const MaxPool2D& p) {
                Tensor out(out_shape);
                const std::size_t channels = in.shape[0], h = in.shape[1], w = in.shape[2];
                const std::size_t oh = out_shape[1], ow = out_shape[2];
                for (std::size_t c = 0; c < channels; ++c)
                    for (std::size_t oy = 0; oy < oh; ++oy)
                        for (std::size_t ox = 0; ox < ow; ++ox) {
                            double best = in[(c * h + oy * p.stride_h) * w + ox * p.stride_w];
                            for (std::size_t ky = 0; ky < p.window_h; ++ky)
                                for (std::size_t kx = 0; kx < p.window_w; ++kx)
                                    best = std::max(best, in[(c * h + oy * p.stride_h + ky) * w +
                                                             ox * p.stride_w + kx]);
                            out[(c * oh + oy) * ow + ox] = best;
                        }
                return out;
            },
            [&](const Flatten&) { return Tensor(out_shape, in.data); },
        },
        layer);
}

ActivationTrace forward(const Model& model, const Tensor& input) {
    if (input.shape != model.input_shape())
        throw ShapeError("input shape " + shape_to_string(input.shape) + " does not match model input " +
                         shape_to_string(model.input_shape()));
    ActivationTrace trace;
    trace.activations.reserve(model.depth() + 1);
    trace.activations.push_back(input);
    for (std::size_t i = 0; i < model.depth(); ++i) {
        Tensor next = apply_layer(model.layers()[i], trace.activations.back());
        if (!next.all_finite())
            throw NumericalError("layer " + std::to_string(i) + " (" + std::string(kind_name(model.layers()[i])) +
                                 ") produced a non-finite activation");
        trace.activations.push_back(std::move(next));
    }
    trace.winning_class = argmax(trace.activations.back().data);
    return trace;
}

Tensor predict(const Model& model, const Tensor& input) {
    if (input.shape != model.input_shape())
        throw ShapeError("input shape " + shape_to_string(input.shape) + " does not match model input " +
                         shape_to_string(model.input_shape()));
    Tensor current = input;
    for (const auto& layer : model.layers()) current = apply_layer(layer, current);
    return current;
}

}  // namespace plrp
