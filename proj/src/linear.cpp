#include "plrp/linear.hpp"

#include <string>

#include "overloaded.hpp"
#include "plrp/errors.hpp"

namespace plrp {

namespace {

using detail::overloaded;

struct ConvGeometry {
    std::size_t in_h, in_w, out_h, out_w;
};

ConvGeometry geometry(const Conv2D& c, const Shape& in_shape) {
    const Shape out = output_shape(Layer{c}, in_shape);
    return {in_shape[1], in_shape[2], out[1], out[2]};
}

// Calls visit(in_index, out_index, weight) for every kernel tap that lands
// inside the (unpadded) input.
template <class Visit>
void for_each_tap(const Conv2D& c, const ConvGeometry& g, Visit&& visit) {
    for (std::size_t o = 0; o < c.out_channels; ++o) {
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
            for (std::size_t ox = 0; ox < g.out_w; ++ox) {
                const std::size_t out_index = (o * g.out_h + oy) * g.out_w + ox;
                for (std::size_t ch = 0; ch < c.in_channels; ++ch) {
                    for (std::size_t ky = 0; ky < c.kernel_h; ++ky) {
                        const std::ptrdiff_t y = static_cast<std::ptrdiff_t>(oy * c.stride_h + ky) -
                                                 static_cast<std::ptrdiff_t>(c.pad_h);
                        if (y < 0 || y >= static_cast<std::ptrdiff_t>(g.in_h)) continue;
                        const std::size_t row = (ch * g.in_h + static_cast<std::size_t>(y)) * g.in_w;
                        const double* wrow = &c.weights[c.weight_index(o, ch, ky, 0)];
                        for (std::size_t kx = 0; kx < c.kernel_w; ++kx) {
                            const std::ptrdiff_t x = static_cast<std::ptrdiff_t>(ox * c.stride_w + kx) -
                                                     static_cast<std::ptrdiff_t>(c.pad_w);
                            if (x < 0 || x >= static_cast<std::ptrdiff_t>(g.in_w)) continue;
                            visit(row + static_cast<std::size_t>(x), out_index, wrow[kx]);
                        }
                    }
                }
            }
        }
    }
}

}  // namespace

std::vector<double> linear_forward(const Layer& layer, const Shape& in_shape, std::span<const double> a) {
    return std::visit(
        overloaded{
            [&](const Dense& d) {
                if (a.size() != d.in) throw ShapeError("Dense input size mismatch");
                std::vector<double> z(d.out, 0.0);
                for (std::size_t j = 0; j < d.in; ++j) {
                    const double aj = a[j];
                    if (aj == 0.0) continue;
                    const double* row = &d.weights[j * d.out];
                    for (std::size_t k = 0; k < d.out; ++k) z[k] += aj * row[k];
                }
                return z;
            },
            [&](const Conv2D& c) {
                if (a.size() != shape_size(in_shape)) throw ShapeError("Conv2D input size mismatch");
                const ConvGeometry g = geometry(c, in_shape);
                std::vector<double> z(c.out_channels * g.out_h * g.out_w, 0.0);
                for_each_tap(c, g, [&](std::size_t i, std::size_t o, double w) { z[o] += a[i] * w; });
                return z;
            },
            [&](const auto&) -> std::vector<double> {
                throw ShapeError("linear_forward on a non-parameterized layer");
            },
        },
        layer);
}

std::vector<double> linear_transpose(const Layer& layer, const Shape& in_shape, std::span<const double> s) {
    return std::visit(
        overloaded{
            [&](const Dense& d) {
                if (s.size() != d.out) throw ShapeError("Dense upstream size mismatch");
                std::vector<double> c(d.in, 0.0);
                for (std::size_t j = 0; j < d.in; ++j) {
                    const double* row = &d.weights[j * d.out];
                    double acc = 0.0;
                    for (std::size_t k = 0; k < d.out; ++k) acc += row[k] * s[k];
                    c[j] = acc;
                }
                return c;
            },
            [&](const Conv2D& conv) {
                const ConvGeometry g = geometry(conv, in_shape);
                if (s.size() != conv.out_channels * g.out_h * g.out_w)
                    throw ShapeError("Conv2D upstream size mismatch");
                std::vector<double> c(shape_size(in_shape), 0.0);
                for_each_tap(conv, g, [&](std::size_t i, std::size_t o, double w) {
                    if (s[o] != 0.0) c[i] += w * s[o];
                });
                return c;
            },
            [&](const auto&) -> std::vector<double> {
                throw ShapeError("linear_transpose on a non-parameterized layer");
            },
        },
        layer);
}

Layer map_weights(const Layer& layer, const std::function<double(double)>& fn) {
    return std::visit(
        overloaded{
            [&](Dense d) -> Layer {
                for (double& w : d.weights) w = fn(w);
                std::fill(d.bias.begin(), d.bias.end(), 0.0);
                return d;
            },
            [&](Conv2D c) -> Layer {
                for (double& w : c.weights) w = fn(w);
                std::fill(c.bias.begin(), c.bias.end(), 0.0);
                return c;
            },
            [&](const auto&) -> Layer { throw ShapeError("map_weights on a non-parameterized layer"); },
        },
        layer);
}

}  // namespace plrp
