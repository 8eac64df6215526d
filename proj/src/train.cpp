#include "plrp/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "plrp/errors.hpp"
#include "plrp/forward.hpp"
#include "plrp/linear.hpp"
#include "plrp/random.hpp"

namespace plrp {

namespace {

struct Gradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> bias;

    explicit Gradients(const std::vector<Layer>& layers) : weights(layers.size()), bias(layers.size()) {
        for (std::size_t i = 0; i < layers.size(); ++i) {
            if (const auto* d = std::get_if<Dense>(&layers[i])) {
                weights[i].assign(d->weights.size(), 0.0);
                bias[i].assign(d->bias.size(), 0.0);
            } else if (const auto* c = std::get_if<Conv2D>(&layers[i])) {
                weights[i].assign(c->weights.size(), 0.0);
                bias[i].assign(c->bias.size(), 0.0);
            }
        }
    }

    void clear() {
        for (auto& w : weights) std::fill(w.begin(), w.end(), 0.0);
        for (auto& b : bias) std::fill(b.begin(), b.end(), 0.0);
    }
};

void conv_weight_gradient(const Conv2D& c, const Tensor& in, std::span<const double> g, std::vector<double>& dw,
                          std::vector<double>& db) {
    const std::size_t h = in.shape[1], w = in.shape[2];
    const Shape out = output_shape(Layer{c}, in.shape);
    const std::size_t oh = out[1], ow = out[2];
    for (std::size_t o = 0; o < c.out_channels; ++o)
        for (std::size_t oy = 0; oy < oh; ++oy)
            for (std::size_t ox = 0; ox < ow; ++ox) {
                const double go = g[(o * oh + oy) * ow + ox];
                if (go == 0.0) continue;
                db[o] += go;
                for (std::size_t ch = 0; ch < c.in_channels; ++ch)
                    for (std::size_t ky = 0; ky < c.kernel_h; ++ky) {
                        const std::ptrdiff_t y = static_cast<std::ptrdiff_t>(oy * c.stride_h + ky) -
                                                 static_cast<std::ptrdiff_t>(c.pad_h);
                        if (y < 0 || y >= static_cast<std::ptrdiff_t>(h)) continue;
                        for (std::size_t kx = 0; kx < c.kernel_w; ++kx) {
                            const std::ptrdiff_t x = static_cast<std::ptrdiff_t>(ox * c.stride_w + kx) -
                                                     static_cast<std::ptrdiff_t>(c.pad_w);
                            if (x < 0 || x >= static_cast<std::ptrdiff_t>(w)) continue;
                            dw[c.weight_index(o, ch, ky, kx)] +=
                                go * in[(ch * h + static_cast<std::size_t>(y)) * w + static_cast<std::size_t>(x)];
                        }
                    }
            }
}

Tensor pool_gradient(const MaxPool2D& p, const Tensor& in, const Tensor& g) {
    Tensor out(in.shape);
    const std::size_t channels = in.shape[0], h = in.shape[1], w = in.shape[2];
    const std::size_t oh = g.shape[1], ow = g.shape[2];
    for (std::size_t c = 0; c < channels; ++c)
        for (std::size_t oy = 0; oy < oh; ++oy)
            for (std::size_t ox = 0; ox < ow; ++ox) {
                const double go = g[(c * oh + oy) * ow + ox];
                if (go == 0.0) continue;
                std::size_t best = (c * h + oy * p.stride_h) * w + ox * p.stride_w;
                for (std::size_t ky = 0; ky < p.window_h; ++ky)
                    for (std::size_t kx = 0; kx < p.window_w; ++kx) {
                        const std::size_t i = (c * h + oy * p.stride_h + ky) * w + ox * p.stride_w + kx;
                        if (in[i] > in[best]) best = i;
                    }
                out[best] += go;
            }
    return out;
}

// Accumulates parameter gradients of the cross-entropy loss for one sample
// and returns the loss.
double backprop(const Model& model, const Sample& sample, Gradients& grads, bool& correct) {
    const ActivationTrace trace = forward(model, sample.input);
    const Tensor& scores = trace.scores();
    const double top = *std::max_element(scores.data.begin(), scores.data.end());
    double norm = 0.0;
    for (double s : scores.data) norm += std::exp(s - top);
    const double log_norm = top + std::log(norm);
    const double loss = log_norm - scores[sample.label];
    correct = trace.winning_class == sample.label;

    Tensor g(scores.shape);
    for (std::size_t k = 0; k < g.size(); ++k) g[k] = std::exp(scores[k] - log_norm) - (k == sample.label ? 1.0 : 0.0);

    for (std::size_t i = model.depth(); i-- > 0;) {
        const Layer& layer = model.layers()[i];
        const Tensor& in = trace.activations[i];
        if (const auto* d = std::get_if<Dense>(&layer)) {
            auto& dw = grads.weights[i];
            for (std::size_t j = 0; j < d->in; ++j) {
                const double aj = in[j];
                if (aj == 0.0) continue;
                double* row = &dw[j * d->out];
                for (std::size_t k = 0; k < d->out; ++k) row[k] += aj * g[k];
            }
            for (std::size_t k = 0; k < d->out; ++k) grads.bias[i][k] += g[k];
            if (i > 0) g = Tensor(in.shape, linear_transpose(layer, in.shape, g.data));
        } else if (const auto* c = std::get_if<Conv2D>(&layer)) {
            conv_weight_gradient(*c, in, g.data, grads.weights[i], grads.bias[i]);
            if (i > 0) g = Tensor(in.shape, linear_transpose(layer, in.shape, g.data));
        } else if (std::holds_alternative<ReLU>(layer)) {
            const Tensor& out = trace.activations[i + 1];
            for (std::size_t k = 0; k < g.size(); ++k)
                if (out[k] <= 0.0) g[k] = 0.0;
        } else if (const auto* p = std::get_if<MaxPool2D>(&layer)) {
            g = pool_gradient(*p, in, g);
        } else {
            g.shape = in.shape;
        }
    }
    return loss;
}

void apply_update(std::vector<Layer>& layers, const Gradients& grads, double step) {
    for (std::size_t i = 0; i < layers.size(); ++i) {
        auto update = [&](std::vector<double>& w, std::vector<double>& b) {
            for (std::size_t k = 0; k < w.size(); ++k) w[k] -= step * grads.weights[i][k];
            for (std::size_t k = 0; k < b.size(); ++k) b[k] -= step * grads.bias[i][k];
        };
        if (auto* d = std::get_if<Dense>(&layers[i])) update(d->weights, d->bias);
        if (auto* c = std::get_if<Conv2D>(&layers[i])) update(c->weights, c->bias);
    }
}

}  // namespace

Model train_sgd(const Model& model, std::span<const Sample> data, const TrainOptions& options) {
    if (data.empty()) throw ConfigError("training needs at least one sample");
    if (options.batch_size == 0) throw ConfigError("batch size must be positive");
    if (!(options.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
    for (const auto& s : data)
        if (s.label >= model.num_classes())
            throw FormatError("sample " + s.id + " has label " + std::to_string(s.label) + " outside [0, " +
                              std::to_string(model.num_classes()) + ")");
    if (options.epochs == 0) return model;

    std::vector<Layer> layers = model.layers();
    Model current = model;
    Gradients grads(layers);
    Rng rng(options.seed);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 1; epoch <= options.epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        std::size_t hits = 0;
        for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
            const std::size_t end = std::min(order.size(), start + options.batch_size);
            grads.clear();
            for (std::size_t b = start; b < end; ++b) {
                bool correct = false;
                const double loss = backprop(current, data[order[b]], grads, correct);
                if (!std::isfinite(loss))
                    throw NumericalError("training diverged in epoch " + std::to_string(epoch) +
                                         " (non-finite loss); lower the learning rate");
                loss_sum += loss;
                hits += correct;
            }
            apply_update(layers, grads, options.learning_rate / static_cast<double>(end - start));
            current = Model(model.input_shape(), model.num_classes(), layers);
        }
        if (options.on_epoch)
            options.on_epoch({epoch, loss_sum / static_cast<double>(data.size()),
                              static_cast<double>(hits) / static_cast<double>(data.size())});
    }
    return current;
}

Model initialize(const Model& architecture, std::uint64_t seed) {
    std::vector<Layer> layers = architecture.layers();
    Rng rng(seed);
    for (auto& layer : layers) {
        auto fill = [&](std::vector<double>& w, std::vector<double>& b, std::size_t fan_in) {
            const double scale = std::sqrt(2.0 / static_cast<double>(fan_in));
            for (double& v : w) v = scale * rng.normal();
            std::fill(b.begin(), b.end(), 0.0);
        };
        if (auto* d = std::get_if<Dense>(&layer)) fill(d->weights, d->bias, d->in);
        if (auto* c = std::get_if<Conv2D>(&layer)) fill(c->weights, c->bias, c->in_channels * c->kernel_h * c->kernel_w);
    }
    return Model(architecture.input_shape(), architecture.num_classes(), std::move(layers));
}

double accuracy(const Model& model, std::span<const Sample> data) {
    if (data.empty()) return 0.0;
    std::size_t hits = 0;
    for (const auto& s : data) hits += argmax(predict(model, s.input).data) == s.label;
    return static_cast<double>(hits) / static_cast<double>(data.size());
}

}  // namespace plrp
