#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "plrp/model.hpp"
#include "plrp/tensor.hpp"

namespace plrp {

/// Activations recorded during one forward pass.
struct ActivationTrace {
    /// [0] is the input, [i + 1] the output of layer i; back() holds the scores.
    std::vector<Tensor> activations;
    /// argmax of the scores (lowest index on ties).
    std::size_t winning_class = 0;

    const Tensor& scores() const { return activations.back(); }
    double winning_score() const { return activations.back()[winning_class]; }
};

/// Output of a single layer. `in` must have the shape the layer expects.
Tensor apply_layer(const Layer& layer, const Tensor& in);

/// Runs the model, recording every intermediate activation.
///
/// Throws ShapeError naming the offending layer when the input does not
/// match the model's input shape.
ActivationTrace forward(const Model& model, const Tensor& input);

/// Scores only; no trace is kept.
Tensor predict(const Model& model, const Tensor& input);

std::size_t argmax(std::span<const double> values);

}  // namespace plrp
