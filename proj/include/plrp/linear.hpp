#pragma once

#include <functional>
#include <span>
#include <vector>

#include "plrp/model.hpp"

namespace plrp {

// Bias-free linear maps of the parameterized layers. Every LRP rule is
// expressed through these two primitives so Dense and Conv2D share one
// relevance code path; Conv2D enumerates its windows explicitly.

/// z = W^T a (no bias). `in_shape` is the layer's input shape.
std::vector<double> linear_forward(const Layer& layer, const Shape& in_shape, std::span<const double> a);

/// c = W s, i.e. c_j = sum_k w_jk s_k over every output k that reads input j.
std::vector<double> linear_transpose(const Layer& layer, const Shape& in_shape, std::span<const double> s);

/// Copy of a Dense/Conv2D layer with every weight replaced by fn(w); bias zeroed.
Layer map_weights(const Layer& layer, const std::function<double(double)>& fn);

}  // namespace plrp
