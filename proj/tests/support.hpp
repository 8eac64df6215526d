#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "plrp/model.hpp"
#include "plrp/random.hpp"

namespace plrp::testing {

inline std::vector<double> random_vector(Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(lo, hi);
    return v;
}

inline Dense random_dense(Rng& rng, std::size_t in, std::size_t out, double bias_scale = 0.1) {
    Dense d{in, out, random_vector(rng, in * out), random_vector(rng, out, -bias_scale, bias_scale)};
    return d;
}

/// ReLU MLP with `depth` dense layers, hidden widths in [2, max_width].
inline Model random_mlp(Rng& rng, std::size_t depth, std::size_t max_width, std::size_t in, std::size_t classes) {
    std::vector<Layer> layers;
    std::size_t width = in;
    for (std::size_t l = 0; l < depth; ++l) {
        const std::size_t next = l + 1 == depth ? classes : 2 + rng.below(max_width - 1);
        layers.emplace_back(random_dense(rng, width, next));
        if (l + 1 < depth) layers.emplace_back(ReLU{});
        width = next;
    }
    return Model({in}, classes, std::move(layers));
}

inline double l1(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
}

inline double sum(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

}  // namespace plrp::testing
