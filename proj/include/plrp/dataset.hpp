#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "plrp/tensor.hpp"

namespace plrp {

/// One labelled input with its ground-truth mask (empty when unknown).
struct Sample {
    std::string id;
    Tensor input;
    std::size_t label = 0;
    Mask mask;

    bool has_mask() const;
};

using Dataset = std::vector<Sample>;

/// Mean of every input value across the dataset.
double mean_value(const Dataset& data);

}  // namespace plrp
