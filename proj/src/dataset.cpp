#include "plrp/dataset.hpp"

#include <algorithm>

namespace plrp {

bool Sample::has_mask() const {
    return std::any_of(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; });
}

double mean_value(const Dataset& data) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& s : data) {
        sum += s.input.sum();
        count += s.input.size();
    }
    return count ? sum / static_cast<double>(count) : 0.0;
}

}  // namespace plrp
