#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace plrp {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_to_string(const Shape& shape);

/// Dense row-major array of doubles.
///
/// The invariant product(shape) == data.size() is checked at construction;
/// code that writes through `data` directly must keep it.
struct Tensor {
    Shape shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(Shape s, double fill = 0.0);
    Tensor(Shape s, std::vector<double> values);

    std::size_t size() const { return data.size(); }
    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }

    std::span<double> values() { return data; }
    std::span<const double> values() const { return data; }

    double sum() const;
    bool all_finite() const;

    friend bool operator==(const Tensor&, const Tensor&) = default;
};

/// Boolean mask stored one byte per entry (vector<bool> has no span view).
using Mask = std::vector<std::uint8_t>;

}  // namespace plrp
