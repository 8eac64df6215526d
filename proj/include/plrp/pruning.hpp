#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "plrp/lrp.hpp"
#include "plrp/tensor.hpp"

namespace plrp {

/// (max(r, 0), |min(r, 0)|); r == first - second holds exactly.
std::pair<Tensor, Tensor> split_signs(const Tensor& r);

/// Threshold chosen on a non-negative relevance vector.
struct ThresholdResult {
    double threshold = 0.0;
    /// Pruned mass over total mass (0 for an all-zero vector).
    double implied_p = 0.0;
    /// Indices zeroed, in ascending value order. Never contains zero entries.
    std::vector<std::size_t> pruned;

    /// 1 for entries that are not pruned (zero entries included).
    Mask keep_mask(std::size_t n) const;
};

/// Largest ascending-prefix threshold whose pruned mass stays within p.
///
/// Entries are visited in ascending value order (ascending index among equal
/// values). The pruned set is the longest prefix whose sum is at most
/// p * sum(r), so the kept mass is always at least (1 - p) * sum(r). The
/// threshold is the last pruned value, or 0 when nothing fits.
ThresholdResult threshold_for_mass(std::span<const double> r, double p);

using SparsityMeasure = std::function<double(std::span<const double>)>;

/// Fraction of exactly-zero entries.
double zero_fraction(std::span<const double> r);

/// Sparsity gains of zeroing the positive entries one at a time in ascending
/// order: total * (s(v'') - s(v')) / |mass(v'') - mass(v')|.
std::vector<double> sparsity_gains(std::span<const double> r, const SparsityMeasure& measure = zero_fraction);

/// Prunes in ascending order while each step's sparsity gain is >= min_gain.
/// The largest entry is never pruned.
ThresholdResult threshold_for_gain(std::span<const double> r, double min_gain,
                                   const SparsityMeasure& measure = zero_fraction);

/// lambda * 1{r > theta} * r with lambda restoring the l1 mass of r.
/// Throws NumericalError if no entry lies above theta while r has mass.
std::vector<double> prune_lambda(std::span<const double> r, double theta);

/// Same rescaling with an explicit keep mask (ties at the threshold resolved
/// by the ThresholdResult's prefix).
std::vector<double> prune_lambda(std::span<const double> r, const Mask& keep);

/// Matrix-variant propagation: the layer's rule applied with activations
/// a-hat = keep * a, so masked neurons receive exactly zero. Columns whose
/// masked denominator vanishes are stabilized and counted in `stats`.
std::vector<double> propagate_pruned_matrix(const Layer& layer, const Shape& in_shape, std::span<const double> acts,
                                            std::span<const double> r_out, const Mask& keep,
                                            const Rule& rule = Lrp0{}, double fallback_epsilon = 1e-9,
                                            PropagationStats* stats = nullptr);

}  // namespace plrp
