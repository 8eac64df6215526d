#include "plrp/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "plrp/errors.hpp"

namespace plrp {

namespace {

// Indices of the strictly positive entries, ascending by value then index.
std::vector<std::size_t> ascending_positive(std::span<const double> r) {
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r[i] < 0.0 || std::isnan(r[i])) throw ConfigError("threshold selection needs a non-negative vector");
        if (r[i] > 0.0) order.push_back(i);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return r[a] < r[b]; });
    return order;
}

double l1(std::span<const double> r) {
    double s = 0.0;
    for (double v : r) s += std::abs(v);
    return s;
}

}  // namespace

std::pair<Tensor, Tensor> split_signs(const Tensor& r) {
    Tensor pos(r.shape), neg(r.shape);
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r[i] > 0.0) pos[i] = r[i];
        if (r[i] < 0.0) neg[i] = -r[i];
    }
    return {std::move(pos), std::move(neg)};
}

Mask ThresholdResult::keep_mask(std::size_t n) const {
    Mask keep(n, 1);
    for (std::size_t i : pruned) keep[i] = 0;
    return keep;
}

ThresholdResult threshold_for_mass(std::span<const double> r, double p) {
    if (!(p >= 0.0 && p < 1.0)) throw ConfigError("pruned proportion p must lie in [0, 1)");
    const std::vector<std::size_t> order = ascending_positive(r);
    double total = 0.0;
    for (std::size_t i : order) total += r[i];

    ThresholdResult result;
    const double budget = p * total;
    double prefix = 0.0;
    for (std::size_t i : order) {
        if (prefix + r[i] > budget) break;
        prefix += r[i];
        result.pruned.push_back(i);
        result.threshold = r[i];
    }
    result.implied_p = total > 0.0 ? prefix / total : 0.0;
    return result;
}

double zero_fraction(std::span<const double> r) {
    if (r.empty()) return 0.0;
    const auto zeros = std::count(r.begin(), r.end(), 0.0);
    return static_cast<double>(zeros) / static_cast<double>(r.size());
}

std::vector<double> sparsity_gains(std::span<const double> r, const SparsityMeasure& measure) {
    const std::vector<std::size_t> order = ascending_positive(r);
    const double total = l1(r);
    std::vector<double> v(r.begin(), r.end());
    std::vector<double> gains;
    gains.reserve(order.size());
    using Plain = double (*)(std::span<const double>);
    if (const Plain* f = measure.target<Plain>(); f && *f == &zero_fraction) {
        // Each zeroing adds exactly 1/n.
        const double step = total / static_cast<double>(r.size());
        for (std::size_t i : order) gains.push_back(step / r[i]);
        return gains;
    }
    double s_prev = measure(v);
    for (std::size_t i : order) {
        const double removed = v[i];
        v[i] = 0.0;
        const double s_next = measure(v);
        gains.push_back(total * (s_next - s_prev) / removed);
        s_prev = s_next;
    }
    return gains;
}

ThresholdResult threshold_for_gain(std::span<const double> r, double min_gain, const SparsityMeasure& measure) {
    if (!(min_gain > 0.0)) throw ConfigError("minimal sparsity gain must be > 0");
    const std::vector<std::size_t> order = ascending_positive(r);
    ThresholdResult result;
    if (order.empty()) return result;
    const std::vector<double> gains = sparsity_gains(r, measure);
    double total = 0.0, pruned_mass = 0.0;
    for (std::size_t i : order) total += r[i];
    for (std::size_t step = 0; step + 1 < order.size(); ++step) {
        if (gains[step] < min_gain) break;
        result.pruned.push_back(order[step]);
        result.threshold = r[order[step]];
        pruned_mass += r[order[step]];
    }
    result.implied_p = pruned_mass / total;
    return result;
}

std::vector<double> prune_lambda(std::span<const double> r, double theta) {
    Mask keep(r.size(), 0);
    for (std::size_t i = 0; i < r.size(); ++i) keep[i] = r[i] > theta;
    return prune_lambda(r, keep);
}

std::vector<double> prune_lambda(std::span<const double> r, const Mask& keep) {
    if (keep.size() != r.size()) throw ShapeError("keep mask size does not match relevance vector");
    const double total = l1(r);
    double kept = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i)
        if (keep[i]) kept += std::abs(r[i]);
    std::vector<double> out(r.size(), 0.0);
    if (total == 0.0) return out;
    if (kept == 0.0)
        throw NumericalError("no relevance left above the threshold; lower the pruned proportion");
    const double lambda = total / kept;
    for (std::size_t i = 0; i < r.size(); ++i)
        if (keep[i]) out[i] = lambda * r[i];
    return out;
}

std::vector<double> propagate_pruned_matrix(const Layer& layer, const Shape& in_shape, std::span<const double> acts,
                                            std::span<const double> r_out, const Mask& keep, const Rule& rule,
                                            double fallback_epsilon, PropagationStats* stats) {
    if (keep.size() != acts.size()) throw ShapeError("keep mask size does not match activations");
    std::vector<double> masked(acts.begin(), acts.end());
    for (std::size_t j = 0; j < masked.size(); ++j)
        if (!keep[j]) masked[j] = 0.0;
    const PropagationOptions options{ZeroDenominator::Stabilize, fallback_epsilon};
    return propagate_linear(layer, in_shape, rule, masked, r_out, options, stats);
}

}  // namespace plrp
