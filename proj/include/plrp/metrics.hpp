#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plrp/model.hpp"
#include "plrp/tensor.hpp"

namespace plrp {

/// Discrete Gini index of |r| over ascending-sorted magnitudes:
/// sum_k (2k - n - 1) |r|_(k) / (n * sum |r|). 0 for an all-zero vector.
double gini(std::span<const double> r);

/// Shannon entropy (natural log) of |r| / sum |r|. 0 for an all-zero vector.
double entropy(std::span<const double> r);

bool all_zero(std::span<const double> r);

/// Relevance mass accuracy: share of the positive relevance inside `mask`.
/// Empty when there is no positive relevance.
std::optional<double> relevance_mass_accuracy(std::span<const double> r, const Mask& mask);

using Explainer = std::function<Tensor(const Tensor&)>;

/// Local Lipschitz estimate max ||e(x) - e(x')|| / ||x - x'|| over x' drawn
/// uniformly from the open Euclidean ball of radius `epsilon` around x.
///
/// Samples come from one seeded stream, so the first k samples are the same
/// for any n_samples >= k and the estimate is nondecreasing in n_samples.
double lipschitz_estimate(const Explainer& explainer, const Tensor& x, double epsilon, std::size_t n_samples,
                          std::uint64_t seed);

struct FlipPoint {
    double fraction = 0.0;  // share of features (or patches) perturbed
    double score = 1.0;     // f_c(x') / f_c(x)
};

struct FlipResult {
    std::vector<FlipPoint> curve;
    double auc = 1.0;
};

struct FlipOptions {
    std::size_t steps = 16;
    /// Square patch edge for CxHxW inputs; ignored for other ranks (single features).
    std::size_t patch_size = 8;
};

/// Pixel flipping: perturb features in descending order of relevance (ties
/// by ascending index) by copying values from `replacement`, tracking the
/// normalized score of the originally winning class. After step t of
/// `steps`, round(t * N / steps) of the N features/patches are perturbed.
/// AUC uses the trapezoid rule over fraction in [0, 1]; steps == 0 yields the
/// single point (0, 1) and AUC 1. Empty when the original score is <= 0.
std::optional<FlipResult> pixel_flip(const Model& model, const Tensor& x, const Tensor& relevance,
                                     const FlipOptions& options, const Tensor& replacement);

/// Trapezoid area under a curve given as (fraction, score) points.
double trapezoid_auc(std::span<const FlipPoint> curve);

/// Everything computed for one explanation; absent metrics stay empty.
struct MetricsReport {
    std::optional<double> gini;
    std::optional<double> entropy;
    std::optional<double> rma;
    std::optional<double> lipschitz;
    std::optional<double> faith_auc;
    std::vector<FlipPoint> flip_curve;
    std::vector<std::string> warnings;
};

}  // namespace plrp
