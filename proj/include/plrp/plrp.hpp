#pragma once

#include <cstddef>
#include <map>
#include <optional>

#include "plrp/lrp.hpp"
#include "plrp/pruning.hpp"

namespace plrp {

enum class Variant {
    Lambda,  // rescale the surviving relevance by lambda
    Matrix,  // zero the pruned activations in the propagation matrix
};

enum class ThresholdMode {
    FixedProportion,  // prune a fixed proportion p of the relevance mass
    SparsityGain,     // prune while the sparsity gain stays above min_gain
};

/// Pruning settings for one explanation.
///
/// The relevance at the input of every parameterized layer except the first
/// one is pruned, so the input attribution itself is never thresholded.
/// Positive and negative relevance are thresholded separately.
struct PruningConfig {
    Variant variant = Variant::Lambda;
    ThresholdMode mode = ThresholdMode::FixedProportion;
    double p = 0.0;
    std::optional<double> p_positive;
    std::optional<double> p_negative;
    /// Per-layer overrides keyed by the trace index of the pruned vector.
    std::map<std::size_t, double> layer_p;
    double min_gain = 1.0;
    /// Stabilizer for matrix-variant columns whose masked denominator is zero.
    double fallback_epsilon = 1e-9;

    static constexpr bool last_step_unpruned = true;

    void validate() const;
    double proportion(std::size_t trace_index, bool negative) const;
};

/// Relevance attribution with per-layer pruning.
///
/// For each pruned layer: a preliminary LRP step gives r-tilde, which is
/// split by sign; each sign gets its own threshold (mass or gain mode); the
/// lambda variant rescales the survivors, the matrix variant repeats the step
/// with the pruned activations zeroed. The resulting trace carries one
/// LayerPruning record per pruned layer.
RelevanceTrace explain_plrp(const Model& model, const Tensor& input, const RuleAssignment& rules,
                            const PruningConfig& config);
RelevanceTrace explain_plrp(const Model& model, const ActivationTrace& acts, const RuleAssignment& rules,
                            const PruningConfig& config);

}  // namespace plrp
