#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "plrp/forward.hpp"
#include "plrp/model.hpp"
#include "plrp/tensor.hpp"

namespace plrp {

// ---------------------------------------------------------------------------
// Rules
// ---------------------------------------------------------------------------

/// r_j = sum_k a_j w_jk / z_k * r_k with z_k = sum_j a_j w_jk (bias excluded).
struct Lrp0 {};

/// LRP-0 with denominator z_k + eps * sign(z_k), sign(0) = +1.
/// When `relative` is set, eps is scaled by max_k |z_k| of the layer.
struct LrpEpsilon {
    double epsilon = 1e-6;
    bool relative = true;
};

/// LRP-0 on the weights w + gamma * max(w, 0).
struct LrpGamma {
    double gamma = 0.25;
};

/// z^B box rule for bounded inputs low <= x <= high.
struct ZBox {
    double low = 0.0;
    double high = 1.0;
};

/// Max pooling: each output's relevance goes to its window maximum; ties split equally.
struct WinnerTakeAll {};

/// Average-pooling style: relevance split in proportion to the window activations.
struct Proportional {};

/// ReLU and Flatten: relevance is passed on unchanged (reshaped).
struct PassThrough {};

using Rule = std::variant<Lrp0, LrpEpsilon, LrpGamma, ZBox, WinnerTakeAll, Proportional, PassThrough>;

std::string describe(const Rule& rule);

/// One rule per model layer.
struct RuleAssignment {
    std::vector<Rule> rules;

    /// Throws ConfigError if the count or a rule/layer pairing is invalid.
    void validate(const Model& model) const;
};

struct CompositeOptions {
    double epsilon = 1e-6;  // relative to each dense layer's max |z|
    double gamma = 0.25;
    double low = 0.0;  // input-domain bounds for the z^B rule
    double high = 1.0;
};

/// z^B on the first parameterized layer, LRP-gamma on the remaining conv
/// layers, relative LRP-epsilon on the remaining dense layers, winner-take-all
/// on max pools, pass-through elsewhere.
RuleAssignment default_composite(const Model& model, const CompositeOptions& options = {});

/// `linear_rule` on every parameterized layer, winner-take-all on pools.
RuleAssignment uniform_rule(const Model& model, const Rule& linear_rule);

// ---------------------------------------------------------------------------
// Single-layer propagation
// ---------------------------------------------------------------------------

enum class ZeroDenominator {
    Throw,      // LRP-0 semantics: refuse and ask for LRP-epsilon
    Stabilize,  // replace by fallback_epsilon * scale * sign and count the column
};

struct PropagationOptions {
    ZeroDenominator on_zero = ZeroDenominator::Throw;
    double fallback_epsilon = 1e-9;
};

struct PropagationStats {
    /// Columns with non-zero incoming relevance whose denominator was exactly zero.
    std::size_t stabilized_columns = 0;
};

/// Relevance at the input of a Dense/Conv2D layer.
///
/// `acts` are the layer's input activations (possibly masked, see the
/// matrix pruning variant) and `r_out` the relevance of its outputs.
std::vector<double> propagate_linear(const Layer& layer, const Shape& in_shape, const Rule& rule,
                                     std::span<const double> acts, std::span<const double> r_out,
                                     const PropagationOptions& options = {}, PropagationStats* stats = nullptr);

/// Relevance at the input of any layer; dispatches on the layer kind.
Tensor propagate_layer(const Layer& layer, const Rule& rule, const Tensor& acts, const Tensor& r_out,
                       const PropagationOptions& options = {}, PropagationStats* stats = nullptr);

std::vector<double> propagate_dense_lrp0(const Dense& layer, std::span<const double> acts,
                                         std::span<const double> r_out);
std::vector<double> propagate_dense_eps(const Dense& layer, std::span<const double> acts,
                                        std::span<const double> r_out, double epsilon);
std::vector<double> propagate_dense_gamma(const Dense& layer, std::span<const double> acts,
                                          std::span<const double> r_out, double gamma);
std::vector<double> propagate_input_zb(const Dense& layer, std::span<const double> acts,
                                       std::span<const double> r_out, double low, double high);

enum class PoolKind { Max, Average };

/// Routes pooled relevance back to the window entries of `acts` (CxHxW).
Tensor propagate_pool(PoolKind kind, const MaxPool2D& geometry, const Tensor& acts, const Tensor& r_out);

/// Explicit LRP-0 propagation matrix, m x n row-major (row j, column k).
/// Columns with a zero denominator are left zero. Limited to 64x64 layers.
std::vector<double> lrp0_matrix(const Dense& layer, std::span<const double> acts);

// ---------------------------------------------------------------------------
// Full backward pass
// ---------------------------------------------------------------------------

/// Per-layer pruning record; only filled by the pruned engine.
struct LayerPruning {
    std::size_t layer = 0;  // trace index of the pruned relevance vector
    double theta_positive = 0.0;
    double theta_negative = 0.0;
    double implied_p_positive = 0.0;
    double implied_p_negative = 0.0;
    std::size_t pruned_count = 0;
    std::size_t undeliverable_columns = 0;
};

struct RelevanceTrace {
    /// Same indexing as ActivationTrace: [0] is the input attribution e(x),
    /// back() the one-hot score vector of the target class.
    std::vector<Tensor> relevance;
    std::size_t target_class = 0;
    double target_score = 0.0;
    std::vector<LayerPruning> pruning;
    std::size_t stabilized_columns = 0;

    const Tensor& input_relevance() const { return relevance.front(); }
};

RelevanceTrace explain_lrp(const Model& model, const Tensor& input, const RuleAssignment& rules);
RelevanceTrace explain_lrp(const Model& model, const ActivationTrace& acts, const RuleAssignment& rules);

/// r^(L): the winning score at the winning class, zero elsewhere.
Tensor initial_relevance(const ActivationTrace& acts);

}  // namespace plrp
