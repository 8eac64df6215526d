#include "plrp/plrp.hpp"

#include <string>

#include "plrp/errors.hpp"

namespace plrp {

namespace {

void check_proportion(double p, const std::string& what) {
    if (!(p >= 0.0 && p < 1.0)) throw ConfigError(what + " must lie in [0, 1), got " + std::to_string(p));
}

ThresholdResult select_threshold(const Tensor& r, const PruningConfig& config, std::size_t index, bool negative) {
    if (config.mode == ThresholdMode::SparsityGain) return threshold_for_gain(r.data, config.min_gain);
    return threshold_for_mass(r.data, config.proportion(index, negative));
}

}  // namespace

void PruningConfig::validate() const {
    check_proportion(p, "p");
    if (p_positive) check_proportion(*p_positive, "p_positive");
    if (p_negative) check_proportion(*p_negative, "p_negative");
    for (const auto& [layer, value] : layer_p) check_proportion(value, "p for layer " + std::to_string(layer));
    if (!(min_gain > 0.0)) throw ConfigError("min_gain must be > 0");
    if (!(fallback_epsilon > 0.0)) throw ConfigError("fallback_epsilon must be > 0");
}

double PruningConfig::proportion(std::size_t trace_index, bool negative) const {
    if (auto it = layer_p.find(trace_index); it != layer_p.end()) return it->second;
    const auto& signed_p = negative ? p_negative : p_positive;
    return signed_p.value_or(p);
}

RelevanceTrace explain_plrp(const Model& model, const Tensor& input, const RuleAssignment& rules,
                            const PruningConfig& config) {
    return explain_plrp(model, forward(model, input), rules, config);
}

RelevanceTrace explain_plrp(const Model& model, const ActivationTrace& acts, const RuleAssignment& rules,
                            const PruningConfig& config) {
    config.validate();
    rules.validate(model);

    RelevanceTrace trace;
    trace.target_class = acts.winning_class;
    trace.target_score = acts.winning_score();
    trace.relevance.resize(model.depth() + 1);
    trace.relevance.back() = initial_relevance(acts);

    const std::size_t first = model.first_parameterized();
    PropagationStats stats;
    for (std::size_t i = model.depth(); i-- > 0;) {
        const Layer& layer = model.layers()[i];
        const Rule& rule = rules.rules[i];
        const Tensor& a = acts.activations[i];
        const Tensor& r_out = trace.relevance[i + 1];
        try {
            Tensor preliminary = propagate_layer(layer, rule, a, r_out, {}, &stats);
            if (!is_parameterized(layer) || i <= first) {
                trace.relevance[i] = std::move(preliminary);
            } else {
                auto [pos, neg] = split_signs(preliminary);
                const ThresholdResult t_pos = select_threshold(pos, config, i, false);
                const ThresholdResult t_neg = select_threshold(neg, config, i, true);
                const Mask keep_pos = t_pos.keep_mask(pos.size());
                const Mask keep_neg = t_neg.keep_mask(neg.size());

                LayerPruning record{i,
                                    t_pos.threshold,
                                    t_neg.threshold,
                                    t_pos.implied_p,
                                    t_neg.implied_p,
                                    t_pos.pruned.size() + t_neg.pruned.size(),
                                    0};
                Tensor pruned(a.shape);
                if (config.variant == Variant::Lambda) {
                    const std::vector<double> kept_pos = prune_lambda(pos.data, keep_pos);
                    const std::vector<double> kept_neg = prune_lambda(neg.data, keep_neg);
                    for (std::size_t j = 0; j < pruned.size(); ++j) pruned[j] = kept_pos[j] - kept_neg[j];
                } else {
                    // A neuron is nonzero in at most one sign channel, so the
                    // union of the per-sign keep sets is their intersection
                    // as "not pruned" masks.
                    Mask keep(a.size());
                    for (std::size_t j = 0; j < keep.size(); ++j) keep[j] = keep_pos[j] && keep_neg[j];
                    PropagationStats layer_stats;
                    pruned.data = propagate_pruned_matrix(layer, a.shape, a.data, r_out.data, keep, rule,
                                                          config.fallback_epsilon, &layer_stats);
                    record.undeliverable_columns = layer_stats.stabilized_columns;
                }
                trace.pruning.push_back(record);
                trace.relevance[i] = std::move(pruned);
            }
        } catch (const NumericalError& e) {
            throw NumericalError("layer " + std::to_string(i) + ": " + e.what());
        }
        if (!trace.relevance[i].all_finite())
            throw NumericalError("layer " + std::to_string(i) + " produced non-finite relevance");
    }
    trace.stabilized_columns = stats.stabilized_columns;
    return trace;
}

}  // namespace plrp
