#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "plrp/dataset.hpp"
#include "plrp/lrp.hpp"
#include "plrp/metrics.hpp"
#include "plrp/plrp.hpp"

namespace plrp {

/// An explanation method with its pruning parameter fixed.
struct Method {
    std::string name = "lrp";  // lrp | plrp-lambda | plrp-m
    std::optional<PruningConfig> pruning;

    std::string variant_label() const;  // none | lambda | matrix
    std::string mode_label() const;     // none | fixed | gain
    double parameter() const;           // p, min_gain, or 0 for lrp
};

Method lrp_method();
Method plrp_method(Variant variant, ThresholdMode mode, double p_or_min_gain);

/// Parses "lrp", "plrp-lambda" or "plrp-m" with a mode ("fixed" | "gain").
Method parse_method(const std::string& name, const std::string& mode, double p_or_min_gain);

RelevanceTrace explain(const Model& model, const Tensor& input, const RuleAssignment& rules, const Method& method);

/// Input-attribution function for robustness estimates.
Explainer make_explainer(const Model& model, const RuleAssignment& rules, const Method& method);

struct MetricSelection {
    bool gini = true;
    bool entropy = true;
    bool rma = true;
    bool lipschitz = false;
    bool faithfulness = false;
};

/// Parses a comma-separated subset of gini,entropy,rma,lipschitz,faith.
MetricSelection parse_metrics(const std::string& list);

struct EvalOptions {
    MetricSelection metrics;
    /// Discrete inputs (one-hot sequences) skip robustness and faithfulness.
    bool continuous_domain = true;
    double lipschitz_epsilon = 0.05;
    std::size_t lipschitz_samples = 10;
    FlipOptions flip;
    /// Replacement value for pixel flipping (dataset mean by default).
    double flip_baseline = 0.0;
    std::uint64_t seed = 0;
};

MetricsReport evaluate_sample(const Model& model, const Sample& sample, std::size_t sample_index,
                              const RuleAssignment& rules, const Method& method, const EvalOptions& options);

/// Evenly spaced grid start, start + step, ... <= end (rounded to 1e-9).
std::vector<double> p_grid(double start, double end, double step);

struct SweepSpec {
    /// Methods by name and mode; "lrp" contributes a single baseline row.
    std::vector<std::pair<std::string, std::string>> methods;
    std::vector<double> p_values = p_grid(0.0, 0.95, 0.05);
    std::vector<double> min_gains{1.0};
};

/// Concrete methods of a sweep in output order.
std::vector<Method> expand_methods(const SweepSpec& spec);

struct SweepRow {
    std::string sample_id;
    Method method;
    std::optional<MetricsReport> report;  // empty when the sample failed
    std::string error;
};

/// Rows ordered by sample, then method as listed by expand_methods. Samples
/// run on `threads` workers; output does not depend on the thread count.
std::vector<SweepRow> run_sweep(const Model& model, const Dataset& data, const RuleAssignment& rules,
                                const SweepSpec& spec, const EvalOptions& options, std::size_t threads = 1);

/// Metrics CSV: one row per SweepRow plus one "median" row per method.
void write_metrics_csv(std::ostream& out, const std::vector<SweepRow>& rows);

/// Long-format flip curves: sampleId,method,p,fraction,score.
void write_flip_csv(std::ostream& out, const std::vector<SweepRow>& rows);

/// Shortest round-trip decimal text of v.
std::string format_number(double v);

double median(std::vector<double> values);

}  // namespace plrp
