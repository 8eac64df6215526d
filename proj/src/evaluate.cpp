#include "plrp/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "plrp/errors.hpp"
#include "plrp/random.hpp"

namespace plrp {

std::string Method::variant_label() const {
    if (!pruning) return "none";
    return pruning->variant == Variant::Lambda ? "lambda" : "matrix";
}

std::string Method::mode_label() const {
    if (!pruning) return "none";
    return pruning->mode == ThresholdMode::FixedProportion ? "fixed" : "gain";
}

double Method::parameter() const {
    if (!pruning) return 0.0;
    return pruning->mode == ThresholdMode::FixedProportion ? pruning->p : pruning->min_gain;
}

Method lrp_method() { return Method{}; }

Method plrp_method(Variant variant, ThresholdMode mode, double p_or_min_gain) {
    PruningConfig cfg;
    cfg.variant = variant;
    cfg.mode = mode;
    if (mode == ThresholdMode::FixedProportion)
        cfg.p = p_or_min_gain;
    else
        cfg.min_gain = p_or_min_gain;
    cfg.validate();
    return Method{variant == Variant::Lambda ? "plrp-lambda" : "plrp-m", cfg};
}

Method parse_method(const std::string& name, const std::string& mode, double p_or_min_gain) {
    if (name == "lrp") return lrp_method();
    Variant variant;
    if (name == "plrp-lambda")
        variant = Variant::Lambda;
    else if (name == "plrp-m")
        variant = Variant::Matrix;
    else
        throw ConfigError("unknown method '" + name + "' (expected lrp, plrp-lambda or plrp-m)");
    if (mode == "fixed") return plrp_method(variant, ThresholdMode::FixedProportion, p_or_min_gain);
    if (mode == "gain") return plrp_method(variant, ThresholdMode::SparsityGain, p_or_min_gain);
    throw ConfigError("unknown mode '" + mode + "' (expected fixed or gain)");
}

RelevanceTrace explain(const Model& model, const Tensor& input, const RuleAssignment& rules, const Method& method) {
    if (method.pruning) return explain_plrp(model, input, rules, *method.pruning);
    return explain_lrp(model, input, rules);
}

Explainer make_explainer(const Model& model, const RuleAssignment& rules, const Method& method) {
    return [&model, rules, method](const Tensor& x) { return explain(model, x, rules, method).input_relevance(); };
}

MetricSelection parse_metrics(const std::string& list) {
    MetricSelection m{false, false, false, false, false};
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "gini")
            m.gini = true;
        else if (item == "entropy")
            m.entropy = true;
        else if (item == "rma")
            m.rma = true;
        else if (item == "lipschitz")
            m.lipschitz = true;
        else if (item == "faith")
            m.faithfulness = true;
        else if (!item.empty())
            throw ConfigError("unknown metric '" + item + "'");
    }
    return m;
}

MetricsReport evaluate_sample(const Model& model, const Sample& sample, std::size_t sample_index,
                              const RuleAssignment& rules, const Method& method, const EvalOptions& options) {
    const RelevanceTrace trace = explain(model, sample.input, rules, method);
    const Tensor& r = trace.input_relevance();
    MetricsReport report;
    if (all_zero(r.data)) report.warnings.emplace_back("all-zero attribution; sparsity metrics set to 0");
    if (options.metrics.gini) report.gini = gini(r.data);
    if (options.metrics.entropy) report.entropy = entropy(r.data);
    if (options.metrics.rma) {
        if (!sample.has_mask()) {
            report.warnings.emplace_back("rma skipped: sample has no ground-truth mask");
        } else {
            report.rma = relevance_mass_accuracy(r.data, sample.mask);
            if (!report.rma) report.warnings.emplace_back("rma undefined: no positive relevance");
        }
    }
    if (options.metrics.lipschitz) {
        if (!options.continuous_domain) {
            report.warnings.emplace_back("lipschitz skipped: discrete input domain");
        } else {
            report.lipschitz = lipschitz_estimate(make_explainer(model, rules, method), sample.input,
                                                  options.lipschitz_epsilon, options.lipschitz_samples,
                                                  derive_seed(options.seed, sample_index));
        }
    }
    if (options.metrics.faithfulness) {
        if (!options.continuous_domain) {
            report.warnings.emplace_back("faithfulness skipped: discrete input domain");
        } else {
            const Tensor replacement(sample.input.shape, options.flip_baseline);
            if (auto flip = pixel_flip(model, sample.input, r, options.flip, replacement)) {
                report.faith_auc = flip->auc;
                report.flip_curve = std::move(flip->curve);
            } else {
                report.warnings.emplace_back("faithfulness undefined: non-positive prediction score");
            }
        }
    }
    return report;
}

std::vector<double> p_grid(double start, double end, double step) {
    if (!(step > 0.0)) throw ConfigError("p step must be positive");
    std::vector<double> out;
    for (std::size_t i = 0;; ++i) {
        const double v = std::round((start + static_cast<double>(i) * step) * 1e9) / 1e9;
        if (v > end + 1e-12) break;
        out.push_back(v);
    }
    return out;
}

std::vector<Method> expand_methods(const SweepSpec& spec) {
    if (spec.methods.empty()) throw ConfigError("sweep needs at least one method");
    std::vector<Method> out;
    for (const auto& [name, mode] : spec.methods) {
        if (name == "lrp") {
            out.push_back(lrp_method());
            continue;
        }
        const auto& params = mode == "gain" ? spec.min_gains : spec.p_values;
        for (double v : params) out.push_back(parse_method(name, mode, v));
    }
    return out;
}

std::vector<SweepRow> run_sweep(const Model& model, const Dataset& data, const RuleAssignment& rules,
                                const SweepSpec& spec, const EvalOptions& options, std::size_t threads) {
    const std::vector<Method> methods = expand_methods(spec);
    std::vector<SweepRow> rows(data.size() * methods.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t s = next++; s < data.size(); s = next++) {
            for (std::size_t m = 0; m < methods.size(); ++m) {
                SweepRow& row = rows[s * methods.size() + m];
                row.sample_id = data[s].id;
                row.method = methods[m];
                try {
                    row.report = evaluate_sample(model, data[s], s, rules, methods[m], options);
                } catch (const Error& e) {
                    row.error = e.what();
                }
            }
        }
    };
    threads = std::max<std::size_t>(1, std::min(threads, data.size()));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    return rows;
}

std::string format_number(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

double median(std::vector<double> values) {
    if (values.empty()) return std::nan("");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

std::string optional_field(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

}  // namespace

void write_metrics_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "sampleId,method,variant,mode,param,gini,entropy,rma,lipschitz,faithAUC\n";
    struct Summary {
        Method method;
        std::vector<double> gini, entropy, rma, lipschitz, auc;
    };
    std::vector<Summary> summaries;
    std::map<std::pair<std::string, double>, std::size_t> slot;  // (method/mode, param) -> summary
    for (const auto& row : rows) {
        const Method& m = row.method;
        out << row.sample_id << ',' << m.name << ',' << m.variant_label() << ',' << m.mode_label() << ','
            << format_number(m.parameter()) << ',';
        const auto key = std::make_pair(m.name + "/" + m.mode_label(), m.parameter());
        auto [it, inserted] = slot.emplace(key, summaries.size());
        if (inserted) summaries.push_back({m, {}, {}, {}, {}, {}});
        Summary& sum = summaries[it->second];
        if (!row.report) {
            out << ",,,,\n";
            continue;
        }
        const MetricsReport& r = *row.report;
        out << optional_field(r.gini) << ',' << optional_field(r.entropy) << ',' << optional_field(r.rma) << ','
            << optional_field(r.lipschitz) << ',' << optional_field(r.faith_auc) << '\n';
        if (r.gini) sum.gini.push_back(*r.gini);
        if (r.entropy) sum.entropy.push_back(*r.entropy);
        if (r.rma) sum.rma.push_back(*r.rma);
        if (r.lipschitz) sum.lipschitz.push_back(*r.lipschitz);
        if (r.faith_auc) sum.auc.push_back(*r.faith_auc);
    }
    auto med = [](const std::vector<double>& v) { return v.empty() ? std::string() : format_number(median(v)); };
    for (const auto& s : summaries) {
        out << "median," << s.method.name << ',' << s.method.variant_label() << ',' << s.method.mode_label() << ','
            << format_number(s.method.parameter()) << ',' << med(s.gini) << ',' << med(s.entropy) << ','
            << med(s.rma) << ',' << med(s.lipschitz) << ',' << med(s.auc) << '\n';
    }
}

void write_flip_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "sampleId,method,p,fraction,score\n";
    for (const auto& row : rows) {
        if (!row.report) continue;
        for (const auto& pt : row.report->flip_curve)
            out << row.sample_id << ',' << row.method.name << ',' << format_number(row.method.parameter()) << ','
                << format_number(pt.fraction) << ',' << format_number(pt.score) << '\n';
    }
}

}  // namespace plrp
