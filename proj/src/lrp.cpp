#include "plrp/lrp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "overloaded.hpp"
#include "plrp/errors.hpp"
#include "plrp/linear.hpp"

namespace plrp {

using detail::overloaded;

namespace {

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double signed_offset(double z, double eps) { return z >= 0.0 ? z + eps : z - eps; }

// s_k = r_k / den_k, with zero denominators handled per `options`.
std::vector<double> scaled_upstream(std::span<const double> den, std::span<const double> r_out,
                                    const PropagationOptions& options, PropagationStats* stats) {
    std::vector<double> s(den.size(), 0.0);
    const double scale = std::max(max_abs(den), 1.0);
    for (std::size_t k = 0; k < den.size(); ++k) {
        if (r_out[k] == 0.0) continue;
        double d = den[k];
        if (d == 0.0) {
            if (options.on_zero == ZeroDenominator::Throw) {
                throw NumericalError("zero LRP-0 denominator at output " + std::to_string(k) +
                                     " with non-zero relevance; use LRP-epsilon for this layer");
            }
            d = options.fallback_epsilon * scale;
            if (stats) ++stats->stabilized_columns;
        }
        s[k] = r_out[k] / d;
    }
    return s;
}

std::vector<double> propagate_proportional_rule(const Layer& layer, const Shape& in_shape,
                                                std::span<const double> acts, std::span<const double> r_out,
                                                std::span<const double> den, const PropagationOptions& options,
                                                PropagationStats* stats) {
    const std::vector<double> s = scaled_upstream(den, r_out, options, stats);
    std::vector<double> c = linear_transpose(layer, in_shape, s);
    for (std::size_t j = 0; j < c.size(); ++j) c[j] = acts[j] == 0.0 ? 0.0 : acts[j] * c[j];
    return c;
}

std::vector<double> propagate_zbox(const Layer& layer, const Shape& in_shape, const ZBox& box,
                                   std::span<const double> acts, std::span<const double> r_out,
                                   PropagationStats* stats) {
    if (!(box.low < box.high))
        throw ConfigError("z^B bounds must satisfy low < high (got " + std::to_string(box.low) + ", " +
                          std::to_string(box.high) + ")");
    for (double x : acts)
        if (x < box.low || x > box.high)
            throw ConfigError("input value " + std::to_string(x) + " outside z^B bounds [" +
                              std::to_string(box.low) + ", " + std::to_string(box.high) + "]");

    const Layer pos = map_weights(layer, [](double w) { return w > 0.0 ? w : 0.0; });
    const Layer neg = map_weights(layer, [](double w) { return w < 0.0 ? w : 0.0; });
    const std::vector<double> lows(acts.size(), box.low);
    const std::vector<double> highs(acts.size(), box.high);

    std::vector<double> den = linear_forward(layer, in_shape, acts);
    const std::vector<double> zl = linear_forward(pos, in_shape, lows);
    const std::vector<double> zh = linear_forward(neg, in_shape, highs);
    for (std::size_t k = 0; k < den.size(); ++k) den[k] -= zl[k] + zh[k];

    // Every summand is non-negative, so a zero denominator means every
    // numerator is zero as well; stabilizing just drops that column.
    const std::vector<double> s =
        scaled_upstream(den, r_out, PropagationOptions{ZeroDenominator::Stabilize, 1e-9}, stats);
    const std::vector<double> cx = linear_transpose(layer, in_shape, s);
    const std::vector<double> cl = linear_transpose(pos, in_shape, s);
    const std::vector<double> ch = linear_transpose(neg, in_shape, s);
    std::vector<double> r(acts.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = acts[i] * cx[i] - box.low * cl[i] - box.high * ch[i];
    return r;
}

}  // namespace

std::string describe(const Rule& rule) {
    return std::visit(overloaded{
                          [](const Lrp0&) { return std::string("lrp0"); },
                          [](const LrpEpsilon& r) {
                              std::ostringstream os;
                              os << "epsilon(" << r.epsilon << (r.relative ? ", relative)" : ")");
                              return os.str();
                          },
                          [](const LrpGamma& r) {
                              std::ostringstream os;
                              os << "gamma(" << r.gamma << ")";
                              return os.str();
                          },
                          [](const ZBox& r) {
                              std::ostringstream os;
                              os << "zbox(" << r.low << ", " << r.high << ")";
                              return os.str();
                          },
                          [](const WinnerTakeAll&) { return std::string("winner-take-all"); },
                          [](const Proportional&) { return std::string("proportional"); },
                          [](const PassThrough&) { return std::string("pass-through"); },
                      },
                      rule);
}

void RuleAssignment::validate(const Model& model) const {
    if (rules.size() != model.depth())
        throw ConfigError("rule assignment has " + std::to_string(rules.size()) + " rules for " +
                          std::to_string(model.depth()) + " layers");
    for (std::size_t i = 0; i < rules.size(); ++i) {
        const Layer& layer = model.layers()[i];
        const Rule& rule = rules[i];
        bool ok = false;
        if (is_parameterized(layer)) {
            ok = std::holds_alternative<Lrp0>(rule) || std::holds_alternative<LrpEpsilon>(rule) ||
                 std::holds_alternative<LrpGamma>(rule) || std::holds_alternative<ZBox>(rule);
            if (const auto* e = std::get_if<LrpEpsilon>(&rule); e && !(e->epsilon > 0.0))
                throw ConfigError("layer " + std::to_string(i) + ": epsilon must be > 0");
            if (const auto* g = std::get_if<LrpGamma>(&rule); g && !(g->gamma >= 0.0))
                throw ConfigError("layer " + std::to_string(i) + ": gamma must be >= 0");
        } else if (std::holds_alternative<MaxPool2D>(layer)) {
            ok = std::holds_alternative<WinnerTakeAll>(rule) || std::holds_alternative<Proportional>(rule);
        } else {
            ok = std::holds_alternative<PassThrough>(rule);
        }
        if (!ok)
            throw ConfigError("rule " + describe(rule) + " cannot be applied to layer " + std::to_string(i) + " (" +
                              std::string(kind_name(layer)) + ")");
    }
}

RuleAssignment default_composite(const Model& model, const CompositeOptions& options) {
    RuleAssignment out;
    const std::size_t first = model.first_parameterized();
    for (std::size_t i = 0; i < model.depth(); ++i) {
        const Layer& layer = model.layers()[i];
        if (i == first) {
            out.rules.emplace_back(ZBox{options.low, options.high});
        } else if (std::holds_alternative<Conv2D>(layer)) {
            out.rules.emplace_back(LrpGamma{options.gamma});
        } else if (std::holds_alternative<Dense>(layer)) {
            out.rules.emplace_back(LrpEpsilon{options.epsilon, true});
        } else if (std::holds_alternative<MaxPool2D>(layer)) {
            out.rules.emplace_back(WinnerTakeAll{});
        } else {
            out.rules.emplace_back(PassThrough{});
        }
    }
    return out;
}

RuleAssignment uniform_rule(const Model& model, const Rule& linear_rule) {
    RuleAssignment out;
    for (const auto& layer : model.layers()) {
        if (is_parameterized(layer))
            out.rules.push_back(linear_rule);
        else if (std::holds_alternative<MaxPool2D>(layer))
            out.rules.emplace_back(WinnerTakeAll{});
        else
            out.rules.emplace_back(PassThrough{});
    }
    return out;
}

std::vector<double> propagate_linear(const Layer& layer, const Shape& in_shape, const Rule& rule,
                                     std::span<const double> acts, std::span<const double> r_out,
                                     const PropagationOptions& options, PropagationStats* stats) {
    return std::visit(
        overloaded{
            [&](const Lrp0&) {
                const std::vector<double> z = linear_forward(layer, in_shape, acts);
                return propagate_proportional_rule(layer, in_shape, acts, r_out, z, options, stats);
            },
            [&](const LrpEpsilon& e) {
                if (!(e.epsilon > 0.0)) throw ConfigError("LRP-epsilon needs epsilon > 0");
                std::vector<double> z = linear_forward(layer, in_shape, acts);
                const double eps = e.relative ? e.epsilon * std::max(max_abs(z), 1e-300) : e.epsilon;
                for (double& zk : z) zk = signed_offset(zk, eps);
                return propagate_proportional_rule(layer, in_shape, acts, r_out, z, options, stats);
            },
            [&](const LrpGamma& g) {
                if (!(g.gamma >= 0.0)) throw ConfigError("LRP-gamma needs gamma >= 0");
                const double gamma = g.gamma;
                const Layer boosted = map_weights(layer, [gamma](double w) { return w > 0.0 ? w + gamma * w : w; });
                const std::vector<double> z = linear_forward(boosted, in_shape, acts);
                PropagationOptions stabilized = options;
                stabilized.on_zero = ZeroDenominator::Stabilize;
                return propagate_proportional_rule(boosted, in_shape, acts, r_out, z, stabilized, stats);
            },
            [&](const ZBox& box) { return propagate_zbox(layer, in_shape, box, acts, r_out, stats); },
            [&](const auto&) -> std::vector<double> {
                throw ConfigError("rule " + describe(rule) + " does not apply to a parameterized layer");
            },
        },
        rule);
}

Tensor propagate_pool(PoolKind kind, const MaxPool2D& p, const Tensor& acts, const Tensor& r_out) {
    const Shape out_shape = output_shape(Layer{p}, acts.shape);
    if (r_out.shape != out_shape)
        throw ShapeError("pool relevance " + shape_to_string(r_out.shape) + " does not match pooled shape " +
                         shape_to_string(out_shape));
    Tensor r_in(acts.shape);
    const std::size_t channels = acts.shape[0], h = acts.shape[1], w = acts.shape[2];
    const std::size_t oh = out_shape[1], ow = out_shape[2];
    std::vector<std::size_t> window;
    for (std::size_t c = 0; c < channels; ++c)
        for (std::size_t oy = 0; oy < oh; ++oy)
            for (std::size_t ox = 0; ox < ow; ++ox) {
                const double r = r_out[(c * oh + oy) * ow + ox];
                if (r == 0.0) continue;
                window.clear();
                for (std::size_t ky = 0; ky < p.window_h; ++ky)
                    for (std::size_t kx = 0; kx < p.window_w; ++kx)
                        window.push_back((c * h + oy * p.stride_h + ky) * w + ox * p.stride_w + kx);
                if (kind == PoolKind::Max) {
                    double best = acts[window.front()];
                    for (std::size_t i : window) best = std::max(best, acts[i]);
                    std::size_t ties = 0;
                    for (std::size_t i : window) ties += acts[i] == best;
                    for (std::size_t i : window)
                        if (acts[i] == best) r_in[i] += r / static_cast<double>(ties);
                } else {
                    double total = 0.0;
                    for (std::size_t i : window) total += acts[i];
                    for (std::size_t i : window)
                        r_in[i] += total != 0.0 ? r * acts[i] / total : r / static_cast<double>(window.size());
                }
            }
    return r_in;
}

Tensor propagate_layer(const Layer& layer, const Rule& rule, const Tensor& acts, const Tensor& r_out,
                       const PropagationOptions& options, PropagationStats* stats) {
    if (is_parameterized(layer))
        return Tensor(acts.shape, propagate_linear(layer, acts.shape, rule, acts.data, r_out.data, options, stats));
    if (const auto* pool = std::get_if<MaxPool2D>(&layer)) {
        if (std::holds_alternative<Proportional>(rule)) return propagate_pool(PoolKind::Average, *pool, acts, r_out);
        if (std::holds_alternative<WinnerTakeAll>(rule)) return propagate_pool(PoolKind::Max, *pool, acts, r_out);
        throw ConfigError("pooling layers need a winner-take-all or proportional rule");
    }
    if (r_out.size() != acts.size()) throw ShapeError("pass-through relevance size mismatch");
    return Tensor(acts.shape, r_out.data);
}

std::vector<double> propagate_dense_lrp0(const Dense& layer, std::span<const double> acts,
                                         std::span<const double> r_out) {
    return propagate_linear(Layer{layer}, {layer.in}, Lrp0{}, acts, r_out);
}

std::vector<double> propagate_dense_eps(const Dense& layer, std::span<const double> acts,
                                        std::span<const double> r_out, double epsilon) {
    return propagate_linear(Layer{layer}, {layer.in}, LrpEpsilon{epsilon, false}, acts, r_out);
}

std::vector<double> propagate_dense_gamma(const Dense& layer, std::span<const double> acts,
                                          std::span<const double> r_out, double gamma) {
    return propagate_linear(Layer{layer}, {layer.in}, LrpGamma{gamma}, acts, r_out);
}

std::vector<double> propagate_input_zb(const Dense& layer, std::span<const double> acts,
                                       std::span<const double> r_out, double low, double high) {
    return propagate_linear(Layer{layer}, {layer.in}, ZBox{low, high}, acts, r_out);
}

std::vector<double> lrp0_matrix(const Dense& layer, std::span<const double> acts) {
    if (layer.in > 64 || layer.out > 64) throw ConfigError("explicit LRP matrix is limited to 64x64 layers");
    if (acts.size() != layer.in) throw ShapeError("activation size does not match Dense input");
    std::vector<double> z(layer.out, 0.0);
    for (std::size_t j = 0; j < layer.in; ++j)
        for (std::size_t k = 0; k < layer.out; ++k) z[k] += acts[j] * layer.w(j, k);
    std::vector<double> m(layer.in * layer.out, 0.0);
    for (std::size_t j = 0; j < layer.in; ++j)
        for (std::size_t k = 0; k < layer.out; ++k)
            if (z[k] != 0.0) m[j * layer.out + k] = acts[j] * layer.w(j, k) / z[k];
    return m;
}

Tensor initial_relevance(const ActivationTrace& acts) {
    Tensor r(acts.scores().shape);
    r[acts.winning_class] = acts.winning_score();
    return r;
}

RelevanceTrace explain_lrp(const Model& model, const Tensor& input, const RuleAssignment& rules) {
    return explain_lrp(model, forward(model, input), rules);
}

RelevanceTrace explain_lrp(const Model& model, const ActivationTrace& acts, const RuleAssignment& rules) {
    rules.validate(model);
    RelevanceTrace trace;
    trace.target_class = acts.winning_class;
    trace.target_score = acts.winning_score();
    trace.relevance.resize(model.depth() + 1);
    trace.relevance.back() = initial_relevance(acts);
    PropagationStats stats;
    for (std::size_t i = model.depth(); i-- > 0;) {
        try {
            trace.relevance[i] = propagate_layer(model.layers()[i], rules.rules[i], acts.activations[i],
                                                 trace.relevance[i + 1], {}, &stats);
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
