#include "plrp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "plrp/errors.hpp"
#include "plrp/forward.hpp"
#include "plrp/random.hpp"

namespace plrp {

double gini(std::span<const double> r) {
    std::vector<double> v(r.size());
    std::transform(r.begin(), r.end(), v.begin(), [](double x) { return std::abs(x); });
    std::sort(v.begin(), v.end());
    const double total = std::accumulate(v.begin(), v.end(), 0.0);
    if (total == 0.0) return 0.0;
    const double n = static_cast<double>(v.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) acc += (2.0 * static_cast<double>(k + 1) - n - 1.0) * v[k];
    return std::clamp(acc / (n * total), 0.0, 1.0);
}

double entropy(std::span<const double> r) {
    double total = 0.0;
    for (double x : r) total += std::abs(x);
    if (total == 0.0) return 0.0;
    double h = 0.0;
    for (double x : r) {
        const double q = std::abs(x) / total;
        if (q > 0.0) h -= q * std::log(q);
    }
    return std::max(h, 0.0);
}

bool all_zero(std::span<const double> r) {
    return std::all_of(r.begin(), r.end(), [](double x) { return x == 0.0; });
}

std::optional<double> relevance_mass_accuracy(std::span<const double> r, const Mask& mask) {
    if (mask.size() != r.size()) throw ShapeError("mask size does not match relevance");
    double inside = 0.0, total = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r[i] <= 0.0) continue;
        total += r[i];
        if (mask[i]) inside += r[i];
    }
    if (total == 0.0) return std::nullopt;
    return inside / total;
}

double lipschitz_estimate(const Explainer& explainer, const Tensor& x, double epsilon, std::size_t n_samples,
                          std::uint64_t seed) {
    if (!(epsilon > 0.0)) throw ConfigError("Lipschitz radius epsilon must be > 0");
    if (n_samples == 0) throw ConfigError("Lipschitz estimate needs at least one sample");
    const Tensor ex = explainer(x);
    Rng rng(seed);
    const double d = static_cast<double>(x.size());
    double best = 0.0;
    for (std::size_t s = 0; s < n_samples; ++s) {
        Tensor xp = x;
        double dist = 0.0;
        while (dist == 0.0) {
            std::vector<double> dir(x.size());
            double norm = 0.0;
            for (double& v : dir) {
                v = rng.normal();
                norm += v * v;
            }
            norm = std::sqrt(norm);
            if (norm == 0.0) continue;
            const double radius = epsilon * std::pow(rng.uniform(), 1.0 / d);
            for (std::size_t i = 0; i < x.size(); ++i) xp[i] = x[i] + radius * dir[i] / norm;
            dist = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) dist += (xp[i] - x[i]) * (xp[i] - x[i]);
            dist = std::sqrt(dist);
        }
        const Tensor exp = explainer(xp);
        if (exp.size() != ex.size()) throw ShapeError("explainer changed output size between samples");
        double diff = 0.0;
        for (std::size_t i = 0; i < ex.size(); ++i) diff += (ex[i] - exp[i]) * (ex[i] - exp[i]);
        best = std::max(best, std::sqrt(diff) / dist);
    }
    return best;
}

double trapezoid_auc(std::span<const FlipPoint> curve) {
    if (curve.size() < 2) return curve.empty() ? 0.0 : curve.front().score;
    double area = 0.0;
    for (std::size_t i = 1; i < curve.size(); ++i)
        area += 0.5 * (curve[i].score + curve[i - 1].score) * (curve[i].fraction - curve[i - 1].fraction);
    return area;
}

std::optional<FlipResult> pixel_flip(const Model& model, const Tensor& x, const Tensor& relevance,
                                     const FlipOptions& options, const Tensor& replacement) {
    if (relevance.size() != x.size() || replacement.size() != x.size())
        throw ShapeError("pixel flipping needs relevance and replacement shaped like the input");
    const ActivationTrace base = forward(model, x);
    const std::size_t target = base.winning_class;
    const double score0 = base.winning_score();
    if (!(score0 > 0.0)) return std::nullopt;

    // Group features into perturbation units: square spatial patches across
    // all channels for CxHxW inputs, single features otherwise.
    std::vector<std::vector<std::size_t>> units;
    if (x.shape.size() == 3 && options.patch_size > 0) {
        const std::size_t c = x.shape[0], h = x.shape[1], w = x.shape[2], ps = options.patch_size;
        for (std::size_t py = 0; py < h; py += ps)
            for (std::size_t px = 0; px < w; px += ps) {
                std::vector<std::size_t> unit;
                for (std::size_t ch = 0; ch < c; ++ch)
                    for (std::size_t y = py; y < std::min(h, py + ps); ++y)
                        for (std::size_t xx = px; xx < std::min(w, px + ps); ++xx) unit.push_back((ch * h + y) * w + xx);
                units.push_back(std::move(unit));
            }
    } else {
        for (std::size_t i = 0; i < x.size(); ++i) units.push_back({i});
    }
    std::vector<double> unit_relevance(units.size(), 0.0);
    for (std::size_t u = 0; u < units.size(); ++u)
        for (std::size_t i : units[u]) unit_relevance[u] += relevance[i];
    std::vector<std::size_t> order(units.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return unit_relevance[a] > unit_relevance[b]; });

    FlipResult result;
    result.curve.push_back({0.0, 1.0});
    if (options.steps == 0) {
        result.auc = 1.0;
        return result;
    }
    Tensor perturbed = x;
    std::size_t done = 0;
    const double n_units = static_cast<double>(units.size());
    for (std::size_t t = 1; t <= options.steps; ++t) {
        const auto upto = static_cast<std::size_t>(
            std::llround(static_cast<double>(t) * n_units / static_cast<double>(options.steps)));
        for (; done < upto; ++done)
            for (std::size_t i : units[order[done]]) perturbed[i] = replacement[i];
        const Tensor scores = predict(model, perturbed);
        result.curve.push_back({static_cast<double>(t) / static_cast<double>(options.steps), scores[target] / score0});
    }
    result.auc = trapezoid_auc(result.curve);
    return result;
}

}  // namespace plrp
