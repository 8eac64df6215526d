#include <doctest.h>

#include <cmath>

#include "plrp/errors.hpp"
#include "plrp/forward.hpp"
#include "plrp/metrics.hpp"
#include "plrp/presets.hpp"
#include "support.hpp"

using namespace plrp;
using namespace plrp::testing;

namespace {

// Gini as relative mean absolute difference: sum_ij |x_i - x_j| / (2 n^2 mean).
double gini_mad(const std::vector<double>& r) {
    const double n = static_cast<double>(r.size());
    double diff = 0.0, total = 0.0;
    for (double a : r) {
        total += std::abs(a);
        for (double b : r) diff += std::abs(std::abs(a) - std::abs(b));
    }
    return total == 0.0 ? 0.0 : diff / (2.0 * n * total);
}

}  // namespace

TEST_CASE("gini worked examples") {
    CHECK(gini(std::vector<double>{0, 0, 0, 1}) == doctest::Approx(0.75));
    CHECK(gini(std::vector<double>{1, 3}) == doctest::Approx(0.25));
    CHECK(gini(std::vector<double>{2, 2, 2}) == doctest::Approx(0.0));
    CHECK(gini(std::vector<double>{0, 0}) == 0.0);
    CHECK(gini(std::vector<double>{-1, 0, 0, 0}) == doctest::Approx(0.75));
}

TEST_CASE("gini matches the mean absolute difference") {
    Rng rng(1);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto r = random_vector(rng, 1 + rng.below(30));
        const double g = gini(r);
        CHECK(g == doctest::Approx(gini_mad(r)).epsilon(1e-9));
        CHECK(g >= 0.0);
        CHECK(g <= 1.0);
    }
}

TEST_CASE("entropy") {
    CHECK(entropy(std::vector<double>{1, 1, 1, 1}) == doctest::Approx(std::log(4.0)));
    CHECK(entropy(std::vector<double>{0, 5, 0}) == doctest::Approx(0.0));
    CHECK(entropy(std::vector<double>{0, 0}) == 0.0);
    CHECK(entropy(std::vector<double>{-1, 1}) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("relevance mass accuracy") {
    CHECK(*relevance_mass_accuracy(std::vector<double>{2, 1, 1}, Mask{1, 0, 0}) == doctest::Approx(0.5));
    CHECK(*relevance_mass_accuracy(std::vector<double>{2, -5, 2}, Mask{1, 1, 0}) == doctest::Approx(0.5));
    CHECK_FALSE(relevance_mass_accuracy(std::vector<double>{-1, 0}, Mask{1, 0}).has_value());
    CHECK_THROWS_AS(relevance_mass_accuracy(std::vector<double>{1}, Mask{1, 0}), ShapeError);
}

TEST_CASE("lipschitz estimate on closed-form explainers") {
    Rng rng(3);
    const Tensor x({5}, random_vector(rng, 5));
    const Explainer constant = [](const Tensor& t) { return Tensor(t.shape, 1.0); };
    const Explainer doubling = [](const Tensor& t) {
        Tensor out = t;
        for (auto& v : out.data) v *= 2.0;
        return out;
    };
    for (double eps : {1e-3, 0.05, 2.0}) {
        CHECK(lipschitz_estimate(constant, x, eps, 3, 1) == 0.0);
        CHECK(lipschitz_estimate(doubling, x, eps, 1, 2) == doctest::Approx(2.0).epsilon(1e-9));
    }
    CHECK_THROWS_AS(lipschitz_estimate(constant, x, 0.0, 1, 1), ConfigError);
    CHECK_THROWS_AS(lipschitz_estimate(constant, x, 0.1, 0, 1), ConfigError);
}

TEST_CASE("lipschitz estimate is nondecreasing in the sample count") {
    const Explainer relu = [](const Tensor& t) {
        Tensor out = t;
        for (auto& v : out.data) v = v > 0 ? v * v : 0.0;
        return out;
    };
    Rng rng(5);
    const Tensor x({4}, random_vector(rng, 4));
    double prev = 0.0;
    for (std::size_t n = 1; n <= 20; ++n) {
        const double est = lipschitz_estimate(relu, x, 0.5, n, 9);
        CHECK(est >= prev);
        prev = est;
    }
}

TEST_CASE("perturbations stay inside the ball") {
    Rng rng(7);
    const Tensor x({6}, random_vector(rng, 6));
    double max_dist = 0.0;
    const Explainer probe = [&](const Tensor& t) {
        double d = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) d += (t[i] - x[i]) * (t[i] - x[i]);
        max_dist = std::max(max_dist, std::sqrt(d));
        return t;
    };
    lipschitz_estimate(probe, x, 0.1, 200, 3);
    CHECK(max_dist <= 0.1 + 1e-15);
    CHECK(max_dist > 0.05);
}

TEST_CASE("trapezoid auc") {
    const std::vector<FlipPoint> curve{{0, 1}, {0.5, 0.5}, {1, 0}};
    CHECK(trapezoid_auc(curve) == doctest::Approx(0.5));
}

TEST_CASE("pixel flipping") {
    // Score = sum of the inputs (no hidden layer), so flipping to zero drops
    // the score by each flipped feature.
    const Dense d{4, 2, {1, 0, 1, 0, 1, 0, 1, 0}, {0, 0}};
    const Model m({4}, 2, {d});
    const Tensor x({4}, {0.4, 0.3, 0.2, 0.1});
    const Tensor zero({4}, 0.0);

    SUBCASE("descending relevance order") {
        const auto res = pixel_flip(m, x, x, FlipOptions{4, 8}, zero);
        REQUIRE(res);
        REQUIRE(res->curve.size() == 5);
        CHECK(res->curve[1].score == doctest::Approx(0.6));
        CHECK(res->curve[2].score == doctest::Approx(0.3));
        CHECK(res->curve[4].score == doctest::Approx(0.0));
        CHECK(res->auc == doctest::Approx(trapezoid_auc(res->curve)));
    }
    SUBCASE("steps = 0") {
        const auto res = pixel_flip(m, x, x, FlipOptions{0, 8}, zero);
        REQUIRE(res);
        CHECK(res->curve.size() == 1);
        CHECK(res->auc == 1.0);
    }
    SUBCASE("step count not dividing the feature count") {
        const auto res = pixel_flip(m, x, x, FlipOptions{3, 8}, zero);
        REQUIRE(res);
        // round(4/3) = 1, round(8/3) = 3 features perturbed
        CHECK(res->curve[1].score == doctest::Approx(0.6));
        CHECK(res->curve[2].score == doctest::Approx(0.1));
    }
    SUBCASE("non-positive score") {
        CHECK_FALSE(pixel_flip(m, zero, x, FlipOptions{}, zero).has_value());
    }
}

TEST_CASE("pixel flipping uses patches on images") {
    const Model m = make_preset("shapes", {1, 16, 16}, 2, 3);
    Rng rng(8);
    const Tensor x({1, 16, 16}, random_vector(rng, 256, 0.0, 1.0));
    const Tensor r({1, 16, 16}, random_vector(rng, 256));
    const auto res = pixel_flip(m, x, r, FlipOptions{4, 8}, Tensor(x.shape, 0.5));
    if (res) {
        CHECK(res->curve.size() == 5);
        CHECK(res->curve.back().fraction == 1.0);
        // Every patch replaced: the input is the constant baseline.
        const Tensor base = predict(m, Tensor(x.shape, 0.5));
        const ActivationTrace t = forward(m, x);
        CHECK(res->curve.back().score == doctest::Approx(base[t.winning_class] / t.winning_score()));
    }
}
