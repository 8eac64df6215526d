#include <doctest.h>

#include <cmath>

#include "plrp/errors.hpp"
#include "plrp/forward.hpp"
#include "plrp/model_io.hpp"
#include "plrp/presets.hpp"
#include "plrp/train.hpp"
#include "support.hpp"

using namespace plrp;
using namespace plrp::testing;

namespace {

double cross_entropy(const Model& m, const Sample& s) {
    const Tensor z = predict(m, s.input);
    double mx = z[0];
    for (double v : z.data) mx = std::max(mx, v);
    double norm = 0.0;
    for (double v : z.data) norm += std::exp(v - mx);
    return -(z[s.label] - mx - std::log(norm));
}

std::vector<double> flat_parameters(const Model& m) {
    std::vector<double> out;
    for (const auto& l : m.layers()) {
        if (const auto* d = std::get_if<Dense>(&l)) {
            out.insert(out.end(), d->weights.begin(), d->weights.end());
            out.insert(out.end(), d->bias.begin(), d->bias.end());
        } else if (const auto* c = std::get_if<Conv2D>(&l)) {
            out.insert(out.end(), c->weights.begin(), c->weights.end());
            out.insert(out.end(), c->bias.begin(), c->bias.end());
        }
    }
    return out;
}

Model with_parameter(const Model& m, std::size_t index, double delta) {
    std::vector<Layer> layers = m.layers();
    for (auto& l : layers) {
        auto bump = [&](std::vector<double>& v) {
            if (index < v.size()) {
                v[index] += delta;
                index = SIZE_MAX / 2;
            } else if (index != SIZE_MAX / 2) {
                index -= v.size();
            }
        };
        if (auto* d = std::get_if<Dense>(&l)) {
            bump(d->weights);
            bump(d->bias);
        } else if (auto* c = std::get_if<Conv2D>(&l)) {
            bump(c->weights);
            bump(c->bias);
        }
    }
    return Model(m.input_shape(), m.num_classes(), layers);
}

}  // namespace

TEST_CASE("one full-batch step of softmax regression matches the closed-form gradient") {
    Rng rng(2);
    const Model m({3}, 2, {random_dense(rng, 3, 2)});
    Dataset data;
    for (int i = 0; i < 8; ++i) data.push_back({"s", Tensor({3}, random_vector(rng, 3)), std::size_t(i % 2), {}});

    std::vector<double> grad_w(6, 0.0), grad_b(2, 0.0);
    for (const auto& s : data) {
        const Tensor z = predict(m, s.input);
        const double e0 = std::exp(z[0]), e1 = std::exp(z[1]);
        const double p[2] = {e0 / (e0 + e1), e1 / (e0 + e1)};
        for (std::size_t k = 0; k < 2; ++k) {
            const double delta = p[k] - (s.label == k ? 1.0 : 0.0);
            grad_b[k] += delta / 8.0;
            for (std::size_t j = 0; j < 3; ++j) grad_w[j * 2 + k] += s.input[j] * delta / 8.0;
        }
    }
    TrainOptions opt;
    opt.epochs = 1;
    opt.batch_size = 8;
    opt.learning_rate = 0.5;
    const Model trained = train_sgd(m, data, opt);
    const auto& before = std::get<Dense>(m.layers()[0]);
    const auto& after = std::get<Dense>(trained.layers()[0]);
    for (std::size_t i = 0; i < 6; ++i)
        CHECK(after.weights[i] == doctest::Approx(before.weights[i] - 0.5 * grad_w[i]).epsilon(1e-12));
    for (std::size_t k = 0; k < 2; ++k)
        CHECK(after.bias[k] == doctest::Approx(before.bias[k] - 0.5 * grad_b[k]).epsilon(1e-12));
}

TEST_CASE("backpropagation through conv, pool and dense matches finite differences") {
    std::vector<Layer> layers{make_conv(1, 2, 3, 3, 1, 1), ReLU{}, MaxPool2D{}, Flatten{}, make_dense(2 * 3 * 3, 4),
                              ReLU{}, make_dense(4, 3)};
    const Model m = initialize(Model({1, 6, 6}, 3, layers), 5);
    Rng rng(6);
    const Sample s{"x", Tensor({1, 6, 6}, random_vector(rng, 36, 0.0, 1.0)), 1, {}};

    TrainOptions opt;
    opt.epochs = 1;
    opt.batch_size = 1;
    opt.learning_rate = 1.0;
    const Model stepped = train_sgd(m, std::span(&s, 1), opt);
    const auto p0 = flat_parameters(m), p1 = flat_parameters(stepped);
    REQUIRE(p0.size() == p1.size());
    const double h = 1e-6;
    for (std::size_t i = 0; i < p0.size(); i += 3) {
        const double numeric =
            (cross_entropy(with_parameter(m, i, h), s) - cross_entropy(with_parameter(m, i, -h), s)) / (2 * h);
        CHECK(p0[i] - p1[i] == doctest::Approx(numeric).epsilon(1e-5).scale(1e-6));
    }
}

TEST_CASE("training is deterministic and zero epochs change nothing") {
    Rng rng(3);
    Dataset data;
    for (int i = 0; i < 40; ++i) {
        Tensor x({2}, random_vector(rng, 2));
        const std::size_t label = x[0] + x[1] > 0 ? 1 : 0;
        data.push_back({"s", std::move(x), label, {}});
    }
    const Model init = initialize(mlp({2, 8, 2}), 1);
    TrainOptions opt;
    opt.epochs = 30;
    opt.learning_rate = 0.2;
    opt.batch_size = 8;
    opt.seed = 4;
    const Model a = train_sgd(init, data, opt);
    const Model b = train_sgd(init, data, opt);
    CHECK(model_to_string(a) == model_to_string(b));
    CHECK(accuracy(a, data) >= 0.9);

    opt.epochs = 0;
    CHECK(model_to_string(train_sgd(init, data, opt)) == model_to_string(init));
    opt.learning_rate = 0.0;
    CHECK_THROWS_AS(train_sgd(init, data, opt), ConfigError);
}

TEST_CASE("divergence is reported") {
    Rng rng(1);
    Dataset data;
    for (int i = 0; i < 16; ++i) data.push_back({"s", Tensor({2}, random_vector(rng, 2, 1e100, 1e101)), 0, {}});
    TrainOptions opt;
    opt.epochs = 2;
    opt.learning_rate = 1e10;
    CHECK_THROWS_AS(train_sgd(initialize(mlp({2, 4, 2}), 1), data, opt), NumericalError);
}
