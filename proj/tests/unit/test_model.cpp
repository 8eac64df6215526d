#include <doctest.h>

#include <string>

#include "plrp/errors.hpp"
#include "plrp/forward.hpp"
#include "plrp/linear.hpp"
#include "plrp/model.hpp"
#include "plrp/model_io.hpp"
#include "plrp/presets.hpp"
#include "plrp/train.hpp"
#include "support.hpp"

using namespace plrp;
using plrp::testing::random_vector;

namespace {

// Convolution written as an explicit (in x out) matrix, independent of the
// library's window enumeration.
std::vector<double> unfold(const Conv2D& c, std::size_t h, std::size_t w) {
    const std::size_t oh = (h + 2 * c.pad_h - c.kernel_h) / c.stride_h + 1;
    const std::size_t ow = (w + 2 * c.pad_w - c.kernel_w) / c.stride_w + 1;
    const std::size_t n_in = c.in_channels * h * w, n_out = c.out_channels * oh * ow;
    std::vector<double> m(n_in * n_out, 0.0);
    for (std::size_t o = 0; o < c.out_channels; ++o)
        for (std::size_t y = 0; y < oh; ++y)
            for (std::size_t x = 0; x < ow; ++x)
                for (std::size_t ch = 0; ch < c.in_channels; ++ch)
                    for (std::size_t ky = 0; ky < c.kernel_h; ++ky)
                        for (std::size_t kx = 0; kx < c.kernel_w; ++kx) {
                            const long iy = long(y * c.stride_h + ky) - long(c.pad_h);
                            const long ix = long(x * c.stride_w + kx) - long(c.pad_w);
                            if (iy < 0 || ix < 0 || iy >= long(h) || ix >= long(w)) continue;
                            const std::size_t j = (ch * h + std::size_t(iy)) * w + std::size_t(ix);
                            const std::size_t k = (o * oh + y) * ow + x;
                            m[j * n_out + k] += c.weights[c.weight_index(o, ch, ky, kx)];
                        }
    return m;
}

Model tiny_dense() {
    Dense d{2, 2, {1, 0, 1, 1}, {0, 0}};
    return Model({2}, 2, {d});
}

}  // namespace

TEST_CASE("tensor size invariant") {
    CHECK(Tensor({2, 3}).size() == 6);
    CHECK_THROWS_AS(Tensor({2, 3}, std::vector<double>(5)), ShapeError);
    CHECK(shape_to_string({1, 4, 250}) == "(1x4x250)");
}

TEST_CASE("dense forward adds bias") {
    Dense d{2, 2, {1, 0, 1, 1}, {0.5, -1}};
    const Model m({2}, 2, {d});
    const Tensor y = predict(m, Tensor({2}, {1, 1}));
    CHECK(y[0] == 2.5);
    CHECK(y[1] == 0.0);
}

TEST_CASE("model validation names the offending layer") {
    SUBCASE("shapes do not chain") {
        Dense a{3, 4, std::vector<double>(12), std::vector<double>(4)};
        Dense b{5, 2, std::vector<double>(10), std::vector<double>(2)};
        try {
            Model({3}, 2, {a, b});
            FAIL("expected ShapeError");
        } catch (const ShapeError& e) {
            CHECK(std::string(e.what()).find("layer 1") != std::string::npos);
        }
    }
    SUBCASE("wrong class count") {
        Dense a{3, 4, std::vector<double>(12), std::vector<double>(4)};
        CHECK_THROWS(Model({3}, 2, {a}));
    }
    SUBCASE("parameter size mismatch") {
        Dense a{3, 2, std::vector<double>(5), std::vector<double>(2)};
        CHECK_THROWS(Model({3}, 2, {a}));
    }
    SUBCASE("non-finite weights") {
        Dense a{1, 2, {1, std::nan("")}, {0, 0}};
        CHECK_THROWS(Model({1}, 2, {a}));
    }
}

TEST_CASE("forward rejects a mismatched input") {
    const Model m = tiny_dense();
    CHECK_THROWS_AS(forward(m, Tensor({3})), ShapeError);
    CHECK_THROWS(forward(m, Tensor({2}, {1, std::numeric_limits<double>::infinity()})));
}

TEST_CASE("argmax takes the lowest index on ties") {
    const std::vector<double> v{1, 3, 3, 2};
    CHECK(argmax(v) == 1);
}

TEST_CASE("trace records every activation") {
    const Model m = make_preset("shapes", {1, 16, 16}, 2, 3);
    Rng rng(1);
    const ActivationTrace t = forward(m, Tensor({1, 16, 16}, random_vector(rng, 256, 0, 1)));
    REQUIRE(t.activations.size() == m.depth() + 1);
    for (std::size_t i = 0; i <= m.depth(); ++i) CHECK(t.activations[i].shape == m.shapes()[i]);
    CHECK(t.winning_score() == t.scores()[t.winning_class]);
}

TEST_CASE("convolution equals its unfolded matrix") {
    Rng rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        Conv2D c;
        c.in_channels = 1 + rng.below(3);
        c.out_channels = 1 + rng.below(3);
        c.kernel_h = 1 + rng.below(3);
        c.kernel_w = 1 + rng.below(3);
        c.stride_h = 1 + rng.below(2);
        c.stride_w = 1 + rng.below(2);
        c.pad_h = rng.below(2);
        c.pad_w = rng.below(2);
        c.weights = random_vector(rng, c.out_channels * c.in_channels * c.kernel_h * c.kernel_w);
        c.bias = random_vector(rng, c.out_channels);
        const std::size_t h = 4 + rng.below(4), w = 4 + rng.below(4);
        const Shape in{c.in_channels, h, w};
        const Shape out = output_shape(c, in);
        const std::size_t n_in = shape_size(in), n_out = shape_size(out);
        const auto m = unfold(c, h, w);

        const auto a = random_vector(rng, n_in);
        const auto z = linear_forward(c, in, a);
        REQUIRE(z.size() == n_out);
        for (std::size_t k = 0; k < n_out; ++k) {
            double ref = 0.0;
            for (std::size_t j = 0; j < n_in; ++j) ref += a[j] * m[j * n_out + k];
            CHECK(z[k] == doctest::Approx(ref).epsilon(1e-12));
        }

        const auto s = random_vector(rng, n_out);
        const auto back = linear_transpose(c, in, s);
        for (std::size_t j = 0; j < n_in; ++j) {
            double ref = 0.0;
            for (std::size_t k = 0; k < n_out; ++k) ref += m[j * n_out + k] * s[k];
            CHECK(back[j] == doctest::Approx(ref).epsilon(1e-12));
        }

        const Tensor y = apply_layer(c, Tensor(in, a));
        const std::size_t plane = out[1] * out[2];
        for (std::size_t k = 0; k < n_out; ++k) CHECK(y[k] == doctest::Approx(z[k] + c.bias[k / plane]));
    }
}

TEST_CASE("max pooling and flatten") {
    const Tensor x({1, 2, 4}, {1, 5, 2, 2, 3, 0, 7, 1});
    const Tensor y = apply_layer(MaxPool2D{}, x);
    CHECK(y.shape == Shape{1, 1, 2});
    CHECK(y[0] == 5);
    CHECK(y[1] == 7);
    const Tensor f = apply_layer(Flatten{}, x);
    CHECK(f.shape == Shape{8});
    CHECK(f.data == x.data);
    CHECK_THROWS_AS(output_shape(MaxPool2D{3, 3, 3, 3}, {1, 2, 2}), ShapeError);
}

TEST_CASE("model file round trip is exact") {
    const Model m = make_preset("genome-4", {1, 4, 250}, 2, 5);
    const std::string text = model_to_string(m);
    const Model back = model_from_string(text);
    CHECK(model_to_string(back) == text);
    Rng rng(2);
    const Tensor x({1, 4, 250}, random_vector(rng, 1000, 0, 1));
    CHECK(predict(back, x) == predict(m, x));
}

TEST_CASE("model file errors") {
    CHECK_THROWS_AS(model_from_string("{\"format\": "), FormatError);
    const std::string good = model_to_string(tiny_dense());

    std::string unknown = good;
    unknown.replace(unknown.find("\"Dense\""), 7, "\"LSTM\"");
    try {
        model_from_string(unknown);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("/layers/0/kind") != std::string::npos);
    }

    std::string version = good;
    version.replace(version.find("\"formatVersion\": 1"), 18, "\"formatVersion\": 9");
    CHECK_THROWS_AS(model_from_string(version), FormatError);
}

TEST_CASE("presets") {
    const Model g4 = make_preset("genome-4", {1, 4, 250}, 2, 1);
    const Model g32 = make_preset("genome-32", {1, 4, 250}, 2, 1);
    CHECK(g32.parameter_count() > g4.parameter_count());
    CHECK(g4.first_parameterized() == 0);
    CHECK_THROWS_AS(make_preset("resnet", {1, 4, 250}, 2, 1), ConfigError);
    CHECK_THROWS_AS(make_preset("shapes", {1, 4, 250}, 2, 1), ConfigError);
    CHECK(model_to_string(make_preset("shapes", {1, 32, 32}, 2, 9)) ==
          model_to_string(make_preset("shapes", {1, 32, 32}, 2, 9)));
}
