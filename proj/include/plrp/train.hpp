#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

#include "plrp/dataset.hpp"
#include "plrp/model.hpp"

namespace plrp {

struct EpochStats {
    std::size_t epoch = 0;  // 1-based
    double mean_loss = 0.0;
    double accuracy = 0.0;  // on the training data, measured during the epoch
};

struct TrainOptions {
    std::size_t epochs = 10;
    double learning_rate = 0.05;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    std::function<void(const EpochStats&)> on_epoch;
};

/// Mini-batch SGD on softmax cross-entropy; no momentum or regularization.
/// Deterministic given options.seed (it only drives the shuffling order).
/// Throws NumericalError when the loss becomes non-finite.
Model train_sgd(const Model& model, std::span<const Sample> data, const TrainOptions& options);

/// He-normal weights and zero biases for every parameterized layer.
Model initialize(const Model& architecture, std::uint64_t seed);

double accuracy(const Model& model, std::span<const Sample> data);

}  // namespace plrp
