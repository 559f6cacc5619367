#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dataset.hpp"

namespace lcfed {

// Fully connected classifier: rectifier on hidden layers, softmax
// cross-entropy at the output. Parameters live in one flat vector, laid out
// layer by layer as row-major weights (fan_out x fan_in) followed by biases.
// split_layer separates the shallow embedding sub-model (weight layers
// [0, split_layer)) from the decision sub-model (the rest).
struct ModelArch {
    std::vector<int> layer_sizes;
    int split_layer = 1;

    int weight_layers() const {
        return static_cast<int>(layer_sizes.size()) - 1;
    }
    int input_dim() const { return layer_sizes.front(); }
    int num_classes() const { return layer_sizes.back(); }

    // throws std::invalid_argument on any violated shape constraint
    void validate() const;

    std::size_t layer_dim(int l) const {
        return static_cast<std::size_t>(layer_sizes[l] + 1) * layer_sizes[l + 1];
    }
    std::size_t layer_offset(int l) const;
    std::size_t total_dim() const { return layer_offset(weight_layers()); }
    std::size_t phi_dim() const { return layer_offset(split_layer); }

    bool operator==(const ModelArch&) const = default;
};

struct ParamVec {
    std::vector<double> values;
    ModelArch arch;

    std::size_t size() const { return values.size(); }
    double* data() { return values.data(); }
    const double* data() const { return values.data(); }

    std::span<double> weights(int layer);
    std::span<const double> weights(int layer) const;
    std::span<double> biases(int layer);
    std::span<const double> biases(int layer) const;
};

// Read-only views of the embedding and decision blocks; concatenating them
// reproduces the parameter vector exactly.
struct SplitView {
    std::span<const double> phi;
    std::span<const double> h;
};

// Uniform(-a, a) weights with a = sqrt(6 / (fan_in + fan_out)), zero biases.
ParamVec init_model(const ModelArch& arch, std::uint64_t seed);

SplitView split_params(const ParamVec& p);

struct LossGrad {
    double loss = 0.0;
    ParamVec grad;
};

// Mean softmax cross-entropy and its gradient over the batch. An empty
// `batch` span means the whole set.
LossGrad loss_and_grad(const ParamVec& p, const Examples& data,
                       std::span<const std::size_t> batch = {});

// Loss only (same reduction); used where the gradient is not needed.
double loss_only(const ParamVec& p, const Examples& data,
                 std::span<const std::size_t> batch = {});

struct EvalResult {
    double accuracy = 0.0;
    double mean_loss = 0.0;
};

// Top-1 accuracy (logit ties broken toward the lowest class index) and mean
// cross-entropy on the full set.
EvalResult evaluate(const ParamVec& p, const Examples& testset);

} // namespace lcfed
