#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "rng.hpp"

namespace lcfed {

void ModelArch::validate() const {
    if (layer_sizes.size() < 2)
        throw std::invalid_argument("ModelArch: need at least input and output sizes");
    for (int s : layer_sizes)
        if (s < 1) throw std::invalid_argument("ModelArch: layer sizes must be >= 1");
    if (split_layer < 1 || split_layer >= weight_layers())
        throw std::invalid_argument(
            "ModelArch: split_layer must be in [1, " +
            std::to_string(weight_layers()) + ") so both sub-models are non-empty");
}

std::size_t ModelArch::layer_offset(int l) const {
    std::size_t off = 0;
    for (int i = 0; i < l; ++i) off += layer_dim(i);
    return off;
}

std::span<double> ParamVec::weights(int layer) {
    const std::size_t off = arch.layer_offset(layer);
    const std::size_t n =
        static_cast<std::size_t>(arch.layer_sizes[layer]) * arch.layer_sizes[layer + 1];
    return {values.data() + off, n};
}

std::span<const double> ParamVec::weights(int layer) const {
    return const_cast<ParamVec*>(this)->weights(layer);
}

std::span<double> ParamVec::biases(int layer) {
    const std::size_t off = arch.layer_offset(layer) +
        static_cast<std::size_t>(arch.layer_sizes[layer]) * arch.layer_sizes[layer + 1];
    return {values.data() + off, static_cast<std::size_t>(arch.layer_sizes[layer + 1])};
}

std::span<const double> ParamVec::biases(int layer) const {
    return const_cast<ParamVec*>(this)->biases(layer);
}

ParamVec init_model(const ModelArch& arch, std::uint64_t seed) {
    arch.validate();
    ParamVec p{std::vector<double>(arch.total_dim(), 0.0), arch};
    Rng rng(mix_seed({seed, 0x6d6f64656cull /* "model" */}));
    for (int l = 0; l < arch.weight_layers(); ++l) {
        const double a =
            std::sqrt(6.0 / (arch.layer_sizes[l] + arch.layer_sizes[l + 1]));
        for (double& w : p.weights(l)) w = rng.uniform(-a, a);
        // biases stay zero
    }
    return p;
}

SplitView split_params(const ParamVec& p) {
    const std::size_t cut = p.arch.phi_dim();
    return {{p.values.data(), cut}, {p.values.data() + cut, p.values.size() - cut}};
}

namespace {

// Forward pass for one example; fills per-layer pre-activations z and
// activations a (a[0] is the input row). Returns softmax probabilities.
void forward_one(const ParamVec& p, std::span<const double> x,
                 std::vector<std::vector<double>>& z,
                 std::vector<std::vector<double>>& a,
                 std::vector<double>& probs) {
    const ModelArch& arch = p.arch;
    const int L = arch.weight_layers();
    a[0].assign(x.begin(), x.end());
    for (int l = 0; l < L; ++l) {
        const int fan_in = arch.layer_sizes[l];
        const int fan_out = arch.layer_sizes[l + 1];
        auto W = p.weights(l);
        auto b = p.biases(l);
        z[l].resize(fan_out);
        for (int o = 0; o < fan_out; ++o) {
            double s = b[o];
            const double* wrow = W.data() + static_cast<std::size_t>(o) * fan_in;
            const double* in = a[l].data();
            for (int i = 0; i < fan_in; ++i) s += wrow[i] * in[i];
            z[l][o] = s;
        }
        a[l + 1].resize(fan_out);
        if (l < L - 1) {
            for (int o = 0; o < fan_out; ++o)
                a[l + 1][o] = z[l][o] > 0.0 ? z[l][o] : 0.0;
        } else {
            a[l + 1] = z[l]; // output layer stays linear; softmax below
        }
    }
    // numerically stable softmax over the logits
    const std::vector<double>& logits = z[L - 1];
    const double zmax = *std::max_element(logits.begin(), logits.end());
    probs.resize(logits.size());
    double denom = 0.0;
    for (std::size_t c = 0; c < logits.size(); ++c) {
        probs[c] = std::exp(logits[c] - zmax);
        denom += probs[c];
    }
    for (double& q : probs) q /= denom;
}

void check_batch(const ParamVec& p, const Examples& data,
                 std::span<const std::size_t> batch) {
    if (data.empty()) throw std::invalid_argument("loss_and_grad: empty dataset");
    if (static_cast<int>(data.feature_dim) != p.arch.input_dim())
        throw std::invalid_argument(
            "loss_and_grad: feature dim " + std::to_string(data.feature_dim) +
            " does not match arch input " + std::to_string(p.arch.input_dim()));
    for (std::size_t i : batch)
        if (i >= data.size())
            throw std::invalid_argument("loss_and_grad: batch index out of range");
}

} // namespace

LossGrad loss_and_grad(const ParamVec& p, const Examples& data,
                       std::span<const std::size_t> batch) {
    check_batch(p, data, batch);
    const ModelArch& arch = p.arch;
    const int L = arch.weight_layers();
    const int C = arch.num_classes();

    std::vector<std::size_t> all;
    if (batch.empty()) {
        all.resize(data.size());
        std::iota(all.begin(), all.end(), std::size_t{0});
        batch = all;
    }
    const double inv_b = 1.0 / static_cast<double>(batch.size());

    LossGrad out;
    out.grad = ParamVec{std::vector<double>(p.size(), 0.0), arch};

    std::vector<std::vector<double>> z(L), a(L + 1);
    std::vector<double> probs, delta, delta_prev;
    for (std::size_t idx : batch) {
        forward_one(p, data.row(idx), z, a, probs);
        const int y = data.labels[idx];
        if (y < 0 || y >= C)
            throw std::invalid_argument("loss_and_grad: label out of range");
        out.loss += -std::log(std::max(probs[y], 1e-300)) * inv_b;

        // output delta: (softmax - onehot) / batch
        delta.assign(probs.begin(), probs.end());
        delta[y] -= 1.0;
        for (double& d : delta) d *= inv_b;

        for (int l = L - 1; l >= 0; --l) {
            const int fan_in = arch.layer_sizes[l];
            const int fan_out = arch.layer_sizes[l + 1];
            auto gW = out.grad.weights(l);
            auto gb = out.grad.biases(l);
            const double* in = a[l].data();
            for (int o = 0; o < fan_out; ++o) {
                const double d = delta[o];
                gb[o] += d;
                double* grow = gW.data() + static_cast<std::size_t>(o) * fan_in;
                for (int i = 0; i < fan_in; ++i) grow[i] += d * in[i];
            }
            if (l > 0) {
                auto W = p.weights(l);
                delta_prev.assign(fan_in, 0.0);
                for (int o = 0; o < fan_out; ++o) {
                    const double d = delta[o];
                    const double* wrow = W.data() + static_cast<std::size_t>(o) * fan_in;
                    for (int i = 0; i < fan_in; ++i) delta_prev[i] += d * wrow[i];
                }
                for (int i = 0; i < fan_in; ++i)
                    if (z[l - 1][i] <= 0.0) delta_prev[i] = 0.0; // rectifier gate
                delta = delta_prev;
            }
        }
    }
    return out;
}

double loss_only(const ParamVec& p, const Examples& data,
                 std::span<const std::size_t> batch) {
    check_batch(p, data, batch);
    const int L = p.arch.weight_layers();

    std::vector<std::size_t> all;
    if (batch.empty()) {
        all.resize(data.size());
        std::iota(all.begin(), all.end(), std::size_t{0});
        batch = all;
    }
    std::vector<std::vector<double>> z(L), a(L + 1);
    std::vector<double> probs;
    double loss = 0.0;
    for (std::size_t idx : batch) {
        forward_one(p, data.row(idx), z, a, probs);
        loss += -std::log(std::max(probs[data.labels[idx]], 1e-300));
    }
    return loss / static_cast<double>(batch.size());
}

EvalResult evaluate(const ParamVec& p, const Examples& testset) {
    if (testset.empty()) throw std::invalid_argument("evaluate: empty testset");
    if (static_cast<int>(testset.feature_dim) != p.arch.input_dim())
        throw std::invalid_argument("evaluate: feature dim mismatch");
    const int L = p.arch.weight_layers();
    std::vector<std::vector<double>> z(L), a(L + 1);
    std::vector<double> probs;
    std::size_t correct = 0;
    double loss = 0.0;
    for (std::size_t i = 0; i < testset.size(); ++i) {
        forward_one(p, testset.row(i), z, a, probs);
        const std::vector<double>& logits = z[L - 1];
        std::size_t best = 0;
        for (std::size_t c = 1; c < logits.size(); ++c)
            if (logits[c] > logits[best]) best = c; // ties keep the lower index
        if (static_cast<int>(best) == testset.labels[i]) ++correct;
        loss += -std::log(std::max(probs[testset.labels[i]], 1e-300));
    }
    return {static_cast<double>(correct) / static_cast<double>(testset.size()),
            loss / static_cast<double>(testset.size())};
}

} // namespace lcfed
