#include "trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "errors.hpp"

namespace lcfed {

void TrainHyper::validate() const {
    if (eta <= 0.0) throw std::invalid_argument("TrainHyper: eta must be > 0");
    if (mu < 0.0) throw std::invalid_argument("TrainHyper: mu must be >= 0");
    if (lambda < 0.0) throw std::invalid_argument("TrainHyper: lambda must be >= 0");
    if (batch_size < 1) throw std::invalid_argument("TrainHyper: batch_size must be >= 1");
    if (local_steps < 1) throw std::invalid_argument("TrainHyper: local_steps must be >= 1");
}

ParamVec prox_gradient(const ParamVec& w, const ParamVec& center,
                       std::span<const double> global_phi, double mu,
                       double lambda) {
    if (w.size() != center.size())
        throw std::invalid_argument("prox_gradient: model/center dim mismatch");
    ParamVec g{std::vector<double>(w.size(), 0.0), w.arch};
    if (mu != 0.0)
        for (std::size_t i = 0; i < w.size(); ++i)
            g.values[i] = mu * (w.values[i] - center.values[i]);
    if (lambda != 0.0) {
        const std::size_t cut = w.arch.phi_dim();
        if (global_phi.size() != cut)
            throw std::invalid_argument("prox_gradient: global embedding dim mismatch");
        for (std::size_t i = 0; i < cut; ++i)
            g.values[i] += lambda * (w.values[i] - global_phi[i]);
    }
    return g;
}

BatchSampler::BatchSampler(std::size_t n, int batch_size)
    : order_(n), batch_(std::min<std::size_t>(static_cast<std::size_t>(batch_size), n)) {
    if (n == 0) throw std::invalid_argument("BatchSampler: empty shard");
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    pos_ = n; // force a shuffle on the first draw
}

std::span<const std::size_t> BatchSampler::next(Rng& rng) {
    if (pos_ >= order_.size()) {
        rng.shuffle(order_);
        pos_ = 0;
    }
    const std::size_t take = std::min(batch_, order_.size() - pos_);
    current_.assign(order_.begin() + pos_, order_.begin() + pos_ + take);
    pos_ += take;
    return current_;
}

ParamVec local_update(const ParamVec& w, const ParamVec& center,
                      std::span<const double> global_phi,
                      const Examples& train, const TrainHyper& hyper,
                      Rng& rng) {
    hyper.validate();
    if (w.size() != center.size())
        throw std::invalid_argument("local_update: model/center dim mismatch");
    const std::size_t cut = w.arch.phi_dim();
    if (hyper.lambda != 0.0 && global_phi.size() != cut)
        throw std::invalid_argument("local_update: global embedding dim mismatch");

    ParamVec cur = w;
    BatchSampler sampler(train.size(), hyper.batch_size);
    for (int step = 0; step < hyper.local_steps; ++step) {
        auto batch = sampler.next(rng);
        LossGrad lg = loss_and_grad(cur, train, batch);
        const double eta = hyper.eta;
        // every term evaluated at the pre-step parameters
        for (std::size_t i = 0; i < cur.size(); ++i) {
            const double old = cur.values[i];
            double v = old - eta * lg.grad.values[i];
            if (hyper.mu != 0.0) v -= eta * hyper.mu * (old - center.values[i]);
            if (hyper.lambda != 0.0 && i < cut)
                v -= eta * hyper.lambda * (old - global_phi[i]);
            cur.values[i] = v;
        }
        for (std::size_t i = 0; i < cur.size(); ++i)
            if (!std::isfinite(cur.values[i]))
                throw NumericError(
                    "local_update: non-finite parameter at step " + std::to_string(step),
                    step);
    }
    return cur;
}

} // namespace lcfed
