#pragma once

#include <span>
#include <vector>

#include "dataset.hpp"
#include "model.hpp"
#include "rng.hpp"

namespace lcfed {

struct TrainHyper {
    double eta = 0.01;     // learning rate
    double mu = 0.1;       // pull toward the cluster center
    double lambda = 0.1;   // pull of the embedding toward the global embedding
    int batch_size = 32;   // clamped to the shard size
    int local_steps = 5;   // mini-batch steps per round

    void validate() const;
};

// Gradient of (mu/2)||w - center||^2 + (lambda/2)||phi(w) - global_phi||^2:
// mu*(w - center) everywhere plus lambda*(phi(w) - global_phi) on the
// embedding block, zeros on the decision block.
ParamVec prox_gradient(const ParamVec& w, const ParamVec& center,
                       std::span<const double> global_phi, double mu,
                       double lambda);

// Draws successive mini-batches without replacement inside an epoch
// shuffle; reshuffles once the shard is exhausted.
class BatchSampler {
public:
    BatchSampler(std::size_t n, int batch_size);
    std::span<const std::size_t> next(Rng& rng);

private:
    std::vector<std::size_t> order_;
    std::vector<std::size_t> current_;
    std::size_t pos_ = 0;
    std::size_t batch_ = 0;
};

// One round of local training: hyper.local_steps mini-batch steps of
//   w <- w - eta*grad_data - eta*mu*(w - center) - eta*lambda*(phi - Phi)
// with the lambda term acting on the embedding block only. Inputs are left
// untouched. global_phi may be empty when lambda == 0. Throws NumericError
// (with the step index) if the parameters go non-finite.
ParamVec local_update(const ParamVec& w, const ParamVec& center,
                      std::span<const double> global_phi,
                      const Examples& train, const TrainHyper& hyper,
                      Rng& rng);

} // namespace lcfed
