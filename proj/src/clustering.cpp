#include "clustering.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "symeig.hpp"

namespace lcfed {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// Modified Gram-Schmidt pass over the projector rows; fit_projector's
// Gram-matrix route leaves singular vectors orthonormal only up to
// numerical error, this pins them down.
void reorthonormalize(std::vector<double>& rows, int d, std::size_t dim) {
    for (int i = 0; i < d; ++i) {
        double* ri = rows.data() + static_cast<std::size_t>(i) * dim;
        for (int j = 0; j < i; ++j) {
            const double* rj = rows.data() + static_cast<std::size_t>(j) * dim;
            double p = 0.0;
            for (std::size_t k = 0; k < dim; ++k) p += ri[k] * rj[k];
            for (std::size_t k = 0; k < dim; ++k) ri[k] -= p * rj[k];
        }
        double n = 0.0;
        for (std::size_t k = 0; k < dim; ++k) n += ri[k] * ri[k];
        n = std::sqrt(n);
        if (n > 0.0)
            for (std::size_t k = 0; k < dim; ++k) ri[k] /= n;
    }
}

void fix_row_signs(std::vector<double>& rows, int d, std::size_t dim) {
    for (int i = 0; i < d; ++i) {
        double* ri = rows.data() + static_cast<std::size_t>(i) * dim;
        std::size_t arg = 0;
        for (std::size_t k = 1; k < dim; ++k)
            if (std::abs(ri[k]) > std::abs(ri[arg])) arg = k;
        if (ri[arg] < 0.0)
            for (std::size_t k = 0; k < dim; ++k) ri[k] = -ri[k];
    }
}

} // namespace

RankProjector fit_projector(const std::vector<ParamVec>& models, int d,
                            std::vector<int> fitted_from) {
    const std::size_t s = models.size();
    if (s < 2) throw std::invalid_argument("fit_projector: need at least 2 models");
    const std::size_t dim = models[0].size();
    for (const auto& m : models)
        if (m.size() != dim)
            throw std::invalid_argument("fit_projector: inconsistent model dims");
    if (d < 1 || static_cast<std::size_t>(d) > std::min(s, dim))
        throw std::invalid_argument(
            "fit_projector: d must be in [1, min(|S_d|, dim)] = [1, " +
            std::to_string(std::min(s, dim)) + "]");

    // Right singular vectors via the s x s Gram matrix: W = U S V^T
    // gives W W^T = U S^2 U^T and V = W^T U S^{-1}.
    std::vector<double> gram(s * s);
    for (std::size_t i = 0; i < s; ++i)
        for (std::size_t j = i; j < s; ++j) {
            const double g = dot(models[i].values, models[j].values);
            gram[i * s + j] = g;
            gram[j * s + i] = g;
        }
    SymEig eig = sym_eigen(gram, s);

    double sigma_max = std::sqrt(std::max(eig.values[0], 0.0));
    const double tol = std::max(sigma_max, 1.0) * 1e-12;

    RankProjector proj;
    proj.input_dim = dim;
    proj.d = d;
    proj.fitted_from = std::move(fitted_from);
    proj.rows.assign(static_cast<std::size_t>(d) * dim, 0.0);

    int filled = 0;
    for (std::size_t r = 0; r < s && filled < d; ++r) {
        const double sigma = std::sqrt(std::max(eig.values[r], 0.0));
        if (sigma <= tol) break;
        double* out = proj.rows.data() + static_cast<std::size_t>(filled) * dim;
        for (std::size_t i = 0; i < s; ++i) {
            const double u = eig.vectors[r * s + i] / sigma;
            const double* w = models[i].values.data();
            for (std::size_t k = 0; k < dim; ++k) out[k] += u * w[k];
        }
        ++filled;
    }
    reorthonormalize(proj.rows, filled, dim);

    if (filled < d) {
        // pad with an arbitrary orthonormal complement from canonical basis
        // directions
        proj.rank_deficient = true;
        std::fprintf(stderr,
                     "lcfed: fit_projector: model stack has rank %d < %d, "
                     "padding with arbitrary orthonormal directions\n",
                     filled, d);
        std::vector<double> cand(dim);
        for (std::size_t e = 0; e < dim && filled < d; ++e) {
            std::fill(cand.begin(), cand.end(), 0.0);
            cand[e] = 1.0;
            for (int j = 0; j < filled; ++j) {
                auto rj = proj.row(j);
                const double p = dot(cand, rj);
                for (std::size_t k = 0; k < dim; ++k) cand[k] -= p * rj[k];
            }
            const double n = norm(cand);
            if (n < 1e-6) continue; // basis direction already spanned
            double* out = proj.rows.data() + static_cast<std::size_t>(filled) * dim;
            for (std::size_t k = 0; k < dim; ++k) out[k] = cand[k] / n;
            ++filled;
        }
        if (filled < d)
            throw std::runtime_error("fit_projector: failed to complete basis");
    }

    fix_row_signs(proj.rows, d, dim);
    return proj;
}

std::vector<double> project(const RankProjector& proj, std::span<const double> w) {
    if (w.size() != proj.input_dim)
        throw std::invalid_argument("project: dim mismatch");
    std::vector<double> out(proj.d);
    for (int i = 0; i < proj.d; ++i) out[i] = dot(proj.row(i), w);
    return out;
}

double cosine_sim(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw std::invalid_argument("cosine_sim: dim mismatch");
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0) {
        static std::atomic<bool> warned{false};
        if (!warned.exchange(true))
            std::fprintf(stderr,
                         "lcfed: cosine_sim: zero vector, treating similarity as 0\n");
        return 0.0;
    }
    return dot(a, b) / (na * nb);
}

double neg_l2_sim(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw std::invalid_argument("neg_l2_sim: dim mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double dlt = a[i] - b[i];
        s += dlt * dlt;
    }
    return -std::sqrt(s);
}

std::vector<int> Assignment::cluster_sizes() const {
    std::vector<int> sizes(num_clusters, 0);
    for (int k : cluster_of) ++sizes[k];
    return sizes;
}

Assignment update_assignments(const std::vector<std::vector<double>>& sim) {
    Assignment out;
    if (sim.empty()) return out;
    out.num_clusters = static_cast<int>(sim[0].size());
    out.cluster_of.resize(sim.size());
    for (std::size_t i = 0; i < sim.size(); ++i) {
        const auto& row = sim[i];
        if (static_cast<int>(row.size()) != out.num_clusters)
            throw std::invalid_argument("update_assignments: ragged similarity matrix");
        int best = 0;
        for (int k = 1; k < out.num_clusters; ++k)
            if (row[k] > row[best]) best = k; // ties keep the lower index
        out.cluster_of[i] = best;
    }
    return out;
}

int ifca_assign(const Examples& train, const std::vector<ParamVec>& centers) {
    if (centers.empty()) throw std::invalid_argument("ifca_assign: no centers");
    int best = 0;
    double best_loss = loss_only(centers[0], train);
    for (std::size_t k = 1; k < centers.size(); ++k) {
        const double l = loss_only(centers[k], train);
        if (l < best_loss) {
            best_loss = l;
            best = static_cast<int>(k);
        }
    }
    return best;
}

double adjusted_rand_index(const Assignment& assign, std::span<const int> truth) {
    const std::size_t n = assign.cluster_of.size();
    if (truth.size() != n)
        throw std::invalid_argument("adjusted_rand_index: length mismatch");
    if (n == 0) return 1.0;

    int kt = 0;
    for (int t : truth) kt = std::max(kt, t + 1);
    const int ka = assign.num_clusters;

    // contingency table
    std::vector<long long> table(static_cast<std::size_t>(ka) * kt, 0);
    std::vector<long long> row_sum(ka, 0), col_sum(kt, 0);
    for (std::size_t i = 0; i < n; ++i) {
        ++table[static_cast<std::size_t>(assign.cluster_of[i]) * kt + truth[i]];
        ++row_sum[assign.cluster_of[i]];
        ++col_sum[truth[i]];
    }
    auto choose2 = [](long long x) { return x * (x - 1) / 2; };
    double sum_cells = 0.0, sum_rows = 0.0, sum_cols = 0.0;
    for (long long c : table) sum_cells += static_cast<double>(choose2(c));
    for (long long r : row_sum) sum_rows += static_cast<double>(choose2(r));
    for (long long c : col_sum) sum_cols += static_cast<double>(choose2(c));
    const double pairs = static_cast<double>(choose2(static_cast<long long>(n)));

    if (pairs == 0.0) return 1.0; // single element: identical by convention
    const double expected = sum_rows * sum_cols / pairs;
    const double maximum = 0.5 * (sum_rows + sum_cols);
    if (maximum == expected) {
        // both partitions degenerate (all singletons or one block); they
        // either agree perfectly or the index is undefined -- treat exact
        // agreement as 1, anything else as 0
        return sum_cells == maximum ? 1.0 : 0.0;
    }
    return (sum_cells - expected) / (maximum - expected);
}

} // namespace lcfed
