#include "symeig.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lcfed {

SymEig sym_eigen(const std::vector<double>& a, std::size_t n) {
    if (a.size() != n * n) throw std::invalid_argument("sym_eigen: size mismatch");
    std::vector<double> m = a;           // worked on in place
    std::vector<double> v(n * n, 0.0);   // accumulated rotations, row-major
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += m[i * n + j] * m[i * n + j];
        return s;
    };
    double diag_scale = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        diag_scale = std::max(diag_scale, std::abs(m[i * n + i]));
    const double tol = std::max(diag_scale, 1.0) * 1e-30;

    for (int sweep = 0; sweep < 100 && off_norm() > tol; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = m[p * n + q];
                if (apq == 0.0) continue;
                const double app = m[p * n + p];
                const double aqq = m[q * n + q];
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double mkp = m[k * n + p];
                    const double mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double mpk = m[p * n + k];
                    const double mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vpk = v[p * n + k];
                    const double vqk = v[q * n + k];
                    v[p * n + k] = c * vpk - s * vqk;
                    v[q * n + k] = s * vpk + c * vqk;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return m[i * n + i] > m[j * n + j];
    });

    SymEig out;
    out.values.resize(n);
    out.vectors.resize(n * n);
    for (std::size_t r = 0; r < n; ++r) {
        out.values[r] = m[order[r] * n + order[r]];
        for (std::size_t k = 0; k < n; ++k)
            out.vectors[r * n + k] = v[order[r] * n + k];
    }
    return out;
}

} // namespace lcfed
