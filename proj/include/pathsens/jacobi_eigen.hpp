#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "pathsens/errors.hpp"

namespace pathsens {

struct EigenDecomposition {
    std::vector<double> values;   // descending
    std::vector<double> vectors;  // column k = eigenvector of values[k], row-major K x K
};

// Cyclic Jacobi eigensolver for small symmetric matrices (K <= ~32).
// Input is row-major K x K; symmetry is enforced to 1e-10 relative.
inline EigenDecomposition jacobi_eigen(const std::vector<double>& a_in, std::size_t k) {
    if (a_in.size() != k * k) throw ContractError("jacobi_eigen: matrix size mismatch");
    double scale = 0.0;
    for (double v : a_in) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j)
            if (std::abs(a_in[i * k + j] - a_in[j * k + i]) > 1e-10 * std::max(scale, 1.0))
                throw ContractError("jacobi_eigen: matrix is not symmetric");

    std::vector<double> a = a_in;
    std::vector<double> v(k * k, 0.0);
    for (std::size_t i = 0; i < k; ++i) v[i * k + i] = 1.0;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = i + 1; j < k; ++j) off += a[i * k + j] * a[i * k + j];
        if (off <= 1e-30 * std::max(scale * scale, 1.0)) break;
        for (std::size_t p = 0; p < k; ++p) {
            for (std::size_t q = p + 1; q < k; ++q) {
                const double apq = a[p * k + q];
                if (std::abs(apq) < 1e-300) continue;
                const double app = a[p * k + p], aqq = a[q * k + q];
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t i = 0; i < k; ++i) {
                    const double aip = a[i * k + p], aiq = a[i * k + q];
                    a[i * k + p] = c * aip - s * aiq;
                    a[i * k + q] = s * aip + c * aiq;
                }
                for (std::size_t j = 0; j < k; ++j) {
                    const double apj = a[p * k + j], aqj = a[q * k + j];
                    a[p * k + j] = c * apj - s * aqj;
                    a[q * k + j] = s * apj + c * aqj;
                }
                for (std::size_t i = 0; i < k; ++i) {
                    const double vip = v[i * k + p], viq = v[i * k + q];
                    v[i * k + p] = c * vip - s * viq;
                    v[i * k + q] = s * vip + c * viq;
                }
            }
        }
    }

    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return a[x * k + x] > a[y * k + y]; });

    EigenDecomposition out;
    out.values.resize(k);
    out.vectors.resize(k * k);
    for (std::size_t col = 0; col < k; ++col) {
        out.values[col] = a[order[col] * k + order[col]];
        for (std::size_t row = 0; row < k; ++row)
            out.vectors[row * k + col] = v[row * k + order[col]];
    }
    return out;
}

} // namespace pathsens
