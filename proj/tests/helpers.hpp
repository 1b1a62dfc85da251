#pragma once

#include <functional>

#include "cams/core.hpp"

namespace cams::test {

inline MatrixXcd random_hermitian(RngStream& rng, int m, double scale = 1.0) {
    MatrixXcd a(m, m);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) a(r, c) = scale * rng.cnormal();
    return hermitian_part(a);
}

// Random PSD matrix A A^H, optionally trace-normalized to `trace`.
inline MatrixXcd random_psd(RngStream& rng, int m, double trace = 0.0) {
    MatrixXcd a(m, m);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) a(r, c) = rng.cnormal();
    MatrixXcd p = a * a.adjoint();
    if (trace > 0.0) p *= trace / p.trace().real();
    return hermitian_part(p);
}

// Strictly positive definite with bounded condition number; keeps FIMs away
// from the singular set so finite differences stay well behaved.
inline MatrixXcd random_pd(RngStream& rng, int m, double trace) {
    MatrixXcd p = random_psd(rng, m) + 0.2 * MatrixXcd::Identity(m, m);
    p *= trace / p.trace().real();
    return hermitian_part(p);
}

// Central finite difference of f along the Hermitian direction d.
inline double directional_derivative(const std::function<double(const MatrixXcd&)>& f,
                                     const MatrixXcd& q, const MatrixXcd& d, double h) {
    return (f(q + h * d) - f(q - h * d)) / (2.0 * h);
}

// Relative error between the analytic gradient g and finite differences of f
// at q, maximized over `dirs` random Hermitian directions.
inline double gradient_check(const std::function<double(const MatrixXcd&)>& f,
                             const MatrixXcd& g, const MatrixXcd& q, RngStream& rng, int dirs,
                             double h) {
    double worst = 0.0;
    for (int i = 0; i < dirs; ++i) {
        MatrixXcd d = random_hermitian(rng, static_cast<int>(q.rows()));
        d /= d.norm();
        const double fd = directional_derivative(f, q, d, h);
        const double an = (g.conjugate().cwiseProduct(d)).sum().real();
        const double scale = std::max({std::abs(fd), std::abs(an), 1e-12});
        worst = std::max(worst, std::abs(fd - an) / scale);
    }
    return worst;
}

}  // namespace cams::test
