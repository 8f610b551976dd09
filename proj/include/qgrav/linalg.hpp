#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "qgrav/errors.hpp"

// Minimal dense linear algebra for the small systems used here (3x3 Bloch
// resolvents, Levenberg-Marquardt normal equations).
namespace qgrav::linalg {

using cplx = std::complex<double>;

// Gaussian elimination with partial pivoting, in place on copies.
template <typename T>
std::vector<T> solve(std::vector<T> a, std::vector<T> b, int n) {
    for (int col = 0; col < n; ++col) {
        int piv = col;
        double best = std::abs(a[col * n + col]);
        for (int r = col + 1; r < n; ++r) {
            const double m = std::abs(a[r * n + col]);
            if (m > best) { best = m; piv = r; }
        }
        if (best == 0.0) throw NumericsError("singular linear system");
        if (piv != col) {
            for (int k = 0; k < n; ++k) std::swap(a[col * n + k], a[piv * n + k]);
            std::swap(b[col], b[piv]);
        }
        const T inv = T(1) / a[col * n + col];
        for (int r = col + 1; r < n; ++r) {
            const T f = a[r * n + col] * inv;
            if (f == T(0)) continue;
            for (int k = col; k < n; ++k) a[r * n + k] -= f * a[col * n + k];
            b[r] -= f * b[col];
        }
    }
    std::vector<T> x(static_cast<std::size_t>(n));
    for (int r = n - 1; r >= 0; --r) {
        T acc = b[r];
        for (int k = r + 1; k < n; ++k) acc -= a[r * n + k] * x[k];
        x[r] = acc / a[r * n + r];
    }
    return x;
}

inline std::array<cplx, 3> solve3(const std::array<cplx, 9>& a, const std::array<cplx, 3>& b) {
    std::vector<cplx> av(a.begin(), a.end()), bv(b.begin(), b.end());
    auto x = solve(std::move(av), std::move(bv), 3);
    return {x[0], x[1], x[2]};
}

} // namespace qgrav::linalg
