#pragma once

// Small dense matrix helpers and a one-sided Jacobi SVD, sized for batch
// prediction matrices (hundreds of rows, a handful of columns).

#include <cmath>
#include <cstddef>
#include <vector>

#include "dhauds/errors.hpp"

namespace dhauds {

struct Mat {
    std::size_t rows = 0, cols = 0;
    std::vector<double> data;  // row-major

    Mat() = default;
    Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    Mat transposed() const {
        Mat t(cols, rows);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) t.at(j, i) = at(i, j);
        return t;
    }
};

struct Svd {
    Mat u;                        // m x n, thin
    std::vector<double> sigma;    // n, descending
    Mat v;                        // n x n
};

/// Thin SVD via one-sided Jacobi rotations on the columns. Requires
/// rows >= cols; callers transpose when needed. Columns whose norm falls
/// below tol are treated as zero singular values with zeroed U columns.
inline Svd jacobi_svd(const Mat& a, int max_sweeps = 60, double tol = 1e-12) {
    if (a.rows < a.cols) throw Error("jacobi_svd: requires rows >= cols");
    const std::size_t m = a.rows, n = a.cols;
    Mat u = a;
    Mat v(n, n);
    for (std::size_t j = 0; j < n; ++j) v.at(j, j) = 1.0;

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double app = 0.0, aqq = 0.0, apq = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    app += u.at(i, p) * u.at(i, p);
                    aqq += u.at(i, q) * u.at(i, q);
                    apq += u.at(i, p) * u.at(i, q);
                }
                if (std::abs(apq) <= 1e-15 * std::sqrt(app * aqq) || apq == 0.0) continue;
                rotated = true;
                const double zeta = (aqq - app) / (2.0 * apq);
                const double t = (zeta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double cs = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = cs * t;
                for (std::size_t i = 0; i < m; ++i) {
                    const double up = u.at(i, p), uq = u.at(i, q);
                    u.at(i, p) = cs * up - sn * uq;
                    u.at(i, q) = sn * up + cs * uq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vp = v.at(i, p), vq = v.at(i, q);
                    v.at(i, p) = cs * vp - sn * vq;
                    v.at(i, q) = sn * vp + cs * vq;
                }
            }
        }
        if (!rotated) break;
        if (sweep == max_sweeps - 1) throw Error("jacobi_svd: did not converge");
    }

    Svd out;
    out.sigma.resize(n);
    out.u = Mat(m, n);
    out.v = Mat(n, n);
    std::vector<std::size_t> order(n);
    for (std::size_t j = 0; j < n; ++j) {
        double norm = 0.0;
        for (std::size_t i = 0; i < m; ++i) norm += u.at(i, j) * u.at(i, j);
        out.sigma[j] = std::sqrt(norm);
        order[j] = j;
    }
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return out.sigma[x] > out.sigma[y]; });

    std::vector<double> sorted(n);
    Mat su(m, n), sv(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t src = order[j];
        sorted[j] = out.sigma[src];
        const double s = out.sigma[src];
        for (std::size_t i = 0; i < m; ++i)
            su.at(i, j) = s > tol ? u.at(i, src) / s : 0.0;
        for (std::size_t i = 0; i < n; ++i) sv.at(i, j) = v.at(i, src);
    }
    out.sigma = std::move(sorted);
    out.u = std::move(su);
    out.v = std::move(sv);
    return out;
}

}  // namespace dhauds
