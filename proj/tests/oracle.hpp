// SPDX-License-Identifier: Apache-2.0
//
// statmap: statistical radio maps for reliable rate selection
// Copyright (C) 2026 The statmap Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef STATMAP_TESTS_ORACLE_HPP
#define STATMAP_TESTS_ORACLE_HPP

// Independent reference implementations for tests. Plain nested vectors and
// textbook algorithms; nothing here touches Eigen or the library internals.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace oracle
{
    using Mat = std::vector<std::vector<double>>;
    using Vec = std::vector<double>;

    inline Mat zeros(std::size_t r, std::size_t c) { return Mat(r, Vec(c, 0.0)); }

    // Gauss-Jordan inverse with partial pivoting; also returns log|det|.
    inline Mat inverse(Mat a, double *log_det = nullptr)
    {
        const std::size_t n = a.size();
        Mat inv = zeros(n, n);
        for (std::size_t i = 0; i < n; ++i)
            inv[i][i] = 1.0;
        double ld = 0.0;
        for (std::size_t c = 0; c < n; ++c)
        {
            std::size_t piv = c;
            for (std::size_t r = c + 1; r < n; ++r)
                if (std::abs(a[r][c]) > std::abs(a[piv][c]))
                    piv = r;
            if (a[piv][c] == 0.0)
                throw std::runtime_error("oracle::inverse: singular");
            std::swap(a[piv], a[c]);
            std::swap(inv[piv], inv[c]);
            const double p = a[c][c];
            ld += std::log(std::abs(p));
            for (std::size_t j = 0; j < n; ++j)
            {
                a[c][j] /= p;
                inv[c][j] /= p;
            }
            for (std::size_t r = 0; r < n; ++r)
            {
                if (r == c)
                    continue;
                const double f = a[r][c];
                if (f == 0.0)
                    continue;
                for (std::size_t j = 0; j < n; ++j)
                {
                    a[r][j] -= f * a[c][j];
                    inv[r][j] -= f * inv[c][j];
                }
            }
        }
        if (log_det)
            *log_det = ld;
        return inv;
    }

    // Lower Cholesky factor, Cholesky-Banachiewicz order.
    inline Mat cholesky(const Mat &a)
    {
        const std::size_t n = a.size();
        Mat l = zeros(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j <= i; ++j)
            {
                double s = a[i][j];
                for (std::size_t k = 0; k < j; ++k)
                    s -= l[i][k] * l[j][k];
                if (i == j)
                {
                    if (!(s > 0.0))
                        throw std::runtime_error("oracle::cholesky: not positive definite");
                    l[i][i] = std::sqrt(s);
                }
                else
                    l[i][j] = s / l[j][j];
            }
        return l;
    }

    inline Vec matvec(const Mat &a, const Vec &x)
    {
        Vec y(a.size(), 0.0);
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < x.size(); ++j)
                y[i] += a[i][j] * x[j];
        return y;
    }

    inline double dot(const Vec &a, const Vec &b)
    {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            s += a[i] * b[i];
        return s;
    }

    // Lower-triangular forward substitution.
    inline Vec forward_solve(const Mat &l, const Vec &b)
    {
        Vec x(b.size());
        for (std::size_t i = 0; i < b.size(); ++i)
        {
            double s = b[i];
            for (std::size_t k = 0; k < i; ++k)
                s -= l[i][k] * x[k];
            x[i] = s / l[i][i];
        }
        return x;
    }

    // log N(y; mean, cov) via the dense inverse and determinant.
    inline double mvn_log_density(const Vec &y, const Vec &mean, const Mat &cov)
    {
        const std::size_t n = y.size();
        double ld = 0.0;
        const Mat inv = inverse(cov, &ld);
        Vec r(n);
        for (std::size_t i = 0; i < n; ++i)
            r[i] = y[i] - mean[i];
        return -0.5 * dot(r, matvec(inv, r)) - 0.5 * ld - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
    }

    inline double se_kernel(double ax, double ay, double bx, double by, double sf2, double ell)
    {
        const double d2 = (ax - bx) * (ax - bx) + (ay - by) * (ay - by);
        return sf2 * std::exp(-d2 / (2.0 * ell * ell));
    }

    // Standard normal CDF from the complementary error function.
    inline double phi(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

    // Standard normal CDF by composite Simpson integration of the density.
    inline double phi_integrated(double x)
    {
        if (x > 0.0)
            return 1.0 - phi_integrated(-x);
        const double lo = -40.0;
        const double h = 1e-3;
        const auto n = static_cast<std::size_t>(std::ceil((x - lo) / h / 2.0)) * 2;
        const double step = (x - lo) / static_cast<double>(n);
        auto f = [](double t) { return std::exp(-0.5 * t * t); };
        double acc = f(lo) + f(x);
        for (std::size_t i = 1; i < n; ++i)
            acc += (i % 2 ? 4.0 : 2.0) * f(lo + step * static_cast<double>(i));
        return acc * step / 3.0 / std::sqrt(2.0 * std::numbers::pi);
    }

    // Inverse of phi_integrated by bisection.
    inline double phi_inv_integrated(double p)
    {
        double lo = -12.0, hi = 12.0;
        for (int i = 0; i < 80; ++i)
        {
            const double mid = 0.5 * (lo + hi);
            (phi_integrated(mid) < p ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }

    // Inverse by bisection on phi.
    inline double phi_inv(double p)
    {
        double lo = -40.0, hi = 40.0;
        for (int i = 0; i < 200; ++i)
        {
            const double mid = 0.5 * (lo + hi);
            (phi(mid) < p ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }
}

#endif
