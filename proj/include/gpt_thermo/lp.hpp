// Copyright 2026 The gpt-thermo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <limits>
#include <vector>

#include "linalg.hpp"

namespace gpt::lp {

enum class Status { optimal, infeasible, unbounded };

struct Result {
    Status status{Status::infeasible};
    Vec x;
    double objective{std::numeric_limits<double>::quiet_NaN()};
};

namespace detail {

// Tableau layout: rows 0..m-1 constraints, row m reduced costs; last column rhs.
// Bland's rule throughout, so no cycling on the degenerate problems we feed it.
inline Status pivot_until_optimal(Mat &t, std::vector<Eigen::Index> &basis,
                                  Eigen::Index allowed_cols, double tol) {
    const Eigen::Index m = t.rows() - 1;
    const Eigen::Index rhs = t.cols() - 1;
    while (true) {
        Eigen::Index enter = -1;
        for (Eigen::Index j = 0; j < allowed_cols; ++j) {
            if (t(m, j) < -tol) {
                enter = j;
                break;
            }
        }
        if (enter < 0) {
            return Status::optimal;
        }
        Eigen::Index leave = -1;
        double best = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (t(i, enter) > tol) {
                const double ratio = t(i, rhs) / t(i, enter);
                if (leave < 0 || ratio < best - 1e-12 ||
                    (ratio <= best + 1e-12 && basis[i] < basis[leave])) {
                    leave = i;
                    best = ratio;
                }
            }
        }
        if (leave < 0) {
            return Status::unbounded;
        }
        t.row(leave) /= t(leave, enter);
        for (Eigen::Index i = 0; i <= m; ++i) {
            if (i != leave && t(i, enter) != 0.0) {
                t.row(i) -= t(i, enter) * t.row(leave);
            }
        }
        basis[leave] = enter;
    }
}

} // namespace detail

/// Minimize c.x subject to A x = b, x >= 0 (dense two-phase simplex).
inline Result solve(const Mat &a_in, const Vec &b_in, const Vec &c, double tol = 1e-10) {
    const Eigen::Index m = a_in.rows();
    const Eigen::Index n = a_in.cols();
    Mat a = a_in;
    Vec b = b_in;
    for (Eigen::Index i = 0; i < m; ++i) {
        if (b(i) < 0) {
            a.row(i) *= -1.0;
            b(i) *= -1.0;
        }
    }

    Mat t = Mat::Zero(m + 1, n + m + 1);
    t.topLeftCorner(m, n) = a;
    t.block(0, n, m, m) = Mat::Identity(m, m);
    t.col(n + m).head(m) = b;
    std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
        basis[i] = n + i;
    }
    // phase one: minimize the sum of artificials
    for (Eigen::Index i = 0; i < m; ++i) {
        t.row(m) -= t.row(i);
    }
    for (Eigen::Index i = 0; i < m; ++i) {
        t(m, n + i) = 0.0;
    }
    detail::pivot_until_optimal(t, basis, n + m, tol);
    const double scale = 1.0 + b.cwiseAbs().sum();
    Result res;
    if (-t(m, n + m) > 1e-9 * scale) {
        res.status = Status::infeasible;
        return res;
    }
    // push remaining artificials out of the basis; rows with no way out are redundant
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < m; ++i) {
        if (basis[i] >= n) {
            Eigen::Index col = -1;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (std::abs(t(i, j)) > 1e-9) {
                    col = j;
                    break;
                }
            }
            if (col >= 0) {
                t.row(i) /= t(i, col);
                for (Eigen::Index r = 0; r <= m; ++r) {
                    if (r != i && t(r, col) != 0.0) {
                        t.row(r) -= t(r, col) * t.row(i);
                    }
                }
                basis[i] = col;
            } else {
                continue;
            }
        }
        keep.push_back(i);
    }

    const auto mk = static_cast<Eigen::Index>(keep.size());
    Mat t2 = Mat::Zero(mk + 1, n + 1);
    std::vector<Eigen::Index> basis2(keep.size());
    for (Eigen::Index r = 0; r < mk; ++r) {
        t2.row(r).head(n) = t.row(keep[r]).head(n);
        t2(r, n) = t(keep[r], n + m);
        basis2[r] = basis[keep[r]];
    }
    t2.row(mk).head(n) = c.transpose();
    for (Eigen::Index r = 0; r < mk; ++r) {
        const double cb = c(basis2[r]);
        if (cb != 0.0) {
            t2.row(mk) -= cb * t2.row(r);
        }
    }
    const Status st = detail::pivot_until_optimal(t2, basis2, n, tol);
    res.status = st;
    res.x = Vec::Zero(n);
    for (Eigen::Index r = 0; r < mk; ++r) {
        res.x(basis2[r]) = std::max(0.0, t2(r, n));
    }
    res.objective = c.dot(res.x);
    return res;
}

/// Any x >= 0 with A x = b, or infeasible.
inline Result feasible_point(const Mat &a, const Vec &b) {
    return solve(a, b, Vec::Zero(a.cols()));
}

} // namespace gpt::lp
