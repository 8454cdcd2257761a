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

#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace gpt {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Cone membership, normalization and effect-bound tolerance.
inline constexpr double kTol = 1e-9;
/// Two rays are the same ray when their cosine is at least this.
inline constexpr double kRayCosine = 1.0 - 1e-9;

inline Vec to_vec(const std::vector<double> &v) {
    return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline std::vector<double> to_std(const Vec &v) {
    return {v.data(), v.data() + v.size()};
}

inline double cosine(const Vec &a, const Vec &b) {
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    return a.dot(b) / (na * nb);
}

inline bool same_ray(const Vec &a, const Vec &b) {
    return cosine(a, b) >= kRayCosine;
}

inline double sup_distance(const Vec &a, const Vec &b) {
    return (a - b).cwiseAbs().maxCoeff();
}

/// Matrix whose columns are the given vectors.
inline Mat columns(const std::vector<Vec> &vs, Eigen::Index rows) {
    Mat m(rows, static_cast<Eigen::Index>(vs.size()));
    for (std::size_t j = 0; j < vs.size(); ++j) {
        m.col(static_cast<Eigen::Index>(j)) = vs[j];
    }
    return m;
}

inline Eigen::Index numeric_rank(const Mat &m, double tol = 1e-10) {
    if (m.size() == 0) {
        return 0;
    }
    Eigen::ColPivHouseholderQR<Mat> qr(m);
    qr.setThreshold(tol);
    return qr.rank();
}

/// Calls f(idx) for every k-subset of {0..n-1} in lexicographic order.
/// Stops early when f returns false.
template <class F>
void for_each_subset(std::size_t n, std::size_t k, F &&f) {
    if (k > n) {
        return;
    }
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) {
        idx[i] = i;
    }
    while (true) {
        if (!f(static_cast<const std::vector<std::size_t> &>(idx))) {
            return;
        }
        if (k == 0) {
            return;
        }
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == n - k + (i - 1)) {
            --i;
        }
        if (i == 0) {
            return;
        }
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

inline double binomial(std::size_t n, std::size_t k) {
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i) {
        r *= static_cast<double>(n - k + i) / static_cast<double>(i);
    }
    return r;
}

/// -x log x with the 0 log 0 = 0 convention.
inline double neg_xlogx(double x) { return x > 0.0 ? -x * std::log(x) : 0.0; }

} // namespace gpt
