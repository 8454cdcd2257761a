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

// Reference computations for the tests. None of these call the library's optimizers,
// simplex or facet search; they only use the system's generators and unit.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gpt_thermo.hpp"

namespace oracle {

using gpt::Mat;
using gpt::Vec;

inline double h(const std::vector<double> &p) {
    double s = 0.0;
    for (double x : p) {
        if (x > 1e-300) {
            s -= x * std::log(x);
        }
    }
    return s;
}

/// Calls f on every k-subset of {0..n-1}.
inline void subsets(std::size_t n, std::size_t k, const std::function<void(const std::vector<std::size_t> &)> &f) {
    std::vector<bool> pick(n, false);
    std::fill(pick.begin(), pick.begin() + static_cast<long>(k), true);
    do {
        std::vector<std::size_t> s;
        for (std::size_t i = 0; i < n; ++i) {
            if (pick[i]) {
                s.push_back(i);
            }
        }
        f(s);
    } while (std::prev_permutation(pick.begin(), pick.end()));
}

/// Caratheodory test: v in cone(gens) iff some dim-subset of gens (or fewer) spans v
/// with nonnegative coefficients.
inline bool in_cone(const std::vector<Vec> &gens, const Vec &v, double tol = 1e-9) {
    const auto d = static_cast<std::size_t>(v.size());
    bool found = false;
    for (std::size_t k = 1; k <= std::min(d, gens.size()) && !found; ++k) {
        subsets(gens.size(), k, [&](const std::vector<std::size_t> &s) {
            if (found) {
                return;
            }
            Mat a(v.size(), static_cast<Eigen::Index>(k));
            for (std::size_t j = 0; j < k; ++j) {
                a.col(static_cast<Eigen::Index>(j)) = gens[s[j]];
            }
            const Vec c = a.colPivHouseholderQr().solve(v);
            if ((a * c - v).norm() <= tol * (1 + v.norm()) && c.minCoeff() >= -tol) {
                found = true;
            }
        });
    }
    return found;
}

/// Facet normals of a 3-d cone by cross products of generator pairs.
inline std::vector<Vec> facets3(const std::vector<Vec> &gens) {
    std::vector<Vec> out;
    for (std::size_t i = 0; i < gens.size(); ++i) {
        for (std::size_t j = i + 1; j < gens.size(); ++j) {
            const Eigen::Vector3d a = gens[i];
            const Eigen::Vector3d b = gens[j];
            Vec n = a.cross(b);
            if (n.norm() < 1e-12) {
                continue;
            }
            double lo = 0;
            double hi = 0;
            for (const auto &g : gens) {
                lo = std::min(lo, n.dot(g));
                hi = std::max(hi, n.dot(g));
            }
            if (lo < -1e-9 && hi > 1e-9) {
                continue;
            }
            if (hi <= 1e-9) {
                n = -n;
            }
            n /= hi > 1e-9 ? hi : -lo;
            bool dup = false;
            for (const auto &o : out) {
                dup = dup || (o - n).norm() < 1e-9;
            }
            if (!dup) {
                out.push_back(n);
            }
        }
    }
    return out;
}

/// Lattice points of {x >= 0 : A x = b}: every (n - rank)-subset of coordinates is put
/// on the grid {0, 1/R, ..., 1} and the rest solved for. Setting free coordinates to 0
/// reaches every vertex of the polytope exactly.
inline std::vector<Vec> polytope_grid(const Mat &a, const Vec &b, int resolution) {
    const auto n = static_cast<std::size_t>(a.cols());
    Eigen::FullPivLU<Mat> lu(a);
    const auto rank = static_cast<std::size_t>(lu.rank());
    const std::size_t free = n - rank;
    std::vector<Vec> out;
    const auto add = [&](const Vec &x) {
        for (const auto &o : out) {
            if ((o - x).cwiseAbs().maxCoeff() < 1e-10) {
                return;
            }
        }
        out.push_back(x);
    };
    subsets(n, free, [&](const std::vector<std::size_t> &fs) {
        std::vector<std::size_t> rest;
        for (std::size_t i = 0; i < n; ++i) {
            if (std::find(fs.begin(), fs.end(), i) == fs.end()) {
                rest.push_back(i);
            }
        }
        Mat ar(a.rows(), static_cast<Eigen::Index>(rest.size()));
        for (std::size_t j = 0; j < rest.size(); ++j) {
            ar.col(static_cast<Eigen::Index>(j)) = a.col(static_cast<Eigen::Index>(rest[j]));
        }
        Eigen::FullPivLU<Mat> lr(ar);
        if (static_cast<std::size_t>(lr.rank()) < rest.size()) {
            return;
        }
        std::vector<int> k(free, 0);
        while (true) {
            Vec x = Vec::Zero(static_cast<Eigen::Index>(n));
            Vec rhs = b;
            for (std::size_t j = 0; j < free; ++j) {
                const double v = static_cast<double>(k[j]) / resolution;
                x(static_cast<Eigen::Index>(fs[j])) = v;
                rhs -= v * a.col(static_cast<Eigen::Index>(fs[j]));
            }
            const Vec y = ar.colPivHouseholderQr().solve(rhs);
            if ((ar * y - rhs).norm() < 1e-9 && y.minCoeff() >= -1e-12) {
                for (std::size_t j = 0; j < rest.size(); ++j) {
                    x(static_cast<Eigen::Index>(rest[j])) = std::max(0.0, y(static_cast<Eigen::Index>(j)));
                }
                add(x);
            }
            std::size_t j = 0;
            while (j < free && ++k[j] > resolution) {
                k[j] = 0;
                ++j;
            }
            if (j == free) {
                break;
            }
        }
    });
    return out;
}

inline Mat columns(const std::vector<Vec> &vs) {
    Mat m(vs.front().size(), static_cast<Eigen::Index>(vs.size()));
    for (std::size_t j = 0; j < vs.size(); ++j) {
        m.col(static_cast<Eigen::Index>(j)) = vs[j];
    }
    return m;
}

/// Decomposition weights of rho over the generators (grid points of the weight polytope).
inline std::vector<Vec> decompositions(const gpt::GptSystem &sys, const Vec &rho, int resolution) {
    return polytope_grid(columns(sys.generators()), rho, resolution);
}

/// Fine-grained measurement coefficients c with sum c_i f_i = unit, f_i = 3-d facet normals.
inline std::vector<Vec> measurements(const std::vector<Vec> &facets, const Vec &unit, int resolution) {
    return polytope_grid(columns(facets), unit, resolution);
}

inline double s_mix(const gpt::GptSystem &sys, const Vec &rho, int resolution) {
    double best = 1e300;
    for (const auto &w : decompositions(sys, rho, resolution)) {
        best = std::min(best, h(gpt::to_std(w)));
    }
    return best;
}

inline std::vector<double> outcomes(const std::vector<Vec> &facets, const Vec &c, const Vec &rho) {
    std::vector<double> p;
    for (std::size_t i = 0; i < facets.size(); ++i) {
        p.push_back(c(static_cast<Eigen::Index>(i)) * facets[i].dot(rho));
    }
    return p;
}

inline double s_meas(const gpt::GptSystem &sys, const Vec &rho, int resolution) {
    const auto f = facets3(sys.generators());
    double best = 1e300;
    for (const auto &c : measurements(f, sys.unit(), resolution)) {
        best = std::min(best, h(outcomes(f, c, rho)));
    }
    return best;
}

/// max over decompositions w and measurements c of H(outcome) - sum_v w_v H(outcome | v).
inline double s_acc(const gpt::GptSystem &sys, const Vec &rho, int w_resolution, int c_resolution) {
    const auto f = facets3(sys.generators());
    const auto cs = measurements(f, sys.unit(), c_resolution);
    const auto ws = decompositions(sys, rho, w_resolution);
    const auto &gens = sys.generators();
    double best = 0.0;
    for (const auto &c : cs) {
        const double hout = h(outcomes(f, c, rho));
        std::vector<double> hv;
        for (const auto &g : gens) {
            hv.push_back(h(outcomes(f, c, g)));
        }
        for (const auto &w : ws) {
            double cond = 0.0;
            for (std::size_t v = 0; v < gens.size(); ++v) {
                cond += w(static_cast<Eigen::Index>(v)) * hv[v];
            }
            best = std::max(best, hout - cond);
        }
    }
    return best;
}

/// Mixture of polygon vertices.
inline gpt::State mix(const gpt::SystemPtr &sys, const std::vector<std::pair<double, std::size_t>> &terms) {
    return gpt::State::mixture(sys, terms);
}

/// Ten fixed states each on the square and the hexagon.
inline std::vector<gpt::State> panel() {
    const auto sq = gpt::make_polygon(4);
    const auto hx = gpt::make_polygon(6);
    return {
        mix(sq, {{1.0, 0}}),
        mix(sq, {{0.5, 0}, {0.5, 1}}),
        mix(sq, {{0.75, 0}, {0.25, 2}}),
        mix(sq, {{0.25, 0}, {0.25, 1}, {0.25, 2}, {0.25, 3}}),
        mix(sq, {{0.6, 0}, {0.3, 1}, {0.1, 3}}),
        mix(sq, {{0.9, 1}, {0.1, 2}}),
        mix(sq, {{0.4, 0}, {0.35, 1}, {0.25, 2}}),
        mix(sq, {{0.05, 0}, {0.15, 1}, {0.3, 2}, {0.5, 3}}),
        mix(sq, {{0.5, 0}, {0.5, 2}}),
        mix(sq, {{0.7, 3}, {0.2, 0}, {0.1, 1}}),
        mix(hx, {{1.0, 2}}),
        mix(hx, {{0.5, 0}, {0.5, 1}}),
        mix(hx, {{0.5, 5}, {0.5, 1}}),
        mix(hx, {{0.75, 0}, {0.25, 3}}),
        mix(hx, {{1.0 / 3, 0}, {1.0 / 3, 2}, {1.0 / 3, 4}}),
        mix(hx, {{0.6, 0}, {0.3, 2}, {0.1, 4}}),
        mix(hx, {{0.2, 0}, {0.2, 1}, {0.2, 2}, {0.2, 3}, {0.2, 4}}),
        mix(hx, {{0.45, 1}, {0.35, 2}, {0.2, 5}}),
        mix(hx, {{0.8, 3}, {0.1, 4}, {0.1, 5}}),
        mix(hx, {{0.3, 0}, {0.3, 3}, {0.4, 1}}),
    };
}

// ---- random classical SPM cycles ------------------------------------------

inline Vec dirichlet(std::size_t n, std::mt19937_64 &rng) {
    std::gamma_distribution<double> gam(1.0, 1.0);
    Vec p(static_cast<Eigen::Index>(n));
    for (auto &x : p) {
        x = gam(rng) + 1e-3;
    }
    return p / p.sum();
}

inline Mat stochastic(std::size_t rows, std::size_t cols, std::mt19937_64 &rng) {
    Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        m.col(c) = dirichlet(rows, rng);
    }
    return m;
}

/// Random forward steps with pointer or trivial processes, closed by one pointer step
/// that redistributes every outcome back into the initial containers.
inline gpt::CycleDefinition random_classical_cycle(std::mt19937_64 &rng) {
    std::uniform_int_distribution<std::size_t> dim(2, 4);
    std::uniform_int_distribution<std::size_t> few(1, 3);
    std::uniform_real_distribution<double> vol(0.2, 2.0);
    std::bernoulli_distribution coin(0.5);
    const auto sys = gpt::make_classical(dim(rng));
    const auto n = static_cast<std::size_t>(sys->dim());
    const auto pointer = gpt::pointer_process(sys);
    const auto trivial = gpt::MeasurementProcess::trivial(sys);

    gpt::CycleDefinition def{{sys, {}}, {}};
    const std::size_t c0 = few(rng);
    const Vec f0 = dirichlet(c0, rng);
    for (std::size_t z = 0; z < c0; ++z) {
        def.initial.containers.push_back({"z" + std::to_string(z), vol(rng), f0(static_cast<Eigen::Index>(z)),
                                          gpt::State(sys, dirichlet(n, rng))});
    }

    std::vector<std::string> labels;
    for (const auto &c : def.initial.containers) {
        labels.push_back(c.label);
    }
    const std::size_t forward = few(rng);
    for (std::size_t s = 0; s < forward; ++s) {
        std::shuffle(labels.begin(), labels.end(), rng);
        gpt::CycleStep step{"random " + std::to_string(s), {}, {}, {}};
        std::size_t i = 0;
        std::size_t out_count = 0;
        while (i < labels.size()) {
            const std::size_t take = std::min(few(rng), labels.size() - i);
            std::vector<std::string> members(labels.begin() + static_cast<long>(i),
                                             labels.begin() + static_cast<long>(i + take));
            i += take;
            const auto &proc = coin(rng) ? pointer : trivial;
            const std::size_t outs = few(rng);
            std::vector<gpt::Mat> fb;
            for (std::size_t k = 0; k < proc.size(); ++k) {
                fb.push_back(stochastic(outs, take, rng));
            }
            std::vector<double> vols;
            for (std::size_t o = 0; o < outs; ++o) {
                vols.push_back(vol(rng));
                step.relabel.push_back("s" + std::to_string(s) + "_" + std::to_string(out_count++));
            }
            step.groups.push_back({members, proc, fb, vols});
        }
        labels = step.relabel;
        def.steps.push_back(std::move(step));
    }

    // outcome x goes to initial container z with probability f_z p_z(x) / q_x
    Vec q = Vec::Zero(static_cast<Eigen::Index>(n));
    for (const auto &c : def.initial.containers) {
        q += c.fraction * c.internal.coords();
    }
    gpt::CycleStep close{"closing", {}, {}, {}};
    std::vector<gpt::Mat> fb;
    for (std::size_t x = 0; x < n; ++x) {
        gpt::Mat f(static_cast<Eigen::Index>(c0), static_cast<Eigen::Index>(labels.size()));
        for (std::size_t z = 0; z < c0; ++z) {
            const auto &c = def.initial.containers[z];
            f.row(static_cast<Eigen::Index>(z)).setConstant(c.fraction * c.internal.coords()(static_cast<Eigen::Index>(x)) /
                                                            q(static_cast<Eigen::Index>(x)));
        }
        fb.push_back(f);
    }
    std::vector<double> vols;
    for (const auto &c : def.initial.containers) {
        vols.push_back(c.volume);
        close.relabel.push_back(c.label);
    }
    close.groups.push_back({labels, pointer, fb, vols});
    def.steps.push_back(std::move(close));
    return def;
}

} // namespace oracle
