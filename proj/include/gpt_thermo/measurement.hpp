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

#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "lp.hpp"
#include "state.hpp"

namespace gpt {

namespace detail {
inline std::vector<std::string> numbered_labels(std::size_t n) {
    std::vector<std::string> l;
    for (std::size_t i = 0; i < n; ++i) {
        l.push_back(std::to_string(i));
    }
    return l;
}
} // namespace detail

/// Effects summing to the unit, one per outcome.
class Measurement {
  public:
    Measurement(SystemPtr sys, std::vector<std::string> labels, std::vector<Effect> effects, double tol = kTol)
        : sys_{std::move(sys)}, labels_{std::move(labels)}, effects_{std::move(effects)} {
        require(!effects_.empty(), ErrorCode::invalid_argument, "measurement without outcomes");
        require(labels_.size() == effects_.size(), ErrorCode::invalid_argument, "label count mismatch");
        Vec total = Vec::Zero(sys_->dim());
        for (const auto &e : effects_) {
            require(e.system() == sys_, ErrorCode::invalid_argument, "effect on another system");
            total += e.functional();
        }
        require(sup_distance(total, sys_->unit()) <= tol, ErrorCode::invalid_argument,
                "effects do not sum to the unit");
    }

    Measurement(const SystemPtr &sys, const std::vector<Effect> &effects)
        : Measurement(sys, detail::numbered_labels(effects.size()), effects) {}

    [[nodiscard]] const SystemPtr &system() const { return sys_; }
    [[nodiscard]] std::size_t size() const { return effects_.size(); }
    [[nodiscard]] const std::vector<std::string> &labels() const { return labels_; }
    [[nodiscard]] const std::vector<Effect> &effects() const { return effects_; }

    [[nodiscard]] std::vector<double> probabilities(const Vec &coords) const {
        std::vector<double> p;
        for (const auto &e : effects_) {
            p.push_back(e(coords));
        }
        return p;
    }

  private:
    SystemPtr sys_;
    std::vector<std::string> labels_;
    std::vector<Effect> effects_;
};

/// Outcome-indexed positive maps A -> A whose unit images sum to the unit.
class MeasurementProcess {
  public:
    MeasurementProcess(SystemPtr sys, std::vector<std::string> labels, std::vector<PositiveMap> maps,
                       double tol = kTol)
        : sys_{std::move(sys)}, labels_{std::move(labels)}, maps_{std::move(maps)} {
        require(!maps_.empty(), ErrorCode::invalid_argument, "process without outcomes");
        require(labels_.size() == maps_.size(), ErrorCode::invalid_argument, "label count mismatch");
        Vec total = Vec::Zero(sys_->dim());
        for (const auto &m : maps_) {
            require(m.source()->dim() == sys_->dim() && m.target()->dim() == sys_->dim(),
                    ErrorCode::invalid_argument, "branch map is not A -> A");
            total += m.matrix().transpose() * sys_->unit();
        }
        require(sup_distance(total, sys_->unit()) <= tol * (1.0 + total.cwiseAbs().maxCoeff()),
                ErrorCode::invalid_argument, "branch maps do not sum to a process");
    }

    MeasurementProcess(const SystemPtr &sys, const std::vector<PositiveMap> &maps)
        : MeasurementProcess(sys, detail::numbered_labels(maps.size()), maps) {}

    /// The single-outcome identity process (no measurement at all).
    static MeasurementProcess trivial(const SystemPtr &sys) {
        return {sys, {"0"}, {PositiveMap::identity(sys)}};
    }

    [[nodiscard]] const SystemPtr &system() const { return sys_; }
    [[nodiscard]] std::size_t size() const { return maps_.size(); }
    [[nodiscard]] const std::vector<std::string> &labels() const { return labels_; }
    [[nodiscard]] const std::vector<PositiveMap> &maps() const { return maps_; }

    [[nodiscard]] bool is_trivial() const {
        return maps_.size() == 1 &&
               (maps_.front().matrix() - Mat::Identity(sys_->dim(), sys_->dim())).cwiseAbs().maxCoeff() <= kTol;
    }

    /// M rho as a K-labelled ensemble of substates.
    [[nodiscard]] DirectSumState apply(const SubState &rho) const {
        std::vector<SubState> out;
        for (const auto &m : maps_) {
            out.push_back(apply_map(m, rho));
        }
        return {labels_, out, 1e-8 + std::abs(1.0 - rho.weight())};
    }

  private:
    SystemPtr sys_;
    std::vector<std::string> labels_;
    std::vector<PositiveMap> maps_;
};

inline Measurement induced_measurement(const MeasurementProcess &proc) {
    std::vector<Effect> effects;
    for (const auto &m : proc.maps()) {
        effects.emplace_back(proc.system(), m.matrix().transpose() * proc.system()->unit(), 1e-8);
    }
    return {proc.system(), proc.labels(), effects, 1e-8};
}

inline bool is_indecomposable(const Effect &e) {
    if (e.functional().norm() <= kTol) {
        return false;
    }
    for (const auto &f : e.system()->dual_rays()) {
        if (same_ray(f, e.functional())) {
            return true;
        }
    }
    return false;
}

inline bool is_fine_grained(const Measurement &m) {
    for (const auto &e : m.effects()) {
        if (!is_indecomposable(e)) {
            return false;
        }
    }
    return true;
}

/// Upper limit on ray subsets visited by the support enumerations.
inline constexpr double kMaxSubsets = 4e6;

/// Fine-grained measurements with effects on distinct dual rays, support <= max_support
/// (0 means dim). Each is a vertex of {c >= 0 : sum c_i f_i = unit}.
inline std::vector<Measurement> enumerate_fine_grained(const SystemPtr &sys, std::size_t max_support = 0) {
    const auto &rays = sys->dual_rays();
    const auto d = static_cast<std::size_t>(sys->dim());
    const std::size_t kmax = std::min(max_support == 0 ? d : max_support, rays.size());
    double count = 0.0;
    for (std::size_t k = 1; k <= kmax; ++k) {
        count += binomial(rays.size(), k);
    }
    require(count <= kMaxSubsets, ErrorCode::unsupported_system,
            "too many ray subsets to enumerate for " + sys->name());
    std::vector<Measurement> out;
    for (std::size_t k = 1; k <= kmax; ++k) {
        for_each_subset(rays.size(), k, [&](const std::vector<std::size_t> &idx) {
            Mat f(sys->dim(), static_cast<Eigen::Index>(k));
            for (std::size_t j = 0; j < k; ++j) {
                f.col(static_cast<Eigen::Index>(j)) = rays[idx[j]];
            }
            Eigen::ColPivHouseholderQR<Mat> qr(f);
            qr.setThreshold(1e-10);
            if (qr.rank() != static_cast<Eigen::Index>(k)) {
                return true;
            }
            const Vec c = qr.solve(sys->unit());
            if ((f * c - sys->unit()).cwiseAbs().maxCoeff() > 1e-9 || c.minCoeff() <= 1e-12) {
                return true;
            }
            std::vector<Effect> effects;
            for (std::size_t j = 0; j < k; ++j) {
                effects.emplace_back(sys, c(static_cast<Eigen::Index>(j)) * rays[idx[j]], 1e-8);
            }
            out.emplace_back(sys, std::move(effects));
            return true;
        });
    }
    return out;
}

inline bool is_repeatable(const MeasurementProcess &proc, double tol = kTol) {
    for (std::size_t x = 0; x < proc.size(); ++x) {
        for (std::size_t y = 0; y < proc.size(); ++y) {
            const Mat prod = proc.maps()[x].matrix() * proc.maps()[y].matrix();
            const Mat expect = x == y ? proc.maps()[x].matrix() : Mat::Zero(prod.rows(), prod.cols());
            if ((prod - expect).cwiseAbs().maxCoeff() > tol) {
                return false;
            }
        }
    }
    return true;
}

/// Generators of the smallest face of the cone containing v.
inline std::vector<std::size_t> face_generators(const GptSystem &sys, const Vec &v, double tol = kTol) {
    const double scale = 1.0 + v.cwiseAbs().maxCoeff();
    std::vector<const Vec *> zero_facets;
    for (const auto &f : sys.dual_rays()) {
        if (std::abs(f.dot(v)) <= tol * scale) {
            zero_facets.push_back(&f);
        }
    }
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < sys.generators().size(); ++j) {
        bool on_all = true;
        for (const auto *f : zero_facets) {
            if (std::abs(f->dot(sys.generators()[j])) > tol) {
                on_all = false;
                break;
            }
        }
        if (on_all) {
            out.push_back(j);
        }
    }
    return out;
}

/// Exact test: each M_x fixes every generator of the smallest face containing M_x(C).
inline bool is_strongly_repeatable(const MeasurementProcess &proc, double tol = kTol) {
    const auto &sys = *proc.system();
    const Vec all = sys.generator_matrix().rowwise().sum();
    for (const auto &m : proc.maps()) {
        const Vec tau = m.matrix() * all;
        if (tau.cwiseAbs().maxCoeff() <= tol) {
            continue;
        }
        for (std::size_t j : face_generators(sys, tau, tol)) {
            const Vec &g = sys.generators()[j];
            if (sup_distance(m.matrix() * g, g) > tol * (1.0 + m.matrix().cwiseAbs().maxCoeff())) {
                return false;
            }
        }
    }
    return true;
}

/// Vertices of the order interval [0, tau] = {s : s in C, tau - s in C}; dim <= 4.
inline std::vector<Vec> order_interval_vertices(const GptSystem &sys, const Vec &tau) {
    const Eigen::Index d = sys.dim();
    require(d <= 4, ErrorCode::unsupported_dimension, "order-interval enumeration needs dim <= 4");
    // rows a_r . s >= b_r
    std::vector<Vec> a;
    std::vector<double> b;
    for (const auto &f : sys.dual_rays()) {
        a.push_back(f);
        b.push_back(0.0);
        a.push_back(-f);
        b.push_back(-f.dot(tau));
    }
    std::vector<Vec> verts;
    for_each_subset(a.size(), static_cast<std::size_t>(d), [&](const std::vector<std::size_t> &idx) {
        Mat m(d, d);
        Vec rhs(d);
        for (Eigen::Index r = 0; r < d; ++r) {
            m.row(r) = a[idx[r]].transpose();
            rhs(r) = b[idx[r]];
        }
        Eigen::FullPivLU<Mat> lu(m);
        if (!lu.isInvertible()) {
            return true;
        }
        const Vec s = lu.solve(rhs);
        for (std::size_t r = 0; r < a.size(); ++r) {
            if (a[r].dot(s) < b[r] - 1e-9) {
                return true;
            }
        }
        for (const auto &v : verts) {
            if (sup_distance(v, s) <= 1e-9) {
                return true;
            }
        }
        verts.push_back(s);
        return true;
    });
    return verts;
}

struct StrongRepeatabilityWitness {
    std::size_t outcome;
    Vec rho;
    Vec sigma;
};

/// Random search for rho, sigma with 0 <= sigma <= M_x rho but M_x sigma != sigma.
inline std::optional<StrongRepeatabilityWitness>
strong_repeatability_falsifier(const MeasurementProcess &proc, std::size_t trials, std::uint64_t seed,
                               double tol = 1e-7) {
    const auto &sys = *proc.system();
    std::mt19937_64 rng(seed);
    std::gamma_distribution<double> gam(1.0, 1.0);
    const auto n = sys.generators().size();
    for (std::size_t t = 0; t < trials; ++t) {
        Vec w(static_cast<Eigen::Index>(n));
        for (auto &x : w) {
            x = gam(rng);
        }
        const Vec rho = sys.generator_matrix() * (w / w.sum());
        for (std::size_t x = 0; x < proc.size(); ++x) {
            const Mat &m = proc.maps()[x].matrix();
            const Vec tau = m * rho;
            const auto verts = order_interval_vertices(sys, tau);
            std::vector<Vec> candidates = verts;
            Vec mix = Vec::Zero(sys.dim());
            double tot = 0.0;
            for (const auto &v : verts) {
                const double c = gam(rng);
                mix += c * v;
                tot += c;
            }
            if (tot > 0) {
                candidates.push_back(mix / tot);
            }
            for (const auto &s : candidates) {
                if (sup_distance(m * s, s) > tol) {
                    return StrongRepeatabilityWitness{x, rho, s};
                }
            }
        }
    }
    return std::nullopt;
}

/// A measurement with e_x(rho_x') = delta, or nothing. Prefers an enumerated
/// fine-grained one; otherwise solves the LP over effects in the dual cone.
inline std::optional<Measurement> perfectly_distinguishable(const std::vector<State> &states) {
    require(!states.empty(), ErrorCode::invalid_argument, "no states");
    const SystemPtr sys = states.front().system();
    for (const auto &s : states) {
        require(s.system() == sys, ErrorCode::invalid_argument, "states on different systems");
    }
    const std::size_t k = states.size();
    for (const auto &m : enumerate_fine_grained(sys)) {
        if (m.size() != k) {
            continue;
        }
        std::vector<std::size_t> owner(k, k);
        bool ok = true;
        for (std::size_t j = 0; j < k && ok; ++j) {
            for (std::size_t x = 0; x < k && ok; ++x) {
                const double v = m.effects()[j](states[x]);
                if (std::abs(v - 1.0) <= kTol) {
                    ok = owner[j] == k;
                    owner[j] = x;
                } else if (std::abs(v) > kTol) {
                    ok = false;
                }
            }
            ok = ok && owner[j] < k;
        }
        if (!ok) {
            continue;
        }
        std::vector<Effect> effects(k, Effect::unit(sys));
        std::vector<bool> used(k, false);
        for (std::size_t j = 0; j < k; ++j) {
            if (used[owner[j]]) {
                ok = false;
                break;
            }
            used[owner[j]] = true;
            effects[owner[j]] = m.effects()[j];
        }
        if (ok) {
            return Measurement(sys, std::move(effects));
        }
    }

    const auto &rays = sys->dual_rays();
    const auto r = static_cast<Eigen::Index>(rays.size());
    const auto kk = static_cast<Eigen::Index>(k);
    const Eigen::Index d = sys->dim();
    Mat a = Mat::Zero(kk * kk + d, kk * r);
    Vec b = Vec::Zero(kk * kk + d);
    for (Eigen::Index x = 0; x < kk; ++x) {
        for (Eigen::Index y = 0; y < kk; ++y) {
            for (Eigen::Index i = 0; i < r; ++i) {
                a(x * kk + y, x * r + i) = rays[static_cast<std::size_t>(i)].dot(states[static_cast<std::size_t>(y)].coords());
            }
            b(x * kk + y) = x == y ? 1.0 : 0.0;
        }
        for (Eigen::Index i = 0; i < r; ++i) {
            a.block(kk * kk, x * r + i, d, 1) = rays[static_cast<std::size_t>(i)];
        }
    }
    b.tail(d) = sys->unit();
    const auto res = lp::feasible_point(a, b);
    if (res.status != lp::Status::optimal) {
        return std::nullopt;
    }
    std::vector<Effect> effects;
    for (Eigen::Index x = 0; x < kk; ++x) {
        Vec f = Vec::Zero(d);
        for (Eigen::Index i = 0; i < r; ++i) {
            f += res.x(x * r + i) * rays[static_cast<std::size_t>(i)];
        }
        effects.emplace_back(sys, f, 1e-8);
    }
    return Measurement(sys, detail::numbered_labels(k), std::move(effects), 1e-8);
}

/// M_x = rho_x e_x^T.
inline MeasurementProcess measure_and_prepare(const std::vector<State> &states, const Measurement &m) {
    require(states.size() == m.size(), ErrorCode::invalid_argument, "one state per outcome required");
    const SystemPtr &sys = m.system();
    for (std::size_t x = 0; x < states.size(); ++x) {
        for (std::size_t y = 0; y < states.size(); ++y) {
            const double v = m.effects()[x](states[y]);
            require(std::abs(v - (x == y ? 1.0 : 0.0)) <= kTol, ErrorCode::not_distinguishable,
                    "effect " + std::to_string(x) + " on state " + std::to_string(y) + " is " + std::to_string(v));
        }
    }
    std::vector<PositiveMap> maps;
    for (std::size_t x = 0; x < states.size(); ++x) {
        maps.emplace_back(sys, sys, states[x].coords() * m.effects()[x].functional().transpose(), false);
    }
    return {sys, m.labels(), maps};
}

} // namespace gpt
