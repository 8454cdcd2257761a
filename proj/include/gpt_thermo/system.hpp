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

#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "linalg.hpp"
#include "lp.hpp"

namespace gpt {

class GptSystem;
using SystemPtr = std::shared_ptr<const GptSystem>;

enum class SystemFamily { classical, polygon, direct_sum, custom };

/// Extreme rays of the dual of cone(gens) in R^dim by brute-force facet search.
/// Each returned ray is scaled so its maximum over `gens` is 1.
inline std::vector<Vec> facet_normals(const std::vector<Vec> &gens, Eigen::Index dim) {
    std::vector<Vec> rays;
    if (dim == 1) {
        Vec f(1);
        f(0) = gens.front()(0) > 0 ? 1.0 : -1.0;
        rays.push_back(f);
    } else {
        for_each_subset(gens.size(), static_cast<std::size_t>(dim - 1),
                        [&](const std::vector<std::size_t> &idx) {
                            Mat rows(dim - 1, dim);
                            for (std::size_t r = 0; r < idx.size(); ++r) {
                                rows.row(static_cast<Eigen::Index>(r)) = gens[idx[r]].transpose();
                            }
                            Eigen::FullPivLU<Mat> lu(rows);
                            lu.setThreshold(1e-10);
                            if (lu.rank() != dim - 1) {
                                return true;
                            }
                            Vec nrm = lu.kernel().col(0);
                            double lo = 0.0;
                            double hi = 0.0;
                            for (const auto &g : gens) {
                                const double v = nrm.dot(g) / nrm.norm() / g.norm();
                                lo = std::min(lo, v);
                                hi = std::max(hi, v);
                            }
                            if (lo < -1e-9 && hi > 1e-9) {
                                return true;
                            }
                            if (hi <= 1e-9) {
                                nrm = -nrm;
                            }
                            for (const auto &r : rays) {
                                if (same_ray(r, nrm)) {
                                    return true;
                                }
                            }
                            rays.push_back(nrm);
                            return true;
                        });
    }
    for (auto &r : rays) {
        double mx = 0.0;
        for (const auto &g : gens) {
            mx = std::max(mx, r.dot(g));
        }
        r /= mx;
    }
    return rays;
}

/// Polyhedral cone with a unit effect. Immutable; dual rays are computed once on construction.
class GptSystem {
  public:
    struct Branch {
        std::string label;
        SystemPtr system;
        Eigen::Index offset;
    };

    static SystemPtr classical(std::size_t n) {
        require(n >= 1, ErrorCode::invalid_argument, "classical system needs n >= 1");
        const auto d = static_cast<Eigen::Index>(n);
        std::vector<Vec> gens;
        for (Eigen::Index i = 0; i < d; ++i) {
            gens.push_back(Vec::Unit(d, i));
        }
        auto s = std::shared_ptr<GptSystem>(new GptSystem(SystemFamily::classical, gens,
                                                          Vec::Ones(d),
                                                          "classical(" + std::to_string(n) + ")"));
        s->dual_rays_ = gens;
        s->finish();
        return s;
    }

    static SystemPtr polygon(std::size_t n) {
        require(n >= 3, ErrorCode::invalid_argument, "polygon needs n >= 3");
        std::vector<Vec> gens;
        for (std::size_t k = 0; k < n; ++k) {
            const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
            Vec g(3);
            g << std::cos(a), std::sin(a), 1.0;
            gens.push_back(g);
        }
        std::string name = n == 4 ? "square" : n == 6 ? "hexagon" : "polygon(" + std::to_string(n) + ")";
        Vec unit(3);
        unit << 0.0, 0.0, 1.0;
        auto s = std::shared_ptr<GptSystem>(new GptSystem(SystemFamily::polygon, gens, unit, name));
        s->order_ = n;
        for (std::size_t k = 0; k < n; ++k) {
            const Vec &a = gens[k];
            const Vec &b = gens[(k + 1) % n];
            Vec f(3);
            f << a(1) * b(2) - a(2) * b(1), a(2) * b(0) - a(0) * b(2), a(0) * b(1) - a(1) * b(0);
            if (f.dot(gens[(k + 2) % n]) < 0) {
                f = -f;
            }
            double mx = 0.0;
            for (const auto &g : gens) {
                mx = std::max(mx, f.dot(g));
            }
            s->dual_rays_.push_back(f / mx);
        }
        s->finish();
        return s;
    }

    /// Generators are rescaled to unit.g = 1. Only dim <= 4 is supported here.
    static SystemPtr custom(std::vector<Vec> generators, const Vec &unit, std::string name = "custom") {
        require(!generators.empty(), ErrorCode::invalid_argument, "no generators");
        const Eigen::Index d = unit.size();
        require(d >= 1, ErrorCode::invalid_argument, "empty unit");
        for (auto &g : generators) {
            require(g.size() == d, ErrorCode::invalid_argument, "generator length differs from unit");
            const double w = unit.dot(g);
            require(w > kTol, ErrorCode::invalid_argument, "unit is not strictly positive on a generator");
            g /= w;
        }
        require(d <= 4, ErrorCode::unsupported_dimension,
                "custom cones are limited to dim <= 4 (got " + std::to_string(d) + ")");
        for (std::size_t i = 0; i < generators.size(); ++i) {
            for (std::size_t j = 0; j < i; ++j) {
                require(sup_distance(generators[i], generators[j]) > kTol, ErrorCode::invalid_argument,
                        "duplicate generator ray");
            }
        }
        auto s = std::shared_ptr<GptSystem>(new GptSystem(SystemFamily::custom, generators, unit, std::move(name)));
        require(numeric_rank(s->generator_matrix()) == d, ErrorCode::degenerate_cone,
                "generators do not span the space");
        for (std::size_t i = 0; i < generators.size(); ++i) {
            std::vector<Vec> others;
            for (std::size_t j = 0; j < generators.size(); ++j) {
                if (j != i) {
                    others.push_back(generators[j]);
                }
            }
            if (!others.empty()) {
                auto r = lp::feasible_point(columns(others, d), generators[i]);
                require(r.status != lp::Status::optimal, ErrorCode::invalid_argument,
                        "generator " + std::to_string(i) + " is not an extreme ray");
            }
        }
        s->dual_rays_ = facet_normals(generators, d);
        s->finish();
        return s;
    }

    static SystemPtr direct_sum(const std::vector<std::pair<std::string, SystemPtr>> &parts) {
        require(!parts.empty(), ErrorCode::invalid_argument, "direct sum of nothing");
        Eigen::Index d = 0;
        for (const auto &p : parts) {
            require(p.second != nullptr, ErrorCode::invalid_argument, "null branch system");
            d += p.second->dim();
        }
        Vec unit(d);
        std::vector<Vec> gens;
        std::vector<Vec> duals;
        std::vector<Branch> branches;
        std::string name;
        Eigen::Index off = 0;
        for (const auto &[label, sys] : parts) {
            const Eigen::Index bd = sys->dim();
            unit.segment(off, bd) = sys->unit();
            for (const auto &g : sys->generators()) {
                Vec e = Vec::Zero(d);
                e.segment(off, bd) = g;
                gens.push_back(e);
            }
            for (const auto &f : sys->dual_rays()) {
                Vec e = Vec::Zero(d);
                e.segment(off, bd) = f;
                duals.push_back(e);
            }
            branches.push_back({label, sys, off});
            name += (name.empty() ? "" : "+") + sys->name();
            off += bd;
        }
        auto s = std::shared_ptr<GptSystem>(new GptSystem(SystemFamily::direct_sum, gens, unit, "sum(" + name + ")"));
        s->dual_rays_ = std::move(duals);
        s->branches_ = std::move(branches);
        s->finish();
        return s;
    }

    [[nodiscard]] Eigen::Index dim() const { return unit_.size(); }
    [[nodiscard]] const std::vector<Vec> &generators() const { return generators_; }
    [[nodiscard]] const Vec &unit() const { return unit_; }
    [[nodiscard]] const std::string &name() const { return name_; }
    [[nodiscard]] const std::vector<Vec> &dual_rays() const { return dual_rays_; }
    [[nodiscard]] SystemFamily family() const { return family_; }
    /// Number of vertices for polygons, 0 otherwise.
    [[nodiscard]] std::size_t polygon_order() const { return order_; }
    [[nodiscard]] const std::vector<Branch> &branches() const { return branches_; }
    [[nodiscard]] const Mat &generator_matrix() const { return gen_matrix_; }

    /// True when every branch of a direct sum is classical, or the system itself is.
    [[nodiscard]] bool is_classical() const {
        if (family_ == SystemFamily::classical) {
            return true;
        }
        if (family_ != SystemFamily::direct_sum) {
            return false;
        }
        for (const auto &b : branches_) {
            if (!b.system->is_classical()) {
                return false;
            }
        }
        return true;
    }

  private:
    GptSystem(SystemFamily fam, std::vector<Vec> gens, Vec unit, std::string name)
        : family_{fam}, generators_{std::move(gens)}, unit_{std::move(unit)}, name_{std::move(name)} {
        gen_matrix_ = columns(generators_, unit_.size());
    }

    void finish() {
        require(numeric_rank(gen_matrix_) == dim(), ErrorCode::degenerate_cone, "generators do not span");
        require(!dual_rays_.empty(), ErrorCode::degenerate_cone, "no dual rays found");
        for (const auto &g : generators_) {
            require(unit_.dot(g) > kTol, ErrorCode::invalid_argument, "unit not positive on generator");
        }
    }

    SystemFamily family_;
    std::vector<Vec> generators_;
    Vec unit_;
    std::string name_;
    std::vector<Vec> dual_rays_;
    std::vector<Branch> branches_;
    std::size_t order_{0};
    Mat gen_matrix_;
};

inline SystemPtr make_classical(std::size_t n) { return GptSystem::classical(n); }
inline SystemPtr make_polygon(std::size_t n) { return GptSystem::polygon(n); }
inline SystemPtr direct_sum(const std::vector<std::pair<std::string, SystemPtr>> &parts) {
    return GptSystem::direct_sum(parts);
}

/// X.A: |X| labelled copies of `a`.
inline SystemPtr classical_times(std::size_t labels, const SystemPtr &a) {
    std::vector<std::pair<std::string, SystemPtr>> parts;
    for (std::size_t x = 0; x < labels; ++x) {
        parts.emplace_back(std::to_string(x), a);
    }
    return direct_sum(parts);
}

inline bool cone_contains(const GptSystem &sys, const Vec &v, double tol = kTol) {
    require(v.size() == sys.dim(), ErrorCode::invalid_argument, "dimension mismatch");
    for (const auto &f : sys.dual_rays()) {
        if (f.dot(v) < -tol) {
            return false;
        }
    }
    return true;
}

inline const std::vector<Vec> &dual_extreme_rays(const GptSystem &sys) { return sys.dual_rays(); }

/// LP check of pointedness: no a, b >= 0 with sum a = 1 and G a + G b = 0.
inline bool is_pointed(const GptSystem &sys) {
    const Mat &g = sys.generator_matrix();
    const Eigen::Index n = g.cols();
    const Eigen::Index d = g.rows();
    Mat a = Mat::Zero(d + 1, 2 * n);
    a.topLeftCorner(d, n) = g;
    a.topRightCorner(d, n) = g;
    a.row(d).head(n).setOnes();
    Vec b = Vec::Zero(d + 1);
    b(d) = 1.0;
    return lp::feasible_point(a, b).status != lp::Status::optimal;
}

/// Centre of the generators; a convenient interior state.
inline Vec barycenter(const GptSystem &sys) {
    return sys.generator_matrix().rowwise().mean();
}

} // namespace gpt
