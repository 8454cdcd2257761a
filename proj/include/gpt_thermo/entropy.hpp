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

#include <algorithm>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "measurement.hpp"

namespace gpt {

/// Shannon entropy in nats. Entries above -tol are clamped to [0,1] and renormalized.
inline double shannon(const std::vector<double> &p, double tol = kTol) {
    require(!p.empty(), ErrorCode::invalid_distribution, "empty distribution");
    double total = 0.0;
    for (double x : p) {
        require(x >= -tol, ErrorCode::invalid_distribution, "negative probability " + std::to_string(x));
        total += std::clamp(x, 0.0, 1.0);
    }
    require(std::abs(total - 1.0) <= tol * static_cast<double>(p.size()) + tol, ErrorCode::invalid_distribution,
            "probabilities sum to " + std::to_string(total));
    double h = 0.0;
    for (double x : p) {
        h += neg_xlogx(std::clamp(x, 0.0, 1.0) / total);
    }
    return h;
}

inline double shannon(const Vec &p, double tol = kTol) { return shannon(to_std(p), tol); }

/// -sum w log w for nonnegative weights, no normalization (bookkeeping of sub-distributions).
inline double weight_entropy(const std::vector<double> &w) {
    double h = 0.0;
    for (double x : w) {
        h += neg_xlogx(std::max(x, 0.0));
    }
    return h;
}

/// I(X:Y) of a joint distribution p(x, y) (rows x, columns y).
inline double mutual_information(const Mat &joint) {
    const Vec px = joint.rowwise().sum();
    const Vec py = joint.colwise().sum().transpose();
    double i = 0.0;
    for (Eigen::Index x = 0; x < joint.rows(); ++x) {
        for (Eigen::Index y = 0; y < joint.cols(); ++y) {
            const double p = joint(x, y);
            if (p > 0.0) {
                i += p * std::log(p / (px(x) * py(y)));
            }
        }
    }
    return std::max(i, 0.0);
}

/// A decomposition of a state into vertices (generator indices) with weights.
struct Decomposition {
    std::vector<std::size_t> vertices;
    std::vector<double> weights;
};

inline std::string describe(const Decomposition &d) {
    std::ostringstream os;
    os.precision(12);
    for (std::size_t i = 0; i < d.vertices.size(); ++i) {
        os << (i ? " + " : "") << d.weights[i] << "*v" << d.vertices[i];
    }
    return os.str();
}

/// Exact S_mix, S_meas, S_acc and I_acc on one system by support enumeration.
/// The fine-grained measurement set is enumerated once, on construction.
class EntropyCalculator {
  public:
    struct MixResult {
        double value;
        Decomposition decomposition;
    };
    struct MeasResult {
        double value;
        std::size_t measurement;
        std::vector<double> distribution;
    };
    struct AccResult {
        double value;
        std::size_t measurement;
        Decomposition ensemble;
    };

    explicit EntropyCalculator(SystemPtr sys) : sys_{std::move(sys)}, fg_{enumerate_fine_grained(sys_)} {
        require(!fg_.empty(), ErrorCode::internal_error, "no fine-grained measurement found");
        const auto &gens = sys_->generators();
        for (const auto &m : fg_) {
            Mat e(static_cast<Eigen::Index>(m.size()), sys_->dim());
            for (std::size_t j = 0; j < m.size(); ++j) {
                e.row(static_cast<Eigen::Index>(j)) = m.effects()[j].functional().transpose();
            }
            std::vector<double> hv;
            for (const auto &g : gens) {
                hv.push_back(outcome_entropy(e, g));
            }
            effect_rows_.push_back(std::move(e));
            vertex_entropy_.push_back(std::move(hv));
        }
        double count = 0.0;
        const auto d = static_cast<std::size_t>(sys_->dim());
        for (std::size_t k = 1; k <= std::min(d, gens.size()); ++k) {
            count += binomial(gens.size(), k);
        }
        require(count <= kMaxSubsets, ErrorCode::unsupported_system,
                "too many vertex subsets to enumerate for " + sys_->name());
    }

    [[nodiscard]] const SystemPtr &system() const { return sys_; }
    [[nodiscard]] const std::vector<Measurement> &fine_grained() const { return fg_; }

    /// All decompositions of coords (a state) into affinely independent vertex sets.
    [[nodiscard]] std::vector<Decomposition> decompositions(const Vec &coords) const {
        const auto &gens = sys_->generators();
        const auto d = static_cast<std::size_t>(sys_->dim());
        std::vector<Decomposition> out;
        const double scale = 1.0 + coords.cwiseAbs().maxCoeff();
        for (std::size_t k = 1; k <= std::min(d, gens.size()); ++k) {
            for_each_subset(gens.size(), k, [&](const std::vector<std::size_t> &idx) {
                Mat g(sys_->dim(), static_cast<Eigen::Index>(k));
                for (std::size_t j = 0; j < k; ++j) {
                    g.col(static_cast<Eigen::Index>(j)) = gens[idx[j]];
                }
                Eigen::ColPivHouseholderQR<Mat> qr(g);
                qr.setThreshold(1e-10);
                if (qr.rank() != static_cast<Eigen::Index>(k)) {
                    return true;
                }
                const Vec w = qr.solve(coords);
                if ((g * w - coords).cwiseAbs().maxCoeff() > 1e-8 * scale || w.minCoeff() <= 1e-13) {
                    return true;
                }
                out.push_back({idx, to_std(w)});
                return true;
            });
        }
        require(!out.empty(), ErrorCode::internal_error, "state has no vertex decomposition");
        return out;
    }

    [[nodiscard]] MixResult mix(const State &s) const {
        check_system(s);
        MixResult best{std::numeric_limits<double>::infinity(), {}};
        for (auto &dec : decompositions(s.coords())) {
            const double h = shannon(dec.weights, 1e-7);
            if (h < best.value) {
                best = {h, std::move(dec)};
            }
        }
        return best;
    }

    [[nodiscard]] MeasResult meas(const State &s) const {
        check_system(s);
        MeasResult best{std::numeric_limits<double>::infinity(), 0, {}};
        for (std::size_t m = 0; m < fg_.size(); ++m) {
            const Vec q = effect_rows_[m] * s.coords();
            const double h = shannon(q, 1e-7);
            if (h < best.value) {
                best = {h, m, to_std(q)};
            }
        }
        return best;
    }

    /// max over (extreme decomposition w, fine-grained m) of H(m(rho)) - sum_v w_v H(m(v)).
    [[nodiscard]] AccResult acc(const State &s) const {
        check_system(s);
        const auto decs = decompositions(s.coords());
        AccResult best{-std::numeric_limits<double>::infinity(), 0, {}};
        for (std::size_t m = 0; m < fg_.size(); ++m) {
            const double hq = shannon(Vec(effect_rows_[m] * s.coords()), 1e-7);
            double lo = std::numeric_limits<double>::infinity();
            std::size_t arg = 0;
            for (std::size_t di = 0; di < decs.size(); ++di) {
                double c = 0.0;
                for (std::size_t j = 0; j < decs[di].vertices.size(); ++j) {
                    c += decs[di].weights[j] * vertex_entropy_[m][decs[di].vertices[j]];
                }
                if (c < lo) {
                    lo = c;
                    arg = di;
                }
            }
            if (hq - lo > best.value) {
                best = {hq - lo, m, decs[arg]};
            }
        }
        best.value = std::max(best.value, 0.0);
        return best;
    }

    /// Accessible information of an ensemble (branches on this system).
    [[nodiscard]] double i_acc(const DirectSumState &ens) const {
        double best = 0.0;
        for (const auto &e : effect_rows_) {
            Mat joint(static_cast<Eigen::Index>(ens.size()), e.rows());
            for (std::size_t x = 0; x < ens.size(); ++x) {
                require(ens.branches()[x].system()->dim() == sys_->dim(), ErrorCode::invalid_argument,
                        "ensemble branch on another system");
                joint.row(static_cast<Eigen::Index>(x)) = (e * ens.branches()[x].coords()).cwiseMax(0.0).transpose();
            }
            best = std::max(best, mutual_information(joint / joint.sum()));
        }
        return best;
    }

    /// Mutual information for members given as raw coordinate vectors (sum = state).
    [[nodiscard]] double i_acc(const std::vector<Vec> &members) const {
        double best = 0.0;
        for (const auto &e : effect_rows_) {
            Mat joint(static_cast<Eigen::Index>(members.size()), e.rows());
            for (std::size_t x = 0; x < members.size(); ++x) {
                joint.row(static_cast<Eigen::Index>(x)) = (e * members[x]).cwiseMax(0.0).transpose();
            }
            const double tot = joint.sum();
            if (tot > 0) {
                best = std::max(best, mutual_information(joint / tot));
            }
        }
        return best;
    }

  private:
    static double outcome_entropy(const Mat &e, const Vec &g) {
        double h = 0.0;
        const Vec q = e * g;
        for (Eigen::Index i = 0; i < q.size(); ++i) {
            h += neg_xlogx(std::clamp(q(i), 0.0, 1.0));
        }
        return h;
    }

    void check_system(const State &s) const {
        require(s.system()->dim() == sys_->dim() && s.system()->name() == sys_->name(), ErrorCode::invalid_argument,
                "state belongs to " + s.system()->name() + ", calculator to " + sys_->name());
    }

    SystemPtr sys_;
    std::vector<Measurement> fg_;
    std::vector<Mat> effect_rows_;
    std::vector<std::vector<double>> vertex_entropy_;
};

using CalculatorPtr = std::shared_ptr<const EntropyCalculator>;
using EntropyFunction = std::function<double(const State &)>;

inline double s_mix(const State &s) { return EntropyCalculator(s.system()).mix(s).value; }
inline double s_meas(const State &s) { return EntropyCalculator(s.system()).meas(s).value; }
inline double s_acc(const State &s) { return EntropyCalculator(s.system()).acc(s).value; }
inline double i_acc(const DirectSumState &ens) {
    require(ens.is_ensemble(), ErrorCode::invalid_argument, "branches live on different systems");
    return EntropyCalculator(ens.branches().front().system()).i_acc(ens);
}

/// Shannon entropy of a classical state's coordinates.
inline EntropyFunction shannon_entropy() {
    return [](const State &s) {
        require(s.system()->is_classical(), ErrorCode::unsupported_system, "Shannon entropy needs a classical system");
        return shannon(s.coords(), 1e-7);
    };
}

inline EntropyFunction zero_entropy() {
    return [](const State &) { return 0.0; };
}

/// H(weights) + sum_x w_x base(normalized branch x).
inline double s_extended(const EntropyFunction &base, const DirectSumState &ens) {
    const auto w = ens.weights();
    return shannon(w, 1e-7) + expectation(ens, [&](std::size_t, const State &s) { return base(s); });
}

enum class EntropyTag { mix, meas, acc, induced, extended };

struct EntropyKind {
    EntropyTag tag{EntropyTag::meas};
    std::shared_ptr<const EntropyKind> of{};
    /// Reporting base; all internal values are in nats.
    double log_base{std::numbers::e};

    static EntropyKind simple(EntropyTag t) { return {t, nullptr, std::numbers::e}; }
    static EntropyKind wrap(EntropyTag t, const EntropyKind &inner) {
        require(t == EntropyTag::induced || t == EntropyTag::extended, ErrorCode::invalid_argument,
                "only induced/extended wrap another kind");
        return {t, std::make_shared<const EntropyKind>(inner), inner.log_base};
    }

    [[nodiscard]] double in_base(double nats) const { return nats / std::log(log_base); }
};

inline std::string to_string(const EntropyKind &k) {
    switch (k.tag) {
    case EntropyTag::mix:
        return "mix";
    case EntropyTag::meas:
        return "meas";
    case EntropyTag::acc:
        return "acc";
    case EntropyTag::induced:
        return "induced(" + to_string(*k.of) + ")";
    case EntropyTag::extended:
        return "extended(" + to_string(*k.of) + ")";
    }
    return "?";
}

struct InducedOptions {
    std::size_t budget{8};
    std::size_t steps{60};
    std::uint64_t seed{0x5eed};
};

/// Lower bound on S'(rho) = sup over ensembles of I_acc + <base>. Exact at the pure-ensemble
/// seeds; a seeded local search over general ensembles can only raise it.
inline double s_induced(const EntropyCalculator &calc, const EntropyFunction &base, const State &rho,
                        const InducedOptions &opt = {}) {
    require(opt.budget > 0, ErrorCode::invalid_argument, "budget must be positive");
    const auto &sys = calc.system();
    const auto &gens = sys->generators();
    const auto n = gens.size();
    const auto decs = calc.decompositions(rho.coords());

    const auto value_of = [&](const std::vector<Vec> &members) {
        std::vector<Vec> kept;
        double avg = 0.0;
        for (const auto &m : members) {
            const double w = sys->unit().dot(m);
            if (w > 1e-12) {
                kept.push_back(m);
                avg += w * base(State(sys, m / w, 1e-7));
            }
        }
        return calc.i_acc(kept) + avg;
    };

    double best = base(rho);
    for (const auto &d : decs) {
        std::vector<Vec> members;
        for (std::size_t j = 0; j < d.vertices.size(); ++j) {
            members.push_back(d.weights[j] * gens[d.vertices[j]]);
        }
        best = std::max(best, value_of(members));
    }

    const std::size_t slots = 2 * static_cast<std::size_t>(sys->dim());
    std::mt19937_64 rng(opt.seed);
    std::gamma_distribution<double> gam(1.0, 1.0);
    std::normal_distribution<double> nrm(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick_dec(0, decs.size() - 1);

    // lambda: mixing weights over extreme decompositions; split(k, v): share of vertex v in slot k
    const auto members_of = [&](const std::vector<double> &lambda, const Mat &split) {
        Vec wv = Vec::Zero(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < decs.size(); ++i) {
            for (std::size_t j = 0; j < decs[i].vertices.size(); ++j) {
                wv(static_cast<Eigen::Index>(decs[i].vertices[j])) += lambda[i] * decs[i].weights[j];
            }
        }
        std::vector<Vec> members;
        for (Eigen::Index k = 0; k < split.rows(); ++k) {
            Vec m = Vec::Zero(sys->dim());
            for (std::size_t v = 0; v < n; ++v) {
                m += split(k, static_cast<Eigen::Index>(v)) * wv(static_cast<Eigen::Index>(v)) * gens[v];
            }
            members.push_back(m);
        }
        return members;
    };

    for (std::size_t r = 0; r < opt.budget; ++r) {
        std::vector<double> lambda(decs.size(), 0.0);
        lambda[pick_dec(rng)] = 1.0;
        if (r % 2 == 1) {
            double t = 0.0;
            for (auto &l : lambda) {
                l = gam(rng);
                t += l;
            }
            for (auto &l : lambda) {
                l /= t;
            }
        }
        Mat split(static_cast<Eigen::Index>(slots), static_cast<Eigen::Index>(n));
        for (Eigen::Index v = 0; v < split.cols(); ++v) {
            for (Eigen::Index k = 0; k < split.rows(); ++k) {
                split(k, v) = gam(rng);
            }
            split.col(v) /= split.col(v).sum();
        }
        double cur = value_of(members_of(lambda, split));
        double step = 0.5;
        for (std::size_t it = 0; it < opt.steps; ++it) {
            auto l2 = lambda;
            Mat s2 = split;
            if (decs.size() > 1 && it % 3 == 0) {
                const std::size_t i = pick_dec(rng);
                l2[i] = std::max(0.0, l2[i] + step * nrm(rng));
                double t = 0.0;
                for (double l : l2) {
                    t += l;
                }
                if (t <= 0) {
                    continue;
                }
                for (auto &l : l2) {
                    l /= t;
                }
            } else {
                const auto v = static_cast<Eigen::Index>(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
                for (Eigen::Index k = 0; k < s2.rows(); ++k) {
                    s2(k, v) = std::max(0.0, s2(k, v) + step * nrm(rng));
                }
                if (s2.col(v).sum() <= 0) {
                    continue;
                }
                s2.col(v) /= s2.col(v).sum();
            }
            const double val = value_of(members_of(l2, s2));
            if (val > cur) {
                cur = val;
                lambda = std::move(l2);
                split = std::move(s2);
            } else {
                step = std::max(step * 0.9, 1e-3);
            }
        }
        best = std::max(best, cur);
    }
    return best;
}

struct InfinityReport {
    /// values[j] = S^{(j+1)}(rho) where S^{(0)} = base.
    std::vector<double> values;
    double last_change{0.0};
    bool converged_claim{false};
};

/// Bounded iteration S, S', S'', ...; never claims convergence.
inline InfinityReport s_infinity(const CalculatorPtr &calc, const EntropyFunction &base, const State &rho,
                                 std::size_t iterations = 3, const InducedOptions &opt = {}) {
    InfinityReport rep;
    EntropyFunction level = base;
    for (std::size_t j = 0; j < iterations; ++j) {
        EntropyFunction prev = level;
        level = [calc, prev, opt](const State &s) { return s_induced(*calc, prev, s, opt); };
        rep.values.push_back(level(rho));
    }
    if (rep.values.size() >= 2) {
        rep.last_change = rep.values.back() - rep.values[rep.values.size() - 2];
    }
    return rep;
}

/// Entropy function of the given kind on calc's system.
inline EntropyFunction entropy_function(const EntropyKind &kind, const CalculatorPtr &calc,
                                        const InducedOptions &opt = {}) {
    switch (kind.tag) {
    case EntropyTag::mix:
        return [calc](const State &s) { return calc->mix(s).value; };
    case EntropyTag::meas:
        return [calc](const State &s) { return calc->meas(s).value; };
    case EntropyTag::acc:
        return [calc](const State &s) { return calc->acc(s).value; };
    case EntropyTag::induced: {
        auto inner = entropy_function(*kind.of, calc, opt);
        return [calc, inner, opt](const State &s) { return s_induced(*calc, inner, s, opt); };
    }
    case EntropyTag::extended: {
        const auto &sys = calc->system();
        require(sys->family() == SystemFamily::direct_sum, ErrorCode::unsupported_system,
                "extended entropy is defined on direct-sum systems");
        std::vector<EntropyFunction> parts;
        for (const auto &b : sys->branches()) {
            parts.push_back(entropy_function(*kind.of, std::make_shared<const EntropyCalculator>(b.system), opt));
        }
        return [parts](const State &s) {
            const auto ens = DirectSumState::split(s);
            return shannon(ens.weights(), 1e-7) +
                   expectation(ens, [&](std::size_t x, const State &b) { return parts[x](b); });
        };
    }
    }
    throw Error(ErrorCode::internal_error, "unknown entropy kind");
}

inline EntropyFunction entropy_function(const EntropyKind &kind, const SystemPtr &sys) {
    return entropy_function(kind, std::make_shared<const EntropyCalculator>(sys));
}

/// Random state: a vertex, a point on a vertex pair, or a Dirichlet mixture.
inline State random_state(const SystemPtr &sys, std::mt19937_64 &rng) {
    const auto n = sys->generators().size();
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::gamma_distribution<double> gam(1.0, 1.0);
    const double kind = uni(rng);
    if (kind < 0.1) {
        return State::vertex(sys, pick(rng));
    }
    if (kind < 0.45) {
        const double t = uni(rng);
        return {sys, t * sys->generators()[pick(rng)] + (1 - t) * sys->generators()[pick(rng)]};
    }
    Vec w(static_cast<Eigen::Index>(n));
    for (auto &x : w) {
        x = gam(rng);
    }
    return {sys, sys->generator_matrix() * (w / w.sum())};
}

struct ConcavityWitness {
    std::vector<State> members;
    std::vector<double> weights;
    /// S(mixture) - <S>, negative for a violation.
    double slack;
};

/// Searches for S(sum w_i s_i) < sum w_i S(s_i) - tol over random ensembles.
inline std::optional<ConcavityWitness> check_concavity(const EntropyFunction &s, const SystemPtr &sys,
                                                       std::size_t trials, std::uint64_t seed = 1,
                                                       double tol = kTol) {
    require(trials >= 1, ErrorCode::invalid_argument, "trials must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> count(2, 3);
    std::gamma_distribution<double> gam(1.0, 1.0);
    std::optional<ConcavityWitness> worst;
    for (std::size_t t = 0; t < trials; ++t) {
        const std::size_t k = count(rng);
        std::vector<State> members;
        std::vector<double> w;
        double tot = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            members.push_back(random_state(sys, rng));
            w.push_back(gam(rng));
            tot += w.back();
        }
        Vec mix = Vec::Zero(sys->dim());
        double avg = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            w[i] /= tot;
            mix += w[i] * members[i].coords();
            avg += w[i] * s(members[i]);
        }
        const double slack = s(State(sys, mix, 1e-8)) - avg;
        if (slack < -tol && (!worst || slack < worst->slack)) {
            worst = ConcavityWitness{members, w, slack};
        }
    }
    return worst;
}

/// S(ensemble as a direct-sum state) - [H(w) + <S>] for S in {mix, meas, acc}.
inline double check_direct_sum_consistency(EntropyTag tag, const DirectSumState &ens) {
    require(tag == EntropyTag::mix || tag == EntropyTag::meas || tag == EntropyTag::acc, ErrorCode::invalid_argument,
            "consistency check takes a plain entropy kind");
    std::vector<std::pair<std::string, SystemPtr>> parts;
    for (std::size_t x = 0; x < ens.size(); ++x) {
        parts.emplace_back(ens.labels()[x], ens.branches()[x].system());
    }
    const auto xa = direct_sum(parts);
    const auto kind = EntropyKind::simple(tag);
    const double joint = entropy_function(kind, xa)(ens.embed(xa));
    std::vector<EntropyFunction> branch;
    for (const auto &p : parts) {
        branch.push_back(entropy_function(kind, p.second));
    }
    const double split = shannon(ens.weights(), 1e-7) +
                         expectation(ens, [&](std::size_t x, const State &b) { return branch[x](b); });
    return joint - split;
}

} // namespace gpt
