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
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "entropy.hpp"

namespace gpt {

/// Affine energy: E(rho) = base * u(rho) + functional . rho.
struct EnergyFunction {
    SystemPtr system;
    Vec functional;
    double base{0.0};

    static EnergyFunction zero(const SystemPtr &sys) { return {sys, Vec::Zero(sys->dim()), 0.0}; }
    /// Level energies of a classical system.
    static EnergyFunction levels(const SystemPtr &sys, const Vec &e) {
        require(sys->family() == SystemFamily::classical && e.size() == sys->dim(), ErrorCode::invalid_argument,
                "level energies need a classical system of matching size");
        return {sys, e, 0.0};
    }

    [[nodiscard]] double operator()(const Vec &coords) const {
        return base * system->unit().dot(coords) + functional.dot(coords);
    }
    [[nodiscard]] double operator()(const State &s) const { return (*this)(s.coords()); }
};

/// Canonical distribution p_x proportional to exp(-beta E_x).
inline State gibbs_state(const SystemPtr &sys, const Vec &levels, double beta) {
    require(sys->family() == SystemFamily::classical, ErrorCode::unsupported_system,
            "canonical states are only provided for classical systems");
    require(beta > 0, ErrorCode::invalid_argument, "beta must be positive");
    require(levels.size() == sys->dim(), ErrorCode::invalid_argument, "one energy per level");
    const double lo = levels.minCoeff();
    Vec p = (-beta * (levels.array() - lo)).exp().matrix();
    return {sys, p / p.sum()};
}

inline State gibbs_state(const EnergyFunction &e, double beta) {
    require(e.system->family() == SystemFamily::classical, ErrorCode::unsupported_system,
            "canonical states are only provided for classical systems");
    return gibbs_state(e.system, (e.functional.array() + e.base).matrix(), beta);
}

/// F = E - S / beta.
inline double free_energy(const State &rho, const EnergyFunction &e, const EntropyFunction &s, double beta) {
    require(beta > 0, ErrorCode::invalid_argument, "beta must be positive");
    return e(rho) - s(rho) / beta;
}

struct Register {
    std::string name;
    std::size_t size;
};

/// State of (classical registers) x A stored as one A-substate per classical multi-index.
class CompositeState {
  public:
    CompositeState(SystemPtr a, std::vector<Register> regs, std::vector<Vec> blocks)
        : a_{std::move(a)}, regs_{std::move(regs)}, blocks_{std::move(blocks)} {
        require(blocks_.size() == count(regs_), ErrorCode::invalid_argument, "block count mismatch");
        double tot = 0.0;
        for (const auto &b : blocks_) {
            require(b.size() == a_->dim(), ErrorCode::invalid_argument, "block of wrong dimension");
            require(cone_contains(*a_, b, 1e-8), ErrorCode::positivity_violation, "block outside the cone");
            tot += a_->unit().dot(b);
        }
        require(std::abs(tot - 1.0) <= 1e-8, ErrorCode::invalid_distribution, "composite state not normalized");
    }

    /// rho_A tensor p_1 tensor p_2 ...
    static CompositeState product(const State &rho_a, const std::vector<std::pair<Register, Vec>> &parts) {
        std::vector<Register> regs;
        for (const auto &p : parts) {
            require(p.second.size() == static_cast<Eigen::Index>(p.first.size), ErrorCode::invalid_argument,
                    "distribution size differs from register " + p.first.name);
            regs.push_back(p.first);
        }
        std::vector<Vec> blocks(count(regs));
        for (std::size_t f = 0; f < blocks.size(); ++f) {
            const auto idx = unflatten(regs, f);
            double w = 1.0;
            for (std::size_t r = 0; r < regs.size(); ++r) {
                w *= parts[r].second(static_cast<Eigen::Index>(idx[r]));
            }
            blocks[f] = w * rho_a.coords();
        }
        return {rho_a.system(), regs, blocks};
    }

    [[nodiscard]] const SystemPtr &a_system() const { return a_; }
    [[nodiscard]] const std::vector<Register> &registers() const { return regs_; }
    [[nodiscard]] const std::vector<Vec> &blocks() const { return blocks_; }

    [[nodiscard]] std::size_t position(const std::string &name) const {
        for (std::size_t r = 0; r < regs_.size(); ++r) {
            if (regs_[r].name == name) {
                return r;
            }
        }
        throw Error(ErrorCode::invalid_argument, "no register named " + name);
    }

    /// Unnormalized A-substates conditioned on the listed registers (flattened in list order).
    [[nodiscard]] std::vector<Vec> a_given(const std::vector<std::string> &names) const {
        std::vector<std::size_t> pos;
        std::vector<Register> sub;
        for (const auto &n : names) {
            pos.push_back(position(n));
            sub.push_back(regs_[pos.back()]);
        }
        std::vector<Vec> out(count(sub), Vec::Zero(a_->dim()));
        for (std::size_t f = 0; f < blocks_.size(); ++f) {
            const auto idx = unflatten(regs_, f);
            std::vector<std::size_t> s;
            for (auto p : pos) {
                s.push_back(idx[p]);
            }
            out[flatten(sub, s)] += blocks_[f];
        }
        return out;
    }

    [[nodiscard]] std::vector<double> marginal(const std::vector<std::string> &names) const {
        std::vector<double> p;
        for (const auto &b : a_given(names)) {
            p.push_back(a_->unit().dot(b));
        }
        return p;
    }

    [[nodiscard]] State a_marginal() const {
        Vec t = Vec::Zero(a_->dim());
        for (const auto &b : blocks_) {
            t += b;
        }
        return {a_, t / a_->unit().dot(t), 1e-8};
    }

    /// Shannon entropy of the classical registers listed.
    [[nodiscard]] double shannon_of(const std::vector<std::string> &names) const {
        return shannon(marginal(names), 1e-7);
    }

    /// H(listed registers) + <S_A(A | listed registers)>.
    [[nodiscard]] double extended_of(const std::vector<std::string> &names, const EntropyFunction &s_a) const {
        double h = 0.0;
        for (const auto &b : a_given(names)) {
            const double w = a_->unit().dot(b);
            if (w > 1e-15) {
                h += neg_xlogx(w) + w * s_a(State(a_, b / w, 1e-7));
            }
        }
        return h;
    }

    /// Mean energy of register `name` with the given level energies.
    [[nodiscard]] double register_energy(const std::string &name, const Vec &levels) const {
        const auto p = marginal({name});
        require(levels.size() == static_cast<Eigen::Index>(p.size()), ErrorCode::invalid_argument,
                "energy levels differ from register " + name);
        double e = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            e += p[i] * levels(static_cast<Eigen::Index>(i));
        }
        return e;
    }

    static std::size_t count(const std::vector<Register> &regs) {
        std::size_t n = 1;
        for (const auto &r : regs) {
            n *= r.size;
        }
        return n;
    }
    static std::size_t flatten(const std::vector<Register> &regs, const std::vector<std::size_t> &idx) {
        std::size_t f = 0;
        for (std::size_t r = 0; r < regs.size(); ++r) {
            f = f * regs[r].size + idx[r];
        }
        return f;
    }
    static std::vector<std::size_t> unflatten(const std::vector<Register> &regs, std::size_t f) {
        std::vector<std::size_t> idx(regs.size());
        for (std::size_t r = regs.size(); r-- > 0;) {
            idx[r] = f % regs[r].size;
            f /= regs[r].size;
        }
        return idx;
    }

  private:
    SystemPtr a_;
    std::vector<Register> regs_;
    std::vector<Vec> blocks_;
};

/// Process on (input registers) x A -> (output registers) x A; other registers are spectators.
/// blocks[o][i] is the dimA x dimA positive map taking input index i to output index o.
struct BlockProcess {
    SystemPtr a;
    std::vector<Register> inputs;
    std::vector<Register> outputs;
    std::vector<std::vector<Mat>> blocks;

    void validate(double tol = 1e-9) const {
        const auto ni = CompositeState::count(inputs);
        const auto no = CompositeState::count(outputs);
        require(blocks.size() == no, ErrorCode::invalid_argument, "one block row per output index");
        for (const auto &row : blocks) {
            require(row.size() == ni, ErrorCode::invalid_argument, "one block per input index");
            for (const auto &b : row) {
                require(b.rows() == a->dim() && b.cols() == a->dim(), ErrorCode::invalid_argument, "block shape");
                for (const auto &g : a->generators()) {
                    require(cone_contains(*a, b * g, tol), ErrorCode::positivity_violation, "block is not positive");
                }
            }
        }
        for (std::size_t i = 0; i < ni; ++i) {
            Vec u = Vec::Zero(a->dim());
            for (std::size_t o = 0; o < no; ++o) {
                u += blocks[o][i].transpose() * a->unit();
            }
            require(sup_distance(u, a->unit()) <= tol, ErrorCode::invalid_argument,
                    "process does not preserve the unit on input " + std::to_string(i));
        }
    }

    /// Classical channel T(out | in) that leaves A alone.
    static BlockProcess classical(const SystemPtr &a, std::vector<Register> in, std::vector<Register> out,
                                  const Mat &t) {
        BlockProcess p{a, std::move(in), std::move(out), {}};
        const auto ni = CompositeState::count(p.inputs);
        const auto no = CompositeState::count(p.outputs);
        require(t.rows() == static_cast<Eigen::Index>(no) && t.cols() == static_cast<Eigen::Index>(ni),
                ErrorCode::invalid_argument, "transition matrix shape");
        const Mat id = Mat::Identity(a->dim(), a->dim());
        p.blocks.assign(no, std::vector<Mat>(ni));
        for (std::size_t o = 0; o < no; ++o) {
            for (std::size_t i = 0; i < ni; ++i) {
                p.blocks[o][i] = t(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(i)) * id;
            }
        }
        return p;
    }
};

inline CompositeState apply(const BlockProcess &p, const CompositeState &s) {
    const auto &regs = s.registers();
    std::vector<std::size_t> in_pos;
    for (const auto &r : p.inputs) {
        in_pos.push_back(s.position(r.name));
        require(regs[in_pos.back()].size == r.size, ErrorCode::invalid_argument, "register size mismatch: " + r.name);
    }
    std::vector<Register> spect;
    std::vector<std::size_t> spect_pos;
    for (std::size_t r = 0; r < regs.size(); ++r) {
        if (std::find(in_pos.begin(), in_pos.end(), r) == in_pos.end()) {
            spect.push_back(regs[r]);
            spect_pos.push_back(r);
        }
    }
    for (const auto &o : p.outputs) {
        for (const auto &sp : spect) {
            require(sp.name != o.name, ErrorCode::invalid_argument, "output register clashes with spectator " + o.name);
        }
    }
    std::vector<Register> out_regs = spect;
    out_regs.insert(out_regs.end(), p.outputs.begin(), p.outputs.end());
    const auto no = CompositeState::count(p.outputs);
    const auto ns = CompositeState::count(spect);
    std::vector<Vec> blocks(ns * no, Vec::Zero(s.a_system()->dim()));
    for (std::size_t f = 0; f < s.blocks().size(); ++f) {
        const auto idx = CompositeState::unflatten(regs, f);
        std::vector<std::size_t> si;
        std::vector<std::size_t> ii;
        for (auto q : spect_pos) {
            si.push_back(idx[q]);
        }
        for (auto q : in_pos) {
            ii.push_back(idx[q]);
        }
        const auto sf = CompositeState::flatten(spect, si);
        const auto inf = CompositeState::flatten(p.inputs, ii);
        for (std::size_t o = 0; o < no; ++o) {
            blocks[sf * no + o] += p.blocks[o][inf] * s.blocks()[f];
        }
    }
    return {s.a_system(), out_regs, blocks};
}

/// Measurement, feedback and erasure on A with memory M and baths B1, B2, B3.
struct Scenario {
    double beta{1.0};
    SystemPtr a;
    EntropyFunction entropy_a;
    std::string entropy_name{"shannon"};
    EnergyFunction energy_a;
    Vec energy_m;
    Vec energy_b1;
    Vec energy_b2;
    Vec energy_b3;
    /// coordinates of the initial state of A
    Vec rho_a;
    Vec rho_m;
    std::size_t outcomes{2};
    /// {M, B1} -> {K, M, B1}
    BlockProcess measurement;
    /// per outcome, {B2} -> {B2}
    std::vector<BlockProcess> feedback;
    /// T((m', b3') | (k, m, b3)), A untouched.
    Mat erasure;
};

struct SagawaUedaReport {
    double w_ext;
    double w_meas;
    double w_eras;
    double w;
    /// E(rho_0) - E(rho_3) computed directly; equals w by construction.
    double w_direct;
    double h;
    double i;
    double delta_f_a;
    double delta_f_m;
    double delta_s_m;
    double delta_s_f;
    double delta_s_v;
    double slack1;
    double slack2;
    double slack3;
    double slack_total;
    double memory_reset_residual;
    /// False means slacks are reported without the subadditivity guarantee.
    bool subadditivity_ok;
    bool inequalities_hold;
};

struct SubadditivityWitness {
    std::vector<double> weights;
    std::vector<State> members;
    /// H(X) + S(rho_A) - S~(XA); negative is a violation.
    double slack;
};

/// Spot-checks S~(XA) <= H(X) + S(A) on random classical-label ensembles, plus product equality.
inline std::optional<SubadditivityWitness> check_subadditivity(const EntropyFunction &s_a, const SystemPtr &a,
                                                               std::size_t trials, std::uint64_t seed = 3,
                                                               double tol = 1e-9) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> count(2, 3);
    std::gamma_distribution<double> gam(1.0, 1.0);
    std::optional<SubadditivityWitness> worst;
    for (std::size_t t = 0; t < trials; ++t) {
        const auto k = count(rng);
        std::vector<double> w(k);
        std::vector<State> members;
        double tot = 0.0;
        for (auto &x : w) {
            x = gam(rng);
            tot += x;
        }
        Vec mix = Vec::Zero(a->dim());
        double ext = 0.0;
        for (std::size_t x = 0; x < k; ++x) {
            w[x] /= tot;
            members.push_back(random_state(a, rng));
            mix += w[x] * members.back().coords();
            ext += neg_xlogx(w[x]) + w[x] * s_a(members.back());
        }
        const double slack = shannon(w, 1e-7) + s_a(State(a, mix, 1e-8)) - ext;
        if (slack < -tol && (!worst || slack < worst->slack)) {
            worst = SubadditivityWitness{w, members, slack};
        }
    }
    return worst;
}

/// Evaluates every quantity of the generalized Sagawa-Ueda inequalities for `sc`.
inline SagawaUedaReport evaluate_scenario(const Scenario &sc, std::size_t subadditivity_trials = 200) {
    require(sc.beta > 0, ErrorCode::invalid_scenario, "beta must be positive");
    require(sc.a && sc.rho_a.size() == sc.a->dim(), ErrorCode::invalid_scenario, "state of A on another system");
    const State rho_a(sc.a, sc.rho_a);
    require(sc.feedback.size() == sc.outcomes, ErrorCode::invalid_scenario, "one feedback process per outcome");
    const auto nm = static_cast<std::size_t>(sc.energy_m.size());
    const Register k{"K", sc.outcomes};
    const Register m{"M", nm};
    const Register b1{"B1", static_cast<std::size_t>(sc.energy_b1.size())};
    const Register b2{"B2", static_cast<std::size_t>(sc.energy_b2.size())};
    const Register b3{"B3", static_cast<std::size_t>(sc.energy_b3.size())};
    require(sc.rho_m.size() == static_cast<Eigen::Index>(nm), ErrorCode::invalid_scenario, "memory state size");
    require(sc.rho_m.minCoeff() >= -1e-12 && std::abs(sc.rho_m.sum() - 1.0) <= 1e-9, ErrorCode::invalid_scenario,
            "memory state is not a distribution");

    const double beta = sc.beta;
    const auto bath = [&](const Register &r, const Vec &e) { return gibbs_state(make_classical(r.size), e, beta).coords(); };
    const Vec g1 = bath(b1, sc.energy_b1);
    const Vec g2 = bath(b2, sc.energy_b2);
    const Vec g3 = bath(b3, sc.energy_b3);

    // F = sum_k F_k (x) delta_k eps_k on {K, B2}
    BlockProcess fb{sc.a, {k, b2}, {k, b2}, {}};
    const auto nb2 = b2.size;
    fb.blocks.assign(sc.outcomes * nb2, std::vector<Mat>(sc.outcomes * nb2, Mat::Zero(sc.a->dim(), sc.a->dim())));
    for (std::size_t kk = 0; kk < sc.outcomes; ++kk) {
        const auto &f = sc.feedback[kk];
        require(f.inputs.size() == 1 && f.inputs[0].name == "B2" && f.outputs.size() == 1 && f.outputs[0].name == "B2",
                ErrorCode::invalid_scenario, "feedback acts on A and B2");
        f.validate();
        for (std::size_t o = 0; o < nb2; ++o) {
            for (std::size_t i = 0; i < nb2; ++i) {
                fb.blocks[kk * nb2 + o][kk * nb2 + i] = f.blocks[o][i];
            }
        }
    }
    sc.measurement.validate();
    const auto er = BlockProcess::classical(sc.a, {k, m, b3}, {m, b3}, sc.erasure);
    er.validate();

    const auto rho0 = CompositeState::product(rho_a, {{m, sc.rho_m}, {b1, g1}, {b2, g2}, {b3, g3}});
    const auto rho1 = apply(sc.measurement, rho0);
    const auto rho2 = apply(fb, rho1);
    const auto rho3 = apply(er, rho2);

    const auto p3m = rho3.marginal({"M"});
    double reset = 0.0;
    for (std::size_t x = 0; x < nm; ++x) {
        reset = std::max(reset, std::abs(p3m[x] - sc.rho_m(static_cast<Eigen::Index>(x))));
    }
    require(reset <= 1e-9, ErrorCode::invalid_scenario, "memory does not return to its initial state");

    const auto &s = sc.entropy_a;
    const auto ea = [&](const CompositeState &st) { return sc.energy_a(st.a_marginal()); };
    SagawaUedaReport r{};
    r.w_ext = ea(rho0) + rho0.register_energy("B2", sc.energy_b2) - ea(rho2) - rho2.register_energy("B2", sc.energy_b2);
    r.w_meas = rho1.register_energy("M", sc.energy_m) + rho1.register_energy("B1", sc.energy_b1) -
               rho0.register_energy("M", sc.energy_m) - rho0.register_energy("B1", sc.energy_b1);
    r.w_eras = rho3.register_energy("M", sc.energy_m) + rho3.register_energy("B3", sc.energy_b3) -
               rho2.register_energy("M", sc.energy_m) - rho2.register_energy("B3", sc.energy_b3);
    r.w = r.w_ext - r.w_meas - r.w_eras;
    const auto total_energy = [&](const CompositeState &st) {
        double e = ea(st);
        for (const auto &[name, lv] : std::vector<std::pair<std::string, Vec>>{
                 {"M", sc.energy_m}, {"B1", sc.energy_b1}, {"B2", sc.energy_b2}, {"B3", sc.energy_b3}}) {
            e += st.register_energy(name, lv);
        }
        return e;
    };
    r.w_direct = total_energy(rho0) - total_energy(rho3);

    r.h = rho1.shannon_of({"K"});
    r.i = s(rho0.a_marginal()) - (rho1.extended_of({"K"}, s) - r.h);
    r.delta_f_a = free_energy(rho2.a_marginal(), sc.energy_a, s, beta) - free_energy(rho0.a_marginal(), sc.energy_a, s, beta);
    // <F_M>_K at stage 1 minus F_M at stage 0, with Shannon on the classical memory
    const double fm1 = rho1.register_energy("M", sc.energy_m) - (rho1.shannon_of({"K", "M"}) - r.h) / beta;
    const double fm0 = rho0.register_energy("M", sc.energy_m) - rho0.shannon_of({"M"}) / beta;
    r.delta_f_m = fm1 - fm0;
    r.delta_s_m = rho1.extended_of({"K", "M", "B1"}, s) - rho0.extended_of({"M", "B1"}, s);
    r.delta_s_f = rho2.extended_of({"K", "B2"}, s) - (rho1.extended_of({"K"}, s) + shannon(g2, 1e-7));
    r.delta_s_v = rho3.shannon_of({"M", "B3"}) - (rho2.shannon_of({"K", "M"}) + shannon(g3, 1e-7));

    r.slack1 = -r.delta_f_a + (r.i - r.delta_s_f) / beta - r.w_ext;
    r.slack2 = r.w_meas - r.delta_f_m + (r.h - r.i - r.delta_s_m) / beta;
    r.slack3 = r.w_eras + r.delta_f_m - (r.h + r.delta_s_v) / beta;
    r.slack_total = -r.delta_f_a - (r.delta_s_m + r.delta_s_f + r.delta_s_v) / beta - r.w;
    r.memory_reset_residual = reset;
    r.subadditivity_ok = sc.a->family() == SystemFamily::classical ||
                         !check_subadditivity(s, sc.a, subadditivity_trials).has_value();
    r.inequalities_hold = std::min({r.slack1, r.slack2, r.slack3}) >= -1e-9;
    return r;
}

namespace detail {
inline Vec szilard_bath(double beta, std::size_t levels) {
    require(levels >= 3, ErrorCode::invalid_argument, "bath needs at least three levels");
    Vec e = Vec::Constant(static_cast<Eigen::Index>(levels), 2.0 / beta);
    e(0) = 0.0;
    e(static_cast<Eigen::Index>(levels) - 1) = 20.0 / beta;
    return e;
}

inline double mean_energy(const Vec &levels, double beta) {
    const Vec g = gibbs_state(make_classical(static_cast<std::size_t>(levels.size())), levels, beta).coords();
    return levels.dot(g);
}

/// (1 - r) identity + r jump to `target` on an n-level bath.
inline Mat bath_kick(std::size_t n, std::size_t target, double r) {
    const auto d = static_cast<Eigen::Index>(n);
    Mat t = (1.0 - r) * Mat::Identity(d, d);
    t.row(static_cast<Eigen::Index>(target)).array() += r;
    return t;
}
} // namespace detail

/// Classical Szilard engine with read error `error`; baths have one ground, n-2 middle and one top level.
inline Scenario szilard_scenario(double beta, double error, std::size_t bath_levels = 8) {
    require(beta > 0, ErrorCode::invalid_argument, "beta must be positive");
    require(error >= 0.0 && error <= 0.5, ErrorCode::invalid_argument, "error probability must lie in [0, 1/2]");
    const auto a = make_classical(2);
    const Vec bath = detail::szilard_bath(beta, bath_levels);
    const double e_gamma = detail::mean_energy(bath, beta);
    const double e_top = bath(bath.size() - 1);
    const std::size_t top = bath_levels - 1;

    Scenario sc;
    sc.beta = beta;
    sc.a = a;
    sc.entropy_a = shannon_entropy();
    sc.energy_a = EnergyFunction::zero(a);
    sc.energy_m = Vec::Zero(2);
    sc.energy_b1 = bath;
    sc.energy_b2 = bath;
    sc.energy_b3 = bath;
    sc.rho_a = to_vec({0.5, 0.5});
    sc.rho_m = to_vec({1.0, 0.0});
    sc.outcomes = 2;

    const Register rk{"K", 2};
    const Register rm{"M", 2};
    const Register rb1{"B1", bath_levels};
    sc.measurement = BlockProcess{a, {rm, rb1}, {rk, rm, rb1}, {}};
    const std::size_t nin = 2 * bath_levels;
    sc.measurement.blocks.assign(2 * nin, std::vector<Mat>(nin, Mat::Zero(2, 2)));
    for (std::size_t kk = 0; kk < 2; ++kk) {
        Mat read = Mat::Zero(2, 2);
        read(0, 0) = kk == 0 ? 1 - error : error;
        read(1, 1) = kk == 1 ? 1 - error : error;
        for (std::size_t mm = 0; mm < 2; ++mm) {
            for (std::size_t b = 0; b < bath_levels; ++b) {
                const std::size_t in = mm * bath_levels + b;
                const std::size_t out = (kk * 2 + (mm ^ kk)) * bath_levels + b;
                sc.measurement.blocks[out][in] = read;
            }
        }
    }

    // outcome k: extract from the bath if a == k, pay if not; A ends uniform
    const double s_ok = std::clamp(std::log(2.0 * (1.0 - error)) / (beta * e_gamma), 0.0, 1.0);
    const double s_bad = error > 0 ? std::clamp(-std::log(2.0 * error) / (beta * (e_top - e_gamma)), 0.0, 1.0) : 1.0;
    const Mat t_ok = detail::bath_kick(bath_levels, 0, s_ok);
    const Mat t_bad = detail::bath_kick(bath_levels, top, s_bad);
    const Register rb2{"B2", bath_levels};
    for (std::size_t kk = 0; kk < 2; ++kk) {
        BlockProcess f{a, {rb2}, {rb2}, std::vector<std::vector<Mat>>(bath_levels, std::vector<Mat>(bath_levels))};
        for (std::size_t o = 0; o < bath_levels; ++o) {
            for (std::size_t i = 0; i < bath_levels; ++i) {
                Mat blk(2, 2);
                for (Eigen::Index aa = 0; aa < 2; ++aa) {
                    const Mat &t = static_cast<std::size_t>(aa) == kk ? t_ok : t_bad;
                    blk.col(aa).setConstant(0.5 * t(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(i)));
                }
                f.blocks[o][i] = blk;
            }
        }
        sc.feedback.push_back(f);
    }

    // reset M to 0 and dump log 2 / beta of heat into B3
    const double r3 = std::log(2.0) / (beta * (e_top - e_gamma));
    const Mat t3 = detail::bath_kick(bath_levels, top, r3);
    const auto nb = static_cast<Eigen::Index>(bath_levels);
    sc.erasure = Mat::Zero(2 * nb, 4 * nb);
    for (Eigen::Index kk = 0; kk < 2; ++kk) {
        for (Eigen::Index mm = 0; mm < 2; ++mm) {
            sc.erasure.block(0, (kk * 2 + mm) * nb, nb, nb) = t3;
        }
    }
    return sc;
}

namespace detail {
inline Mat random_stochastic(Eigen::Index rows, Eigen::Index cols, std::mt19937_64 &rng) {
    std::gamma_distribution<double> gam(0.7, 1.0);
    Mat t(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index r = 0; r < rows; ++r) {
            t(r, c) = gam(rng) + 1e-12;
        }
        t.col(c) /= t.col(c).sum();
    }
    return t;
}

inline Vec random_distribution(Eigen::Index n, std::mt19937_64 &rng) { return random_stochastic(n, 1, rng).col(0); }
} // namespace detail

/// Random all-classical scenario with Shannon entropy; erasure always restores the memory.
inline Scenario random_classical_scenario(std::mt19937_64 &rng) {
    std::uniform_int_distribution<std::size_t> small(2, 3);
    std::uniform_int_distribution<std::size_t> levels(2, 4);
    std::uniform_real_distribution<double> energy(0.0, 3.0);
    std::uniform_real_distribution<double> temp(0.3, 3.0);
    const auto rnd_levels = [&](std::size_t n) {
        Vec e(static_cast<Eigen::Index>(n));
        for (auto &x : e) {
            x = energy(rng);
        }
        return e;
    };
    Scenario sc;
    sc.beta = temp(rng);
    const std::size_t na = small(rng);
    const std::size_t nm = small(rng);
    const std::size_t nk = small(rng);
    const std::size_t n1 = levels(rng);
    const std::size_t n2 = levels(rng);
    const std::size_t n3 = levels(rng);
    sc.a = make_classical(na);
    sc.entropy_a = shannon_entropy();
    sc.energy_a = EnergyFunction::levels(sc.a, rnd_levels(na));
    sc.energy_m = rnd_levels(nm);
    sc.energy_b1 = rnd_levels(n1);
    sc.energy_b2 = rnd_levels(n2);
    sc.energy_b3 = rnd_levels(n3);
    sc.rho_a = detail::random_distribution(static_cast<Eigen::Index>(na), rng);
    sc.rho_m = detail::random_distribution(static_cast<Eigen::Index>(nm), rng);
    sc.outcomes = nk;

    const auto ia = static_cast<Eigen::Index>(na);
    // generic stochastic map (a, m, b1) -> (k, m, b1, a)
    const Register rk{"K", nk};
    const Register rm{"M", nm};
    const Register rb1{"B1", n1};
    const std::size_t nin = nm * n1;
    const std::size_t nout = nk * nm * n1;
    const Mat t = detail::random_stochastic(static_cast<Eigen::Index>(nout) * ia, static_cast<Eigen::Index>(nin) * ia, rng);
    sc.measurement = BlockProcess{sc.a, {rm, rb1}, {rk, rm, rb1}, {}};
    sc.measurement.blocks.assign(nout, std::vector<Mat>(nin));
    for (std::size_t o = 0; o < nout; ++o) {
        for (std::size_t i = 0; i < nin; ++i) {
            sc.measurement.blocks[o][i] =
                t.block(static_cast<Eigen::Index>(o) * ia, static_cast<Eigen::Index>(i) * ia, ia, ia);
        }
    }

    const Register rb2{"B2", n2};
    for (std::size_t kk = 0; kk < nk; ++kk) {
        const Mat f = detail::random_stochastic(static_cast<Eigen::Index>(n2) * ia, static_cast<Eigen::Index>(n2) * ia, rng);
        BlockProcess bp{sc.a, {rb2}, {rb2}, std::vector<std::vector<Mat>>(n2, std::vector<Mat>(n2))};
        for (std::size_t o = 0; o < n2; ++o) {
            for (std::size_t i = 0; i < n2; ++i) {
                bp.blocks[o][i] = f.block(static_cast<Eigen::Index>(o) * ia, static_cast<Eigen::Index>(i) * ia, ia, ia);
            }
        }
        sc.feedback.push_back(bp);
    }

    // V(m', b' | k, m, b) = rho_M(m') T_{k,m}(b' | b)
    const auto i3 = static_cast<Eigen::Index>(n3);
    sc.erasure = Mat::Zero(static_cast<Eigen::Index>(nm) * i3, static_cast<Eigen::Index>(nk * nm) * i3);
    for (std::size_t km = 0; km < nk * nm; ++km) {
        const Mat tb = detail::random_stochastic(i3, i3, rng);
        for (Eigen::Index mp = 0; mp < static_cast<Eigen::Index>(nm); ++mp) {
            sc.erasure.block(mp * i3, static_cast<Eigen::Index>(km) * i3, i3, i3) = sc.rho_m(mp) * tb;
        }
    }
    return sc;
}

} // namespace gpt
