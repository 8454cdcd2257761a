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

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "entropy.hpp"

namespace gpt {

/// Gas in one compartment: `fraction` of the particles, all in state `internal`.
struct Container {
    std::string label;
    double volume;
    double fraction;
    State internal;
};

struct GasConfiguration {
    SystemPtr system;
    std::vector<Container> containers;

    void validate(double tol = kTol) const {
        require(system != nullptr, ErrorCode::invalid_argument, "configuration without system");
        std::set<std::string> seen;
        double total = 0.0;
        for (const auto &c : containers) {
            require(seen.insert(c.label).second, ErrorCode::invalid_argument, "duplicate container label " + c.label);
            require(c.volume > 0.0, ErrorCode::invalid_argument, "container " + c.label + " has nonpositive volume");
            require(c.fraction >= 0.0, ErrorCode::invalid_argument, "container " + c.label + " has negative fraction");
            require(c.internal.system()->dim() == system->dim(), ErrorCode::invalid_argument,
                    "container " + c.label + " holds a state of another system");
            total += c.fraction;
        }
        require(std::abs(total - 1.0) <= tol, ErrorCode::conservation_error,
                "fractions sum to " + std::to_string(total));
    }

    [[nodiscard]] std::size_t index_of(const std::string &label) const {
        for (std::size_t i = 0; i < containers.size(); ++i) {
            if (containers[i].label == label) {
                return i;
            }
        }
        throw Error(ErrorCode::invalid_argument, "no container labelled " + label);
    }
};

/// Containers Z_y measured together by one process, then redistributed into Z'_y.
struct CycleGroup {
    std::vector<std::string> members;
    MeasurementProcess process;
    /// feedback[k](z', z): share of outcome-k particles from z that go to z'.
    std::vector<Mat> feedback;
    std::vector<double> volumes_out;
};

/// One step in the general cycle form: measure per group, move by outcome, relabel, rotate.
struct CycleStep {
    std::string name;
    std::vector<CycleGroup> groups;
    /// Labels of the outputs, in group order then z' order.
    std::vector<std::string> relabel;
    /// Optional reversible map per output (empty vector means identity everywhere).
    std::vector<std::optional<PositiveMap>> reversible;
};

struct GroupTrace {
    MeasurementProcess process;
    std::vector<std::string> in_labels;
    std::vector<double> in_fractions;
    std::vector<State> in_states;
    /// stage1[z][k] = fraction_z * M_k rho_z
    std::vector<std::vector<Vec>> stage1;
    /// stage2[z'][k] = sum_z F_k(z', z) stage1[z][k]
    std::vector<std::vector<Vec>> stage2;
    std::vector<std::string> out_labels;
};

struct StepRecord {
    std::string name;
    double w_ext;
    std::vector<GroupTrace> groups;
};

struct WorkLedger {
    SystemPtr system;
    std::vector<StepRecord> steps;
    std::vector<double> cumulative;
    double total{0.0};
    double cyclicity_residual{0.0};
    bool cyclic{false};
    GasConfiguration final_configuration;
};

struct StepResult {
    GasConfiguration next;
    double w_ext;
    StepRecord record;
};

namespace detail {
inline double sum_weights(const SystemPtr &sys, const std::vector<Vec> &cs) {
    double w = 0.0;
    for (const auto &c : cs) {
        w += sys->unit().dot(c);
    }
    return w;
}
} // namespace detail

/// Extractable work of one step (units of 1/beta per particle) and the next configuration.
inline StepResult step_work(const GasConfiguration &config, const CycleStep &step) {
    config.validate();
    const auto &sys = config.system;
    std::vector<int> owner(config.containers.size(), -1);
    std::size_t outputs = 0;
    for (std::size_t y = 0; y < step.groups.size(); ++y) {
        const auto &g = step.groups[y];
        require(!g.members.empty(), ErrorCode::invalid_argument, "empty group");
        for (const auto &m : g.members) {
            const std::size_t i = config.index_of(m);
            require(owner[i] < 0, ErrorCode::invalid_argument, "container " + m + " is in two groups");
            owner[i] = static_cast<int>(y);
        }
        require(g.process.system()->dim() == sys->dim(), ErrorCode::invalid_argument, "process on another system");
        require(is_repeatable(g.process), ErrorCode::invalid_argument,
                "step '" + step.name + "': group process is not repeatable");
        require(g.feedback.size() == g.process.size(), ErrorCode::invalid_argument, "one feedback matrix per outcome");
        require(!g.volumes_out.empty(), ErrorCode::invalid_argument, "group without outputs");
        for (const auto &f : g.feedback) {
            require(f.cols() == static_cast<Eigen::Index>(g.members.size()) &&
                        f.rows() == static_cast<Eigen::Index>(g.volumes_out.size()),
                    ErrorCode::invalid_argument, "feedback matrix shape is |Z'| x |Z|");
            require(f.minCoeff() >= -kTol, ErrorCode::invalid_argument, "negative feedback entry");
            for (Eigen::Index z = 0; z < f.cols(); ++z) {
                require(std::abs(f.col(z).sum() - 1.0) <= kTol, ErrorCode::invalid_argument,
                        "feedback matrix is not column-stochastic");
            }
        }
        for (double v : g.volumes_out) {
            require(v > 0.0, ErrorCode::invalid_argument, "nonpositive target volume");
        }
        outputs += g.volumes_out.size();
    }
    for (std::size_t i = 0; i < owner.size(); ++i) {
        require(owner[i] >= 0, ErrorCode::invalid_argument, "container " + config.containers[i].label + " is in no group");
    }
    require(step.relabel.size() == outputs, ErrorCode::invalid_argument, "relabel must name every output");
    require(std::set<std::string>(step.relabel.begin(), step.relabel.end()).size() == outputs,
            ErrorCode::invalid_argument, "relabel is not a bijection");
    require(step.reversible.empty() || step.reversible.size() == outputs, ErrorCode::invalid_argument,
            "one reversible map per output or none");
    for (const auto &u : step.reversible) {
        require(!u || is_reversible(*u), ErrorCode::invalid_argument, "map is not reversible");
    }

    StepRecord rec{step.name, 0.0, {}};
    std::vector<double> w1;
    std::vector<double> w2;
    GasConfiguration next{sys, {}};
    double log_v_in = 0.0;
    for (const auto &c : config.containers) {
        if (c.fraction > 0) {
            log_v_in += c.fraction * std::log(c.volume);
        }
    }
    double log_v_out = 0.0;
    std::size_t out_index = 0;
    for (const auto &g : step.groups) {
        GroupTrace tr{g.process, g.members, {}, {}, {}, {}, {}};
        for (const auto &m : g.members) {
            const auto &c = config.containers[config.index_of(m)];
            tr.in_fractions.push_back(c.fraction);
            tr.in_states.push_back(c.internal);
            std::vector<Vec> row;
            for (const auto &mk : g.process.maps()) {
                const Vec v = c.fraction * (mk.matrix() * c.internal.coords());
                require(cone_contains(*sys, v, 1e-8), ErrorCode::positivity_violation, "measurement left the cone");
                row.push_back(v);
                w1.push_back(sys->unit().dot(v));
            }
            tr.stage1.push_back(std::move(row));
        }
        for (std::size_t zp = 0; zp < g.volumes_out.size(); ++zp) {
            std::vector<Vec> row;
            Vec total = Vec::Zero(sys->dim());
            for (std::size_t k = 0; k < g.process.size(); ++k) {
                Vec v = Vec::Zero(sys->dim());
                for (std::size_t z = 0; z < g.members.size(); ++z) {
                    v += g.feedback[k](static_cast<Eigen::Index>(zp), static_cast<Eigen::Index>(z)) * tr.stage1[z][k];
                }
                w2.push_back(sys->unit().dot(v));
                total += v;
                row.push_back(v);
            }
            tr.stage2.push_back(std::move(row));
            const double frac = sys->unit().dot(total);
            const std::string &label = step.relabel[out_index];
            tr.out_labels.push_back(label);
            Vec st = frac > 1e-15 ? Vec(total / frac) : barycenter(*sys);
            if (!step.reversible.empty() && step.reversible[out_index]) {
                st = step.reversible[out_index]->matrix() * st;
            }
            next.containers.push_back({label, g.volumes_out[zp], std::max(frac, 0.0), State(sys, st, 1e-8)});
            if (frac > 0) {
                log_v_out += frac * std::log(g.volumes_out[zp]);
            }
            ++out_index;
        }
        rec.groups.push_back(std::move(tr));
    }
    double s1 = 0.0;
    double s2 = 0.0;
    for (double w : w1) {
        s1 += w;
    }
    for (double w : w2) {
        s2 += w;
    }
    require(std::abs(s1 - 1.0) <= kTol && std::abs(s2 - 1.0) <= kTol, ErrorCode::conservation_error,
            "fractions not conserved in step '" + step.name + "'");
    rec.w_ext = weight_entropy(w2) - weight_entropy(w1) + log_v_out - log_v_in;
    next.validate();
    return {std::move(next), rec.w_ext, std::move(rec)};
}

/// Splits one container by outcome; volumes proportional to the new fractions.
inline std::pair<std::vector<Container>, double> separation(const Container &c, const MeasurementProcess &proc) {
    require(is_repeatable(proc), ErrorCode::invalid_argument, "separation needs a repeatable process");
    std::vector<Container> out;
    double w = 0.0;
    for (std::size_t k = 0; k < proc.size(); ++k) {
        const Vec v = proc.maps()[k].matrix() * c.internal.coords();
        const double lam = proc.system()->unit().dot(v);
        if (lam <= 1e-15) {
            continue;
        }
        out.push_back({c.label + "/" + proc.labels()[k], lam * c.volume, lam * c.fraction,
                       State(proc.system(), v / lam, 1e-8)});
        w += c.fraction * lam * std::log(lam);
    }
    return {out, w};
}

/// Merges containers into one. `outcome[i]` is the branch container i must already be in;
/// empty means container i belongs to outcome i (or to outcome 0 for a one-outcome process).
inline std::pair<Container, double> mixing(const std::vector<Container> &cs, const MeasurementProcess &proc,
                                           std::vector<std::size_t> outcome = {}) {
    require(!cs.empty(), ErrorCode::invalid_argument, "nothing to mix");
    require(is_repeatable(proc), ErrorCode::invalid_argument, "mixing needs a repeatable process");
    if (outcome.empty()) {
        for (std::size_t i = 0; i < cs.size(); ++i) {
            outcome.push_back(proc.size() == 1 ? 0 : i);
        }
    }
    require(outcome.size() == cs.size(), ErrorCode::invalid_argument, "one outcome per container");
    const auto &sys = proc.system();
    Vec total = Vec::Zero(sys->dim());
    double frac = 0.0;
    double vol = 0.0;
    double w = 0.0;
    for (std::size_t i = 0; i < cs.size(); ++i) {
        require(outcome[i] < proc.size(), ErrorCode::invalid_argument, "outcome index out of range");
        const Vec &rho = cs[i].internal.coords();
        require(sup_distance(proc.maps()[outcome[i]].matrix() * rho, rho) <= kTol, ErrorCode::not_mixable,
                "container " + cs[i].label + " is not a fixed point of its branch");
        total += cs[i].fraction * rho;
        frac += cs[i].fraction;
        vol += cs[i].volume;
        if (cs[i].fraction > 0) {
            w -= cs[i].fraction * std::log(cs[i].volume);
        }
    }
    // entropy part: cells (z, k) before and (k) after
    std::vector<double> before;
    std::vector<double> after(proc.size(), 0.0);
    for (std::size_t i = 0; i < cs.size(); ++i) {
        before.push_back(cs[i].fraction);
        after[outcome[i]] += cs[i].fraction;
    }
    if (proc.size() == 1) {
        after = {frac};
    }
    w += weight_entropy(after) - weight_entropy(before) + frac * std::log(vol);
    require(frac > 0, ErrorCode::invalid_argument, "mixing empty containers");
    return {Container{cs.front().label, vol, frac, State(sys, total / frac, 1e-8)}, w};
}

/// Largest mismatch between two configurations after greedy label matching.
inline double configuration_distance(const GasConfiguration &a, const GasConfiguration &b) {
    if (a.containers.size() != b.containers.size()) {
        return std::numeric_limits<double>::infinity();
    }
    std::vector<bool> used(b.containers.size(), false);
    double worst = 0.0;
    for (const auto &ca : a.containers) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t j = 0; j < b.containers.size(); ++j) {
            if (used[j]) {
                continue;
            }
            const auto &cb = b.containers[j];
            const double d = std::max({std::abs(ca.fraction - cb.fraction), std::abs(ca.volume - cb.volume),
                                       sup_distance(ca.internal.coords(), cb.internal.coords())});
            if (d < best) {
                best = d;
                arg = j;
            }
        }
        used[arg] = true;
        worst = std::max(worst, best);
    }
    return worst;
}

/// Runs every step; throws not-a-cycle unless `diagnostics` when the gas does not return.
inline WorkLedger run_cycle(const GasConfiguration &initial, const std::vector<CycleStep> &steps,
                            bool diagnostics = false) {
    initial.validate();
    WorkLedger ledger{initial.system, {}, {}, 0.0, 0.0, false, initial};
    GasConfiguration cur = initial;
    for (const auto &s : steps) {
        auto r = step_work(cur, s);
        ledger.total += r.w_ext;
        ledger.cumulative.push_back(ledger.total);
        ledger.steps.push_back(std::move(r.record));
        cur = std::move(r.next);
    }
    ledger.final_configuration = cur;
    ledger.cyclicity_residual = configuration_distance(cur, initial);
    ledger.cyclic = ledger.cyclicity_residual <= kTol;
    if (!ledger.cyclic && !diagnostics) {
        throw Error(ErrorCode::not_a_cycle, "final configuration differs from the initial one by " +
                                                std::to_string(ledger.cyclicity_residual));
    }
    return ledger;
}

// ---- bound checkers -------------------------------------------------------

/// S~ of the K-labelled substates `parts` (any total weight > 0), normalized first.
inline double extended_of(const EntropyFunction &s, const SystemPtr &sys, const std::vector<Vec> &parts) {
    double total = 0.0;
    for (const auto &p : parts) {
        total += sys->unit().dot(p);
    }
    double h = 0.0;
    for (const auto &p : parts) {
        const double w = sys->unit().dot(p) / total;
        if (w > 1e-14) {
            h += neg_xlogx(w) + w * s(State(sys, p / (w * total), 1e-7));
        }
    }
    return h;
}

inline State branch_sum(const SystemPtr &sys, const std::vector<Vec> &parts) {
    Vec t = Vec::Zero(sys->dim());
    for (const auto &p : parts) {
        t += p;
    }
    return {sys, t / sys->unit().dot(t), 1e-7};
}

struct BoundReport {
    double total{0.0};
    std::vector<double> per_step;
};

/// Entropy-difference upper bound on cycle work, valid for a concave entropy s.
inline BoundReport lemma1_bound(const WorkLedger &ledger, const EntropyFunction &s) {
    require(ledger.steps.size() == ledger.cumulative.size(), ErrorCode::invalid_ledger, "ledger without traces");
    const auto &sys = ledger.system;
    BoundReport rep;
    for (const auto &st : ledger.steps) {
        require(!st.groups.empty(), ErrorCode::invalid_ledger, "step '" + st.name + "' has no trace");
        double term = 0.0;
        for (const auto &g : st.groups) {
            for (std::size_t z = 0; z < g.in_states.size(); ++z) {
                const double f = g.in_fractions[z];
                if (f <= 1e-15) {
                    continue;
                }
                term += f * s(g.in_states[z]);
                term -= f * extended_of(s, sys, g.stage1[z]);
            }
            for (const auto &row : g.stage2) {
                const double f = detail::sum_weights(sys, row);
                if (f <= 1e-15) {
                    continue;
                }
                term += f * (extended_of(s, sys, row) - s(branch_sum(sys, row)));
            }
        }
        rep.per_step.push_back(term);
        rep.total += term;
    }
    return rep;
}

struct ConditionInstance {
    std::size_t step;
    std::size_t group;
    std::string container;
    /// 1: S(rho) <= S~(M rho) at stage (i,0); 2: S~(M rho) <= S(tr_K M rho) at stage (i,2).
    int inequality;
    double slack;
};

struct Thm2Report {
    std::vector<ConditionInstance> instances;
    std::optional<ConcavityWitness> concavity;
    bool all_pass{true};

    [[nodiscard]] std::vector<ConditionInstance> failures(double tol = 1e-9) const {
        std::vector<ConditionInstance> out;
        for (const auto &c : instances) {
            if (c.slack < -tol) {
                out.push_back(c);
            }
        }
        return out;
    }
};

/// Evaluates both per-container conditions and, when trials > 0, spot-checks concavity of s.
inline Thm2Report check_thm2(const WorkLedger &ledger, const EntropyFunction &s, std::size_t concavity_trials = 400,
                             std::uint64_t seed = 7) {
    const auto &sys = ledger.system;
    Thm2Report rep;
    for (std::size_t i = 0; i < ledger.steps.size(); ++i) {
        const auto &st = ledger.steps[i];
        for (std::size_t y = 0; y < st.groups.size(); ++y) {
            const auto &g = st.groups[y];
            for (std::size_t z = 0; z < g.in_states.size(); ++z) {
                if (g.in_fractions[z] <= 1e-15) {
                    continue;
                }
                const auto branches = g.process.apply(g.in_states[z]);
                std::vector<Vec> parts;
                for (const auto &b : branches.branches()) {
                    parts.push_back(b.coords());
                }
                rep.instances.push_back({i, y, g.in_labels[z], 1, extended_of(s, sys, parts) - s(g.in_states[z])});
            }
            for (std::size_t zp = 0; zp < g.stage2.size(); ++zp) {
                if (detail::sum_weights(sys, g.stage2[zp]) <= 1e-15) {
                    continue;
                }
                const State rho = branch_sum(sys, g.stage2[zp]);
                const auto branches = g.process.apply(rho);
                std::vector<Vec> parts;
                for (const auto &b : branches.branches()) {
                    parts.push_back(b.coords());
                }
                rep.instances.push_back(
                    {i, y, g.out_labels[zp], 2, s(branch_sum(sys, parts)) - extended_of(s, sys, parts)});
            }
        }
    }
    if (concavity_trials > 0) {
        rep.concavity = check_concavity(s, sys, concavity_trials, seed);
    }
    rep.all_pass = rep.failures().empty() && !rep.concavity;
    return rep;
}

struct Cor1Slack {
    /// S~(M rho) - S(rho)
    double left;
    /// S(tr_K M rho) - S~(M rho)
    double right;
};

inline std::vector<Cor1Slack> check_cor1(const MeasurementProcess &proc, const EntropyFunction &s,
                                         const std::vector<State> &states) {
    const auto &sys = proc.system();
    std::vector<Cor1Slack> out;
    for (const auto &rho : states) {
        const auto ens = proc.apply(rho);
        std::vector<Vec> parts;
        for (const auto &b : ens.branches()) {
            parts.push_back(b.coords());
        }
        const double ext = extended_of(s, sys, parts);
        out.push_back({ext - s(rho), s(branch_sum(sys, parts)) - ext});
    }
    return out;
}

/// True for the processes the discrepancy bound admits.
inline bool discrepancy_admissible(const MeasurementProcess &p) {
    return p.is_trivial() || (is_strongly_repeatable(p) && is_fine_grained(induced_measurement(p)));
}

/// Bound on the total work from the gap between S_acc and S_meas at stage (i,2).
inline BoundReport discrepancy_bound(const WorkLedger &ledger, const EntropyCalculator &calc) {
    const auto &sys = ledger.system;
    for (std::size_t i = 0; i < ledger.steps.size(); ++i) {
        for (const auto &g : ledger.steps[i].groups) {
            require(discrepancy_admissible(g.process), ErrorCode::precondition_error,
                    "step " + std::to_string(i) + " ('" + ledger.steps[i].name +
                        "') uses a process that is not strongly repeatable and fine-grained");
        }
    }
    const auto gap = [&](const State &s) { return calc.acc(s).value - calc.meas(s).value; };
    BoundReport rep;
    for (const auto &st : ledger.steps) {
        double term = 0.0;
        for (const auto &g : st.groups) {
            for (const auto &row : g.stage2) {
                const double f = detail::sum_weights(sys, row);
                if (f <= 1e-15) {
                    continue;
                }
                double avg = 0.0;
                for (const auto &p : row) {
                    const double w = sys->unit().dot(p);
                    if (w > 1e-15) {
                        avg += w * gap(State(sys, p / w, 1e-7));
                    }
                }
                term += f * gap(branch_sum(sys, row)) - avg;
            }
        }
        rep.per_step.push_back(term);
        rep.total += term;
    }
    return rep;
}

} // namespace gpt
