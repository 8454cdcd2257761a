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

// gpt-thermo: entropies, SPM cycles and Sagawa-Ueda reports from the command line.
//
// Exit codes: 0 ok, 2 validation failure, 3 an inequality/bound assertion failed.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "gpt_thermo.hpp"
#include "gpt_thermo/io.hpp"

namespace {

using gpt::io::json;

constexpr int kOk = 0;
constexpr int kInvalid = 2;
constexpr int kInequality = 3;

struct Options {
    std::uint64_t seed{7};

    std::string system{"square"};
    std::string system_file;
    std::string state;
    std::string kind{"meas"};
    std::string base{"nat"};

    std::string builtin;
    std::string weights;
    std::string cycle_file;
    std::string format{"csv"};
    bool emit_definition{false};
    std::string entropy{"meas"};
    std::string bound{"lemma1"};

    double beta{1.0};
    double error_prob{0.0};
    std::size_t bath_levels{8};
    std::string scenario_file;
};

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void print_json(const json &j) { std::cout << j.dump(2) << "\n"; }

std::vector<double> parse_list(const std::string &s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::logic_error &) {
            throw gpt::Error(gpt::ErrorCode::parse_error, "not a number: '" + item + "'");
        }
    }
    return out;
}

gpt::SystemPtr load_system(const Options &o) {
    if (!o.system_file.empty()) {
        return gpt::io::system_from_json(gpt::io::read_json_file(o.system_file));
    }
    return gpt::io::system_from_name(o.system);
}

gpt::CycleDefinition load_cycle(const Options &o) {
    gpt::require(o.builtin.empty() != o.cycle_file.empty(), gpt::ErrorCode::invalid_argument,
                 "give exactly one of --builtin and --file");
    if (!o.cycle_file.empty()) {
        return gpt::io::cycle_from_json(gpt::io::read_json_file(o.cycle_file));
    }
    return gpt::builtin_cycle(o.builtin, o.weights.empty() ? std::vector<double>{} : parse_list(o.weights));
}

gpt::EntropyFunction cycle_entropy(const std::string &name, const gpt::CalculatorPtr &calc) {
    if (name == "shannon") {
        gpt::require(calc->system()->family() == gpt::SystemFamily::classical, gpt::ErrorCode::unsupported_system,
                     "shannon needs a classical system");
        return gpt::shannon_entropy();
    }
    if (name == "mix" || name == "meas" || name == "acc") {
        const auto tag = name == "mix" ? gpt::EntropyTag::mix : name == "meas" ? gpt::EntropyTag::meas : gpt::EntropyTag::acc;
        return gpt::entropy_function(gpt::EntropyKind::simple(tag), calc);
    }
    throw gpt::Error(gpt::ErrorCode::invalid_argument, "unknown entropy '" + name + "'");
}

int cmd_system_info(const Options &o) {
    const auto sys = load_system(o);
    const gpt::EntropyCalculator calc(sys);
    json gens = json::array();
    for (const auto &g : sys->generators()) {
        gens.push_back(gpt::io::to_json(g));
    }
    json duals = json::array();
    for (const auto &f : sys->dual_rays()) {
        duals.push_back(gpt::io::to_json(f));
    }
    print_json({{"schema", gpt::io::kSchema},
                {"name", sys->name()},
                {"dim", sys->dim()},
                {"unit", gpt::io::to_json(sys->unit())},
                {"generators", gens},
                {"dual_rays", duals},
                {"pointed", gpt::is_pointed(*sys)},
                {"fine_grained_measurements", calc.fine_grained().size()}});
    return kOk;
}

int cmd_entropy(const Options &o) {
    const auto sys = load_system(o);
    gpt::require(!o.state.empty(), gpt::ErrorCode::invalid_argument, "--state is required");
    const auto rho = gpt::io::parse_state(sys, o.state);
    gpt::require(o.base == "nat" || o.base == "bit", gpt::ErrorCode::invalid_argument, "--base is nat or bit");
    const double scale = o.base == "bit" ? 1.0 / std::log(2.0) : 1.0;
    const auto calc = std::make_shared<const gpt::EntropyCalculator>(sys);
    json out{{"schema", gpt::io::kSchema}, {"system", sys->name()}, {"kind", o.kind}, {"base", o.base}};
    if (o.kind == "mix") {
        const auto r = calc->mix(rho);
        out["value"] = r.value * scale;
        out["witness"] = {{"decomposition", gpt::describe(r.decomposition)}};
    } else if (o.kind == "meas") {
        const auto r = calc->meas(rho);
        out["value"] = r.value * scale;
        out["witness"] = {{"measurement", r.measurement}, {"distribution", r.distribution}};
    } else if (o.kind == "acc") {
        const auto r = calc->acc(rho);
        out["value"] = r.value * scale;
        out["witness"] = {{"measurement", r.measurement}, {"ensemble", gpt::describe(r.ensemble)}};
    } else if (o.kind == "induced") {
        gpt::InducedOptions opt;
        opt.seed = o.seed;
        const auto inner = gpt::entropy_function(gpt::EntropyKind::simple(gpt::EntropyTag::meas), calc);
        out["value"] = gpt::s_induced(*calc, inner, rho, opt) * scale;
        out["witness"] = {{"note", "lower bound from a seeded search over ensembles"}, {"seed", o.seed}};
    } else {
        throw gpt::Error(gpt::ErrorCode::invalid_argument, "unknown --kind '" + o.kind + "'");
    }
    print_json(out);
    return kOk;
}

int cmd_cycle_run(const Options &o) {
    const auto def = load_cycle(o);
    if (o.emit_definition) {
        print_json(gpt::io::cycle_to_json(def));
        return kOk;
    }
    const auto ledger = gpt::run_cycle(def.initial, def.steps, true);
    const auto calc = std::make_shared<const gpt::EntropyCalculator>(ledger.system);
    const auto meas = gpt::lemma1_bound(ledger, cycle_entropy("meas", calc));
    std::optional<gpt::BoundReport> disc;
    try {
        disc = gpt::discrepancy_bound(ledger, *calc);
    } catch (const gpt::Error &e) {
        if (e.code() != gpt::ErrorCode::precondition_error) {
            throw;
        }
    }
    if (o.format == "csv") {
        std::cout << "step,phase,w_ext,cumulative,bound_meas,bound_discrepancy\n";
        for (std::size_t i = 0; i < ledger.steps.size(); ++i) {
            std::cout << i << "," << ledger.steps[i].name << "," << num(ledger.steps[i].w_ext) << ","
                      << num(ledger.cumulative[i]) << "," << num(meas.per_step[i]) << ","
                      << (disc ? num(disc->per_step[i]) : "nan") << "\n";
        }
    } else if (o.format == "json") {
        json steps = json::array();
        for (std::size_t i = 0; i < ledger.steps.size(); ++i) {
            steps.push_back({{"step", i},
                             {"phase", ledger.steps[i].name},
                             {"w_ext", ledger.steps[i].w_ext},
                             {"cumulative", ledger.cumulative[i]},
                             {"bound_meas", meas.per_step[i]},
                             {"bound_discrepancy", disc ? json(disc->per_step[i]) : json(nullptr)}});
        }
        print_json({{"schema", gpt::io::kSchema},
                    {"system", ledger.system->name()},
                    {"units", "work per particle in units of 1/beta"},
                    {"steps", steps},
                    {"total", ledger.total},
                    {"bound_meas", meas.total},
                    {"bound_discrepancy", disc ? json(disc->total) : json(nullptr)},
                    {"cyclicity_residual", ledger.cyclicity_residual},
                    {"cyclic", ledger.cyclic}});
    } else {
        throw gpt::Error(gpt::ErrorCode::invalid_argument, "--format is csv or json");
    }
    if (!ledger.cyclic) {
        std::cerr << "not a cycle: residual " << num(ledger.cyclicity_residual) << "\n";
        return kInvalid;
    }
    return kOk;
}

int cmd_cycle_check(const Options &o) {
    const auto def = load_cycle(o);
    const auto ledger = gpt::run_cycle(def.initial, def.steps);
    const auto calc = std::make_shared<const gpt::EntropyCalculator>(ledger.system);
    json out{{"schema", gpt::io::kSchema}, {"system", ledger.system->name()}, {"bound", o.bound}, {"total", ledger.total}};
    int code = kOk;
    if (o.bound == "lemma1" || o.bound == "discrepancy") {
        gpt::BoundReport rep;
        if (o.bound == "lemma1") {
            out["entropy"] = o.entropy;
            rep = gpt::lemma1_bound(ledger, cycle_entropy(o.entropy, calc));
        } else {
            rep = gpt::discrepancy_bound(ledger, *calc);
        }
        const bool holds = rep.total >= ledger.total - 1e-7;
        out["per_step"] = rep.per_step;
        out["value"] = rep.total;
        out["dominates_total"] = holds;
        code = holds ? kOk : kInequality;
    } else if (o.bound == "thm2") {
        out["entropy"] = o.entropy;
        const auto rep = gpt::check_thm2(ledger, cycle_entropy(o.entropy, calc), 400, o.seed);
        json fails = json::array();
        for (const auto &f : rep.failures()) {
            fails.push_back({{"step", f.step},
                             {"phase", ledger.steps[f.step].name},
                             {"group", f.group},
                             {"container", f.container},
                             {"inequality", f.inequality},
                             {"slack", f.slack}});
        }
        out["instances"] = rep.instances.size();
        out["failures"] = fails;
        if (rep.concavity) {
            json members = json::array();
            for (const auto &m : rep.concavity->members) {
                members.push_back(gpt::io::to_json(m.coords()));
            }
            out["concavity_witness"] = {
                {"members", members}, {"weights", rep.concavity->weights}, {"slack", rep.concavity->slack}};
        } else {
            out["concavity_witness"] = nullptr;
        }
        out["all_pass"] = rep.all_pass;
        code = rep.all_pass ? kOk : kInequality;
    } else {
        throw gpt::Error(gpt::ErrorCode::invalid_argument, "--bound is lemma1, thm2 or discrepancy");
    }
    print_json(out);
    return code;
}

json report_json(const gpt::SagawaUedaReport &r) {
    return {{"schema", gpt::io::kSchema},
            {"units", "energy; beta^-1 multiplies entropies"},
            {"W_ext", r.w_ext},
            {"W_meas", r.w_meas},
            {"W_eras", r.w_eras},
            {"W", r.w},
            {"W_direct", r.w_direct},
            {"H", r.h},
            {"I", r.i},
            {"dF_A", r.delta_f_a},
            {"dF_M", r.delta_f_m},
            {"dS_M", r.delta_s_m},
            {"dS_F", r.delta_s_f},
            {"dS_V", r.delta_s_v},
            {"slack_ext", r.slack1},
            {"slack_meas", r.slack2},
            {"slack_eras", r.slack3},
            {"slack_total", r.slack_total},
            {"memory_reset_residual", r.memory_reset_residual},
            {"subadditivity_ok", r.subadditivity_ok},
            {"inequalities_hold", r.inequalities_hold}};
}

int run_scenario(const gpt::Scenario &sc, bool emit) {
    if (emit) {
        print_json(gpt::io::scenario_to_json(sc));
        return kOk;
    }
    const auto r = gpt::evaluate_scenario(sc);
    print_json(report_json(r));
    if (!r.subadditivity_ok) {
        std::cerr << "warning: entropy failed the subadditivity spot-check; slacks are not guaranteed\n";
        return kOk;
    }
    return r.inequalities_hold ? kOk : kInequality;
}

int cmd_szilard(const Options &o) {
    return run_scenario(gpt::szilard_scenario(o.beta, o.error_prob, o.bath_levels), o.emit_definition);
}

int cmd_scenario(const Options &o) {
    return run_scenario(gpt::io::scenario_from_json(gpt::io::read_json_file(o.scenario_file)), false);
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Entropies, SPM cycles and information thermodynamics on GPT systems"};
    app.require_subcommand(1);
    Options o;
    app.add_option("--seed", o.seed, "Seed for randomized searches (GPT_THERMO_SEED overrides)");

    auto *sys_cmd = app.add_subcommand("system", "System inspection");
    sys_cmd->require_subcommand(1);
    auto *sys_info = sys_cmd->add_subcommand("info", "Generators, dual rays, fine-grained measurements");
    sys_info->add_option("--system", o.system, "square | hexagon | classical:N | polygon:N");
    sys_info->add_option("--file", o.system_file, "System JSON file");

    auto *ent = app.add_subcommand("entropy", "Entropy evaluation");
    ent->require_subcommand(1);
    auto *ent_eval = ent->add_subcommand("eval", "Evaluate one entropy on one state");
    ent_eval->add_option("--system", o.system, "square | hexagon | classical:N | polygon:N");
    ent_eval->add_option("--file", o.system_file, "System JSON file");
    ent_eval->add_option("--state", o.state, "\"0.75*v0+0.25*v2\" or \"0.5,0.5\"")->required();
    ent_eval->add_option("--kind", o.kind, "mix | meas | acc | induced");
    ent_eval->add_option("--base", o.base, "nat | bit");

    auto *cyc = app.add_subcommand("cycle", "SPM cycles");
    cyc->require_subcommand(1);
    auto *cyc_run = cyc->add_subcommand("run", "Run a cycle and print the work ledger");
    auto *cyc_check = cyc->add_subcommand("check", "Evaluate a bound or the per-container conditions");
    for (auto *c : {cyc_run, cyc_check}) {
        c->add_option("--builtin", o.builtin, "square | hexagon | von_neumann");
        c->add_option("--weights", o.weights, "von_neumann weights, e.g. 0.2,0.3,0.5");
        c->add_option("--file", o.cycle_file, "Cycle JSON file");
    }
    cyc_run->add_option("--format", o.format, "csv | json");
    cyc_run->add_flag("--emit-definition", o.emit_definition, "Print the cycle as JSON instead of running it");
    cyc_check->add_option("--entropy", o.entropy, "meas | acc | mix | shannon");
    cyc_check->add_option("--bound", o.bound, "lemma1 | thm2 | discrepancy");

    auto *sz = app.add_subcommand("szilard", "Szilard engine report");
    sz->add_option("--beta", o.beta, "Inverse temperature");
    sz->add_option("--error-prob", o.error_prob, "Read error probability in [0, 1/2]");
    sz->add_option("--bath-levels", o.bath_levels, "Levels per bath");
    sz->add_flag("--emit-definition", o.emit_definition, "Print the scenario as JSON instead of evaluating it");

    auto *sc = app.add_subcommand("scenario", "Measurement-feedback-erasure scenarios");
    sc->require_subcommand(1);
    auto *sc_run = sc->add_subcommand("run", "Evaluate a scenario file");
    sc_run->add_option("--file", o.scenario_file, "Scenario JSON file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kInvalid;
    }
    if (const char *env = std::getenv("GPT_THERMO_SEED")) {
        try {
            o.seed = std::stoull(env);
        } catch (const std::logic_error &) {
            std::cerr << "error: GPT_THERMO_SEED is not an integer\n";
            return kInvalid;
        }
    }

    try {
        if (sys_info->parsed()) {
            return cmd_system_info(o);
        }
        if (ent_eval->parsed()) {
            return cmd_entropy(o);
        }
        if (cyc_run->parsed()) {
            return cmd_cycle_run(o);
        }
        if (cyc_check->parsed()) {
            return cmd_cycle_check(o);
        }
        if (sz->parsed()) {
            return cmd_szilard(o);
        }
        if (sc_run->parsed()) {
            return cmd_scenario(o);
        }
    } catch (const gpt::Error &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalid;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalid;
    }
    return kInvalid;
}
