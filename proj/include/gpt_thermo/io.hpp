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

// JSON formats for systems, processes, cycles and scenarios, plus the state-expression parser.
// Needs nlohmann/json (vendored as json.hpp).

#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cycles.hpp"
#include "info_thermo.hpp"

namespace gpt::io {

using nlohmann::json;

inline constexpr int kSchema = 1;

inline json to_json(const Vec &v) { return to_std(v); }

inline json to_json(const Mat &m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        rows.push_back(to_std(Vec(m.row(r).transpose())));
    }
    return rows;
}

inline Vec vec_from(const json &j, const std::string &what) {
    require(j.is_array(), ErrorCode::parse_error, what + ": expected an array of numbers");
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        require(j[i].is_number(), ErrorCode::parse_error, what + ": entry " + std::to_string(i) + " is not a number");
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

inline Mat mat_from(const json &j, const std::string &what) {
    require(j.is_array() && !j.empty(), ErrorCode::parse_error, what + ": expected a nonempty matrix");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const Vec first = vec_from(j[0], what);
    Mat m(rows, first.size());
    for (Eigen::Index r = 0; r < rows; ++r) {
        const Vec row = vec_from(j[static_cast<std::size_t>(r)], what);
        require(row.size() == first.size(), ErrorCode::parse_error, what + ": ragged matrix");
        m.row(r) = row.transpose();
    }
    return m;
}

// ---- systems --------------------------------------------------------------

/// "square", "hexagon", "classical:N", "polygon:N".
inline SystemPtr system_from_name(const std::string &name) {
    if (name == "square") {
        return make_polygon(4);
    }
    if (name == "hexagon") {
        return make_polygon(6);
    }
    const auto colon = name.find(':');
    if (colon != std::string::npos) {
        const std::string fam = name.substr(0, colon);
        const std::string arg = name.substr(colon + 1);
        std::size_t n = 0;
        try {
            std::size_t used = 0;
            n = std::stoul(arg, &used);
            require(used == arg.size(), ErrorCode::parse_error, "trailing characters in '" + name + "'");
        } catch (const std::logic_error &) {
            throw Error(ErrorCode::parse_error, "bad size in system name '" + name + "'");
        }
        if (fam == "classical") {
            return make_classical(n);
        }
        if (fam == "polygon") {
            return make_polygon(n);
        }
    }
    throw Error(ErrorCode::unsupported_system, "unknown system '" + name + "'");
}

inline json system_to_json(const GptSystem &sys) {
    switch (sys.family()) {
    case SystemFamily::classical:
        return {{"family", "classical"}, {"n", sys.dim()}};
    case SystemFamily::polygon:
        return {{"family", "polygon"}, {"n", sys.polygon_order()}};
    case SystemFamily::direct_sum: {
        json parts = json::array();
        for (const auto &b : sys.branches()) {
            parts.push_back({{"label", b.label}, {"system", system_to_json(*b.system)}});
        }
        return {{"family", "direct_sum"}, {"parts", parts}};
    }
    case SystemFamily::custom: {
        json gens = json::array();
        for (const auto &g : sys.generators()) {
            gens.push_back(to_json(g));
        }
        return {{"family", "custom"}, {"name", sys.name()}, {"generators", gens}, {"unit", to_json(sys.unit())}};
    }
    }
    return {};
}

inline SystemPtr system_from_json(const json &j) {
    if (j.is_string()) {
        return system_from_name(j.get<std::string>());
    }
    require(j.is_object() && j.contains("family"), ErrorCode::parse_error, "system needs a 'family'");
    const auto fam = j.at("family").get<std::string>();
    if (fam == "classical") {
        return make_classical(j.at("n").get<std::size_t>());
    }
    if (fam == "polygon") {
        return make_polygon(j.at("n").get<std::size_t>());
    }
    if (fam == "direct_sum") {
        std::vector<std::pair<std::string, SystemPtr>> parts;
        for (const auto &p : j.at("parts")) {
            parts.emplace_back(p.at("label").get<std::string>(), system_from_json(p.at("system")));
        }
        return direct_sum(parts);
    }
    if (fam == "custom") {
        std::vector<Vec> gens;
        for (const auto &g : j.at("generators")) {
            gens.push_back(vec_from(g, "generator"));
        }
        return GptSystem::custom(gens, vec_from(j.at("unit"), "unit"), j.value("name", "custom"));
    }
    throw Error(ErrorCode::unsupported_system, "unknown system family '" + fam + "'");
}

// ---- state expressions ----------------------------------------------------

/// Parses "0.75*v0+0.25*v2" (weights on generators) or "0.5,0.5" (raw coordinates).
/// Errors carry the character position.
inline State parse_state(const SystemPtr &sys, const std::string &text) {
    const auto fail = [&](std::size_t pos, const std::string &msg) {
        throw Error(ErrorCode::parse_error, "state expression at position " + std::to_string(pos) + ": " + msg);
    };
    std::size_t pos = 0;
    const auto skip = [&] {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])) != 0) {
            ++pos;
        }
    };
    const auto number = [&]() -> double {
        skip();
        const char *begin = text.c_str() + pos;
        char *end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) {
            fail(pos, "expected a number");
        }
        pos += static_cast<std::size_t>(end - begin);
        return v;
    };
    if (text.find('v') == std::string::npos) {
        std::vector<double> coords;
        skip();
        while (true) {
            coords.push_back(number());
            skip();
            if (pos == text.size()) {
                break;
            }
            if (text[pos] != ',') {
                fail(pos, "expected ','");
            }
            ++pos;
        }
        if (static_cast<Eigen::Index>(coords.size()) != sys->dim()) {
            fail(0, "expected " + std::to_string(sys->dim()) + " coordinates, got " + std::to_string(coords.size()));
        }
        return {sys, to_vec(coords)};
    }
    Vec acc = Vec::Zero(sys->dim());
    bool first = true;
    skip();
    while (pos < text.size()) {
        double sign = 1.0;
        if (!first) {
            if (text[pos] == '+') {
                ++pos;
            } else if (text[pos] == '-') {
                sign = -1.0;
                ++pos;
            } else {
                fail(pos, "expected '+' or '-'");
            }
            skip();
        }
        double w = 1.0;
        if (pos < text.size() && text[pos] != 'v') {
            w = number();
            skip();
            if (pos >= text.size() || text[pos] != '*') {
                fail(pos, "expected '*'");
            }
            ++pos;
            skip();
        }
        if (pos >= text.size() || text[pos] != 'v') {
            fail(pos, "expected 'v<index>'");
        }
        ++pos;
        const std::size_t at = pos;
        std::size_t k = 0;
        bool digits = false;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])) != 0) {
            k = k * 10 + static_cast<std::size_t>(text[pos] - '0');
            digits = true;
            ++pos;
        }
        if (!digits) {
            fail(at, "expected a vertex index");
        }
        if (k >= sys->generators().size()) {
            fail(at, "vertex index " + std::to_string(k) + " out of range");
        }
        acc += sign * w * sys->generators()[k];
        first = false;
        skip();
    }
    if (first) {
        fail(0, "empty expression");
    }
    return {sys, acc};
}

// ---- processes ------------------------------------------------------------

inline json process_to_json(const MeasurementProcess &p) {
    json maps = json::array();
    for (const auto &m : p.maps()) {
        maps.push_back(to_json(m.matrix()));
    }
    return {{"kind", "custom"}, {"labels", p.labels()}, {"maps", maps}};
}

/// Kinds: "custom" (explicit maps), "trivial", "pointer", "distinguish" (measure-and-prepare on "states").
inline MeasurementProcess process_from_json(const SystemPtr &sys, const json &j) {
    const auto kind = j.value("kind", "custom");
    if (kind == "trivial") {
        return MeasurementProcess::trivial(sys);
    }
    if (kind == "pointer") {
        return pointer_process(sys);
    }
    if (kind == "distinguish") {
        std::vector<State> states;
        for (const auto &s : j.at("states")) {
            states.push_back(s.is_string() ? parse_state(sys, s.get<std::string>()) : State(sys, vec_from(s, "state")));
        }
        return distinguishing_process(states);
    }
    require(kind == "custom", ErrorCode::parse_error, "unknown process kind '" + kind + "'");
    std::vector<PositiveMap> maps;
    for (const auto &m : j.at("maps")) {
        maps.emplace_back(sys, sys, mat_from(m, "process map"), false);
    }
    if (j.contains("labels")) {
        return {sys, j.at("labels").get<std::vector<std::string>>(), maps};
    }
    return {sys, maps};
}

// ---- cycles ---------------------------------------------------------------

inline json cycle_to_json(const CycleDefinition &def) {
    json initial = json::array();
    for (const auto &c : def.initial.containers) {
        initial.push_back(
            {{"label", c.label}, {"volume", c.volume}, {"fraction", c.fraction}, {"state", to_json(c.internal.coords())}});
    }
    json steps = json::array();
    for (const auto &s : def.steps) {
        json groups = json::array();
        for (const auto &g : s.groups) {
            json fb = json::array();
            for (const auto &f : g.feedback) {
                fb.push_back(to_json(f));
            }
            groups.push_back({{"members", g.members},
                              {"process", process_to_json(g.process)},
                              {"feedback", fb},
                              {"volumes_out", g.volumes_out}});
        }
        json rev = json::array();
        for (const auto &u : s.reversible) {
            rev.push_back(u ? to_json(u->matrix()) : json(nullptr));
        }
        steps.push_back({{"name", s.name}, {"groups", groups}, {"relabel", s.relabel}, {"reversible", rev}});
    }
    return {{"schema", kSchema}, {"system", system_to_json(*def.initial.system)}, {"initial", initial}, {"steps", steps}};
}

inline State state_from_json(const SystemPtr &sys, const json &j) {
    return j.is_string() ? parse_state(sys, j.get<std::string>()) : State(sys, vec_from(j, "state"));
}

inline CycleDefinition cycle_from_json(const json &j) {
    require(j.is_object(), ErrorCode::parse_error, "cycle file must hold an object");
    require(j.value("schema", kSchema) == kSchema, ErrorCode::parse_error, "unsupported schema version");
    const auto sys = system_from_json(j.at("system"));
    CycleDefinition def{{sys, {}}, {}};
    for (const auto &c : j.at("initial")) {
        def.initial.containers.push_back({c.at("label").get<std::string>(), c.at("volume").get<double>(),
                                          c.at("fraction").get<double>(), state_from_json(sys, c.at("state"))});
    }
    std::size_t index = 0;
    for (const auto &s : j.at("steps")) {
        CycleStep step{s.value("name", "step " + std::to_string(index++)), {}, {}, {}};
        for (const auto &g : s.at("groups")) {
            std::vector<Mat> fb;
            for (const auto &f : g.at("feedback")) {
                fb.push_back(mat_from(f, "feedback"));
            }
            step.groups.push_back({g.at("members").get<std::vector<std::string>>(), process_from_json(sys, g.at("process")),
                                   fb, g.at("volumes_out").get<std::vector<double>>()});
        }
        step.relabel = s.at("relabel").get<std::vector<std::string>>();
        if (s.contains("reversible")) {
            for (const auto &u : s.at("reversible")) {
                if (u.is_null()) {
                    step.reversible.emplace_back(std::nullopt);
                } else {
                    step.reversible.emplace_back(PositiveMap(sys, sys, mat_from(u, "reversible map"), true));
                }
            }
        }
        def.steps.push_back(std::move(step));
    }
    return def;
}

inline json read_json_file(const std::string &path) {
    std::ifstream in(path);
    require(in.good(), ErrorCode::invalid_argument, "cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error &e) {
        throw Error(ErrorCode::parse_error, path + ": " + e.what());
    }
}

// ---- scenarios ------------------------------------------------------------

inline json blocks_to_json(const BlockProcess &p) {
    json rows = json::array();
    for (const auto &row : p.blocks) {
        json r = json::array();
        for (const auto &b : row) {
            r.push_back(to_json(b));
        }
        rows.push_back(r);
    }
    return rows;
}

inline std::vector<std::vector<Mat>> blocks_from_json(const json &j) {
    std::vector<std::vector<Mat>> out;
    for (const auto &row : j) {
        std::vector<Mat> r;
        for (const auto &b : row) {
            r.push_back(mat_from(b, "block"));
        }
        out.push_back(std::move(r));
    }
    return out;
}

/// Entropy on A by name: "shannon" (classical only), "mix", "meas", "acc".
inline EntropyFunction entropy_by_name(const std::string &name, const SystemPtr &a) {
    if (name == "shannon") {
        require(a->family() == SystemFamily::classical, ErrorCode::unsupported_system, "shannon needs a classical A");
        return shannon_entropy();
    }
    if (name == "mix") {
        return entropy_function(EntropyKind::simple(EntropyTag::mix), a);
    }
    if (name == "meas") {
        return entropy_function(EntropyKind::simple(EntropyTag::meas), a);
    }
    if (name == "acc") {
        return entropy_function(EntropyKind::simple(EntropyTag::acc), a);
    }
    throw Error(ErrorCode::invalid_argument, "unknown entropy '" + name + "'");
}

inline json scenario_to_json(const Scenario &sc) {
    json fb = json::array();
    for (const auto &f : sc.feedback) {
        fb.push_back(blocks_to_json(f));
    }
    return {{"schema", kSchema},
            {"beta", sc.beta},
            {"system", system_to_json(*sc.a)},
            {"entropy", sc.entropy_name},
            {"energies",
             {{"A", to_json(sc.energy_a.functional)},
              {"A_base", sc.energy_a.base},
              {"M", to_json(sc.energy_m)},
              {"B1", to_json(sc.energy_b1)},
              {"B2", to_json(sc.energy_b2)},
              {"B3", to_json(sc.energy_b3)}}},
            {"initial", {{"A", to_json(sc.rho_a)}, {"M", to_json(sc.rho_m)}}},
            {"outcomes", sc.outcomes},
            {"measurement", blocks_to_json(sc.measurement)},
            {"feedback", fb},
            {"erasure", to_json(sc.erasure)}};
}

inline Scenario scenario_from_json(const json &j) {
    require(j.is_object(), ErrorCode::parse_error, "scenario file must hold an object");
    require(j.value("schema", kSchema) == kSchema, ErrorCode::parse_error, "unsupported schema version");
    Scenario sc;
    sc.beta = j.at("beta").get<double>();
    sc.a = system_from_json(j.at("system"));
    sc.entropy_name = j.value("entropy", sc.a->family() == SystemFamily::classical ? "shannon" : "meas");
    sc.entropy_a = entropy_by_name(sc.entropy_name, sc.a);
    const auto &e = j.at("energies");
    sc.energy_a = {sc.a, vec_from(e.at("A"), "energies.A"), e.value("A_base", 0.0)};
    require(sc.energy_a.functional.size() == sc.a->dim(), ErrorCode::invalid_scenario, "energies.A has the wrong size");
    sc.energy_m = vec_from(e.at("M"), "energies.M");
    sc.energy_b1 = vec_from(e.at("B1"), "energies.B1");
    sc.energy_b2 = vec_from(e.at("B2"), "energies.B2");
    sc.energy_b3 = vec_from(e.at("B3"), "energies.B3");
    const auto &init = j.at("initial");
    sc.rho_a = init.at("A").is_string() ? parse_state(sc.a, init.at("A").get<std::string>()).coords()
                                        : vec_from(init.at("A"), "initial.A");
    sc.rho_m = vec_from(init.at("M"), "initial.M");
    sc.outcomes = j.at("outcomes").get<std::size_t>();
    const Register rk{"K", sc.outcomes};
    const Register rm{"M", static_cast<std::size_t>(sc.energy_m.size())};
    const Register rb1{"B1", static_cast<std::size_t>(sc.energy_b1.size())};
    const Register rb2{"B2", static_cast<std::size_t>(sc.energy_b2.size())};
    sc.measurement = BlockProcess{sc.a, {rm, rb1}, {rk, rm, rb1}, blocks_from_json(j.at("measurement"))};
    for (const auto &f : j.at("feedback")) {
        sc.feedback.push_back(BlockProcess{sc.a, {rb2}, {rb2}, blocks_from_json(f)});
    }
    sc.erasure = mat_from(j.at("erasure"), "erasure");
    return sc;
}

} // namespace gpt::io
