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

#include <catch_amalgamated.hpp>

#include "gpt_thermo/io.hpp"
#include "support.hpp"

using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using gpt::io::json;

TEST_CASE("system names", "[io]") {
    CHECK(gpt::io::system_from_name("square")->polygon_order() == 4);
    CHECK(gpt::io::system_from_name("hexagon")->polygon_order() == 6);
    CHECK(gpt::io::system_from_name("classical:3")->dim() == 3);
    CHECK(gpt::io::system_from_name("polygon:5")->polygon_order() == 5);
    CHECK_THROWS_AS(gpt::io::system_from_name("polygon:x"), gpt::Error);
    CHECK_THROWS_AS(gpt::io::system_from_name("sphere"), gpt::Error);
}

TEST_CASE("system JSON round trip", "[io]") {
    const std::vector<gpt::SystemPtr> systems = {
        gpt::make_classical(3), gpt::make_polygon(6), gpt::classical_times(2, gpt::make_polygon(4)),
        gpt::GptSystem::custom({gpt::to_vec({1, 0, 1}), gpt::to_vec({0, 1, 1}), gpt::to_vec({-1, -1, 1})},
                               gpt::to_vec({0, 0, 1}), "triangle")};
    for (const auto &s : systems) {
        const auto back = gpt::io::system_from_json(gpt::io::system_to_json(*s));
        CHECK(back->name() == s->name());
        CHECK(back->dim() == s->dim());
        CHECK((back->generator_matrix() - s->generator_matrix()).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("state expressions", "[io]") {
    const auto sq = gpt::make_polygon(4);
    const auto s = gpt::io::parse_state(sq, "0.75*v0+0.25*v2");
    CHECK(gpt::sup_distance(s.coords(), gpt::State::mixture(sq, {{0.75, 0}, {0.25, 2}}).coords()) < 1e-15);
    const auto t = gpt::io::parse_state(sq, " 0.5 * v1 + 0.5*v3 ");
    CHECK(gpt::sup_distance(t.coords(), gpt::barycenter(*sq)) < 1e-15);
    CHECK(gpt::sup_distance(gpt::io::parse_state(sq, "v2").coords(), sq->generators()[2]) < 1e-15);
    const auto c = gpt::io::parse_state(gpt::make_classical(2), "0.5,0.5");
    CHECK_THAT(c.coords()(1), WithinAbs(0.5, 0.0));

    const auto msg = [&](const std::string &text) {
        try {
            gpt::io::parse_state(sq, text);
        } catch (const gpt::Error &e) {
            CHECK(e.code() == gpt::ErrorCode::parse_error);
            return std::string(e.what());
        }
        return std::string("no error");
    };
    CHECK_THAT(msg("0.5*v0+0.5*w1"), ContainsSubstring("position 11"));
    CHECK_THAT(msg("0.5*v9"), ContainsSubstring("out of range"));
    CHECK_THAT(msg("0.5 v0"), ContainsSubstring("expected '*'"));
    CHECK_THAT(msg("0.5*v"), ContainsSubstring("vertex index"));
    CHECK_THAT(msg("0.5,0.5"), ContainsSubstring("expected 3 coordinates"));
    // valid syntax, but not a normalized state
    CHECK_THROWS_AS(gpt::io::parse_state(sq, "0.5*v0"), gpt::Error);
}

TEST_CASE("cycle definitions round trip to identical ledgers", "[io]") {
    for (const auto *name : {"square", "hexagon", "von_neumann"}) {
        const auto def = gpt::builtin_cycle(name);
        const json j = gpt::io::cycle_to_json(def);
        CHECK(j.at("schema") == 1);
        const auto back = gpt::io::cycle_from_json(json::parse(j.dump()));
        const auto a = gpt::run_cycle(def.initial, def.steps);
        const auto b = gpt::run_cycle(back.initial, back.steps);
        REQUIRE(a.steps.size() == b.steps.size());
        for (std::size_t i = 0; i < a.steps.size(); ++i) {
            CHECK(a.steps[i].w_ext == b.steps[i].w_ext);
            CHECK(a.steps[i].name == b.steps[i].name);
        }
        CHECK(a.total == b.total);
    }
}

TEST_CASE("hand-written cycle file with shorthand processes", "[io]") {
    const auto j = json::parse(R"({
      "system": "square",
      "initial": [{"label": "a", "volume": 1.0, "fraction": 1.0, "state": "0.75*v0+0.25*v2"}],
      "steps": [
        {"name": "separate",
         "groups": [{"members": ["a"], "process": {"kind": "distinguish", "states": ["v0", "v2"]},
                     "feedback": [[[1], [0]], [[0], [1]]], "volumes_out": [0.75, 0.25]}],
         "relabel": ["x", "y"]},
        {"name": "mix",
         "groups": [{"members": ["x", "y"], "process": {"kind": "distinguish", "states": ["v0", "v2"]},
                     "feedback": [[[1, 1]], [[1, 1]]], "volumes_out": [1.0]}],
         "relabel": ["a"]}
      ]})");
    const auto def = gpt::io::cycle_from_json(j);
    const auto l = gpt::run_cycle(def.initial, def.steps);
    CHECK_THAT(l.total, WithinAbs(0.0, 1e-12));
    CHECK_THAT(l.steps[0].w_ext, WithinAbs(0.75 * std::log(0.75) + 0.25 * std::log(0.25), 1e-12));
}

TEST_CASE("malformed cycle files", "[io][errors]") {
    CHECK_THROWS_AS(gpt::io::cycle_from_json(json::parse(R"({"schema": 2, "system": "square", "initial": [], "steps": []})")),
                    gpt::Error);
    CHECK_THROWS_AS(gpt::io::cycle_from_json(json::parse(R"([1, 2])")), gpt::Error);
    CHECK_THROWS(gpt::io::cycle_from_json(json::parse(R"({"system": "square"})")));
}

TEST_CASE("scenario JSON round trip", "[io]") {
    const auto sc = gpt::szilard_scenario(1.3, 0.15);
    const auto back = gpt::io::scenario_from_json(json::parse(gpt::io::scenario_to_json(sc).dump()));
    const auto a = gpt::evaluate_scenario(sc);
    const auto b = gpt::evaluate_scenario(back);
    CHECK(a.w_ext == b.w_ext);
    CHECK(a.slack1 == b.slack1);
    CHECK(a.slack3 == b.slack3);
    std::mt19937_64 rng(71);
    const auto r = gpt::random_classical_scenario(rng);
    const auto rb = gpt::io::scenario_from_json(json::parse(gpt::io::scenario_to_json(r).dump()));
    CHECK(gpt::evaluate_scenario(r).slack2 == gpt::evaluate_scenario(rb).slack2);
}
