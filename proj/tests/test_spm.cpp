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

#include "support.hpp"

using Catch::Matchers::WithinAbs;
using gpt::Mat;
using gpt::Vec;

namespace {

const double kLog2 = std::log(2.0);
const double kH34 = -(0.75 * std::log(0.75) + 0.25 * std::log(0.25));
const double kTarget = 0.25 * std::log(27.0 / 16.0);

gpt::ErrorCode code_of(const std::function<void()> &f) {
    try {
        f();
    } catch (const gpt::Error &e) {
        return e.code();
    }
    FAIL("no error thrown");
    return gpt::ErrorCode::internal_error;
}

gpt::EntropyFunction meas_of(const gpt::SystemPtr &sys) {
    return gpt::entropy_function(gpt::EntropyKind::simple(gpt::EntropyTag::meas), sys);
}

} // namespace

TEST_CASE("isothermal expansion without measurement", "[spm]") {
    const auto sq = gpt::make_polygon(4);
    const gpt::GasConfiguration cfg{sq, {{"a", 1.0, 1.0, gpt::State::vertex(sq, 0)}}};
    const gpt::CycleStep step{"expand", {{{"a"}, gpt::MeasurementProcess::trivial(sq), {Mat::Ones(1, 1)}, {2.0}}}, {"a"}, {}};
    const auto r = gpt::step_work(cfg, step);
    CHECK_THAT(r.w_ext, WithinAbs(kLog2, 1e-12));
    CHECK_THAT(r.next.containers[0].volume, WithinAbs(2.0, 0.0));
}

TEST_CASE("separation and mixing protocols", "[spm]") {
    const auto sq = gpt::make_polygon(4);
    const auto p02 = gpt::distinguishing_process({gpt::State::vertex(sq, 0), gpt::State::vertex(sq, 2)});
    const gpt::Container c{"c", 1.0, 1.0, gpt::State::mixture(sq, {{0.75, 0}, {0.25, 2}})};
    const auto [parts, w] = gpt::separation(c, p02);
    REQUIRE(parts.size() == 2);
    CHECK_THAT(w, WithinAbs(-kH34, 1e-12));
    CHECK_THAT(parts[0].fraction, WithinAbs(0.75, 1e-12));
    CHECK_THAT(parts[1].volume, WithinAbs(0.25, 1e-12));
    // mixing back with the same process recovers the work
    const auto [merged, w2] = gpt::mixing(parts, p02);
    CHECK_THAT(w + w2, WithinAbs(0.0, 1e-12));
    CHECK(gpt::sup_distance(merged.internal.coords(), c.internal.coords()) < 1e-12);
    CHECK_THAT(merged.volume, WithinAbs(1.0, 1e-12));

    // adjacent vertices, half each
    const auto p01 = gpt::distinguishing_process({gpt::State::vertex(sq, 0), gpt::State::vertex(sq, 1)});
    const auto [m01, w01] = gpt::mixing({{"x", 0.5, 0.5, gpt::State::vertex(sq, 0)}, {"y", 0.5, 0.5, gpt::State::vertex(sq, 1)}}, p01);
    CHECK_THAT(w01, WithinAbs(kLog2, 1e-12));
    // identical states without measurement
    const auto [same, w0] = gpt::mixing({{"x", 0.5, 0.5, gpt::State::vertex(sq, 0)}, {"y", 0.5, 0.5, gpt::State::vertex(sq, 0)}},
                                        gpt::MeasurementProcess::trivial(sq));
    CHECK_THAT(w0, WithinAbs(0.0, 1e-12));
    // pure input with its own measurement
    const auto [single, ws] = gpt::separation({"p", 1.0, 1.0, gpt::State::vertex(sq, 2)}, p02);
    CHECK(single.size() == 1);
    CHECK_THAT(ws, WithinAbs(0.0, 1e-15));
    // the mixture is not a fixed point of a branch
    CHECK(code_of([&] {
              gpt::mixing({{"x", 0.5, 0.5, gpt::State::mixture(sq, {{0.5, 0}, {0.5, 1}})},
                           {"y", 0.5, 0.5, gpt::State::vertex(sq, 2)}},
                          p02);
          }) == gpt::ErrorCode::not_mixable);
}

TEST_CASE("hexagon separation then mixing is work neutral", "[spm]") {
    const auto hx = gpt::make_polygon(6);
    const auto p = gpt::distinguishing_process({gpt::State::vertex(hx, 0), gpt::State::vertex(hx, 3)});
    const gpt::Container c{"c", 1.0, 1.0, gpt::State::mixture(hx, {{0.5, 5}, {0.5, 1}})};
    const auto [parts, w] = gpt::separation(c, p);
    CHECK_THAT(parts[0].fraction, WithinAbs(0.75, 1e-12));
    const auto [back, w2] = gpt::mixing(parts, p);
    CHECK_THAT(w + w2, WithinAbs(0.0, 1e-12));
    CHECK(gpt::sup_distance(back.internal.coords(), c.internal.coords()) < 1e-12);
}

TEST_CASE("built-in cycles", "[spm][cycle]") {
    SECTION("square") {
        const auto def = gpt::square_cycle();
        CHECK(def.steps.size() == 5);
        const auto l = gpt::run_cycle(def.initial, def.steps);
        CHECK_THAT(l.total, WithinAbs(kTarget, 1e-9));
        CHECK_THAT(l.steps[0].w_ext, WithinAbs(-kH34, 1e-12));
        CHECK_THAT(l.steps[1].w_ext, WithinAbs(0.0, 1e-12));
        CHECK_THAT(l.steps[2].w_ext, WithinAbs(kLog2, 1e-12));
        CHECK_THAT(l.steps[3].w_ext, WithinAbs(0.0, 1e-12));
        CHECK_THAT(l.steps[4].w_ext, WithinAbs(0.0, 1e-12));
        CHECK(l.cyclic);
        double sum = 0.0;
        for (const auto &s : l.steps) {
            sum += s.w_ext;
        }
        CHECK_THAT(l.total, WithinAbs(sum, 1e-12));
    }
    SECTION("hexagon") {
        const auto def = gpt::hexagon_cycle();
        CHECK(def.steps.size() == 3);
        const auto l = gpt::run_cycle(def.initial, def.steps);
        CHECK_THAT(l.total, WithinAbs(kTarget, 1e-9));
        CHECK_THAT(l.steps[0].w_ext, WithinAbs(-kH34, 1e-12));
        CHECK_THAT(l.steps[2].w_ext, WithinAbs(kLog2, 1e-12));
    }
    SECTION("von Neumann, two levels") {
        const auto def = gpt::von_neumann_cycle({0.5, 0.5});
        const auto l = gpt::run_cycle(def.initial, def.steps);
        CHECK_THAT(l.steps[1].w_ext, WithinAbs(-kLog2, 1e-12));
        CHECK_THAT(l.total, WithinAbs(0.0, 1e-12));
    }
    CHECK(code_of([] { gpt::builtin_cycle("octagon"); }) == gpt::ErrorCode::invalid_argument);
}

TEST_CASE("stage fractions are conserved and branch sums match", "[spm][cycle]") {
    for (const auto *name : {"square", "hexagon"}) {
        const auto def = gpt::builtin_cycle(name);
        const auto l = gpt::run_cycle(def.initial, def.steps);
        const auto &sys = l.system;
        for (const auto &st : l.steps) {
            double f1 = 0.0;
            double f2 = 0.0;
            for (const auto &g : st.groups) {
                for (const auto &row : g.stage1) {
                    for (const auto &v : row) {
                        f1 += sys->unit().dot(v);
                    }
                }
                // summing over k commutes with moving by feedback
                Vec lhs = Vec::Zero(sys->dim());
                Vec rhs = Vec::Zero(sys->dim());
                for (const auto &row : g.stage2) {
                    for (const auto &v : row) {
                        f2 += sys->unit().dot(v);
                        lhs += v;
                    }
                }
                for (std::size_t z = 0; z < g.in_states.size(); ++z) {
                    for (const auto &m : g.process.maps()) {
                        rhs += g.in_fractions[z] * (m.matrix() * g.in_states[z].coords());
                    }
                }
                CHECK(gpt::sup_distance(lhs, rhs) < 1e-12);
            }
            CHECK_THAT(f1, WithinAbs(1.0, 1e-12));
            CHECK_THAT(f2, WithinAbs(1.0, 1e-12));
        }
    }
}

TEST_CASE("step validation errors", "[spm][errors]") {
    const auto sq = gpt::make_polygon(4);
    const gpt::GasConfiguration cfg{sq, {{"a", 1.0, 1.0, gpt::State::vertex(sq, 0)}}};
    const auto triv = gpt::MeasurementProcess::trivial(sq);
    // not column-stochastic
    CHECK(code_of([&] {
              gpt::step_work(cfg, {"bad", {{{"a"}, triv, {Mat::Constant(2, 1, 0.7)}, {0.5, 0.5}}}, {"x", "y"}, {}});
          }) == gpt::ErrorCode::invalid_argument);
    // container not covered
    const gpt::GasConfiguration two{sq, {{"a", 0.5, 0.5, gpt::State::vertex(sq, 0)}, {"b", 0.5, 0.5, gpt::State::vertex(sq, 1)}}};
    CHECK(code_of([&] { gpt::step_work(two, {"bad", {{{"a"}, triv, {Mat::Ones(1, 1)}, {0.5}}}, {"a"}, {}}); }) ==
          gpt::ErrorCode::invalid_argument);
    // fractions do not sum to one
    const gpt::GasConfiguration leak{sq, {{"a", 1.0, 0.9, gpt::State::vertex(sq, 0)}}};
    CHECK(code_of([&] { leak.validate(); }) == gpt::ErrorCode::conservation_error);
    // a non-repeatable process (measure v0 vs v2, prepare the centre)
    const auto m = *gpt::perfectly_distinguishable({gpt::State::vertex(sq, 0), gpt::State::vertex(sq, 2)});
    const Vec centre = gpt::barycenter(*sq);
    const gpt::MeasurementProcess noisy(sq, {gpt::PositiveMap(sq, sq, centre * m.effects()[0].functional().transpose(), false),
                                             gpt::PositiveMap(sq, sq, centre * m.effects()[1].functional().transpose(), false)});
    CHECK_FALSE(gpt::is_repeatable(noisy));
    CHECK(code_of([&] {
              gpt::step_work(cfg, {"bad", {{{"a"}, noisy, {Mat::Ones(1, 1), Mat::Ones(1, 1)}, {1.0}}}, {"a"}, {}});
          }) == gpt::ErrorCode::invalid_argument);
}

TEST_CASE("open process is rejected as a cycle unless diagnosing", "[spm][errors]") {
    const auto sq = gpt::make_polygon(4);
    const gpt::GasConfiguration cfg{sq, {{"a", 1.0, 1.0, gpt::State::vertex(sq, 0)}}};
    const std::vector<gpt::CycleStep> steps{
        {"expand", {{{"a"}, gpt::MeasurementProcess::trivial(sq), {Mat::Ones(1, 1)}, {2.0}}}, {"a"}, {}}};
    CHECK(code_of([&] { gpt::run_cycle(cfg, steps); }) == gpt::ErrorCode::not_a_cycle);
    const auto l = gpt::run_cycle(cfg, steps, true);
    CHECK_FALSE(l.cyclic);
    CHECK_THAT(l.cyclicity_residual, WithinAbs(1.0, 1e-12));
}

TEST_CASE("reversible maps are applied to outputs", "[spm]") {
    const auto sq = gpt::make_polygon(4);
    const gpt::GasConfiguration cfg{sq, {{"a", 1.0, 1.0, gpt::State::vertex(sq, 0)}}};
    gpt::CycleStep rotate{"rotate", {{{"a"}, gpt::MeasurementProcess::trivial(sq), {Mat::Ones(1, 1)}, {1.0}}}, {"a"}, {}};
    rotate.reversible.emplace_back(gpt::polygon_rotation(sq, 1));
    const auto r = gpt::step_work(cfg, rotate);
    CHECK_THAT(r.w_ext, WithinAbs(0.0, 1e-15));
    CHECK(gpt::sup_distance(r.next.containers[0].internal.coords(), sq->generators()[1]) < 1e-12);
    const std::vector<gpt::CycleStep> four(4, rotate);
    CHECK(gpt::run_cycle(cfg, four).cyclic);
}

TEST_CASE("concave-entropy work bound", "[spm][bounds]") {
    for (const auto *name : {"square", "hexagon"}) {
        const auto def = gpt::builtin_cycle(name);
        const auto l = gpt::run_cycle(def.initial, def.steps);
        const auto b = gpt::lemma1_bound(l, meas_of(l.system));
        CHECK(b.total >= l.total - 1e-7);
        CHECK(b.per_step.size() == l.steps.size());
    }
    const auto vn = gpt::von_neumann_cycle({0.1, 0.2, 0.3, 0.4});
    const auto lv = gpt::run_cycle(vn.initial, vn.steps);
    CHECK_THAT(gpt::lemma1_bound(lv, gpt::shannon_entropy()).total, WithinAbs(lv.total, 1e-9));

    // one-step expansion: no measurement, so every entropy term cancels
    const auto sq = gpt::make_polygon(4);
    const gpt::GasConfiguration cfg{sq, {{"a", 1.0, 1.0, gpt::State::mixture(sq, {{0.5, 0}, {0.5, 1}})}}};
    const auto l = gpt::run_cycle(
        cfg, {{"expand", {{{"a"}, gpt::MeasurementProcess::trivial(sq), {Mat::Ones(1, 1)}, {2.0}}}, {"a"}, {}}}, true);
    CHECK_THAT(gpt::lemma1_bound(l, meas_of(sq)).total, WithinAbs(0.0, 1e-12));

    gpt::WorkLedger broken = l;
    broken.steps[0].groups.clear();
    CHECK(code_of([&] { gpt::lemma1_bound(broken, meas_of(sq)); }) == gpt::ErrorCode::invalid_ledger);
}

TEST_CASE("per-instance SPM conditions", "[spm][bounds]") {
    SECTION("classical cycles pass with Shannon and cannot extract work") {
        std::mt19937_64 rng(51);
        for (int t = 0; t < 10; ++t) {
            const auto def = oracle::random_classical_cycle(rng);
            const auto l = gpt::run_cycle(def.initial, def.steps);
            const auto rep = gpt::check_thm2(l, gpt::shannon_entropy(), 50, 1);
            CHECK(rep.all_pass);
            CHECK(l.total <= 1e-9);
            for (const auto &c : rep.instances) {
                CHECK_THAT(c.slack, WithinAbs(0.0, 1e-9));
            }
        }
    }
    SECTION("square with S_meas fails the second inequality at the measured mixing") {
        const auto def = gpt::square_cycle();
        const auto l = gpt::run_cycle(def.initial, def.steps);
        const auto rep = gpt::check_thm2(l, meas_of(l.system), 100, 2);
        CHECK_FALSE(rep.all_pass);
        CHECK_FALSE(rep.concavity.has_value());
        const auto f = rep.failures();
        REQUIRE_FALSE(f.empty());
        for (const auto &x : f) {
            CHECK(x.inequality == 2);
            CHECK(x.step == 2);
        }
    }
    SECTION("square with S_acc is flagged") {
        const auto def = gpt::square_cycle();
        const auto l = gpt::run_cycle(def.initial, def.steps);
        const auto calc = std::make_shared<const gpt::EntropyCalculator>(l.system);
        const auto rep = gpt::check_thm2(l, gpt::entropy_function(gpt::EntropyKind::simple(gpt::EntropyTag::acc), calc));
        CHECK_FALSE(rep.all_pass);
        CHECK((rep.concavity.has_value() || !rep.failures().empty()));
    }
}

TEST_CASE("strong SPM condition per state", "[spm][bounds]") {
    std::mt19937_64 rng(52);
    const auto c = gpt::make_classical(3);
    std::vector<gpt::State> cs;
    for (int t = 0; t < 10; ++t) {
        cs.push_back(gpt::random_state(c, rng));
    }
    for (const auto &s : gpt::check_cor1(gpt::pointer_process(c), gpt::shannon_entropy(), cs)) {
        CHECK_THAT(s.left, WithinAbs(0.0, 1e-12));
        CHECK_THAT(s.right, WithinAbs(0.0, 1e-12));
    }
    const auto sq = gpt::make_polygon(4);
    const auto p = gpt::distinguishing_process({gpt::State::vertex(sq, 0), gpt::State::vertex(sq, 2)});
    const auto calc = std::make_shared<const gpt::EntropyCalculator>(sq);
    const auto acc = gpt::entropy_function(gpt::EntropyKind::simple(gpt::EntropyTag::acc), calc);
    std::vector<gpt::State> ss;
    for (int t = 0; t < 20; ++t) {
        ss.push_back(gpt::random_state(sq, rng));
    }
    for (const auto &s : gpt::check_cor1(p, acc, ss)) {
        CHECK(s.right >= -1e-9);
    }
}

TEST_CASE("discrepancy bound", "[spm][bounds]") {
    for (const auto *name : {"square", "hexagon"}) {
        const auto def = gpt::builtin_cycle(name);
        const auto l = gpt::run_cycle(def.initial, def.steps);
        const gpt::EntropyCalculator calc(l.system);
        CHECK(gpt::discrepancy_bound(l, calc).total >= kTarget - 1e-9);
    }
    const auto vn = gpt::von_neumann_cycle({0.3, 0.7});
    const auto lv = gpt::run_cycle(vn.initial, vn.steps);
    CHECK_THAT(gpt::discrepancy_bound(lv, gpt::EntropyCalculator(lv.system)).total, WithinAbs(0.0, 1e-12));

    // a repeatable process that is not strongly repeatable fails the precondition
    const auto sq = gpt::make_polygon(4);
    const auto m = *gpt::perfectly_distinguishable({gpt::State::vertex(sq, 0), gpt::State::vertex(sq, 1)});
    const gpt::State mid = gpt::State::mixture(sq, {{0.5, 0}, {0.5, 3}});
    const gpt::MeasurementProcess weak(
        sq, {gpt::PositiveMap(sq, sq, mid.coords() * m.effects()[0].functional().transpose(), false),
             gpt::PositiveMap(sq, sq, sq->generators()[1] * m.effects()[1].functional().transpose(), false)});
    const gpt::GasConfiguration cfg{sq, {{"a", 1.0, 1.0, mid}}};
    const auto l = gpt::run_cycle(cfg, {{"look", {{{"a"}, weak, {Mat::Ones(1, 1), Mat::Ones(1, 1)}, {1.0}}}, {"a"}, {}}}, true);
    CHECK(code_of([&] { gpt::discrepancy_bound(l, gpt::EntropyCalculator(sq)); }) == gpt::ErrorCode::precondition_error);
}
