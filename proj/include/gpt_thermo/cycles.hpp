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

#include <string>
#include <vector>

#include "spm.hpp"

namespace gpt {

struct CycleDefinition {
    GasConfiguration initial;
    std::vector<CycleStep> steps;
};

/// Measure-and-prepare process that tells `states` apart and re-prepares the winner.
inline MeasurementProcess distinguishing_process(const std::vector<State> &states) {
    const auto m = perfectly_distinguishable(states);
    require(m.has_value(), ErrorCode::not_distinguishable, "states are not perfectly distinguishable");
    return measure_and_prepare(states, *m);
}

/// Reads the classical label x and leaves delta_x.
inline MeasurementProcess pointer_process(const SystemPtr &sys) {
    require(sys->family() == SystemFamily::classical, ErrorCode::unsupported_system, "pointer process needs classical(n)");
    std::vector<PositiveMap> maps;
    for (Eigen::Index x = 0; x < sys->dim(); ++x) {
        maps.emplace_back(sys, sys, Mat(Vec::Unit(sys->dim(), x) * Vec::Unit(sys->dim(), x).transpose()), false);
    }
    return {sys, maps};
}

namespace detail {
inline Mat fill(Eigen::Index rows, Eigen::Index cols, double v) { return Mat::Constant(rows, cols, v); }

/// Feedback sending outcome k of a single container to output k.
inline std::vector<Mat> sort_by_outcome(std::size_t k) {
    std::vector<Mat> f;
    for (std::size_t j = 0; j < k; ++j) {
        Mat m = Mat::Zero(static_cast<Eigen::Index>(k), 1);
        m(static_cast<Eigen::Index>(j), 0) = 1.0;
        f.push_back(m);
    }
    return f;
}

inline std::string idx(std::size_t n) { return std::to_string(n); }
} // namespace detail

/// Gbit cycle: separation, regroup, measured mixing, halving, unmeasured mixing.
inline CycleDefinition square_cycle() {
    const auto sys = make_polygon(4);
    const auto v = [&](std::size_t n) { return State::vertex(sys, n % 4); };
    CycleDefinition def{{sys, {}}, {}};
    for (std::size_t n = 0; n < 4; ++n) {
        def.initial.containers.push_back({detail::idx(n), 0.25, 0.25, State::mixture(sys, {{0.75, n}, {0.25, (n + 2) % 4}})});
    }
    const auto trivial = MeasurementProcess::trivial(sys);

    CycleStep sep{"separation", {}, {}, {}};
    for (std::size_t n = 0; n < 4; ++n) {
        sep.groups.push_back({{detail::idx(n)}, distinguishing_process({v(n), v(n + 2)}), detail::sort_by_outcome(2),
                              {3.0 / 16, 1.0 / 16}});
        sep.relabel.push_back(detail::idx(n) + "a");
        sep.relabel.push_back(detail::idx(n) + "b");
    }

    // (m, a) holds rho_m and (m+2, b) holds rho_{m+2+2} = rho_m
    CycleStep regroup{"regroup", {}, {}, {}};
    for (std::size_t m = 0; m < 4; ++m) {
        regroup.groups.push_back({{detail::idx(m) + "a", detail::idx((m + 2) % 4) + "b"}, trivial,
                                  {detail::fill(2, 2, 0.5)}, {0.125, 0.125}});
        regroup.relabel.push_back(detail::idx(m) + "p");
        regroup.relabel.push_back(detail::idx(m) + "q");
    }

    CycleStep mix{"measured mixing", {}, {}, {}};
    for (std::size_t n = 0; n < 4; ++n) {
        mix.groups.push_back({{detail::idx(n) + "p", detail::idx((n + 1) % 4) + "q"},
                              distinguishing_process({v(n), v(n + 1)}),
                              {detail::fill(1, 2, 1.0), detail::fill(1, 2, 1.0)},
                              {0.25}});
        mix.relabel.push_back("h" + detail::idx(n));
    }

    CycleStep halve{"halving", {}, {}, {}};
    for (std::size_t n = 0; n < 4; ++n) {
        halve.groups.push_back({{"h" + detail::idx(n)}, trivial, {detail::fill(2, 1, 0.5)}, {0.125, 0.125}});
        halve.relabel.push_back("h" + detail::idx(n) + "l");
        halve.relabel.push_back("h" + detail::idx(n) + "r");
    }

    // (rho_{n-1} + rho_{n+1}) equals (rho_n + rho_{n+2}) on the square
    CycleStep merge{"unmeasured mixing", {}, {}, {}};
    for (std::size_t n = 0; n < 4; ++n) {
        merge.groups.push_back(
            {{"h" + detail::idx(n) + "l", "h" + detail::idx((n + 3) % 4) + "r"}, trivial, {detail::fill(1, 2, 1.0)}, {0.25}});
        merge.relabel.push_back(detail::idx(n));
    }
    def.steps = {sep, regroup, mix, halve, merge};
    return def;
}

/// Hexagon cycle: separation along opposite vertices, regroup, mixing of next-nearest vertices.
inline CycleDefinition hexagon_cycle() {
    const auto sys = make_polygon(6);
    const auto v = [&](std::size_t n) { return State::vertex(sys, n % 6); };
    CycleDefinition def{{sys, {}}, {}};
    for (std::size_t n = 0; n < 6; ++n) {
        def.initial.containers.push_back(
            {detail::idx(n), 1.0 / 6, 1.0 / 6, State::mixture(sys, {{0.5, (n + 5) % 6}, {0.5, (n + 1) % 6}})});
    }
    const auto trivial = MeasurementProcess::trivial(sys);

    CycleStep sep{"separation", {}, {}, {}};
    for (std::size_t n = 0; n < 6; ++n) {
        sep.groups.push_back({{detail::idx(n)}, distinguishing_process({v(n), v(n + 3)}), detail::sort_by_outcome(2),
                              {1.0 / 8, 1.0 / 24}});
        sep.relabel.push_back(detail::idx(n) + "a");
        sep.relabel.push_back(detail::idx(n) + "b");
    }

    CycleStep regroup{"regroup", {}, {}, {}};
    for (std::size_t m = 0; m < 6; ++m) {
        regroup.groups.push_back({{detail::idx(m) + "a", detail::idx((m + 3) % 6) + "b"}, trivial,
                                  {detail::fill(2, 2, 0.5)}, {1.0 / 12, 1.0 / 12}});
        regroup.relabel.push_back(detail::idx(m) + "p");
        regroup.relabel.push_back(detail::idx(m) + "q");
    }

    CycleStep mix{"measured mixing", {}, {}, {}};
    for (std::size_t n = 0; n < 6; ++n) {
        mix.groups.push_back({{detail::idx((n + 5) % 6) + "p", detail::idx((n + 1) % 6) + "q"},
                              distinguishing_process({v(n + 5), v(n + 1)}),
                              {detail::fill(1, 2, 1.0), detail::fill(1, 2, 1.0)},
                              {1.0 / 6}});
        mix.relabel.push_back(detail::idx(n));
    }
    def.steps = {sep, regroup, mix};
    return def;
}

/// Classical separation at constant volume, compression to p_x, measured mixing back.
inline CycleDefinition von_neumann_cycle(const std::vector<double> &weights) {
    const std::size_t n = weights.size();
    require(n >= 2, ErrorCode::invalid_argument, "von Neumann cycle needs n >= 2");
    double tot = 0.0;
    for (double w : weights) {
        require(w > 0.0, ErrorCode::invalid_argument, "weights must be positive");
        tot += w;
    }
    require(std::abs(tot - 1.0) <= kTol, ErrorCode::invalid_distribution, "weights must sum to 1");
    const auto sys = make_classical(n);
    const Vec p = to_vec(weights);
    CycleDefinition def{{sys, {{"gas", 1.0, 1.0, State(sys, p)}}}, {}};
    const auto pointer = pointer_process(sys);
    const auto trivial = MeasurementProcess::trivial(sys);

    CycleStep sep{"separation", {}, {}, {}};
    sep.groups.push_back({{"gas"}, pointer, detail::sort_by_outcome(n), std::vector<double>(n, 1.0)});
    for (std::size_t x = 0; x < n; ++x) {
        sep.relabel.push_back("x" + detail::idx(x));
    }

    CycleStep comp{"compression", {}, {}, {}};
    for (std::size_t x = 0; x < n; ++x) {
        comp.groups.push_back({{"x" + detail::idx(x)}, trivial, {detail::fill(1, 1, 1.0)}, {weights[x]}});
        comp.relabel.push_back("y" + detail::idx(x));
    }

    CycleStep mix{"measured mixing", {}, {}, {}};
    std::vector<std::string> all;
    for (std::size_t x = 0; x < n; ++x) {
        all.push_back("y" + detail::idx(x));
    }
    mix.groups.push_back({all, pointer, std::vector<Mat>(n, detail::fill(1, static_cast<Eigen::Index>(n), 1.0)), {1.0}});
    mix.relabel.push_back("gas");
    def.steps = {sep, comp, mix};
    return def;
}

/// "square", "hexagon", or "von_neumann" (uniform on two levels unless weights are given).
inline CycleDefinition builtin_cycle(const std::string &name, const std::vector<double> &weights = {}) {
    if (name == "square") {
        return square_cycle();
    }
    if (name == "hexagon") {
        return hexagon_cycle();
    }
    if (name == "von_neumann") {
        return von_neumann_cycle(weights.empty() ? std::vector<double>{0.5, 0.5} : weights);
    }
    throw Error(ErrorCode::invalid_argument, "unknown builtin cycle '" + name + "'");
}

} // namespace gpt
