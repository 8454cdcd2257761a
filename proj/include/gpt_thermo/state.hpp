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
#include <utility>
#include <vector>

#include "system.hpp"

namespace gpt {

class State;

/// Unnormalized state: cone element with weight in [0, 1].
class SubState {
  public:
    SubState(SystemPtr sys, Vec coords, double tol = kTol) : sys_{std::move(sys)}, coords_{std::move(coords)} {
        require(sys_ != nullptr, ErrorCode::invalid_argument, "null system");
        require(coords_.size() == sys_->dim(), ErrorCode::invalid_argument, "state dimension mismatch");
        require(cone_contains(*sys_, coords_, tol), ErrorCode::positivity_violation,
                "vector is outside the cone of " + sys_->name());
        const double w = weight();
        require(w >= -tol && w <= 1.0 + tol, ErrorCode::invalid_argument, "substate weight outside [0,1]");
    }

    static SubState zero(const SystemPtr &sys) { return {sys, Vec::Zero(sys->dim())}; }

    [[nodiscard]] const SystemPtr &system() const { return sys_; }
    [[nodiscard]] const Vec &coords() const { return coords_; }
    [[nodiscard]] double weight() const { return sys_->unit().dot(coords_); }
    [[nodiscard]] State normalized() const;

  private:
    SystemPtr sys_;
    Vec coords_;
};

/// Normalized cone element.
class State {
  public:
    State(SystemPtr sys, Vec coords, double tol = kTol) : sys_{std::move(sys)}, coords_{std::move(coords)} {
        require(sys_ != nullptr, ErrorCode::invalid_argument, "null system");
        require(coords_.size() == sys_->dim(), ErrorCode::invalid_argument, "state dimension mismatch");
        require(cone_contains(*sys_, coords_, tol), ErrorCode::positivity_violation,
                "vector is outside the cone of " + sys_->name());
        require(std::abs(sys_->unit().dot(coords_) - 1.0) <= tol, ErrorCode::invalid_argument,
                "state is not normalized");
    }

    /// Vertex k (generator k).
    static State vertex(const SystemPtr &sys, std::size_t k) {
        require(k < sys->generators().size(), ErrorCode::invalid_argument, "vertex index out of range");
        return {sys, sys->generators()[k]};
    }

    /// Convex combination of vertices.
    static State mixture(const SystemPtr &sys, const std::vector<std::pair<double, std::size_t>> &terms) {
        Vec c = Vec::Zero(sys->dim());
        for (const auto &[w, k] : terms) {
            require(k < sys->generators().size(), ErrorCode::invalid_argument, "vertex index out of range");
            c += w * sys->generators()[k];
        }
        return {sys, c};
    }

    [[nodiscard]] const SystemPtr &system() const { return sys_; }
    [[nodiscard]] const Vec &coords() const { return coords_; }
    [[nodiscard]] SubState scaled(double w) const { return {sys_, w * coords_}; }
    operator SubState() const { return {sys_, coords_}; } // NOLINT(google-explicit-constructor)

  private:
    SystemPtr sys_;
    Vec coords_;
};

inline State SubState::normalized() const {
    const double w = weight();
    require(w > 0.0, ErrorCode::invalid_argument, "cannot normalize a zero substate");
    return {sys_, coords_ / w};
}

/// Linear functional between 0 and the unit on the state space.
class Effect {
  public:
    Effect(SystemPtr sys, Vec functional, double tol = kTol) : sys_{std::move(sys)}, f_{std::move(functional)} {
        require(sys_ != nullptr, ErrorCode::invalid_argument, "null system");
        require(f_.size() == sys_->dim(), ErrorCode::invalid_argument, "effect dimension mismatch");
        for (const auto &g : sys_->generators()) {
            require(f_.dot(g) >= -tol, ErrorCode::positivity_violation, "effect negative on a generator");
            require((sys_->unit() - f_).dot(g) >= -tol, ErrorCode::positivity_violation,
                    "effect exceeds the unit on a generator");
        }
    }

    static Effect unit(const SystemPtr &sys) { return {sys, sys->unit()}; }

    [[nodiscard]] const SystemPtr &system() const { return sys_; }
    [[nodiscard]] const Vec &functional() const { return f_; }
    [[nodiscard]] double operator()(const Vec &coords) const { return f_.dot(coords); }
    [[nodiscard]] double operator()(const SubState &s) const { return f_.dot(s.coords()); }
    [[nodiscard]] double operator()(const State &s) const { return f_.dot(s.coords()); }

  private:
    SystemPtr sys_;
    Vec f_;
};

/// Cone-preserving linear map; `process` additionally means unit-preserving.
class PositiveMap {
  public:
    PositiveMap(SystemPtr source, SystemPtr target, Mat matrix, bool process, double tol = kTol)
        : src_{std::move(source)}, tgt_{std::move(target)}, m_{std::move(matrix)}, process_{process} {
        require(src_ && tgt_, ErrorCode::invalid_argument, "null system");
        require(m_.rows() == tgt_->dim() && m_.cols() == src_->dim(), ErrorCode::invalid_argument,
                "map shape does not match systems");
        const double scale = 1.0 + m_.cwiseAbs().maxCoeff();
        for (const auto &g : src_->generators()) {
            require(cone_contains(*tgt_, m_ * g, tol * scale), ErrorCode::positivity_violation,
                    "map sends a generator outside the target cone");
        }
        if (process_) {
            const Vec lhs = m_.transpose() * tgt_->unit();
            require(sup_distance(lhs, src_->unit()) <= tol * scale, ErrorCode::invalid_argument,
                    "map is flagged as a process but does not preserve the unit");
        }
    }

    static PositiveMap identity(const SystemPtr &sys) {
        return {sys, sys, Mat::Identity(sys->dim(), sys->dim()), true};
    }

    [[nodiscard]] const SystemPtr &source() const { return src_; }
    [[nodiscard]] const SystemPtr &target() const { return tgt_; }
    [[nodiscard]] const Mat &matrix() const { return m_; }
    [[nodiscard]] bool is_process() const { return process_; }

  private:
    SystemPtr src_;
    SystemPtr tgt_;
    Mat m_;
    bool process_;
};

inline SubState apply_map(const PositiveMap &map, const SubState &s) {
    require(s.system()->dim() == map.source()->dim(), ErrorCode::invalid_argument, "map source mismatch");
    Vec out = map.matrix() * s.coords();
    require(cone_contains(*map.target(), out, kTol * (1.0 + out.cwiseAbs().maxCoeff())),
            ErrorCode::positivity_violation, "map output left the cone");
    return {map.target(), out, 1e-8};
}

inline bool is_reversible(const PositiveMap &map) {
    if (!map.is_process() || map.matrix().rows() != map.matrix().cols()) {
        return false;
    }
    Eigen::FullPivLU<Mat> lu(map.matrix());
    if (!lu.isInvertible()) {
        return false;
    }
    const Mat inv = lu.inverse();
    try {
        PositiveMap back(map.target(), map.source(), inv, true);
    } catch (const Error &) {
        return false;
    }
    return true;
}

/// Rotation by `steps` vertices of a polygon system.
inline PositiveMap polygon_rotation(const SystemPtr &sys, long steps) {
    require(sys->family() == SystemFamily::polygon, ErrorCode::invalid_argument, "not a polygon");
    const double a = 2.0 * std::numbers::pi * static_cast<double>(steps) / static_cast<double>(sys->polygon_order());
    Mat r = Mat::Identity(3, 3);
    r(0, 0) = std::cos(a);
    r(0, 1) = -std::sin(a);
    r(1, 0) = std::sin(a);
    r(1, 1) = std::cos(a);
    return {sys, sys, r, true};
}

/// Reflection across the axis through vertex 0.
inline PositiveMap polygon_reflection(const SystemPtr &sys) {
    require(sys->family() == SystemFamily::polygon, ErrorCode::invalid_argument, "not a polygon");
    Mat r = Mat::Identity(3, 3);
    r(1, 1) = -1.0;
    return {sys, sys, r, true};
}

/// State of a direct sum written branch by branch: label x carries a substate of A_x.
class DirectSumState {
  public:
    DirectSumState(std::vector<std::string> labels, std::vector<SubState> branches, double tol = kTol)
        : labels_{std::move(labels)}, branches_{std::move(branches)} {
        require(!branches_.empty(), ErrorCode::invalid_argument, "empty ensemble");
        require(labels_.size() == branches_.size(), ErrorCode::invalid_argument, "label count mismatch");
        double total = 0.0;
        for (const auto &b : branches_) {
            total += b.weight();
        }
        require(std::abs(total - 1.0) <= tol, ErrorCode::invalid_argument, "branch weights do not sum to 1");
    }

    /// Convenience: labels "0", "1", ...
    explicit DirectSumState(const std::vector<SubState> &branches)
        : DirectSumState(default_labels(branches.size()), branches) {}

    [[nodiscard]] std::size_t size() const { return branches_.size(); }
    [[nodiscard]] const std::vector<std::string> &labels() const { return labels_; }
    [[nodiscard]] const std::vector<SubState> &branches() const { return branches_; }

    [[nodiscard]] std::vector<double> weights() const {
        std::vector<double> w;
        for (const auto &b : branches_) {
            w.push_back(b.weight());
        }
        return w;
    }

    /// True when every branch lives on the same system (an ensemble on A).
    [[nodiscard]] bool is_ensemble() const {
        for (const auto &b : branches_) {
            if (b.system() != branches_.front().system()) {
                return false;
            }
        }
        return true;
    }

    /// tr_X: sum of branches (requires a common system).
    [[nodiscard]] State trace_labels() const {
        require(is_ensemble(), ErrorCode::invalid_argument, "branches live on different systems");
        Vec c = Vec::Zero(branches_.front().system()->dim());
        for (const auto &b : branches_) {
            c += b.coords();
        }
        return {branches_.front().system(), c, 1e-8};
    }

    /// Embed as a state of the direct-sum system `sum` (branch order must match).
    [[nodiscard]] State embed(const SystemPtr &sum) const {
        require(sum->family() == SystemFamily::direct_sum && sum->branches().size() == branches_.size(),
                ErrorCode::invalid_argument, "direct-sum system does not match the branches");
        Vec c = Vec::Zero(sum->dim());
        for (std::size_t x = 0; x < branches_.size(); ++x) {
            const auto &br = sum->branches()[x];
            require(br.system->dim() == branches_[x].system()->dim(), ErrorCode::invalid_argument,
                    "branch dimension mismatch");
            c.segment(br.offset, br.system->dim()) = branches_[x].coords();
        }
        return {sum, c, 1e-8};
    }

    /// Inverse of embed.
    static DirectSumState split(const State &s) {
        const auto &sys = s.system();
        require(sys->family() == SystemFamily::direct_sum, ErrorCode::invalid_argument, "not a direct-sum state");
        std::vector<std::string> labels;
        std::vector<SubState> parts;
        for (const auto &br : sys->branches()) {
            labels.push_back(br.label);
            parts.emplace_back(br.system, s.coords().segment(br.offset, br.system->dim()), 1e-8);
        }
        return {labels, parts, 1e-8};
    }

  private:
    static std::vector<std::string> default_labels(std::size_t n) {
        std::vector<std::string> l;
        for (std::size_t i = 0; i < n; ++i) {
            l.push_back(std::to_string(i));
        }
        return l;
    }

    std::vector<std::string> labels_;
    std::vector<SubState> branches_;
};

/// <g_x> = sum_x w_x g_x(normalized branch x); zero-weight branches are skipped.
template <class F>
double expectation(const DirectSumState &s, F &&g) {
    double acc = 0.0;
    for (std::size_t x = 0; x < s.size(); ++x) {
        const auto &b = s.branches()[x];
        const double w = b.weight();
        if (w > 0.0) {
            acc += w * g(x, b.normalized());
        }
    }
    return acc;
}

} // namespace gpt
