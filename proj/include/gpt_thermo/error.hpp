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

#include <stdexcept>
#include <string>

namespace gpt {

enum class ErrorCode {
    invalid_argument,
    degenerate_cone,
    positivity_violation,
    unsupported_dimension,
    unsupported_system,
    not_distinguishable,
    invalid_distribution,
    internal_error,
    conservation_error,
    not_a_cycle,
    not_mixable,
    invalid_ledger,
    precondition_error,
    invalid_scenario,
    parse_error,
};

inline const char *to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::invalid_argument:
        return "invalid-argument";
    case ErrorCode::degenerate_cone:
        return "degenerate-cone";
    case ErrorCode::positivity_violation:
        return "positivity-violation";
    case ErrorCode::unsupported_dimension:
        return "unsupported-dimension";
    case ErrorCode::unsupported_system:
        return "unsupported-system";
    case ErrorCode::not_distinguishable:
        return "not-distinguishable";
    case ErrorCode::invalid_distribution:
        return "invalid-distribution";
    case ErrorCode::internal_error:
        return "internal-error";
    case ErrorCode::conservation_error:
        return "conservation-error";
    case ErrorCode::not_a_cycle:
        return "not-a-cycle";
    case ErrorCode::not_mixable:
        return "not-mixable";
    case ErrorCode::invalid_ledger:
        return "invalid-ledger";
    case ErrorCode::precondition_error:
        return "precondition-error";
    case ErrorCode::invalid_scenario:
        return "invalid-scenario";
    case ErrorCode::parse_error:
        return "parse-error";
    }
    return "unknown";
}

/// Library error; `code()` tells the kind, `what()` carries the detail.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string &msg)
        : std::runtime_error(std::string(to_string(code)) + ": " + msg),
          code_{code} {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

inline void require(bool cond, ErrorCode code, const std::string &msg) {
    if (!cond) {
        throw Error(code, msg);
    }
}

} // namespace gpt
