// Copyright 2026 The mixlab Authors
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

#ifndef MIXLAB_ERROR_HPP_
#define MIXLAB_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace mixlab {

enum class ErrorCode {
  kNotAperiodic,
  kZeroRowOrColumn,
  kInvalidArgument,
  kInadmissibleWord,
  kSolverFailure,
  kIncompatibleGroup,
  kQuadratureCutoff,
  kTrivialRep,
  kNotOnSameLeaf,
  kSearchBudgetExceeded,
  kRationalAlpha,
  kIncompatibleDepths,
  kPreconditionViolated,
  kDepthBudgetExceeded,
  kNonpositiveRealPart,
  kInsufficientData,
  kJoinOvershoot,
  kBudgetExceeded,
  kEmptyWindow,
  kPoleEncountered,
  kConfigInvalid,
};

std::string_view error_code_name(ErrorCode code);

// Single exception type for the library; the code carries the failure kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotAperiodic: return "NotAperiodic";
    case ErrorCode::kZeroRowOrColumn: return "ZeroRowOrColumn";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInadmissibleWord: return "InadmissibleWord";
    case ErrorCode::kSolverFailure: return "SolverFailure";
    case ErrorCode::kIncompatibleGroup: return "IncompatibleGroup";
    case ErrorCode::kQuadratureCutoff: return "QuadratureCutoff";
    case ErrorCode::kTrivialRep: return "TrivialRep";
    case ErrorCode::kNotOnSameLeaf: return "NotOnSameLeaf";
    case ErrorCode::kSearchBudgetExceeded: return "SearchBudgetExceeded";
    case ErrorCode::kRationalAlpha: return "RationalAlpha";
    case ErrorCode::kIncompatibleDepths: return "IncompatibleDepths";
    case ErrorCode::kPreconditionViolated: return "PreconditionViolated";
    case ErrorCode::kDepthBudgetExceeded: return "DepthBudgetExceeded";
    case ErrorCode::kNonpositiveRealPart: return "NonpositiveRealPart";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kJoinOvershoot: return "JoinOvershoot";
    case ErrorCode::kBudgetExceeded: return "BudgetExceeded";
    case ErrorCode::kEmptyWindow: return "EmptyWindow";
    case ErrorCode::kPoleEncountered: return "PoleEncountered";
    case ErrorCode::kConfigInvalid: return "ConfigInvalid";
  }
  return "Unknown";
}

}  // namespace mixlab

#endif  // MIXLAB_ERROR_HPP_
