// Copyright 2026 The auxcrf Authors.
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

#ifndef AUXCRF_ERROR_H_
#define AUXCRF_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace auxcrf {

enum class ErrorCode {
  kUnknownLabel,
  kEmptySentence,
  kAuxiliaryLabelInInput,
  kLengthMismatch,
  kSentenceTooLong,
  kEmptySegmentation,
  kGoldViolatesMask,
  kNoLegalPath,
  kMissingSentence,
  kSubwordMismatch,
  kMalformedRecord,
  kMalformedLine,
  kEmptyFile,
  kInsufficientData,
  kEmptySplit,
  kEmptyTraining,
  kNonFiniteLoss,
  kInvalidConfig,
  kModelFormat,
  kIo,
};

std::string_view error_code_name(ErrorCode code);

// All module errors. `detail()` carries the line number, position or index
// the message refers to, when there is one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::size_t detail = 0)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const { return code_; }
  std::size_t detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::size_t detail_;
};

}  // namespace auxcrf

#endif  // AUXCRF_ERROR_H_
