// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace fieldfuse {

// Numeric values are mirrored by ff_status in fieldfuse.h; keep them in sync.
enum class ErrorCode : int {
  Ok = 0,
  InvalidArgument = 1,
  BehindCamera = 2,
  InvalidPixel = 3,
  AllInvalid = 4,
  SingularNormalEquations = 5,
  DivergedMaxIter = 6,
  DegenerateLookAt = 7,
  TooFewPoses = 8,
  DegenerateBaseline = 9,
  ZeroMass = 10,
  DimensionMismatch = 11,
  EmptyMask = 12,
  UnknownExperiment = 13,
  InvalidConfig = 14,
  Io = 15,
  Internal = 99,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fieldfuse
