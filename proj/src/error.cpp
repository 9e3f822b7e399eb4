// SPDX-License-Identifier: Apache-2.0
#include "fieldfuse/error.hpp"

namespace fieldfuse {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Ok: return "Ok";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::BehindCamera: return "BehindCamera";
    case ErrorCode::InvalidPixel: return "InvalidPixel";
    case ErrorCode::AllInvalid: return "AllInvalid";
    case ErrorCode::SingularNormalEquations: return "SingularNormalEquations";
    case ErrorCode::DivergedMaxIter: return "DivergedMaxIter";
    case ErrorCode::DegenerateLookAt: return "DegenerateLookAt";
    case ErrorCode::TooFewPoses: return "TooFewPoses";
    case ErrorCode::DegenerateBaseline: return "DegenerateBaseline";
    case ErrorCode::ZeroMass: return "ZeroMass";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::UnknownExperiment: return "UnknownExperiment";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

}  // namespace fieldfuse
