// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fieldfuse/camera.hpp"
#include "fieldfuse/serialize.hpp"

namespace fieldfuse {

/// Reference intrinsics used by the calibration protocols (384 x 256 images).
CameraModel reference_camera(CameraKind kind);
ImageGeometry reference_geometry();

/// Names accepted by run_experiment.
std::vector<std::string> experiment_names();

/// Runs a named desk-scale protocol and returns its report. The report is a
/// pure function of (name, config, seed). Throws UnknownExperiment or
/// InvalidConfig.
Json run_experiment(const std::string& name, const Json& config, std::uint64_t seed);

}  // namespace fieldfuse
