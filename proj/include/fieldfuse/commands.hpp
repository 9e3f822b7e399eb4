// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fieldfuse/serialize.hpp"

namespace fieldfuse {

std::vector<std::string> command_names();

/// Runs a CLI command. Outputs go to `out_dir` (created if needed) together
/// with report.json, whose content is also returned. Every command accepts an
/// empty config and then works on built-in synthetic data, except `eval`,
/// which needs its inputs named. File paths inside the config are resolved
/// against the working directory.
Json run_command(const std::string& name, const Json& config, std::uint64_t seed, const std::filesystem::path& out_dir);

}  // namespace fieldfuse
