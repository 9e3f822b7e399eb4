// SPDX-License-Identifier: Apache-2.0
// Command-line front end over the C API.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "fieldfuse/fieldfuse.h"

namespace {

struct Command {
  const char* name;
  const char* help;
};

const Command kCommands[] = {
    {"scene-gen", "write a synthetic scene as JSON"},
    {"render", "render color, depth and accumulation images of a scene"},
    {"calibrate", "fit a camera model to synthetic correspondences"},
    {"perturb-recover", "perturb a camera and recover it by refinement"},
    {"augment", "jitter and re-anchor a trajectory, optionally splat virtual views"},
    {"register", "estimate a similarity transform from pose correspondences"},
    {"blend", "blend registered fields into novel views"},
    {"eval", "compare two images or two depth maps"},
    {"experiment", "run a named experiment protocol"},
};

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fieldfuse: camera calibration, radiance-field rendering, registration and blending"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  std::optional<std::string> method;
  std::optional<double> gamma, tau, qd_cutoff;

  for (const auto& [name, help] : kCommands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "RNG seed");
    sub->add_option("--out", out_dir, "output directory");
    if (std::string(name) == "blend") {
      sub->add_option("--method", method, "nearest | idw2d | idw3d | idw-sample");
      sub->add_option("--gamma", gamma, "IDW blending rate");
      sub->add_option("--tau", tau, "proximity ratio");
      sub->add_option("--qd-cutoff", qd_cutoff, "distant accumulation cutoff");
    }
  }
  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  nlohmann::json config = nlohmann::json::object();
  if (!config_path.empty()) {
    std::string text;
    if (!read_file(config_path, text)) {
      std::cerr << "fieldfuse: cannot read " << config_path << "\n";
      return FF_IO;
    }
    try {
      config = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      std::cerr << "fieldfuse: invalid config: " << e.what() << "\n";
      return FF_INVALID_CONFIG;
    }
    if (!config.is_object()) {
      std::cerr << "fieldfuse: config must be a JSON object\n";
      return FF_INVALID_CONFIG;
    }
  }
  if (method) config["method"] = *method;
  if (gamma) config["gamma"] = *gamma;
  if (tau) config["tau"] = *tau;
  if (qd_cutoff) config["qd_cutoff"] = *qd_cutoff;

  char* report = nullptr;
  const ff_status status = ff_run_command(command.c_str(), config.dump().c_str(), seed, out_dir.c_str(), &report);
  if (status != FF_OK) {
    std::cerr << "fieldfuse " << command << ": " << ff_status_name(status) << ": " << ff_last_error() << "\n";
    return static_cast<int>(status);
  }
  ff_string_free(report);
  std::cout << out_dir << "/report.json\n";
  return 0;
}
