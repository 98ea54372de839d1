#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

namespace ssflow::cli {

// Exit codes
inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 2;
inline constexpr int exit_nonconvergence = 3;
inline constexpr int exit_unsupported = 4;

struct Sweep {
  std::string var;
  double lo = 0.0;
  double hi = 0.0;
  int n = 0;
};

// Resolved parameters of one invocation: defaults, then the config file, then flags.
struct RunConfig {
  std::string command;
  std::string problem;  // "rr" or "pm"; empty means infer
  double gas_gamma = 1.4;
  double rho0 = 1.0;
  double rho1 = 2.0;
  double u_inf = 2.0;
  double rho_inf = 1.0;
  std::optional<double> theta_w;  // radians
  std::optional<Sweep> sweep;
  int nx = 32;
  int ny = 32;
  double tol = 1e-8;
  double relax = 0.5;
  double delta_cutoff = 0.1;
  int max_outer = 200;
  std::string out;
  std::string format = "csv";
  int jobs = 1;
  std::string sonic_ref = "local";
  int samples = 400;
  std::vector<double> overlay_deg;
  int refine_levels = 1;
  std::vector<double> epsilons{0.1, 0.05, 0.02, 0.01};
  std::string artifact;

  nlohmann::json to_json() const;
};

// Applies a JSON config object; unknown keys and wrong types are config errors.
void apply_config_json(RunConfig& cfg, const nlohmann::json& j);
Sweep parse_sweep(const std::string& s);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ssflow::cli
