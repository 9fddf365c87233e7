#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace varkg::cli {

struct ExperimentConfig {
  int dimension = 2;
  std::string nonlinearity = "power";  // "power" or a registered general name
  double p = 3.0;
  double omega = 0.0;

  double elliptic_R = 40.0;
  int elliptic_M = 4000;
  double evolution_R = 80.0;
  int evolution_M = 4000;

  std::vector<std::pair<double, double>> exponents{{1.0, 0.0}};

  double lambda = 1.05;
  double mu = 1.05;
  double t_max = 50.0;
  double cfl = 0.4;
  double blowup_factor = 5.0;
  int diag_stride = 10;
  double kappa = 1e-3;
  std::vector<double> lambda_grid{0.95, 1.0, 1.05};
  std::vector<double> mu_grid{1.0, 1.05};
  int threads = 0;  // 0: hardware concurrency

  double tol_rel = 1e-3;    // theorem checks, relative to m
  double tol_path = 1e-2;   // path maxima, relative to m
  int trials = 50;
  std::uint64_t seed = 20240601;

  std::string outdir = "varkg_out";
  std::string profile;  // optional input profile CSV
};

nlohmann::json to_json(const ExperimentConfig& c);

/// Reads the keys present in `j` on top of `base`. Throws varkg::Error
/// (InvalidInput) for unknown keys, wrong types or tolerances <= 0.
ExperimentConfig from_json(const nlohmann::json& j, ExperimentConfig base = {});

/// FNV-1a 64 of the canonical JSON dump without the output directory, as 16
/// hex digits.
std::string config_hash(const ExperimentConfig& c);

/// Runs one subcommand. Exit status: 0 pass, 1 assertion failure, 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace varkg::cli
