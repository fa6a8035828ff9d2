#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace vpcli {

struct RunConfig {
  std::string subcommand;

  // patch
  double b = 0.5;
  std::vector<int> sites{1, 2};
  std::map<int, double> amplitudes;  // r0 = sum a_j cos(j theta)
  int M = 64;
  int N = 8;

  // simulate
  double dt = 1e-3;
  double T = 5.0;
  int stride = 10;
  std::vector<int> modes;
  bool dealias = true;

  // spectrum / cantor
  int jmax = 16;
  bool transversality = false;
  int grid = 10000;
  double eps_hat = 0.0;
  std::string kind = "first-order";
  double gamma = 1e-3;
  double tau1 = 3.0;
  double tau2 = 3.0;
  double upsilon = 1.0;
  int lmax = 20;
  std::vector<double> gammas;
  double rho0 = 0.0;

  // kam-transport
  std::vector<double> omega;  // empty: golden mean for d = 1
  std::vector<int> phi_grid{32};
  double v_amp = 0.1;
  double w_amp = 0.0;
  int steps = 6;
  int N0 = 4;

  // kam-remainder
  std::optional<std::uint64_t> seed;
  double delta0 = 1e-3;
  int L = 12;
  int J = 16;
  int lsupp = 2;
  int band = 4;

  std::string out;
  int jobs = 1;

  // Range checks shared by all subcommands; throws vpatch::invalid_argument.
  void validate() const;
};

void to_json(nlohmann::json& j, const RunConfig& c);
// Reads the keys present in j over the current values of c.
void merge_json(const nlohmann::json& j, RunConfig& c);

// Parses "2:1e-3,3:5e-4".
std::map<int, double> parse_amplitudes(const std::string& s);

// Writes the subcommand's artifacts into dir and returns their file names.
std::vector<std::string> run_subcommand(const RunConfig& c, const std::filesystem::path& dir);

}  // namespace vpcli
