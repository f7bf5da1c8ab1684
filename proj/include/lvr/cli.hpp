#pragma once

#include <cstdint>
#include "json.hpp"
#include <optional>
#include <string>
#include <vector>

namespace lvr::cli {

inline constexpr const char* kSchemaVersion = "1.0";
/// Default output directory when --output is not given.
inline constexpr const char* kOutputDirEnv = "LVR_OUTPUT_DIR";

enum class Command {
  fc_eval,
  maps_check,
  contour_check,
  z_identity,
  free_energy,
  lve_sum,
  single_vertex,
  jacobian_check,
  verify_bounds,
  pacman_scan,
  acceptance,
};

const char* to_string(Command c);

struct RunConfig {
  Command command = Command::fc_eval;
  int p = 2;
  double lambda_modulus = 0.1;
  double lambda_arg = 0.0;
  double epsilon = 0.1;
  int N = 2;
  int beta = 2;
  int n_max = 2;
  long mc_samples = 100000;
  int quad_nodes = 64;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string output_path;

  // command specific
  double z_re = 0.1, z_im = 0.0;  // fc-eval
  double spectral_radius = 2.0;   // contour-check
  bool monte_carlo = false;       // z-identity, free-energy, single-vertex
  long n_w = 2000;                // lve-sum
  long n_mc = 16;                 // lve-sum
  double fd_step = 1e-4;          // lve-sum
  long samples = 100000;          // jacobian-check pairs
  std::vector<int> n_list{1, 2, 3, 4, 5, 6};  // pacman-scan
  bool all_args = false;                      // pacman-scan over the pacman sample args
  std::vector<int> criteria;                  // acceptance; empty means all
};

/// Thrown for invalid flags or values; maps to exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Check {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
};

struct RunResult {
  nlohmann::ordered_json summary;
  std::string csv;  // empty for non-sweep commands
  std::vector<Check> checks;
  bool passed() const;
};

/// Parses argv (argv[1] is the command). Throws ConfigError.
RunConfig parse_args(int argc, const char* const* argv);

/// Validates and executes one command.
RunResult run(const RunConfig& config);

/// Parse, run, write JSON (and CSV for sweeps) and return the exit status:
/// 0 all checks pass, 1 a check failed, 2 configuration error.
int main_entry(int argc, const char* const* argv);

/// "1..6" or "1,2,5".
std::vector<int> parse_int_list(const std::string& text);

}  // namespace lvr::cli
