#pragma once

// End-to-end continuation: data file in, spectral function out.
//
// Bosonic Matsubara or tau input is fermionized first; the auxiliary density
// found by the Nevanlinna/Hardy stage is mapped back with tanh(beta omega / 2).
// Fermionic input skips both conversions.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nevac/domain.hpp"
#include "nevac/io.hpp"
#include "nevac/lbfgs.hpp"
#include "nevac/nevanlinna.hpp"

namespace nevac {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitNoCausalNodes = 2,
  kExitParseError = 3,
  kExitNotConverged = 4,
};

/// Bad configuration key or value.
class ConfigError : public ParseError {
 public:
  using ParseError::ParseError;
};

struct PipelineConfig {
  std::optional<std::string> beta;  // when set, must agree with the data file
  std::string statistics = "auto";  // auto | bosonic | fermionic | tau
  PrecisionBits precision_bits = kDefaultPrecisionBits;

  double eta = 1e-3;
  double omega_min = -8.0;
  double omega_max = 8.0;
  std::size_t omega_count = 2001;

  double lambda = 1e-4;
  int hardy_order = 25;
  std::size_t max_iterations = 500;
  double gradient_tolerance = 1e-6;
  double pick_shift = 1e-20;

  std::vector<long> target_indices;  // empty: the default 36-point set
  double fit_omega_min = -8.0;
  double fit_omega_max = 8.0;
  std::size_t fit_count = 801;
  double tikhonov_alpha = 1e-12;
  double svd_cutoff_rel = 1e-12;

  std::optional<double> sum_rule;
  std::uint64_t seed = 0;

  // bench: oracle model and sampling
  double bench_beta = 100.0;
  double bench_center = 2.0;
  double bench_width = 0.5;
  std::size_t bench_count = 256;

  /// Defaults with NEVAC_PRECISION_BITS applied.
  static PipelineConfig from_environment();

  /// Sets one key from its text form; throws ConfigError.
  void set(const std::string& key, const std::string& value);
  /// Applies `key = value` lines (`#` comments allowed); throws ConfigError with line numbers.
  void load_text(const std::string& text);
  void load_file(const std::string& path);

  /// Every key with its effective value, in a fixed order.
  Metadata settings() const;
  static const std::vector<std::string>& keys();
};

struct PipelineReport {
  int exit_code = kExitOk;
  std::string message;
  std::string input_kind;
  std::size_t nodes_total = 0;
  std::vector<long> selected_indices;
  std::vector<DroppedNode> dropped;
  double min_pivot = 0.0;
  std::optional<SumRule> sum_rule;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  std::size_t iterations = 0;
  std::optional<LbfgsStatus> status;
  double seconds = 0.0;
  std::vector<std::string> extra;  // subcommand-specific lines (bench metrics)
};

/// Human-readable report for stdout; the only place timing appears.
std::string format_report(const PipelineReport& report);

/// `continue`: full continuation of `input`, spectral function written to `output`.
PipelineReport run_pipeline(const PipelineConfig& cfg, const std::string& input, const std::string& output);

/// `fermionize`: writes the fermionic Matsubara data the continuation would use.
PipelineReport run_fermionize(const PipelineConfig& cfg, const std::string& input, const std::string& output);

/// `check`: validation and Pick screening only; the report is also written to `output`.
PipelineReport run_check(const PipelineConfig& cfg, const std::string& input, const std::string& output);

/// `bench`: samples the double-peak oracle model as bosonic Matsubara data into
/// `input`, continues it into `output` and appends error metrics to the report.
PipelineReport run_bench(const PipelineConfig& cfg, const std::string& input, const std::string& output);

}  // namespace nevac
