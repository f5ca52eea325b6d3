#ifndef NORMEX_PIPELINE_HPP
#define NORMEX_PIPELINE_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "normex/compare.hpp"
#include "normex/engine.hpp"

namespace normex {

inline constexpr const char* kToolVersion = "0.1.0";

struct RateSpec {
  std::vector<std::uint64_t> n_list;
  std::size_t count = 100000;
  std::vector<Method> methods;
  int grid_per_dim = 64;
};

struct ExperimentConfig {
  FamilyParams family;
  NormKind norm = NormKind::L1;
  std::uint64_t n = 52;
  std::size_t count = 100000;
  std::uint64_t seed = 1;
  std::vector<Method> methods;  // each compared against the direct sum
  bool paper_grid = true;
  std::vector<std::vector<double>> explicit_levels;
  std::filesystem::path out_dir = "out";
  std::optional<RateSpec> rate;
  int threads = 1;
  bool b_n_zero = false;
  double y_floor = 1e-8;
  bool svg = true;

  /// Checks every module precondition up front, before any work starts.
  void validate() const;
};

ExperimentConfig parse_experiment_config(const nlohmann::json& doc);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct RunSummary {
  int exit_status = 0;
  std::uint64_t solver_nonconverged = 0;
  std::uint64_t factorization_failures = 0;
  std::uint64_t y_floor_hits = 0;
  std::vector<std::filesystem::path> artifacts;
  std::string message;
};

/// Full pipeline: samples, QQ tables, deviations, optional rate experiment,
/// SVG renderings and the run manifest. Artifacts appear atomically.
RunSummary run_experiment(const ExperimentConfig& config, bool with_qq = true,
                          bool with_rate = true);

}  // namespace normex

#endif  // NORMEX_PIPELINE_HPP
