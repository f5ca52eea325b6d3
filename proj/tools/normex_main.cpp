// Command-line front end: experiment orchestration over JSON configs plus
// small file-level subcommands for the individual operations.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "normex/io.hpp"
#include "normex/pipeline.hpp"
#include "normex/truncated_moments.hpp"

namespace {

using namespace normex;

constexpr int kExitOk = 0;
constexpr int kExitAnomaly = 1;
constexpr int kExitConfig = 2;

struct RunFlags {
  std::string config_path;
  std::string out_override;
  std::uint64_t seed_override = 0;
  bool has_seed = false;
  std::size_t count_override = 0;
  bool has_count = false;
  int threads_override = 0;
};

ExperimentConfig load_with_overrides(const RunFlags& flags) {
  ExperimentConfig config = load_experiment_config(flags.config_path);
  if (flags.has_seed) config.seed = flags.seed_override;
  if (flags.has_count) config.count = flags.count_override;
  if (!flags.out_override.empty()) config.out_dir = flags.out_override;
  if (flags.threads_override > 0) config.threads = flags.threads_override;
  config.validate();
  return config;
}

int report_summary(const RunSummary& summary) {
  for (const auto& artifact : summary.artifacts) {
    std::cout << "wrote " << artifact.string() << "\n";
  }
  if (summary.exit_status != 0) {
    std::cerr << summary.message << "\n";
  }
  return summary.exit_status;
}

FamilyParams family_from_flags(const std::string& variant, double alpha, int d,
                               double theta) {
  FamilyParams params;
  if (variant == "mv_pareto_lomax") params = FamilyParams::mv_pareto_lomax(alpha, d);
  else if (variant == "indep_pareto_lomax")
    params = FamilyParams::indep_pareto_lomax(alpha, d);
  else if (variant == "clayton_pareto_lomax")
    params = FamilyParams::clayton_pareto_lomax(alpha, theta);
  else if (variant == "radial_pareto_lomax")
    params = FamilyParams::radial_pareto_lomax(alpha, d);
  else
    throw std::invalid_argument("unknown family variant '" + variant + "'");
  return params;
}

int cmd_moments(const FamilyParams& params, NormKind norm, double y,
                std::size_t mc_draws, std::uint64_t seed, int threads) {
  const TruncatedMomentsEvaluator evaluator(params, norm);
  const TruncatedMoments closed = evaluator.at(y);
  const McTruncatedMoments oracle =
      mc_truncated_moments(params, norm, y, mc_draws, seed, threads);

  bool ok = true;
  std::printf("truncated moments at y = %g (%s, %s norm), %zu of %zu draws kept\n",
              y, family_name(params.variant).c_str(), norm_name(norm).c_str(),
              oracle.accepted, oracle.draws);
  std::printf("%-12s %14s %14s %12s %8s\n", "moment", "closed", "oracle", "se",
              "z");
  for (int i = 0; i < params.d; ++i) {
    const double z = (closed.mu(i) - oracle.mu(i)) / oracle.mu_se(i);
    ok = ok && std::abs(z) <= 4.0;
    std::printf("mu[%d]        %14.8f %14.8f %12.2e %8.2f\n", i, closed.mu(i),
                oracle.mu(i), oracle.mu_se(i), z);
  }
  for (int i = 0; i < params.d; ++i) {
    for (int j = i; j < params.d; ++j) {
      const double closed_second =
          closed.sigma(i, j) + closed.mu(i) * closed.mu(j);
      const double z =
          (closed_second - oracle.second_raw(i, j)) / oracle.second_raw_se(i, j);
      ok = ok && std::abs(z) <= 4.0;
      std::printf("E[Y%dY%d]      %14.8f %14.8f %12.2e %8.2f\n", i, j,
                  closed_second, oracle.second_raw(i, j),
                  oracle.second_raw_se(i, j), z);
    }
  }
  std::printf("%s\n", ok ? "all moments within 4 SE of the oracle"
                         : "MISMATCH beyond 4 SE");
  return ok ? kExitOk : kExitAnomaly;
}

int cmd_geoquantile(const std::string& sample_path, const std::string& u_text,
                    double tol) {
  const SampleMatrix sample = read_sample_matrix_csv(sample_path);
  std::vector<double> coords;
  std::stringstream ss(u_text);
  std::string item;
  while (std::getline(ss, item, ',')) coords.push_back(std::stod(item));
  if (coords.size() != sample.cols()) {
    throw std::invalid_argument("geoquantile: level dimension mismatch");
  }
  Eigen::VectorXd u =
      Eigen::Map<Eigen::VectorXd>(coords.data(), static_cast<long>(coords.size()));
  GqSolverOptions options;
  options.grad_tol = tol;
  const GeoQuantile result = solve_gq(sample, u, options);
  std::cout << "q =";
  for (long i = 0; i < result.q.size(); ++i) {
    std::cout << " " << format_double(result.q(i));
  }
  std::cout << "\nobjective = " << format_double(result.objective)
            << ", gradient_norm = " << format_double(result.gradient_norm)
            << ", iterations = " << result.iterations
            << (result.converged ? "" : " (not converged)") << "\n";
  return result.converged ? kExitOk : kExitAnomaly;
}

int cmd_plot(const std::string& qq_path, const std::string& out_dir,
             const std::string& title) {
  const QQTable table = read_qq_table_csv(qq_path);
  if (table.rows.empty()) {
    std::cerr << "no rows in " << qq_path << "\n";
    return kExitConfig;
  }
  const std::filesystem::path stem =
      std::filesystem::path(qq_path).stem();
  for (int c = 0; c < table.d; ++c) {
    const auto path = std::filesystem::path(out_dir) /
                      (stem.string() + "_c" + std::to_string(c) + ".svg");
    const std::string plot_title =
        title.empty() ? stem.string() + " component " + std::to_string(c) : title;
    atomic_write_file(path, qq_scatter_svg(table, c, plot_title));
    std::cout << "wrote " << path.string() << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid body-and-tail approximation toolkit for sums of "
               "heavy-tailed random vectors"};
  app.require_subcommand(1);

  RunFlags run_flags;
  auto add_run_flags = [&](CLI::App* cmd) {
    cmd->add_option("--config", run_flags.config_path, "JSON config path")
        ->required();
    cmd->add_option("--seed", run_flags.seed_override, "override config seed")
        ->each([&](const std::string&) { run_flags.has_seed = true; });
    cmd->add_option("--out", run_flags.out_override, "override output directory");
    cmd->add_option("--count", run_flags.count_override, "override sample count")
        ->each([&](const std::string&) { run_flags.has_count = true; });
    cmd->add_option("--threads", run_flags.threads_override,
                    "worker threads (does not change results)");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "full pipeline from a config");
  add_run_flags(run_cmd);
  CLI::App* qq_cmd = app.add_subcommand("qq", "QQ tables and deviations only");
  add_run_flags(qq_cmd);
  CLI::App* rates_cmd = app.add_subcommand("rates", "rate experiment only");
  add_run_flags(rates_cmd);

  std::string variant = "mv_pareto_lomax";
  double alpha = 2.3;
  int d = 3;
  double theta = 0.0;
  std::string norm_text = "l1";
  std::size_t count = 100000;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out_path = "sample.csv";

  CLI::App* sample_cmd = app.add_subcommand("sample", "write family draws to CSV");
  sample_cmd->add_option("--family", variant, "family variant")->required();
  sample_cmd->add_option("--alpha", alpha, "tail index")->required();
  sample_cmd->add_option("--d", d, "dimension");
  sample_cmd->add_option("--theta", theta, "clayton dependence parameter");
  sample_cmd->add_option("--count", count, "number of rows");
  sample_cmd->add_option("--seed", seed, "seed");
  sample_cmd->add_option("--threads", threads, "worker threads");
  sample_cmd->add_option("--out", out_path, "output CSV path");

  double y = 5.0;
  std::size_t mc_draws = 1000000;
  std::string moments_norm = "linf";
  CLI::App* moments_cmd =
      app.add_subcommand("moments", "closed-form vs Monte Carlo truncated moments");
  moments_cmd->add_option("--family", variant, "family variant")->required();
  moments_cmd->add_option("--alpha", alpha, "tail index")->required();
  moments_cmd->add_option("--d", d, "dimension");
  moments_cmd->add_option("--theta", theta, "clayton dependence parameter");
  moments_cmd->add_option("--norm", moments_norm, "l1 or linf")->required();
  moments_cmd->add_option("--y", y, "truncation level")->required();
  moments_cmd->add_option("--mc-draws", mc_draws, "oracle draw count");
  moments_cmd->add_option("--seed", seed, "seed");
  moments_cmd->add_option("--threads", threads, "worker threads");

  std::string sample_path;
  std::string u_text;
  double tol = 1e-8;
  CLI::App* gq_cmd =
      app.add_subcommand("geoquantile", "solve one geometric quantile of a CSV sample");
  gq_cmd->add_option("--sample", sample_path, "sample CSV path")->required();
  gq_cmd->add_option("--u", u_text, "level as comma-separated coordinates")
      ->required();
  gq_cmd->add_option("--tol", tol, "gradient tolerance");

  std::string qq_path;
  std::string plot_out = ".";
  std::string plot_title;
  CLI::App* plot_cmd = app.add_subcommand("plot", "render a QQ CSV to SVG");
  plot_cmd->add_option("--qq", qq_path, "QQ table CSV path")->required();
  plot_cmd->add_option("--out", plot_out, "output directory");
  plot_cmd->add_option("--title", plot_title, "plot title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run_cmd->parsed()) {
      return report_summary(run_experiment(load_with_overrides(run_flags)));
    }
    if (qq_cmd->parsed()) {
      return report_summary(
          run_experiment(load_with_overrides(run_flags), true, false));
    }
    if (rates_cmd->parsed()) {
      ExperimentConfig config = load_with_overrides(run_flags);
      if (!config.rate.has_value()) {
        throw std::invalid_argument("config: 'rates' needs a rate section");
      }
      return report_summary(run_experiment(config, false, true));
    }
    if (sample_cmd->parsed()) {
      const FamilyParams params = family_from_flags(variant, alpha, d, theta);
      const SampleMatrix sample = sample_family(params, count, seed, threads);
      atomic_write_file(out_path, sample_matrix_csv(sample));
      std::cout << "wrote " << out_path << "\n";
      return kExitOk;
    }
    if (moments_cmd->parsed()) {
      const FamilyParams params = family_from_flags(variant, alpha, d, theta);
      return cmd_moments(params, parse_norm_name(moments_norm), y, mc_draws, seed,
                         threads);
    }
    if (gq_cmd->parsed()) {
      return cmd_geoquantile(sample_path, u_text, tol);
    }
    if (plot_cmd->parsed()) {
      return cmd_plot(qq_path, plot_out, plot_title);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAnomaly;
  }
  return kExitConfig;
}
