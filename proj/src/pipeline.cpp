#include "normex/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "normex/io.hpp"

namespace normex {

namespace {

using nlohmann::json;

Method parse_method(const std::string& name) {
  if (name == "direct_sum") return Method::DirectSum;
  if (name == "clt") return Method::CLT;
  if (name == "d_normex") return Method::DNormex;
  if (name == "mrv_normex") return Method::MRVNormex;
  throw std::invalid_argument("config: unknown method '" + name + "'");
}

void reject_unknown_keys(const json& obj, const std::vector<std::string>& known,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const auto& k : known) {
      if (it.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw std::invalid_argument("config: unknown key '" + it.key() + "' in " +
                                  where);
    }
  }
}

FamilyParams parse_family(const json& obj) {
  reject_unknown_keys(obj, {"variant", "alpha", "d", "theta"}, "family");
  FamilyParams params;
  params.variant = parse_family_name(obj.at("variant").get<std::string>());
  params.alpha = obj.at("alpha").get<double>();
  params.d = obj.value("d", params.variant == Family::ClaytonParetoLomax ? 2 : 1);
  if (obj.contains("theta")) params.theta = obj.at("theta").get<double>();
  params.validate();
  return params;
}

std::vector<Method> parse_methods(const json& arr) {
  std::vector<Method> methods;
  for (const auto& m : arr) methods.push_back(parse_method(m.get<std::string>()));
  return methods;
}

json family_to_json(const FamilyParams& params) {
  json out;
  out["variant"] = family_name(params.variant);
  out["alpha"] = params.alpha;
  out["d"] = params.d;
  if (params.variant == Family::ClaytonParetoLomax) out["theta"] = params.theta;
  return out;
}

std::vector<Level> build_levels(const ExperimentConfig& config) {
  if (config.paper_grid) return level_grid(config.family.d);
  std::vector<Level> levels;
  int index = 0;
  for (const auto& raw : config.explicit_levels) {
    Level level;
    level.u = Eigen::Map<const Eigen::VectorXd>(raw.data(),
                                                static_cast<long>(raw.size()));
    level.length = level.u.norm();
    level.extreme = level.length > 0.9;
    level.index = index++;
    require(level.length < 1.0, "config: level must lie inside the unit ball");
    levels.push_back(level);
  }
  require(!levels.empty(), "config: empty level list");
  return levels;
}

}  // namespace

void ExperimentConfig::validate() const {
  family.validate();
  require(count >= 1, "config: count must be >= 1");
  require(threads >= 1, "config: threads must be >= 1");
  require(y_floor > 0.0, "config: y_floor must be > 0");
  require(!methods.empty(), "config: at least one method required");
  if (paper_grid) {
    require(family.d == 2 || family.d == 3,
            "config: paper level grid exists for d in {2, 3} only");
  } else {
    for (const auto& raw : explicit_levels) {
      require(raw.size() == static_cast<std::size_t>(family.d),
              "config: level dimension mismatch");
    }
  }
  for (Method m : methods) {
    NormexConfig probe;
    probe.family = family;
    probe.norm = norm;
    probe.n = n;
    probe.count = count;
    probe.seed = seed;
    probe.method = m;
    probe.y_floor = y_floor;
    probe.b_n_zero = b_n_zero;
    probe.threads = threads;
    probe.validate();
  }
  if (rate.has_value()) {
    require(rate->n_list.size() >= 3, "config: rate n_list needs >= 3 entries");
    require(rate->count >= 1000, "config: rate count too small");
    require(!rate->methods.empty(), "config: rate methods empty");
    require(family.alpha > 2.0 && family.alpha < 3.0,
            "config: rate experiment requires alpha in (2, 3)");
  }
}

ExperimentConfig parse_experiment_config(const json& doc) {
  reject_unknown_keys(doc,
                      {"family", "norm", "n", "count", "seed", "methods", "levels",
                       "out_dir", "rate", "threads", "b_n_zero", "y_floor", "svg"},
                      "top level");
  ExperimentConfig config;
  config.family = parse_family(doc.at("family"));
  config.norm = parse_norm_name(doc.at("norm").get<std::string>());
  config.n = doc.value("n", std::uint64_t{52});
  config.count = doc.value("count", std::size_t{100000});
  config.seed = doc.value("seed", std::uint64_t{1});
  config.methods = parse_methods(doc.at("methods"));
  if (doc.contains("levels")) {
    const auto& levels = doc.at("levels");
    if (levels.is_string()) {
      require(levels.get<std::string>() == "paper-grid",
              "config: levels must be 'paper-grid' or an array of vectors");
      config.paper_grid = true;
    } else {
      config.paper_grid = false;
      for (const auto& entry : levels) {
        config.explicit_levels.push_back(entry.get<std::vector<double>>());
      }
    }
  }
  if (doc.contains("out_dir")) {
    config.out_dir = doc.at("out_dir").get<std::string>();
  }
  if (doc.contains("rate")) {
    const auto& r = doc.at("rate");
    reject_unknown_keys(r, {"n_list", "count", "methods", "grid_per_dim"}, "rate");
    RateSpec spec;
    spec.n_list = r.at("n_list").get<std::vector<std::uint64_t>>();
    spec.count = r.value("count", std::size_t{100000});
    spec.methods = parse_methods(r.at("methods"));
    spec.grid_per_dim = r.value("grid_per_dim", 64);
    config.rate = spec;
  }
  config.threads = doc.value("threads", 1);
  config.b_n_zero = doc.value("b_n_zero", false);
  config.y_floor = doc.value("y_floor", 1e-8);
  config.svg = doc.value("svg", true);
  config.validate();
  return config;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  return parse_experiment_config(doc);
}

RunSummary run_experiment(const ExperimentConfig& config, bool with_qq,
                          bool with_rate) {
  config.validate();
  RunSummary summary;
  json manifest;
  manifest["tool_version"] = kToolVersion;
  manifest["config"] = {
      {"family", family_to_json(config.family)},
      {"norm", norm_name(config.norm)},
      {"n", config.n},
      {"count", config.count},
      {"seed", config.seed},
      {"threads", config.threads},
      {"b_n_zero", config.b_n_zero},
      {"y_floor", config.y_floor},
      {"levels", config.paper_grid ? json("paper-grid")
                                   : json(config.explicit_levels)},
  };
  manifest["substream_rule"] =
      "row r of purpose tag t draws from SplitMix64 stream mix(t)+r keyed by "
      "the run seed; output is independent of the thread count";
  json stage_ms = json::object();
  json anomaly_counters = json::object();

  using clock = std::chrono::steady_clock;
  auto timed = [&](const std::string& stage, auto&& fn) {
    const auto start = clock::now();
    fn();
    const auto stop = clock::now();
    stage_ms[stage] =
        std::chrono::duration_cast<std::chrono::milliseconds>(stop - start).count();
  };

  std::string deviations_csv = csv_line(
      {"method", "scope", "rows", "max_abs", "mean_abs", "max_rel"});

  if (with_qq) {
    std::vector<Level> levels = build_levels(config);

    NormexConfig ref_cfg;
    ref_cfg.family = config.family;
    ref_cfg.norm = config.norm;
    ref_cfg.n = config.n;
    ref_cfg.count = config.count;
    ref_cfg.seed = config.seed;
    ref_cfg.y_floor = config.y_floor;
    ref_cfg.threads = config.threads;
    ref_cfg.method = Method::DirectSum;

    SumSample ref;
    timed("sample_reference", [&] { ref = sample_sum(ref_cfg); });

    for (Method method : config.methods) {
      if (method == Method::DirectSum) continue;  // the reference itself
      NormexConfig cfg = ref_cfg;
      cfg.method = method;
      cfg.b_n_zero = config.b_n_zero;
      // Independent stream for the compared sample.
      cfg.seed = RandomStream(config.seed, substream(0xC0, 1)).next_u64();
      SumSample approx;
      timed("sample_" + method_name(method), [&] { approx = sample_method(cfg); });

      QQTable table;
      timed("qq_" + method_name(method), [&] {
        table = qq_table(ref.sample, approx.sample, levels, {}, config.threads);
      });
      summary.solver_nonconverged += table.ref_nonconverged + table.cmp_nonconverged;
      summary.factorization_failures += approx.meta.factorization_failures;
      summary.y_floor_hits += approx.meta.y_floor_hits;
      anomaly_counters[method_name(method)] = {
          {"y_floor_hits", approx.meta.y_floor_hits},
          {"resampled_rows", approx.meta.resampled_rows},
          {"jitter_events", approx.meta.jitter_events},
          {"factorization_failures", approx.meta.factorization_failures},
          {"qq_nonconverged",
           table.ref_nonconverged + table.cmp_nonconverged},
      };

      const auto qq_path = config.out_dir / ("qq_" + method_name(method) + ".csv");
      atomic_write_file(qq_path, qq_table_csv(table));
      summary.artifacts.push_back(qq_path);

      const DeviationSplit dev = line_deviation(table);
      auto append = [&](const std::string& scope, const Deviation& d) {
        deviations_csv += csv_line({method_name(method), scope,
                                    std::to_string(d.rows), format_double(d.max_abs),
                                    format_double(d.mean_abs),
                                    format_double(d.max_rel)});
      };
      append("all", dev.all);
      append("body", dev.body);
      append("extreme", dev.extreme);

      if (config.svg) {
        for (int c = 0; c < config.family.d; ++c) {
          const auto svg_path =
              config.out_dir /
              ("qq_" + method_name(method) + "_c" + std::to_string(c) + ".svg");
          const std::string title = method_name(method) + " vs direct sum, component " +
                                    std::to_string(c);
          atomic_write_file(svg_path, qq_scatter_svg(table, c, title));
          summary.artifacts.push_back(svg_path);
        }
      }
    }

    const auto dev_path = config.out_dir / "deviations.csv";
    atomic_write_file(dev_path, deviations_csv);
    summary.artifacts.push_back(dev_path);
  }

  if (with_rate && config.rate.has_value()) {
    RateReport report;
    timed("rate_experiment", [&] {
      report = rate_experiment(config.family, config.norm, config.rate->methods,
                               config.rate->n_list, config.rate->count,
                               config.seed, config.threads,
                               config.rate->grid_per_dim);
    });
    std::string rates_csv =
        csv_line({"method", "n", "distance", "slope", "slope_se"});
    auto dump_series = [&](const std::string& name, const RateSeries& series) {
      for (const RatePoint& p : series.points) {
        rates_csv += csv_line({name, std::to_string(p.n), format_double(p.distance),
                               format_double(series.slope),
                               format_double(series.slope_se)});
      }
    };
    for (const RateSeries& series : report.series) {
      dump_series(method_name(series.method), series);
    }
    dump_series("null", report.null_series);
    const auto rates_path = config.out_dir / "rates.csv";
    atomic_write_file(rates_path, rates_csv);
    summary.artifacts.push_back(rates_path);
  }

  manifest["stage_ms"] = stage_ms;
  manifest["anomalies"] = anomaly_counters;
  manifest["solver_nonconverged_total"] = summary.solver_nonconverged;
  manifest["factorization_failures_total"] = summary.factorization_failures;
  manifest["y_floor_hits_total"] = summary.y_floor_hits;
  const auto manifest_path = config.out_dir / "manifest.json";
  atomic_write_file(manifest_path, manifest.dump(2) + "\n");
  summary.artifacts.push_back(manifest_path);

  const bool anomalous =
      summary.solver_nonconverged > 0 || summary.factorization_failures > 0;
  summary.exit_status = anomalous ? 1 : 0;
  if (anomalous) {
    summary.message = "anomalies detected: " +
                      std::to_string(summary.solver_nonconverged) +
                      " non-converged solves, " +
                      std::to_string(summary.factorization_failures) +
                      " factorization failures";
  }
  return summary;
}

}  // namespace normex
