#include "reservelab/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>

namespace reservelab {

namespace fs = std::filesystem;
using nlohmann::json;

const char* kRoundsCsvHeader =
    "t,phase,isolation,isolated_buyer,reserve,benchmark_reserve,realized_revenue,"
    "benchmark_expected_revenue,instant_regret,cum_regret";
const char* kSummaryCsvHeader = "policy,T,replications,mean_cum_regret,std_cum_regret";

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

json record_to_json(const RoundRecord& r) {
  json j;
  j["t"] = r.t;
  j["phase"] = r.phase;
  j["context"] = std::vector<double>(r.context.data(), r.context.data() + r.context.size());
  j["isolation"] = r.isolation;
  j["isolated_buyer"] = r.isolated_buyer;
  j["reserve"] = r.reserve;
  j["planned_reserve"] = r.planned_reserve;
  j["valuations"] = r.valuations;
  j["corruptions"] = r.corruptions;
  j["bids"] = r.bids;
  j["allocated"] = r.allocated;
  j["winner"] = r.winner;
  j["payments"] = r.payments;
  j["realized_revenue"] = r.realized_revenue;
  j["benchmark_reserve"] = r.benchmark_reserve;
  j["benchmark_expected_revenue"] = r.benchmark_expected_revenue;
  if (std::isfinite(r.policy_expected_revenue))
    j["policy_expected_revenue"] = r.policy_expected_revenue;
  j["instant_regret"] = r.instant_regret;
  return j;
}

RoundRecord record_from_json(const json& j) {
  RoundRecord r;
  r.t = j.at("t").get<long>();
  r.phase = j.at("phase").get<int>();
  auto ctx = j.at("context").get<std::vector<double>>();
  r.context = Eigen::Map<Eigen::VectorXd>(ctx.data(), static_cast<long>(ctx.size()));
  r.isolation = j.at("isolation").get<bool>();
  r.isolated_buyer = j.at("isolated_buyer").get<int>();
  r.reserve = j.at("reserve").get<double>();
  r.planned_reserve = j.at("planned_reserve").get<double>();
  r.valuations = j.at("valuations").get<std::vector<double>>();
  r.corruptions = j.at("corruptions").get<std::vector<double>>();
  r.bids = j.at("bids").get<std::vector<double>>();
  r.allocated = j.at("allocated").get<bool>();
  r.winner = j.at("winner").get<int>();
  r.payments = j.at("payments").get<std::vector<double>>();
  r.realized_revenue = j.at("realized_revenue").get<double>();
  r.benchmark_reserve = j.at("benchmark_reserve").get<double>();
  r.benchmark_expected_revenue = j.at("benchmark_expected_revenue").get<double>();
  r.policy_expected_revenue = j.contains("policy_expected_revenue")
                                  ? j["policy_expected_revenue"].get<double>()
                                  : std::numeric_limits<double>::quiet_NaN();
  r.instant_regret = j.at("instant_regret").get<double>();
  return r;
}

std::string snapshot_csv(const EstimateSnapshot& snap) {
  std::string out = "kind,position,value\n";
  for (long i = 0; i < snap.beta_hat.size(); ++i)
    out += "beta," + std::to_string(i) + "," + fmt(snap.beta_hat[i]) + "\n";
  for (std::size_t i = 0; i < snap.f_minus.xs().size(); ++i)
    out += "minus," + fmt(snap.f_minus.xs()[i]) + "," + fmt(snap.f_minus.vs()[i]) + "\n";
  for (std::size_t i = 0; i < snap.f_plus.xs().size(); ++i)
    out += "plus," + fmt(snap.f_plus.xs()[i]) + "," + fmt(snap.f_plus.vs()[i]) + "\n";
  return out;
}

}  // namespace

std::string rounds_csv(const RunResult& run) {
  std::string out = kRoundsCsvHeader;
  out += "\n";
  for (const auto& r : run.records) {
    out += std::to_string(r.t);
    out += ",";
    out += std::to_string(r.phase);
    out += ",";
    out += r.isolation ? "1" : "0";
    out += ",";
    out += std::to_string(r.isolated_buyer);
    out += ",";
    out += fmt(r.reserve);
    out += ",";
    out += fmt(r.benchmark_reserve);
    out += ",";
    out += fmt(r.realized_revenue);
    out += ",";
    out += fmt(r.benchmark_expected_revenue);
    out += ",";
    out += fmt(r.instant_regret);
    out += ",";
    out += fmt(run.cum_regret[r.t - 1]);
    out += "\n";
  }
  return out;
}

std::string run_json(const ExperimentConfig& config, const RunResult& run) {
  // Execution details (worker count, output location) must not leak into the
  // run file: outputs are byte-identical however the run was scheduled.
  ExperimentConfig scrubbed = config;
  scrubbed.run.jobs = 1;
  scrubbed.run.out_dir = "out";
  json j;
  j["config"] = json::parse(serialize_experiment_config(scrubbed));
  j["policy"] = run.policy_name;
  j["horizon"] = run.horizon;
  j["replication"] = run.replication;
  j["master_seed"] = run.master_seed;
  j["mode"] = regret_mode_name(run.mode);
  j["records_complete"] = run.records_complete;
  j["final_cum_regret"] = run.final_cum_regret;
  j["total_realized_revenue"] = run.total_realized_revenue;
  j["isolation_rounds"] = run.isolation_rounds;
  j["cum_regret"] = run.cum_regret;
  json cps = json::array();
  for (const auto& cp : run.checkpoints) {
    cps.push_back({{"t", cp.t},
                   {"beta_err_l1", cp.beta_err_l1},
                   {"beta_err_l2", cp.beta_err_l2},
                   {"sup_err_minus", cp.sup_err_minus},
                   {"sup_err_plus", cp.sup_err_plus},
                   {"beta_bound", cp.beta_bound},
                   {"minus_bound", cp.minus_bound},
                   {"plus_bound", cp.plus_bound},
                   {"xi", cp.xi},
                   {"xi_minus", cp.xi_minus},
                   {"xi_plus", cp.xi_plus}});
  }
  j["checkpoints"] = cps;
  json recs = json::array();
  for (const auto& r : run.records) recs.push_back(record_to_json(r));
  j["records"] = recs;
  return j.dump();
}

RunResult run_from_json(const std::string& text, ExperimentConfig& config_out) {
  json j = json::parse(text);
  config_out = parse_experiment_config(j.at("config").dump());
  RunResult run;
  run.policy_name = j.at("policy").get<std::string>();
  run.horizon = j.at("horizon").get<long>();
  run.replication = j.at("replication").get<std::uint64_t>();
  run.master_seed = j.at("master_seed").get<std::uint64_t>();
  run.mode = j.at("mode").get<std::string>() == "expected" ? RegretMode::kExpected
                                                           : RegretMode::kRealized;
  run.records_complete = j.at("records_complete").get<bool>();
  run.final_cum_regret = j.at("final_cum_regret").get<double>();
  run.total_realized_revenue = j.at("total_realized_revenue").get<double>();
  run.isolation_rounds = j.at("isolation_rounds").get<long>();
  run.cum_regret = j.at("cum_regret").get<std::vector<double>>();
  for (const auto& cj : j.at("checkpoints")) {
    CheckpointStat cp;
    cp.t = cj.at("t").get<long>();
    cp.beta_err_l1 = cj.at("beta_err_l1").get<double>();
    cp.beta_err_l2 = cj.at("beta_err_l2").get<double>();
    cp.sup_err_minus = cj.at("sup_err_minus").get<double>();
    cp.sup_err_plus = cj.at("sup_err_plus").get<double>();
    cp.beta_bound = cj.at("beta_bound").get<double>();
    cp.minus_bound = cj.at("minus_bound").get<double>();
    cp.plus_bound = cj.at("plus_bound").get<double>();
    cp.xi = cj.at("xi").get<bool>();
    cp.xi_minus = cj.at("xi_minus").get<bool>();
    cp.xi_plus = cj.at("xi_plus").get<bool>();
    run.checkpoints.push_back(cp);
  }
  for (const auto& rj : j.at("records")) run.records.push_back(record_from_json(rj));
  return run;
}

int cmd_simulate(const std::string& config_path, std::optional<std::uint64_t> seed,
                 std::optional<int> jobs, std::optional<std::string> out_dir,
                 std::optional<std::string> mode, bool dump_snapshots) {
  ExperimentConfig cfg;
  try {
    cfg = load_experiment_config(config_path);
    if (seed) cfg.run.seed = *seed;
    if (jobs) cfg.run.jobs = *jobs;
    if (out_dir) cfg.run.out_dir = *out_dir;
    if (dump_snapshots) cfg.run.dump_snapshots = true;
    if (const char* env = std::getenv("RESERVELAB_OUT")) cfg.run.out_dir = env;
    if (mode) {
      if (*mode == "expected") cfg.scenario.mode = RegretMode::kExpected;
      else if (*mode == "realized") cfg.scenario.mode = RegretMode::kRealized;
      else throw ConfigError("--mode must be expected|realized");
      // Re-run the truthfulness check the parser does for configs.
      if (cfg.scenario.mode == RegretMode::kExpected)
        for (const auto& s : cfg.scenario.strategies)
          if (!std::holds_alternative<Truthful>(s))
            throw ConfigError("expected-mode regret requires all-truthful buyers");
    }
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    fs::create_directories(cfg.run.out_dir);
    BenchmarkOracle oracle(cfg.scenario.market);

    std::string summary = kSummaryCsvHeader;
    summary += "\n";
    for (long horizon : cfg.run.horizons) {
      std::vector<RunResult> runs =
          run_replications(cfg.scenario, horizon, cfg.run.seed, cfg.run.replications,
                           cfg.run.jobs, oracle, cfg.run.records);
      double mean = 0.0;
      for (const auto& r : runs) mean += r.final_cum_regret;
      mean /= runs.size();
      double var = 0.0;
      for (const auto& r : runs) var += (r.final_cum_regret - mean) * (r.final_cum_regret - mean);
      double sd = runs.size() > 1 ? std::sqrt(var / (runs.size() - 1)) : 0.0;
      summary += cfg.scenario.policy.name + "," + std::to_string(horizon) + "," +
                 std::to_string(cfg.run.replications) + "," + fmt(mean) + "," + fmt(sd) + "\n";

      for (const auto& r : runs) {
        std::string stem = cfg.scenario.policy.name + "_T" + std::to_string(horizon) + "_rep" +
                           std::to_string(r.replication);
        write_file(fs::path(cfg.run.out_dir) / ("rounds_" + stem + ".csv"), rounds_csv(r));
        if (!r.records.empty())
          write_file(fs::path(cfg.run.out_dir) / ("run_" + stem + ".json"), run_json(cfg, r));
        if (cfg.run.dump_snapshots) {
          // Rebuild the final snapshot deterministically for the dump.
          auto policy = make_policy(cfg.scenario.policy, cfg.scenario.market, horizon);
          if (r.records_complete) {
            for (const auto& rec : r.records)
              policy->observe({rec.context, rec.bids, rec.isolation, rec.isolated_buyer,
                               rec.reserve});
            if (auto snap = policy->snapshot())
              write_file(fs::path(cfg.run.out_dir) / ("snapshot_" + stem + ".csv"),
                         snapshot_csv(*snap));
          }
        }
      }
    }
    write_file(fs::path(cfg.run.out_dir) / "summary.csv", summary);
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int cmd_scaling(const std::string& in_dir, const std::string& out_file) {
  try {
    fs::path summary_path = fs::path(in_dir) / "summary.csv";
    std::ifstream in(summary_path);
    if (!in) {
      std::cerr << "missing " << summary_path.string() << "\n";
      return 2;
    }
    std::string line;
    std::getline(in, line);
    if (line != kSummaryCsvHeader) {
      std::cerr << "unexpected summary header\n";
      return 2;
    }
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> per_policy;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string policy, t, reps, mean, sd;
      std::getline(ss, policy, ',');
      std::getline(ss, t, ',');
      std::getline(ss, reps, ',');
      std::getline(ss, mean, ',');
      std::getline(ss, sd, ',');
      per_policy[policy].first.push_back(std::stod(t));
      per_policy[policy].second.push_back(std::stod(mean));
    }
    std::string out = "policy,slope,intercept,r2,points_used,warning\n";
    for (const auto& [policy, data] : per_policy) {
      if (data.first.size() < 3) {
        std::cerr << "policy " << policy << ": needs >= 3 horizons, found " << data.first.size()
                  << "\n";
        return 2;
      }
      ScalingFit fit = fit_scaling(data.first, data.second);
      if (!fit.warning.empty()) std::cerr << "warning (" << policy << "): " << fit.warning << "\n";
      out += policy + "," + fmt(fit.slope) + "," + fmt(fit.intercept) + "," + fmt(fit.r2) + "," +
             std::to_string(fit.points_used) + "," + fit.warning + "\n";
    }
    write_file(out_file, out);
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int cmd_diagnose(const std::string& run_file, const std::string& out_file) {
  ExperimentConfig cfg;
  RunResult run;
  try {
    std::ifstream in(run_file);
    if (!in) {
      std::cerr << "cannot read " << run_file << "\n";
      return 2;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    run = run_from_json(buf.str(), cfg);
  } catch (const std::exception& e) {
    std::cerr << "invalid run file: " << e.what() << "\n";
    return 2;
  }
  if (!run.records_complete) {
    std::cerr << "records not retained\n";
    return 2;
  }
  try {
    DiagnosticsReport report = diagnostics(run, cfg.scenario);
    json j;
    j["burn_in_t0"] = report.burn_in_t0;
    j["xi_freq"] = report.xi_freq;
    j["xi_minus_freq"] = report.xi_minus_freq;
    j["xi_plus_freq"] = report.xi_plus_freq;
    json phases = json::array();
    for (const auto& p : report.phases) {
      json pj;
      pj["phase"] = p.phase;
      pj["phase_len"] = p.phase_len;
      if (std::isfinite(p.corruption_budget)) pj["corruption_budget_L"] = p.corruption_budget;
      pj["significant_corruptions"] = p.significant;
      pj["mismatch_shade"] = p.mismatch_shade;
      pj["mismatch_overbid"] = p.mismatch_overbid;
      phases.push_back(pj);
    }
    j["phases"] = phases;
    json cps = json::array();
    for (const auto& cp : report.checkpoints) {
      cps.push_back({{"t", cp.t},
                     {"beta_err_l1", cp.beta_err_l1},
                     {"beta_err_l2", cp.beta_err_l2},
                     {"sup_err_minus", cp.sup_err_minus},
                     {"sup_err_plus", cp.sup_err_plus},
                     {"xi", cp.xi},
                     {"xi_minus", cp.xi_minus},
                     {"xi_plus", cp.xi_plus}});
    }
    j["checkpoints"] = cps;
    write_file(out_file, j.dump(2));
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"reservelab: contextual reserve-price learning simulation lab"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "run the scenario matrix from a config file");
  std::string config_path;
  sim->add_option("--config", config_path, "experiment config (JSON)")->required();
  std::optional<std::uint64_t> seed;
  sim->add_option("--seed", seed, "master seed override");
  std::optional<int> jobs;
  sim->add_option("--jobs", jobs, "worker cap for parallel replications");
  std::optional<std::string> out_dir;
  sim->add_option("--out", out_dir, "output directory override");
  std::optional<std::string> mode;
  sim->add_option("--mode", mode, "regret mode override: expected|realized");
  bool dump_snapshots = false;
  sim->add_flag("--dump-snapshots", dump_snapshots,
                "write final estimate snapshots (beta + CDF jump points) per run");

  auto* sc = app.add_subcommand("scaling", "fit log-log regret slopes from a results directory");
  std::string in_dir, scaling_out;
  sc->add_option("--in", in_dir, "results directory containing summary.csv")->required();
  sc->add_option("--out", scaling_out, "output CSV path")->required();

  auto* di = app.add_subcommand("diagnose", "corruption/mismatch diagnostics from a run file");
  std::string run_file, diag_out;
  di->add_option("--run", run_file, "run JSON with retained records")->required();
  di->add_option("--out", diag_out, "output report path (JSON)")->required();

  std::vector<std::string> argv_like = args;
  std::vector<const char*> argv;
  argv.push_back("reservelab");
  for (const auto& a : argv_like) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (sim->parsed()) return cmd_simulate(config_path, seed, jobs, out_dir, mode, dump_snapshots);
  if (sc->parsed()) return cmd_scaling(in_dir, scaling_out);
  if (di->parsed()) return cmd_diagnose(run_file, diag_out);
  return 2;
}

}  // namespace reservelab
