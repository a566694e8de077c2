#include "reservelab/config.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "reservelab/rng.hpp"

namespace reservelab {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    if (!ok) throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

double need_number(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  if (!obj[key].is_number()) throw ConfigError(where + ": '" + key + "' must be a number");
  return obj[key].get<double>();
}

std::vector<double> need_vector(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key) || !obj[key].is_array())
    throw ConfigError(where + ": missing list '" + key + "'");
  std::vector<double> out;
  for (const auto& v : obj[key]) {
    if (!v.is_number()) throw ConfigError(where + ": '" + key + "' must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

NoiseModel parse_noise(const json& j) {
  if (!j.is_object()) throw ConfigError("market.noise: must be an object");
  std::string kind = j.value("kind", "");
  if (kind == "uniform") {
    check_keys(j, "market.noise", {"kind", "eps_max"});
    return NoiseModel::uniform(need_number(j, "market.noise", "eps_max"));
  }
  if (kind == "truncated-gaussian") {
    check_keys(j, "market.noise", {"kind", "eps_max", "sigma"});
    return NoiseModel::truncated_gaussian(need_number(j, "market.noise", "eps_max"),
                                          need_number(j, "market.noise", "sigma"));
  }
  if (kind == "piecewise-constant") {
    check_keys(j, "market.noise", {"kind", "edges", "heights"});
    return NoiseModel::piecewise_constant(need_vector(j, "market.noise", "edges"),
                                          need_vector(j, "market.noise", "heights"));
  }
  if (kind == "bimodal") {
    check_keys(j, "market.noise", {"kind", "eps_max"});
    return NoiseModel::bimodal(need_number(j, "market.noise", "eps_max"));
  }
  throw ConfigError("market.noise: unknown kind '" + kind + "'");
}

ContextModel parse_context(const json& j) {
  if (!j.is_object()) throw ConfigError("market.context: must be an object");
  check_keys(j, "market.context", {"d", "lower", "upper", "x_max", "mixing"});
  int d = static_cast<int>(need_number(j, "market.context", "d"));
  auto lower = need_vector(j, "market.context", "lower");
  auto upper = need_vector(j, "market.context", "upper");
  double x_max = need_number(j, "market.context", "x_max");
  std::optional<Eigen::MatrixXd> mixing;
  if (j.contains("mixing")) {
    const auto& rows = j["mixing"];
    if (!rows.is_array() || rows.size() != static_cast<std::size_t>(d))
      throw ConfigError("market.context.mixing: must be a d x d matrix");
    Eigen::MatrixXd m(d, d);
    for (int r = 0; r < d; ++r) {
      if (!rows[r].is_array() || rows[r].size() != static_cast<std::size_t>(d))
        throw ConfigError("market.context.mixing: must be a d x d matrix");
      for (int c = 0; c < d; ++c) m(r, c) = rows[r][c].get<double>();
    }
    mixing = m;
  }
  return ContextModel(d, std::move(lower), std::move(upper), x_max, std::move(mixing));
}

Eigen::VectorXd parse_beta(const json& j, int d, std::uint64_t config_seed) {
  if (j.is_array()) {
    Eigen::VectorXd beta(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) beta[i] = j[i].get<double>();
    return beta;
  }
  if (j.is_object()) {
    check_keys(j, "market.beta", {"kind", "low", "high"});
    if (j.value("kind", "") != "random-uniform")
      throw ConfigError("market.beta: generator kind must be 'random-uniform'");
    double lo = need_number(j, "market.beta", "low");
    double hi = need_number(j, "market.beta", "high");
    RngStream rng = derive_stream(config_seed, 0, StreamChannel::kAux);
    Eigen::VectorXd beta(d);
    for (int i = 0; i < d; ++i) beta[i] = rng.uniform(lo, hi);
    return beta;
  }
  throw ConfigError("market.beta: must be a list or a generator spec");
}

BuyerStrategy parse_strategy(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": must be an object");
  std::string kind = j.value("kind", "");
  if (kind == "truthful") {
    check_keys(j, where, {"kind"});
    return Truthful{};
  }
  if (kind == "constant-shader") {
    check_keys(j, where, {"kind", "a"});
    return ConstantShader{need_number(j, where, "a")};
  }
  if (kind == "phase-shader") {
    check_keys(j, where, {"kind", "a_per_phase"});
    return PhaseShader{need_vector(j, where, "a_per_phase")};
  }
  if (kind == "isolation-aware") {
    check_keys(j, where, {"kind", "shade", "stop_after_period"});
    return IsolationAwareHeuristic{need_number(j, where, "shade"),
                                   static_cast<long>(need_number(j, where, "stop_after_period"))};
  }
  if (kind == "random-anomalous") {
    check_keys(j, where, {"kind", "lo", "hi"});
    return RandomAnomalous{need_number(j, where, "lo"), need_number(j, where, "hi")};
  }
  throw ConfigError(where + ": unknown strategy kind '" + kind + "'");
}

void validate_strategy(const BuyerStrategy& s, const MarketConfig& m, const std::string& where,
                       std::vector<std::string>& violations) {
  auto check_a = [&](double a) {
    if (std::abs(a) > m.a_max)
      violations.push_back(where + ": |a| exceeds a_max");
  };
  if (std::holds_alternative<ConstantShader>(s)) {
    check_a(std::get<ConstantShader>(s).a);
  } else if (std::holds_alternative<PhaseShader>(s)) {
    for (double a : std::get<PhaseShader>(s).a_per_phase) check_a(a);
  } else if (std::holds_alternative<IsolationAwareHeuristic>(s)) {
    check_a(std::get<IsolationAwareHeuristic>(s).shade);
  } else if (std::holds_alternative<RandomAnomalous>(s)) {
    const auto& r = std::get<RandomAnomalous>(s);
    if (!(0.0 <= r.lo && r.lo <= r.hi && r.hi <= m.v_max))
      violations.push_back(where + ": bid range must satisfy 0 <= lo <= hi <= v_max");
  }
}

json strategy_to_json(const BuyerStrategy& s) {
  json j;
  if (std::holds_alternative<Truthful>(s)) {
    j["kind"] = "truthful";
  } else if (std::holds_alternative<ConstantShader>(s)) {
    j["kind"] = "constant-shader";
    j["a"] = std::get<ConstantShader>(s).a;
  } else if (std::holds_alternative<PhaseShader>(s)) {
    j["kind"] = "phase-shader";
    j["a_per_phase"] = std::get<PhaseShader>(s).a_per_phase;
  } else if (std::holds_alternative<IsolationAwareHeuristic>(s)) {
    const auto& h = std::get<IsolationAwareHeuristic>(s);
    j["kind"] = "isolation-aware";
    j["shade"] = h.shade;
    j["stop_after_period"] = h.stop_after_period;
  } else {
    const auto& r = std::get<RandomAnomalous>(s);
    j["kind"] = "random-anomalous";
    j["lo"] = r.lo;
    j["hi"] = r.hi;
  }
  return j;
}

}  // namespace

const char* regret_mode_name(RegretMode mode) {
  return mode == RegretMode::kExpected ? "expected" : "realized";
}

const char* record_mode_name(RecordMode mode) {
  switch (mode) {
    case RecordMode::kAuto: return "auto";
    case RecordMode::kFull: return "full";
    case RecordMode::kThin: return "thin";
    case RecordMode::kNone: return "none";
  }
  return "auto";
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config: top level must be an object");
  check_keys(root, "config", {"market", "policy", "buyers", "run"});
  if (!root.contains("market") || !root.contains("policy") || !root.contains("run"))
    throw ConfigError("config: needs 'market', 'policy', and 'run' blocks");

  ExperimentConfig cfg;

  // run block first: the seed may feed the beta generator.
  const json& jr = root["run"];
  check_keys(jr, "run", {"horizons", "replications", "seed", "mode", "out_dir", "records",
                         "jobs", "dump_snapshots"});
  if (!jr.contains("horizons")) throw ConfigError("run: missing 'horizons'");
  for (const auto& t : jr["horizons"]) cfg.run.horizons.push_back(t.get<long>());
  if (cfg.run.horizons.empty()) throw ConfigError("run: horizons must be nonempty");
  cfg.run.replications = jr.value("replications", 1);
  if (cfg.run.replications < 1) throw ConfigError("run: replications must be >= 1");
  cfg.run.seed = jr.value("seed", 0ULL);
  cfg.run.out_dir = jr.value("out_dir", "out");
  cfg.run.jobs = jr.value("jobs", 1);
  cfg.run.dump_snapshots = jr.value("dump_snapshots", false);
  std::string records = jr.value("records", "auto");
  if (records == "auto") cfg.run.records = RecordMode::kAuto;
  else if (records == "full") cfg.run.records = RecordMode::kFull;
  else if (records == "thin") cfg.run.records = RecordMode::kThin;
  else if (records == "none") cfg.run.records = RecordMode::kNone;
  else throw ConfigError("run.records: must be auto|full|thin|none");
  std::string mode = jr.value("mode", "realized");
  if (mode == "expected") cfg.scenario.mode = RegretMode::kExpected;
  else if (mode == "realized") cfg.scenario.mode = RegretMode::kRealized;
  else throw ConfigError("run.mode: must be expected|realized");

  const json& jm = root["market"];
  check_keys(jm, "market", {"beta", "noise", "context", "n_buyers", "v_max", "a_max", "eta"});
  if (!jm.contains("beta") || !jm.contains("noise") || !jm.contains("context"))
    throw ConfigError("market: needs 'beta', 'noise', and 'context'");
  ContextModel context = parse_context(jm["context"]);
  Eigen::VectorXd beta = parse_beta(jm["beta"], context.dim(), cfg.run.seed);
  MarketConfig market{std::move(beta), parse_noise(jm["noise"]), std::move(context),
                      static_cast<int>(need_number(jm, "market", "n_buyers")),
                      need_number(jm, "market", "v_max"), need_number(jm, "market", "a_max"),
                      need_number(jm, "market", "eta")};

  const json& jp = root["policy"];
  check_keys(jp, "policy", {"name", "reserve", "refresh_every", "h_bar", "beta_threshold",
                            "cdf_threshold"});
  cfg.scenario.policy.name = jp.value("name", "");
  if (cfg.scenario.policy.name == "fixed")
    cfg.scenario.policy.fixed_reserve = need_number(jp, "policy", "reserve");
  if (jp.contains("refresh_every"))
    cfg.scenario.policy.refresh_every = jp["refresh_every"].get<long>();
  if (jp.contains("h_bar")) cfg.scenario.policy.h_bar = jp["h_bar"].get<double>();
  if (jp.contains("beta_threshold"))
    cfg.scenario.policy.beta_threshold = jp["beta_threshold"].get<double>();
  if (jp.contains("cdf_threshold"))
    cfg.scenario.policy.cdf_threshold = jp["cdf_threshold"].get<double>();

  // buyers block: per-index strategies over a default.
  std::vector<BuyerStrategy> strategies(market.n_buyers, Truthful{});
  if (root.contains("buyers")) {
    const json& jb = root["buyers"];
    if (!jb.is_object()) throw ConfigError("buyers: must be an object");
    if (jb.contains("default")) {
      BuyerStrategy def = parse_strategy(jb["default"], "buyers.default");
      strategies.assign(market.n_buyers, def);
    }
    for (auto it = jb.begin(); it != jb.end(); ++it) {
      if (it.key() == "default") continue;
      int idx;
      try {
        idx = std::stoi(it.key());
      } catch (...) {
        throw ConfigError("buyers: keys must be 'default' or buyer indices, got '" + it.key() +
                          "'");
      }
      if (idx < 0 || idx >= market.n_buyers)
        throw ConfigError("buyers: index " + it.key() + " out of range");
      strategies[idx] = parse_strategy(*it, "buyers." + it.key());
    }
  }

  std::vector<std::string> violations = validate_market(market).violations;
  for (int i = 0; i < market.n_buyers; ++i)
    validate_strategy(strategies[i], market, "buyers[" + std::to_string(i) + "]", violations);
  static const char* known_policies[] = {"benchmark", "fixed", "npac-t", "npac-s", "npac-a"};
  bool known = false;
  for (const char* p : known_policies)
    if (cfg.scenario.policy.name == p) known = true;
  if (!known) violations.push_back("policy.name: unknown policy '" + cfg.scenario.policy.name + "'");
  if (cfg.scenario.mode == RegretMode::kExpected)
    for (const auto& s : strategies)
      if (!std::holds_alternative<Truthful>(s)) {
        violations.push_back("run.mode: expected-mode regret requires all-truthful buyers");
        break;
      }
  if (cfg.scenario.policy.name == "npac-s")
    for (long t : cfg.run.horizons)
      if (t < 4) violations.push_back("run.horizons: npac-s needs horizons >= 4");
  if (!violations.empty()) {
    std::ostringstream os;
    os << "config validation failed:";
    for (const auto& v : violations) os << "\n  - " << v;
    throw ConfigError(os.str());
  }

  cfg.scenario.market = std::move(market);
  cfg.scenario.strategies = std::move(strategies);
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str());
}

std::string serialize_experiment_config(const ExperimentConfig& cfg) {
  const MarketConfig& m = cfg.scenario.market;
  json j;
  j["market"]["beta"] = std::vector<double>(m.beta.data(), m.beta.data() + m.beta.size());
  json jn;
  switch (m.noise.kind()) {
    case NoiseKind::kUniform:
      jn = {{"kind", "uniform"}, {"eps_max", m.noise.eps_max()}};
      break;
    case NoiseKind::kTruncatedGaussian:
      jn = {{"kind", "truncated-gaussian"},
            {"eps_max", m.noise.eps_max()},
            {"sigma", m.noise.sigma()}};
      break;
    case NoiseKind::kPiecewiseConstant:
      jn = {{"kind", "piecewise-constant"},
            {"edges", m.noise.edges()},
            {"heights", m.noise.heights()}};
      break;
  }
  j["market"]["noise"] = jn;
  j["market"]["context"]["d"] = m.context.dim();
  j["market"]["context"]["lower"] = m.context.lower();
  j["market"]["context"]["upper"] = m.context.upper();
  j["market"]["context"]["x_max"] = m.context.x_max();
  if (m.context.has_mixing()) {
    const Eigen::MatrixXd& mix = m.context.mixing();
    std::vector<std::vector<double>> rows(m.context.dim());
    for (int r = 0; r < m.context.dim(); ++r)
      for (int c = 0; c < m.context.dim(); ++c) rows[r].push_back(mix(r, c));
    j["market"]["context"]["mixing"] = rows;
  }
  j["market"]["n_buyers"] = m.n_buyers;
  j["market"]["v_max"] = m.v_max;
  j["market"]["a_max"] = m.a_max;
  j["market"]["eta"] = m.eta;

  json jp;
  jp["name"] = cfg.scenario.policy.name;
  if (cfg.scenario.policy.name == "fixed") jp["reserve"] = cfg.scenario.policy.fixed_reserve;
  if (cfg.scenario.policy.name == "npac-t")
    jp["refresh_every"] = cfg.scenario.policy.refresh_every;
  if (cfg.scenario.policy.name == "npac-a") {
    if (cfg.scenario.policy.h_bar >= 0.0) jp["h_bar"] = cfg.scenario.policy.h_bar;
    if (cfg.scenario.policy.beta_threshold)
      jp["beta_threshold"] = *cfg.scenario.policy.beta_threshold;
    if (cfg.scenario.policy.cdf_threshold)
      jp["cdf_threshold"] = *cfg.scenario.policy.cdf_threshold;
  }
  j["policy"] = jp;

  json jb;
  for (std::size_t i = 0; i < cfg.scenario.strategies.size(); ++i)
    jb[std::to_string(i)] = strategy_to_json(cfg.scenario.strategies[i]);
  j["buyers"] = jb;

  j["run"]["horizons"] = cfg.run.horizons;
  j["run"]["replications"] = cfg.run.replications;
  j["run"]["seed"] = cfg.run.seed;
  j["run"]["mode"] = regret_mode_name(cfg.scenario.mode);
  j["run"]["out_dir"] = cfg.run.out_dir;
  j["run"]["records"] = record_mode_name(cfg.run.records);
  j["run"]["jobs"] = cfg.run.jobs;
  j["run"]["dump_snapshots"] = cfg.run.dump_snapshots;
  return j.dump(2);
}

}  // namespace reservelab
