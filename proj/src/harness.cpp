#include "omle/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include <toml.hpp>

#include "omle/errors.hpp"
#include "omle/instances.hpp"
#include "omle/model_io.hpp"
#include "omle/oom.hpp"

namespace omle {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const json& require(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(where + ": missing key \"" + key + "\"");
  return j.at(key);
}

template <typename T>
T get_as(const json& j, const std::string& key, const std::string& where) {
  const json& v = require(j, key, where);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + ": key \"" + key + "\" has the wrong type");
  }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return get_as<T>(j, key, where);
}

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : j.items()) {
    if (!ok.count(item.key())) throw ConfigError(where + ": unknown key \"" + item.key() + "\"");
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

LockVariant parse_variant(const std::string& s) {
  if (s == "undercomplete" || s == "under") return LockVariant::kUndercomplete;
  if (s == "overcomplete" || s == "over") return LockVariant::kOvercomplete;
  throw ConfigError("lock variant must be \"undercomplete\" or \"overcomplete\", got \"" + s + "\"");
}

// Re-raises a seed failure with context while keeping its error class, so
// the CLI can still map it to the right exit code.
[[noreturn]] void rethrow_with_context(std::exception_ptr e, const std::string& ctx) {
  try {
    std::rethrow_exception(e);
  } catch (const EnumerationTooLarge& ex) {
    throw EnumerationTooLarge(ctx + ex.what());
  } catch (const ValidationError& ex) {
    throw ValidationError(ctx + ex.what());
  } catch (const AssumptionViolated& ex) {
    throw AssumptionViolated(ctx + ex.what());
  } catch (const ConfigError& ex) {
    throw ConfigError(ctx + ex.what());
  } catch (const std::exception& ex) {
    throw Error(ctx + ex.what());
  }
}

json matrix_json(const Matrix& M) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

json read_document(const fs::path& path) {
  if (path.extension() == ".toml") {
    toml::table table;
    try {
      table = toml::parse_file(path.string());
    } catch (const toml::parse_error& e) {
      std::ostringstream msg;
      msg << path.string() << ":" << e.source().begin.line << ":" << e.source().begin.column << ": "
          << e.description();
      throw ValidationError(msg.str());
    }
    std::ostringstream text;
    text << toml::json_formatter{table};
    return json::parse(text.str());
  }
  return read_json_file(path);
}

TabularPomdp generate_instance(const json& spec) {
  const std::string where = "generator spec";
  const auto name = get_as<std::string>(spec, "generator", where);
  Rng rng(get_or<std::uint64_t>(spec, "seed", 0, where));
  if (name == "lock_under" || name == "lock_over") {
    const bool under = name == "lock_under";
    const int depth = get_as<int>(spec, under ? "H" : "m", where);
    const int A = get_as<int>(spec, "A", where);
    LockSpec lock{under ? LockVariant::kUndercomplete : LockVariant::kOvercomplete, depth, A,
                  under ? get_as<double>(spec, "alpha", where) : 0.5,
                  get_or<std::vector<int>>(spec, "good_actions", {}, where)};
    return make_lock(lock, rng);
  }
  if (name == "random") {
    return random_pomdp(get_as<int>(spec, "S", where), get_as<int>(spec, "A", where),
                        get_as<int>(spec, "O", where), get_as<int>(spec, "H", where), rng);
  }
  if (name == "random_revealing") {
    return random_revealing(get_as<int>(spec, "S", where), get_as<int>(spec, "A", where),
                            get_as<int>(spec, "O", where), get_as<int>(spec, "H", where),
                            get_or<int>(spec, "m", 1, where), get_as<double>(spec, "alpha_min", where),
                            get_or<int>(spec, "max_tries", 1000, where), rng)
        .model;
  }
  if (name == "block_mdp") {
    return block_mdp(get_as<int>(spec, "S", where), get_as<int>(spec, "A", where),
                     get_as<int>(spec, "H", where), rng, get_or<int>(spec, "obs_per_state", 1, where));
  }
  throw ConfigError("unknown generator \"" + name +
                    "\" (expected lock_under, lock_over, random, random_revealing, block_mdp)");
}

ExperimentConfig parse_config(const json& doc, const fs::path& base_dir) {
  const std::string where = "config";
  if (!doc.is_object()) throw ConfigError("config must be a table/object");
  reject_unknown(doc,
                 {"env", "candidates", "learner", "K", "beta", "m", "alpha", "seeds", "caps", "threads",
                  "mle_validity", "output"},
                 where);
  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  cfg.env = require(doc, "env", where);
  if (!cfg.env.is_object() || (cfg.env.contains("path") == cfg.env.contains("generator"))) {
    throw ConfigError("config: env needs exactly one of \"path\" or \"generator\"");
  }
  cfg.candidates = require(doc, "candidates", where);
  if (!cfg.candidates.is_object()) throw ConfigError("config: candidates must be a table/object");
  cfg.learner = get_or<std::string>(doc, "learner", "omle", where);
  if (cfg.learner != "omle" && cfg.learner != "multistep_omle") {
    throw ConfigError("config: learner must be \"omle\" or \"multistep_omle\"");
  }
  cfg.K = get_as<int>(doc, "K", where);
  if (cfg.K < 1) throw ConfigError("config: K must be at least 1");
  cfg.m = get_or<int>(doc, "m", cfg.learner == "omle" ? 1 : 2, where);
  if (cfg.learner == "omle" && cfg.m != 1) throw ConfigError("config: learner omle needs m = 1");
  if (cfg.learner == "multistep_omle" && cfg.m < 2) {
    throw ConfigError("config: learner multistep_omle needs m >= 2");
  }
  cfg.alpha = get_or<double>(doc, "alpha", 0.0, where);
  if (doc.contains("beta")) {
    const json& b = doc.at("beta");
    if (b.is_number()) {
      cfg.beta_value = b.get<double>();
    } else if (b.is_object()) {
      reject_unknown(b, {"value", "c", "delta"}, "config.beta");
      if (b.contains("value")) {
        if (b.contains("c") || b.contains("delta")) {
          throw ConfigError("config.beta: give either \"value\" or {\"c\", \"delta\"}");
        }
        cfg.beta_value = get_as<double>(b, "value", "config.beta");
      } else {
        cfg.beta_c = get_or<double>(b, "c", 1.0, "config.beta");
        cfg.beta_delta = get_or<double>(b, "delta", 0.1, "config.beta");
        if (!(cfg.beta_delta > 0.0 && cfg.beta_delta <= 1.0)) {
          throw ConfigError("config.beta: delta must lie in (0, 1]");
        }
      }
    } else {
      throw ConfigError("config: beta must be a number or a table");
    }
  }
  const json& seeds = require(doc, "seeds", where);
  if (seeds.is_array()) {
    for (const json& s : seeds) {
      if (!s.is_number_integer()) throw ConfigError("config: seeds must be integers");
      cfg.seeds.push_back(s.get<std::uint64_t>());
    }
  } else if (seeds.is_object()) {
    const int count = get_as<int>(seeds, "count", "config.seeds");
    const auto start = get_or<std::uint64_t>(seeds, "start", 0, "config.seeds");
    for (int i = 0; i < count; ++i) cfg.seeds.push_back(start + static_cast<std::uint64_t>(i));
  } else {
    throw ConfigError("config: seeds must be a list or {count, start}");
  }
  if (cfg.seeds.empty()) throw ConfigError("config: seeds must be non-empty");
  if (doc.contains("caps")) {
    cfg.enum_cap = get_or<std::uint64_t>(doc.at("caps"), "enumeration", cfg.enum_cap, "config.caps");
  }
  cfg.threads = get_or<int>(doc, "threads", 0, where);
  cfg.mle_validity = get_or<bool>(doc, "mle_validity", false, where);
  if (doc.contains("output")) {
    cfg.output_dir = resolve(base_dir, get_as<std::string>(doc.at("output"), "dir", "config.output"));
  } else {
    cfg.output_dir = base_dir / "omle_out";
  }
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  const json doc = read_document(path);
  try {
    return parse_config(doc, path.parent_path().empty() ? fs::path(".") : path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

TabularPomdp build_env(const ExperimentConfig& cfg) {
  TabularPomdp env = cfg.env.contains("path")
                         ? load_model(resolve(cfg.base_dir, cfg.env.at("path").get<std::string>()))
                         : generate_instance(cfg.env);
  validate(env);
  return env;
}

std::vector<TabularPomdp> build_candidates(const ExperimentConfig& cfg, const TabularPomdp& env) {
  const json& c = cfg.candidates;
  const std::string where = "config.candidates";
  std::vector<TabularPomdp> out;
  if (c.contains("paths")) {
    for (const auto& p : get_as<std::vector<std::string>>(c, "paths", where)) {
      out.push_back(load_model(resolve(cfg.base_dir, p)));
    }
  } else if (c.contains("path")) {
    const fs::path p = resolve(cfg.base_dir, get_as<std::string>(c, "path", where));
    const json doc = read_json_file(p);
    if (!doc.is_array()) throw ValidationError(p.string() + ": candidate file must hold a JSON array of models");
    for (std::size_t i = 0; i < doc.size(); ++i) {
      try {
        out.push_back(model_from_json(doc[i]));
      } catch (const ValidationError& e) {
        throw ValidationError(p.string() + ": model " + std::to_string(i) + ": " + e.what());
      }
    }
  } else if (c.contains("generator")) {
    const auto name = get_as<std::string>(c, "generator", where);
    if (name == "env") {
      out.push_back(env);
    } else if (name == "lock_family") {
      LockSpec spec;
      spec.variant = parse_variant(get_as<std::string>(c, "variant", where));
      spec.depth = get_as<int>(c, "depth", where);
      spec.A = get_as<int>(c, "A", where);
      if (spec.variant == LockVariant::kUndercomplete) spec.alpha = get_as<double>(c, "alpha", where);
      out = lock_family(spec);
    } else {
      throw ConfigError(where + ": unknown generator \"" + name + "\" (expected lock_family or env)");
    }
  } else {
    throw ConfigError(where + ": needs \"path\", \"paths\" or \"generator\"");
  }
  if (out.empty()) throw ConfigError(where + ": no candidates");
  return out;
}

double resolve_beta(const ExperimentConfig& cfg, const TabularPomdp& env) {
  if (cfg.beta_value) return *cfg.beta_value;
  return beta_default(env.S, env.A, env.O, env.H, cfg.K, cfg.beta_delta, cfg.beta_c, cfg.m);
}

RunSummary run_experiment(const ExperimentConfig& cfg) {
  const auto start = Clock::now();
  const TabularPomdp env = build_env(cfg);
  const CandidateSet candidates(build_candidates(cfg, env), cfg.alpha, cfg.m, cfg.enum_cap);
  RunSummary summary;
  summary.beta = resolve_beta(cfg, env);
  summary.num_candidates = candidates.size();
  summary.truth_index = candidates.find(env);
  summary.optimal_value = optimal_policy(env, cfg.enum_cap).value;
  summary.runs.resize(cfg.seeds.size());
  std::vector<std::exception_ptr> failures(cfg.seeds.size());

  auto run_one = [&](std::size_t i) {
    const auto t0 = Clock::now();
    SeedRun& run = summary.runs[i];
    run.seed = cfg.seeds[i];
    Rng rng(run.seed);
    run.trace = cfg.learner == "omle"
                    ? omle_run(env, candidates, cfg.K, summary.beta, rng)
                    : multistep_omle_run(env, candidates, cfg.K, summary.beta, cfg.m, rng);
    run.final_policy_optimal =
        run.trace.episodes.back().true_value >= run.trace.optimal_value - 1e-9;
    if (cfg.mle_validity) {
      double worst = 0.0;
      for (const auto& e : mle_validity_check(run.trace, candidates, env)) worst = std::max(worst, e.ratio);
      run.max_mle_ratio = worst;
    }
    run.wall_seconds = seconds_since(t0);
  };

  const std::size_t n = cfg.seeds.size();
  std::size_t workers = cfg.threads > 0 ? static_cast<std::size_t>(cfg.threads)
                                        : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        run_one(i);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (std::size_t i = 0; i < n; ++i) {
    if (failures[i]) rethrow_with_context(failures[i], "seed " + std::to_string(cfg.seeds[i]) + ": ");
  }
  summary.wall_seconds = seconds_since(start);
  return summary;
}

json RunSummary::to_json(const ExperimentConfig& cfg) const {
  json seeds = json::array();
  std::vector<double> regrets;
  std::vector<double> containment;
  std::vector<double> mixture;
  int always = 0;
  int optimal = 0;
  std::optional<double> worst_ratio;
  for (const SeedRun& run : runs) {
    const RegretTrace& t = run.trace;
    json conf_sizes = json::array();
    for (const auto& e : t.episodes) conf_sizes.push_back(e.conf_size);
    json rec = {{"seed", run.seed},
                {"final_regret", t.cumulative_regret()},
                {"containment_frequency", t.containment_frequency()},
                {"always_contained", t.always_contained()},
                {"mixture_value", t.mixture_value()},
                {"final_policy_optimal", run.final_policy_optimal},
                {"samples", t.dataset.size()},
                {"conf_size_trace", conf_sizes},
                {"warnings", t.warnings},
                {"wall_seconds", run.wall_seconds}};
    if (run.max_mle_ratio) {
      rec["max_mle_ratio"] = *run.max_mle_ratio;
      worst_ratio = std::max(worst_ratio.value_or(0.0), *run.max_mle_ratio);
    }
    seeds.push_back(std::move(rec));
    regrets.push_back(t.cumulative_regret());
    containment.push_back(t.containment_frequency());
    mixture.push_back(t.mixture_value());
    always += t.always_contained() ? 1 : 0;
    optimal += run.final_policy_optimal ? 1 : 0;
  }
  auto mean = [](const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  auto stddev = [&](const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double mu = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - mu) * (x - mu);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
  };
  const auto n = static_cast<double>(runs.size());
  json aggregate = {{"mean_final_regret", mean(regrets)},
                    {"std_final_regret", stddev(regrets)},
                    {"mean_containment_frequency", mean(containment)},
                    {"always_contained_fraction", always / n},
                    {"mean_mixture_value", mean(mixture)},
                    {"final_policy_optimal_fraction", optimal / n}};
  if (worst_ratio) aggregate["max_mle_ratio"] = *worst_ratio;
  json out = {{"schema_version", kSummarySchemaVersion},
              {"learner", cfg.learner},
              {"K", cfg.K},
              {"m", cfg.m},
              {"alpha", cfg.alpha},
              {"beta", beta},
              {"num_candidates", num_candidates},
              {"optimal_value", optimal_value},
              {"truth_index", truth_index ? json(*truth_index) : json(nullptr)},
              {"seeds", seeds},
              {"aggregate", aggregate},
              {"wall_seconds", wall_seconds}};
  return out;
}

void write_trace_csv(const RegretTrace& trace, std::ostream& out) {
  out << kTraceCsvHeader << '\n';
  for (const EpisodeRecord& e : trace.episodes) {
    out << e.k << ',' << e.candidate << ',' << num(e.opt_value) << ',' << num(e.true_value) << ','
        << num(e.cum_regret) << ',' << e.conf_size << ',' << (e.contains_truth ? 1 : 0) << '\n';
  }
}

void write_outputs(const RunSummary& summary, const ExperimentConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  for (const SeedRun& run : summary.runs) {
    const fs::path p = cfg.output_dir / ("seed_" + std::to_string(run.seed) + ".csv");
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + p.string());
    write_trace_csv(run.trace, out);
  }
  const fs::path p = cfg.output_dir / "summary.json";
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + p.string());
  out << summary.to_json(cfg).dump(2) << '\n';
}

json check_report(const TabularPomdp& model, std::span<const int> windows) {
  json report = {{"S", model.S}, {"A", model.A}, {"O", model.O}, {"H", model.H}};
  try {
    validate(model);
    report["valid"] = true;
  } catch (const ValidationError& e) {
    report["valid"] = false;
    report["error"] = e.what();
    return report;
  }
  report["undercomplete"] = model.S <= model.O;
  json per_step = json::array();
  json witnesses = json::array();
  for (int h = 0; h < model.H; ++h) {
    const Matrix& E = model.emis[static_cast<std::size_t>(h)];
    per_step.push_back(kth_singular_value(E, model.S));
    if (auto pair = find_confusable_mixtures(E)) {
      witnesses.push_back({{"h", h + 1},
                           {"nu1", vector_json(pair->nu1)},
                           {"nu2", vector_json(pair->nu2)},
                           {"residual_l1", (E * (pair->nu1 - pair->nu2)).lpNorm<1>()}});
    }
  }
  report["emission_sigma_S"] = per_step;
  if (model.S <= model.O) report["single_step_margin"] = weakly_revealing_margin(model);
  json multi = json::array();
  for (int m : windows) {
    if (m < 1 || m > model.H) {
      multi.push_back({{"m", m}, {"error", "window length must lie in [1, H]"}});
      continue;
    }
    multi.push_back({{"m", m}, {"margin", multistep_revealing_margin(model, m)}});
  }
  report["m_step_margins"] = multi;
  report["confusable_mixtures"] = witnesses;
  return report;
}

HistoryPolicy parse_policy_spec(const std::string& spec, const TabularPomdp& model) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  auto seed_arg = [&] {
    try {
      return static_cast<std::uint64_t>(std::stoull(arg.empty() ? "0" : arg));
    } catch (const std::exception&) {
      throw ConfigError("policy spec \"" + spec + "\": seed must be a non-negative integer");
    }
  };
  if (kind == "uniform") return HistoryPolicy::uniform(model.O, model.A, model.H);
  if (kind == "optimal") return optimal_policy(model).policy;
  if (kind == "random" || kind == "deterministic") {
    Rng rng(seed_arg());
    return HistoryPolicy::random(model.O, model.A, model.H, rng, kind == "deterministic");
  }
  if (kind == "open_loop") {
    std::vector<int> actions;
    std::stringstream ss(arg);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        actions.push_back(std::stoi(tok));
      } catch (const std::exception&) {
        throw ConfigError("policy spec \"" + spec + "\": bad action \"" + tok + "\"");
      }
    }
    if (static_cast<int>(actions.size()) != model.H) {
      throw ConfigError("policy spec \"" + spec + "\": needs exactly H = " + std::to_string(model.H) + " actions");
    }
    for (int a : actions) {
      if (a < 0 || a >= model.A) throw ConfigError("policy spec \"" + spec + "\": action out of range");
    }
    return HistoryPolicy::open_loop(model.O, model.A, actions);
  }
  throw ConfigError("unknown policy spec \"" + spec +
                    "\" (expected uniform, optimal, random:<seed>, deterministic:<seed>, open_loop:a1,...)");
}

json oracle_report(const TabularPomdp& model, const HistoryPolicy& policy, int m, std::uint64_t cap) {
  validate(model);
  check_compatible(model, policy);
  const ObservableOperatorModel oom =
      m == 1 ? single_step_operators(model) : multi_step_operators(model, m);
  const TrajectoryDistribution dist = trajectory_distribution(model, policy, cap);
  double max_dev = 0.0;
  double forward_total = 0.0;
  double oom_total = 0.0;
  for (std::uint64_t code = 0; code < dist.size(); ++code) {
    const Trajectory traj = dist.decode(code);
    const double pf = trajectory_probability_forward(model, policy, traj);
    const double po = trajectory_probability_oom(oom, policy, traj);
    max_dev = std::max(max_dev, std::abs(pf - po));
    forward_total += pf;
    oom_total += po;
  }
  json report = {{"m", m},
                 {"margin", oom.margin},
                 {"trajectories", dist.size()},
                 {"max_abs_deviation", max_dev},
                 {"normalization",
                  {{"forward", forward_total}, {"enumeration", dist.total()}, {"operators", oom_total}}}};
  if (m == 1) {
    const double sqrt_s = std::sqrt(static_cast<double>(model.S));
    double worst11 = 0.0;
    double worst2 = 0.0;
    for (const auto& step : oom.ops) {
      for (const Matrix& B : step) {
        worst11 = std::max(worst11, operator_norm_11(B));
        worst2 = std::max(worst2, operator_norm_2(B));
      }
    }
    report["norms"] = {{"max_norm_11", worst11},
                       {"bound_11", sqrt_s / oom.margin},
                       {"max_norm_2", worst2},
                       {"bound_2", model.S / oom.margin},
                       {"ok", worst11 <= sqrt_s / oom.margin + 1e-9 && worst2 <= model.S / oom.margin + 1e-9}};
  }
  return report;
}

FiniteFunctionClass function_class_from_json(const json& j) {
  const std::string where = "function class";
  const int n = get_as<int>(j, "domain_size", where);
  auto rows = get_as<std::vector<std::vector<double>>>(j, "functions", where);
  FiniteFunctionClass F;
  try {
    F = FiniteFunctionClass::from_table(n, std::move(rows));
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
  if (j.contains("bound")) {
    F.bound = get_as<double>(j, "bound", where);
    F.validate();
  }
  return F;
}

FiniteFunctionClass load_function_class(const fs::path& path) {
  try {
    return function_class_from_json(read_json_file(path));
  } catch (const ConfigError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    if (what.rfind(path.string(), 0) == 0) throw;
    throw ValidationError(path.string() + ": " + what);
  }
}

json eluder_report(const FiniteFunctionClass& F, double eps, std::uint64_t cap) {
  const std::vector<double> g1 = default_eps_grid(F, eps, EluderNorm::kL1);
  const std::vector<double> g2 = default_eps_grid(F, eps, EluderNorm::kL2);
  const EluderResult l1 = eluder_dimension(F, eps, g1, cap);
  const EluderResult l2 = l2_eluder_dimension(F, eps, g2, cap);
  return {{"eps", eps},
          {"l1", {{"dimension", l1.dimension}, {"eps_used", l1.eps_used}, {"witness", l1.witness}}},
          {"l2", {{"dimension", l2.dimension}, {"eps_used", l2.eps_used}, {"witness", l2.witness}}},
          {"l1_le_l2", l1.dimension <= l2.dimension}};
}

json bench_report(int S, int A, int O, int H, int repeats, std::uint64_t seed) {
  Rng rng(seed);
  const TabularPomdp model = random_pomdp(S, A, O, H, rng);
  const HistoryPolicy policy = HistoryPolicy::uniform(O, A, H);
  json timings = json::object();
  auto time = [&](const char* name, auto&& fn) {
    const auto t0 = Clock::now();
    for (int i = 0; i < repeats; ++i) fn();
    timings[name] = seconds_since(t0) / repeats;
  };
  std::vector<Trajectory> samples;
  time("sample_trajectory", [&] { samples.push_back(sample_trajectory(model, policy, rng)); });
  double sink = 0.0;
  time("forward_probability", [&] {
    sink += trajectory_probability_forward(model, policy, samples[samples.size() / 2]);
  });
  time("enumeration", [&] { sink += trajectory_distribution(model, policy).total(); });
  time("optimal_policy", [&] { sink += optimal_policy(model).value; });
  if (S <= O) {
    time("single_step_operators", [&] { sink += single_step_operators(model).margin; });
  }
  return {{"S", S}, {"A", A}, {"O", O}, {"H", H}, {"repeats", repeats},
          {"seconds_per_call", timings}, {"checksum", sink}};
}

}  // namespace omle
