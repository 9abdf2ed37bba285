#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "omle/errors.hpp"
#include "omle/harness.hpp"
#include "omle/model_io.hpp"

namespace {

using json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitCap = 3;

void print_check(const json& r) {
  std::cout << "dimensions: S=" << r["S"] << " A=" << r["A"] << " O=" << r["O"] << " H=" << r["H"] << '\n';
  if (!r["valid"].get<bool>()) {
    std::cout << "valid: no (" << r["error"].get<std::string>() << ")\n";
    return;
  }
  std::cout << "valid: yes\n";
  std::cout << (r["undercomplete"].get<bool>() ? "undercomplete (S <= O)\n" : "overcomplete (S > O)\n");
  const auto& sig = r["emission_sigma_S"];
  for (std::size_t h = 0; h < sig.size(); ++h) {
    std::cout << "sigma_S(O_" << h + 1 << ") = " << sig[h].get<double>() << '\n';
  }
  if (r.contains("single_step_margin")) {
    std::cout << "single-step margin = " << r["single_step_margin"].get<double>() << '\n';
  }
  for (const auto& e : r["m_step_margins"]) {
    if (e.contains("error")) {
      std::cout << "m=" << e["m"] << ": " << e["error"].get<std::string>() << '\n';
    } else {
      std::cout << "m=" << e["m"] << " margin = " << e["margin"].get<double>() << '\n';
    }
  }
  for (const auto& w : r["confusable_mixtures"]) {
    std::cout << "confusable mixtures at h=" << w["h"] << ": nu1=" << w["nu1"].dump()
              << " nu2=" << w["nu2"].dump() << " |O(nu1-nu2)|_1=" << w["residual_l1"].get<double>() << '\n';
  }
}

int run(int argc, char** argv) {
  CLI::App app{"Optimistic maximum likelihood learning for tabular POMDPs"};
  app.require_subcommand(1);
  bool as_json = false;
  app.add_flag("--json", as_json, "Print machine-readable JSON instead of text");

  auto* check = app.add_subcommand("check", "Validate a model and report revealing margins");
  std::string check_path;
  std::vector<int> check_windows;
  check->add_option("model", check_path, "Model JSON file")->required();
  check->add_option("--m", check_windows, "Window lengths for m-step margins (repeatable)");

  auto* gen = app.add_subcommand("gen", "Generate an instance");
  std::string gen_name;
  std::string gen_out;
  std::optional<int> gS, gA, gO, gH, gm, g_obs, g_tries;
  std::optional<double> g_alpha, g_alpha_min;
  std::vector<int> g_good;
  std::uint64_t g_seed = 0;
  gen->add_option("generator", gen_name, "lock_under | lock_over | random | random_revealing | block_mdp")
      ->required();
  gen->add_option("-o,--output", gen_out, "Output file (stdout if omitted)");
  gen->add_option("--S", gS);
  gen->add_option("--A", gA);
  gen->add_option("--O", gO);
  gen->add_option("--H", gH);
  gen->add_option("--m", gm);
  gen->add_option("--alpha", g_alpha);
  gen->add_option("--alpha-min", g_alpha_min);
  gen->add_option("--good-actions", g_good)->delimiter(',');
  gen->add_option("--obs-per-state", g_obs);
  gen->add_option("--max-tries", g_tries);
  gen->add_option("--seed", g_seed);

  auto* learn = app.add_subcommand("learn", "Run an experiment config (JSON or TOML)");
  std::string learn_path;
  std::optional<std::string> learn_out;
  std::optional<int> learn_threads;
  learn->add_option("config", learn_path, "Experiment config")->required();
  learn->add_option("--output", learn_out, "Override the output directory");
  learn->add_option("--threads", learn_threads, "Worker threads (0 = all cores)");

  auto* eluder = app.add_subcommand("eluder", "Eluder dimensions of a finite function class");
  std::string eluder_path;
  double eluder_eps = 0.5;
  std::uint64_t eluder_cap = omle::kDefaultEluderCap;
  eluder->add_option("class", eluder_path, "Function class JSON file")->required();
  eluder->add_option("--eps", eluder_eps)->check(CLI::PositiveNumber);
  eluder->add_option("--cap", eluder_cap, "Search node cap");

  auto* oracle = app.add_subcommand("oracle", "Compare operator and forward probabilities");
  std::string oracle_path;
  std::string oracle_policy = "uniform";
  int oracle_m = 1;
  oracle->add_option("model", oracle_path, "Model JSON file")->required();
  oracle->add_option("--policy", oracle_policy,
                     "uniform | optimal | random:<seed> | deterministic:<seed> | open_loop:a1,...");
  oracle->add_option("--m", oracle_m)->check(CLI::PositiveNumber);

  auto* bench = app.add_subcommand("bench", "Time the core routines on a random model");
  int bS = 3, bA = 2, bO = 3, bH = 4, b_repeats = 5;
  std::uint64_t b_seed = 0;
  bench->add_option("--S", bS);
  bench->add_option("--A", bA);
  bench->add_option("--O", bO);
  bench->add_option("--H", bH);
  bench->add_option("--repeats", b_repeats)->check(CLI::PositiveNumber);
  bench->add_option("--seed", b_seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  std::cout << std::setprecision(12);
  if (*check) {
    const json report = omle::check_report(omle::load_model(check_path), check_windows);
    if (as_json) {
      std::cout << report.dump(2) << '\n';
    } else {
      print_check(report);
    }
    return report["valid"].get<bool>() ? kExitOk : kExitValidation;
  }
  if (*gen) {
    json spec = {{"generator", gen_name}, {"seed", g_seed}};
    auto put = [&spec](const char* key, const auto& opt) {
      if (opt) spec[key] = *opt;
    };
    put("S", gS);
    put("A", gA);
    put("O", gO);
    put("H", gH);
    put("m", gm);
    put("alpha", g_alpha);
    put("alpha_min", g_alpha_min);
    put("obs_per_state", g_obs);
    put("max_tries", g_tries);
    if (!g_good.empty()) spec["good_actions"] = g_good;
    json out = omle::model_to_json(omle::generate_instance(spec));
    out["metadata"] = spec;
    if (gen_out.empty()) {
      std::cout << out.dump(2) << '\n';
    } else {
      std::ofstream f(gen_out);
      if (!f) throw omle::ValidationError("cannot write " + gen_out);
      f << out.dump(2) << '\n';
    }
    return kExitOk;
  }
  if (*learn) {
    omle::ExperimentConfig cfg = omle::load_config(learn_path);
    if (learn_out) cfg.output_dir = *learn_out;
    if (learn_threads) cfg.threads = *learn_threads;
    const omle::RunSummary summary = omle::run_experiment(cfg);
    omle::write_outputs(summary, cfg);
    const json s = summary.to_json(cfg);
    if (as_json) {
      std::cout << s.dump(2) << '\n';
    } else {
      const json& agg = s["aggregate"];
      std::cout << "beta = " << summary.beta << '\n'
                << "seeds = " << summary.runs.size() << '\n'
                << "mean final regret = " << agg["mean_final_regret"].get<double>() << '\n'
                << "mean containment frequency = " << agg["mean_containment_frequency"].get<double>() << '\n'
                << "seeds always containing the true model = " << agg["always_contained_fraction"].get<double>()
                << '\n'
                << "outputs written to " << cfg.output_dir.string() << '\n';
    }
    return kExitOk;
  }
  if (*eluder) {
    const omle::FiniteFunctionClass F = omle::load_function_class(eluder_path);
    try {
      const json r = omle::eluder_report(F, eluder_eps, eluder_cap);
      if (as_json) {
        std::cout << r.dump(2) << '\n';
      } else {
        std::cout << "l1 dimension = " << r["l1"]["dimension"] << " (eps' = " << r["l1"]["eps_used"]
                  << ", witness " << r["l1"]["witness"].dump() << ")\n"
                  << "l2 dimension = " << r["l2"]["dimension"] << " (eps' = " << r["l2"]["eps_used"]
                  << ", witness " << r["l2"]["witness"].dump() << ")\n"
                  << "l1 <= l2: " << (r["l1_le_l2"].get<bool>() ? "yes" : "NO") << '\n';
      }
      return r["l1_le_l2"].get<bool>() ? kExitOk : kExitValidation;
    } catch (const omle::EluderSearchTooLarge& e) {
      std::cerr << "error: " << e.what() << "\npartial result: dimension >= " << e.lower_bound << '\n';
      return kExitCap;
    }
  }
  if (*oracle) {
    const omle::TabularPomdp model = omle::load_model(oracle_path);
    const omle::HistoryPolicy policy = omle::parse_policy_spec(oracle_policy, model);
    const json r = omle::oracle_report(model, policy, oracle_m);
    if (as_json) {
      std::cout << r.dump(2) << '\n';
    } else {
      std::cout << "m = " << r["m"] << ", margin = " << r["margin"].get<double>() << '\n'
                << "trajectories = " << r["trajectories"] << '\n'
                << "max |P_operators - P_forward| = " << r["max_abs_deviation"].get<double>() << '\n'
                << "sum P: forward = " << r["normalization"]["forward"].get<double>()
                << ", enumeration = " << r["normalization"]["enumeration"].get<double>()
                << ", operators = " << r["normalization"]["operators"].get<double>() << '\n';
      if (r.contains("norms")) {
        const json& n = r["norms"];
        std::cout << "max ||B||_{1,1} = " << n["max_norm_11"].get<double>() << " (bound "
                  << n["bound_11"].get<double>() << ")\n"
                  << "max ||B||_2 = " << n["max_norm_2"].get<double>() << " (bound "
                  << n["bound_2"].get<double>() << ")\n";
      }
    }
    return kExitOk;
  }
  if (*bench) {
    std::cout << omle::bench_report(bS, bA, bO, bH, b_repeats, b_seed).dump(2) << '\n';
    return kExitOk;
  }
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const omle::EnumerationTooLarge& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCap;
  } catch (const omle::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
}
