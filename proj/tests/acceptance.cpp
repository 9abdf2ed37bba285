// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "omle/eluder.hpp"
#include "omle/errors.hpp"
#include "omle/harness.hpp"
#include "omle/instances.hpp"
#include "omle/learner.hpp"
#include "omle/oom.hpp"
#include "oracles.hpp"

using namespace omle;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s [%d] %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Shared random corpus: undercomplete single-step and overcomplete two-step models.
struct Corpus {
  std::vector<TabularPomdp> under;
  std::vector<TabularPomdp> over;
};

Corpus build_corpus() {
  Corpus c;
  Rng rng(20240101);
  for (int i = 0; i < 50; ++i) {
    const int S = 2 + i % 2;
    c.under.push_back(random_weakly_revealing(S, 2, 3, 3, 0.02, 10000, rng).model);
  }
  for (int i = 0; i < 20; ++i) c.over.push_back(random_revealing(4, 2, 3, 3, 2, 0.02, 10000, rng).model);
  return c;
}

TabularPomdp perturb(const TabularPomdp& m, double scale, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, scale);
  auto jitter = [&](Matrix& M) {
    for (Eigen::Index c = 0; c < M.cols(); ++c) {
      for (Eigen::Index r = 0; r < M.rows(); ++r) M(r, c) += u(rng);
      M.col(c) /= M.col(c).sum();
    }
  };
  TabularPomdp out = m;
  Matrix mu = out.mu1;
  jitter(mu);
  out.mu1 = mu.col(0);
  for (auto& step : out.trans)
    for (Matrix& T : step) jitter(T);
  for (Matrix& E : out.emis) jitter(E);
  return out;
}

void criterion_oom_equivalence(const Corpus& corpus) {
  const auto t0 = Clock::now();
  double worst = 0.0;
  Rng rng(1);
  auto check = [&](const TabularPomdp& model, const ObservableOperatorModel& oom) {
    for (int p = 0; p < 2; ++p) {
      const HistoryPolicy pi = p == 0 ? HistoryPolicy::uniform(model.O, model.A, model.H)
                                      : HistoryPolicy::random(model.O, model.A, model.H, rng);
      oracle::for_each_trajectory(model.O, model.A, model.H, [&](const Trajectory& t) {
        worst = std::max(worst, std::abs(trajectory_probability_oom(oom, pi, t) -
                                         trajectory_probability_forward(model, pi, t)));
      });
    }
  };
  for (const auto& m : corpus.under) check(m, single_step_operators(m));
  for (const auto& m : corpus.over) check(m, multi_step_operators(m, 2));
  const double secs = seconds_since(t0);
  report(1, "operator/forward equivalence", worst <= 1e-10 && secs < 60.0,
         "max |P_oom - P_forward| = " + fmt("%.3e", worst) + " over 50 single-step + 20 two-step models in " +
             fmt("%.2f", secs) + " s (limits 1e-10, 60 s)");
}

void criterion_normalization(const Corpus& corpus) {
  double worst = 0.0;
  Rng rng(2);
  auto check = [&](const TabularPomdp& model, int m) {
    const auto oom = m == 1 ? single_step_operators(model) : multi_step_operators(model, m);
    const auto pi = HistoryPolicy::random(model.O, model.A, model.H, rng);
    double fwd = 0.0;
    double ops = 0.0;
    oracle::for_each_trajectory(model.O, model.A, model.H, [&](const Trajectory& t) {
      fwd += trajectory_probability_forward(model, pi, t);
      ops += trajectory_probability_oom(oom, pi, t);
    });
    const double enumerated = trajectory_distribution(model, pi).total();
    worst = std::max({worst, std::abs(fwd - 1.0), std::abs(ops - 1.0), std::abs(enumerated - 1.0)});
  };
  for (const auto& m : corpus.under) check(m, 1);
  for (const auto& m : corpus.over) check(m, 2);
  report(2, "normalization", worst <= 1e-9,
         "max |sum P - 1| = " + fmt("%.3e", worst) + " across forward, enumeration and operator paths");
}

void criterion_spectral_facts() {
  double under_dev = 0.0;
  for (int H : {2, 3, 4, 5})
    for (double alpha : {0.05, 0.1, 0.3, 0.5}) {
      Rng rng(static_cast<std::uint64_t>(H * 100 + alpha * 100));
      under_dev = std::max(under_dev, std::abs(weakly_revealing_margin(combinatorial_lock_under(H, 2, alpha, rng)) - alpha));
    }
  double over_min = 1e9;
  for (int m = 2; m <= 4; ++m)
    for (int A = 2; A <= 3; ++A) {
      Rng rng(static_cast<std::uint64_t>(m * 10 + A));
      over_min = std::min(over_min, multistep_revealing_margin(combinatorial_lock_over(m, A, rng), m));
    }
  double block_slack = 1e9;
  Rng brng(5);
  for (int S = 2; S <= 4; ++S)
    for (int k = 1; k <= 3; ++k) {
      const auto b = block_mdp(S, 2, 3, brng, k);
      block_slack = std::min(block_slack, weakly_revealing_margin(b) - 1.0 / std::sqrt(static_cast<double>(b.O)));
    }
  double multi_slack = 1e9;
  Rng rng(6);
  for (int i = 0; i < 50; ++i) {
    const auto model = random_pomdp(2 + i % 3, 2, 2 + i % 2, 3, rng);
    for (int h = 0; h + 2 <= model.H; ++h) {
      const auto M = build_m_step_matrix(model, h, 2);
      double best = 0.0;
      for (std::uint64_t ac = 0; ac < M.index.action_windows(); ++ac) {
        best = std::max(best, kth_singular_value(M.block(ac), model.S));
      }
      multi_slack = std::min(multi_slack, kth_singular_value(M.values, model.S) - best);
    }
  }
  const bool ok = under_dev <= 1e-12 && over_min >= 1.0 - 1e-12 && block_slack >= -1e-12 && multi_slack >= -1e-10;
  report(3, "spectral facts", ok,
         "undercomplete lock |margin - alpha| = " + fmt("%.2e", under_dev) + ", overcomplete lock min margin = " +
             fmt("%.12f", over_min) + ", block MDP margin - 1/sqrt(O) >= " + fmt("%.3e", block_slack) +
             ", sigma_S(M_h) - max_a sigma_S(M_h,a) >= " + fmt("%.3e", multi_slack));
}

void criterion_norm_bounds(const Corpus& corpus) {
  double slack11 = 1e9;
  double slack2 = 1e9;
  for (const auto& model : corpus.under) {
    const auto oom = single_step_operators(model);
    const double s = model.S;
    for (const auto& step : oom.ops)
      for (const Matrix& B : step) {
        slack11 = std::min(slack11, std::sqrt(s) / oom.margin - operator_norm_11(B));
        slack2 = std::min(slack2, s / oom.margin - operator_norm_2(B));
      }
  }
  report(4, "operator norm bounds", slack11 >= -1e-9 && slack2 >= -1e-9,
         "min (sqrt(S)/alpha - ||B||_{1,1}) = " + fmt("%.4f", slack11) + ", min (S/alpha - ||B||_2) = " +
             fmt("%.4f", slack2));
}

void criterion_product_triangle(const Corpus& corpus) {
  double worst = -1e9;
  int pairs = 0;
  Rng rng(7);
  auto check = [&](const TabularPomdp& model, int m) {
    const auto est_model = perturb(model, 0.2, rng);
    ObservableOperatorModel truth = m == 1 ? single_step_operators(model) : multi_step_operators(model, m);
    ObservableOperatorModel est;
    try {
      est = m == 1 ? single_step_operators(est_model) : multi_step_operators(est_model, m);
    } catch (const AssumptionViolated&) {
      return;
    }
    const auto pi = HistoryPolicy::random(model.O, model.A, model.H, rng);
    for (int h = 0; h <= model.H - m; ++h) {
      const auto b = product_error_decomposition(truth, est, pi, h);
      worst = std::max(worst, b.lhs - b.rhs);
    }
    ++pairs;
  };
  for (const auto& m : corpus.under) check(m, 1);
  for (int rep = 0; rep < 3; ++rep)
    for (const auto& m : corpus.over) check(m, 2);
  report(5, "operator product triangle inequality", pairs >= 100 && worst <= 1e-9,
         std::to_string(pairs) + " (true, estimate) pairs, both variants; max (lhs - rhs) = " + fmt("%.4e", worst));
}

void criterion_value_tv() {
  double worst = -1e9;
  Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    const int S = 2 + i % 2;
    const auto a = random_pomdp(S, 2, 3, 3, rng);
    const auto b = random_pomdp(S, 2, 3, 3, rng);
    for (int p = 0; p < 5; ++p) {
      const auto pi = HistoryPolicy::random(3, 2, 3, rng, p % 2 == 1);
      const double gap = std::abs(policy_value(a, pi) - policy_value(b, pi));
      worst = std::max(worst, gap - a.H * tv_distance(a, b, pi));
    }
  }
  report(6, "value gap vs trajectory distance", worst <= 1e-9,
         "100 model pairs x 5 policies; max (|dV| - H * tv) = " + fmt("%.4f", worst));
}

void criterion_discretization() {
  bool ok = true;
  long checked = 0;
  Rng rng(9);
  for (int i = 0; i < 20; ++i) {
    const auto model = random_pomdp(2 + i % 2, 2, 2 + i % 2, 3, rng);
    const auto bar = optimistic_discretize(model, 0.05);
    for (int p = 0; p < 2; ++p) {
      const auto pi = p == 0 ? HistoryPolicy::uniform(model.O, model.A, model.H)
                             : HistoryPolicy::random(model.O, model.A, model.H, rng);
      oracle::for_each_trajectory(model.O, model.A, model.H, [&](const Trajectory& t) {
        ++checked;
        if (trajectory_probability_forward(bar, pi, t) < trajectory_probability_forward(model, pi, t)) ok = false;
      });
    }
  }
  report(7, "optimistic discretization dominates", ok,
         std::to_string(checked) + " (model, policy, trajectory) triples at eps = 0.05");
}

ExperimentConfig lock_experiment() {
  const auto doc = nlohmann::json::parse(R"({
    "env": {"generator": "lock_under", "H": 3, "A": 2, "alpha": 0.3, "good_actions": [1, 0]},
    "candidates": {"generator": "lock_family", "variant": "undercomplete", "depth": 3, "A": 2, "alpha": 0.3},
    "K": 200, "alpha": 0.3, "beta": {"c": 1, "delta": 0.1}, "seeds": {"count": 50, "start": 1}
  })");
  return parse_config(doc, fs::temp_directory_path());
}

void criteria_omle_lock() {
  const auto t0 = Clock::now();
  const ExperimentConfig cfg = lock_experiment();
  const RunSummary summary = run_experiment(cfg);
  const double secs = seconds_since(t0);
  int always = 0;
  int final_optimal = 0;
  double early = 0.0;
  double late = 0.0;
  for (const auto& run : summary.runs) {
    always += run.trace.always_contained() ? 1 : 0;
    final_optimal += run.final_policy_optimal ? 1 : 0;
    for (const auto& e : run.trace.episodes) {
      if (e.k <= 50) early += e.regret;
      if (e.k >= 151) late += e.regret;
    }
  }
  const double n = static_cast<double>(summary.runs.size());
  early /= 50.0 * n;
  late /= 50.0 * n;
  report(8, "confidence sets contain the true lock", always >= 0.9 * n && secs < 300.0,
         std::to_string(always) + "/50 seeds contain it in every episode (beta = " + fmt("%.1f", summary.beta) +
             ", " + fmt("%.1f", secs) + " s; need >= 45 and < 300 s)");
  report(9, "regret decreases on the lock grid", late < 0.25 * early && final_optimal >= 0.8 * n,
         "mean regret episodes 1-50 = " + fmt("%.4f", early) + ", 151-200 = " + fmt("%.4f", late) +
             "; final policy optimal in " + std::to_string(final_optimal) + "/50 seeds");
}

void criterion_multistep() {
  const LockSpec spec{LockVariant::kOvercomplete, 2, 2, 0.5, {}};
  const auto family = lock_family(spec);
  const CandidateSet cs(family, 0.5, 2);
  const auto env = combinatorial_lock_over(2, 2, std::vector<int>{1});
  const int K = 100;
  const double beta = beta_default(env.S, env.A, env.O, env.H, K, 0.1, 1.0, 2);
  int good = 0;
  bool growth_ok = true;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    const auto trace = multistep_omle_run(env, cs, K, beta, 2, rng);
    if (trace.mixture_value() >= 0.9) ++good;
    std::size_t prev = 0;
    for (const auto& e : trace.episodes) {
      if (e.dataset_size - prev != static_cast<std::size_t>((env.H - 2 + 1) * 2)) growth_ok = false;
      prev = e.dataset_size;
    }
  }
  report(10, "multi-step learner on the overcomplete lock", good >= 16 && growth_ok,
         "mixture value >= 0.9 in " + std::to_string(good) + "/20 seeds; dataset growth per episode " +
             (growth_ok ? "exactly" : "NOT") + " (H-m+1)A^(m-1) = 2");
}

FiniteFunctionClass random_class(std::mt19937_64& rng, int max_x, int max_f) {
  std::uniform_int_distribution<int> nx(1, max_x), nf(1, max_f), pick(0, 4);
  const double grid[] = {-1.0, -0.5, 0.0, 0.5, 1.0};
  const int n = nx(rng);
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(nf(rng)), std::vector<double>(n));
  for (auto& r : rows)
    for (double& v : r) v = grid[pick(rng)];
  return FiniteFunctionClass::from_table(n, rows);
}

void criterion_eluder() {
  std::mt19937_64 rng(10);
  int ordered = 0;
  for (int i = 0; i < 100; ++i) {
    const auto F = random_class(rng, 5, 8);
    const double eps = 0.5;
    const int d1 = eluder_dimension(F, eps, default_eps_grid(F, eps, EluderNorm::kL1)).dimension;
    const int d2 = l2_eluder_dimension(F, eps, default_eps_grid(F, eps, EluderNorm::kL2)).dimension;
    ordered += d1 <= d2 ? 1 : 0;
  }
  const bool exact = pigeonhole_bound(1, 1, 1, 1, 10) == 12.0 && pigeonhole_bound(0, 2, 7, 0.5, 6) == 5.0 &&
                     std::abs(pigeonhole_bound(2, 3, 5, 0.5, 4) - (11.0 + 10.0 * std::log(6.0))) < 1e-12;
  int cases = 0;
  int held = 0;
  while (cases < 200) {
    const auto F = random_class(rng, 4, 6);
    std::uniform_int_distribution<int> len(1, 8), pf(0, F.size() - 1), px(0, F.domain_size - 1);
    const int k = len(rng);
    std::vector<int> phi(k), x(k);
    for (int t = 0; t < k; ++t) {
      phi[t] = pf(rng);
      x[t] = px(rng);
    }
    const auto c = verify_pigeonhole(F, phi, x, 1.0, 0.5);
    if (!c.precondition_ok) continue;
    ++cases;
    held += c.holds ? 1 : 0;
  }
  report(11, "eluder suite", ordered == 100 && exact && held == 200,
         "l1 <= l2 on " + std::to_string(ordered) + "/100 classes; pigeonhole exact values " +
             (exact ? "match" : "DIFFER") + "; bound holds on " + std::to_string(held) + "/200 sequences");
}

void criterion_confusable() {
  Rng rng(11);
  std::uniform_int_distribution<int> dim(2, 4);
  int full_ok = 0;
  int deficient_ok = 0;
  for (int i = 0; i < 25; ++i) {
    const int S = dim(rng);
    const int O = S + i % 2;
    const auto E = random_pomdp(S, 1, O, 1, rng).emis[0];
    if (!find_confusable_mixtures(E).has_value() && kth_singular_value(E, S) > 1e-6) ++full_ok;
  }
  for (int i = 0; i < 25; ++i) {
    const int S = dim(rng) + 1;
    Matrix E;
    if (i % 2 == 0) {
      // One column is a convex combination of two others.
      E = random_pomdp(S, 1, S + 1, 1, rng).emis[0];
      std::uniform_real_distribution<double> w(0.1, 0.9);
      const double lam = w(rng);
      E.col(S - 1) = lam * E.col(0) + (1 - lam) * E.col(1);
    } else {
      // More states than observations.
      E = random_pomdp(S, 1, S - 1, 1, rng).emis[0];
    }
    const auto pair = find_confusable_mixtures(E);
    if (!pair) continue;
    bool disjoint = true;
    for (int s = 0; s < S; ++s) disjoint = disjoint && pair->nu1(s) * pair->nu2(s) == 0.0;
    const bool dists = (pair->nu1.array() >= 0).all() && (pair->nu2.array() >= 0).all() &&
                       std::abs(pair->nu1.sum() - 1) < 1e-12 && std::abs(pair->nu2.sum() - 1) < 1e-12;
    if (disjoint && dists && (E * (pair->nu1 - pair->nu2)).lpNorm<1>() <= 1e-9) ++deficient_ok;
  }
  report(12, "confusable mixtures iff rank deficient", full_ok == 25 && deficient_ok == 25,
         "full rank without witness " + std::to_string(full_ok) + "/25; rank deficient with valid witness " +
             std::to_string(deficient_ok) + "/25");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion_determinism() {
  const fs::path dir = fs::temp_directory_path() / "omle_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "config.json") << R"({
    "env": {"generator": "lock_under", "H": 3, "A": 2, "alpha": 0.3, "good_actions": [1, 0]},
    "candidates": {"generator": "lock_family", "variant": "undercomplete", "depth": 3, "A": 2, "alpha": 0.3},
    "K": 100, "alpha": 0.3, "beta": {"c": 1, "delta": 0.1}, "seeds": [1, 2, 3, 4]
  })";
  const std::string cli = OMLE_CLI_PATH;
  std::vector<std::vector<std::string>> outputs;
  bool ran = true;
  for (const char* threads : {"4", "1"}) {
    const fs::path out = dir / (std::string("run_") + threads);
    const std::string cmd = "\"" + cli + "\" learn \"" + (dir / "config.json").string() + "\" --output \"" +
                            out.string() + "\" --threads " + threads + " > /dev/null";
    ran = ran && std::system(cmd.c_str()) == 0;
    std::vector<std::string> files;
    for (int s = 1; s <= 4; ++s) files.push_back(slurp(out / ("seed_" + std::to_string(s) + ".csv")));
    outputs.push_back(files);
  }
  const bool same = ran && outputs[0] == outputs[1] && !outputs[0][0].empty();
  report(13, "learn runs are byte-identical", same,
         ran ? (same ? "4 seed CSVs identical across two invocations" : "CSV contents differ")
             : "learn command failed");
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  try {
    const Corpus corpus = build_corpus();
    criterion_oom_equivalence(corpus);
    criterion_normalization(corpus);
    criterion_spectral_facts();
    criterion_norm_bounds(corpus);
    criterion_product_triangle(corpus);
    criterion_value_tv();
    criterion_discretization();
    criteria_omle_lock();
    criterion_multistep();
    criterion_eluder();
    criterion_confusable();
    criterion_determinism();
  } catch (const std::exception& e) {
    std::printf("FAIL acceptance aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%d failure(s), %.1f s total\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
