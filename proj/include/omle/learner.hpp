#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "omle/pomdp.hpp"

namespace omle {

/// Probabilities below this floor enter the likelihood as ln(1e-300).
inline constexpr double kLikelihoodFloor = 1e-300;

/// Slack on the revealing gate; margins are computed by SVD and a lock with
/// margin exactly alpha must pass a gate at alpha.
inline constexpr double kMarginTol = 1e-10;

/// Default confidence radius (natural log). m = 1 gives
///   c (H(S^2 A + S O) ln(S A O H K) + ln(K / delta)),
/// m > 1 gives
///   c (H(S^2 A + S O) ln(S A O H) + ln(K H A^m / delta)).
double beta_default(int S, int A, int O, int H, int K, double delta, double c = 1.0, int m = 1);

/// ln P^pi_theta(tau) with the 1e-300 floor.
double log_likelihood(const TabularPomdp& candidate, const HistoryPolicy& policy,
                      std::span<const Step> traj);

/// Finite model grid with precomputed revealing margins and optimal plans.
class CandidateSet {
 public:
  /// Validates every model, checks shared dimensions, and plans each candidate.
  CandidateSet(std::vector<TabularPomdp> models, double alpha, int m = 1,
               std::uint64_t cap = default_enumeration_cap());

  [[nodiscard]] std::size_t size() const { return models_.size(); }
  [[nodiscard]] const TabularPomdp& model(std::size_t i) const { return models_[i]; }
  [[nodiscard]] double margin(std::size_t i) const { return margins_[i]; }
  [[nodiscard]] bool revealing(std::size_t i) const { return margins_[i] >= alpha_ - kMarginTol; }
  [[nodiscard]] const std::shared_ptr<const HistoryPolicy>& plan(std::size_t i) const {
    return plans_[i];
  }
  [[nodiscard]] double optimal_value(std::size_t i) const { return values_[i]; }
  [[nodiscard]] double alpha() const { return alpha_; }
  [[nodiscard]] int window() const { return m_; }
  [[nodiscard]] std::uint64_t cap() const { return cap_; }

  /// Index of the candidate whose parameters match `model` within 1e-12.
  [[nodiscard]] std::optional<int> find(const TabularPomdp& model) const;

 private:
  std::vector<TabularPomdp> models_;
  std::vector<double> margins_;
  std::vector<std::shared_ptr<const HistoryPolicy>> plans_;
  std::vector<double> values_;
  double alpha_;
  int m_;
  std::uint64_t cap_;
};

/// One (policy, trajectory) pair of the dataset D.
struct DataRecord {
  std::shared_ptr<const HistoryPolicy> policy;
  Trajectory traj;
  int episode = 0;  // 1-based outer episode that collected it
};

/// Append-only dataset with per-candidate cumulative log-likelihoods.
class LikelihoodLedger {
 public:
  explicit LikelihoodLedger(std::size_t num_candidates) : totals_(num_candidates, 0.0) {}

  void append(DataRecord record, const CandidateSet& candidates);

  [[nodiscard]] const std::vector<double>& totals() const { return totals_; }
  [[nodiscard]] const std::vector<DataRecord>& dataset() const { return data_; }

  /// Sums from scratch over the dataset, for consistency checks.
  [[nodiscard]] std::vector<double> recompute(const CandidateSet& candidates) const;

 private:
  std::vector<double> totals_;
  std::vector<DataRecord> data_;
};

struct ConfidenceSet {
  int episode = 0;
  std::vector<int> members;
  double beta = 0.0;
  double max_log_likelihood = 0.0;

  [[nodiscard]] bool contains(int i) const;
};

/// members = {i : LL_i >= max_j LL_j - beta and margin_i >= alpha}. Throws
/// ConfigError when empty.
ConfidenceSet confidence_set_update(const CandidateSet& candidates, const LikelihoodLedger& ledger,
                                    double beta, int episode = 0);

struct OptimisticChoice {
  int candidate = -1;
  std::shared_ptr<const HistoryPolicy> policy;
  double value = 0.0;
};

/// argmax over members of the candidate's optimal value; ties to the lowest index.
OptimisticChoice optimistic_plan(const CandidateSet& candidates, const ConfidenceSet& conf);

struct EpisodeRecord {
  int k = 0;
  int candidate = -1;
  double opt_value = 0.0;
  double true_value = 0.0;
  double regret = 0.0;
  double cum_regret = 0.0;
  int conf_size = 0;
  bool contains_truth = false;
  std::vector<int> members;
  std::size_t dataset_size = 0;  // |D| after this episode's data was added
};

/// Per-episode log of a learner run. For multi-step runs, `regret` is the
/// suboptimality V* - V^{pi^k} of the optimistic policy, not of the spliced
/// exploration policies that generated the data.
struct RegretTrace {
  std::vector<EpisodeRecord> episodes;
  std::vector<DataRecord> dataset;
  double optimal_value = 0.0;
  double beta = 0.0;
  int m = 1;
  std::optional<int> truth_index;
  std::vector<std::string> warnings;

  [[nodiscard]] double cumulative_regret() const {
    return episodes.empty() ? 0.0 : episodes.back().cum_regret;
  }
  /// Fraction of episodes whose confidence set contained the true model.
  [[nodiscard]] double containment_frequency() const;
  [[nodiscard]] bool always_contained() const;
  /// (1/K) sum_k V^{pi^k}(theta*): value of the uniform mixture of planned policies.
  [[nodiscard]] double mixture_value() const;
};

/// Optimistic maximum likelihood estimation: plan optimistically over the
/// confidence set, play the plan on `env`, grow the dataset, refresh the set.
RegretTrace omle_run(const TabularPomdp& env, const CandidateSet& candidates, int K, double beta,
                     Rng& rng);

/// Multi-step variant: after each optimistic plan, executes pi_{1:h} o a o
/// pi_{h+m:H} for every h in {0..H-m} and every a in A^{m-1}.
RegretTrace multistep_omle_run(const TabularPomdp& env, const CandidateSet& candidates, int K,
                               double beta, int m, Rng& rng);

/// Coordinatewise ceiling of every parameter (mu1, T, O) onto the eps grid.
/// The result is not stochastic but the forward recursion still applies and
/// dominates the original trajectory probabilities. Rewards are copied.
TabularPomdp optimistic_discretize(const TabularPomdp& model, double eps);

/// (mu1, all T, all O) flattened in storage order.
std::vector<double> flatten_parameters(const TabularPomdp& model);

/// sum_tau |P^pi_a(tau) - P^pi_b(tau)| (twice the usual total variation).
double tv_distance(const TabularPomdp& a, const TabularPomdp& b, const HistoryPolicy& policy,
                   std::uint64_t cap = default_enumeration_cap());

struct MleValidityEntry {
  int k = 0;
  int candidate = -1;
  std::size_t records = 0;   // dataset records collected before episode k
  double tv_sq_sum = 0.0;    // sum over those records of tv(theta, theta*, pi)^2
  double ll_deficit = 0.0;   // sum of ln(P_theta*(tau) / P_theta(tau))
  double complexity = 0.0;   // H(S^2A+SO) ln(T S A O H) + ln(T / delta), T = records
  double ratio = 0.0;        // tv_sq_sum / (ll_deficit + complexity), 0 when both vanish
};

/// For every episode and every confidence-set member, the two sides of the
/// MLE validity inequality (with constant 1) over the data collected earlier.
std::vector<MleValidityEntry> mle_validity_check(const RegretTrace& trace,
                                                 const CandidateSet& candidates,
                                                 const TabularPomdp& env, double delta = 0.1);

}  // namespace omle
