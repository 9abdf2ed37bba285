#pragma once

#include <cstdint>
#include <vector>

#include "omle/linalg.hpp"
#include "omle/policy.hpp"

namespace omle {

/// Episodic tabular POMDP.
///
/// Kernels are stored column-per-state: column s of `trans[h][a]` is the
/// next-state distribution from state s, and column s of `emis[h]` is the
/// observation distribution at state s. Steps are zero-based, so `trans` has
/// H-1 entries and `emis` / `rewards` have H. Rewards are paid on observing
/// o_h; the final action triggers neither reward nor transition.
///
/// The struct is a plain parameter bundle; call validate() to check the
/// stochasticity invariants. Optimistic discretizations reuse it to hold
/// super-normalized parameters.
struct TabularPomdp {
  int S = 0;
  int A = 0;
  int O = 0;
  int H = 0;
  Vector mu1;
  std::vector<std::vector<Matrix>> trans;
  std::vector<Matrix> emis;
  std::vector<Vector> rewards;

  /// Allocates zeroed parameters of the right shapes.
  static TabularPomdp zeros(int S, int A, int O, int H);
};

/// Throws ValidationError naming the first broken invariant.
void validate(const TabularPomdp& model);

/// Throws ValidationError unless the policy's (O, A, H) match the model.
void check_compatible(const TabularPomdp& model, const HistoryPolicy& policy);

/// Largest absolute parameter difference; +inf on shape mismatch.
double max_parameter_difference(const TabularPomdp& a, const TabularPomdp& b);

/// Draws one episode: s_1 ~ mu1, o_h ~ O_h(.|s_h), a_h ~ pi_h(.|history),
/// s_{h+1} ~ T_{h,a_h}(.|s_h). Hidden states are not returned.
Trajectory sample_trajectory(const TabularPomdp& model, const HistoryPolicy& policy, Rng& rng);

/// Exact probability of a trajectory or prefix by the forward recursion over
/// hidden-state marginals.
double trajectory_probability_forward(const TabularPomdp& model, const HistoryPolicy& policy,
                                      std::span<const Step> traj);

/// Dense map from every full trajectory to its probability, indexed by the
/// mixed-radix trajectory code (o_1, a_1, ..., o_H, a_H), first step most significant.
class TrajectoryDistribution {
 public:
  TrajectoryDistribution(int num_obs, int num_actions, int horizon, std::vector<double> probs);

  [[nodiscard]] std::size_t size() const { return probs_.size(); }
  [[nodiscard]] double operator[](std::uint64_t code) const { return probs_[code]; }
  [[nodiscard]] const std::vector<double>& probabilities() const { return probs_; }
  [[nodiscard]] Trajectory decode(std::uint64_t code) const;
  [[nodiscard]] std::uint64_t encode(std::span<const Step> traj) const;
  [[nodiscard]] double total() const;

 private:
  int num_obs_;
  int num_actions_;
  int horizon_;
  std::vector<double> probs_;
};

/// Exhaustive enumeration. Throws EnumerationTooLarge when (O*A)^H > cap.
TrajectoryDistribution trajectory_distribution(const TabularPomdp& model,
                                               const HistoryPolicy& policy,
                                               std::uint64_t cap = default_enumeration_cap());

enum class ValueMethod {
  /// Depth-first accumulation of per-step expected reward over reachable histories.
  kForwardMarginals,
  /// Sum of P(tau) * total reward over the full trajectory distribution.
  kEnumeration,
};

/// Exact expected total reward V^pi.
double policy_value(const TabularPomdp& model, const HistoryPolicy& policy,
                    ValueMethod method = ValueMethod::kForwardMarginals,
                    std::uint64_t cap = default_enumeration_cap());

struct PlanResult {
  HistoryPolicy policy;
  double value = 0.0;
};

/// Exact optimal deterministic history-dependent policy by backward induction
/// over enumerated histories, tracking the unnormalized belief. Ties go to the
/// lowest action index; unreachable histories play action 0.
PlanResult optimal_policy(const TabularPomdp& model, std::uint64_t cap = default_enumeration_cap());

}  // namespace omle
