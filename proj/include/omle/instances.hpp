#pragma once

#include <span>
#include <string>
#include <vector>

#include "omle/pomdp.hpp"

namespace omle {

// Lock state and observation layout. State 2i + j is s_{i,j} for stage i
// (zero-based) and j = 0 good, j = 1 bad. Every stage advances by one per
// step and the last stage is absorbing. The start state is s_{0,0}.
//
// Undercomplete lock (depth H): S = 2H, O = 2H + 1. Observation 2i + j is the
// state-revealing o_{i,j}; observation 2H is the dummy. Each state shows its
// own observation with probability alpha and the dummy otherwise, except
// s_{H-1,0}, which always shows its own. Reward 1 on o_{H-1,0}.
//
// Overcomplete lock (depth m): S = 2m, O = 3, H = m. Observation 0 is the
// dummy shown before the last stage, 1 is shown at s_{m-1,0} and pays reward
// 1, 2 is shown at s_{m-1,1}.

enum class LockVariant { kUndercomplete, kOvercomplete };

inline constexpr int kLockDummyObs = 0;
inline constexpr int kLockRewardObs = 1;
inline constexpr int kLockZeroObs = 2;

struct LockSpec {
  LockVariant variant = LockVariant::kUndercomplete;
  int depth = 2;       // H for the undercomplete lock, m for the overcomplete lock
  int A = 2;
  double alpha = 0.5;  // undercomplete only, in (0, 1/2]
  std::vector<int> good_actions;  // length depth - 1; empty draws one uniformly
};

TabularPomdp combinatorial_lock_under(int H, int A, double alpha, std::span<const int> good_actions);
TabularPomdp combinatorial_lock_under(int H, int A, double alpha, Rng& rng);

TabularPomdp combinatorial_lock_over(int m, int A, std::span<const int> good_actions);
TabularPomdp combinatorial_lock_over(int m, int A, Rng& rng);

/// Builds the lock described by `spec`, drawing the planted sequence from rng if empty.
TabularPomdp make_lock(const LockSpec& spec, Rng& rng);

/// Every sequence in [A]^len in lexicographic order (first entry most significant).
std::vector<std::vector<int>> all_action_sequences(int A, int len);

/// The A^{depth-1} sibling locks of `spec`, one per planted sequence, in
/// lexicographic order. spec.good_actions is ignored.
std::vector<TabularPomdp> lock_family(const LockSpec& spec);

/// Position of a planted sequence within lock_family.
int lock_family_index(int A, std::span<const int> good_actions);

/// Dirichlet(1) columns for mu1, transitions and emissions; rewards uniform in [0, 1].
TabularPomdp random_pomdp(int S, int A, int O, int H, Rng& rng);

struct GeneratedModel {
  TabularPomdp model;
  double margin = 0.0;
  int tries = 0;
};

/// Rejection-samples random_pomdp until the m-step revealing margin reaches
/// alpha_min. Throws AssumptionViolated after max_tries draws.
GeneratedModel random_revealing(int S, int A, int O, int H, int m, double alpha_min, int max_tries,
                                Rng& rng);

/// Single-step case of random_revealing. Requires S <= O.
GeneratedModel random_weakly_revealing(int S, int A, int O, int H, double alpha_min, int max_tries,
                                       Rng& rng);

/// Block MDP: state s owns observations s*k .. s*k + k - 1 (k = obs_per_state)
/// and emits only those, with Dirichlet(1) weights when k > 1. O = S*k.
TabularPomdp block_mdp(int S, int A, int H, Rng& rng, int obs_per_state = 1);

}  // namespace omle
