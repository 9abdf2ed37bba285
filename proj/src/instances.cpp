#include "omle/instances.hpp"

#include <random>
#include <sstream>

#include "omle/errors.hpp"
#include "omle/oom.hpp"

namespace omle {

namespace {

int state_id(int stage, int bad) { return 2 * stage + bad; }

void check_lock_actions(int depth, int A, std::span<const int> good_actions) {
  if (depth < 1) throw ValidationError("lock depth must be at least 1");
  if (A < 1) throw ValidationError("lock needs at least one action");
  if (static_cast<int>(good_actions.size()) != depth - 1) {
    std::ostringstream msg;
    msg << "planted sequence has length " << good_actions.size() << ", expected " << depth - 1;
    throw ValidationError(msg.str());
  }
  for (int a : good_actions) {
    if (a < 0 || a >= A) throw ValidationError("planted action " + std::to_string(a) + " is outside [0, A)");
  }
}

std::vector<int> draw_actions(int len, int A, Rng& rng) {
  std::uniform_int_distribution<int> pick(0, A - 1);
  std::vector<int> out(static_cast<std::size_t>(std::max(len, 0)));
  for (int& a : out) a = pick(rng);
  return out;
}

// Stage-advancing deterministic dynamics shared by both locks.
Matrix lock_transition(int stages, int action, std::span<const int> good_actions) {
  const int S = 2 * stages;
  Matrix T = Matrix::Zero(S, S);
  for (int i = 0; i < stages; ++i) {
    if (i == stages - 1) {
      T(state_id(i, 0), state_id(i, 0)) = 1.0;
      T(state_id(i, 1), state_id(i, 1)) = 1.0;
      continue;
    }
    const bool good = action == good_actions[static_cast<std::size_t>(i)];
    T(state_id(i + 1, good ? 0 : 1), state_id(i, 0)) = 1.0;
    T(state_id(i + 1, 1), state_id(i, 1)) = 1.0;
  }
  return T;
}

TabularPomdp lock_skeleton(int stages, int A, int O, int H, std::span<const int> good_actions) {
  TabularPomdp model = TabularPomdp::zeros(2 * stages, A, O, H);
  model.mu1(state_id(0, 0)) = 1.0;
  for (int h = 0; h + 1 < H; ++h) {
    for (int a = 0; a < A; ++a) {
      model.trans[static_cast<std::size_t>(h)][static_cast<std::size_t>(a)] =
          lock_transition(stages, a, good_actions);
    }
  }
  return model;
}

Vector dirichlet(int n, Rng& rng) {
  std::exponential_distribution<double> expo(1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = expo(rng);
  return v / v.sum();
}

Matrix dirichlet_columns(int rows, int cols, Rng& rng) {
  Matrix M(rows, cols);
  for (int c = 0; c < cols; ++c) M.col(c) = dirichlet(rows, rng);
  return M;
}

}  // namespace

TabularPomdp combinatorial_lock_under(int H, int A, double alpha, std::span<const int> good_actions) {
  check_lock_actions(H, A, good_actions);
  if (!(alpha > 0.0 && alpha <= 0.5)) {
    std::ostringstream msg;
    msg << "lock revealing parameter alpha = " << alpha << " must lie in (0, 1/2]";
    throw ValidationError(msg.str());
  }
  const int S = 2 * H;
  const int dummy = S;
  TabularPomdp model = lock_skeleton(H, A, S + 1, H, good_actions);
  Matrix E = Matrix::Zero(S + 1, S);
  for (int s = 0; s < S; ++s) {
    if (s == state_id(H - 1, 0)) {
      E(s, s) = 1.0;
    } else {
      E(s, s) = alpha;
      E(dummy, s) = 1.0 - alpha;
    }
  }
  for (int h = 0; h < H; ++h) {
    model.emis[static_cast<std::size_t>(h)] = E;
    model.rewards[static_cast<std::size_t>(h)](state_id(H - 1, 0)) = 1.0;
  }
  return model;
}

TabularPomdp combinatorial_lock_under(int H, int A, double alpha, Rng& rng) {
  const std::vector<int> planted = draw_actions(H - 1, A, rng);
  return combinatorial_lock_under(H, A, alpha, planted);
}

TabularPomdp combinatorial_lock_over(int m, int A, std::span<const int> good_actions) {
  check_lock_actions(m, A, good_actions);
  TabularPomdp model = lock_skeleton(m, A, 3, m, good_actions);
  Matrix E = Matrix::Zero(3, 2 * m);
  for (int i = 0; i < m; ++i) {
    if (i < m - 1) {
      E(kLockDummyObs, state_id(i, 0)) = 1.0;
      E(kLockDummyObs, state_id(i, 1)) = 1.0;
    } else {
      E(kLockRewardObs, state_id(i, 0)) = 1.0;
      E(kLockZeroObs, state_id(i, 1)) = 1.0;
    }
  }
  for (int h = 0; h < m; ++h) {
    model.emis[static_cast<std::size_t>(h)] = E;
    model.rewards[static_cast<std::size_t>(h)](kLockRewardObs) = 1.0;
  }
  return model;
}

TabularPomdp combinatorial_lock_over(int m, int A, Rng& rng) {
  const std::vector<int> planted = draw_actions(m - 1, A, rng);
  return combinatorial_lock_over(m, A, planted);
}

TabularPomdp make_lock(const LockSpec& spec, Rng& rng) {
  std::vector<int> planted = spec.good_actions;
  if (planted.empty() && spec.depth > 1) planted = draw_actions(spec.depth - 1, spec.A, rng);
  if (spec.variant == LockVariant::kUndercomplete) {
    return combinatorial_lock_under(spec.depth, spec.A, spec.alpha, planted);
  }
  return combinatorial_lock_over(spec.depth, spec.A, planted);
}

std::vector<std::vector<int>> all_action_sequences(int A, int len) {
  std::vector<std::vector<int>> out{{}};
  for (int i = 0; i < len; ++i) {
    std::vector<std::vector<int>> next;
    next.reserve(out.size() * static_cast<std::size_t>(A));
    for (const auto& prefix : out) {
      for (int a = 0; a < A; ++a) {
        next.push_back(prefix);
        next.back().push_back(a);
      }
    }
    out = std::move(next);
  }
  return out;
}

std::vector<TabularPomdp> lock_family(const LockSpec& spec) {
  std::vector<TabularPomdp> out;
  for (const auto& planted : all_action_sequences(spec.A, spec.depth - 1)) {
    out.push_back(spec.variant == LockVariant::kUndercomplete
                      ? combinatorial_lock_under(spec.depth, spec.A, spec.alpha, planted)
                      : combinatorial_lock_over(spec.depth, spec.A, planted));
  }
  return out;
}

int lock_family_index(int A, std::span<const int> good_actions) {
  int index = 0;
  for (int a : good_actions) index = index * A + a;
  return index;
}

TabularPomdp random_pomdp(int S, int A, int O, int H, Rng& rng) {
  if (S < 1 || A < 1 || O < 1 || H < 1) throw ValidationError("S, A, O, H must all be positive");
  TabularPomdp model = TabularPomdp::zeros(S, A, O, H);
  model.mu1 = dirichlet(S, rng);
  for (auto& step : model.trans) {
    for (Matrix& T : step) T = dirichlet_columns(S, S, rng);
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int h = 0; h < H; ++h) {
    model.emis[static_cast<std::size_t>(h)] = dirichlet_columns(O, S, rng);
    for (int o = 0; o < O; ++o) model.rewards[static_cast<std::size_t>(h)](o) = unit(rng);
  }
  return model;
}

GeneratedModel random_revealing(int S, int A, int O, int H, int m, double alpha_min, int max_tries,
                                Rng& rng) {
  for (int t = 1; t <= max_tries; ++t) {
    TabularPomdp model = random_pomdp(S, A, O, H, rng);
    const double margin = multistep_revealing_margin(model, m);
    if (margin >= alpha_min) return {std::move(model), margin, t};
  }
  std::ostringstream msg;
  msg << "no model with " << m << "-step revealing margin >= " << alpha_min << " in " << max_tries
      << " draws";
  throw AssumptionViolated(msg.str());
}

GeneratedModel random_weakly_revealing(int S, int A, int O, int H, double alpha_min, int max_tries,
                                       Rng& rng) {
  if (S > O) throw AssumptionViolated("single-step revealing models need S <= O");
  return random_revealing(S, A, O, H, 1, alpha_min, max_tries, rng);
}

TabularPomdp block_mdp(int S, int A, int H, Rng& rng, int obs_per_state) {
  if (obs_per_state < 1) throw ValidationError("block MDP needs at least one observation per state");
  const int O = S * obs_per_state;
  TabularPomdp model = random_pomdp(S, A, O, H, rng);
  for (Matrix& E : model.emis) {
    E.setZero();
    for (int s = 0; s < S; ++s) {
      E.block(s * obs_per_state, s, obs_per_state, 1) = dirichlet(obs_per_state, rng);
    }
  }
  return model;
}

}  // namespace omle
