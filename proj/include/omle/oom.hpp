#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "omle/linalg.hpp"
#include "omle/pomdp.hpp"

namespace omle {

/// Row layout shared by m-step emission-action matrices and m-step operators:
/// a window (a_1..a_{m-1}, o_1..o_m) maps to
///   row = action_code * O^m + obs_code,
/// with both codes mixed-radix, earliest symbol most significant.
struct WindowIndex {
  int A = 0;
  int O = 0;
  int m = 1;

  [[nodiscard]] std::uint64_t action_windows() const;  // A^{m-1}
  [[nodiscard]] std::uint64_t obs_windows() const;     // O^m
  [[nodiscard]] std::uint64_t size() const { return action_windows() * obs_windows(); }
  [[nodiscard]] std::uint64_t row(std::span<const int> actions, std::span<const int> obs) const;
  /// Row of the last m steps of a trajectory (actions a_{H-m+1}..a_{H-1}).
  [[nodiscard]] std::uint64_t tail_row(std::span<const Step> traj) const;
  [[nodiscard]] std::vector<int> decode_actions(std::uint64_t action_code) const;
  [[nodiscard]] std::vector<int> decode_obs(std::uint64_t obs_code) const;
};

/// [M_h]_{(a,o),s} = P(o_{h..h+m-1} = o | s_h = s, a_{h..h+m-2} = a).
struct EmissionActionMatrix {
  int step = 0;
  WindowIndex index;
  Matrix values;  // (A^{m-1} O^m) x S

  /// The O^m x S block for one action window (each column is a distribution).
  [[nodiscard]] Matrix block(std::uint64_t action_code) const;
};

/// Operator parameterization of trajectory probabilities. Single-step models
/// have m = 1 and dim = O; m-step models have dim = A^{m-1} O^m. There are
/// H - m operator steps, each holding one dim x dim matrix per (o, a).
struct ObservableOperatorModel {
  int S = 0;
  int A = 0;
  int O = 0;
  int H = 0;
  int m = 1;
  /// Revealing margin of the source model: min_h sigma_S(M_h).
  double margin = 0.0;
  Vector b0;
  std::vector<std::vector<Matrix>> ops;  // [h][o * A + a]

  [[nodiscard]] int dim() const { return static_cast<int>(b0.size()); }
  [[nodiscard]] WindowIndex window() const { return {A, O, m}; }
  [[nodiscard]] const Matrix& op(int step, int obs, int action) const {
    return ops[static_cast<std::size_t>(step)][static_cast<std::size_t>(obs * A + action)];
  }
};

/// Exact m-step emission-action matrix at zero-based step h. Requires h + m <= H.
EmissionActionMatrix build_m_step_matrix(const TabularPomdp& model, int step, int m);

/// B_h(o,a) = O_{h+1} T_{h,a} diag(O_h(o|.)) O_h^+, b0 = O_1 mu1.
/// Throws AssumptionViolated when S > O or some sigma_S(O_h) <= svd_tol.
ObservableOperatorModel single_step_operators(const TabularPomdp& model, double svd_tol = kSvdTol);

/// B_h(o,a) = M_{h+1} T_{h,a} diag(O_h(o|.)) M_h^+, b0 = M_1 mu1.
/// Throws AssumptionViolated when some sigma_S(M_h) <= svd_tol.
ObservableOperatorModel multi_step_operators(const TabularPomdp& model, int m,
                                             double svd_tol = kSvdTol);

/// pi(tau) * e_u^T B_{H-m} ... B_1 b0 for the final window u. Returned raw,
/// including round-off negatives.
double trajectory_probability_oom(const ObservableOperatorModel& oom, const HistoryPolicy& policy,
                                  std::span<const Step> traj);

/// b(tau_h) = B_h ... B_1 b0 for a prefix of length <= H - m.
Vector belief_vector(const ObservableOperatorModel& oom, std::span<const Step> prefix);

/// min_h sigma_S(O_h). Throws AssumptionViolated when S > O.
double weakly_revealing_margin(const TabularPomdp& model);

/// min over zero-based h in [0, H-m] of sigma_S(M_h).
double multistep_revealing_margin(const TabularPomdp& model, int m);

/// Two state mixtures with disjoint supports and identical observation laws.
struct ConfusablePair {
  Vector nu1;
  Vector nu2;
};

/// Returns a confusable pair built from a null vector z of `emis` (positive and
/// negative parts, each l1-normalized) when sigma_S(emis) <= svd_tol; empty otherwise.
std::optional<ConfusablePair> find_confusable_mixtures(const Matrix& emis,
                                                       double svd_tol = kSvdTol);

struct ProductErrorBound {
  double lhs = 0.0;
  double rhs = 0.0;
  double prefactor = 0.0;
};

/// Evaluates both sides of the operator-product triangle inequality at depth h:
///   lhs = sum_{tau_h} ||B^est_{h:1} b^est_0 - B_{h:1} b0||_1 pi(tau_h)
///   rhs = A^{m-1} sqrt(S)/alpha * (sum_{j<=h} sum_{tau_j}
///         ||(B^est_j - B_j) b(tau_{j-1})||_1 pi(tau_j) + ||b^est_0 - b0||_1)
/// with alpha = min of both models' margins.
ProductErrorBound product_error_decomposition(const ObservableOperatorModel& truth,
                                              const ObservableOperatorModel& estimate,
                                              const HistoryPolicy& policy, int h,
                                              std::uint64_t cap = default_enumeration_cap());

/// Debug dump; not a stable format.
nlohmann::json oom_to_json(const ObservableOperatorModel& oom);

}  // namespace omle
