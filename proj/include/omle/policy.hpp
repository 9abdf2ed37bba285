#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace omle {

using Rng = std::mt19937_64;

/// One observation followed by the action taken after seeing it.
struct Step {
  int obs = 0;
  int action = 0;

  auto operator<=>(const Step&) const = default;
};

/// (o_1, a_1, ..., o_h, a_h). Full trajectories have exactly H steps; shorter
/// vectors are prefixes. Steps are zero-based throughout the library.
using Trajectory = std::vector<Step>;

/// Number of length-h histories (o_1, a_1, ..., o_h) for a zero-based step h,
/// i.e. (O*A)^h * O.
std::uint64_t history_count(int num_obs, int num_actions, int step);

/// (O*A)^h, saturating at UINT64_MAX.
std::uint64_t trajectory_count(int num_obs, int num_actions, int horizon);

/// Default cap on exhaustive trajectory/history enumeration. Reads
/// OMLE_ENUM_CAP from the environment, falling back to 10^6.
std::uint64_t default_enumeration_cap();

/// Mixed-radix code of a history prefix. The history index of
/// (o_1, a_1, ..., o_{h-1}, a_{h-1}, o_h) is `code * O + o_h`, and appending
/// a_h yields the next prefix code `index * A + a_h`.
struct HistoryCursor {
  std::uint64_t code = 0;

  [[nodiscard]] std::uint64_t index(int obs, int num_obs) const {
    return code * static_cast<std::uint64_t>(num_obs) + static_cast<std::uint64_t>(obs);
  }
  [[nodiscard]] HistoryCursor advance(int obs, int action, int num_obs, int num_actions) const {
    return {index(obs, num_obs) * static_cast<std::uint64_t>(num_actions) +
            static_cast<std::uint64_t>(action)};
  }
};

/// Tabular history-dependent stochastic policy. At step h the table holds one
/// action distribution for every history in (O x A)^h x O, stored row-major by
/// history index (see HistoryCursor).
class HistoryPolicy {
 public:
  HistoryPolicy() = default;

  /// Takes ownership of per-step tables; validates shapes and stochasticity.
  HistoryPolicy(int num_obs, int num_actions, int horizon,
                std::vector<std::vector<double>> tables);

  static HistoryPolicy uniform(int num_obs, int num_actions, int horizon);

  /// Plays `actions[h]` at step h regardless of history.
  static HistoryPolicy open_loop(int num_obs, int num_actions, std::span<const int> actions);

  /// Random policy: Dirichlet(1) rows, or one-hot rows when `deterministic`.
  static HistoryPolicy random(int num_obs, int num_actions, int horizon, Rng& rng,
                              bool deterministic = false);

  [[nodiscard]] int num_obs() const { return num_obs_; }
  [[nodiscard]] int num_actions() const { return num_actions_; }
  [[nodiscard]] int horizon() const { return horizon_; }

  [[nodiscard]] double prob(int step, std::uint64_t history, int action) const {
    return tables_[static_cast<std::size_t>(step)]
                  [history * static_cast<std::uint64_t>(num_actions_) +
                   static_cast<std::uint64_t>(action)];
  }

  [[nodiscard]] std::span<const double> distribution(int step, std::uint64_t history) const;

  [[nodiscard]] const std::vector<std::vector<double>>& tables() const { return tables_; }

  /// Throws ValidationError when a row is not a probability vector.
  void validate() const;

 private:
  int num_obs_ = 0;
  int num_actions_ = 0;
  int horizon_ = 0;
  std::vector<std::vector<double>> tables_;
};

/// prod_{h' <= h} pi(a_h' | o_1, a_1, ..., o_h') over the given prefix.
double policy_probability(const HistoryPolicy& policy, std::span<const Step> prefix);

/// Follows `base` for the first `step` steps, then plays `action_seq`
/// open-loop, then resumes `base` (whose later decisions still see the full
/// history). Requires step + action_seq.size() <= H.
HistoryPolicy policy_splice(const HistoryPolicy& base, int step, std::span<const int> action_seq);

}  // namespace omle
