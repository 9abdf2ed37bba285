#include "omle/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <string>

#include "omle/errors.hpp"

namespace omle {

namespace {

std::uint64_t saturating_pow(std::uint64_t base, int exp) {
  std::uint64_t out = 1;
  for (int i = 0; i < exp; ++i) {
    if (base != 0 && out > std::numeric_limits<std::uint64_t>::max() / base) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    out *= base;
  }
  return out;
}

}  // namespace

std::uint64_t history_count(int num_obs, int num_actions, int step) {
  const auto oa = static_cast<std::uint64_t>(num_obs) * static_cast<std::uint64_t>(num_actions);
  const std::uint64_t p = saturating_pow(oa, step);
  if (p > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(num_obs)) {
    return std::numeric_limits<std::uint64_t>::max();
  }
  return p * static_cast<std::uint64_t>(num_obs);
}

std::uint64_t trajectory_count(int num_obs, int num_actions, int horizon) {
  return saturating_pow(
      static_cast<std::uint64_t>(num_obs) * static_cast<std::uint64_t>(num_actions), horizon);
}

std::uint64_t default_enumeration_cap() {
  if (const char* env = std::getenv("OMLE_ENUM_CAP")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return v;
  }
  return 1'000'000;
}

HistoryPolicy::HistoryPolicy(int num_obs, int num_actions, int horizon,
                             std::vector<std::vector<double>> tables)
    : num_obs_(num_obs), num_actions_(num_actions), horizon_(horizon), tables_(std::move(tables)) {
  if (num_obs < 1 || num_actions < 1 || horizon < 1) {
    throw ValidationError("policy dimensions must be positive");
  }
  if (tables_.size() != static_cast<std::size_t>(horizon)) {
    throw ValidationError("policy needs one table per step");
  }
  for (int h = 0; h < horizon; ++h) {
    const std::uint64_t expected = history_count(num_obs, num_actions, h) *
                                   static_cast<std::uint64_t>(num_actions);
    if (tables_[static_cast<std::size_t>(h)].size() != expected) {
      std::ostringstream msg;
      msg << "policy table at step " << h << " has " << tables_[static_cast<std::size_t>(h)].size()
          << " entries, expected " << expected;
      throw ValidationError(msg.str());
    }
  }
  validate();
}

HistoryPolicy HistoryPolicy::uniform(int num_obs, int num_actions, int horizon) {
  std::vector<std::vector<double>> tables(static_cast<std::size_t>(horizon));
  for (int h = 0; h < horizon; ++h) {
    tables[static_cast<std::size_t>(h)].assign(
        history_count(num_obs, num_actions, h) * static_cast<std::uint64_t>(num_actions),
        1.0 / num_actions);
  }
  return HistoryPolicy(num_obs, num_actions, horizon, std::move(tables));
}

HistoryPolicy HistoryPolicy::open_loop(int num_obs, int num_actions,
                                       std::span<const int> actions) {
  const int horizon = static_cast<int>(actions.size());
  std::vector<std::vector<double>> tables(static_cast<std::size_t>(horizon));
  for (int h = 0; h < horizon; ++h) {
    const int a = actions[static_cast<std::size_t>(h)];
    if (a < 0 || a >= num_actions) throw ValidationError("open-loop action out of range");
    const std::uint64_t n = history_count(num_obs, num_actions, h);
    auto& t = tables[static_cast<std::size_t>(h)];
    t.assign(n * static_cast<std::uint64_t>(num_actions), 0.0);
    for (std::uint64_t i = 0; i < n; ++i) t[i * static_cast<std::uint64_t>(num_actions) + a] = 1.0;
  }
  return HistoryPolicy(num_obs, num_actions, horizon, std::move(tables));
}

HistoryPolicy HistoryPolicy::random(int num_obs, int num_actions, int horizon, Rng& rng,
                                    bool deterministic) {
  std::exponential_distribution<double> expo(1.0);
  std::uniform_int_distribution<int> pick(0, num_actions - 1);
  std::vector<std::vector<double>> tables(static_cast<std::size_t>(horizon));
  for (int h = 0; h < horizon; ++h) {
    const std::uint64_t n = history_count(num_obs, num_actions, h);
    auto& t = tables[static_cast<std::size_t>(h)];
    t.assign(n * static_cast<std::uint64_t>(num_actions), 0.0);
    for (std::uint64_t i = 0; i < n; ++i) {
      double* row = t.data() + i * static_cast<std::uint64_t>(num_actions);
      if (deterministic) {
        row[pick(rng)] = 1.0;
        continue;
      }
      double total = 0.0;
      for (int a = 0; a < num_actions; ++a) total += (row[a] = expo(rng));
      for (int a = 0; a < num_actions; ++a) row[a] /= total;
    }
  }
  return HistoryPolicy(num_obs, num_actions, horizon, std::move(tables));
}

std::span<const double> HistoryPolicy::distribution(int step, std::uint64_t history) const {
  const auto& t = tables_[static_cast<std::size_t>(step)];
  return {t.data() + history * static_cast<std::uint64_t>(num_actions_),
          static_cast<std::size_t>(num_actions_)};
}

void HistoryPolicy::validate() const {
  for (int h = 0; h < horizon_; ++h) {
    const auto& t = tables_[static_cast<std::size_t>(h)];
    const std::size_t rows = t.size() / static_cast<std::size_t>(num_actions_);
    for (std::size_t i = 0; i < rows; ++i) {
      double total = 0.0;
      for (int a = 0; a < num_actions_; ++a) {
        const double p = t[i * static_cast<std::size_t>(num_actions_) + static_cast<std::size_t>(a)];
        if (!(p >= 0.0)) {
          std::ostringstream msg;
          msg << "policy step " << h << " history " << i << ": negative entry " << p;
          throw ValidationError(msg.str());
        }
        total += p;
      }
      if (std::abs(total - 1.0) > 1e-12) {
        std::ostringstream msg;
        msg << "policy step " << h << " history " << i << ": row sums to " << total;
        throw ValidationError(msg.str());
      }
    }
  }
}

double policy_probability(const HistoryPolicy& policy, std::span<const Step> prefix) {
  if (prefix.size() > static_cast<std::size_t>(policy.horizon())) {
    throw ValidationError("prefix longer than the policy horizon");
  }
  double p = 1.0;
  HistoryCursor cursor;
  for (std::size_t h = 0; h < prefix.size(); ++h) {
    const Step& st = prefix[h];
    p *= policy.prob(static_cast<int>(h), cursor.index(st.obs, policy.num_obs()), st.action);
    cursor = cursor.advance(st.obs, st.action, policy.num_obs(), policy.num_actions());
  }
  return p;
}

HistoryPolicy policy_splice(const HistoryPolicy& base, int step, std::span<const int> action_seq) {
  const int len = static_cast<int>(action_seq.size());
  if (step < 0 || step + len > base.horizon()) {
    std::ostringstream msg;
    msg << "splice window [" << step << ", " << step + len << ") exceeds horizon "
        << base.horizon();
    throw ValidationError(msg.str());
  }
  auto tables = base.tables();
  const int na = base.num_actions();
  for (int i = 0; i < len; ++i) {
    const int a = action_seq[static_cast<std::size_t>(i)];
    if (a < 0 || a >= na) throw ValidationError("splice action out of range");
    auto& t = tables[static_cast<std::size_t>(step + i)];
    std::fill(t.begin(), t.end(), 0.0);
    for (std::size_t r = 0; r < t.size() / static_cast<std::size_t>(na); ++r) {
      t[r * static_cast<std::size_t>(na) + static_cast<std::size_t>(a)] = 1.0;
    }
  }
  return HistoryPolicy(base.num_obs(), na, base.horizon(), std::move(tables));
}

}  // namespace omle
