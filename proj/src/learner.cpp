#include "omle/learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "omle/errors.hpp"
#include "omle/oom.hpp"

namespace omle {

namespace {

constexpr double kTieTol = 1e-12;
constexpr double kMatchTol = 1e-12;

double dimension_term(int S, int A, int O, int H) {
  return static_cast<double>(H) * (static_cast<double>(S) * S * A + static_cast<double>(S) * O);
}

bool same_shape(const TabularPomdp& a, const TabularPomdp& b) {
  return a.S == b.S && a.A == b.A && a.O == b.O && a.H == b.H;
}

}  // namespace

double beta_default(int S, int A, int O, int H, int K, double delta, double c, int m) {
  const double sa_oh = static_cast<double>(S) * A * O * H;
  if (m <= 1) {
    return c * (dimension_term(S, A, O, H) * std::log(sa_oh * K) + std::log(K / delta));
  }
  const double window_actions = std::pow(static_cast<double>(A), m);
  return c * (dimension_term(S, A, O, H) * std::log(sa_oh) +
              std::log(static_cast<double>(K) * H * window_actions / delta));
}

double log_likelihood(const TabularPomdp& candidate, const HistoryPolicy& policy,
                      std::span<const Step> traj) {
  const double p = trajectory_probability_forward(candidate, policy, traj);
  return std::log(std::max(p, kLikelihoodFloor));
}

CandidateSet::CandidateSet(std::vector<TabularPomdp> models, double alpha, int m,
                           std::uint64_t cap)
    : models_(std::move(models)), alpha_(alpha), m_(m), cap_(cap) {
  if (models_.empty()) throw ConfigError("candidate set is empty");
  if (m_ < 1) throw ConfigError("window length m must be at least 1");
  const TabularPomdp& first = models_.front();
  if (m_ > first.H) throw ConfigError("window length m exceeds the horizon");
  margins_.reserve(models_.size());
  plans_.reserve(models_.size());
  values_.reserve(models_.size());
  for (std::size_t i = 0; i < models_.size(); ++i) {
    const TabularPomdp& model = models_[i];
    try {
      validate(model);
    } catch (const ValidationError& e) {
      throw ValidationError("candidate " + std::to_string(i) + ": " + e.what());
    }
    if (!same_shape(model, first)) {
      throw ConfigError("candidate " + std::to_string(i) + " has dimensions different from candidate 0");
    }
    margins_.push_back(multistep_revealing_margin(model, m_));
    PlanResult plan = optimal_policy(model, cap_);
    plans_.push_back(std::make_shared<const HistoryPolicy>(std::move(plan.policy)));
    values_.push_back(plan.value);
  }
}

std::optional<int> CandidateSet::find(const TabularPomdp& model) const {
  for (std::size_t i = 0; i < models_.size(); ++i) {
    if (max_parameter_difference(models_[i], model) <= kMatchTol) return static_cast<int>(i);
  }
  return std::nullopt;
}

void LikelihoodLedger::append(DataRecord record, const CandidateSet& candidates) {
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    totals_[i] += log_likelihood(candidates.model(i), *record.policy, record.traj);
  }
  data_.push_back(std::move(record));
}

std::vector<double> LikelihoodLedger::recompute(const CandidateSet& candidates) const {
  std::vector<double> out(candidates.size(), 0.0);
  for (const DataRecord& rec : data_) {
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      out[i] += log_likelihood(candidates.model(i), *rec.policy, rec.traj);
    }
  }
  return out;
}

bool ConfidenceSet::contains(int i) const {
  return std::binary_search(members.begin(), members.end(), i);
}

ConfidenceSet confidence_set_update(const CandidateSet& candidates, const LikelihoodLedger& ledger,
                                    double beta, int episode) {
  const auto& totals = ledger.totals();
  if (totals.size() != candidates.size()) {
    throw ConfigError("likelihood ledger does not match the candidate set");
  }
  ConfidenceSet conf;
  conf.episode = episode;
  conf.beta = beta;
  conf.max_log_likelihood = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < totals.size(); ++i) {
    if (candidates.revealing(i)) conf.max_log_likelihood = std::max(conf.max_log_likelihood, totals[i]);
  }
  const double threshold = conf.max_log_likelihood - beta;
  for (std::size_t i = 0; i < totals.size(); ++i) {
    if (candidates.revealing(i) && totals[i] >= threshold) conf.members.push_back(static_cast<int>(i));
  }
  if (conf.members.empty()) {
    std::ostringstream msg;
    msg << "confidence set is empty: no candidate has revealing margin >= " << candidates.alpha();
    throw ConfigError(msg.str());
  }
  return conf;
}

OptimisticChoice optimistic_plan(const CandidateSet& candidates, const ConfidenceSet& conf) {
  if (conf.members.empty()) throw ConfigError("optimistic planning needs a non-empty confidence set");
  OptimisticChoice best;
  for (int i : conf.members) {
    const double v = candidates.optimal_value(static_cast<std::size_t>(i));
    if (best.candidate < 0 || v > best.value + kTieTol) {
      best.candidate = i;
      best.value = v;
    }
  }
  best.policy = candidates.plan(static_cast<std::size_t>(best.candidate));
  return best;
}

double RegretTrace::containment_frequency() const {
  if (episodes.empty()) return 0.0;
  const auto hits = std::count_if(episodes.begin(), episodes.end(),
                                  [](const EpisodeRecord& e) { return e.contains_truth; });
  return static_cast<double>(hits) / static_cast<double>(episodes.size());
}

bool RegretTrace::always_contained() const {
  return std::all_of(episodes.begin(), episodes.end(),
                     [](const EpisodeRecord& e) { return e.contains_truth; });
}

double RegretTrace::mixture_value() const {
  if (episodes.empty()) return 0.0;
  double sum = 0.0;
  for (const EpisodeRecord& e : episodes) sum += e.true_value;
  return sum / static_cast<double>(episodes.size());
}

namespace {

// Shared driver for both learners. The data-collection step differs: the
// single-step learner plays pi^k once, the multi-step learner plays every
// window splice of pi^k.
template <typename Collect>
RegretTrace run_learner(const TabularPomdp& env, const CandidateSet& candidates, int K, double beta,
                        int m, Collect&& collect) {
  validate(env);
  if (K < 1) throw ConfigError("number of episodes K must be at least 1");
  if (!same_shape(env, candidates.model(0))) {
    throw ConfigError("environment dimensions differ from the candidate set");
  }
  RegretTrace trace;
  trace.beta = beta;
  trace.m = m;
  trace.truth_index = candidates.find(env);
  const double env_margin = multistep_revealing_margin(env, m);
  if (env_margin < candidates.alpha() - kMarginTol) {
    std::ostringstream msg;
    msg << "environment revealing margin " << env_margin << " is below alpha = " << candidates.alpha();
    trace.warnings.push_back(msg.str());
  }
  if (!trace.truth_index) {
    trace.warnings.push_back("environment is not one of the candidates; containment is reported as false");
  }
  trace.optimal_value = optimal_policy(env, candidates.cap()).value;

  // V^{pi_i}(theta*) for each candidate's plan, filled on first use.
  std::vector<std::optional<double>> true_values(candidates.size());
  LikelihoodLedger ledger(candidates.size());
  ConfidenceSet conf = confidence_set_update(candidates, ledger, beta, 1);
  double cum = 0.0;
  for (int k = 1; k <= K; ++k) {
    const OptimisticChoice choice = optimistic_plan(candidates, conf);
    auto& tv = true_values[static_cast<std::size_t>(choice.candidate)];
    if (!tv) tv = policy_value(env, *choice.policy);
    EpisodeRecord rec;
    rec.k = k;
    rec.candidate = choice.candidate;
    rec.opt_value = choice.value;
    rec.true_value = *tv;
    rec.regret = std::clamp(trace.optimal_value - *tv, 0.0, static_cast<double>(env.H));
    cum += rec.regret;
    rec.cum_regret = cum;
    rec.conf_size = static_cast<int>(conf.members.size());
    rec.contains_truth = trace.truth_index && conf.contains(*trace.truth_index);
    rec.members = conf.members;

    collect(choice.policy, k, ledger);
    rec.dataset_size = ledger.dataset().size();
    trace.episodes.push_back(std::move(rec));
    conf = confidence_set_update(candidates, ledger, beta, k + 1);
  }
  trace.dataset = ledger.dataset();
  return trace;
}

}  // namespace

RegretTrace omle_run(const TabularPomdp& env, const CandidateSet& candidates, int K, double beta,
                     Rng& rng) {
  return run_learner(env, candidates, K, beta, candidates.window(),
                     [&](const std::shared_ptr<const HistoryPolicy>& policy, int k,
                         LikelihoodLedger& ledger) {
                       ledger.append({policy, sample_trajectory(env, *policy, rng), k}, candidates);
                     });
}

RegretTrace multistep_omle_run(const TabularPomdp& env, const CandidateSet& candidates, int K,
                               double beta, int m, Rng& rng) {
  if (m < 2) throw ConfigError("multi-step OMLE needs m >= 2; use omle_run for m = 1");
  if (m > env.H) throw ConfigError("window length m exceeds the horizon");
  if (candidates.window() != m) {
    throw ConfigError("candidate set margins were computed for m = " +
                      std::to_string(candidates.window()) + ", not " + std::to_string(m));
  }
  const int A = env.A;
  std::uint64_t window_count = 1;
  for (int i = 0; i < m - 1; ++i) window_count *= static_cast<std::uint64_t>(A);
  return run_learner(
      env, candidates, K, beta, m,
      [&](const std::shared_ptr<const HistoryPolicy>& policy, int k, LikelihoodLedger& ledger) {
        std::vector<int> actions(static_cast<std::size_t>(m - 1));
        for (int h = 0; h + m <= env.H; ++h) {
          for (std::uint64_t code = 0; code < window_count; ++code) {
            // First action of the window is the most significant digit.
            std::uint64_t rest = code;
            for (int i = m - 2; i >= 0; --i) {
              actions[static_cast<std::size_t>(i)] = static_cast<int>(rest % static_cast<std::uint64_t>(A));
              rest /= static_cast<std::uint64_t>(A);
            }
            auto spliced = std::make_shared<const HistoryPolicy>(policy_splice(*policy, h, actions));
            Trajectory traj = sample_trajectory(env, *spliced, rng);
            ledger.append({std::move(spliced), std::move(traj), k}, candidates);
          }
        }
      });
}

TabularPomdp optimistic_discretize(const TabularPomdp& model, double eps) {
  if (!(eps > 0.0)) throw ValidationError("grid step must be positive");
  auto up = [eps](double theta) {
    const double q = theta / eps;
    const double r = std::round(q);
    // Values already on the grid (up to rounding of the division) stay put.
    if (std::abs(q - r) <= 1e-9 * std::max(1.0, std::abs(q))) return std::max(r * eps, theta);
    return std::ceil(q) * eps;
  };
  TabularPomdp out = model;
  out.mu1 = model.mu1.unaryExpr(up);
  for (auto& step : out.trans) {
    for (Matrix& t : step) t = t.unaryExpr(up);
  }
  for (Matrix& e : out.emis) e = e.unaryExpr(up);
  return out;
}

std::vector<double> flatten_parameters(const TabularPomdp& model) {
  std::vector<double> out(model.mu1.data(), model.mu1.data() + model.mu1.size());
  for (const auto& step : model.trans) {
    for (const Matrix& t : step) out.insert(out.end(), t.data(), t.data() + t.size());
  }
  for (const Matrix& e : model.emis) out.insert(out.end(), e.data(), e.data() + e.size());
  return out;
}

double tv_distance(const TabularPomdp& a, const TabularPomdp& b, const HistoryPolicy& policy,
                   std::uint64_t cap) {
  const TrajectoryDistribution pa = trajectory_distribution(a, policy, cap);
  const TrajectoryDistribution pb = trajectory_distribution(b, policy, cap);
  double sum = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) sum += std::abs(pa[i] - pb[i]);
  return sum;
}

std::vector<MleValidityEntry> mle_validity_check(const RegretTrace& trace,
                                                 const CandidateSet& candidates,
                                                 const TabularPomdp& env, double delta) {
  const double dim = dimension_term(env.S, env.A, env.O, env.H);
  const double saoh = static_cast<double>(env.S) * env.A * env.O * env.H;
  std::map<std::pair<const HistoryPolicy*, int>, double> tv_cache;
  std::vector<MleValidityEntry> out;
  for (const EpisodeRecord& ep : trace.episodes) {
    for (int i : ep.members) {
      MleValidityEntry entry;
      entry.k = ep.k;
      entry.candidate = i;
      const TabularPomdp& theta = candidates.model(static_cast<std::size_t>(i));
      for (const DataRecord& rec : trace.dataset) {
        if (rec.episode >= ep.k) continue;
        ++entry.records;
        auto key = std::make_pair(rec.policy.get(), i);
        auto it = tv_cache.find(key);
        if (it == tv_cache.end()) {
          it = tv_cache.emplace(key, tv_distance(theta, env, *rec.policy, candidates.cap())).first;
        }
        entry.tv_sq_sum += it->second * it->second;
        entry.ll_deficit += log_likelihood(env, *rec.policy, rec.traj) -
                            log_likelihood(theta, *rec.policy, rec.traj);
      }
      if (entry.records > 0) {
        const double T = static_cast<double>(entry.records);
        entry.complexity = dim * std::log(T * saoh) + std::log(T / delta);
      }
      const double right = entry.ll_deficit + entry.complexity;
      if (entry.tv_sq_sum > 0.0) {
        entry.ratio = right > 0.0 ? entry.tv_sq_sum / right : std::numeric_limits<double>::infinity();
      }
      out.push_back(entry);
    }
  }
  return out;
}

}  // namespace omle
