#include "omle/pomdp.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "omle/errors.hpp"

namespace omle {

namespace {

constexpr double kStochasticTol = 1e-12;
constexpr double kSamplingFloor = 1e-300;

void check_distribution(const Eigen::Ref<const Vector>& v, const std::string& what) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!(v(i) >= 0.0)) {
      std::ostringstream msg;
      msg << what << ": entry " << i << " is negative (" << v(i) << ")";
      throw ValidationError(msg.str());
    }
  }
  const double total = v.sum();
  if (std::abs(total - 1.0) > kStochasticTol) {
    std::ostringstream msg;
    msg << what << " sums to " << total << " (deviation " << std::abs(total - 1.0) << ")";
    throw ValidationError(msg.str());
  }
}

void check_kernel(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const std::string& name) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream msg;
    msg << name << " has shape " << m.rows() << "x" << m.cols() << ", expected " << rows << "x"
        << cols;
    throw ValidationError(msg.str());
  }
  for (Eigen::Index s = 0; s < cols; ++s) {
    check_distribution(m.col(s), name + " column " + std::to_string(s + 1));
  }
}

// Draws an index from nonnegative weights; weights below the floor never fire.
template <class Weights>
int sample_index(const Weights& w, Eigen::Index n, Rng& rng) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (w(i) >= kSamplingFloor) total += w(i);
  }
  std::uniform_real_distribution<double> unif(0.0, total);
  const double u = unif(rng);
  double acc = 0.0;
  int last = -1;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (w(i) < kSamplingFloor) continue;
    acc += w(i);
    last = static_cast<int>(i);
    if (u < acc) return last;
  }
  return last;
}

void require_cap(const TabularPomdp& model, std::uint64_t cap) {
  const std::uint64_t n = trajectory_count(model.O, model.A, model.H);
  if (n > cap) {
    std::ostringstream msg;
    msg << "enumeration too large: (O*A)^H = " << n << " exceeds cap " << cap;
    throw EnumerationTooLarge(msg.str());
  }
}

}  // namespace

TabularPomdp TabularPomdp::zeros(int S, int A, int O, int H) {
  TabularPomdp m;
  m.S = S;
  m.A = A;
  m.O = O;
  m.H = H;
  m.mu1 = Vector::Zero(S);
  m.trans.assign(static_cast<std::size_t>(std::max(H - 1, 0)),
                 std::vector<Matrix>(static_cast<std::size_t>(A), Matrix::Zero(S, S)));
  m.emis.assign(static_cast<std::size_t>(H), Matrix::Zero(O, S));
  m.rewards.assign(static_cast<std::size_t>(H), Vector::Zero(O));
  return m;
}

void validate(const TabularPomdp& model) {
  if (model.S < 1 || model.A < 1 || model.O < 1 || model.H < 1) {
    throw ValidationError("S, A, O, H must all be positive");
  }
  if (model.mu1.size() != model.S) throw ValidationError("mu1 has wrong length");
  check_distribution(model.mu1, "mu1");
  if (model.trans.size() != static_cast<std::size_t>(model.H - 1)) {
    throw ValidationError("trans must hold H-1 steps");
  }
  for (int h = 0; h + 1 < model.H; ++h) {
    const auto& per_action = model.trans[static_cast<std::size_t>(h)];
    if (per_action.size() != static_cast<std::size_t>(model.A)) {
      throw ValidationError("trans step " + std::to_string(h + 1) + " must hold A matrices");
    }
    for (int a = 0; a < model.A; ++a) {
      check_kernel(per_action[static_cast<std::size_t>(a)], model.S, model.S,
                   "T_{" + std::to_string(h + 1) + "," + std::to_string(a + 1) + "}");
    }
  }
  if (model.emis.size() != static_cast<std::size_t>(model.H)) {
    throw ValidationError("emis must hold H steps");
  }
  for (int h = 0; h < model.H; ++h) {
    check_kernel(model.emis[static_cast<std::size_t>(h)], model.O, model.S,
                 "O_" + std::to_string(h + 1));
  }
  if (model.rewards.size() != static_cast<std::size_t>(model.H)) {
    throw ValidationError("rewards must hold H steps");
  }
  for (int h = 0; h < model.H; ++h) {
    const Vector& r = model.rewards[static_cast<std::size_t>(h)];
    if (r.size() != model.O) throw ValidationError("r_" + std::to_string(h + 1) + " has wrong length");
    for (int o = 0; o < model.O; ++o) {
      if (!(r(o) >= 0.0 && r(o) <= 1.0)) {
        std::ostringstream msg;
        msg << "r_" << h + 1 << "(" << o + 1 << ") = " << r(o) << " is outside [0, 1]";
        throw ValidationError(msg.str());
      }
    }
  }
}

void check_compatible(const TabularPomdp& model, const HistoryPolicy& policy) {
  if (policy.num_obs() != model.O || policy.num_actions() != model.A ||
      policy.horizon() != model.H) {
    std::ostringstream msg;
    msg << "policy dimensions (O=" << policy.num_obs() << ", A=" << policy.num_actions()
        << ", H=" << policy.horizon() << ") do not match model (O=" << model.O << ", A=" << model.A
        << ", H=" << model.H << ")";
    throw ValidationError(msg.str());
  }
}

double max_parameter_difference(const TabularPomdp& a, const TabularPomdp& b) {
  if (a.S != b.S || a.A != b.A || a.O != b.O || a.H != b.H) {
    return std::numeric_limits<double>::infinity();
  }
  double d = (a.mu1 - b.mu1).cwiseAbs().maxCoeff();
  for (std::size_t h = 0; h < a.trans.size(); ++h) {
    for (std::size_t k = 0; k < a.trans[h].size(); ++k) {
      d = std::max(d, (a.trans[h][k] - b.trans[h][k]).cwiseAbs().maxCoeff());
    }
  }
  for (std::size_t h = 0; h < a.emis.size(); ++h) {
    d = std::max(d, (a.emis[h] - b.emis[h]).cwiseAbs().maxCoeff());
    d = std::max(d, (a.rewards[h] - b.rewards[h]).cwiseAbs().maxCoeff());
  }
  return d;
}

Trajectory sample_trajectory(const TabularPomdp& model, const HistoryPolicy& policy, Rng& rng) {
  Trajectory traj;
  traj.reserve(static_cast<std::size_t>(model.H));
  int s = sample_index(model.mu1, model.S, rng);
  HistoryCursor cursor;
  for (int h = 0; h < model.H; ++h) {
    const int o = sample_index(model.emis[static_cast<std::size_t>(h)].col(s), model.O, rng);
    const auto dist = policy.distribution(h, cursor.index(o, model.O));
    const int a = sample_index(Eigen::Map<const Vector>(dist.data(), model.A), model.A, rng);
    traj.push_back({o, a});
    cursor = cursor.advance(o, a, model.O, model.A);
    if (h + 1 < model.H) {
      s = sample_index(model.trans[static_cast<std::size_t>(h)][static_cast<std::size_t>(a)].col(s),
                       model.S, rng);
    }
  }
  return traj;
}

double trajectory_probability_forward(const TabularPomdp& model, const HistoryPolicy& policy,
                                      std::span<const Step> traj) {
  if (traj.size() > static_cast<std::size_t>(model.H)) {
    throw ValidationError("trajectory longer than the horizon");
  }
  Vector alpha = model.mu1;
  double pi = 1.0;
  HistoryCursor cursor;
  for (std::size_t h = 0; h < traj.size(); ++h) {
    const Step& st = traj[h];
    if (st.obs < 0 || st.obs >= model.O || st.action < 0 || st.action >= model.A) {
      throw ValidationError("trajectory symbol out of range");
    }
    alpha = alpha.cwiseProduct(model.emis[h].row(st.obs).transpose());
    pi *= policy.prob(static_cast<int>(h), cursor.index(st.obs, model.O), st.action);
    cursor = cursor.advance(st.obs, st.action, model.O, model.A);
    if (h + 1 < traj.size()) alpha = model.trans[h][static_cast<std::size_t>(st.action)] * alpha;
  }
  return alpha.sum() * pi;
}

TrajectoryDistribution::TrajectoryDistribution(int num_obs, int num_actions, int horizon,
                                               std::vector<double> probs)
    : num_obs_(num_obs), num_actions_(num_actions), horizon_(horizon), probs_(std::move(probs)) {}

Trajectory TrajectoryDistribution::decode(std::uint64_t code) const {
  Trajectory traj(static_cast<std::size_t>(horizon_));
  const auto na = static_cast<std::uint64_t>(num_actions_);
  const auto no = static_cast<std::uint64_t>(num_obs_);
  for (int h = horizon_ - 1; h >= 0; --h) {
    traj[static_cast<std::size_t>(h)].action = static_cast<int>(code % na);
    code /= na;
    traj[static_cast<std::size_t>(h)].obs = static_cast<int>(code % no);
    code /= no;
  }
  return traj;
}

std::uint64_t TrajectoryDistribution::encode(std::span<const Step> traj) const {
  HistoryCursor c;
  for (const Step& st : traj) c = c.advance(st.obs, st.action, num_obs_, num_actions_);
  return c.code;
}

double TrajectoryDistribution::total() const {
  double t = 0.0;
  for (double p : probs_) t += p;
  return t;
}

namespace {

// Visits every reachable (history, action) node; alpha is the joint weight of
// the history and the current hidden state, including the policy factor.
struct Enumerator {
  const TabularPomdp& model;
  const HistoryPolicy& policy;
  std::vector<double>& out;

  void run(int h, HistoryCursor cursor, const Vector& alpha) {
    const auto& em = model.emis[static_cast<std::size_t>(h)];
    for (int o = 0; o < model.O; ++o) {
      const Vector ao = alpha.cwiseProduct(em.row(o).transpose());
      const std::uint64_t idx = cursor.index(o, model.O);
      for (int a = 0; a < model.A; ++a) {
        const double p = policy.prob(h, idx, a);
        const HistoryCursor next = cursor.advance(o, a, model.O, model.A);
        if (h + 1 == model.H) {
          out[next.code] = ao.sum() * p;
          continue;
        }
        if (p == 0.0 || ao.isZero(0.0)) continue;
        run(h + 1, next,
            model.trans[static_cast<std::size_t>(h)][static_cast<std::size_t>(a)] * (ao * p));
      }
    }
  }
};

struct ValueAccumulator {
  const TabularPomdp& model;
  const HistoryPolicy& policy;

  double run(int h, HistoryCursor cursor, const Vector& alpha) const {
    double total = 0.0;
    const auto& em = model.emis[static_cast<std::size_t>(h)];
    const Vector& r = model.rewards[static_cast<std::size_t>(h)];
    for (int o = 0; o < model.O; ++o) {
      const Vector ao = alpha.cwiseProduct(em.row(o).transpose());
      const double mass = ao.sum();
      if (mass == 0.0) continue;
      total += mass * r(o);
      if (h + 1 == model.H) continue;
      const std::uint64_t idx = cursor.index(o, model.O);
      for (int a = 0; a < model.A; ++a) {
        const double p = policy.prob(h, idx, a);
        if (p == 0.0) continue;
        total += run(h + 1, cursor.advance(o, a, model.O, model.A),
                     model.trans[static_cast<std::size_t>(h)][static_cast<std::size_t>(a)] *
                         (ao * p));
      }
    }
    return total;
  }
};

}  // namespace

TrajectoryDistribution trajectory_distribution(const TabularPomdp& model,
                                               const HistoryPolicy& policy, std::uint64_t cap) {
  check_compatible(model, policy);
  require_cap(model, cap);
  std::vector<double> probs(trajectory_count(model.O, model.A, model.H), 0.0);
  Enumerator{model, policy, probs}.run(0, HistoryCursor{}, model.mu1);
  return TrajectoryDistribution(model.O, model.A, model.H, std::move(probs));
}

double policy_value(const TabularPomdp& model, const HistoryPolicy& policy, ValueMethod method,
                    std::uint64_t cap) {
  check_compatible(model, policy);
  if (method == ValueMethod::kForwardMarginals) {
    return ValueAccumulator{model, policy}.run(0, HistoryCursor{}, model.mu1);
  }
  const TrajectoryDistribution dist = trajectory_distribution(model, policy, cap);
  double value = 0.0;
  for (std::uint64_t code = 0; code < dist.size(); ++code) {
    const double p = dist[code];
    if (p == 0.0) continue;
    const Trajectory traj = dist.decode(code);
    double ret = 0.0;
    for (int h = 0; h < model.H; ++h) {
      ret += model.rewards[static_cast<std::size_t>(h)](traj[static_cast<std::size_t>(h)].obs);
    }
    value += p * ret;
  }
  return value;
}

}  // namespace omle
