#include "omle/oom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "omle/errors.hpp"

namespace omle {

namespace {

std::uint64_t ipow(std::uint64_t base, int exp) {
  std::uint64_t out = 1;
  for (int i = 0; i < exp; ++i) out *= base;
  return out;
}

std::vector<int> decode_digits(std::uint64_t code, int radix, int len) {
  std::vector<int> digits(static_cast<std::size_t>(len));
  for (int i = len - 1; i >= 0; --i) {
    digits[static_cast<std::size_t>(i)] = static_cast<int>(code % static_cast<std::uint64_t>(radix));
    code /= static_cast<std::uint64_t>(radix);
  }
  return digits;
}

std::uint64_t encode_digits(std::span<const int> digits, int radix) {
  std::uint64_t code = 0;
  for (int d : digits) code = code * static_cast<std::uint64_t>(radix) + static_cast<std::uint64_t>(d);
  return code;
}

void check_trajectory(const ObservableOperatorModel& oom, const HistoryPolicy& policy,
                      std::span<const Step> traj, std::size_t max_len) {
  if (policy.num_obs() != oom.O || policy.num_actions() != oom.A || policy.horizon() != oom.H) {
    throw ValidationError("policy alphabet does not match the operator model");
  }
  if (traj.size() > max_len) throw ValidationError("trajectory length does not fit the operator model");
  for (const Step& st : traj) {
    if (st.obs < 0 || st.obs >= oom.O || st.action < 0 || st.action >= oom.A) {
      throw ValidationError("trajectory symbol outside the operator model's alphabet");
    }
  }
}

ObservableOperatorModel build_operators(const TabularPomdp& model, int m, double svd_tol) {
  if (m < 1 || m > model.H) {
    throw ValidationError("window length m must lie in [1, H]");
  }
  const int last = model.H - m;  // M_0 .. M_last
  std::vector<EmissionActionMatrix> mats;
  mats.reserve(static_cast<std::size_t>(last + 1));
  double margin = std::numeric_limits<double>::infinity();
  for (int h = 0; h <= last; ++h) {
    mats.push_back(build_m_step_matrix(model, h, m));
    const double sigma = kth_singular_value(mats.back().values, model.S);
    margin = std::min(margin, sigma);
    if (sigma <= svd_tol) {
      std::ostringstream msg;
      msg << (m == 1 ? "weakly revealing condition violated: sigma_S(O_h)"
                     : "m-step weakly revealing condition violated: sigma_S(M_h)")
          << " = " << sigma << " at h = " << h + 1;
      throw AssumptionViolated(msg.str());
    }
  }
  ObservableOperatorModel oom;
  oom.S = model.S;
  oom.A = model.A;
  oom.O = model.O;
  oom.H = model.H;
  oom.m = m;
  oom.margin = margin;
  oom.b0 = mats[0].values * model.mu1;
  oom.ops.resize(static_cast<std::size_t>(last));
  for (int h = 0; h < last; ++h) {
    const Matrix pinv = pseudo_inverse(mats[static_cast<std::size_t>(h)].values, svd_tol);
    const Matrix& next = mats[static_cast<std::size_t>(h + 1)].values;
    const Matrix& em = model.emis[static_cast<std::size_t>(h)];
    auto& step_ops = oom.ops[static_cast<std::size_t>(h)];
    step_ops.resize(static_cast<std::size_t>(model.O * model.A));
    for (int o = 0; o < model.O; ++o) {
      const Matrix weighted = em.row(o).transpose().asDiagonal() * pinv;
      for (int a = 0; a < model.A; ++a) {
        step_ops[static_cast<std::size_t>(o * model.A + a)] =
            next * (model.trans[static_cast<std::size_t>(h)][static_cast<std::size_t>(a)] * weighted);
      }
    }
  }
  return oom;
}

}  // namespace

std::uint64_t WindowIndex::action_windows() const { return ipow(static_cast<std::uint64_t>(A), m - 1); }

std::uint64_t WindowIndex::obs_windows() const { return ipow(static_cast<std::uint64_t>(O), m); }

std::uint64_t WindowIndex::row(std::span<const int> actions, std::span<const int> obs) const {
  return encode_digits(actions, A) * obs_windows() + encode_digits(obs, O);
}

std::uint64_t WindowIndex::tail_row(std::span<const Step> traj) const {
  const std::size_t start = traj.size() - static_cast<std::size_t>(m);
  std::uint64_t ac = 0;
  std::uint64_t oc = 0;
  for (std::size_t i = start; i < traj.size(); ++i) {
    oc = oc * static_cast<std::uint64_t>(O) + static_cast<std::uint64_t>(traj[i].obs);
    if (i + 1 < traj.size()) ac = ac * static_cast<std::uint64_t>(A) + static_cast<std::uint64_t>(traj[i].action);
  }
  return ac * obs_windows() + oc;
}

std::vector<int> WindowIndex::decode_actions(std::uint64_t action_code) const {
  return decode_digits(action_code, A, m - 1);
}

std::vector<int> WindowIndex::decode_obs(std::uint64_t obs_code) const {
  return decode_digits(obs_code, O, m);
}

Matrix EmissionActionMatrix::block(std::uint64_t action_code) const {
  const auto n = static_cast<Eigen::Index>(index.obs_windows());
  return values.middleRows(static_cast<Eigen::Index>(action_code) * n, n);
}

EmissionActionMatrix build_m_step_matrix(const TabularPomdp& model, int step, int m) {
  if (m < 1 || step < 0 || step + m > model.H) {
    std::ostringstream msg;
    msg << "window of length " << m << " starting at step " << step + 1 << " overflows horizon "
        << model.H;
    throw ValidationError(msg.str());
  }
  EmissionActionMatrix out;
  out.step = step;
  out.index = {model.A, model.O, m};
  const std::uint64_t na = out.index.action_windows();
  const std::uint64_t no = out.index.obs_windows();
  out.values = Matrix::Zero(static_cast<Eigen::Index>(na * no), model.S);
  for (std::uint64_t ac = 0; ac < na; ++ac) {
    const std::vector<int> acts = out.index.decode_actions(ac);
    for (std::uint64_t oc = 0; oc < no; ++oc) {
      const std::vector<int> obs = out.index.decode_obs(oc);
      // r(s) = P(o_i..o_{m-1} | s_{step+i} = s, actions), built back to front.
      Eigen::RowVectorXd r = model.emis[static_cast<std::size_t>(step + m - 1)].row(obs.back());
      for (int i = m - 2; i >= 0; --i) {
        const auto h = static_cast<std::size_t>(step + i);
        r = (r * model.trans[h][static_cast<std::size_t>(acts[static_cast<std::size_t>(i)])])
                .cwiseProduct(model.emis[h].row(obs[static_cast<std::size_t>(i)]));
      }
      out.values.row(static_cast<Eigen::Index>(ac * no + oc)) = r;
    }
  }
  return out;
}

ObservableOperatorModel single_step_operators(const TabularPomdp& model, double svd_tol) {
  if (model.S > model.O) {
    std::ostringstream msg;
    msg << "single-step operators need S <= O (S = " << model.S << ", O = " << model.O
        << "); use m-step operators for overcomplete models";
    throw AssumptionViolated(msg.str());
  }
  return build_operators(model, 1, svd_tol);
}

ObservableOperatorModel multi_step_operators(const TabularPomdp& model, int m, double svd_tol) {
  return build_operators(model, m, svd_tol);
}

double trajectory_probability_oom(const ObservableOperatorModel& oom, const HistoryPolicy& policy,
                                  std::span<const Step> traj) {
  check_trajectory(oom, policy, traj, static_cast<std::size_t>(oom.H));
  if (traj.size() != static_cast<std::size_t>(oom.H)) {
    throw ValidationError("operator probabilities need a full-length trajectory");
  }
  Vector v = oom.b0;
  for (int h = 0; h + oom.m < oom.H; ++h) {
    const Step& st = traj[static_cast<std::size_t>(h)];
    v = oom.op(h, st.obs, st.action) * v;
  }
  return policy_probability(policy, traj) * v(static_cast<Eigen::Index>(oom.window().tail_row(traj)));
}

Vector belief_vector(const ObservableOperatorModel& oom, std::span<const Step> prefix) {
  if (prefix.size() > static_cast<std::size_t>(oom.H - oom.m)) {
    throw ValidationError("belief prefix longer than H - m");
  }
  Vector v = oom.b0;
  for (std::size_t h = 0; h < prefix.size(); ++h) {
    v = oom.op(static_cast<int>(h), prefix[h].obs, prefix[h].action) * v;
  }
  return v;
}

double weakly_revealing_margin(const TabularPomdp& model) {
  if (model.S > model.O) {
    std::ostringstream msg;
    msg << "model is overcomplete (S = " << model.S << " > O = " << model.O
        << "); the single-step margin is zero, check the m-step condition instead";
    throw AssumptionViolated(msg.str());
  }
  return multistep_revealing_margin(model, 1);
}

double multistep_revealing_margin(const TabularPomdp& model, int m) {
  if (m < 1 || m > model.H) throw ValidationError("window length m must lie in [1, H]");
  double margin = std::numeric_limits<double>::infinity();
  for (int h = 0; h + m <= model.H; ++h) {
    margin = std::min(margin, kth_singular_value(build_m_step_matrix(model, h, m).values, model.S));
  }
  return margin;
}

std::optional<ConfusablePair> find_confusable_mixtures(const Matrix& emis, double svd_tol) {
  const auto S = static_cast<int>(emis.cols());
  if (S == 0) return std::nullopt;
  Eigen::JacobiSVD<Matrix> svd(emis, Eigen::ComputeFullV);
  const Vector& sv = svd.singularValues();
  const double sigma_s = S <= sv.size() ? sv(S - 1) : 0.0;
  if (sigma_s > svd_tol) return std::nullopt;
  Vector z = svd.matrixV().col(S - 1);
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (std::abs(z(i)) > 1e-12) {
      if (z(i) < 0) z = -z;
      break;
    }
  }
  // Round-off entries would blur the supports; exact zeros also avoid -0.
  z = z.unaryExpr([](double v) { return std::abs(v) <= 1e-14 ? 0.0 : v; });
  const Vector pos = (z.cwiseMax(0.0).array() + 0.0).matrix();
  const Vector neg = ((-z).cwiseMax(0.0).array() + 0.0).matrix();
  const double pos_mass = pos.sum();
  const double neg_mass = neg.sum();
  if (pos_mass <= 0.0 || neg_mass <= 0.0) {
    throw AssumptionViolated("null vector has one-signed entries; matrix is not column-stochastic");
  }
  return ConfusablePair{pos / pos_mass, neg / neg_mass};
}

namespace {

struct ProductErrorWalk {
  const ObservableOperatorModel& truth;
  const ObservableOperatorModel& est;
  const HistoryPolicy& policy;
  int depth;
  double lhs = 0.0;
  double operator_terms = 0.0;

  void run(int j, HistoryCursor cursor, const Vector& v_true, const Vector& v_est, double pi) {
    if (j == depth) {
      lhs += (v_est - v_true).lpNorm<1>() * pi;
      return;
    }
    for (int o = 0; o < truth.O; ++o) {
      const std::uint64_t idx = cursor.index(o, truth.O);
      for (int a = 0; a < truth.A; ++a) {
        const double p = pi * policy.prob(j, idx, a);
        if (p == 0.0) continue;
        const Matrix& b_true = truth.op(j, o, a);
        const Matrix& b_est = est.op(j, o, a);
        operator_terms += ((b_est - b_true) * v_true).lpNorm<1>() * p;
        run(j + 1, cursor.advance(o, a, truth.O, truth.A), b_true * v_true, b_est * v_est, p);
      }
    }
  }
};

}  // namespace

ProductErrorBound product_error_decomposition(const ObservableOperatorModel& truth,
                                              const ObservableOperatorModel& estimate,
                                              const HistoryPolicy& policy, int h,
                                              std::uint64_t cap) {
  if (truth.S != estimate.S || truth.A != estimate.A || truth.O != estimate.O ||
      truth.H != estimate.H || truth.m != estimate.m) {
    throw ValidationError("operator models have different dimensions");
  }
  if (policy.num_obs() != truth.O || policy.num_actions() != truth.A || policy.horizon() != truth.H) {
    throw ValidationError("policy alphabet does not match the operator models");
  }
  if (h < 0 || h > truth.H - truth.m) throw ValidationError("depth h must lie in [0, H - m]");
  const std::uint64_t n = trajectory_count(truth.O, truth.A, h);
  if (n > cap) {
    throw EnumerationTooLarge("prefix enumeration (O*A)^h = " + std::to_string(n) + " exceeds cap");
  }
  const double alpha = std::min(truth.margin, estimate.margin);
  if (!(alpha > 0.0)) throw AssumptionViolated("revealing margin must be positive");
  ProductErrorWalk walk{truth, estimate, policy, h};
  walk.run(0, HistoryCursor{}, truth.b0, estimate.b0, 1.0);
  ProductErrorBound out;
  out.prefactor = static_cast<double>(truth.window().action_windows()) * std::sqrt(truth.S) / alpha;
  out.lhs = walk.lhs;
  out.rhs = out.prefactor * (walk.operator_terms + (estimate.b0 - truth.b0).lpNorm<1>());
  return out;
}

nlohmann::json oom_to_json(const ObservableOperatorModel& oom) {
  nlohmann::json j;
  j["dim"] = oom.dim();
  j["m"] = oom.m;
  j["margin"] = oom.margin;
  j["b0"] = std::vector<double>(oom.b0.data(), oom.b0.data() + oom.b0.size());
  nlohmann::json ops = nlohmann::json::array();
  for (const auto& step : oom.ops) {
    nlohmann::json per = nlohmann::json::array();
    for (const Matrix& b : step) {
      nlohmann::json rows = nlohmann::json::array();
      for (Eigen::Index r = 0; r < b.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < b.cols(); ++c) row.push_back(b(r, c));
        rows.push_back(std::move(row));
      }
      per.push_back(std::move(rows));
    }
    ops.push_back(std::move(per));
  }
  j["ops"] = std::move(ops);
  return j;
}

}  // namespace omle
