#include <gtest/gtest.h>

#include <cmath>

#include "omle/errors.hpp"
#include "omle/instances.hpp"
#include "omle/oom.hpp"
#include "oracles.hpp"

using namespace omle;

namespace {

TabularPomdp revealing(std::uint64_t seed, int S, int A, int O, int H, int m = 1, double alpha = 0.05) {
  Rng rng(seed);
  return random_revealing(S, A, O, H, m, alpha, 1000, rng).model;
}

// P(o_1..o_j, s_{j+1} = s | a_1..a_j) by explicit loops over states.
Vector joint_state_prefix(const TabularPomdp& m, const Trajectory& prefix) {
  Vector x = m.mu1;
  for (std::size_t h = 0; h < prefix.size(); ++h) {
    Vector y = Vector::Zero(m.S);
    for (int s = 0; s < m.S; ++s) {
      for (int s2 = 0; s2 < m.S; ++s2) {
        y(s2) += x(s) * m.emis[h](prefix[h].obs, s) * m.trans[h][prefix[h].action](s2, s);
      }
    }
    x = y;
  }
  return x;
}

// Moves every parameter a little and renormalizes.
TabularPomdp perturb(const TabularPomdp& m, double scale, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, scale);
  auto jitter = [&](Matrix& M) {
    for (Eigen::Index c = 0; c < M.cols(); ++c) {
      for (Eigen::Index r = 0; r < M.rows(); ++r) M(r, c) += u(rng);
      M.col(c) /= M.col(c).sum();
    }
  };
  TabularPomdp out = m;
  Matrix mu = out.mu1;
  jitter(mu);
  out.mu1 = mu.col(0);
  for (auto& step : out.trans)
    for (Matrix& T : step) jitter(T);
  for (Matrix& E : out.emis) jitter(E);
  return out;
}

}  // namespace

TEST(EmissionActionMatrix, EntriesMatchPathSums) {
  const auto model = revealing(1, 3, 2, 2, 4, 1, 0.0);
  for (int m = 1; m <= 3; ++m) {
    for (int h = 0; h + m <= model.H; ++h) {
      const auto M = build_m_step_matrix(model, h, m);
      ASSERT_EQ(M.values.rows(), static_cast<Eigen::Index>(M.index.size()));
      for (std::uint64_t ac = 0; ac < M.index.action_windows(); ++ac) {
        for (std::uint64_t oc = 0; oc < M.index.obs_windows(); ++oc) {
          const auto acts = M.index.decode_actions(ac);
          const auto obs = M.index.decode_obs(oc);
          EXPECT_EQ(M.index.row(acts, obs), ac * M.index.obs_windows() + oc);
          for (int s = 0; s < model.S; ++s) {
            EXPECT_NEAR(M.values(static_cast<Eigen::Index>(M.index.row(acts, obs)), s),
                        oracle::m_step_entry(model, h, acts, obs, s), 1e-14);
          }
        }
        // Each action block is column-stochastic.
        const Matrix block = M.block(ac);
        for (int s = 0; s < model.S; ++s) EXPECT_NEAR(block.col(s).sum(), 1.0, 1e-12);
      }
    }
  }
  EXPECT_EQ(build_m_step_matrix(model, 1, 1).values, model.emis[1]);
  EXPECT_THROW(build_m_step_matrix(model, 2, 3), ValidationError);
}

TEST(SingleStepOperators, ReproduceTrajectoryProbabilities) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto model = revealing(seed, 2 + static_cast<int>(seed % 2), 2, 3, 3);
    const auto oom = single_step_operators(model);
    EXPECT_EQ(oom.dim(), 3);
    EXPECT_EQ(oom.ops.size(), 2u);
    Rng rng(seed);
    const auto pi = HistoryPolicy::random(model.O, model.A, model.H, rng);
    oracle::for_each_trajectory(model.O, model.A, model.H, [&](const Trajectory& t) {
      EXPECT_NEAR(trajectory_probability_oom(oom, pi, t), oracle::brute_force_probability(model, pi, t), 1e-12);
    });
  }
}

TEST(MultiStepOperators, ReproduceTrajectoryProbabilities) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto model = revealing(seed, 4, 2, 3, 3, 2);
    const auto oom = multi_step_operators(model, 2);
    EXPECT_EQ(oom.dim(), 18);
    const auto pi = HistoryPolicy::uniform(model.O, model.A, model.H);
    oracle::for_each_trajectory(model.O, model.A, model.H, [&](const Trajectory& t) {
      EXPECT_NEAR(trajectory_probability_oom(oom, pi, t), oracle::brute_force_probability(model, pi, t), 1e-12);
    });
  }
}

TEST(MultiStepOperators, WindowOneMatchesSingleStep) {
  const auto model = revealing(3, 3, 2, 3, 3);
  const auto a = single_step_operators(model);
  const auto b = multi_step_operators(model, 1);
  EXPECT_EQ(a.b0, b.b0);
  for (std::size_t h = 0; h < a.ops.size(); ++h)
    for (std::size_t i = 0; i < a.ops[h].size(); ++i) EXPECT_EQ(a.ops[h][i], b.ops[h][i]);
}

TEST(BeliefVector, EqualsEmissionMatrixTimesStateJoint) {
  const auto model = revealing(8, 3, 2, 3, 4);
  for (int m : {1, 2}) {
    const auto oom = multi_step_operators(model, m);
    const Trajectory prefix{{1, 0}, {2, 1}};
    for (std::size_t len = 0; len <= prefix.size(); ++len) {
      const Trajectory p(prefix.begin(), prefix.begin() + static_cast<long>(len));
      const Vector expected =
          build_m_step_matrix(model, static_cast<int>(len), m).values * joint_state_prefix(model, p);
      EXPECT_LT((belief_vector(oom, p) - expected).lpNorm<Eigen::Infinity>(), 1e-12);
    }
  }
}

TEST(Operators, RejectNonRevealingModels) {
  auto model = revealing(2, 2, 2, 3, 3);
  model.emis[1].col(1) = model.emis[1].col(0);
  try {
    single_step_operators(model);
    FAIL();
  } catch (const AssumptionViolated& e) {
    EXPECT_NE(std::string(e.what()).find("h = 2"), std::string::npos) << e.what();
  }
  Rng rng(1);
  EXPECT_THROW(single_step_operators(random_pomdp(4, 2, 3, 3, rng)), AssumptionViolated);
  EXPECT_THROW(weakly_revealing_margin(random_pomdp(4, 2, 3, 3, rng)), AssumptionViolated);
}

TEST(Operators, PrefixProbabilitiesNeedFullTrajectories) {
  const auto model = revealing(2, 2, 2, 3, 3);
  const auto oom = single_step_operators(model);
  const auto pi = HistoryPolicy::uniform(3, 2, 3);
  const Trajectory t{{0, 0}, {1, 1}};
  EXPECT_THROW(trajectory_probability_oom(oom, pi, t), ValidationError);
}

TEST(Margins, MultiStepDominatesEachActionBlock) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const auto model = random_pomdp(3, 2, 2, 3, rng);
    for (int h = 0; h + 2 <= model.H; ++h) {
      const auto M = build_m_step_matrix(model, h, 2);
      double best_block = 0.0;
      for (std::uint64_t ac = 0; ac < M.index.action_windows(); ++ac) {
        best_block = std::max(best_block, kth_singular_value(M.block(ac), model.S));
      }
      EXPECT_GE(kth_singular_value(M.values, model.S), best_block - 1e-10);
    }
  }
}

TEST(Margins, KnownEmissionMatrix) {
  const auto lock = combinatorial_lock_under(3, 2, 0.25, std::vector<int>{0, 1});
  EXPECT_NEAR(weakly_revealing_margin(lock), 0.25, 1e-12);
  EXPECT_NEAR(multistep_revealing_margin(lock, 1), 0.25, 1e-12);
}

TEST(ConfusableMixtures, AbsentForFullRank) {
  Matrix E(3, 2);
  E << 0.7, 0.1, 0.2, 0.3, 0.1, 0.6;
  EXPECT_FALSE(find_confusable_mixtures(E).has_value());
}

TEST(ConfusableMixtures, WitnessForRankDeficient) {
  // Third column is the average of the first two.
  Matrix E(3, 3);
  E << 0.6, 0.2, 0.4, 0.3, 0.1, 0.2, 0.1, 0.7, 0.4;
  const auto pair = find_confusable_mixtures(E);
  ASSERT_TRUE(pair.has_value());
  EXPECT_NEAR(pair->nu1.sum(), 1.0, 1e-12);
  EXPECT_NEAR(pair->nu2.sum(), 1.0, 1e-12);
  for (int s = 0; s < 3; ++s) {
    EXPECT_GE(pair->nu1(s), 0.0);
    EXPECT_GE(pair->nu2(s), 0.0);
    EXPECT_EQ(pair->nu1(s) * pair->nu2(s), 0.0);
  }
  EXPECT_LE((E * (pair->nu1 - pair->nu2)).lpNorm<1>(), 1e-9);
}

TEST(ProductError, ZeroForIdenticalModels) {
  const auto model = revealing(4, 2, 2, 3, 3);
  const auto oom = single_step_operators(model);
  const auto pi = HistoryPolicy::uniform(3, 2, 3);
  const auto b = product_error_decomposition(oom, oom, pi, 2);
  EXPECT_NEAR(b.lhs, 0.0, 1e-14);
  EXPECT_NEAR(b.rhs, 0.0, 1e-14);
  EXPECT_NEAR(b.prefactor, std::sqrt(2.0) / oom.margin, 1e-12);
}

TEST(ProductError, BoundHoldsForPerturbedEstimates) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto model = revealing(seed, 2, 2, 3, 3, 1, 0.1);
    Rng rng(seed);
    const auto est = perturb(model, 0.3, rng);
    const auto t = single_step_operators(model);
    const auto e = single_step_operators(est);
    const auto pi = HistoryPolicy::random(3, 2, 3, rng);
    for (int h = 0; h <= 2; ++h) {
      const auto b = product_error_decomposition(t, e, pi, h);
      EXPECT_LE(b.lhs, b.rhs + 1e-9) << "seed " << seed << " h " << h;
    }
  }
}

TEST(OperatorNorms, WithinRevealingBounds) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto model = revealing(seed, 3, 2, 3, 3);
    const auto oom = single_step_operators(model);
    for (const auto& step : oom.ops) {
      for (const Matrix& B : step) {
        EXPECT_LE(operator_norm_11(B), std::sqrt(3.0) / oom.margin + 1e-9);
        EXPECT_LE(operator_norm_2(B), 3.0 / oom.margin + 1e-9);
      }
    }
  }
}

TEST(OomJson, HasShapes) {
  const auto oom = single_step_operators(revealing(1, 2, 2, 3, 3));
  const auto j = oom_to_json(oom);
  EXPECT_EQ(j["dim"], 3);
  EXPECT_EQ(j["m"], 1);
  EXPECT_EQ(j["b0"].size(), 3u);
}
