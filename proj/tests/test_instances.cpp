#include <gtest/gtest.h>

#include <cmath>

#include "omle/errors.hpp"
#include "omle/instances.hpp"
#include "omle/oom.hpp"
#include "oracles.hpp"

using namespace omle;

TEST(UnderLock, ShapesAndMargin) {
  for (double alpha : {0.1, 0.3, 0.5}) {
    const auto m = combinatorial_lock_under(4, 3, alpha, std::vector<int>{2, 0, 1});
    EXPECT_NO_THROW(validate(m));
    EXPECT_EQ(m.S, 8);
    EXPECT_EQ(m.O, 9);
    EXPECT_NEAR(weakly_revealing_margin(m), alpha, 1e-12);
  }
}

TEST(UnderLock, RejectsBadParameters) {
  EXPECT_THROW(combinatorial_lock_under(3, 2, 0.6, std::vector<int>{0, 0}), ValidationError);
  EXPECT_THROW(combinatorial_lock_under(3, 2, 0.0, std::vector<int>{0, 0}), ValidationError);
  EXPECT_THROW(combinatorial_lock_under(3, 2, 0.3, std::vector<int>{0}), ValidationError);
  EXPECT_THROW(combinatorial_lock_under(3, 2, 0.3, std::vector<int>{0, 2}), ValidationError);
}

TEST(UnderLock, OnlyThePlantedSequencePays) {
  const std::vector<int> planted{1, 0};
  const auto m = combinatorial_lock_under(3, 2, 0.3, planted);
  EXPECT_NEAR(optimal_policy(m).value, 1.0, 1e-12);
  for (int a0 = 0; a0 < 2; ++a0)
    for (int a1 = 0; a1 < 2; ++a1)
      for (int a2 = 0; a2 < 2; ++a2) {
        const std::vector<int> acts{a0, a1, a2};
        const double v = oracle::open_loop_value(m, acts);
        const bool good = a0 == planted[0] && a1 == planted[1];
        EXPECT_NEAR(v, good ? 1.0 : 0.0, 1e-12);
        EXPECT_NEAR(policy_value(m, HistoryPolicy::open_loop(m.O, m.A, acts)), v, 1e-12);
      }
}

TEST(UnderLock, RandomPlantIsReproducible) {
  Rng a(4), b(4);
  EXPECT_EQ(max_parameter_difference(combinatorial_lock_under(4, 3, 0.2, a), combinatorial_lock_under(4, 3, 0.2, b)),
            0.0);
}

TEST(OverLock, MarginShapesAndEntries) {
  for (int m = 1; m <= 4; ++m) {
    for (int A = 1; A <= 3; ++A) {
      Rng rng(static_cast<std::uint64_t>(m * 10 + A));
      const auto model = combinatorial_lock_over(m, A, rng);
      EXPECT_NO_THROW(validate(model));
      EXPECT_EQ(model.S, 2 * m);
      EXPECT_EQ(model.O, 3);
      if (m >= 2) EXPECT_LT(model.O, model.S);
      EXPECT_GE(multistep_revealing_margin(model, m), 1.0 - 1e-12);
      const auto M = build_m_step_matrix(model, 0, m);
      EXPECT_TRUE((M.values.array() == 0.0 || M.values.array() == 1.0).all());
    }
  }
}

TEST(OverLock, ExactMarginForTwoStepTwoActions) {
  const auto model = combinatorial_lock_over(2, 2, std::vector<int>{1});
  EXPECT_NEAR(multistep_revealing_margin(model, 2), 1.0, 1e-12);
}

TEST(OverLock, DeviatingOpenLoopPoliciesHaveValueZero) {
  for (int m = 2; m <= 4; ++m) {
    for (int A = 2; A <= 3; ++A) {
      Rng rng(static_cast<std::uint64_t>(m + 7 * A));
      const auto model = combinatorial_lock_over(m, A, rng);
      // Recover the planted sequence from the transitions.
      std::vector<int> planted;
      for (int i = 0; i + 1 < m; ++i) {
        for (int a = 0; a < A; ++a) {
          if (model.trans[0][a](2 * (i + 1), 2 * i) == 1.0) planted.push_back(a);
        }
      }
      ASSERT_EQ(static_cast<int>(planted.size()), m - 1);
      for (const auto& seq : all_action_sequences(A, m)) {
        const bool good = std::equal(planted.begin(), planted.end(), seq.begin());
        EXPECT_NEAR(oracle::open_loop_value(model, seq), good ? 1.0 : 0.0, 1e-12);
      }
    }
  }
}

TEST(LockFamily, LexicographicSiblings) {
  const LockSpec spec{LockVariant::kUndercomplete, 3, 3, 0.3, {}};
  const auto family = lock_family(spec);
  ASSERT_EQ(family.size(), 9u);
  const auto seqs = all_action_sequences(3, 2);
  EXPECT_EQ(seqs[5], (std::vector<int>{1, 2}));
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    EXPECT_EQ(lock_family_index(3, seqs[i]), static_cast<int>(i));
    EXPECT_EQ(max_parameter_difference(family[i], combinatorial_lock_under(3, 3, 0.3, seqs[i])), 0.0);
  }
  const LockSpec over{LockVariant::kOvercomplete, 2, 2, 0.5, {}};
  EXPECT_EQ(lock_family(over).size(), 2u);
}

TEST(RandomRevealing, MeetsMarginOrThrows) {
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    const auto g = random_weakly_revealing(2, 2, 3, 3, 0.1, 1000, rng);
    EXPECT_NO_THROW(validate(g.model));
    EXPECT_GE(g.margin, 0.1);
    EXPECT_NEAR(g.margin, weakly_revealing_margin(g.model), 1e-15);
  }
  EXPECT_EQ(random_weakly_revealing(2, 2, 3, 3, 0.0, 1, rng).tries, 1);
  EXPECT_THROW(random_weakly_revealing(3, 2, 3, 3, 0.99, 5, rng), AssumptionViolated);
  EXPECT_THROW(random_weakly_revealing(4, 2, 3, 3, 0.0, 5, rng), AssumptionViolated);
  const auto over = random_revealing(4, 2, 3, 3, 2, 0.01, 1000, rng);
  EXPECT_GE(multistep_revealing_margin(over.model, 2), 0.01);
}

TEST(BlockMdp, DecodableWithLargeMargin) {
  Rng rng(3);
  for (int k : {1, 2, 3}) {
    const auto m = block_mdp(3, 2, 3, rng, k);
    EXPECT_NO_THROW(validate(m));
    EXPECT_EQ(m.O, 3 * k);
    const double margin = weakly_revealing_margin(m);
    EXPECT_GE(margin, 1.0 / std::sqrt(static_cast<double>(m.O)) - 1e-12);
    if (k == 1) EXPECT_NEAR(margin, 1.0, 1e-12);
    for (const Matrix& E : m.emis) {
      for (int o = 0; o < m.O; ++o) {
        int support = 0;
        for (int s = 0; s < m.S; ++s) support += E(o, s) > 0.0 ? 1 : 0;
        EXPECT_EQ(support, 1);
        EXPECT_EQ(E(o, o / k), E.row(o).sum());
      }
    }
  }
}
