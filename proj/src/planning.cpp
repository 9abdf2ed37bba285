#include <sstream>

#include "omle/errors.hpp"
#include "omle/pomdp.hpp"

namespace omle {

namespace {

// Action values closer than this are ties, resolved toward the lowest index.
constexpr double kTieTol = 1e-12;

struct BackwardInduction {
  const TabularPomdp& model;
  std::vector<std::vector<double>>& tables;

  void choose(int h, std::uint64_t idx, int action) {
    auto& t = tables[static_cast<std::size_t>(h)];
    const auto base = idx * static_cast<std::uint64_t>(model.A);
    for (int a = 0; a < model.A; ++a) t[base + static_cast<std::uint64_t>(a)] = 0.0;
    t[base + static_cast<std::uint64_t>(action)] = 1.0;
  }

  // alpha(s) = P(history so far, s_h = s) under the greedy actions already
  // chosen; returns the expected reward collected from step h onward.
  double run(int h, HistoryCursor cursor, const Vector& alpha) {
    double total = 0.0;
    const auto& em = model.emis[static_cast<std::size_t>(h)];
    const Vector& r = model.rewards[static_cast<std::size_t>(h)];
    for (int o = 0; o < model.O; ++o) {
      const Vector ao = alpha.cwiseProduct(em.row(o).transpose());
      const double mass = ao.sum();
      total += mass * r(o);
      if (h + 1 == model.H || mass == 0.0) continue;
      const std::uint64_t idx = cursor.index(o, model.O);
      double best = -1.0;
      int best_action = 0;
      for (int a = 0; a < model.A; ++a) {
        const double q = run(h + 1, cursor.advance(o, a, model.O, model.A),
                             model.trans[static_cast<std::size_t>(h)][static_cast<std::size_t>(a)] * ao);
        if (q > best + kTieTol) {
          best = q;
          best_action = a;
        }
      }
      choose(h, idx, best_action);
      total += best;
    }
    return total;
  }
};

}  // namespace

PlanResult optimal_policy(const TabularPomdp& model, std::uint64_t cap) {
  const std::uint64_t n = trajectory_count(model.O, model.A, model.H);
  if (n > cap) {
    std::ostringstream msg;
    msg << "planning enumeration too large: (O*A)^H = " << n << " exceeds cap " << cap;
    throw EnumerationTooLarge(msg.str());
  }
  std::vector<std::vector<double>> tables(static_cast<std::size_t>(model.H));
  for (int h = 0; h < model.H; ++h) {
    const std::uint64_t rows = history_count(model.O, model.A, h);
    auto& t = tables[static_cast<std::size_t>(h)];
    t.assign(rows * static_cast<std::uint64_t>(model.A), 0.0);
    for (std::uint64_t i = 0; i < rows; ++i) t[i * static_cast<std::uint64_t>(model.A)] = 1.0;
  }
  BackwardInduction solver{model, tables};
  const double value = solver.run(0, HistoryCursor{}, model.mu1);
  return {HistoryPolicy(model.O, model.A, model.H, std::move(tables)), value};
}

}  // namespace omle
