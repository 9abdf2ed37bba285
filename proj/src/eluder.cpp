#include "omle/eluder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace omle {

namespace {

constexpr double kDead = std::numeric_limits<double>::infinity();

double contribution(double v, EluderNorm norm) { return norm == EluderNorm::kL1 ? std::abs(v) : v * v; }

double prefix_norm(double acc, EluderNorm norm) { return norm == EluderNorm::kL1 ? acc : std::sqrt(acc); }

// Memoized longest-extension search. The state is the vector of per-function
// prefix accumulators; functions whose prefix norm exceeds eps can never
// witness again and are collapsed to +inf so equivalent states share an entry.
class EluderSearch {
 public:
  EluderSearch(const FiniteFunctionClass& F, double eps, EluderNorm norm, std::uint64_t cap)
      : F_(F), eps_(eps), norm_(norm), cap_(cap) {}

  int run(std::vector<int>& witness) {
    std::vector<double> acc(F_.functions.size(), 0.0);
    const int len = longest(acc, 0);
    witness.clear();
    while (true) {
      auto it = memo_.find(acc);
      if (it == memo_.end() || it->second.second < 0) break;
      const int z = it->second.second;
      witness.push_back(z);
      acc = extend(acc, z);
    }
    return len;
  }

  [[nodiscard]] std::uint64_t nodes() const { return nodes_; }
  [[nodiscard]] int best_depth() const { return best_depth_; }

 private:
  std::vector<double> extend(const std::vector<double>& acc, int z) const {
    std::vector<double> next(acc.size());
    for (std::size_t f = 0; f < acc.size(); ++f) {
      if (acc[f] == kDead) {
        next[f] = kDead;
        continue;
      }
      const double a = acc[f] + contribution(F_.functions[f][static_cast<std::size_t>(z)], norm_);
      next[f] = prefix_norm(a, norm_) <= eps_ ? a : kDead;
    }
    return next;
  }

  bool independent(const std::vector<double>& acc, int z) const {
    for (std::size_t f = 0; f < acc.size(); ++f) {
      if (acc[f] != kDead && std::abs(F_.functions[f][static_cast<std::size_t>(z)]) > eps_) return true;
    }
    return false;
  }

  int longest(const std::vector<double>& acc, int depth) {
    if (auto it = memo_.find(acc); it != memo_.end()) return it->second.first;
    if (++nodes_ > cap_) {
      std::ostringstream msg;
      msg << "eluder search exceeded " << cap_ << " nodes; longest sequence found has length "
          << best_depth_;
      throw EluderSearchTooLarge(msg.str(), best_depth_);
    }
    best_depth_ = std::max(best_depth_, depth);
    int best = 0;
    int choice = -1;
    for (int z = 0; z < F_.domain_size; ++z) {
      if (!independent(acc, z)) continue;
      const int len = 1 + longest(extend(acc, z), depth + 1);
      if (len > best) {
        best = len;
        choice = z;
      }
    }
    memo_.emplace(acc, std::make_pair(best, choice));
    return best;
  }

  const FiniteFunctionClass& F_;
  double eps_;
  EluderNorm norm_;
  std::uint64_t cap_;
  std::uint64_t nodes_ = 0;
  int best_depth_ = 0;
  std::map<std::vector<double>, std::pair<int, int>> memo_;
};

EluderResult search_dimension(const FiniteFunctionClass& F, double eps,
                              std::span<const double> eps_grid, std::uint64_t cap,
                              EluderNorm norm) {
  if (!(eps > 0.0)) throw ValidationError("eps must be positive");
  F.validate();
  std::vector<double> grid;
  for (double e : eps_grid) {
    if (e >= eps) grid.push_back(e);
  }
  if (grid.empty()) grid.push_back(eps);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  EluderResult result;
  result.eps_used = grid.front();
  std::uint64_t budget = cap;
  int best_so_far = 0;
  for (double e : grid) {
    EluderSearch search(F, e, norm, budget);
    std::vector<int> witness;
    int len = 0;
    try {
      len = search.run(witness);
    } catch (const EluderSearchTooLarge& ex) {
      throw EluderSearchTooLarge(ex.what(), std::max(best_so_far, ex.lower_bound));
    }
    result.nodes += search.nodes();
    budget -= std::min(budget, search.nodes());
    if (len > result.dimension) {
      result.dimension = len;
      result.eps_used = e;
      result.witness = std::move(witness);
      best_so_far = len;
    }
  }
  return result;
}

}  // namespace

FiniteFunctionClass FiniteFunctionClass::from_table(int domain_size,
                                                    std::vector<std::vector<double>> functions) {
  FiniteFunctionClass F;
  F.domain_size = domain_size;
  F.functions = std::move(functions);
  for (const auto& row : F.functions) {
    for (double v : row) F.bound = std::max(F.bound, std::abs(v));
  }
  F.validate();
  return F;
}

void FiniteFunctionClass::validate() const {
  if (domain_size < 0) throw ValidationError("domain size must be non-negative");
  for (std::size_t f = 0; f < functions.size(); ++f) {
    if (functions[f].size() != static_cast<std::size_t>(domain_size)) {
      std::ostringstream msg;
      msg << "function " << f << " has " << functions[f].size() << " values, expected " << domain_size;
      throw ValidationError(msg.str());
    }
    for (double v : functions[f]) {
      if (!std::isfinite(v) || std::abs(v) > bound) {
        std::ostringstream msg;
        msg << "function " << f << " takes value " << v << " outside the bound C = " << bound;
        throw ValidationError(msg.str());
      }
    }
  }
}

bool is_eps_independent(const FiniteFunctionClass& F, int z, std::span<const int> prefix, double eps,
                        EluderNorm norm) {
  for (const auto& f : F.functions) {
    if (!(std::abs(f[static_cast<std::size_t>(z)]) > eps)) continue;
    double acc = 0.0;
    for (int x : prefix) acc += contribution(f[static_cast<std::size_t>(x)], norm);
    if (prefix_norm(acc, norm) <= eps) return true;
  }
  return false;
}

bool is_eluder_sequence(const FiniteFunctionClass& F, std::span<const int> seq, double eps,
                        EluderNorm norm) {
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (!is_eps_independent(F, seq[i], seq.first(i), eps, norm)) return false;
  }
  return true;
}

std::vector<double> default_eps_grid(const FiniteFunctionClass& F, double eps, EluderNorm norm) {
  std::vector<double> grid{eps};
  for (const auto& f : F.functions) {
    for (std::size_t x = 0; x < f.size(); ++x) {
      grid.push_back(std::abs(f[x]));
      for (std::size_t y = x; y < f.size(); ++y) {
        const double acc = contribution(f[x], norm) + contribution(f[y], norm);
        grid.push_back(prefix_norm(acc, norm));
      }
    }
  }
  std::erase_if(grid, [eps](double e) { return e < eps; });
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

EluderResult eluder_dimension(const FiniteFunctionClass& F, double eps,
                              std::span<const double> eps_grid, std::uint64_t cap) {
  return search_dimension(F, eps, eps_grid, cap, EluderNorm::kL1);
}

EluderResult l2_eluder_dimension(const FiniteFunctionClass& F, double eps,
                                 std::span<const double> eps_grid, std::uint64_t cap) {
  return search_dimension(F, eps, eps_grid, cap, EluderNorm::kL2);
}

double pigeonhole_bound(int d, double C, double beta, double omega, int k) {
  if (!(omega > 0.0) || omega > C) {
    std::ostringstream msg;
    msg << "cutoff omega = " << omega << " must lie in (0, C = " << C << "]";
    throw ValidationError(msg.str());
  }
  if (d < 0 || k < 0) throw ValidationError("dimension and length must be non-negative");
  return (d + 1) * C + d * beta * std::log(C / omega) + k * omega;
}

PigeonholeCheck verify_pigeonhole(const FiniteFunctionClass& F, std::span<const int> phi_seq,
                                  std::span<const int> x_seq, double beta, double omega,
                                  std::uint64_t cap) {
  if (phi_seq.size() != x_seq.size()) throw ValidationError("function and point sequences differ in length");
  PigeonholeCheck check;
  check.precondition_ok = true;
  for (std::size_t k = 0; k < phi_seq.size(); ++k) {
    const auto& phi = F.functions[static_cast<std::size_t>(phi_seq[k])];
    double prefix = 0.0;
    for (std::size_t t = 0; t < k; ++t) prefix += std::abs(phi[static_cast<std::size_t>(x_seq[t])]);
    check.lhs += std::abs(phi[static_cast<std::size_t>(x_seq[k])]);
    if (check.precondition_ok && prefix > beta) {
      check.precondition_ok = false;
      check.first_violation = static_cast<int>(k);
    }
  }
  if (!check.precondition_ok) return check;
  const std::vector<double> grid = default_eps_grid(F, omega);
  check.dimension = eluder_dimension(F, omega, grid, cap).dimension;
  const double C = std::max(F.bound, omega);
  check.rhs = pigeonhole_bound(check.dimension, C, beta, omega, static_cast<int>(phi_seq.size()));
  check.holds = check.lhs <= check.rhs;
  return check;
}

}  // namespace omle
