#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "omle/errors.hpp"

namespace omle {

/// Explicit value table: functions[f][x] = f(x) on the domain {0, ..., domain_size - 1}.
struct FiniteFunctionClass {
  int domain_size = 0;
  std::vector<std::vector<double>> functions;
  double bound = 0.0;  // C >= max |f(x)|

  /// Builds the class and sets `bound` to max |f(x)|.
  static FiniteFunctionClass from_table(int domain_size, std::vector<std::vector<double>> functions);
  /// Throws ValidationError on ragged rows or values above `bound`.
  void validate() const;
  [[nodiscard]] int size() const { return static_cast<int>(functions.size()); }
};

enum class EluderNorm { kL1, kL2 };

/// True iff some f has prefix norm <= eps and |f(z)| > eps (strict).
bool is_eps_independent(const FiniteFunctionClass& F, int z, std::span<const int> prefix, double eps,
                        EluderNorm norm = EluderNorm::kL1);

/// True iff every element is eps-independent of its strict prefix.
bool is_eluder_sequence(const FiniteFunctionClass& F, std::span<const int> seq, double eps,
                        EluderNorm norm = EluderNorm::kL1);

struct EluderResult {
  int dimension = 0;
  double eps_used = 0.0;        // grid value attaining the maximum
  std::vector<int> witness;     // an eluder sequence of that length at eps_used
  std::uint64_t nodes = 0;      // search nodes expanded
};

/// Raised when the search exceeds its node cap; carries the best length found so far.
class EluderSearchTooLarge : public EnumerationTooLarge {
 public:
  EluderSearchTooLarge(const std::string& what, int lower_bound)
      : EnumerationTooLarge(what), lower_bound(lower_bound) {}
  int lower_bound;
};

inline constexpr std::uint64_t kDefaultEluderCap = 10'000'000;

/// Breakpoints of the independence predicate that are >= eps: eps itself,
/// every |f(x)|, and the norms of every pair {x, x'} (repeats allowed) under f.
std::vector<double> default_eps_grid(const FiniteFunctionClass& F, double eps,
                                     EluderNorm norm = EluderNorm::kL1);

/// Longest eps'-eluder sequence over eps' in `eps_grid` (values below eps are
/// ignored; an empty grid means {eps}). Exhaustive depth-first search; each
/// function can witness at most once, so lengths never exceed |F|.
EluderResult eluder_dimension(const FiniteFunctionClass& F, double eps,
                              std::span<const double> eps_grid = {},
                              std::uint64_t cap = kDefaultEluderCap);

/// Same search under the prefix l2 norm.
EluderResult l2_eluder_dimension(const FiniteFunctionClass& F, double eps,
                                 std::span<const double> eps_grid = {},
                                 std::uint64_t cap = kDefaultEluderCap);

/// (d + 1) C + d beta ln(C / omega) + k omega. Throws ValidationError unless 0 < omega <= C.
double pigeonhole_bound(int d, double C, double beta, double omega, int k);

struct PigeonholeCheck {
  bool precondition_ok = false;
  int first_violation = -1;  // zero-based k whose prefix sum exceeds beta
  double lhs = 0.0;
  double rhs = 0.0;
  int dimension = 0;
  bool holds = false;        // precondition_ok && lhs <= rhs
};

/// Checks sum_{t<k} |phi_k(x_t)| <= beta for every k and, when it holds,
/// compares sum_t |phi_t(x_t)| with pigeonhole_bound. The dimension is the
/// l1 eluder dimension at omega over default_eps_grid(F, omega); C is the
/// class bound, raised to omega for classes bounded below omega.
PigeonholeCheck verify_pigeonhole(const FiniteFunctionClass& F, std::span<const int> phi_seq,
                                  std::span<const int> x_seq, double beta, double omega,
                                  std::uint64_t cap = kDefaultEluderCap);

}  // namespace omle
