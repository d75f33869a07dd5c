#pragma once

// Exact checks of the correlation inequalities behind sweep monotonicity:
// the n-function inequality for aligned nonnegative tuples, the Harris
// covariance inequality, and the single-vs-double coin identity used in the
// elementary-merge step.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sweeplab/model.hpp"
#include "sweeplab/rational.hpp"
#include "sweeplab/rng.hpp"
#include "sweeplab/turnout.hpp"

namespace sweeplab {

inline constexpr std::size_t kMaxLatticeVoters = 12;

/// A function on the subsets of H = {0..m-1}, stored as a table indexed by
/// the subset's bitmask.
class LatticeFunction {
 public:
  LatticeFunction() = default;
  LatticeFunction(std::size_t voters, std::vector<Rational> table);
  static LatticeFunction constant(std::size_t voters, const Rational& value);
  /// 1 on subsets containing voter h, 0 elsewhere.
  static LatticeFunction indicator(std::size_t voters, VoterId h);

  std::size_t voters() const { return voters_; }
  const Rational& operator()(std::uint32_t subset) const { return table_[subset]; }
  const std::vector<Rational>& table() const { return table_; }

  LatticeFunction plus(const Rational& c) const;
  LatticeFunction times(const LatticeFunction& other) const;

  /// f(S + h) - f(S) >= 0 for every S (<= 0 for decreasing).
  bool increasing_at(VoterId h) const;
  bool decreasing_at(VoterId h) const;
  /// First S (without h) where the direction fails.
  std::optional<std::uint32_t> direction_witness(VoterId h, bool increasing) const;

 private:
  std::size_t voters_ = 0;
  std::vector<Rational> table_;
};

enum class Direction { increasing, decreasing };

struct AlignedTuple {
  std::vector<LatticeFunction> functions;  // f_1..f_n, each on subsets of H
  std::vector<Direction> directions;       // one per voter
};

/// Thrown when a tuple or schedule fails a precondition. `what()` names the
/// witness.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Checks nonnegativity and the declared direction of every function at
/// every voter; returns the first violation.
std::optional<std::string> aligned_tuple_violation(const AlignedTuple& tuple);

/// E(Pi, p, F) = sum over turnouts T of f_1(H_1)...f_n(H_n) mu(T), where
/// `schedule` partitions the function index set {0..n-1} per voter.
Rational expectation(std::span<const LatticeFunction> functions, const Schedule& schedule,
                     std::span<const Rational> p,
                     std::uint64_t cap = kDefaultEnumerationCap);

/// E(f, mu_p) under the product Bernoulli measure on subsets of H.
Rational expectation(const LatticeFunction& f, std::span<const Rational> p);

struct AlignedMargin {
  Rational margin;  // E(coarse) - E(fine)
  bool holds = false;
};

/// Throws PreconditionError when `coarse` is not coarser than `fine` or the
/// tuple is not aligned and nonnegative.
AlignedMargin verify_aligned_inequality(const AlignedTuple& tuple, const Schedule& fine,
                                const Schedule& coarse, std::span<const Rational> p);

/// E(f1 f2) - E(f1) E(f2); throws PreconditionError unless both functions
/// are increasing at every voter.
Rational harris_covariance(const LatticeFunction& f1, const LatticeFunction& f2,
                           std::span<const Rational> p);

struct IdentityCheck {
  Rational single_toss;  // A
  Rational double_toss;  // B
  Rational closed_form;  // p(1-p)(a1-b1)(a2-b2)c
  bool holds = false;
};

IdentityCheck proof_identity(const Rational& a1, const Rational& a2, const Rational& b1,
                             const Rational& b2, const Rational& c, const Rational& p);

bool proof_identity_check(const Rational& a1, const Rational& a2, const Rational& b1,
                          const Rational& b2, const Rational& c, const Rational& p);

/// Nonnegative functions with the requested direction at each voter. Each
/// table is built up the subset lattice: after flipping the decreasing
/// coordinates, f(S) is the largest value among its immediate subsets plus a
/// random nonnegative increment.
AlignedTuple random_aligned_tuple(std::size_t voters, std::size_t functions,
                                  std::span<const Direction> directions, SplitMix64& rng);

/// Random rational in [0,1] with denominator at most max_den (0 and 1
/// included).
Rational random_probability(SplitMix64& rng, std::uint64_t max_den = 7);

struct TrialSummary {
  std::string suite;
  std::uint64_t trials = 0;
  std::uint64_t checks = 0;  // individual inequalities evaluated
  std::uint64_t failures = 0;
  std::optional<Rational> min_margin;
  std::uint64_t seed = 0;
  std::string first_failure;
};

/// Random aligned tuples (m <= 3 voters, n <= 3 functions), checked on every
/// comparable pair of uniform partitions plus staggered pairs.
TrialSummary run_aligned_trials(std::uint64_t trials, std::uint64_t seed);

/// Random increasing pairs on |H| <= 4; also checks constant-shift invariance
/// and agreement with the two-function merge margin.
TrialSummary run_harris_trials(std::uint64_t trials, std::uint64_t seed);

TrialSummary run_identity_trials(std::uint64_t trials, std::uint64_t seed);

}  // namespace sweeplab
