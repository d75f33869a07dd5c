#pragma once

// Sweep probabilities E(schedule, p, F): the chance that one contender wins
// every election. Given a turnout, the win of each election is an
// independent event (tie coins are tossed separately per election), so the
// conditional sweep probability is the product of per-election win
// probabilities.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sweeplab/model.hpp"
#include "sweeplab/rational.hpp"
#include "sweeplab/turnout.hpp"
#include "sweeplab/win_rules.hpp"

namespace sweeplab {

enum class Method { exact, monte_carlo };

std::string method_name(Method m);

struct Estimate {
  std::optional<Rational> exact;  // set by the exact method
  double value = 0;
  double half_width = 0;  // 95% confidence half-width, Monte Carlo only
};

struct SweepReport {
  Method method = Method::exact;
  std::vector<std::string> contenders;
  std::vector<Estimate> per_party;
  Estimate any_party;  // sum over contenders; the sweep events are disjoint
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
};

/// Conditional sweep probability of every contender given the turnout.
std::vector<Rational> sweep_probs_given_turnout(const CompiledScenario& compiled,
                                                const Turnout& t);

Rational sweep_prob_given_turnout(const Scenario& s, const Turnout& t, PartyId contender);

/// Exact rational sweep probabilities by enumerating the turnout measure.
/// Throws EnumerationCapExceeded when the support is too large.
SweepReport exact_sweep_report(const Scenario& s, const Schedule& sch,
                               std::uint64_t cap = kDefaultEnumerationCap);

Rational exact_sweep_probability(const Scenario& s, const Schedule& sch, PartyId contender,
                                 std::uint64_t cap = kDefaultEnumerationCap);

struct McOptions {
  std::uint64_t samples = 100000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

/// Mean of the conditional sweep probability over sampled turnouts. Sample i
/// uses the stream derive_stream_seed(seed, i); partial sums are formed over
/// fixed sample blocks and reduced in block order, so the result is
/// bit-identical for any worker count.
///
/// The 95% interval is the normal approximation with the sample variance,
/// except that a Wilson score interval is used when fewer than ten samples'
/// worth of mass sits on either side (estimate * N < 10 or
/// (1 - estimate) * N < 10).
SweepReport mc_sweep_report(const Scenario& s, const Schedule& sch, const McOptions& options);

/// Floating-point conditional sweep values of sample `index`, as used by the
/// Monte Carlo estimator: one entry per contender.
std::vector<double> mc_sample_values(const Scenario& s, const Schedule& sch,
                                     std::uint64_t seed, std::uint64_t index);

struct EvaluationOptions {
  Method method = Method::exact;
  std::uint64_t cap = kDefaultEnumerationCap;
  McOptions mc;
};

SweepReport sweep_report(const Scenario& s, const Schedule& sch, const EvaluationOptions& options);

enum class Coarseness { equal, first_coarser, second_coarser, incomparable };

std::string coarseness_name(Coarseness c);

struct ScheduleComparison {
  SweepReport first;
  SweepReport second;
  Coarseness relation = Coarseness::incomparable;
  std::vector<Estimate> deltas;  // second minus first, per contender
  // Contenders whose sweep probability fell toward the coarser schedule.
  // Exact method: any strict decrease. Monte Carlo: only when the two
  // confidence intervals do not overlap.
  std::vector<PartyId> violations;
};

Coarseness schedule_relation(const Schedule& a, const Schedule& b);

/// Both reports use the same method; Monte Carlo reuses one seed, so the two
/// estimates are driven by common random numbers.
ScheduleComparison compare_schedules(const Scenario& s, const Schedule& first,
                                     const Schedule& second, const EvaluationOptions& options);

struct WeightedScenario {
  Rational weight;
  Scenario scenario;
};

/// Expected sweep probability over an ex-ante draw of voter types. Weights
/// must be nonnegative and sum to exactly one; every scenario must have the
/// same voters, elections and contenders.
Estimate mixture_sweep_probability(std::span<const WeightedScenario> mixture,
                                   const Schedule& sch, PartyId contender,
                                   const EvaluationOptions& options);

}  // namespace sweeplab
