#include "sweeplab/inequality.hpp"

#include <algorithm>

#include "sweeplab/lattice.hpp"

namespace sweeplab {

LatticeFunction::LatticeFunction(std::size_t voters, std::vector<Rational> table)
    : voters_(voters), table_(std::move(table)) {
  if (voters > kMaxLatticeVoters) {
    throw std::invalid_argument("LatticeFunction: at most " + std::to_string(kMaxLatticeVoters) +
                                " voters");
  }
  if (table_.size() != (std::size_t{1} << voters)) {
    throw std::invalid_argument("LatticeFunction: table must have 2^m entries");
  }
}

LatticeFunction LatticeFunction::constant(std::size_t voters, const Rational& value) {
  return LatticeFunction(voters, std::vector<Rational>(std::size_t{1} << voters, value));
}

LatticeFunction LatticeFunction::indicator(std::size_t voters, VoterId h) {
  std::vector<Rational> t(std::size_t{1} << voters, Rational(0));
  for (std::size_t s = 0; s < t.size(); ++s) {
    if ((s >> h) & 1U) t[s] = 1;
  }
  return LatticeFunction(voters, std::move(t));
}

LatticeFunction LatticeFunction::plus(const Rational& c) const {
  std::vector<Rational> t = table_;
  for (Rational& x : t) x += c;
  return LatticeFunction(voters_, std::move(t));
}

LatticeFunction LatticeFunction::times(const LatticeFunction& other) const {
  if (other.voters_ != voters_) throw std::invalid_argument("LatticeFunction: size mismatch");
  std::vector<Rational> t = table_;
  for (std::size_t s = 0; s < t.size(); ++s) t[s] *= other.table_[s];
  return LatticeFunction(voters_, std::move(t));
}

std::optional<std::uint32_t> LatticeFunction::direction_witness(VoterId h,
                                                                bool increasing) const {
  const std::uint32_t bit = std::uint32_t{1} << h;
  for (std::uint32_t s = 0; s < table_.size(); ++s) {
    if (s & bit) continue;
    const Rational diff = table_[s | bit] - table_[s];
    if (increasing ? diff < 0 : diff > 0) return s;
  }
  return std::nullopt;
}

bool LatticeFunction::increasing_at(VoterId h) const { return !direction_witness(h, true); }
bool LatticeFunction::decreasing_at(VoterId h) const { return !direction_witness(h, false); }

namespace {

std::string subset_string(std::uint32_t s, std::size_t m) {
  std::string out = "{";
  bool first = true;
  for (std::size_t h = 0; h < m; ++h) {
    if ((s >> h) & 1U) {
      if (!first) out += ",";
      out += std::to_string(h);
      first = false;
    }
  }
  return out + "}";
}

}  // namespace

std::optional<std::string> aligned_tuple_violation(const AlignedTuple& tuple) {
  if (tuple.functions.empty()) return "tuple has no functions";
  const std::size_t m = tuple.functions.front().voters();
  if (tuple.directions.size() != m) {
    return "tuple declares " + std::to_string(tuple.directions.size()) + " directions for " +
           std::to_string(m) + " voters";
  }
  for (std::size_t l = 0; l < tuple.functions.size(); ++l) {
    const LatticeFunction& f = tuple.functions[l];
    if (f.voters() != m) return "function " + std::to_string(l) + " has a different voter set";
    for (std::uint32_t s = 0; s < f.table().size(); ++s) {
      if (f(s) < 0) {
        return "function " + std::to_string(l) + " is negative at " + subset_string(s, m);
      }
    }
    for (std::size_t h = 0; h < m; ++h) {
      const bool inc = tuple.directions[h] == Direction::increasing;
      if (auto w = f.direction_witness(static_cast<VoterId>(h), inc)) {
        return "function " + std::to_string(l) + " is not " +
               (inc ? "increasing" : "decreasing") + " at voter " + std::to_string(h) +
               " (S = " + subset_string(*w, m) + ")";
      }
    }
  }
  return std::nullopt;
}

Rational expectation(std::span<const LatticeFunction> functions, const Schedule& schedule,
                     std::span<const Rational> p, std::uint64_t cap) {
  if (functions.empty()) throw std::invalid_argument("expectation: no functions");
  const std::size_t m = functions.front().voters();
  const std::size_t n = functions.size();
  if (p.size() != m) throw std::invalid_argument("expectation: need one probability per voter");
  if (auto problems = validate_schedule(schedule, m, n); !problems.empty()) {
    throw std::invalid_argument("expectation: " + problems.front());
  }
  std::vector<Voter> voters;
  for (std::size_t h = 0; h < m; ++h) voters.push_back({static_cast<VoterId>(h), 0, p[h]});

  Rational total(0);
  for_each_turnout(
      schedule, voters, n,
      [&](const Turnout& t, const Rational& probability) {
        Rational product = probability;
        for (std::size_t l = 0; l < n && product != 0; ++l) {
          const auto words = t.voters_in(static_cast<ElectionId>(l)).words();
          const auto subset = static_cast<std::uint32_t>(words.empty() ? 0 : words[0]);
          product *= functions[l](subset);
        }
        total += product;
      },
      cap);
  return total;
}

Rational expectation(const LatticeFunction& f, std::span<const Rational> p) {
  const std::size_t m = f.voters();
  if (p.size() != m) throw std::invalid_argument("expectation: need one probability per voter");
  Rational total(0);
  for (std::uint32_t s = 0; s < f.table().size(); ++s) {
    Rational mu(1);
    for (std::size_t h = 0; h < m; ++h) mu *= ((s >> h) & 1U) ? p[h] : Rational(1 - p[h]);
    total += f(s) * mu;
  }
  return total;
}

AlignedMargin verify_aligned_inequality(const AlignedTuple& tuple, const Schedule& fine,
                                const Schedule& coarse, std::span<const Rational> p) {
  if (auto violation = aligned_tuple_violation(tuple)) throw PreconditionError(*violation);
  const std::size_t m = tuple.functions.front().voters();
  const std::size_t n = tuple.functions.size();
  for (const Schedule* s : {&fine, &coarse}) {
    if (auto problems = validate_schedule(*s, m, n); !problems.empty()) {
      throw PreconditionError("schedule: " + problems.front());
    }
  }
  try {
    coarsening_chain(fine, coarse);
  } catch (const NotCoarserError& e) {
    throw PreconditionError(e.what());
  }
  AlignedMargin r;
  r.margin = expectation(tuple.functions, coarse, p) - expectation(tuple.functions, fine, p);
  r.holds = r.margin >= 0;
  return r;
}

Rational harris_covariance(const LatticeFunction& f1, const LatticeFunction& f2,
                           std::span<const Rational> p) {
  if (f1.voters() != f2.voters()) throw std::invalid_argument("harris: size mismatch");
  for (const LatticeFunction* f : {&f1, &f2}) {
    for (std::size_t h = 0; h < f->voters(); ++h) {
      if (auto w = f->direction_witness(static_cast<VoterId>(h), true)) {
        throw PreconditionError("harris: function " + std::string(f == &f1 ? "f1" : "f2") +
                                " is not increasing at voter " + std::to_string(h) +
                                " (S = " + subset_string(*w, f->voters()) + ")");
      }
    }
  }
  return expectation(f1.times(f2), p) - expectation(f1, p) * expectation(f2, p);
}

IdentityCheck proof_identity(const Rational& a1, const Rational& a2, const Rational& b1,
                             const Rational& b2, const Rational& c, const Rational& p) {
  IdentityCheck r;
  const Rational q = 1 - p;
  r.single_toss = (p * a1 * a2 + q * b1 * b2) * c;
  r.double_toss = (p * p * a1 * a2 + p * q * (a1 * b2 + b1 * a2) + q * q * b1 * b2) * c;
  r.closed_form = p * q * (a1 - b1) * (a2 - b2) * c;
  r.holds = r.single_toss - r.double_toss == r.closed_form;
  return r;
}

bool proof_identity_check(const Rational& a1, const Rational& a2, const Rational& b1,
                          const Rational& b2, const Rational& c, const Rational& p) {
  return proof_identity(a1, a2, b1, b2, c, p).holds;
}

namespace {

Rational random_increment(SplitMix64& rng) {
  if (rng.below(3) == 0) return Rational(0);
  return Rational(static_cast<long>(1 + rng.below(4)), static_cast<long>(1 + rng.below(3)));
}

Rational random_signed(SplitMix64& rng, long magnitude, long max_den) {
  const long num = static_cast<long>(rng.below(static_cast<std::uint64_t>(2 * magnitude + 1))) -
                   magnitude;
  const long den = 1 + static_cast<long>(rng.below(static_cast<std::uint64_t>(max_den)));
  return Rational(num, den);
}

}  // namespace

AlignedTuple random_aligned_tuple(std::size_t voters, std::size_t functions,
                                  std::span<const Direction> directions, SplitMix64& rng) {
  if (voters > 10) throw std::invalid_argument("random_aligned_tuple: at most 10 voters");
  if (directions.size() != voters) {
    throw std::invalid_argument("random_aligned_tuple: one direction per voter");
  }
  std::uint32_t flip = 0;
  for (std::size_t h = 0; h < voters; ++h) {
    if (directions[h] == Direction::decreasing) flip |= std::uint32_t{1} << h;
  }
  AlignedTuple tuple;
  tuple.directions.assign(directions.begin(), directions.end());
  const std::size_t size = std::size_t{1} << voters;
  for (std::size_t l = 0; l < functions; ++l) {
    std::vector<Rational> g(size);
    g[0] = Rational(static_cast<long>(rng.below(3)), static_cast<long>(1 + rng.below(2)));
    for (std::uint32_t t = 1; t < size; ++t) {
      Rational best = -1;
      for (std::size_t h = 0; h < voters; ++h) {
        if ((t >> h) & 1U) best = std::max(best, g[t & ~(std::uint32_t{1} << h)]);
      }
      g[t] = best + random_increment(rng);
    }
    std::vector<Rational> f(size);
    for (std::uint32_t s = 0; s < size; ++s) f[s] = g[s ^ flip];
    tuple.functions.emplace_back(voters, std::move(f));
  }
  return tuple;
}

Rational random_probability(SplitMix64& rng, std::uint64_t max_den) {
  const std::uint64_t den = 1 + rng.below(max_den);
  const std::uint64_t num = rng.below(den + 1);
  return Rational(static_cast<long>(num), static_cast<long>(den));
}

namespace {

void note(TrialSummary& summary, const Rational& margin, bool ok, const std::string& what) {
  ++summary.checks;
  if (!summary.min_margin || margin < *summary.min_margin) summary.min_margin = margin;
  if (!ok) {
    ++summary.failures;
    if (summary.first_failure.empty()) summary.first_failure = what;
  }
}

Partition random_partition(const std::vector<Partition>& all, SplitMix64& rng) {
  return all[rng.below(all.size())];
}

Partition random_coarsening(const Partition& fine, const std::vector<Partition>& all,
                            SplitMix64& rng) {
  std::vector<const Partition*> candidates;
  for (const Partition& p : all) {
    if (is_coarser(p, fine)) candidates.push_back(&p);
  }
  return *candidates[rng.below(candidates.size())];
}

}  // namespace

TrialSummary run_aligned_trials(std::uint64_t trials, std::uint64_t seed) {
  TrialSummary summary;
  summary.suite = "aligned";
  summary.trials = trials;
  summary.seed = seed;
  std::vector<std::vector<Partition>> partitions_of(4);
  for (std::size_t n = 1; n <= 3; ++n) partitions_of[n] = enumerate_partitions(n);

  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    SplitMix64 rng(derive_stream_seed(seed, trial));
    const std::size_t m = 1 + rng.below(3);
    const std::size_t n = 1 + rng.below(3);
    std::vector<Direction> directions;
    for (std::size_t h = 0; h < m; ++h) {
      directions.push_back(rng.below(2) ? Direction::increasing : Direction::decreasing);
    }
    const AlignedTuple tuple = random_aligned_tuple(m, n, directions, rng);
    std::vector<Rational> p;
    for (std::size_t h = 0; h < m; ++h) p.push_back(random_probability(rng));

    const auto& parts = partitions_of[n];
    std::vector<Rational> e;
    for (const Partition& part : parts) {
      e.push_back(expectation(tuple.functions, uniform_schedule(part, m), p));
    }
    for (std::size_t i = 0; i < parts.size(); ++i) {
      for (std::size_t j = 0; j < parts.size(); ++j) {
        if (!is_coarser(parts[i], parts[j])) continue;
        const Rational margin = e[i] - e[j];
        note(summary, margin, margin >= 0,
             "trial " + std::to_string(trial) + ": uniform pair " + std::to_string(i) + " >= " +
                 std::to_string(j) + " fails with margin " + to_fraction_string(margin));
      }
    }
    for (int k = 0; k < 2; ++k) {
      Schedule fine, coarse;
      for (std::size_t h = 0; h < m; ++h) {
        Partition f = random_partition(parts, rng);
        coarse.by_voter[static_cast<VoterId>(h)] = random_coarsening(f, parts, rng);
        fine.by_voter[static_cast<VoterId>(h)] = std::move(f);
      }
      const AlignedMargin r = verify_aligned_inequality(tuple, fine, coarse, p);
      note(summary, r.margin, r.holds,
           "trial " + std::to_string(trial) + ": staggered pair fails with margin " +
               to_fraction_string(r.margin));
    }
  }
  return summary;
}

TrialSummary run_harris_trials(std::uint64_t trials, std::uint64_t seed) {
  TrialSummary summary;
  summary.suite = "harris";
  summary.trials = trials;
  summary.seed = seed;
  Partition separate;
  separate.blocks = {{0}, {1}};
  Partition merged;
  merged.blocks = {{0, 1}};
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    SplitMix64 rng(derive_stream_seed(seed, trial));
    const std::size_t m = 1 + rng.below(4);
    const std::vector<Direction> up(m, Direction::increasing);
    const AlignedTuple pair = random_aligned_tuple(m, 2, up, rng);
    std::vector<Rational> p;
    for (std::size_t h = 0; h < m; ++h) p.push_back(random_probability(rng));
    const LatticeFunction& f1 = pair.functions[0];
    const LatticeFunction& f2 = pair.functions[1];
    const std::string where = "trial " + std::to_string(trial) + ": ";

    const Rational cov = harris_covariance(f1, f2, p);
    note(summary, cov, cov >= 0, where + "negative covariance " + to_fraction_string(cov));

    const Rational c1 = random_signed(rng, 5, 4);
    const Rational c2 = random_signed(rng, 5, 4);
    const Rational shifted = harris_covariance(f1.plus(c1), f2.plus(c2), p);
    note(summary, cov, shifted == cov, where + "covariance changes under constant shifts");

    const Rational margin =
        expectation(pair.functions, uniform_schedule(merged, m), p) -
        expectation(pair.functions, uniform_schedule(separate, m), p);
    note(summary, margin, margin == cov, where + "merge margin " + to_fraction_string(margin) +
                                             " differs from covariance " +
                                             to_fraction_string(cov));
  }
  return summary;
}

TrialSummary run_identity_trials(std::uint64_t trials, std::uint64_t seed) {
  TrialSummary summary;
  summary.suite = "identity";
  summary.trials = trials;
  summary.seed = seed;
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    SplitMix64 rng(derive_stream_seed(seed, trial));
    const Rational a1 = random_signed(rng, 20, 12);
    const Rational a2 = random_signed(rng, 20, 12);
    const Rational b1 = random_signed(rng, 20, 12);
    const Rational b2 = random_signed(rng, 20, 12);
    const Rational c = random_signed(rng, 20, 12);
    const Rational p = random_signed(rng, 12, 12);
    const IdentityCheck r = proof_identity(a1, a2, b1, b2, c, p);
    note(summary, r.single_toss - r.double_toss - r.closed_form, r.holds,
         "trial " + std::to_string(trial) + ": identity fails");
  }
  return summary;
}

}  // namespace sweeplab
