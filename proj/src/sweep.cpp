#include "sweeplab/sweep.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "sweeplab/lattice.hpp"

namespace sweeplab {

std::string method_name(Method m) { return m == Method::exact ? "exact" : "mc"; }

std::string coarseness_name(Coarseness c) {
  switch (c) {
    case Coarseness::equal:
      return "equal";
    case Coarseness::first_coarser:
      return "first_coarser";
    case Coarseness::second_coarser:
      return "second_coarser";
    case Coarseness::incomparable:
      return "incomparable";
  }
  return "incomparable";
}

std::vector<Rational> sweep_probs_given_turnout(const CompiledScenario& compiled,
                                                const Turnout& t) {
  std::vector<Rational> product(compiled.contender_count(), Rational(1));
  for (std::size_t l = 0; l < compiled.election_count(); ++l) {
    const auto l_id = static_cast<ElectionId>(l);
    const WinProbVector w = compiled.win_probs(l_id, t.voters_in(l_id));
    for (std::size_t c = 0; c < product.size(); ++c) product[c] *= w[c];
  }
  return product;
}

Rational sweep_prob_given_turnout(const Scenario& s, const Turnout& t, PartyId contender) {
  const CompiledScenario compiled(resolve_contenders(s));
  return sweep_probs_given_turnout(compiled, t).at(contender);
}

namespace {

Schedule checked_schedule(const Scenario& resolved, const Schedule& sch) {
  auto problems = validate_schedule(sch, resolved.voters.size(), resolved.elections.size());
  if (!problems.empty()) throw std::invalid_argument("invalid schedule: " + problems.front());
  return canonicalize_schedule(sch, resolved.elections.size());
}

std::vector<std::string> names_of(const Scenario& resolved) {
  std::vector<std::string> out;
  for (std::size_t c = 0; c < contender_count(resolved); ++c) {
    out.push_back(contender_name(resolved, static_cast<PartyId>(c)));
  }
  return out;
}

}  // namespace

SweepReport exact_sweep_report(const Scenario& s, const Schedule& sch, std::uint64_t cap) {
  const Scenario resolved = resolve_contenders(s);
  const Schedule schedule = checked_schedule(resolved, sch);
  const CompiledScenario compiled(resolved);
  const std::size_t contenders = compiled.contender_count();

  std::vector<Rational> total(contenders, Rational(0));
  for_each_turnout(
      schedule, resolved.voters, resolved.elections.size(),
      [&](const Turnout& t, const Rational& probability) {
        const auto given = sweep_probs_given_turnout(compiled, t);
        for (std::size_t c = 0; c < contenders; ++c) {
          if (given[c] != 0) total[c] += probability * given[c];
        }
      },
      cap);

  SweepReport report;
  report.method = Method::exact;
  report.contenders = names_of(resolved);
  Rational any(0);
  for (const Rational& q : total) {
    report.per_party.push_back({q, to_double(q), 0.0});
    any += q;
  }
  report.any_party = {any, to_double(any), 0.0};
  return report;
}

Rational exact_sweep_probability(const Scenario& s, const Schedule& sch, PartyId contender,
                                 std::uint64_t cap) {
  const SweepReport report = exact_sweep_report(s, sch, cap);
  return *report.per_party.at(contender).exact;
}

namespace {

// Flattened per-voter sampling plan. Blocks keep their canonical order and
// every block costs one draw, even when none of its elections count the
// voter's ballot.
class SamplingPlan {
 public:
  SamplingPlan(const Scenario& resolved, const Schedule& schedule)
      : compiled_(resolved),
        elections_(resolved.elections.size()),
        parties_(resolved.parties.size()) {
    std::vector<std::vector<char>> eligible(elections_);
    for (std::size_t l = 0; l < elections_; ++l) {
      const auto& e = resolved.elections[l];
      eligible[l].assign(resolved.voters.size(), e.eligibility ? 0 : 1);
      if (e.eligibility) {
        for (VoterId h : *e.eligibility) eligible[l].at(h) = 1;
      }
    }
    for (const Voter& v : resolved.voters) {
      coins_.emplace_back(v.turnout);
      party_.push_back(v.party);
      voter_block_start_.push_back(static_cast<std::uint32_t>(block_start_.size()));
      for (const Block& block : schedule.by_voter.at(v.id).blocks) {
        block_start_.push_back(static_cast<std::uint32_t>(slots_.size()));
        for (ElectionId l : block) {
          if (eligible[l][v.id]) {
            slots_.push_back(static_cast<std::uint32_t>(l * parties_ + v.party));
          }
        }
      }
    }
    voter_block_start_.push_back(static_cast<std::uint32_t>(block_start_.size()));
    block_start_.push_back(static_cast<std::uint32_t>(slots_.size()));

    // Consecutive voters with the same coin and the same slots form a run;
    // a run's heads are counted per block before touching the tallies.
    auto same_layout = [&](std::size_t a, std::size_t b) {
      if (!(coins_[a] == coins_[b])) return false;
      const std::uint32_t na = voter_block_start_[a + 1] - voter_block_start_[a];
      if (na != voter_block_start_[b + 1] - voter_block_start_[b]) return false;
      for (std::uint32_t k = 0; k < na; ++k) {
        const std::uint32_t ba = voter_block_start_[a] + k, bb = voter_block_start_[b] + k;
        if (!std::equal(slots_.begin() + block_start_[ba], slots_.begin() + block_start_[ba + 1],
                        slots_.begin() + block_start_[bb], slots_.begin() + block_start_[bb + 1])) {
          return false;
        }
      }
      return true;
    };
    for (std::size_t h = 0; h < coins_.size(); ++h) {
      if (!runs_.empty() && same_layout(runs_.back().first_voter, h)) {
        ++runs_.back().voters;
      } else {
        runs_.push_back({static_cast<std::uint32_t>(h), 1});
      }
    }
  }

  std::size_t contenders() const { return compiled_.contender_count(); }

  // Conditional sweep value per contender for the sample drawn from rng.
  void sample(SplitMix64& rng, std::vector<std::uint64_t>& counts, Tally& scratch,
              std::vector<double>& value) const {
    counts.assign(elections_ * parties_ + elections_, 0);
    // the tail of `counts` holds the per-block head counts of the current run
    std::uint64_t* heads = counts.data() + elections_ * parties_;
    for (const Run& run : runs_) {
      const std::uint32_t h = run.first_voter;
      const std::uint32_t first_block = voter_block_start_[h];
      const std::uint32_t nblocks = voter_block_start_[h + 1] - first_block;
      const BernoulliThreshold& coin = coins_[h];
      if (nblocks == 1) {
        std::uint64_t a = 0;
        for (std::uint32_t v = 0; v < run.voters; ++v) a += coin(rng);
        heads[0] = a;
      } else if (nblocks == 2) {
        std::uint64_t a = 0, c = 0;
        for (std::uint32_t v = 0; v < run.voters; ++v) {
          a += coin(rng);
          c += coin(rng);
        }
        heads[0] = a;
        heads[1] = c;
      } else {
        for (std::uint32_t b = 0; b < nblocks; ++b) heads[b] = 0;
        for (std::uint32_t v = 0; v < run.voters; ++v) {
          for (std::uint32_t b = 0; b < nblocks; ++b) heads[b] += coin(rng);
        }
      }
      for (std::uint32_t b = 0; b < nblocks; ++b) {
        const std::uint32_t block = first_block + b;
        for (std::uint32_t k = block_start_[block]; k < block_start_[block + 1]; ++k) {
          counts[slots_[k]] += heads[b];
        }
      }
    }
    value.assign(contenders(), 1.0);
    scratch.resize(parties_);
    for (std::size_t l = 0; l < elections_; ++l) {
      for (std::size_t p = 0; p < parties_; ++p) scratch[p] = counts[l * parties_ + p];
      const WinProbVector w = compiled_.win_probs(static_cast<ElectionId>(l), scratch);
      for (std::size_t c = 0; c < value.size(); ++c) {
        value[c] *= w[c] == 0 ? 0.0 : (w[c] == 1 ? 1.0 : to_double(w[c]));
      }
    }
  }

 private:
  CompiledScenario compiled_;
  std::size_t elections_;
  std::size_t parties_;
  std::vector<BernoulliThreshold> coins_;
  std::vector<PartyId> party_;
  std::vector<std::uint32_t> voter_block_start_;
  std::vector<std::uint32_t> block_start_;
  std::vector<std::uint32_t> slots_;  // election * parties + party, per block
  struct Run {
    std::uint32_t first_voter;
    std::uint32_t voters;
  };
  std::vector<Run> runs_;
};

constexpr std::uint64_t kReductionBlock = 1024;
constexpr double kZ95 = 1.959963984540054;

Estimate summarize(double sum, double sum_sq, std::uint64_t n) {
  Estimate e;
  const double nd = static_cast<double>(n);
  const double mean = sum / nd;
  e.value = mean;
  if (std::min(mean, 1.0 - mean) * nd < 10.0) {
    const double z2 = kZ95 * kZ95;
    const double p = std::clamp(mean, 0.0, 1.0);
    e.half_width =
        kZ95 * std::sqrt(p * (1 - p) / nd + z2 / (4 * nd * nd)) / (1 + z2 / nd);
  } else {
    const double var = n > 1 ? std::max(0.0, (sum_sq - nd * mean * mean) / (nd - 1)) : 0.0;
    e.half_width = kZ95 * std::sqrt(var / nd);
  }
  return e;
}

}  // namespace

std::vector<double> mc_sample_values(const Scenario& s, const Schedule& sch,
                                     std::uint64_t seed, std::uint64_t index) {
  const Scenario resolved = resolve_contenders(s);
  const SamplingPlan plan(resolved, checked_schedule(resolved, sch));
  SplitMix64 rng(derive_stream_seed(seed, index));
  std::vector<std::uint64_t> counts;
  Tally scratch;
  std::vector<double> value;
  plan.sample(rng, counts, scratch, value);
  return value;
}

SweepReport mc_sweep_report(const Scenario& s, const Schedule& sch, const McOptions& options) {
  if (options.samples < 1) throw std::invalid_argument("Monte Carlo needs at least one sample");
  const Scenario resolved = resolve_contenders(s);
  const SamplingPlan plan(resolved, checked_schedule(resolved, sch));
  const std::size_t contenders = plan.contenders();
  const std::size_t width = contenders + 1;  // last slot: any contender

  const std::uint64_t blocks = (options.samples + kReductionBlock - 1) / kReductionBlock;
  std::vector<double> block_sum(blocks * width, 0.0);
  std::vector<double> block_sq(blocks * width, 0.0);
  std::atomic<std::uint64_t> next_block{0};

  auto work = [&] {
    std::vector<std::uint64_t> counts;
    Tally scratch;
    std::vector<double> value;
    for (std::uint64_t b = next_block++; b < blocks; b = next_block++) {
      const std::uint64_t begin = b * kReductionBlock;
      const std::uint64_t end = std::min(options.samples, begin + kReductionBlock);
      double* sum = &block_sum[b * width];
      double* sq = &block_sq[b * width];
      for (std::uint64_t i = begin; i < end; ++i) {
        SplitMix64 rng(derive_stream_seed(options.seed, i));
        plan.sample(rng, counts, scratch, value);
        double any = 0;
        for (std::size_t c = 0; c < contenders; ++c) {
          sum[c] += value[c];
          sq[c] += value[c] * value[c];
          any += value[c];
        }
        sum[contenders] += any;
        sq[contenders] += any * any;
      }
    }
  };
  const unsigned workers = std::max(1U, options.workers);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  std::vector<double> sum(width, 0.0), sq(width, 0.0);
  for (std::uint64_t b = 0; b < blocks; ++b) {
    for (std::size_t c = 0; c < width; ++c) {
      sum[c] += block_sum[b * width + c];
      sq[c] += block_sq[b * width + c];
    }
  }
  SweepReport report;
  report.method = Method::monte_carlo;
  report.contenders = names_of(resolved);
  report.samples = options.samples;
  report.seed = options.seed;
  for (std::size_t c = 0; c < contenders; ++c) {
    report.per_party.push_back(summarize(sum[c], sq[c], options.samples));
  }
  report.any_party = summarize(sum[contenders], sq[contenders], options.samples);
  return report;
}

SweepReport sweep_report(const Scenario& s, const Schedule& sch,
                         const EvaluationOptions& options) {
  if (options.method == Method::exact) return exact_sweep_report(s, sch, options.cap);
  return mc_sweep_report(s, sch, options.mc);
}

Coarseness schedule_relation(const Schedule& a, const Schedule& b) {
  const bool a_coarser = is_coarser_staggered(a, b);
  const bool b_coarser = is_coarser_staggered(b, a);
  if (a_coarser && b_coarser) return Coarseness::equal;
  if (a_coarser) return Coarseness::first_coarser;
  if (b_coarser) return Coarseness::second_coarser;
  return Coarseness::incomparable;
}

namespace {

// True when `coarse` is certainly below `fine` for the contender.
bool decreased(const Estimate& coarse, const Estimate& fine) {
  if (coarse.exact && fine.exact) return *coarse.exact < *fine.exact;
  return coarse.value + coarse.half_width < fine.value - fine.half_width;
}

}  // namespace

ScheduleComparison compare_schedules(const Scenario& s, const Schedule& first,
                                     const Schedule& second, const EvaluationOptions& options) {
  ScheduleComparison cmp;
  cmp.relation = schedule_relation(first, second);
  cmp.first = sweep_report(s, first, options);
  cmp.second = sweep_report(s, second, options);
  const std::size_t contenders = cmp.first.per_party.size();
  for (std::size_t c = 0; c < contenders; ++c) {
    const Estimate& a = cmp.first.per_party[c];
    const Estimate& b = cmp.second.per_party[c];
    Estimate d;
    if (a.exact && b.exact) d.exact = *b.exact - *a.exact;
    d.value = d.exact ? to_double(*d.exact) : b.value - a.value;
    d.half_width = a.half_width + b.half_width;
    cmp.deltas.push_back(d);

    bool violated = false;
    if (cmp.relation == Coarseness::first_coarser || cmp.relation == Coarseness::equal) {
      violated = violated || decreased(a, b);
    }
    if (cmp.relation == Coarseness::second_coarser || cmp.relation == Coarseness::equal) {
      violated = violated || decreased(b, a);
    }
    if (violated) cmp.violations.push_back(static_cast<PartyId>(c));
  }
  return cmp;
}

Estimate mixture_sweep_probability(std::span<const WeightedScenario> mixture,
                                   const Schedule& sch, PartyId contender,
                                   const EvaluationOptions& options) {
  if (mixture.empty()) throw std::invalid_argument("mixture: no scenarios");
  Rational weight_sum(0);
  for (const auto& w : mixture) {
    if (w.weight < 0) throw std::invalid_argument("mixture: negative weight");
    weight_sum += w.weight;
  }
  if (weight_sum != 1) {
    throw std::invalid_argument("mixture: weights sum to " + to_fraction_string(weight_sum) +
                                ", not 1");
  }
  const Scenario& head = mixture.front().scenario;
  for (const auto& w : mixture) {
    if (w.scenario.voters.size() != head.voters.size() ||
        w.scenario.elections.size() != head.elections.size() ||
        contender_count(resolve_contenders(w.scenario)) !=
            contender_count(resolve_contenders(head))) {
      throw std::invalid_argument("mixture: scenario '" + w.scenario.name +
                                  "' differs in shape from '" + head.name + "'");
    }
  }

  Estimate out;
  Rational exact(0);
  bool all_exact = true;
  for (const auto& w : mixture) {
    if (w.weight == 0) continue;
    const SweepReport r = sweep_report(w.scenario, sch, options);
    const Estimate& e = r.per_party.at(contender);
    const double wd = to_double(w.weight);
    out.value += wd * e.value;
    out.half_width += wd * e.half_width;
    if (e.exact) {
      exact += w.weight * *e.exact;
    } else {
      all_exact = false;
    }
  }
  if (all_exact) {
    out.exact = exact;
    out.value = to_double(exact);
  }
  return out;
}

}  // namespace sweeplab
