#include "sweeplab/win_rules.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <stdexcept>

namespace sweeplab {

Tally tally(const VoterSet& voters_present, const ElectionSpec& election,
            std::span<const Voter> voters, std::size_t party_count) {
  Tally t(party_count, 0);
  std::vector<char> eligible;
  if (election.eligibility) {
    eligible.assign(voters.size(), 0);
    for (VoterId h : *election.eligibility) eligible.at(h) = 1;
  }
  for (const Voter& v : voters) {
    if (!voters_present.test(v.id)) continue;
    if (election.eligibility && !eligible[v.id]) continue;
    t.at(v.party) += 1;
  }
  return t;
}

namespace {

template <typename Count>
WinProbVector plurality(std::span<const Count> counts) {
  WinProbVector out(counts.size(), Rational(0));
  if (counts.empty()) return out;
  const Count best = *std::max_element(counts.begin(), counts.end());
  const auto tied = std::count(counts.begin(), counts.end(), best);
  const Rational share(1, static_cast<long>(tied));
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == best) out[i] = share;
  }
  return out;
}

std::uint64_t total_votes(const Tally& t) {
  return std::accumulate(t.begin(), t.end(), std::uint64_t{0});
}

SeatVector round_robin(std::size_t parties, std::uint32_t seats) {
  SeatVector out(parties, 0);
  for (std::uint32_t s = 0; s < seats; ++s) out[s % parties] += 1;
  return out;
}

SeatVector dhondt(const Tally& t, std::uint32_t seats) {
  SeatVector out(t.size(), 0);
  for (std::uint32_t s = 0; s < seats; ++s) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < t.size(); ++i) {
      // t[i]/(out[i]+1) > t[best]/(out[best]+1); strict keeps the lower id on ties
      const auto lhs = static_cast<unsigned __int128>(t[i]) * (out[best] + 1U);
      const auto rhs = static_cast<unsigned __int128>(t[best]) * (out[i] + 1U);
      if (lhs > rhs) best = i;
    }
    out[best] += 1;
  }
  return out;
}

SeatVector hare(const Tally& t, std::uint32_t seats) {
  const std::uint64_t total = total_votes(t);
  SeatVector out(t.size(), 0);
  std::vector<std::uint64_t> remainder(t.size(), 0);
  std::uint64_t assigned = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto share = static_cast<unsigned __int128>(t[i]) * seats;
    out[i] = static_cast<std::uint32_t>(share / total);
    remainder[i] = static_cast<std::uint64_t>(share % total);
    assigned += out[i];
  }
  std::vector<std::size_t> order(t.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < seats; ++k, ++assigned) out[order[k]] += 1;
  return out;
}

}  // namespace

WinProbVector fptp_win_probs(const Tally& t) {
  return plurality<std::uint64_t>(std::span<const std::uint64_t>(t));
}

SeatVector allocate_seats(const Tally& t, const WinRuleSpec& spec) {
  if (!spec.is_pr()) throw std::invalid_argument("allocate_seats: rule is not proportional");
  if (t.empty()) throw std::invalid_argument("allocate_seats: empty tally");
  if (total_votes(t) == 0) return round_robin(t.size(), spec.seats);
  return spec.rounding == Rounding::dhondt ? dhondt(t, spec.seats) : hare(t, spec.seats);
}

WinProbVector pr_win_probs(const SeatVector& seats, PrMode mode) {
  if (mode == PrMode::most_seats) {
    return plurality<std::uint32_t>(std::span<const std::uint32_t>(seats));
  }
  const std::uint64_t total = std::accumulate(seats.begin(), seats.end(), std::uint64_t{0});
  WinProbVector out(seats.size(), Rational(0));
  for (std::size_t i = 0; i < seats.size(); ++i) {
    if (2 * static_cast<std::uint64_t>(seats[i]) > total) out[i] = 1;
  }
  return out;
}

WinRule make_rule(const WinRuleSpec& spec, const Pooling* pooling) {
  std::optional<Pooling> pool;
  if (pooling) pool = *pooling;

  if (spec.kind == RuleKind::fptp) {
    return [pool](const Tally& t) {
      WinProbVector per_party = fptp_win_probs(t);
      if (!pool) return per_party;
      WinProbVector out(pool->contender_names.size(), Rational(0));
      for (std::size_t i = 0; i < per_party.size(); ++i) {
        out[pool->contender_of_party.at(i)] += per_party[i];
      }
      return out;
    };
  }
  const PrMode mode =
      spec.kind == RuleKind::pr_most_seats ? PrMode::most_seats : PrMode::strict_majority;
  return [spec, mode, pool](const Tally& t) {
    const std::size_t contenders = pool ? pool->contender_names.size() : t.size();
    if (total_votes(t) == 0) {
      if (mode == PrMode::strict_majority) return WinProbVector(contenders, Rational(0));
      return WinProbVector(contenders, Rational(1, static_cast<long>(contenders)));
    }
    SeatVector seats = allocate_seats(t, spec);
    if (pool) {
      SeatVector pooled(contenders, 0);
      for (std::size_t i = 0; i < seats.size(); ++i) {
        pooled[pool->contender_of_party.at(i)] += seats[i];
      }
      seats = std::move(pooled);
    }
    return pr_win_probs(seats, mode);
  };
}

Scenario alliance_transform(const Scenario& s, const AllianceStructure& a) {
  if (s.pooling) throw std::invalid_argument("alliance_transform: scenario is already pooled");
  const std::size_t parties = s.parties.size();
  std::vector<int> covered(parties, 0);
  for (const Alliance& al : a.alliances) {
    if (al.members.empty()) {
      throw std::invalid_argument("alliance '" + al.name + "' has no members");
    }
    for (PartyId p : al.members) {
      if (p >= parties) {
        throw std::invalid_argument("alliance '" + al.name + "' names unknown party " +
                                    std::to_string(p));
      }
      if (covered[p]++) {
        throw std::invalid_argument("party '" + s.parties[p] +
                                    "' belongs to more than one alliance");
      }
    }
    for (AllianceType t : al.type_by_election) {
      if (t != al.type) {
        throw std::invalid_argument("alliance '" + al.name +
                                    "' changes type across elections; sweep monotonicity does "
                                    "not apply to such structures");
      }
    }
  }
  for (std::size_t p = 0; p < parties; ++p) {
    if (!covered[p]) {
      throw std::invalid_argument("party '" + s.parties[p] + "' is not in any alliance");
    }
  }

  Scenario out;
  out.name = s.name;
  out.elections = s.elections;
  Pooling pooling;
  std::vector<PartyId> unit_of_party(parties, 0);
  for (std::size_t c = 0; c < a.alliances.size(); ++c) {
    const Alliance& al = a.alliances[c];
    pooling.contender_names.push_back(al.name);
    if (al.type == AllianceType::pre_poll) {
      const auto unit = static_cast<PartyId>(out.parties.size());
      out.parties.push_back(al.name);
      pooling.contender_of_party.push_back(static_cast<PartyId>(c));
      for (PartyId p : al.members) unit_of_party[p] = unit;
    } else {
      for (PartyId p : al.members) {
        unit_of_party[p] = static_cast<PartyId>(out.parties.size());
        out.parties.push_back(s.parties[p]);
        pooling.contender_of_party.push_back(static_cast<PartyId>(c));
      }
    }
  }
  out.voters = s.voters;
  for (Voter& v : out.voters) v.party = unit_of_party.at(v.party);
  out.pooling = std::move(pooling);
  return out;
}

Scenario resolve_contenders(const Scenario& s) {
  if (s.alliances) return alliance_transform(s, *s.alliances);
  return s;
}

CompiledScenario::CompiledScenario(const Scenario& resolved)
    : voter_count_(resolved.voters.size()),
      party_count_(resolved.parties.size()),
      contender_count_(sweeplab::contender_count(resolved)) {
  if (resolved.alliances) {
    throw std::invalid_argument("CompiledScenario: resolve alliances first");
  }
  const Pooling* pooling = resolved.pooling ? &*resolved.pooling : nullptr;
  for (const ElectionSpec& e : resolved.elections) {
    rules_.push_back(make_rule(e.rule, pooling));
    VoterSet eligible = e.eligibility ? VoterSet::from_members(voter_count_, *e.eligibility)
                                      : VoterSet::full(voter_count_);
    std::vector<VoterSet> by_party(party_count_, VoterSet(voter_count_));
    for (const Voter& v : resolved.voters) {
      if (eligible.test(v.id)) by_party.at(v.party).set(v.id);
    }
    supporters_.push_back(std::move(by_party));
  }
  for (const Voter& v : resolved.voters) {
    contender_of_voter_.push_back(pooling ? pooling->contender_of_party.at(v.party) : v.party);
  }
}

Tally CompiledScenario::tally(ElectionId l, const VoterSet& present) const {
  Tally t(party_count_, 0);
  const auto& by_party = supporters_[l];
  for (std::size_t p = 0; p < party_count_; ++p) {
    std::size_t c = 0;
    const auto a = present.words();
    const auto b = by_party[p].words();
    for (std::size_t i = 0; i < a.size(); ++i) c += static_cast<std::size_t>(std::popcount(a[i] & b[i]));
    t[p] = c;
  }
  return t;
}

std::function<Rational(const VoterSet&)> win_prob_function(const Scenario& s, ElectionId l,
                                                           PartyId contender) {
  auto compiled = std::make_shared<CompiledScenario>(resolve_contenders(s));
  if (l >= compiled->election_count()) throw std::out_of_range("unknown election id");
  if (contender >= compiled->contender_count()) throw std::out_of_range("unknown contender");
  return [compiled, l, contender](const VoterSet& present) {
    return compiled->win_probs(l, present).at(contender);
  };
}

namespace {

// Calls visit(t) for every tally with entries <= bound, lexicographically,
// until visit returns false.
template <typename Visit>
void for_each_tally(std::size_t parties, std::uint64_t bound, Visit&& visit) {
  Tally t(parties, 0);
  while (true) {
    if (!visit(t)) return;
    std::size_t i = parties;
    while (i > 0) {
      --i;
      if (t[i] < bound) {
        ++t[i];
        break;
      }
      t[i] = 0;
      if (i == 0) return;
    }
    if (parties == 0) return;
  }
}

std::string render(const Tally& t) {
  std::string s = "(";
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(t[i]);
  }
  return s + ")";
}

}  // namespace

RuleCheck validate_exclusivity(const WinRule& rule, std::size_t party_count,
                               std::uint64_t bound) {
  RuleCheck check;
  for_each_tally(party_count, bound, [&](const Tally& t) {
    const WinProbVector w = rule(t);
    Rational sum(0);
    bool in_range = true;
    for (const Rational& x : w) {
      sum += x;
      if (x < 0 || x > 1) in_range = false;
    }
    if (!in_range || sum > 1) {
      check.ok = false;
      check.counterexample = t;
      check.detail = "win probabilities at " + render(t) + " sum to " + to_fraction_string(sum);
      return false;
    }
    return true;
  });
  return check;
}

RuleCheck validate_monotonicity(const WinRule& rule, std::size_t party_count,
                                std::uint64_t bound,
                                std::span<const PartyId> contender_of_party) {
  auto contender = [&](std::size_t p) -> std::size_t {
    return contender_of_party.empty() ? p : contender_of_party[p];
  };
  RuleCheck check;
  for_each_tally(party_count, bound, [&](const Tally& t) {
    const WinProbVector base = rule(t);
    for (std::size_t s = 0; s < party_count; ++s) {
      if (t[s] >= bound) continue;
      Tally bumped = t;
      bumped[s] += 1;
      const WinProbVector after = rule(bumped);
      const std::size_t own = contender(s);
      for (std::size_t r = 0; r < after.size(); ++r) {
        const bool broken = r == own ? after[r] < base[r] : after[r] > base[r];
        if (broken) {
          check.ok = false;
          check.counterexample = t;
          check.party = static_cast<PartyId>(s);
          check.detail = "extra vote for party " + std::to_string(s) + " at " + render(t) +
                         " moves contender " + std::to_string(r) + " from " +
                         to_fraction_string(base[r]) + " to " + to_fraction_string(after[r]);
          return false;
        }
      }
    }
    return true;
  });
  return check;
}

AlignmentCheck check_alignment(const Scenario& s, PartyId contender, std::size_t max_voters) {
  const CompiledScenario compiled(resolve_contenders(s));
  const std::size_t m = compiled.voter_count();
  if (m > max_voters || m > kMaxAlignmentVoters) {
    throw std::invalid_argument("check_alignment: " + std::to_string(m) +
                                " voters exceeds the subset-enumeration limit");
  }
  if (contender >= compiled.contender_count()) {
    throw std::out_of_range("check_alignment: unknown contender");
  }
  const std::size_t subsets = std::size_t{1} << m;
  // win probability of the contender, per election and voter subset
  std::vector<std::vector<Rational>> f(compiled.election_count());
  for (std::size_t l = 0; l < compiled.election_count(); ++l) {
    f[l].resize(subsets);
    for (std::size_t mask = 0; mask < subsets; ++mask) {
      VoterSet present(m);
      for (std::size_t h = 0; h < m; ++h) {
        if ((mask >> h) & 1U) present.set(h);
      }
      f[l][mask] = compiled.win_probs(static_cast<ElectionId>(l), present).at(contender);
    }
  }
  AlignmentCheck check;
  for (std::size_t h = 0; h < m; ++h) {
    const bool increasing = compiled.contender_of_voter(static_cast<VoterId>(h)) == contender;
    for (std::size_t l = 0; l < compiled.election_count(); ++l) {
      for (std::size_t mask = 0; mask < subsets; ++mask) {
        if ((mask >> h) & 1U) continue;
        const Rational& without = f[l][mask];
        const Rational& with = f[l][mask | (std::size_t{1} << h)];
        if (increasing ? with < without : with > without) {
          AlignmentWitness w;
          w.voter = static_cast<VoterId>(h);
          w.election = static_cast<ElectionId>(l);
          for (std::size_t k = 0; k < m; ++k) {
            if ((mask >> k) & 1U) w.subset.push_back(static_cast<VoterId>(k));
          }
          check.ok = false;
          check.witness = std::move(w);
          return check;
        }
      }
    }
  }
  return check;
}

std::string rule_name(const WinRuleSpec& spec) {
  switch (spec.kind) {
    case RuleKind::fptp:
      return "fptp";
    case RuleKind::pr_most_seats:
      return std::string("pr_most_seats/") +
             (spec.rounding == Rounding::dhondt ? "dhondt" : "hare") + "/" +
             std::to_string(spec.seats);
    case RuleKind::pr_strict_majority:
      return std::string("pr_strict_majority/") +
             (spec.rounding == Rounding::dhondt ? "dhondt" : "hare") + "/" +
             std::to_string(spec.seats);
  }
  return "unknown";
}

}  // namespace sweeplab
