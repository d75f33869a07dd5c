#include "sweeplab/turnout.hpp"

#include <cmath>
#include <string>

namespace sweeplab {

BernoulliThreshold::BernoulliThreshold(const Rational& p) {
  if (p >= 1) {
    always_ = true;
  } else if (p > 0) {
    const BigInt scaled = boost::multiprecision::numerator(p) * (BigInt(1) << 64) /
                          boost::multiprecision::denominator(p);
    threshold_ = scaled.convert_to<std::uint64_t>();
  }
}

VoterSet VoterSet::full(std::size_t size) {
  VoterSet s(size);
  for (std::size_t h = 0; h < size; ++h) s.set(h);
  return s;
}

VoterSet VoterSet::from_members(std::size_t size, std::span<const VoterId> members) {
  VoterSet s(size);
  for (VoterId h : members) {
    if (h >= size) throw std::out_of_range("voter id " + std::to_string(h) + " out of range");
    s.set(h);
  }
  return s;
}

std::size_t VoterSet::count() const {
  std::size_t c = 0;
  for (std::uint64_t w : words_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

std::vector<VoterId> VoterSet::members() const {
  std::vector<VoterId> out;
  for (std::size_t h = 0; h < size_; ++h) {
    if (test(h)) out.push_back(static_cast<VoterId>(h));
  }
  return out;
}

std::size_t VoterSet::count_and(const VoterSet& a, const VoterSet& b) const {
  std::size_t c = 0;
  for (std::size_t i = 0; i < words_.size(); ++i) {
    c += static_cast<std::size_t>(std::popcount(words_[i] & a.words_[i] & b.words_[i]));
  }
  return c;
}

Turnout::Turnout(std::size_t voter_count, std::size_t election_count)
    : voters_(voter_count), by_election_(election_count, VoterSet(voter_count)) {}

Turnout Turnout::full(std::size_t voter_count, std::size_t election_count) {
  Turnout t(voter_count, election_count);
  for (auto& set : t.by_election_) set = VoterSet::full(voter_count);
  return t;
}

Turnout Turnout::from_pairs(std::size_t voter_count, std::size_t election_count,
                            std::span<const std::pair<VoterId, ElectionId>> pairs) {
  Turnout t(voter_count, election_count);
  for (auto [h, l] : pairs) {
    if (h >= voter_count || l >= election_count) {
      throw std::out_of_range("turnout pair (" + std::to_string(h) + "," + std::to_string(l) +
                              ") out of range");
    }
    t.insert(h, l);
  }
  return t;
}

std::vector<std::pair<VoterId, ElectionId>> Turnout::pairs() const {
  std::vector<std::pair<VoterId, ElectionId>> out;
  for (std::size_t h = 0; h < voters_; ++h) {
    for (std::size_t l = 0; l < by_election_.size(); ++l) {
      if (by_election_[l].test(h)) {
        out.emplace_back(static_cast<VoterId>(h), static_cast<ElectionId>(l));
      }
    }
  }
  return out;
}

std::vector<std::vector<VoterId>> votes_by_election(const Turnout& t) {
  std::vector<std::vector<VoterId>> out;
  out.reserve(t.election_count());
  for (std::size_t l = 0; l < t.election_count(); ++l) {
    out.push_back(t.voters_in(static_cast<ElectionId>(l)).members());
  }
  return out;
}

std::vector<std::vector<ElectionId>> votes_by_voter(const Turnout& t) {
  std::vector<std::vector<ElectionId>> out(t.voter_count());
  for (std::size_t l = 0; l < t.election_count(); ++l) {
    for (VoterId h : t.voters_in(static_cast<ElectionId>(l)).members()) {
      out[h].push_back(static_cast<ElectionId>(l));
    }
  }
  return out;
}

Turnout turnout_from_election_view(std::size_t voter_count,
                                   const std::vector<std::vector<VoterId>>& by_election) {
  Turnout t(voter_count, by_election.size());
  for (std::size_t l = 0; l < by_election.size(); ++l) {
    for (VoterId h : by_election[l]) {
      if (h >= voter_count) throw std::out_of_range("voter id out of range");
      t.insert(h, static_cast<ElectionId>(l));
    }
  }
  return t;
}

Turnout turnout_from_voter_view(std::size_t election_count,
                                const std::vector<std::vector<ElectionId>>& by_voter) {
  Turnout t(by_voter.size(), election_count);
  for (std::size_t h = 0; h < by_voter.size(); ++h) {
    for (ElectionId l : by_voter[h]) {
      if (l >= election_count) throw std::out_of_range("election id out of range");
      t.insert(static_cast<VoterId>(h), l);
    }
  }
  return t;
}

EnumerationCapExceeded::EnumerationCapExceeded(double log2_support_, std::uint64_t cap_)
    : std::runtime_error("exact enumeration needs about 2^" +
                         std::to_string(static_cast<long long>(std::ceil(log2_support_))) +
                         " weighted turnouts, above the cap of " + std::to_string(cap_) +
                         "; use Monte Carlo or raise --cap"),
      log2_support(log2_support_),
      cap(cap_) {}

namespace {

const Partition& partition_of(const Schedule& sch, VoterId h) {
  auto it = sch.by_voter.find(h);
  if (it == sch.by_voter.end()) {
    throw std::invalid_argument("schedule has no partition for voter " + std::to_string(h));
  }
  return it->second;
}

bool degenerate(const Rational& p) { return p == 0 || p == 1; }

struct VoterCoins {
  VoterId voter;
  const Partition* partition;
  // probability of each heads-pattern over the voter's blocks
  std::vector<Rational> pattern_probability;
};

class Enumerator {
 public:
  Enumerator(std::vector<VoterCoins> coins, Turnout base, const TurnoutVisitor& visit)
      : coins_(std::move(coins)), current_(std::move(base)), visit_(visit) {}

  void run() { descend(0, Rational(1)); }

 private:
  void descend(std::size_t k, const Rational& probability) {
    if (k == coins_.size()) {
      visit_(current_, probability);
      return;
    }
    const VoterCoins& vc = coins_[k];
    const auto& blocks = vc.partition->blocks;
    for (std::size_t pattern = 0; pattern < vc.pattern_probability.size(); ++pattern) {
      set_pattern(vc.voter, blocks, pattern, true);
      descend(k + 1, probability * vc.pattern_probability[pattern]);
      set_pattern(vc.voter, blocks, pattern, false);
    }
  }

  void set_pattern(VoterId h, const std::vector<Block>& blocks, std::size_t pattern, bool on) {
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      if (!((pattern >> b) & 1U)) continue;
      for (ElectionId l : blocks[b]) {
        if (on) {
          current_.insert(h, l);
        } else {
          current_.erase(h, l);
        }
      }
    }
  }

  std::vector<VoterCoins> coins_;
  Turnout current_;
  const TurnoutVisitor& visit_;
};

}  // namespace

double log2_support_size(const Schedule& sch, std::span<const Voter> voters) {
  double coins = 0;
  for (const Voter& v : voters) {
    if (!degenerate(v.turnout)) coins += static_cast<double>(partition_of(sch, v.id).blocks.size());
  }
  return coins;
}

Turnout sample_turnout(const Schedule& sch, std::span<const Voter> voters,
                       std::size_t election_count, SplitMix64& rng) {
  Turnout t(voters.size(), election_count);
  for (const Voter& v : voters) {
    const BernoulliThreshold coin(v.turnout);
    for (const Block& block : partition_of(sch, v.id).blocks) {
      if (coin(rng)) {
        for (ElectionId l : block) t.insert(v.id, l);
      }
    }
  }
  return t;
}

void for_each_turnout(const Schedule& sch, std::span<const Voter> voters,
                      std::size_t election_count, const TurnoutVisitor& visit,
                      std::uint64_t cap) {
  const double log2_support = log2_support_size(sch, voters);
  if (log2_support >= 63 || (std::uint64_t{1} << static_cast<unsigned>(log2_support)) > cap) {
    throw EnumerationCapExceeded(log2_support, cap);
  }

  Turnout base(voters.size(), election_count);
  std::vector<VoterCoins> coins;
  for (const Voter& v : voters) {
    const Partition& partition = partition_of(sch, v.id);
    if (v.turnout == 0) continue;
    if (v.turnout == 1) {
      for (const Block& b : partition.blocks) {
        for (ElectionId l : b) base.insert(v.id, l);
      }
      continue;
    }
    const std::size_t k = partition.blocks.size();
    const Rational p = v.turnout;
    const Rational q = 1 - p;
    std::vector<Rational> probs(std::size_t{1} << k);
    for (std::size_t pattern = 0; pattern < probs.size(); ++pattern) {
      Rational pr(1);
      for (std::size_t b = 0; b < k; ++b) pr *= ((pattern >> b) & 1U) ? p : q;
      probs[pattern] = pr;
    }
    coins.push_back({v.id, &partition, std::move(probs)});
  }
  Enumerator(std::move(coins), std::move(base), visit).run();
}

std::vector<WeightedTurnout> enumerate_turnouts(const Schedule& sch,
                                                std::span<const Voter> voters,
                                                std::size_t election_count,
                                                std::uint64_t cap) {
  std::vector<WeightedTurnout> out;
  for_each_turnout(
      sch, voters, election_count,
      [&](const Turnout& t, const Rational& pr) { out.push_back({t, pr}); }, cap);
  return out;
}

Rational turnout_probability(const Turnout& t, const Schedule& sch,
                             std::span<const Voter> voters) {
  Rational probability(1);
  for (const Voter& v : voters) {
    for (const Block& block : partition_of(sch, v.id).blocks) {
      std::size_t present = 0;
      for (ElectionId l : block) present += t.contains(v.id, l) ? 1 : 0;
      if (present != 0 && present != block.size()) return Rational(0);
      probability *= present ? v.turnout : Rational(1 - v.turnout);
      if (probability == 0) return probability;
    }
  }
  return probability;
}

}  // namespace sweeplab
