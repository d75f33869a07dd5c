#pragma once

// The turnout measure: one Bernoulli(p_h) coin per voter per block of the
// voter's partition; heads puts the voter in every election of that block.

#include <bit>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sweeplab/model.hpp"
#include "sweeplab/rational.hpp"
#include "sweeplab/rng.hpp"

namespace sweeplab {

/// Fixed-size bit set over voter ids, stored as 64-bit words.
class VoterSet {
 public:
  VoterSet() = default;
  explicit VoterSet(std::size_t size) : size_(size), words_((size + 63) / 64, 0) {}

  static VoterSet full(std::size_t size);
  static VoterSet from_members(std::size_t size, std::span<const VoterId> members);

  std::size_t size() const { return size_; }
  bool test(std::size_t h) const { return (words_[h >> 6] >> (h & 63)) & 1U; }
  void set(std::size_t h) { words_[h >> 6] |= std::uint64_t{1} << (h & 63); }
  void reset(std::size_t h) { words_[h >> 6] &= ~(std::uint64_t{1} << (h & 63)); }
  std::size_t count() const;
  bool empty() const { return count() == 0; }
  std::vector<VoterId> members() const;

  std::span<const std::uint64_t> words() const { return words_; }

  /// popcount(this & a & b)
  std::size_t count_and(const VoterSet& a, const VoterSet& b) const;

  bool operator==(const VoterSet&) const = default;

 private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

/// A subset of H x L, stored as one voter set per election.
class Turnout {
 public:
  Turnout() = default;
  Turnout(std::size_t voter_count, std::size_t election_count);

  static Turnout full(std::size_t voter_count, std::size_t election_count);
  static Turnout from_pairs(std::size_t voter_count, std::size_t election_count,
                            std::span<const std::pair<VoterId, ElectionId>> pairs);

  std::size_t voter_count() const { return voters_; }
  std::size_t election_count() const { return by_election_.size(); }

  bool contains(VoterId h, ElectionId l) const { return by_election_.at(l).test(h); }
  void insert(VoterId h, ElectionId l) { by_election_.at(l).set(h); }
  void erase(VoterId h, ElectionId l) { by_election_.at(l).reset(h); }

  const VoterSet& voters_in(ElectionId l) const { return by_election_[l]; }
  std::vector<std::pair<VoterId, ElectionId>> pairs() const;

  bool operator==(const Turnout&) const = default;

 private:
  std::size_t voters_ = 0;
  std::vector<VoterSet> by_election_;
};

/// Per-election voter sets (H_1..H_n).
std::vector<std::vector<VoterId>> votes_by_election(const Turnout& t);
/// Per-voter election sets (L_1..L_m).
std::vector<std::vector<ElectionId>> votes_by_voter(const Turnout& t);
Turnout turnout_from_election_view(std::size_t voter_count,
                                   const std::vector<std::vector<VoterId>>& by_election);
Turnout turnout_from_voter_view(std::size_t election_count,
                                const std::vector<std::vector<ElectionId>>& by_voter);

struct WeightedTurnout {
  Turnout turnout;
  Rational probability;
};

inline constexpr std::uint64_t kDefaultEnumerationCap = std::uint64_t{1} << 24;

class EnumerationCapExceeded : public std::runtime_error {
 public:
  EnumerationCapExceeded(double log2_support, std::uint64_t cap);
  double log2_support;
  std::uint64_t cap;
};

/// log2 of the number of turnouts with positive probability: voters with
/// p in {0,1} contribute nothing, others contribute |pi_h| coins.
double log2_support_size(const Schedule& sch, std::span<const Voter> voters);

/// Draws for voters in ascending id order, blocks in canonical order; one
/// rng draw per (voter, block) whatever p_h is.
Turnout sample_turnout(const Schedule& sch, std::span<const Voter> voters,
                       std::size_t election_count, SplitMix64& rng);

using TurnoutVisitor = std::function<void(const Turnout&, const Rational&)>;

/// Visits every turnout of positive probability exactly once. The turnout
/// reference is reused between calls. Throws EnumerationCapExceeded.
void for_each_turnout(const Schedule& sch, std::span<const Voter> voters,
                      std::size_t election_count, const TurnoutVisitor& visit,
                      std::uint64_t cap = kDefaultEnumerationCap);

std::vector<WeightedTurnout> enumerate_turnouts(const Schedule& sch,
                                                std::span<const Voter> voters,
                                                std::size_t election_count,
                                                std::uint64_t cap = kDefaultEnumerationCap);

/// Exact probability of t; zero when t splits one of a voter's blocks.
Rational turnout_probability(const Turnout& t, const Schedule& sch,
                             std::span<const Voter> voters);

}  // namespace sweeplab
