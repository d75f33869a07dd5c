#pragma once

// Win-probability functions for the supported electoral systems, the
// alliance transform, and brute-force checks of the two win conditions:
// exclusivity (at most one winner) and vote monotonicity.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sweeplab/model.hpp"
#include "sweeplab/rational.hpp"
#include "sweeplab/turnout.hpp"

namespace sweeplab {

using Tally = std::vector<std::uint64_t>;
using SeatVector = std::vector<std::uint32_t>;
using WinProbVector = std::vector<Rational>;

/// Maps a per-party tally to per-contender win probabilities.
using WinRule = std::function<WinProbVector(const Tally&)>;

enum class PrMode { most_seats, strict_majority };

/// Votes per party from the eligible members of H_l.
Tally tally(const VoterSet& voters_present, const ElectionSpec& election,
            std::span<const Voter> voters, std::size_t party_count);

/// Plurality with a fair coin among the tied leaders. The all-zero tally is
/// a tie among every party.
WinProbVector fptp_win_probs(const Tally& t);

/// D'Hondt: the `seats` largest quotients v/(k+1). Hare: floor of the quota
/// share, remaining seats by largest remainder. Equal quotients or remainders
/// go to the lower party id. An all-zero tally is seated round-robin from
/// party 0.
SeatVector allocate_seats(const Tally& t, const WinRuleSpec& spec);

/// MostSeats: plurality on seats. StrictMajority: certain win for a party
/// holding more than half the seats, otherwise no winner.
WinProbVector pr_win_probs(const SeatVector& seats, PrMode mode);

/// The built-in rule as a tally -> win-probability map. With a pooling, tally
/// entries are per party and results per contender: post-poll FPTP sums the
/// members' win probabilities, post-poll PR pools member seats before the
/// win rule is applied. A zero-vote PR election is a full tie under
/// MostSeats and a non-win for all under StrictMajority.
WinRule make_rule(const WinRuleSpec& spec, const Pooling* pooling = nullptr);

/// Scenario over alliances. Pre-poll alliances become a single party that
/// their members' supporters vote for. Post-poll members keep their own
/// tallies and seats but are pooled into one contender. Rejects structures
/// that do not cover every party exactly once, and types that vary.
Scenario alliance_transform(const Scenario& s, const AllianceStructure& a);

/// The scenario the engines evaluate: alliance_transform applied when the
/// scenario declares alliances, else the scenario itself.
Scenario resolve_contenders(const Scenario& s);

/// Precomputed per-election masks for fast repeated evaluation. Built from
/// a scenario with alliances already resolved.
class CompiledScenario {
 public:
  explicit CompiledScenario(const Scenario& resolved);

  std::size_t voter_count() const { return voter_count_; }
  std::size_t election_count() const { return rules_.size(); }
  std::size_t party_count() const { return party_count_; }
  std::size_t contender_count() const { return contender_count_; }
  PartyId contender_of_voter(VoterId h) const { return contender_of_voter_[h]; }

  Tally tally(ElectionId l, const VoterSet& present) const;
  WinProbVector win_probs(ElectionId l, const Tally& t) const { return rules_[l](t); }
  WinProbVector win_probs(ElectionId l, const VoterSet& present) const {
    return rules_[l](tally(l, present));
  }

 private:
  std::size_t voter_count_;
  std::size_t party_count_;
  std::size_t contender_count_;
  std::vector<WinRule> rules_;
  // eligible supporters of each party, per election
  std::vector<std::vector<VoterSet>> supporters_;
  std::vector<PartyId> contender_of_voter_;
};

/// f_l for one contender: the probability it wins election l when exactly
/// the given voters turn out.
std::function<Rational(const VoterSet&)> win_prob_function(const Scenario& s, ElectionId l,
                                                           PartyId contender);

struct RuleCheck {
  bool ok = true;
  std::optional<Tally> counterexample;
  std::optional<PartyId> party;  // the party whose extra vote broke monotonicity
  std::string detail;
};

/// Win probabilities within [0,1] summing to at most 1, on every tally with
/// entries <= bound, scanned in lexicographic order.
RuleCheck validate_exclusivity(const WinRule& rule, std::size_t party_count,
                               std::uint64_t bound = 12);

/// rule(t + e_s)[s] >= rule(t)[s] and rule(t + e_s)[r] <= rule(t)[r] for
/// every rival r, over all t with t + e_s inside the bound. When tally
/// entries are pooled into contenders, `contender_of_party` maps them; the
/// rivals are then the other contenders.
RuleCheck validate_monotonicity(const WinRule& rule, std::size_t party_count,
                                std::uint64_t bound = 12,
                                std::span<const PartyId> contender_of_party = {});

struct AlignmentWitness {
  VoterId voter = 0;
  ElectionId election = 0;
  std::vector<VoterId> subset;  // S, not containing the voter
};

struct AlignmentCheck {
  bool ok = true;
  std::optional<AlignmentWitness> witness;
};

inline constexpr std::size_t kMaxAlignmentVoters = 12;

/// For every voter h and election l, f_l(S + h) - f_l(S) has the sign
/// dictated by whether h supports the contender, over all S not containing h.
AlignmentCheck check_alignment(const Scenario& s, PartyId contender,
                               std::size_t max_voters = kMaxAlignmentVoters);

std::string rule_name(const WinRuleSpec& spec);

}  // namespace sweeplab
