#pragma once

// Domain types shared by every engine. Voters, elections and parties are
// dense 0-based indices; names only exist in scenario files.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sweeplab/rational.hpp"

namespace sweeplab {

using PartyId = std::uint32_t;
using VoterId = std::uint32_t;
using ElectionId = std::uint32_t;

struct Voter {
  VoterId id = 0;
  PartyId party = 0;
  Rational turnout;  // probability of showing up on any poll date
};

enum class RuleKind { fptp, pr_most_seats, pr_strict_majority };
enum class Rounding { dhondt, hare };

struct WinRuleSpec {
  RuleKind kind = RuleKind::fptp;
  std::uint32_t seats = 0;  // PR variants only
  Rounding rounding = Rounding::dhondt;

  bool is_pr() const { return kind != RuleKind::fptp; }
  bool operator==(const WinRuleSpec&) const = default;
};

struct ElectionSpec {
  ElectionId id = 0;
  std::string name;
  WinRuleSpec rule;
  // nullopt means every voter counts. Ineligible voters may still turn out;
  // their ballots are discarded at tally time.
  std::optional<std::vector<VoterId>> eligibility;
};

using Block = std::vector<ElectionId>;

/// A set partition of the election ids {0..n-1}. Canonical form: members
/// ascending inside each block, blocks ordered by smallest member.
struct Partition {
  std::vector<Block> blocks;
  bool operator==(const Partition&) const = default;
};

/// Staggered polling schedule: one partition of the election set per voter.
struct Schedule {
  std::map<VoterId, Partition> by_voter;
  bool operator==(const Schedule&) const = default;
};

/// Every voter polls on the same partition.
Schedule uniform_schedule(const Partition& partition, std::size_t voter_count);

enum class AllianceType { pre_poll, post_poll };

struct Alliance {
  std::string name;
  std::vector<PartyId> members;
  AllianceType type = AllianceType::pre_poll;
  // Optional per-election type declarations. Anything other than a
  // constant sequence equal to `type` is rejected by the transform.
  std::vector<AllianceType> type_by_election;
};

struct AllianceStructure {
  std::vector<Alliance> alliances;
};

/// Post-poll pooling: the tally units (scenario parties) that are counted
/// and seated separately but whose wins are pooled into one contender.
struct Pooling {
  std::vector<std::string> contender_names;
  std::vector<PartyId> contender_of_party;
  bool operator==(const Pooling&) const = default;
};

struct Scenario {
  std::string name;
  std::vector<std::string> parties;
  std::vector<Voter> voters;
  std::vector<ElectionSpec> elections;
  std::optional<AllianceStructure> alliances;
  // Set only by alliance_transform.
  std::optional<Pooling> pooling;
};

std::size_t contender_count(const Scenario& s);
std::string contender_name(const Scenario& s, PartyId contender);

/// Every invariant violation in the scenario and, when given, the schedules
/// used with it. Ordered: parties, voters (by id), elections (by id),
/// alliances, schedules (by position, then voter id).
std::vector<std::string> validate_scenario(const Scenario& s,
                                           std::span<const Schedule> schedules = {});

/// Canonical form of every voter's partition. Idempotent; two schedules
/// describe the same per-voter partitions iff their canonical forms are
/// equal. Throws std::invalid_argument naming the voter when a partition
/// overlaps, leaves an election uncovered, or has an empty block.
Schedule canonicalize_schedule(const Schedule& sch, std::size_t election_count);

/// Canonical form of a single partition (same errors as above).
Partition canonicalize_partition(const Partition& p, std::size_t election_count);

/// Violations of a single schedule against m voters and n elections.
std::vector<std::string> validate_schedule(const Schedule& sch, std::size_t voter_count,
                                           std::size_t election_count);

}  // namespace sweeplab
