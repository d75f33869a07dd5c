#include "sweeplab/model.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

namespace sweeplab {

Schedule uniform_schedule(const Partition& partition, std::size_t voter_count) {
  Schedule s;
  for (std::size_t h = 0; h < voter_count; ++h) {
    s.by_voter.emplace(static_cast<VoterId>(h), partition);
  }
  return s;
}

std::size_t contender_count(const Scenario& s) {
  return s.pooling ? s.pooling->contender_names.size() : s.parties.size();
}

std::string contender_name(const Scenario& s, PartyId contender) {
  if (s.pooling) return s.pooling->contender_names.at(contender);
  return s.parties.at(contender);
}

namespace {

// Empty string when the partition is valid, else a description.
std::string partition_problem(const Partition& p, std::size_t election_count) {
  std::vector<int> seen(election_count, 0);
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    const Block& block = p.blocks[b];
    if (block.empty()) return "block " + std::to_string(b) + " is empty";
    for (ElectionId e : block) {
      if (e >= election_count) {
        return "election " + std::to_string(e) + " is out of range";
      }
      if (seen[e]++) return "election " + std::to_string(e) + " appears in overlapping blocks";
    }
  }
  for (std::size_t e = 0; e < election_count; ++e) {
    if (!seen[e]) return "election " + std::to_string(e) + " is not covered";
  }
  return {};
}

}  // namespace

Partition canonicalize_partition(const Partition& p, std::size_t election_count) {
  if (auto problem = partition_problem(p, election_count); !problem.empty()) {
    throw std::invalid_argument("malformed partition: " + problem);
  }
  Partition out = p;
  for (Block& b : out.blocks) std::sort(b.begin(), b.end());
  std::sort(out.blocks.begin(), out.blocks.end(),
            [](const Block& a, const Block& b) { return a.front() < b.front(); });
  return out;
}

Schedule canonicalize_schedule(const Schedule& sch, std::size_t election_count) {
  Schedule out;
  for (const auto& [voter, partition] : sch.by_voter) {
    try {
      out.by_voter.emplace(voter, canonicalize_partition(partition, election_count));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("voter " + std::to_string(voter) + ": " + e.what());
    }
  }
  return out;
}

std::vector<std::string> validate_schedule(const Schedule& sch, std::size_t voter_count,
                                           std::size_t election_count) {
  std::vector<std::string> out;
  for (std::size_t h = 0; h < voter_count; ++h) {
    if (!sch.by_voter.count(static_cast<VoterId>(h))) {
      out.push_back("voter " + std::to_string(h) + ": no partition");
    }
  }
  for (const auto& [voter, partition] : sch.by_voter) {
    if (voter >= voter_count) {
      out.push_back("voter " + std::to_string(voter) + ": unknown voter id");
      continue;
    }
    if (auto problem = partition_problem(partition, election_count); !problem.empty()) {
      out.push_back("voter " + std::to_string(voter) + ": partition " + problem);
    }
  }
  return out;
}

std::vector<std::string> validate_scenario(const Scenario& s,
                                           std::span<const Schedule> schedules) {
  std::vector<std::string> out;
  const std::size_t parties = s.parties.size();
  const std::size_t m = s.voters.size();
  const std::size_t n = s.elections.size();

  if (parties == 0) out.push_back("parties: at least one party is required");
  {
    std::set<std::string> names;
    for (std::size_t i = 0; i < parties; ++i) {
      if (!names.insert(s.parties[i]).second) {
        out.push_back("party " + std::to_string(i) + ": duplicate name '" + s.parties[i] + "'");
      }
    }
  }

  if (m == 0) out.push_back("voters: at least one voter is required");
  for (std::size_t i = 0; i < m; ++i) {
    const Voter& v = s.voters[i];
    const std::string who = "voter " + std::to_string(i);
    if (v.id != i) out.push_back(who + ": id " + std::to_string(v.id) + " is not dense");
    if (v.party >= parties) {
      out.push_back(who + ": preferred_party " + std::to_string(v.party) + " is out of range");
    }
    if (v.turnout < 0 || v.turnout > 1) {
      out.push_back(who + ": turnout_prob " + to_fraction_string(v.turnout) +
                    " is outside [0,1]");
    }
  }

  if (n == 0) out.push_back("elections: at least one election is required");
  for (std::size_t i = 0; i < n; ++i) {
    const ElectionSpec& e = s.elections[i];
    const std::string which = "election " + std::to_string(i);
    if (e.id != i) out.push_back(which + ": id " + std::to_string(e.id) + " is not dense");
    if (e.rule.is_pr() && e.rule.seats < 1) out.push_back(which + ": seats must be >= 1");
    if (e.eligibility) {
      std::set<VoterId> seen;
      for (VoterId h : *e.eligibility) {
        if (h >= m) {
          out.push_back(which + ": eligibility names unknown voter " + std::to_string(h));
        } else if (!seen.insert(h).second) {
          out.push_back(which + ": eligibility lists voter " + std::to_string(h) + " twice");
        }
      }
    }
  }

  if (s.alliances) {
    std::vector<int> covered(parties, 0);
    for (std::size_t a = 0; a < s.alliances->alliances.size(); ++a) {
      const Alliance& al = s.alliances->alliances[a];
      const std::string which = "alliance " + std::to_string(a);
      if (al.members.empty()) out.push_back(which + ": no members");
      for (PartyId p : al.members) {
        if (p >= parties) {
          out.push_back(which + ": member " + std::to_string(p) + " is out of range");
        } else if (covered[p]++) {
          out.push_back(which + ": party " + std::to_string(p) + " is in more than one alliance");
        }
      }
      if (!al.type_by_election.empty()) {
        if (al.type_by_election.size() != n) {
          out.push_back(which + ": per-election types do not cover every election");
        }
        for (AllianceType t : al.type_by_election) {
          if (t != al.type) {
            out.push_back(which + ": type varies across elections");
            break;
          }
        }
      }
    }
    for (std::size_t p = 0; p < parties; ++p) {
      if (!covered[p]) out.push_back("alliances: party " + std::to_string(p) + " is not covered");
    }
  }
  if (s.pooling) {
    if (s.pooling->contender_of_party.size() != parties) {
      out.push_back("pooling: contender map does not cover every party");
    }
    for (PartyId c : s.pooling->contender_of_party) {
      if (c >= s.pooling->contender_names.size()) {
        out.push_back("pooling: contender " + std::to_string(c) + " is out of range");
      }
    }
  }

  for (std::size_t k = 0; k < schedules.size(); ++k) {
    for (const std::string& v : validate_schedule(schedules[k], m, n)) {
      out.push_back("schedule " + std::to_string(k) + ": " + v);
    }
  }
  return out;
}

}  // namespace sweeplab
