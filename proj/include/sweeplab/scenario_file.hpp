#pragma once

// JSON scenario documents. Voters are listed as entries that may stand for
// a cohort of identical voters; ids are assigned in file order. Schedules
// are lists of lists of election names, with optional per-cohort overrides.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sweeplab/model.hpp"
#include "sweeplab/rational.hpp"
#include "sweeplab/sweep.hpp"

namespace sweeplab {

class ScenarioFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using NamedPartition = std::vector<std::vector<std::string>>;

struct VoterEntry {
  std::string name;  // optional; required to reference the cohort elsewhere
  std::string party;
  Rational p;
  std::uint64_t count = 1;
  bool operator==(const VoterEntry&) const = default;
};

struct ElectionEntry {
  std::string name;
  WinRuleSpec rule;
  std::optional<std::vector<std::string>> eligibility;  // cohort names
  bool operator==(const ElectionEntry&) const = default;
};

struct ScheduleEntry {
  NamedPartition partition;
  std::map<std::string, NamedPartition> cohorts;
  bool operator==(const ScheduleEntry&) const = default;
};

struct AllianceEntry {
  std::string name;
  std::vector<std::string> members;
  AllianceType type = AllianceType::pre_poll;
  std::map<std::string, AllianceType> type_by_election;
  bool operator==(const AllianceEntry&) const = default;
};

struct AnalysisEntry {
  Method method = Method::exact;
  std::optional<std::uint64_t> samples;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> compare;
  std::string party = "all";
  bool operator==(const AnalysisEntry&) const = default;
};

struct ScenarioFile {
  std::string name = "scenario";
  std::vector<std::string> parties;
  std::vector<VoterEntry> voters;
  std::vector<ElectionEntry> elections;
  std::map<std::string, ScheduleEntry> schedules;
  std::optional<std::vector<AllianceEntry>> alliances;
  std::optional<AnalysisEntry> analysis;
  bool operator==(const ScenarioFile&) const = default;
};

/// Throws ScenarioFileError naming the offending entity; unknown keys are
/// errors at every level.
ScenarioFile parse_scenario_file(const std::string& text);
ScenarioFile load_scenario_file(const std::string& path);

/// Canonical JSON: sorted keys, two-space indent, probabilities as "num/den".
std::string serialize_scenario_file(const ScenarioFile& file);

struct LoadedScenario {
  Scenario scenario;
  std::map<std::string, Schedule> schedules;
  std::vector<std::string> voter_entry_of;  // per voter id, the entry name
};

/// Expands cohorts and resolves names. Throws ScenarioFileError on dangling
/// references.
LoadedScenario build_scenario(const ScenarioFile& file);

std::string partition_label(const Partition& p, const Scenario& s);

}  // namespace sweeplab
