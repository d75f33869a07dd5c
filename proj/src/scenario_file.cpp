#include "sweeplab/scenario_file.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace sweeplab {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ScenarioFileError(where + ": " + what);
}

void only_keys(const json& obj, const std::string& where, std::set<std::string> allowed) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) fail(where, "unknown key '" + key + "'");
  }
}

const json& required(const json& obj, const std::string& key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, "missing key '" + key + "'");
  return *it;
}

std::string as_string(const json& v, const std::string& where) {
  if (!v.is_string()) fail(where, "expected a string");
  return v.get<std::string>();
}

std::uint64_t as_count(const json& v, const std::string& where) {
  if (!v.is_number_unsigned()) fail(where, "expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

std::vector<std::string> as_names(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected a list of names");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_string(v[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

NamedPartition as_partition(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected a list of blocks");
  NamedPartition out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_names(v[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Rational as_probability(const json& v, const std::string& where) {
  try {
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number_integer()) return Rational(v.get<long long>());
    if (v.is_number_float()) return rational_from_decimal(v.get<double>());
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
  fail(where, "expected a probability (\"num/den\", decimal string or number)");
}

AllianceType as_alliance_type(const json& v, const std::string& where) {
  const std::string s = as_string(v, where);
  if (s == "pre_poll") return AllianceType::pre_poll;
  if (s == "post_poll") return AllianceType::post_poll;
  fail(where, "alliance type must be pre_poll or post_poll, got '" + s + "'");
}

std::string alliance_type_name(AllianceType t) {
  return t == AllianceType::pre_poll ? "pre_poll" : "post_poll";
}

WinRuleSpec as_rule(const json& e, const std::string& where) {
  WinRuleSpec rule;
  const std::string kind = as_string(required(e, "rule", where), where + ".rule");
  if (kind == "fptp") {
    rule.kind = RuleKind::fptp;
    if (e.contains("seats") || e.contains("rounding")) {
      fail(where, "fptp elections take no seats or rounding");
    }
    return rule;
  }
  if (kind == "pr_most_seats") {
    rule.kind = RuleKind::pr_most_seats;
  } else if (kind == "pr_strict_majority") {
    rule.kind = RuleKind::pr_strict_majority;
  } else {
    fail(where + ".rule", "unknown rule '" + kind +
                              "' (expected fptp, pr_most_seats or pr_strict_majority)");
  }
  const std::uint64_t seats = as_count(required(e, "seats", where), where + ".seats");
  if (seats < 1 || seats > 100000) fail(where + ".seats", "must be between 1 and 100000");
  rule.seats = static_cast<std::uint32_t>(seats);
  const std::string rounding =
      e.contains("rounding") ? as_string(e["rounding"], where + ".rounding") : "dhondt";
  if (rounding == "dhondt") {
    rule.rounding = Rounding::dhondt;
  } else if (rounding == "hare") {
    rule.rounding = Rounding::hare;
  } else {
    fail(where + ".rounding", "unknown rounding '" + rounding + "' (expected dhondt or hare)");
  }
  return rule;
}

std::string rule_kind_name(RuleKind k) {
  switch (k) {
    case RuleKind::fptp:
      return "fptp";
    case RuleKind::pr_most_seats:
      return "pr_most_seats";
    case RuleKind::pr_strict_majority:
      return "pr_strict_majority";
  }
  return "fptp";
}

}  // namespace

ScenarioFile parse_scenario_file(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioFileError(std::string("scenario file is not valid JSON: ") + e.what());
  }
  only_keys(doc, "scenario",
            {"name", "parties", "voters", "elections", "schedules", "alliances", "analysis"});
  ScenarioFile file;
  if (doc.contains("name")) file.name = as_string(doc["name"], "name");
  file.parties = as_names(required(doc, "parties", "scenario"), "parties");

  const json& voters = required(doc, "voters", "scenario");
  if (!voters.is_array()) fail("voters", "expected a list");
  for (std::size_t i = 0; i < voters.size(); ++i) {
    const std::string where = "voters[" + std::to_string(i) + "]";
    only_keys(voters[i], where, {"name", "party", "p", "count"});
    VoterEntry v;
    if (voters[i].contains("name")) v.name = as_string(voters[i]["name"], where + ".name");
    v.party = as_string(required(voters[i], "party", where), where + ".party");
    v.p = as_probability(required(voters[i], "p", where), where + ".p");
    if (voters[i].contains("count")) v.count = as_count(voters[i]["count"], where + ".count");
    file.voters.push_back(std::move(v));
  }

  const json& elections = required(doc, "elections", "scenario");
  if (!elections.is_array()) fail("elections", "expected a list");
  for (std::size_t i = 0; i < elections.size(); ++i) {
    const std::string where = "elections[" + std::to_string(i) + "]";
    only_keys(elections[i], where, {"name", "rule", "seats", "rounding", "eligibility"});
    ElectionEntry e;
    e.name = as_string(required(elections[i], "name", where), where + ".name");
    e.rule = as_rule(elections[i], "election '" + e.name + "'");
    if (elections[i].contains("eligibility")) {
      const json& el = elections[i]["eligibility"];
      if (!(el.is_string() && el.get<std::string>() == "all")) {
        e.eligibility = as_names(el, "election '" + e.name + "'.eligibility");
      }
    }
    file.elections.push_back(std::move(e));
  }

  const json& schedules = required(doc, "schedules", "scenario");
  if (!schedules.is_object()) fail("schedules", "expected an object keyed by schedule name");
  for (const auto& [name, body] : schedules.items()) {
    const std::string where = "schedule '" + name + "'";
    only_keys(body, where, {"partition", "cohorts"});
    ScheduleEntry s;
    s.partition = as_partition(required(body, "partition", where), where + ".partition");
    if (body.contains("cohorts")) {
      if (!body["cohorts"].is_object()) fail(where + ".cohorts", "expected an object");
      for (const auto& [cohort, part] : body["cohorts"].items()) {
        s.cohorts.emplace(cohort, as_partition(part, where + ".cohorts." + cohort));
      }
    }
    file.schedules.emplace(name, std::move(s));
  }

  if (doc.contains("alliances")) {
    const json& alliances = doc["alliances"];
    if (!alliances.is_array()) fail("alliances", "expected a list");
    std::vector<AllianceEntry> list;
    for (std::size_t i = 0; i < alliances.size(); ++i) {
      const std::string where = "alliances[" + std::to_string(i) + "]";
      only_keys(alliances[i], where, {"name", "members", "type", "type_by_election"});
      AllianceEntry a;
      a.name = as_string(required(alliances[i], "name", where), where + ".name");
      a.members = as_names(required(alliances[i], "members", where), where + ".members");
      a.type = as_alliance_type(required(alliances[i], "type", where), where + ".type");
      if (alliances[i].contains("type_by_election")) {
        const json& tbe = alliances[i]["type_by_election"];
        if (!tbe.is_object()) fail(where + ".type_by_election", "expected an object");
        for (const auto& [election, t] : tbe.items()) {
          a.type_by_election.emplace(election,
                                     as_alliance_type(t, where + ".type_by_election." + election));
        }
      }
      list.push_back(std::move(a));
    }
    file.alliances = std::move(list);
  }

  if (doc.contains("analysis")) {
    const json& a = doc["analysis"];
    only_keys(a, "analysis", {"method", "samples", "seed", "compare", "party"});
    AnalysisEntry analysis;
    if (a.contains("method")) {
      const std::string m = as_string(a["method"], "analysis.method");
      if (m == "exact") {
        analysis.method = Method::exact;
      } else if (m == "mc") {
        analysis.method = Method::monte_carlo;
      } else {
        fail("analysis.method", "expected exact or mc, got '" + m + "'");
      }
    }
    if (a.contains("samples")) analysis.samples = as_count(a["samples"], "analysis.samples");
    if (a.contains("seed")) analysis.seed = as_count(a["seed"], "analysis.seed");
    if (a.contains("compare")) analysis.compare = as_names(a["compare"], "analysis.compare");
    if (a.contains("party")) analysis.party = as_string(a["party"], "analysis.party");
    file.analysis = std::move(analysis);
  }
  return file;
}

ScenarioFile load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioFileError("cannot open scenario file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario_file(buffer.str());
}

std::string serialize_scenario_file(const ScenarioFile& file) {
  json doc;
  doc["name"] = file.name;
  doc["parties"] = file.parties;
  doc["voters"] = json::array();
  for (const VoterEntry& v : file.voters) {
    json e{{"party", v.party}, {"p", to_fraction_string(v.p)}, {"count", v.count}};
    if (!v.name.empty()) e["name"] = v.name;
    doc["voters"].push_back(std::move(e));
  }
  doc["elections"] = json::array();
  for (const ElectionEntry& e : file.elections) {
    json j{{"name", e.name}, {"rule", rule_kind_name(e.rule.kind)}};
    if (e.rule.is_pr()) {
      j["seats"] = e.rule.seats;
      j["rounding"] = e.rule.rounding == Rounding::dhondt ? "dhondt" : "hare";
    }
    if (e.eligibility) j["eligibility"] = *e.eligibility;
    doc["elections"].push_back(std::move(j));
  }
  doc["schedules"] = json::object();
  for (const auto& [name, s] : file.schedules) {
    json j{{"partition", s.partition}};
    if (!s.cohorts.empty()) j["cohorts"] = s.cohorts;
    doc["schedules"][name] = std::move(j);
  }
  if (file.alliances) {
    doc["alliances"] = json::array();
    for (const AllianceEntry& a : *file.alliances) {
      json j{{"name", a.name}, {"members", a.members}, {"type", alliance_type_name(a.type)}};
      if (!a.type_by_election.empty()) {
        json tbe = json::object();
        for (const auto& [election, t] : a.type_by_election) tbe[election] = alliance_type_name(t);
        j["type_by_election"] = std::move(tbe);
      }
      doc["alliances"].push_back(std::move(j));
    }
  }
  if (file.analysis) {
    const AnalysisEntry& a = *file.analysis;
    json j{{"method", method_name(a.method)}, {"party", a.party}};
    if (a.samples) j["samples"] = *a.samples;
    if (a.seed) j["seed"] = *a.seed;
    if (!a.compare.empty()) j["compare"] = a.compare;
    doc["analysis"] = std::move(j);
  }
  return doc.dump(2) + "\n";
}

namespace {

template <typename T>
std::map<std::string, T> index_names(const std::vector<std::string>& names,
                                     const std::string& what) {
  std::map<std::string, T> out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (!out.emplace(names[i], static_cast<T>(i)).second) {
      throw ScenarioFileError(what + " '" + names[i] + "' is declared twice");
    }
  }
  return out;
}

Partition resolve_partition(const NamedPartition& named,
                            const std::map<std::string, ElectionId>& elections,
                            const std::string& where) {
  Partition p;
  for (const auto& block : named) {
    Block b;
    for (const std::string& name : block) {
      auto it = elections.find(name);
      if (it == elections.end()) {
        throw ScenarioFileError(where + ": unknown election '" + name + "'");
      }
      b.push_back(it->second);
    }
    p.blocks.push_back(std::move(b));
  }
  try {
    return canonicalize_partition(p, elections.size());
  } catch (const std::invalid_argument& e) {
    throw ScenarioFileError(where + ": " + e.what());
  }
}

}  // namespace

LoadedScenario build_scenario(const ScenarioFile& file) {
  LoadedScenario out;
  Scenario& s = out.scenario;
  s.name = file.name;
  s.parties = file.parties;
  const auto party_ids = index_names<PartyId>(file.parties, "party");

  std::vector<std::string> election_names;
  for (const auto& e : file.elections) election_names.push_back(e.name);
  const auto election_ids = index_names<ElectionId>(election_names, "election");

  // voter ids per named cohort
  std::map<std::string, std::vector<VoterId>> cohort_members;
  for (std::size_t i = 0; i < file.voters.size(); ++i) {
    const VoterEntry& entry = file.voters[i];
    const std::string where =
        entry.name.empty() ? "voters[" + std::to_string(i) + "]" : "cohort '" + entry.name + "'";
    auto party = party_ids.find(entry.party);
    if (party == party_ids.end()) {
      throw ScenarioFileError(where + ": unknown party '" + entry.party + "'");
    }
    if (entry.count < 1) throw ScenarioFileError(where + ": count must be >= 1");
    if (!entry.name.empty() && cohort_members.count(entry.name)) {
      throw ScenarioFileError(where + ": cohort name is declared twice");
    }
    std::vector<VoterId>& ids = cohort_members[entry.name.empty() ? std::string() : entry.name];
    for (std::uint64_t k = 0; k < entry.count; ++k) {
      const auto id = static_cast<VoterId>(s.voters.size());
      s.voters.push_back({id, party->second, entry.p});
      out.voter_entry_of.push_back(entry.name);
      if (!entry.name.empty()) ids.push_back(id);
    }
  }
  cohort_members.erase(std::string());

  for (std::size_t i = 0; i < file.elections.size(); ++i) {
    const ElectionEntry& entry = file.elections[i];
    ElectionSpec e;
    e.id = static_cast<ElectionId>(i);
    e.name = entry.name;
    e.rule = entry.rule;
    if (entry.eligibility) {
      std::vector<VoterId> ids;
      for (const std::string& cohort : *entry.eligibility) {
        auto it = cohort_members.find(cohort);
        if (it == cohort_members.end()) {
          throw ScenarioFileError("election '" + entry.name + "': unknown cohort '" + cohort +
                                  "' in eligibility");
        }
        ids.insert(ids.end(), it->second.begin(), it->second.end());
      }
      std::sort(ids.begin(), ids.end());
      e.eligibility = std::move(ids);
    }
    s.elections.push_back(std::move(e));
  }

  for (const auto& [name, entry] : file.schedules) {
    const std::string where = "schedule '" + name + "'";
    const Partition base = resolve_partition(entry.partition, election_ids, where);
    Schedule sch = uniform_schedule(base, s.voters.size());
    for (const auto& [cohort, named] : entry.cohorts) {
      auto it = cohort_members.find(cohort);
      if (it == cohort_members.end()) {
        throw ScenarioFileError(where + ": unknown cohort '" + cohort + "'");
      }
      const Partition p = resolve_partition(named, election_ids, where + " cohort '" + cohort + "'");
      for (VoterId h : it->second) sch.by_voter[h] = p;
    }
    out.schedules.emplace(name, std::move(sch));
  }

  if (file.alliances) {
    AllianceStructure structure;
    for (const AllianceEntry& entry : *file.alliances) {
      Alliance a;
      a.name = entry.name;
      a.type = entry.type;
      for (const std::string& member : entry.members) {
        auto it = party_ids.find(member);
        if (it == party_ids.end()) {
          throw ScenarioFileError("alliance '" + entry.name + "': unknown party '" + member + "'");
        }
        a.members.push_back(it->second);
      }
      if (!entry.type_by_election.empty()) {
        a.type_by_election.assign(s.elections.size(), entry.type);
        for (const auto& [election, t] : entry.type_by_election) {
          auto it = election_ids.find(election);
          if (it == election_ids.end()) {
            throw ScenarioFileError("alliance '" + entry.name + "': unknown election '" +
                                    election + "'");
          }
          a.type_by_election[it->second] = t;
        }
      }
      structure.alliances.push_back(std::move(a));
    }
    s.alliances = std::move(structure);
  }
  return out;
}

std::string partition_label(const Partition& p, const Scenario& s) {
  std::string out;
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    if (b) out += "|";
    for (std::size_t k = 0; k < p.blocks[b].size(); ++k) {
      if (k) out += "+";
      out += s.elections.at(p.blocks[b][k]).name;
    }
  }
  return out;
}

}  // namespace sweeplab
