#include "sweeplab/cli.hpp"

#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "sweeplab/inequality.hpp"
#include "sweeplab/lattice.hpp"
#include "sweeplab/scenario_file.hpp"
#include "sweeplab/sweep.hpp"
#include "sweeplab/win_rules.hpp"

namespace sweeplab {

Scenario onoe_scenario(std::uint64_t per_side) {
  Scenario s;
  s.name = "onoe";
  s.parties = {"A", "B"};
  for (std::uint64_t i = 0; i < 2 * per_side; ++i) {
    s.voters.push_back({static_cast<VoterId>(i), i < per_side ? PartyId{0} : PartyId{1},
                        Rational(1, 2)});
  }
  s.elections.push_back({0, "national", {}, std::nullopt});
  s.elections.push_back({1, "state", {}, std::nullopt});
  return s;
}

Schedule onoe_simultaneous(std::uint64_t per_side) {
  Partition p;
  p.blocks = {{0, 1}};
  return uniform_schedule(p, 2 * per_side);
}

Schedule onoe_separate(std::uint64_t per_side) {
  Partition p;
  p.blocks = {{0}, {1}};
  return uniform_schedule(p, 2 * per_side);
}

namespace {

// One output field: text, or an integer / null for the records format.
struct Field {
  std::string text;
  enum class Kind { string, integer, null } kind = Kind::string;
};

Field str(std::string s) { return {std::move(s), Field::Kind::string}; }
Field integer(std::uint64_t v) { return {std::to_string(v), Field::Kind::integer}; }
Field null() { return {"", Field::Kind::null}; }

class TableWriter {
 public:
  TableWriter(std::ostream& out, bool records, std::vector<std::string> header)
      : out_(out), records_(records), header_(std::move(header)) {
    if (!records_) write_csv_line(header_);
  }

  void row(const std::vector<Field>& fields) {
    if (records_) {
      nlohmann::ordered_json j;
      for (std::size_t i = 0; i < header_.size(); ++i) {
        const Field& f = fields[i];
        if (f.kind == Field::Kind::null) {
          j[header_[i]] = nullptr;
        } else if (f.kind == Field::Kind::integer) {
          j[header_[i]] = std::stoull(f.text);
        } else {
          j[header_[i]] = f.text;
        }
      }
      out_ << j.dump() << "\n";
    } else {
      std::vector<std::string> cells;
      for (const Field& f : fields) cells.push_back(f.text);
      write_csv_line(cells);
    }
  }

 private:
  void write_csv_line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      const std::string& c = cells[i];
      if (c.find_first_of(",\"\n") != std::string::npos) {
        out_ << '"';
        for (char ch : c) {
          if (ch == '"') out_ << '"';
          out_ << ch;
        }
        out_ << '"';
      } else {
        out_ << c;
      }
    }
    out_ << '\n';
  }

  std::ostream& out_;
  bool records_;
  std::vector<std::string> header_;
};

const std::vector<std::string> kReportHeader = {
    "scenario", "schedule", "party", "probability", "exact", "method", "samples", "ci_half_width",
    "seed"};

constexpr const char* kAnyParty = "ANY";

std::vector<Field> report_fields(const std::string& scenario, const std::string& schedule,
                                 const std::string& party, const Estimate& e,
                                 const SweepReport& r) {
  const bool mc = r.method == Method::monte_carlo;
  return {str(scenario),
          str(schedule),
          str(party),
          str(format_probability(e.value)),
          e.exact ? str(to_fraction_string(*e.exact)) : null(),
          str(method_name(r.method)),
          mc ? integer(r.samples) : null(),
          mc ? str(format_probability(e.half_width)) : null(),
          mc ? integer(r.seed) : null()};
}

void write_report(TableWriter& w, const std::string& scenario, const std::string& schedule,
                  const SweepReport& r, const std::optional<PartyId>& focus) {
  for (std::size_t c = 0; c < r.per_party.size(); ++c) {
    if (focus && *focus != c) continue;
    w.row(report_fields(scenario, schedule, r.contenders[c], r.per_party[c], r));
  }
  if (!focus) w.row(report_fields(scenario, schedule, kAnyParty, r.any_party, r));
}

struct CommonFlags {
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> samples;
  std::string method;
  std::uint64_t cap = kDefaultEnumerationCap;
  unsigned workers = 0;
  std::string party;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool mc_flags, bool method_flag) {
  cmd->add_option("--format", flags.format, "Output format")
      ->check(CLI::IsMember({"csv", "records"}));
  cmd->add_option("--cap", flags.cap, "Exact enumeration cap (weighted turnouts)")
      ->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1} << 40));
  if (mc_flags) {
    cmd->add_option("--seed", flags.seed, "Master seed");
    cmd->add_option("--samples", flags.samples, "Monte Carlo samples")
        ->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1} << 40));
    cmd->add_option("--workers", flags.workers, "Worker threads (0 = hardware)");
  }
  if (method_flag) {
    cmd->add_option("--method", flags.method, "exact or mc")->check(CLI::IsMember({"exact", "mc"}));
  }
}

unsigned worker_count(unsigned requested) {
  if (requested) return requested;
  return std::max(1U, std::thread::hardware_concurrency());
}

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Session {
  ScenarioFile file;
  LoadedScenario loaded;
  std::vector<std::string> contenders;
};

// Exit code when the scenario is unusable, else nullopt.
std::optional<int> open_scenario(const std::string& path, Session& session,
                                 std::ostream& err) {
  try {
    session.file = load_scenario_file(path);
    session.loaded = build_scenario(session.file);
  } catch (const ScenarioFileError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::usage;
  }
  std::vector<Schedule> schedules;
  for (const auto& [name, s] : session.loaded.schedules) schedules.push_back(s);
  const auto problems = validate_scenario(session.loaded.scenario, schedules);
  if (!problems.empty()) {
    std::vector<std::string> names;
    for (const auto& [name, s] : session.loaded.schedules) names.push_back(name);
    for (std::string p : problems) {
      // refer to schedules by name rather than position
      if (p.rfind("schedule ", 0) == 0) {
        const auto space = p.find(':');
        const std::size_t index = std::stoul(p.substr(9, space - 9));
        p = "schedule '" + names.at(index) + "'" + p.substr(space);
      }
      err << "invalid scenario: " << p << "\n";
    }
    return exit_code::validation;
  }
  const Scenario resolved = resolve_contenders(session.loaded.scenario);
  for (std::size_t c = 0; c < contender_count(resolved); ++c) {
    session.contenders.push_back(contender_name(resolved, static_cast<PartyId>(c)));
  }
  return std::nullopt;
}

std::optional<PartyId> focus_of(const Session& session, const std::string& flag) {
  std::string party = flag;
  if (party.empty() && session.file.analysis) party = session.file.analysis->party;
  if (party.empty() || party == "all") return std::nullopt;
  for (std::size_t c = 0; c < session.contenders.size(); ++c) {
    if (session.contenders[c] == party) return static_cast<PartyId>(c);
  }
  throw UsageError("unknown party '" + party + "'");
}

const Schedule& schedule_named(const Session& session, const std::string& name) {
  auto it = session.loaded.schedules.find(name);
  if (it == session.loaded.schedules.end()) throw UsageError("unknown schedule '" + name + "'");
  return it->second;
}

EvaluationOptions evaluation_options(const Session* session, const CommonFlags& flags,
                                     Method default_method) {
  EvaluationOptions opt;
  opt.method = default_method;
  const AnalysisEntry* a =
      session && session->file.analysis ? &*session->file.analysis : nullptr;
  if (a) opt.method = a->method;
  if (flags.method == "exact") opt.method = Method::exact;
  if (flags.method == "mc") opt.method = Method::monte_carlo;
  opt.cap = flags.cap;
  opt.mc.samples = flags.samples.value_or(a && a->samples ? *a->samples : 100000);
  opt.mc.seed = flags.seed.value_or(a && a->seed ? *a->seed : 0);
  opt.mc.workers = worker_count(flags.workers);
  return opt;
}

int cmd_report(const std::string& path, const std::vector<std::string>& schedule_names,
               const CommonFlags& flags, Method method, std::ostream& out, std::ostream& err) {
  Session session;
  if (auto code = open_scenario(path, session, err)) return *code;
  const auto focus = focus_of(session, flags.party);
  EvaluationOptions opt = evaluation_options(&session, flags, method);
  opt.method = method;
  std::vector<std::string> names = schedule_names;
  if (names.empty()) {
    for (const auto& [name, s] : session.loaded.schedules) names.push_back(name);
  }
  for (const std::string& n : names) schedule_named(session, n);
  TableWriter w(out, flags.format == "records", kReportHeader);
  for (const std::string& n : names) {
    const SweepReport r = sweep_report(session.loaded.scenario, schedule_named(session, n), opt);
    write_report(w, session.file.name, n, r, focus);
  }
  return exit_code::ok;
}

int cmd_compare(const std::string& path, std::vector<std::string> names,
                const CommonFlags& flags, std::ostream& out, std::ostream& err) {
  Session session;
  if (auto code = open_scenario(path, session, err)) return *code;
  const auto focus = focus_of(session, flags.party);
  if (names.empty() && session.file.analysis) names = session.file.analysis->compare;
  if (names.size() != 2) throw UsageError("compare needs exactly two schedule names");
  const EvaluationOptions opt = evaluation_options(&session, flags, Method::exact);
  const ScheduleComparison cmp =
      compare_schedules(session.loaded.scenario, schedule_named(session, names[0]),
                        schedule_named(session, names[1]), opt);

  TableWriter w(out, flags.format == "records",
                {"scenario", "first", "second", "relation", "party", "first_probability",
                 "second_probability", "delta", "first_exact", "second_exact", "delta_exact",
                 "method", "samples", "seed", "violation"});
  const bool mc = opt.method == Method::monte_carlo;
  const bool comparable = cmp.relation != Coarseness::incomparable;
  auto emit = [&](const std::string& party, const Estimate& a, const Estimate& b,
                  const Estimate& d, std::optional<bool> violated) {
    w.row({str(session.file.name), str(names[0]), str(names[1]),
           str(coarseness_name(cmp.relation)), str(party), str(format_probability(a.value)),
           str(format_probability(b.value)), str(format_probability(d.value)),
           a.exact ? str(to_fraction_string(*a.exact)) : null(),
           b.exact ? str(to_fraction_string(*b.exact)) : null(),
           d.exact ? str(to_fraction_string(*d.exact)) : null(), str(method_name(opt.method)),
           mc ? integer(opt.mc.samples) : null(), mc ? integer(opt.mc.seed) : null(),
           violated ? str(*violated ? "yes" : "no") : null()});
  };
  for (std::size_t c = 0; c < cmp.deltas.size(); ++c) {
    if (focus && *focus != c) continue;
    const bool violated = std::find(cmp.violations.begin(), cmp.violations.end(), c) !=
                          cmp.violations.end();
    emit(cmp.first.contenders[c], cmp.first.per_party[c], cmp.second.per_party[c],
         cmp.deltas[c], comparable ? std::optional<bool>(violated) : std::nullopt);
  }
  if (!focus) {
    Estimate d;
    if (cmp.first.any_party.exact && cmp.second.any_party.exact) {
      d.exact = *cmp.second.any_party.exact - *cmp.first.any_party.exact;
      d.value = to_double(*d.exact);
    } else {
      d.value = cmp.second.any_party.value - cmp.first.any_party.value;
    }
    emit(kAnyParty, cmp.first.any_party, cmp.second.any_party, d, std::nullopt);
  }
  for (PartyId c : cmp.violations) {
    err << "violation: sweep probability of '" << cmp.first.contenders[c]
        << "' decreased toward the coarser schedule\n";
  }
  return cmp.violations.empty() ? exit_code::ok : exit_code::violation;
}

constexpr std::size_t kLatticeScanMaxElections = 6;

int cmd_lattice_scan(const std::string& path, const CommonFlags& flags, std::ostream& out,
                     std::ostream& err) {
  Session session;
  if (auto code = open_scenario(path, session, err)) return *code;
  const Scenario& s = session.loaded.scenario;
  const std::size_t n = s.elections.size();
  if (n > kLatticeScanMaxElections) {
    throw UsageError("lattice-scan supports at most " +
                     std::to_string(kLatticeScanMaxElections) + " elections");
  }
  const auto partitions = enumerate_partitions(n);
  std::vector<SweepReport> reports;
  TableWriter w(out, flags.format == "records", kReportHeader);
  for (const Partition& p : partitions) {
    reports.push_back(exact_sweep_report(s, uniform_schedule(p, s.voters.size()), flags.cap));
    write_report(w, session.file.name, partition_label(p, s), reports.back(), std::nullopt);
  }
  std::uint64_t pairs = 0, violations = 0;
  for (std::size_t i = 0; i < partitions.size(); ++i) {
    for (std::size_t j = 0; j < partitions.size(); ++j) {
      if (i == j || !is_coarser(partitions[i], partitions[j])) continue;
      ++pairs;
      for (std::size_t c = 0; c < reports[i].per_party.size(); ++c) {
        if (*reports[i].per_party[c].exact < *reports[j].per_party[c].exact) {
          ++violations;
          err << "violation: '" << reports[i].contenders[c] << "' sweep probability "
              << to_fraction_string(*reports[i].per_party[c].exact) << " under "
              << partition_label(partitions[i], s) << " is below "
              << to_fraction_string(*reports[j].per_party[c].exact) << " under finer "
              << partition_label(partitions[j], s) << "\n";
        }
      }
    }
  }
  out << "\n";
  TableWriter summary(out, flags.format == "records",
                      {"scenario", "partitions", "comparable_pairs", "violations"});
  summary.row({str(session.file.name), integer(partitions.size()), integer(pairs),
               integer(violations)});
  return violations ? exit_code::violation : exit_code::ok;
}

std::uint64_t default_bound(std::size_t parties) {
  std::uint64_t bound = 12;
  auto space = [&](std::uint64_t b) {
    double total = 1;
    for (std::size_t i = 0; i < parties; ++i) total *= static_cast<double>(b + 1);
    return total;
  };
  while (bound > 1 && space(bound) > 250000) --bound;
  return bound;
}

std::string tally_string(const Tally& t) {
  std::string s = "(";
  for (std::size_t i = 0; i < t.size(); ++i) s += (i ? "," : "") + std::to_string(t[i]);
  return s + ")";
}

int cmd_validate(const std::string& path, std::optional<std::uint64_t> bound_flag,
                 const CommonFlags& flags, std::ostream& out, std::ostream& err) {
  Session session;
  if (auto code = open_scenario(path, session, err)) return *code;
  const Scenario resolved = resolve_contenders(session.loaded.scenario);
  const std::size_t parties = resolved.parties.size();
  const std::uint64_t bound = bound_flag.value_or(default_bound(parties));
  const Pooling* pooling = resolved.pooling ? &*resolved.pooling : nullptr;
  std::vector<PartyId> contender_of;
  if (pooling) contender_of = pooling->contender_of_party;

  TableWriter w(out, flags.format == "records",
                {"scenario", "check", "election", "party", "bound", "status", "detail"});
  bool all_ok = true;
  for (const ElectionSpec& e : resolved.elections) {
    const WinRule rule = make_rule(e.rule, pooling);
    const RuleCheck excl = validate_exclusivity(rule, parties, bound);
    const RuleCheck mono = validate_monotonicity(rule, parties, bound, contender_of);
    for (const auto& [name, check] : {std::pair{"exclusivity", &excl}, {"monotonicity", &mono}}) {
      all_ok = all_ok && check->ok;
      w.row({str(session.file.name), str(name), str(e.name),
             check->party ? str(resolved.parties[*check->party]) : null(), integer(bound),
             str(check->ok ? "pass" : "fail"),
             check->ok ? str(rule_name(e.rule))
                       : str(tally_string(*check->counterexample) + ": " + check->detail)});
    }
  }
  for (std::size_t c = 0; c < session.contenders.size(); ++c) {
    if (resolved.voters.size() > kMaxAlignmentVoters) {
      w.row({str(session.file.name), str("alignment"), null(), str(session.contenders[c]),
             null(), str("skipped"),
             str("more than " + std::to_string(kMaxAlignmentVoters) + " voters")});
      continue;
    }
    const AlignmentCheck a = check_alignment(resolved, static_cast<PartyId>(c));
    all_ok = all_ok && a.ok;
    std::string detail;
    if (a.witness) {
      detail = "voter " + std::to_string(a.witness->voter) + ", S = {";
      for (std::size_t k = 0; k < a.witness->subset.size(); ++k) {
        detail += (k ? "," : "") + std::to_string(a.witness->subset[k]);
      }
      detail += "}";
    }
    w.row({str(session.file.name), str("alignment"),
           a.witness ? str(resolved.elections[a.witness->election].name) : null(),
           str(session.contenders[c]), null(), str(a.ok ? "pass" : "fail"),
           a.ok ? null() : str(detail)});
  }
  return all_ok ? exit_code::ok : exit_code::validation;
}

int cmd_ineq(const std::string& suite, std::uint64_t trials, std::uint64_t seed,
             const CommonFlags& flags, std::ostream& out) {
  std::vector<TrialSummary> results;
  if (suite == "all" || suite == "aligned") results.push_back(run_aligned_trials(trials, seed));
  if (suite == "all" || suite == "harris") results.push_back(run_harris_trials(trials, seed));
  if (suite == "all" || suite == "identity") {
    results.push_back(run_identity_trials(trials * 10, seed));
  }
  TableWriter w(out, flags.format == "records",
                {"suite", "trials", "checks", "failures", "min_margin", "seed", "first_failure"});
  bool ok = true;
  for (const TrialSummary& r : results) {
    ok = ok && r.failures == 0;
    w.row({str(r.suite), integer(r.trials), integer(r.checks), integer(r.failures),
           r.min_margin ? str(to_fraction_string(*r.min_margin)) : null(), integer(r.seed),
           r.first_failure.empty() ? null() : str(r.first_failure)});
  }
  return ok ? exit_code::ok : exit_code::violation;
}

int cmd_demo(const std::string& which, std::uint64_t per_side, const CommonFlags& flags,
             std::ostream& out) {
  if (which != "onoe") throw UsageError("unknown demo '" + which + "'");
  EvaluationOptions opt = evaluation_options(nullptr, flags, Method::monte_carlo);
  const Scenario s = onoe_scenario(per_side);
  TableWriter w(out, flags.format == "records", kReportHeader);
  write_report(w, s.name, "simultaneous", sweep_report(s, onoe_simultaneous(per_side), opt),
               std::nullopt);
  write_report(w, s.name, "separate", sweep_report(s, onoe_separate(per_side), opt),
               std::nullopt);
  return exit_code::ok;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Single-party sweep simulator and correlation-inequality checker", "sweeplab"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string path;
  std::vector<std::string> schedules;

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo sweep report");
  simulate->add_option("scenario", path, "Scenario file")->required();
  simulate->add_option("--schedule", schedules, "Schedule names (default: all)");
  simulate->add_option("--party", flags.party, "Party focus (default: all)");
  add_common(simulate, flags, true, false);

  auto* enumerate = app.add_subcommand("enumerate", "Exact sweep report");
  enumerate->add_option("scenario", path, "Scenario file")->required();
  enumerate->add_option("--schedule", schedules, "Schedule names (default: all)");
  enumerate->add_option("--party", flags.party, "Party focus (default: all)");
  add_common(enumerate, flags, false, false);

  auto* compare = app.add_subcommand("compare", "Compare two schedules");
  compare->add_option("scenario", path, "Scenario file")->required();
  compare->add_option("--schedules", schedules, "Two schedule names")->expected(2);
  compare->add_option("--party", flags.party, "Party focus (default: all)");
  add_common(compare, flags, true, true);

  auto* lattice = app.add_subcommand("lattice-scan", "Audit all uniform schedules");
  lattice->add_option("scenario", path, "Scenario file")->required();
  add_common(lattice, flags, false, false);

  std::optional<std::uint64_t> bound;
  auto* validate = app.add_subcommand("validate", "Check win-rule conditions and alignment");
  validate->add_option("scenario", path, "Scenario file")->required();
  validate->add_option("--bound", bound, "Largest vote count per party in the tally scan")
      ->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1000}));
  add_common(validate, flags, false, false);

  std::string suite = "all";
  std::uint64_t trials = 1000;
  std::uint64_t ineq_seed = 0;
  auto* ineq = app.add_subcommand("ineq", "Randomized exact inequality trials");
  ineq->add_option("--suite", suite)->check(
      CLI::IsMember({"all", "aligned", "harris", "identity"}));
  ineq->add_option("--trials", trials, "Trials per suite (identity runs ten times as many)")
      ->check(CLI::Range(std::uint64_t{1}, std::uint64_t{100000000}));
  ineq->add_option("--seed", ineq_seed, "Master seed");
  ineq->add_option("--format", flags.format)->check(CLI::IsMember({"csv", "records"}));

  std::string demo_name;
  std::uint64_t per_side = 5000;
  auto* demo = app.add_subcommand("demo", "Packaged scenarios");
  demo->add_option("name", demo_name, "Demo name (onoe)")->required()->check(
      CLI::IsMember({"onoe"}));
  demo->add_option("--voters-per-side", per_side, "Supporters per party")
      ->check(CLI::Range(std::uint64_t{1}, std::uint64_t{10000000}));
  add_common(demo, flags, true, true);

  std::vector<std::string> argv_storage;
  argv_storage.push_back("sweeplab");
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_code::ok : exit_code::usage;
  }

  try {
    if (simulate->parsed()) {
      return cmd_report(path, schedules, flags, Method::monte_carlo, out, err);
    }
    if (enumerate->parsed()) return cmd_report(path, schedules, flags, Method::exact, out, err);
    if (compare->parsed()) return cmd_compare(path, schedules, flags, out, err);
    if (lattice->parsed()) return cmd_lattice_scan(path, flags, out, err);
    if (validate->parsed()) return cmd_validate(path, bound, flags, out, err);
    if (ineq->parsed()) return cmd_ineq(suite, trials, ineq_seed, flags, out);
    if (demo->parsed()) return cmd_demo(demo_name, per_side, flags, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::usage;
  } catch (const EnumerationCapExceeded& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::usage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::validation;
  }
  return exit_code::usage;
}

}  // namespace sweeplab
