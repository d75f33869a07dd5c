#include <doctest.h>

#include <numeric>

#include "oracles.hpp"
#include "sweeplab/win_rules.hpp"

using namespace sweeplab;

namespace {

WinProbVector q(std::initializer_list<std::pair<long, long>> v) {
  WinProbVector out;
  for (auto [a, b] : v) out.emplace_back(a, b);
  return out;
}

WinRuleSpec pr(RuleKind kind, std::uint32_t seats, Rounding r = Rounding::dhondt) {
  return {kind, seats, r};
}

Tally random_tally(SplitMix64& rng, std::size_t k, std::uint64_t max) {
  Tally t(k);
  for (auto& v : t) v = rng.below(max + 1);
  return t;
}

}  // namespace

TEST_CASE("plurality with coin-toss ties") {
  CHECK(fptp_win_probs({3, 1}) == q({{1, 1}, {0, 1}}));
  CHECK(fptp_win_probs({2, 2}) == q({{1, 2}, {1, 2}}));
  CHECK(fptp_win_probs({0, 0, 0}) == q({{1, 3}, {1, 3}, {1, 3}}));
  CHECK(fptp_win_probs({1, 4, 4}) == q({{0, 1}, {1, 2}, {1, 2}}));
}

TEST_CASE("apportionment examples") {
  CHECK(allocate_seats({100, 80, 30}, pr(RuleKind::pr_most_seats, 8)) == SeatVector{4, 3, 1});
  CHECK(oracle::dhondt({100, 80, 30}, 8) == std::vector<std::uint32_t>{4, 3, 1});
  CHECK(allocate_seats({47, 29, 24}, pr(RuleKind::pr_most_seats, 5, Rounding::hare)) ==
        SeatVector{2, 2, 1});
  CHECK(oracle::hare({47, 29, 24}, 5) == std::vector<std::uint32_t>{2, 2, 1});
  CHECK(allocate_seats({0, 0, 0}, pr(RuleKind::pr_most_seats, 4)) == SeatVector{2, 1, 1});
  CHECK(allocate_seats({5, 5}, pr(RuleKind::pr_most_seats, 3)) == SeatVector{2, 1});
}

TEST_CASE("seat allocation agrees with brute-force apportionment") {
  SplitMix64 rng(21);
  for (int i = 0; i < 3000; ++i) {
    const std::size_t k = 1 + rng.below(4);
    const std::uint32_t seats = static_cast<std::uint32_t>(1 + rng.below(9));
    const Tally t = random_tally(rng, k, rng.below(2) ? 12 : 200);
    CAPTURE(k);
    CAPTURE(seats);
    const SeatVector d = allocate_seats(t, pr(RuleKind::pr_most_seats, seats));
    const SeatVector h = allocate_seats(t, pr(RuleKind::pr_most_seats, seats, Rounding::hare));
    CHECK(std::vector<std::uint32_t>(d.begin(), d.end()) == oracle::dhondt(t, seats));
    CHECK(std::vector<std::uint32_t>(h.begin(), h.end()) == oracle::hare(t, seats));
    CHECK(std::accumulate(d.begin(), d.end(), 0U) == seats);
    CHECK(std::accumulate(h.begin(), h.end(), 0U) == seats);
  }
}

TEST_CASE("D'Hondt is invariant under scaling the votes") {
  SplitMix64 rng(8);
  for (int i = 0; i < 500; ++i) {
    const Tally t = random_tally(rng, 3, 50);
    const std::uint64_t c = 1 + rng.below(9);
    Tally scaled = t;
    for (auto& v : scaled) v *= c;
    const auto spec = pr(RuleKind::pr_most_seats, static_cast<std::uint32_t>(1 + rng.below(10)));
    CHECK(allocate_seats(t, spec) == allocate_seats(scaled, spec));
  }
}

TEST_CASE("PR win modes") {
  CHECK(pr_win_probs({4, 3, 1}, PrMode::most_seats) == q({{1, 1}, {0, 1}, {0, 1}}));
  CHECK(pr_win_probs({4, 3, 1}, PrMode::strict_majority) == q({{0, 1}, {0, 1}, {0, 1}}));
  CHECK(pr_win_probs({5, 3, 1}, PrMode::strict_majority) == q({{1, 1}, {0, 1}, {0, 1}}));
  CHECK(pr_win_probs({2, 2}, PrMode::most_seats) == q({{1, 2}, {1, 2}}));
  CHECK(make_rule(pr(RuleKind::pr_most_seats, 3))({0, 0, 0}) == q({{1, 3}, {1, 3}, {1, 3}}));
  CHECK(make_rule(pr(RuleKind::pr_strict_majority, 3))({0, 0}) == q({{0, 1}, {0, 1}}));
}

TEST_CASE("built-in rules agree with the reference rules") {
  SplitMix64 rng(4);
  oracle::RandomScenarioOptions opt;
  for (int i = 0; i < 2000; ++i) {
    const WinRuleSpec spec = oracle::random_rule(rng, opt);
    const Tally t = random_tally(rng, 1 + rng.below(3), 10);
    CHECK(make_rule(spec)(t) == oracle::win_probs(spec, t));
  }
}

TEST_CASE("tally counts eligible voters present") {
  std::vector<Voter> voters = {{0, 0, 1}, {1, 1, 1}, {2, 1, 1}, {3, 0, 1}};
  ElectionSpec e{0, "x", {}, std::vector<VoterId>{0, 1, 2}};
  VoterSet present = VoterSet::full(4);
  present.reset(2);
  CHECK(tally(present, e, voters, 2) == Tally{1, 1});
  e.eligibility.reset();
  CHECK(tally(present, e, voters, 2) == Tally{2, 1});
}

TEST_CASE("validators accept plurality and strict majority") {
  CHECK(validate_exclusivity(make_rule({}), 3, 8).ok);
  CHECK(validate_monotonicity(make_rule({}), 3, 8).ok);
  CHECK(validate_monotonicity(make_rule({}), 2, 12).ok);
  for (std::uint32_t seats = 1; seats <= 6; ++seats) {
    for (Rounding r : {Rounding::dhondt, Rounding::hare}) {
      const WinRule rule = make_rule(pr(RuleKind::pr_strict_majority, seats, r));
      CHECK(validate_exclusivity(rule, 3, 12).ok);
      CHECK(validate_monotonicity(rule, 3, 12).ok);
    }
    const WinRule two = make_rule(pr(RuleKind::pr_most_seats, seats));
    CHECK(validate_monotonicity(two, 2, 12).ok);
  }
}

TEST_CASE("most-seats with three parties can reward a rival") {
  // (0,2,2) over 5 seats seats B three times; one vote for A gives (1,2,2)
  // and C now ties for the lead.
  const WinRule rule = make_rule(pr(RuleKind::pr_most_seats, 5));
  CHECK(rule({0, 2, 2}) == q({{0, 1}, {1, 1}, {0, 1}}));
  CHECK(rule({1, 2, 2}) == q({{0, 1}, {1, 2}, {1, 2}}));
  const RuleCheck c = validate_monotonicity(rule, 3, 12);
  CHECK_FALSE(c.ok);
  REQUIRE(c.counterexample);
  CHECK(*c.counterexample == Tally{0, 2, 2});
  CHECK(c.party == PartyId{0});
  CHECK(validate_exclusivity(rule, 3, 12).ok);
}

TEST_CASE("planted broken rules are rejected") {
  const WinRule generous = [](const Tally& t) { return WinProbVector(t.size(), Rational(7, 10)); };
  const RuleCheck e = validate_exclusivity(generous, 2, 3);
  CHECK_FALSE(e.ok);
  CHECK(*e.counterexample == Tally{0, 0});

  const WinRule odd = [](const Tally& t) {
    WinProbVector w(t.size(), Rational(0));
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i] % 2 == 1) {
        w[i] = 1;
        break;
      }
    }
    return w;
  };
  const RuleCheck m = validate_monotonicity(odd, 2, 4);
  CHECK_FALSE(m.ok);
  REQUIRE(m.counterexample);
  CHECK(m.detail.find("party") != std::string::npos);
}

TEST_CASE("post-poll pooling") {
  const Pooling pooling{{"AB", "C"}, {0, 0, 1}};
  const WinRuleSpec spec = pr(RuleKind::pr_most_seats, 4);
  CHECK(allocate_seats({50, 30, 40}, spec) == SeatVector{2, 1, 1});
  CHECK(make_rule(spec, &pooling)({50, 30, 40}) == q({{1, 1}, {0, 1}}));
  // plurality sums member wins
  CHECK(make_rule({}, &pooling)({3, 3, 2}) == q({{1, 1}, {0, 1}}));
  CHECK(make_rule({}, &pooling)({3, 1, 3}) == q({{1, 2}, {1, 2}}));
}

namespace {

Scenario small_scenario(std::vector<std::string> parties, std::vector<PartyId> prefs,
                        std::vector<WinRuleSpec> rules) {
  Scenario s;
  s.parties = std::move(parties);
  for (std::size_t h = 0; h < prefs.size(); ++h) {
    s.voters.push_back({static_cast<VoterId>(h), prefs[h], Rational(1, 2)});
  }
  for (std::size_t l = 0; l < rules.size(); ++l) {
    s.elections.push_back({static_cast<ElectionId>(l), "e" + std::to_string(l), rules[l],
                           std::nullopt});
  }
  return s;
}

}  // namespace

TEST_CASE("the trivial alliance structure changes nothing") {
  SplitMix64 rng(17);
  oracle::RandomScenarioOptions opt;
  for (int i = 0; i < 100; ++i) {
    const Scenario s = oracle::random_scenario(rng, opt);
    for (AllianceType type : {AllianceType::pre_poll, AllianceType::post_poll}) {
      AllianceStructure a;
      for (PartyId p = 0; p < s.parties.size(); ++p) a.alliances.push_back({s.parties[p], {p}, type, {}});
      const Scenario t = alliance_transform(s, a);
      REQUIRE(contender_count(t) == s.parties.size());
      for (ElectionId l = 0; l < s.elections.size(); ++l) {
        for (std::uint32_t mask = 0; mask < (1U << s.voters.size()); ++mask) {
          VoterSet present(s.voters.size());
          for (std::size_t h = 0; h < s.voters.size(); ++h) {
            if ((mask >> h) & 1U) present.set(h);
          }
          for (PartyId c = 0; c < s.parties.size(); ++c) {
            CHECK(win_prob_function(s, l, c)(present) == win_prob_function(t, l, c)(present));
          }
        }
      }
    }
  }
}

TEST_CASE("pre-poll alliances merge supporters") {
  Scenario s = small_scenario({"A", "B", "C"}, {0, 1, 2, 2}, {{}});
  AllianceStructure a;
  a.alliances = {{"AB", {0, 1}, AllianceType::pre_poll, {}}, {"C", {2}, AllianceType::pre_poll, {}}};
  const Scenario t = alliance_transform(s, a);
  CHECK(t.parties == std::vector<std::string>{"AB", "C"});
  CHECK(t.voters[1].party == 0);
  CHECK(t.voters[2].party == 1);
  VoterSet all = VoterSet::full(4);
  CHECK(win_prob_function(t, 0, 0)(all) == Rational(1, 2));
}

TEST_CASE("alliance structures with varying types are rejected") {
  Scenario s = small_scenario({"A", "B"}, {0, 1}, {{}, {}});
  AllianceStructure a;
  a.alliances = {{"A", {0}, AllianceType::pre_poll, {AllianceType::pre_poll, AllianceType::post_poll}},
                 {"B", {1}, AllianceType::pre_poll, {}}};
  CHECK_THROWS_AS(alliance_transform(s, a), std::invalid_argument);
  a.alliances.pop_back();
  a.alliances[0].type_by_election.clear();
  CHECK_THROWS_AS(alliance_transform(s, a), std::invalid_argument);
}

TEST_CASE("alignment holds for plurality electorates") {
  SplitMix64 rng(31);
  oracle::RandomScenarioOptions opt;
  opt.allow_pr = false;
  opt.max_voters = 6;
  opt.allow_eligibility = true;
  for (int i = 0; i < 100; ++i) {
    const Scenario s = oracle::random_scenario(rng, opt);
    for (PartyId c = 0; c < s.parties.size(); ++c) CHECK(check_alignment(s, c).ok);
  }
}

TEST_CASE("alignment failure carries a witness") {
  const Scenario s =
      small_scenario({"A", "B", "C"}, {0, 0, 1, 1, 2, 2}, {pr(RuleKind::pr_most_seats, 5)});
  const AlignmentCheck c = check_alignment(s, 2);
  CHECK_FALSE(c.ok);
  REQUIRE(c.witness);
  const auto& w = *c.witness;
  CHECK(s.voters[w.voter].party != 2);
  VoterSet before(6), after(6);
  for (VoterId h : w.subset) {
    before.set(h);
    after.set(h);
  }
  after.set(w.voter);
  const auto f = win_prob_function(s, w.election, 2);
  CHECK(f(after) > f(before));
}

TEST_CASE("alignment for post-poll alliance contenders") {
  const Scenario s = small_scenario({"P", "Q", "R"}, {0, 0, 1, 2, 2},
                                    {pr(RuleKind::pr_most_seats, 4), {}});
  AllianceStructure a;
  a.alliances = {{"PQ", {0, 1}, AllianceType::post_poll, {}}, {"R", {2}, AllianceType::post_poll, {}}};
  const Scenario t = alliance_transform(s, a);
  CHECK(check_alignment(t, 0).ok);
  CHECK(check_alignment(t, 1).ok);
}

TEST_CASE("compiled scenarios match the direct functions") {
  SplitMix64 rng(2);
  oracle::RandomScenarioOptions opt;
  opt.allow_eligibility = true;
  for (int i = 0; i < 50; ++i) {
    const Scenario s = oracle::random_scenario(rng, opt);
    const CompiledScenario cs(s);
    for (std::uint32_t mask = 0; mask < (1U << s.voters.size()); ++mask) {
      VoterSet present(s.voters.size());
      for (std::size_t h = 0; h < s.voters.size(); ++h) {
        if ((mask >> h) & 1U) present.set(h);
      }
      for (ElectionId l = 0; l < s.elections.size(); ++l) {
        CHECK(cs.tally(l, present) == tally(present, s.elections[l], s.voters, s.parties.size()));
        const auto w = cs.win_probs(l, present);
        for (PartyId c = 0; c < s.parties.size(); ++c) {
          CHECK(w[c] == win_prob_function(s, l, c)(present));
        }
      }
    }
  }
}

TEST_CASE("rule names") {
  CHECK(rule_name({}) == "fptp");
  CHECK(rule_name(pr(RuleKind::pr_strict_majority, 7, Rounding::hare)) == "pr_strict_majority/hare/7");
}
