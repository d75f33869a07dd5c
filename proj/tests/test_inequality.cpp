#include <doctest.h>

#include "oracles.hpp"
#include "sweeplab/inequality.hpp"
#include "sweeplab/lattice.hpp"

using namespace sweeplab;

namespace {

// Sum over all T in H x L of f_1(H_1)...f_n(H_n) mu(T).
Rational brute_expectation(const std::vector<LatticeFunction>& f, const Schedule& sch,
                           const std::vector<Rational>& p) {
  const std::size_t m = p.size(), n = f.size();
  Rational total = 0;
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << (m * n)); ++bits) {
    auto in = [&](std::size_t h, std::size_t l) { return (bits >> (h * n + l)) & 1U; };
    Rational mu = 1;
    for (std::size_t h = 0; h < m && mu != 0; ++h) {
      for (const auto& block : sch.by_voter.at(static_cast<VoterId>(h)).blocks) {
        const bool first = in(h, block.front());
        for (auto l : block) {
          if (in(h, l) != first) mu = 0;
        }
        mu *= first ? p[h] : 1 - p[h];
      }
    }
    if (mu == 0) continue;
    for (std::size_t l = 0; l < n; ++l) {
      std::uint32_t subset = 0;
      for (std::size_t h = 0; h < m; ++h) subset |= static_cast<std::uint32_t>(in(h, l)) << h;
      mu *= f[l](subset);
    }
    total += mu;
  }
  return total;
}

std::vector<Direction> random_directions(SplitMix64& rng, std::size_t m) {
  std::vector<Direction> d;
  for (std::size_t h = 0; h < m; ++h) d.push_back(rng.below(2) ? Direction::increasing : Direction::decreasing);
  return d;
}

std::vector<Rational> random_ps(SplitMix64& rng, std::size_t m) {
  std::vector<Rational> p;
  for (std::size_t h = 0; h < m; ++h) p.push_back(random_probability(rng));
  return p;
}

}  // namespace

TEST_CASE("lattice function basics") {
  const LatticeFunction one = LatticeFunction::indicator(2, 1);
  CHECK(one(0b10) == 1);
  CHECK(one(0b01) == 0);
  CHECK(one.increasing_at(1));
  CHECK(one.increasing_at(0));
  CHECK(one.decreasing_at(0));
  CHECK_FALSE(one.decreasing_at(1));
  CHECK(one.direction_witness(1, false) == std::uint32_t{0});
  CHECK(one.plus(Rational(2))(0) == 2);
  CHECK(one.times(LatticeFunction::indicator(2, 0))(0b11) == 1);
  CHECK(one.times(LatticeFunction::indicator(2, 0))(0b10) == 0);
  CHECK_THROWS_AS(LatticeFunction(2, std::vector<Rational>(3)), std::invalid_argument);
}

TEST_CASE("expectation agrees with the brute-force sum") {
  SplitMix64 rng(1);
  for (int i = 0; i < 200; ++i) {
    const std::size_t m = 1 + rng.below(3), n = 1 + rng.below(3);
    const AlignedTuple t = random_aligned_tuple(m, n, random_directions(rng, m), rng);
    const auto p = random_ps(rng, m);
    const Schedule sch = oracle::random_schedule(rng, m, n);
    CHECK(expectation(t.functions, sch, p) == brute_expectation(t.functions, sch, p));
  }
}

TEST_CASE("single-function expectation is the product measure") {
  const std::vector<Rational> p = {Rational(1, 3), Rational(1, 4)};
  const LatticeFunction f(2, {Rational(1), Rational(2), Rational(3), Rational(5)});
  const Rational want = Rational(2, 3) * Rational(3, 4) * 1 + Rational(1, 3) * Rational(3, 4) * 2 +
                        Rational(2, 3) * Rational(1, 4) * 3 + Rational(1, 3) * Rational(1, 4) * 5;
  CHECK(expectation(f, p) == want);
}

TEST_CASE("generated tuples are aligned and nonnegative") {
  SplitMix64 rng(2);
  for (int i = 0; i < 300; ++i) {
    const std::size_t m = 1 + rng.below(4), n = 1 + rng.below(3);
    const auto d = random_directions(rng, m);
    const AlignedTuple t = random_aligned_tuple(m, n, d, rng);
    CHECK_FALSE(aligned_tuple_violation(t));
    CHECK(t.functions.size() == n);
    CHECK(t.directions == d);
  }
}

TEST_CASE("misaligned tuples are rejected with a witness") {
  AlignedTuple t;
  t.functions = {LatticeFunction::indicator(1, 0), LatticeFunction::indicator(1, 0).plus(-1)};
  t.directions = {Direction::increasing};
  REQUIRE(aligned_tuple_violation(t));
  t.functions[1] = LatticeFunction::indicator(1, 0);
  t.directions = {Direction::decreasing};
  REQUIRE(aligned_tuple_violation(t));
  const std::vector<Rational> p = {Rational(1, 2)};
  const Schedule fine = uniform_schedule(oracle::partition({{0}, {1}}), 1);
  const Schedule coarse = uniform_schedule(oracle::partition({{0, 1}}), 1);
  CHECK_THROWS_AS(verify_aligned_inequality(t, fine, coarse, p), PreconditionError);
  t.directions = {Direction::increasing};
  CHECK_THROWS_AS(verify_aligned_inequality(t, coarse, fine, p), PreconditionError);
  const AlignedMargin r = verify_aligned_inequality(t, fine, coarse, p);
  CHECK(r.holds);
  CHECK(r.margin == Rational(1, 4));
}

TEST_CASE("merging never decreases the expectation of aligned tuples") {
  SplitMix64 rng(3);
  for (int i = 0; i < 300; ++i) {
    const std::size_t m = 1 + rng.below(3), n = 2 + rng.below(2);
    const AlignedTuple t = random_aligned_tuple(m, n, random_directions(rng, m), rng);
    const auto p = random_ps(rng, m);
    const auto parts = enumerate_partitions(n);
    for (const auto& c : parts) {
      for (const auto& f : parts) {
        if (!is_coarser(c, f)) continue;
        const AlignedMargin r = verify_aligned_inequality(t, uniform_schedule(f, m), uniform_schedule(c, m), p);
        CHECK(r.holds);
        CHECK(r.margin >= 0);
        CHECK(r.margin == brute_expectation(t.functions, uniform_schedule(c, m), p) -
                              brute_expectation(t.functions, uniform_schedule(f, m), p));
      }
    }
  }
}

TEST_CASE("mixed directions can break the inequality") {
  // f1 increasing and f2 decreasing at the same voter: not aligned, and
  // simultaneous polling lowers the product's mean.
  const std::vector<Rational> p = {Rational(1, 2)};
  const std::vector<LatticeFunction> f = {LatticeFunction::indicator(1, 0),
                                          LatticeFunction::indicator(1, 0).plus(-1).times(
                                              LatticeFunction::constant(1, -1))};
  const Rational fine = brute_expectation(f, uniform_schedule(oracle::partition({{0}, {1}}), 1), p);
  const Rational coarse = brute_expectation(f, uniform_schedule(oracle::partition({{0, 1}}), 1), p);
  CHECK(fine == Rational(1, 4));
  CHECK(coarse == 0);
}

TEST_CASE("Harris covariance") {
  const std::vector<Rational> p = {Rational(1, 3), Rational(3, 5)};
  const LatticeFunction x = LatticeFunction::indicator(2, 0);
  CHECK(harris_covariance(x, x, p) == Rational(1, 3) * Rational(2, 3));
  CHECK(harris_covariance(x, LatticeFunction::indicator(2, 1), p) == 0);
  CHECK(harris_covariance(x.plus(5), x.plus(-2), p) == harris_covariance(x, x, p));
  const LatticeFunction down = x.plus(-1).times(LatticeFunction::constant(2, -1));
  CHECK_THROWS_AS(harris_covariance(x, down, p), PreconditionError);
}

TEST_CASE("coin identity closed form") {
  const IdentityCheck c =
      proof_identity(Rational(3), Rational(2), Rational(1), Rational(1, 2), Rational(4), Rational(1, 3));
  CHECK(c.holds);
  CHECK(c.single_toss - c.double_toss == c.closed_form);
  CHECK(c.closed_form == Rational(1, 3) * Rational(2, 3) * 2 * Rational(3, 2) * 4);
  SplitMix64 rng(4);
  for (int i = 0; i < 2000; ++i) {
    auto r = [&] { return Rational(static_cast<long>(rng.below(41)) - 20, 1 + rng.below(9)); };
    const Rational a1 = r(), a2 = r(), b1 = r(), b2 = r(), cc = r(), pp = random_probability(rng);
    const Rational single = pp * a1 * a2 * cc + (1 - pp) * b1 * b2 * cc;
    const Rational twice = (pp * a1 + (1 - pp) * b1) * (pp * a2 + (1 - pp) * b2) * cc;
    const IdentityCheck k = proof_identity(a1, a2, b1, b2, cc, pp);
    CHECK(k.single_toss == single);
    CHECK(k.double_toss == twice);
    CHECK(k.holds);
  }
}

TEST_CASE("trial suites pass and are reproducible") {
  const TrialSummary d = run_aligned_trials(200, 5);
  CHECK(d.failures == 0);
  CHECK(d.trials == 200);
  CHECK(d.checks > 200);
  REQUIRE(d.min_margin);
  CHECK(*d.min_margin >= 0);
  const TrialSummary again = run_aligned_trials(200, 5);
  CHECK(again.checks == d.checks);
  CHECK(*again.min_margin == *d.min_margin);

  const TrialSummary h = run_harris_trials(200, 5);
  CHECK(h.failures == 0);
  CHECK(*h.min_margin >= 0);
  const TrialSummary id = run_identity_trials(1000, 5);
  CHECK(id.failures == 0);
  CHECK(id.checks == 1000);
}
