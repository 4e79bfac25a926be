#include "doctest.h"
#include "fixtures.hpp"

#include <set>

#include "conelab/subgroup.hpp"

using namespace conelab;
using namespace fixtures;

namespace {

std::set<std::string> names(const BallGraph& ball, const std::vector<std::int32_t>& idx) {
  std::set<std::string> out;
  for (auto i : idx) out.insert(ball.group.to_string(ball.vertices[i]));
  return out;
}

Collection ab(const Group& g) {
  return Collection(g, {SubgroupSpec::cyclic("A", g.parse("a")), SubgroupSpec::cyclic("B", g.parse("b"))});
}

Collection factors3(const Group& g) {
  return Collection(g, {SubgroupSpec::factor_subgroup("B1", 0), SubgroupSpec::factor_subgroup("B2", 1),
                        SubgroupSpec::factor_subgroup("B3", 2)});
}

FiniteIndexPair f2_in_g(const Group& G) {
  return FiniteIndexPair(G, Subgroup(G, SubgroupSpec::letter_subgroup("H", {0, 1})), {G.identity(), G.parse("t")});
}

}  // namespace

TEST_CASE("membership examples") {
  const auto F = f2();
  const Subgroup A(F, SubgroupSpec::cyclic("A", F.parse("a")));
  CHECK(A.contains(F.parse("a^5")));
  CHECK_FALSE(A.contains(F.parse("a*b")));

  const auto fp = Group::build(GroupSpec::free_product(3));
  const Subgroup B2(fp, SubgroupSpec::factor_subgroup("B2", 1));
  CHECK(B2.contains(fp.parse("b2^-3")));
  CHECK_FALSE(B2.contains(fp.parse("b2*b1")));

  const Subgroup conj(F, SubgroupSpec::cyclic("C", F.parse("b*a^2*b^-1")));
  CHECK(conj.contains(F.parse("b*a^-4*b^-1")));
  CHECK_FALSE(conj.contains(F.parse("b*a*b^-1")));

  const auto Z = z2();
  const Subgroup diag(Z, SubgroupSpec::cyclic("D", Z.parse("a^2*b^-3")));
  CHECK(diag.contains(Z.parse("a^-4*b^6")));
  CHECK_FALSE(diag.contains(Z.parse("a^2*b^3")));

  const auto G = f2_semidirect_z2();
  const Subgroup at(G, SubgroupSpec::cyclic("AT", G.parse("a*t")));
  // (a t)^2 = a b
  CHECK(at.contains(G.parse("a*b")));
  CHECK(at.contains(G.parse("a*b*a*t")));
  CHECK_FALSE(at.contains(G.parse("t")));
  const Subgroup tt(G, SubgroupSpec::cyclic("T", G.parse("t")));
  CHECK(tt.is_finite());
  CHECK(tt.contains(G.parse("t")));
  CHECK_FALSE(tt.contains(G.parse("a")));
}

TEST_CASE("membership agrees with enumerated subgroup elements up to radius 8") {
  const auto F = f2();
  const auto ball = build_ball(F, GeneratorFamily::standard(F), 1, 8);
  for (const char* u : {"a", "a^2", "a*b", "b*a^3*b^-1", "a*b*a^-1*b^-1"}) {
    const auto ue = F.parse(u);
    std::set<std::int32_t> oracle;
    for (std::int64_t n = -8; n <= 8; ++n)
      if (auto i = ball.find(F.power(ue, n))) oracle.insert(*i);
    const auto found = subgroup_elements(ball, Subgroup(F, SubgroupSpec::cyclic("U", ue)));
    CHECK(std::set<std::int32_t>(found.begin(), found.end()) == oracle);
  }

  const auto fp = Group::build(GroupSpec::free_product(3));
  const auto fball = build_ball(fp, GeneratorFamily::standard(fp), 1, 5);
  for (std::int32_t f = 0; f < 3; ++f) {
    std::set<std::int32_t> oracle;
    for (std::int64_t n = -5; n <= 5; ++n) oracle.insert(*fball.find(fp.letter(f, n)));
    const auto found = subgroup_elements(fball, Subgroup(fp, SubgroupSpec::factor_subgroup("B", f)));
    CHECK(std::set<std::int32_t>(found.begin(), found.end()) == oracle);
  }
}

TEST_CASE("coset_elements examples") {
  const auto F = f2();
  const Subgroup A(F, SubgroupSpec::cyclic("A", F.parse("a")));
  const auto ball3 = build_ball(F, GeneratorFamily::standard(F), 1, 3);
  CHECK(names(ball3, coset_elements(ball3, A, F.identity())) ==
        std::set<std::string>{"e", "a", "a^-1", "a^2", "a^-2", "a^3", "a^-3"});
  const auto ball2 = build_ball(F, GeneratorFamily::standard(F), 1, 2);
  CHECK(names(ball2, coset_elements(ball2, A, F.parse("b"))) == std::set<std::string>{"b", "b*a", "b*a^-1"});

  const auto T = build_ball(F, minasyan_t(F, 5), 5, 1);
  CHECK(coset_elements(T, A, F.identity()).size() == 11);
  CHECK(coset_elements(ball2, A, F.parse("b^3")).empty());
}

TEST_CASE("coset keys are canonical and coset equality is an equivalence") {
  std::mt19937_64 rng(17);
  const auto F = f2();
  const auto Z = z2();
  const auto G = f2_semidirect_z2();
  const auto A3 = free_product_z3();
  const std::vector<Subgroup> subs{
      Subgroup(F, SubgroupSpec::cyclic("A", F.parse("a"))),
      Subgroup(F, SubgroupSpec::cyclic("W", F.parse("b*a^2*b*a^-1*b^-1"))),
      Subgroup(F, SubgroupSpec::letter_subgroup("L", {1})),
      Subgroup(Z, SubgroupSpec::cyclic("D", Z.parse("a^-2*b^3"))),
      Subgroup(Z, SubgroupSpec::letter_subgroup("X", {0})),
      Subgroup(G, SubgroupSpec::cyclic("A", G.parse("a"))),
      Subgroup(G, SubgroupSpec::cyclic("AT", G.parse("a*t"))),
      Subgroup(G, SubgroupSpec::letter_subgroup("H", {0, 1})),
      Subgroup(G, SubgroupSpec::cyclic("T", G.parse("t"))),
      Subgroup(A3, SubgroupSpec::factor_subgroup("B2", 1)),
      Subgroup(A3, SubgroupSpec::whole("G")),
  };
  for (const auto& P : subs) {
    const auto& g = P.group();
    const auto gens = P.generators();
    std::vector<Element> reps;
    for (int i = 0; i < 1000; ++i) {
      const auto x = random_element(g, rng, 5);
      Element p = g.identity();
      for (const auto& s : gens) p = g.multiply(p, g.power(s, std::uniform_int_distribution<int>(-3, 3)(rng)));
      const auto y = g.multiply(x, p);
      REQUIRE(P.contains(p));
      CHECK(P.coset_key(x) == P.coset_key(y));
      CHECK(P.same_coset(x, P.coset_key(x)));
      reps.push_back(i % 3 == 0 ? y : x);
    }
    for (int i = 0; i < 1000; ++i) {
      const auto& x = reps[rng() % reps.size()];
      const auto& y = reps[rng() % reps.size()];
      const auto& z = reps[rng() % reps.size()];
      CHECK(P.same_coset(x, x));
      CHECK(P.same_coset(x, y) == P.same_coset(y, x));
      if (P.same_coset(x, y) && P.same_coset(y, z)) CHECK(P.same_coset(x, z));
      CHECK(P.same_coset(x, y) == (P.coset_key(x) == P.coset_key(y)));
    }
  }
}

TEST_CASE("commensurator_estimate examples") {
  const auto F = f2();
  const auto ball = build_ball(F, GeneratorFamily::standard(F), 1, 6);
  const Subgroup A(F, SubgroupSpec::cyclic("A", F.parse("a")));
  const auto est = commensurator_estimate(ball, A, 4);
  // Oracle: g conjugates some a^n (0 < n <= 6) into <a> iff g <a> g^{-1} meets <a>.
  std::vector<std::int32_t> oracle;
  for (std::size_t i = 0; i < ball.size(); ++i) {
    bool hit = false;
    for (std::int64_t n = 1; n <= 6 && !hit; ++n) {
      const auto c = F.conjugate(ball.vertices[i], F.letter(0, n));
      hit = c.word.size() == 1 && c.word[0].letter == 0;
    }
    if (hit) oracle.push_back(static_cast<std::int32_t>(i));
  }
  CHECK(est.elements == oracle);
  CHECK(names(ball, est.elements).size() == 13);
  CHECK(est.form == ClosedForm::Itself);
  CHECK(est.verdict == CommVerdict::ClosedUnderBall);

  const auto A2 = commensurator_estimate(ball, Subgroup(F, SubgroupSpec::cyclic("A2", F.parse("a^2"))), 4);
  CHECK(A2.elements == oracle);
  CHECK(A2.form == ClosedForm::Cyclic);

  const auto whole = commensurator_estimate(ball, Subgroup(F, SubgroupSpec::whole("F")), 4);
  CHECK(whole.elements.size() == ball.size());

  const auto G = f2_semidirect_z2();
  const auto gball = build_ball(G, GeneratorFamily::standard(G), 1, 6);
  const auto gest = commensurator_estimate(gball, Subgroup(G, SubgroupSpec::cyclic("A", G.parse("a"))), 4);
  CHECK(names(gball, gest.elements).size() == 13);
  for (auto i : gest.elements) CHECK(gball.vertices[i].fpart == 0);
}

TEST_CASE("refine examples") {
  const auto G = f2_semidirect_z2();
  const auto gball = build_ball(G, GeneratorFamily::standard(G), 1, 6);
  const auto r = refine(gball, ab(G), 4);
  REQUIRE(r.refined.size() == 1);
  CHECK(r.refined[0].id() == "A");
  REQUIRE(r.merges.size() == 1);
  CHECK(r.merges[0].member == "B");
  CHECK(G.to_string(r.merges[0].conjugator) == "t");
  CHECK_FALSE(r.truncation_limited);

  const auto F = f2();
  const auto fball = build_ball(F, GeneratorFamily::standard(F), 1, 6);
  const auto rf = refine(fball, ab(F), 4);
  CHECK(rf.refined.ids() == std::vector<std::string>{"A", "B"});
  CHECK(rf.merges.empty());

  const auto A3 = free_product_z3();
  const auto aball = build_ball(A3, GeneratorFamily::standard(A3), 1, 4);
  const auto ra = refine(aball, factors3(A3), 4);
  CHECK(ra.refined.ids() == std::vector<std::string>{"B1"});
  REQUIRE(ra.merges.size() == 2);
  CHECK(A3.to_string(ra.merges[0].conjugator) == "s");
}

TEST_CASE("refine is stable and reduced collections do not merge") {
  const auto G = f2_semidirect_z2();
  const auto gball = build_ball(G, GeneratorFamily::standard(G), 1, 5);
  const auto once = refine(gball, ab(G), 4);
  const auto twice = refine(gball, once.refined, 4);
  CHECK(twice.refined.ids() == once.refined.ids());
  CHECK(twice.merges.empty());
  CHECK(is_reduced_check(gball, once.refined, 4).reduced);

  const auto F = f2();
  const auto fball = build_ball(F, GeneratorFamily::standard(F), 1, 5);
  for (const auto& coll :
       {ab(F), Collection(F, {SubgroupSpec::cyclic("A", F.parse("a")), SubgroupSpec::cyclic("C", F.parse("a*b"))})}) {
    REQUIRE(is_reduced_check(fball, coll, 4).reduced);
    CHECK(refine(fball, coll, 4).merges.empty());
  }
}

TEST_CASE("is_reduced_check examples") {
  const auto F = f2();
  const auto fball = build_ball(F, GeneratorFamily::standard(F), 1, 6);
  const auto nested = is_reduced_check(
      fball, Collection(F, {SubgroupSpec::cyclic("A", F.parse("a")), SubgroupSpec::cyclic("A2", F.parse("a^2"))}), 4);
  CHECK_FALSE(nested.reduced);
  CHECK(nested.p == "A");
  CHECK(nested.q == "A2");
  CHECK(nested.g.is_identity());
  CHECK(nested.certificate.index_in_p == 2);

  CHECK(is_reduced_check(fball, ab(F), 4).reduced);

  const auto G = f2_semidirect_z2();
  const auto gball = build_ball(G, GeneratorFamily::standard(G), 1, 6);
  const auto v = is_reduced_check(gball, ab(G), 4);
  CHECK_FALSE(v.reduced);
  CHECK(v.p == "A");
  CHECK(v.q == "B");
  CHECK(G.to_string(v.g) == "t");
}

TEST_CASE("conjugation_invariance_check examples") {
  const auto G = f2_semidirect_z2();
  const auto pair = f2_in_g(G);
  const auto ball = build_ball(G, GeneratorFamily::standard(G), 1, 6);

  const auto ok = conjugation_invariance_check(ball, pair, ab(G));
  CHECK(ok.holds);
  REQUIRE(ok.entries.size() == 4);
  CHECK(G.to_string(ok.entries[2].g) == "t");
  CHECK(ok.entries[2].q == "A");
  CHECK(ok.entries[2].q_prime == "B");
  CHECK(ok.entries[2].h.is_identity());

  const auto bad = conjugation_invariance_check(ball, pair, Collection(G, {SubgroupSpec::cyclic("A", G.parse("a"))}));
  CHECK_FALSE(bad.holds);
  REQUIRE(bad.entries.size() == 2);
  CHECK(bad.entries[0].covered);
  CHECK_FALSE(bad.entries[1].covered);
  CHECK(G.to_string(bad.entries[1].g) == "t");

  CHECK(conjugation_invariance_check(ball, pair, Collection(G, {SubgroupSpec::whole("G")})).holds);
}

TEST_CASE("FiniteIndexPair validates its transversal") {
  const auto G = f2_semidirect_z2();
  const Subgroup H(G, SubgroupSpec::letter_subgroup("H", {0, 1}));
  CHECK_THROWS_AS(FiniteIndexPair(G, H, {G.parse("t")}), GroupError);
  CHECK_THROWS_AS(FiniteIndexPair(G, H, {G.identity(), G.parse("a")}), GroupError);
  CHECK_THROWS_AS(FiniteIndexPair(G, H, {G.identity(), G.parse("t"), G.parse("a*t")}), GroupError);
  const auto pair = f2_in_g(G);
  const auto [h, r] = pair.decompose(G.parse("b^2*t"));
  CHECK(G.to_string(h) == "b^2");
  CHECK(G.to_string(r) == "t");
}

TEST_CASE("f_orbit_representatives examples") {
  const auto A3 = free_product_z3();
  const auto o = f_orbit_representatives(A3, factors3(A3));
  CHECK(o.verdict == OrbitVerdict::Free);
  CHECK(o.representatives.ids() == std::vector<std::string>{"B1"});

  const auto G = f2_semidirect_z2();
  const auto og = f_orbit_representatives(G, ab(G));
  CHECK(og.verdict == OrbitVerdict::Free);
  CHECK(og.representatives.ids() == std::vector<std::string>{"A"});

  const auto F = f2();
  const auto of = f_orbit_representatives(F, ab(F));
  CHECK(of.verdict == OrbitVerdict::Free);
  CHECK(of.representatives.ids() == std::vector<std::string>{"A", "B"});

  const auto fixed = f_orbit_representatives(G, Collection(G, {SubgroupSpec::cyclic("AB", G.parse("a*b"))}));
  CHECK(fixed.verdict == OrbitVerdict::NotInvariant);
  const auto nf = f_orbit_representatives(
      G, Collection(G, {SubgroupSpec::cyclic("AB", G.parse("a*b")), SubgroupSpec::cyclic("BA", G.parse("b*a"))}));
  CHECK(nf.verdict == OrbitVerdict::Free);
  const auto sym = f_orbit_representatives(G, Collection(G, {SubgroupSpec::letter_subgroup("H", {0, 1})}));
  CHECK(sym.verdict == OrbitVerdict::NotFree);
  CHECK(sym.member == "H");
}
