#include "doctest.h"
#include "fixtures.hpp"

#include <random>
#include <set>

#include "conelab/qi.hpp"

using namespace conelab;
using namespace fixtures;

namespace {

FiniteIndexPair f2_in_g(const Group& G) {
  return FiniteIndexPair(G, Subgroup(G, SubgroupSpec::letter_subgroup("H", {0, 1})), {G.identity(), G.parse("t")});
}

Collection ab(const Group& g) {
  return Collection(g, {SubgroupSpec::cyclic("A", g.parse("a")), SubgroupSpec::cyclic("B", g.parse("b"))});
}

Collection factors3(const Group& g) {
  return Collection(g, {SubgroupSpec::factor_subgroup("B1", 0), SubgroupSpec::factor_subgroup("B2", 1),
                        SubgroupSpec::factor_subgroup("B3", 2)});
}

Side standard_side(const Group& g) { return {g, GeneratorFamily::standard(g), 1}; }

// Smallest lq + 4c over the whole grid, ties to the smaller lq.
std::optional<std::pair<std::int32_t, std::int64_t>> brute_fit(const DistortionSample& s) {
  for (std::int64_t total = 4; total <= kMaxLQuarters + 4 * kMaxC; ++total)
    for (std::int32_t lq = 4; lq <= kMaxLQuarters; ++lq) {
      const auto rest = total - lq;
      if (rest < 0 || rest % 4 != 0 || rest / 4 > kMaxC) continue;
      bool ok = true;
      for (const auto& [key, w] : s.classes) ok = ok && satisfies(w, lq, rest / 4);
      if (ok) return std::pair{lq, rest / 4};
    }
  return std::nullopt;
}

DistortionSample random_sample(std::mt19937_64& rng) {
  DistortionSample s;
  std::uniform_int_distribution<int> n(1, 8), d(0, 20);
  for (int i = n(rng); i > 0; --i) {
    const std::int64_t a = d(rng), b = d(rng);
    s.classes.emplace(std::pair{a, b}, PairWitness{{}, {}, a, b});
  }
  return s;
}

// Pairwise (source, target) distance classes by BFS on balls large enough to
// hold every difference x^-1 y.
std::set<std::pair<std::int64_t, std::int64_t>> oracle_classes(const QiMap& q, const Side& src, const Side& tgt,
                                                                const std::vector<Element>& pts, std::int32_t r2) {
  const auto bs = build_ball(src.group, src.family, src.k, r2);
  const auto bt = build_ball(tgt.group, tgt.family, tgt.k, r2);
  std::set<std::pair<std::int64_t, std::int64_t>> out;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const auto ds = bs.find(src.group.between(pts[i], pts[j]));
      const auto dt = bt.find(tgt.group.between(q(pts[i]), q(pts[j])));
      REQUIRE(ds);
      REQUIRE(dt);
      out.emplace(bs.dist[*ds], bt.dist[*dt]);
    }
  return out;
}

}  // namespace

TEST_CASE("fit_constants matches the brute-force grid and returns violating witnesses") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const auto s = random_sample(rng);
    const auto fit = fit_constants(s);
    const auto brute = brute_fit(s);
    REQUIRE(fit.bounded == brute.has_value());
    if (!brute) {
      CHECK(fit.unbounded_witness);
      continue;
    }
    CHECK(fit.l_quarters == brute->first);
    CHECK(fit.c == brute->second);
    if (fit.l_quarters > 4) {
      REQUIRE(fit.l_witness);
      CHECK_FALSE(satisfies(*fit.l_witness, fit.l_quarters - 1, fit.c));
    }
    if (fit.c > 0) {
      REQUIRE(fit.c_witness);
      CHECK_FALSE(satisfies(*fit.c_witness, fit.l_quarters, fit.c - 1));
    }
    for (const auto& [lq, c] : fit.pareto) {
      for (const auto& [key, w] : s.classes) CHECK(satisfies(w, lq, c));
      if (c > 0) {
        bool tight = false;
        for (const auto& [key, w] : s.classes) tight = tight || !satisfies(w, lq, c - 1);
        CHECK(tight);
      }
    }
  }
}

TEST_CASE("satisfies is the two-sided affine bound") {
  const PairWitness w{{}, {}, 4, 9};
  CHECK(satisfies(w, 8, 1));
  CHECK_FALSE(satisfies(w, 8, 0));
  CHECK(satisfies(w, 9, 0));
  const PairWitness v{{}, {}, 1, 8};
  CHECK_FALSE(satisfies(v, 4, 6));
  CHECK(satisfies(v, 4, 7));
}

TEST_CASE("identity map has constants (1, 0)") {
  const auto F = f2();
  ScanOptions o;
  o.radius = 5;
  const auto c = estimate_qi_constants(identity_map(F), standard_side(F), standard_side(F), o);
  CHECK(c.fit.bounded);
  CHECK(c.fit.l_quarters == 4);
  CHECK(c.fit.c == 0);
  CHECK(c.density == 0);
  CHECK(c.density_certified);
}

TEST_CASE("inclusion and projection constants") {
  const auto G = f2_semidirect_z2();
  const auto pair = f2_in_g(G);
  const Side HT{G, finite_family(G, {"a", "b"}), 1};
  const auto GS = standard_side(G);
  ScanOptions o;
  o.radius = 8;
  const auto incl = estimate_qi_constants(inclusion_map(pair), HT, GS, o);
  CHECK(incl.fit.bounded);
  CHECK(incl.fit.L() <= 2.0);
  CHECK(incl.fit.c <= 2);
  CHECK(incl.fit.l_quarters == 4);
  CHECK(incl.fit.c == 0);
  CHECK(incl.density == 1);

  o.radius = 6;
  const auto proj = estimate_qi_constants(finite_index_projection(pair), GS, HT, o);
  CHECK(proj.fit.l_quarters == 4);
  CHECK(proj.fit.c == 1);
  REQUIRE(proj.fit.c_witness);
  CHECK_FALSE(satisfies(*proj.fit.c_witness, 4, 0));
  CHECK(proj.density == 0);
}

TEST_CASE("scan classes agree with the BFS oracle") {
  const auto G = f2_semidirect_z2();
  const auto pair = f2_in_g(G);
  const Side HT{G, finite_family(G, {"a", "b"}), 1};
  const auto GS = standard_side(G);
  const auto q = finite_index_projection(pair);
  const auto pts = inner_points(GS, 4, 1);
  const auto sample = scan_pairs(q, GS, HT, pts);
  std::set<std::pair<std::int64_t, std::int64_t>> got;
  for (const auto& [key, w] : sample.classes) {
    got.insert(key);
    CHECK(w.source == key.first);
    CHECK(w.target == key.second);
  }
  CHECK(got == oracle_classes(q, GS, HT, pts, 6));
  CHECK(sample.pairs == pts.size() * (pts.size() - 1) / 2);

  const auto incl = inclusion_map(pair);
  const auto hp = inner_points(HT, 4, 1);
  std::set<std::pair<std::int64_t, std::int64_t>> got2;
  for (const auto& [key, w] : scan_pairs(incl, HT, GS, hp).classes) got2.insert(key);
  CHECK(got2 == oracle_classes(incl, HT, GS, hp, 6));
}

TEST_CASE("finite-index projection") {
  const auto G = f2_semidirect_z2();
  const auto pair = f2_in_g(G);
  const auto q = finite_index_projection(pair);
  CHECK(q(G.parse("b^2*t")) == G.parse("b^2"));
  CHECK(q(G.parse("t*a")) == G.parse("b"));
  const auto ball = build_ball(G, GeneratorFamily::standard(G), 1, 4);
  const WordMetric ms(G, GeneratorFamily::standard(G).enumerate(G, 1));
  for (const auto& g : ball.vertices) {
    if (g.fpart == 0) CHECK(q(g) == g);
    CHECK(ms.distance(g, q(g)) <= 1);
    CHECK(q.backward(q(g)) == q(g));
  }
}

TEST_CASE("semidirect retraction") {
  const auto A3 = free_product_z3();
  const auto r = semidirect_retraction(A3);
  CHECK(r(A3.parse("b1*b2*s")) == A3.parse("b1*b2"));
  CHECK_THROWS_AS(semidirect_retraction(f2()), GroupError);

  const auto S = GeneratorFamily::standard(A3).enumerate(A3, 1);
  const WordMetric ms(A3, S);
  const WordMetric mt(A3, finite_family(A3, {"b1", "b2", "b3"}).enumerate(A3, 1));
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> pick(0, S.size() - 1);
  int violations = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto u = random_element(A3, rng, 6);
    const auto v = A3.multiply(u, S[pick(rng)]);
    if (mt.distance(r(u), r(v)) > ms.distance(u, v)) ++violations;
    CHECK(ms.distance(u, r.backward(r(u))) <= 1);
  }
  CHECK(violations == 0);
}

TEST_CASE("induced maps") {
  const auto F = f2();
  const auto la = induced_map(identity_map(F), F.parse("a"));
  CHECK(la(F.parse("b")) == F.parse("a*b"));
  CHECK(la.kind() == QiKind::Induced);
  REQUIRE(la.induced_by());
  CHECK(*la.induced_by() == F.parse("a"));
  CHECK(la.backward(F.parse("a*b")) == F.parse("b"));

  const auto G = f2_semidirect_z2();
  const auto qt = induced_map(finite_index_projection(f2_in_g(G)), G.parse("t"));
  CHECK(qt(G.parse("a")) == G.parse("b"));
  CHECK(qt(G.parse("a^3*b^-1")) == G.parse("b^3*a^-1"));
  CHECK(qt.backward(qt(G.parse("a*b^2"))) == G.parse("a*b^2"));

  const auto c = compose(la, la);
  CHECK(c(F.parse("b")) == F.parse("a^2*b"));
  CHECK(c.backward(F.parse("a^2*b")) == F.parse("b"));
}

TEST_CASE("quasi-inverse defect") {
  const auto G = f2_semidirect_z2();
  const auto pair = f2_in_g(G);
  const Side HT{G, finite_family(G, {"a", "b"}), 1};
  const auto GS = standard_side(G);
  const auto d = quasi_inverse_defect(finite_index_projection(pair), GS, HT, inner_points(GS, 4, 1),
                                      inner_points(HT, 4, 1));
  CHECK(d.source == 1);
  CHECK(d.target == 0);
}

TEST_CASE("uniformity of conjugation by t") {
  const auto G = f2_semidirect_z2();
  const auto q = finite_index_projection(f2_in_g(G));
  ScanOptions o;
  o.radius = 2;
  const Side HT{G, minasyan_t(G, 8), 8};
  const auto rep = uniformity_report(q, default_g_sample(G), HT, {2, 4, 8}, o);
  CHECK(rep.verdict == UniformityVerdict::NonUniform);
  CHECK(rep.witness_g == G.parse("t"));
  REQUIRE(rep.witness);
  CHECK(rep.witness->x.is_identity());
  CHECK(rep.witness->source == 1);
  CHECK(rep.witness->target == 8);
  const Subgroup A(G, SubgroupSpec::cyclic("A", G.parse("a")));
  CHECK(A.contains(rep.witness->y));
  REQUIRE(rep.levels.size() == 3);
  for (const auto& l : rep.levels) {
    CHECK(l.worst_ratio == doctest::Approx(l.k));
    CHECK(l.fit.l_quarters == 4 * l.k);
    CHECK(l.quasi_action_k == 0);
  }

  const Side Hab{G, finite_family(G, {"a", "b"}), 1};
  const auto fin = uniformity_report(q, default_g_sample(G), Hab, {}, o);
  CHECK(fin.verdict == UniformityVerdict::UniformToSample);
  REQUIRE(fin.levels.size() == 1);
  CHECK(fin.levels[0].fit.l_quarters == 4);
  CHECK(fin.levels[0].fit.c == 0);

  const auto F = f2();
  const auto id = uniformity_report(identity_map(F), default_g_sample(F), standard_side(F), {}, o);
  CHECK(id.verdict == UniformityVerdict::UniformToSample);
  for (const auto& [g, fit] : id.levels[0].per_g) {
    CHECK(fit.l_quarters == 4);
    CHECK(fit.c == 0);
  }
}

TEST_CASE("quasi-action axioms hold with the reported K") {
  const auto G = f2_semidirect_z2();
  const auto q = finite_index_projection(f2_in_g(G));
  const Side HT{G, finite_family(G, {"a", "b"}), 1};
  ScanOptions o;
  o.radius = 3;
  const auto rep = uniformity_report(q, default_g_sample(G), HT, {}, o);
  const auto K = rep.levels[0].quasi_action_k;
  const WordMetric mt(G, HT.generators());
  const auto gs = default_g_sample(G);
  for (const auto& h : inner_points(HT, o.radius, default_margin(o.radius))) {
    for (const auto& g1 : gs) {
      const auto q1 = induced_map(q, g1);
      const auto qinv = induced_map(q, G.invert(g1));
      CHECK(mt.distance(q1(qinv(h)), h) <= K);
      for (const auto& g2 : gs) {
        const auto q12 = induced_map(q, G.multiply(g1, g2));
        CHECK(mt.distance(q12(h), q1(induced_map(q, g2)(h))) <= K);
      }
    }
  }
}

TEST_CASE("lemma generating set for the identity") {
  const auto F = f2();
  const auto T0 = standard_side(F);
  LemmaOptions lo;
  lo.c0 = 1;
  const auto res = lemma_generating_set(identity_map(F), T0, T0, T0, lo);
  CHECK(res.k0 == 3);
  CHECK(res.contains_s0);
  const WordMetric m(F, T0.generators());
  for (const auto& s : res.generators) {
    CHECK(m.length(s) <= 7);
    CHECK_FALSE(s.is_identity());
  }
  CHECK(res.generators.size() == 160);
  CHECK(res.lower_violations == 0);
  CHECK(res.upper_violations == 0);
  CHECK(res.coverage == doctest::Approx(1.0));
  CHECK(res.reestimated.fit.bounded);
  CHECK(res.reestimated.fit.l_quarters == 4);
  CHECK(res.reestimated.fit.c <= 2 * res.k0);
  CHECK(res.reestimated.fit.c == 3);
}

TEST_CASE("lemma generating set for the Minasyan projection") {
  const auto G = f2_semidirect_z2();
  const auto q = finite_index_projection(f2_in_g(G));
  const auto GS = standard_side(G);
  const Side Hab{G, finite_family(G, {"a", "b"}), 1};
  const Side HT{G, minasyan_t(G, 8), 8};
  LemmaOptions lo;
  lo.c0 = 2;
  const auto res = lemma_generating_set(q, GS, Hab, HT, lo);
  CHECK(res.contains_s0);
  CHECK(res.lower_violations == 0);
  CHECK(res.upper_violations == 0);
  CHECK(res.coverage == doctest::Approx(1.0));

  // d_S(e, b^5) = 3 in the listed S.
  GeneratorFamily sf;
  sf.atoms = res.generators;
  const auto two = build_ball(G, sf, 1, 2);
  const auto b5 = G.parse("b^5");
  const auto one = build_ball(G, sf, 1, 1);
  CHECK_FALSE(one.find(b5));
  REQUIRE(two.find(b5));
  CHECK(two.dist[*two.find(b5)] == 2);

  LemmaOptions strict;
  CHECK_THROWS_AS(lemma_generating_set(q, GS, Hab, HT, strict), QiPreconditionFailed);
}

TEST_CASE("coset relation: identity is the identity bijection") {
  const auto F = f2();
  const auto T = standard_side(F);
  for (const auto& coll : {Collection(F, {SubgroupSpec::cyclic("A", F.parse("a"))}), ab(F)}) {
    RelationOptions ro;
    ro.radius = 6;
    const auto rel = coset_relation_dotq(identity_map(F), T, coll, T, coll, ro);
    REQUIRE(rel.m);
    CHECK(*rel.m == 0);
    CHECK(rel.established);
    CHECK(rel.bijective);
    for (const auto& m : rel.source_matches) CHECK(*m.partner == m.coset);
    for (const auto& [a, b, d] : rel.pairs) CHECK(d <= *rel.m);
  }
}

TEST_CASE("coset relation: inclusion into F2 x| Z2") {
  const auto G = f2_semidirect_z2();
  const auto pair = f2_in_g(G);
  const Side HT{G, finite_family(G, {"a", "b"}), 1};
  RelationOptions ro;
  ro.radius = 8;
  const auto rel = coset_relation_dotq(inclusion_map(pair), HT, ab(G), standard_side(G), ab(G), ro);
  REQUIRE(rel.m);
  CHECK(*rel.m == 1);
  CHECK(rel.established);
  CHECK(rel.left_surjective);
  CHECK(rel.right_surjective);
  CHECK_FALSE(rel.bijective);
}

TEST_CASE("coset relation: A x| Z3 with the free product factors") {
  const auto A3 = free_product_z3();
  const Side AT{A3, finite_family(A3, {"b1", "b2", "b3"}), 1};
  const auto AS = standard_side(A3);
  const Collection HF(A3, {SubgroupSpec::factor_subgroup("B1", 0)});
  const auto incl = semidirect_retraction(A3).quasi_inverse(QiKind::Inclusion, "incl");
  const WordMetric ms(A3, AS.generators());
  std::int64_t max_f = 0;
  for (std::int32_t f = 0; f < A3.finite_order(); ++f) max_f = std::max(max_f, ms.length(A3.finite_element(f)));
  CHECK(max_f == 1);
  for (std::int32_t r : {4, 6}) {
    RelationOptions ro;
    ro.radius = r;
    const auto rel = coset_relation_dotq(incl, AT, factors3(A3), AS, HF, ro);
    REQUIRE(rel.m);
    CHECK(*rel.m <= max_f);
    CHECK(rel.left_surjective);
    CHECK(rel.right_surjective);
  }
}

TEST_CASE("coset relation distances agree with the ball Hausdorff oracle") {
  const auto A3 = free_product_z3();
  const Side AT{A3, finite_family(A3, {"b1", "b2", "b3"}), 1};
  const auto AS = standard_side(A3);
  const Collection HF(A3, {SubgroupSpec::factor_subgroup("B1", 0)});
  const auto incl = semidirect_retraction(A3).quasi_inverse(QiKind::Inclusion, "incl");
  RelationOptions ro;
  ro.radius = 5;
  ro.search_radius = 5;
  const auto rel = coset_relation_dotq(incl, AT, factors3(A3), AS, HF, ro);
  const auto bs = build_ball(A3, AT.family, 1, ro.radius);
  const auto bt = build_ball(A3, AS.family, 1, ro.radius);
  const auto P = factors3(A3);
  int checked = 0;
  for (const auto& [a, b, d] : rel.pairs) {
    std::vector<std::int32_t> X;
    for (auto v : coset_elements(bs, P[a.subgroup], a.key))
      if (auto i = bt.find(bs.vertices[v])) X.push_back(*i);
    const auto Y = coset_elements(bt, HF[b.subgroup], b.key);
    const auto h = hausdorff_distance_ball(X, Y, bt, rel.margin);
    REQUIRE_FALSE(h.exceeds_bound);
    CHECK(h.value == d);
    ++checked;
  }
  CHECK(checked > 0);
}

TEST_CASE("transfer report: identity on F2") {
  const auto F = f2();
  const auto T = standard_side(F);
  TransferConfig cfg;
  cfg.coned_radius = 4;
  const auto rep = pair_transfer_report(identity_map(F), T, ab(F), T, ab(F), cfg);
  CHECK(rep.certified);
  CHECK(rep.relation.bijective);
  CHECK(*rep.relation.m == 0);
  CHECK(rep.coned_source.delta.delta() <= 2.0);
  REQUIRE(rep.coned_source.fineness.size() == 2);
  CHECK(rep.coned_source.fineness_stable);
  for (const auto& [id, count] : rep.coned_source.fineness) CHECK(count.count == 7);
  for (const auto& [a, b, d] : rep.relation.pairs) CHECK(d <= *rep.relation.m);
}

TEST_CASE("transfer report: refinement in F2 x| Z2") {
  const auto G = f2_semidirect_z2();
  const auto pair = f2_in_g(G);
  const auto q = finite_index_projection(pair);
  const Side HT{G, finite_family(G, {"a", "b"}), 1};
  TransferConfig cfg;
  cfg.refine_source = true;
  cfg.invariance_pair = pair;
  cfg.reduced_radius = 6;
  const auto rep = pair_transfer_report(q, standard_side(G), ab(G), HT, ab(G), cfg);
  REQUIRE(rep.refinement);
  CHECK(rep.source_used.ids() == std::vector<std::string>{"A"});
  REQUIRE(rep.invariance);
  CHECK(rep.invariance->holds);
  for (const auto& c : rep.checks) CHECK_MESSAGE(c.passed, c.name << ": " << c.detail);
  CHECK(rep.certified);

  const Collection A0(G, {SubgroupSpec::cyclic("A", G.parse("a"))});
  const auto bad = pair_transfer_report(q, standard_side(G), A0, HT, ab(G), cfg);
  CHECK_FALSE(bad.certified);
  REQUIRE(bad.invariance);
  CHECK_FALSE(bad.invariance->holds);
  bool found = false;
  for (const auto& c : bad.checks)
    if (c.name == "conjugation-invariance") {
      CHECK_FALSE(c.passed);
      CHECK(c.detail == "(t,A)");
      found = true;
    }
  CHECK(found);
}

TEST_CASE("transfer report drops finite members") {
  const auto A3 = free_product_z3();
  const auto S = standard_side(A3);
  const Collection with_finite(A3, {SubgroupSpec::factor_subgroup("B1", 0), SubgroupSpec::cyclic("F", A3.parse("s"))});
  TransferConfig cfg;
  cfg.qi_radius = 3;
  cfg.relation.radius = 4;
  cfg.coned_radius = 2;
  cfg.reduced_radius = 3;
  const auto rep = pair_transfer_report(identity_map(A3), S, with_finite, S, with_finite, cfg);
  CHECK(rep.dropped_finite == std::vector<std::string>{"F", "F"});
  CHECK(rep.source_used.ids() == std::vector<std::string>{"B1"});
  CHECK(rep.target_used.ids() == std::vector<std::string>{"B1"});
}
