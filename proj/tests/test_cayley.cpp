#include "doctest.h"
#include "fixtures.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <string>

#include "conelab/cayley.hpp"

using namespace conelab;
using namespace fixtures;

namespace {

// All freely reduced strings over a,A,b,B of length <= n.
std::vector<std::string> reduced_strings(int n) {
  std::vector<std::string> out{""};
  std::vector<std::string> layer{""};
  const std::string letters = "aAbB";
  auto inverse = [](char c) { return static_cast<char>(std::islower(c) ? std::toupper(c) : std::tolower(c)); };
  for (int len = 1; len <= n; ++len) {
    std::vector<std::string> next;
    for (const auto& w : layer)
      for (char c : letters)
        if (w.empty() || w.back() != inverse(c)) next.push_back(w + c);
    out.insert(out.end(), next.begin(), next.end());
    layer = std::move(next);
  }
  return out;
}

Element from_string(const Group& g, const std::string& w) {
  RawWord raw;
  for (char c : w) raw.push_back({std::tolower(c) == 'a' ? 0 : 1, std::islower(c) ? 1 : -1});
  return g.normal_form(raw);
}

// Hausdorff distance straight from the definition, with BFS from every point.
std::int32_t brute_hausdorff(const std::vector<std::int32_t>& X, const std::vector<std::int32_t>& Y,
                             const Adjacency& adj) {
  std::int32_t best = 0;
  auto side = [&](const auto& A, const auto& B) {
    for (auto x : A) {
      const auto d = bfs(adj, x);
      std::int32_t m = 1 << 30;
      for (auto y : B) m = std::min(m, d[y]);
      best = std::max(best, m);
    }
  };
  side(X, Y);
  side(Y, X);
  return best;
}

std::vector<std::int32_t> coset_in_ball(const BallGraph& ball, const Element& g, std::int32_t letter) {
  std::vector<std::int32_t> out;
  for (std::int64_t n = -ball.radius - 4; n <= ball.radius + 4; ++n)
    if (auto i = ball.find(ball.group.multiply(g, ball.group.letter(letter, n)))) out.push_back(*i);
  std::ranges::sort(out);
  return out;
}

}  // namespace

TEST_CASE("build_ball vertex counts") {
  const auto F = f2();
  const auto std_f = GeneratorFamily::standard(F);
  CHECK(build_ball(F, std_f, 1, 2).size() == 17);
  CHECK(build_ball(F, std_f, 1, 2).size() == reduced_strings(2).size());

  const auto Z = z2();
  std::size_t lattice = 0;
  for (int x = -2; x <= 2; ++x)
    for (int y = -2; y <= 2; ++y) lattice += std::abs(x) + std::abs(y) <= 2;
  CHECK(build_ball(Z, GeneratorFamily::standard(Z), 1, 2).size() == lattice);
  CHECK(lattice == 13);

  const auto zero = build_ball(F, std_f, 1, 0);
  CHECK(zero.size() == 1);
  CHECK(zero.edge_count() == 0);
}

TEST_CASE("build_ball indexes by layer then lexicographically") {
  const auto F = f2();
  const auto ball = build_ball(F, GeneratorFamily::standard(F), 1, 3);
  CHECK(ball.vertices[0].is_identity());
  for (std::size_t i = 1; i < ball.size(); ++i) {
    CHECK(ball.dist[i - 1] <= ball.dist[i]);
    if (ball.dist[i - 1] == ball.dist[i]) CHECK(ball.vertices[i - 1] < ball.vertices[i]);
  }
  for (std::size_t i = 0; i < ball.size(); ++i)
    for (auto j : ball.adj[i]) CHECK(std::ranges::binary_search(ball.adj[j], static_cast<std::int32_t>(i)));
}

TEST_CASE("BFS distance in F2 equals reduced word length") {
  const auto F = f2();
  const auto ball = build_ball(F, GeneratorFamily::standard(F), 1, 8);
  const auto words = reduced_strings(8);
  REQUIRE(ball.size() == words.size());
  const auto d = bfs(ball.adj, 0);
  for (const auto& w : words) {
    const auto i = ball.find(from_string(F, w));
    REQUIRE(i);
    CHECK(d[*i] == static_cast<std::int32_t>(w.size()));
    CHECK(ball.dist[*i] == static_cast<std::int32_t>(w.size()));
  }
}

TEST_CASE("ball dist satisfies metric axioms") {
  const auto G = f2_semidirect_z2();
  const auto ball = build_ball(G, minasyan_s(G, 3), 3, 3);
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::int32_t> pick(0, static_cast<std::int32_t>(ball.size()) - 1);
  for (int i = 0; i < 1000; ++i) {
    const auto x = pick(rng), y = pick(rng), z = pick(rng);
    const auto dx = bfs(ball.adj, x), dy = bfs(ball.adj, y);
    CHECK(dx[y] == dy[x]);
    CHECK(dx[x] == 0);
    CHECK(dx[z] <= dx[y] + dy[z]);
  }
}

TEST_CASE("vertex cap reports the achieved radius") {
  const auto F = f2();
  try {
    build_ball(F, GeneratorFamily::standard(F), 1, 6, {}, 100);
    FAIL("expected cap");
  } catch (const VertexCapExceeded& e) {
    CHECK(e.achieved_radius == 3);  // 1+4+12+36 = 53 <= 100 < 161
  }
}

TEST_CASE("WordMetric agrees with ball BFS even when searching past its table") {
  const auto G = f2_semidirect_z2();
  const auto S = minasyan_s(G, 3);
  const auto ball = build_ball(G, S, 3, 3);
  WordMetric small(G, S.enumerate(G), 50);
  CHECK(small.table_radius() == 1);
  for (std::size_t i = 0; i < ball.size(); ++i) CHECK(small.length(ball.vertices[i]) == ball.dist[i]);

  std::mt19937_64 rng(3);
  WordMetric big(G, S.enumerate(G));
  for (int i = 0; i < 200; ++i) {
    const auto x = random_element(G, rng, 6);
    CHECK(small.length(x) == big.length(x));
    const auto capped = small.length(x, 2);
    if (capped) CHECK(*capped == big.length(x));
    else CHECK(big.length(x) > 2);
  }
}

TEST_CASE("word_distance_stabilized examples") {
  const auto G = f2_semidirect_z2();
  const auto b = G.parse("b");
  const auto sd = word_distance_stabilized(G, minasyan_s(G, 1), G.identity(), G.power(b, 5), 6, 8);
  REQUIRE(sd.value);
  CHECK(*sd.value == 3);
  CHECK(sd.stabilized_at == 5);
  CHECK(G.multiply(G.multiply(G.parse("t"), G.parse("a^5")), G.parse("t")) == G.power(b, 5));

  const auto H = f2();
  const auto sh = word_distance_stabilized(H, minasyan_t(H, 1), H.identity(), H.parse("b^5"), 6, 8);
  REQUIRE(sh.value);
  CHECK(*sh.value == 5);

  const auto same = word_distance_stabilized(G, minasyan_s(G, 1), b, b, 6, 3);
  CHECK(same.value == 0);

  const auto far = word_distance_stabilized(H, minasyan_t(H, 1), H.identity(), H.parse("b^9"), 6, 4);
  CHECK_FALSE(far.value);
}

TEST_CASE("word distance is nonincreasing in k") {
  const auto G = f2_semidirect_z2();
  std::mt19937_64 rng(8);
  std::vector<Element> xs;
  for (int i = 0; i < 100; ++i) xs.push_back(random_element(G, rng, 4));
  for (const auto& sd : word_distances_stabilized(G, minasyan_s(G, 1), G.identity(), xs, 30, 6)) {
    for (std::size_t k = 1; k < sd.per_level.size(); ++k) {
      REQUIRE(sd.per_level[k]);
      CHECK(*sd.per_level[k] <= *sd.per_level[k - 1]);
    }
  }
}

TEST_CASE("hausdorff_distance_ball examples") {
  const auto F = f2();
  const auto ball = build_ball(F, GeneratorFamily::standard(F), 1, 8);
  const auto A = coset_in_ball(ball, F.identity(), 0);
  const auto A3 = coset_in_ball(ball, F.parse("a^3"), 0);
  CHECK(A == A3);
  const auto same = hausdorff_distance_ball(A, A3, ball, 2);
  CHECK_FALSE(same.exceeds_bound);
  CHECK(same.value == 0);

  const auto bA = coset_in_ball(ball, F.parse("b"), 0);
  CHECK(hausdorff_distance_ball(A, bA, ball, 2).exceeds_bound);

  CHECK_THROWS_AS(hausdorff_distance_ball({}, A, ball, 2), GroupError);
}

TEST_CASE("Hausdorff distance of H and a translate Hf in the semidirect product") {
  const auto G = free_product_z3();
  GeneratorFamily S;
  S.factors = {0, 1, 2};
  S.finite_elements = true;
  const auto ball = build_ball(G, S, 2, 4);
  const auto s = G.finite_element(1);
  std::vector<std::int32_t> H, Hs;
  for (std::size_t i = 0; i < ball.size(); ++i) {
    const auto& v = ball.vertices[i];
    const bool in_b1 = v.word.size() <= 1 && (v.word.empty() || v.word[0].letter == 0);
    if (in_b1 && v.fpart == 0) H.push_back(static_cast<std::int32_t>(i));
    const auto w = G.multiply(v, G.invert(s));
    const bool in_b1s = w.fpart == 0 && w.word.size() <= 1 && (w.word.empty() || w.word[0].letter == 0);
    if (in_b1s) Hs.push_back(static_cast<std::int32_t>(i));
  }
  const auto h = hausdorff_distance_ball(H, Hs, ball, default_margin(4));
  CHECK_FALSE(h.exceeds_bound);
  CHECK(h.value <= 1);
}

TEST_CASE("Hausdorff distance matches the definition where certified") {
  const auto Z = z2();
  const auto ball = build_ball(Z, GeneratorFamily::standard(Z), 1, 8);
  std::vector<std::vector<std::int32_t>> lines;
  const std::vector<int> offset{0, 1, -1, 2};
  for (const char* g : {"e", "b", "a*b^-1", "b^2"}) lines.push_back(coset_in_ball(ball, Z.parse(g), 0));
  for (std::size_t i = 0; i < lines.size(); ++i)
    for (std::size_t j = 0; j < lines.size(); ++j) {
      const auto& X = lines[i];
      const auto& Y = lines[j];
      const auto h = hausdorff_distance_ball(X, Y, ball, 2);
      const auto back = hausdorff_distance_ball(Y, X, ball, 2);
      CHECK(h.exceeds_bound == back.exceeds_bound);
      CHECK(h.value == back.value);
      // Parallel lines in Z^2 sit at their vertical offset; the whole-ball
      // value is inflated by the boundary.
      const auto gap = std::abs(offset[i] - offset[j]);
      // With margin 2 at r=8, inner points reach |x|+|y| = 6.
      CHECK(h.exceeds_bound == (gap >= 3));
      if (!h.exceeds_bound) CHECK(h.value == gap);
      CHECK(brute_hausdorff(X, Y, ball.adj) >= h.value);
    }
  for (const auto& X : lines)
    for (const auto& Y : lines)
      for (const auto& W : lines) {
        const auto xy = hausdorff_distance_ball(X, Y, ball, 2), yw = hausdorff_distance_ball(Y, W, ball, 2),
                   xw = hausdorff_distance_ball(X, W, ball, 2);
        if (!xy.exceeds_bound && !yw.exceeds_bound && !xw.exceeds_bound) CHECK(xw.value <= xy.value + yw.value);
      }
}

TEST_CASE("exports are stable and round-trip") {
  const auto F = f2();
  const auto ball = build_ball(F, GeneratorFamily::standard(F), 1, 1);
  std::ostringstream dot;
  write_dot(ball, dot);
  const auto text = dot.str();
  CHECK(std::ranges::count(text, '\n') == 2 + 5 + 4);
  CHECK(text.find("0 -- ") != std::string::npos);

  const auto big = build_ball(F, GeneratorFamily::standard(F), 1, 3);
  std::ostringstream csv;
  write_edge_csv(big, csv);
  std::istringstream in(csv.str());
  const auto edges = read_edge_csv(in);
  CHECK(edges == labeled_edges(big));
  CHECK(edges.size() == big.edge_count());
  for (const auto& e : edges) CHECK(F.multiply(big.vertices[e.src], F.parse(e.label)) == big.vertices[e.dst]);

  std::ostringstream again;
  write_edge_csv(big, again);
  CHECK(again.str() == csv.str());
}

TEST_CASE("biconnected blocks on small graphs") {
  // path 0-1-2: two bridges
  Adjacency path{{1}, {0, 2}, {1}};
  CHECK(biconnected_blocks(path) == std::vector<std::vector<std::int32_t>>{{0, 1}, {1, 2}});
  // two triangles sharing vertex 2
  Adjacency bowtie{{1, 2}, {0, 2}, {0, 1, 3, 4}, {2, 4}, {2, 3}};
  CHECK(biconnected_blocks(bowtie) == std::vector<std::vector<std::int32_t>>{{0, 1, 2}, {2, 3, 4}});
  // a 4-cycle with an isolated vertex
  Adjacency cyc{{1, 3}, {0, 2}, {1, 3}, {0, 2}, {}};
  CHECK(biconnected_blocks(cyc) == std::vector<std::vector<std::int32_t>>{{0, 1, 2, 3}});

  // Oracle: u, v share a block iff they are adjacent or lie on a common cycle,
  // i.e. no single other vertex separates them.
  const auto Z = z2();
  auto ball = build_ball(Z, GeneratorFamily::standard(Z), 1, 2);
  auto adj = ball.adj;
  adj.push_back({0});  // pendant vertex on the origin
  adj[0].push_back(static_cast<std::int32_t>(adj.size() - 1));
  const auto blocks = biconnected_blocks(adj);
  const auto n = static_cast<std::int32_t>(adj.size());
  for (std::int32_t u = 0; u < n; ++u)
    for (std::int32_t v = u + 1; v < n; ++v) {
      bool together = std::ranges::binary_search(adj[u], v);
      if (!together) {
        together = true;
        for (std::int32_t cut = 0; cut < n && together; ++cut)
          if (cut != u && cut != v && bfs(adj, u, cut)[v] == kUnreachable) together = false;
      }
      const bool in_block = std::ranges::any_of(blocks, [&](const auto& b) {
        return std::ranges::binary_search(b, u) && std::ranges::binary_search(b, v);
      });
      CHECK(in_block == together);
    }
}

TEST_CASE("syllable lengths agree with ball BFS") {
  const auto F = f2();
  const auto Z = z2();
  const auto G = f2_semidirect_z2();
  const auto FP = Group::build(GroupSpec::free_product(3));
  struct Case {
    Group group;
    GeneratorFamily family;
    std::int32_t k, r;
  };
  GeneratorFamily z_odd;
  z_odd.atoms = {Z.parse("a^3"), Z.parse("a^5"), Z.parse("b^2")};
  const std::vector<Case> cases{{F, minasyan_t(F, 3), 3, 4},
                                {G, minasyan_t(G, 2), 2, 4},
                                {Z, z_odd, 1, 5},
                                {Z, minasyan_t(Z, 4), 4, 5},
                                {FP, GeneratorFamily::standard(FP), 1, 5}};
  for (const auto& c : cases) {
    const WordMetric m(c.group, c.family.enumerate(c.group, c.k));
    REQUIRE(m.syllable_mode());
    const auto ball = build_ball(c.group, c.family, c.k, c.r);
    for (std::size_t i = 0; i < ball.size(); ++i) CHECK(m.length(ball.vertices[i]) == ball.dist[i]);
  }
  const WordMetric odd(Z, z_odd.atoms);
  CHECK(odd.length(Z.parse("a^7")) == 3);  // 5 + 5 - 3
  CHECK_FALSE(odd.length(Z.parse("b"), 100).has_value());
  CHECK_FALSE(WordMetric(G, minasyan_t(G, 2).enumerate(G)).length(G.parse("t"), 100).has_value());
  CHECK_FALSE(WordMetric(G, GeneratorFamily::standard(G).enumerate(G)).syllable_mode());
}
