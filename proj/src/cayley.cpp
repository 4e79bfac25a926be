#include "conelab/cayley.hpp"

#include <algorithm>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <set>
#include <unordered_set>

namespace conelab {

VertexCapExceeded::VertexCapExceeded(std::int32_t achieved, std::size_t c)
    : GroupError("ball exceeds vertex cap " + std::to_string(c) + " beyond radius " + std::to_string(achieved)),
      achieved_radius(achieved),
      cap(c) {}

std::size_t BallGraph::edge_count() const {
  std::size_t n = 0;
  for (const auto& nb : adj) n += nb.size();
  return n / 2;
}

std::optional<std::int32_t> BallGraph::find(const Element& e) const {
  auto it = index.find(e);
  if (it == index.end()) return std::nullopt;
  return it->second;
}

std::vector<std::int32_t> BallGraph::indices_of(std::span<const Element> elems) const {
  std::vector<std::int32_t> out;
  out.reserve(elems.size());
  for (const auto& e : elems) {
    auto i = find(e);
    if (!i) throw GroupError("element " + group.to_string(e) + " is outside the ball");
    out.push_back(*i);
  }
  return out;
}

BallGraph build_ball(const Group& group, const GeneratorFamily& family, std::int32_t k, std::int32_t r,
                     const Element& center, std::size_t max_vertices) {
  if (r < 0) throw GroupError("radius must be >= 0");
  group.check(center);
  BallGraph ball;
  ball.group = group;
  ball.family = family;
  ball.k = k;
  ball.radius = r;
  ball.center = center;
  ball.generators = family.enumerate(group, k);

  ball.vertices.push_back(center);
  ball.dist.push_back(0);
  ball.index.emplace(center, 0);
  std::size_t layer_begin = 0;
  for (std::int32_t d = 1; d <= r; ++d) {
    const std::size_t layer_end = ball.vertices.size();
    std::vector<Element> next;
    std::unordered_set<Element, ElementHash> seen;
    for (std::size_t i = layer_begin; i < layer_end; ++i) {
      for (const auto& s : ball.generators) {
        auto y = group.multiply(ball.vertices[i], s);
        if (ball.index.contains(y) || !seen.insert(y).second) continue;
        next.push_back(std::move(y));
        if (layer_end + next.size() > max_vertices) throw VertexCapExceeded(d - 1, max_vertices);
      }
    }
    if (next.empty()) break;
    std::ranges::sort(next);
    for (auto& y : next) {
      ball.index.emplace(y, static_cast<std::int32_t>(ball.vertices.size()));
      ball.vertices.push_back(std::move(y));
      ball.dist.push_back(d);
    }
    layer_begin = layer_end;
  }

  ball.adj.assign(ball.vertices.size(), {});
  for (std::size_t i = 0; i < ball.vertices.size(); ++i) {
    auto& nb = ball.adj[i];
    for (const auto& s : ball.generators) {
      auto it = ball.index.find(group.multiply(ball.vertices[i], s));
      if (it != ball.index.end()) nb.push_back(it->second);
    }
    std::ranges::sort(nb);
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
  // Non-symmetric families still give an undirected graph.
  if (!family.symmetric) normalize(ball.adj);
  return ball;
}

WordMetric::WordMetric(Group group, std::vector<Element> generators, std::size_t table_limit,
                       std::size_t search_limit)
    : group_(std::move(group)), generators_(std::move(generators)), search_limit_(search_limit) {
  if (try_syllable_mode()) return;
  std::vector<Element> layer{group_.identity()};
  table_.emplace(group_.identity(), 0);
  for (std::int32_t d = 1;; ++d) {
    std::vector<Element> next;
    std::unordered_set<Element, ElementHash> seen;
    for (const auto& x : layer)
      for (const auto& s : generators_) {
        auto y = group_.multiply(x, s);
        if (!table_.contains(y) && seen.insert(y).second) next.push_back(std::move(y));
        if (table_.size() + next.size() > table_limit) return;
      }
    if (next.empty()) {
      // The generated subgroup is finite and fully tabulated.
      table_radius_ = std::numeric_limits<std::int32_t>::max();
      return;
    }
    for (const auto& y : next) table_.emplace(y, d);
    table_radius_ = d;
    layer = std::move(next);
  }
}

namespace {

constexpr std::int64_t kShortLetterTable = 2048;

// Fewest signed steps from `steps` summing to each value in [0, n), by BFS
// over [-n - max, n + max].
std::vector<std::int32_t> signed_step_lengths(const std::vector<std::int64_t>& steps, std::int64_t n) {
  const std::int64_t span = n + steps.back();
  std::vector<std::int32_t> d(2 * span + 1, -1);
  std::vector<std::int64_t> queue{0};
  d[span] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const auto u = queue[head];
    for (auto s : steps)
      for (auto v : {u + s, u - s}) {
        if (v < -span || v > span || d[v + span] >= 0) continue;
        d[v + span] = d[u + span] + 1;
        queue.push_back(v);
      }
  }
  return {d.begin() + span, d.begin() + span + n};
}

}  // namespace

bool WordMetric::try_syllable_mode() {
  const auto kind = group_.kind();
  const auto base = kind == FamilyKind::SemidirectByFinite ? group_.spec().base->kind : kind;
  if (base == FamilyKind::SemidirectByFinite) return false;
  std::vector<std::set<std::int64_t>> steps(group_.letter_count());
  for (const auto& s : generators_) {
    if (s.fpart != 0 || s.word.size() != 1) return false;
    steps[s.word[0].letter].insert(std::abs(s.word[0].exp));
  }
  syllable_mode_ = true;
  table_radius_ = 0;
  for (const auto& st : steps) {
    steps_.emplace_back(st.begin(), st.end());
    short_lengths_.push_back(steps_.back().empty() ? std::vector<std::int32_t>{}
                                                   : signed_step_lengths(steps_.back(), kShortLetterTable));
  }
  return true;
}

std::optional<std::int64_t> WordMetric::letter_length(std::int32_t letter, std::int64_t m) const {
  const auto& st = steps_[letter];
  if (st.empty()) return std::nullopt;
  m = std::abs(m);
  const auto d = m < kShortLetterTable ? short_lengths_[letter][m] : signed_step_lengths(st, m + 1)[m];
  if (d < 0) return std::nullopt;
  return d;
}

std::optional<std::int64_t> WordMetric::length(const Element& g, std::int64_t cap) const {
  if (syllable_mode_) {
    if (g.fpart != 0) return std::nullopt;
    std::int64_t total = 0;
    for (const auto& syl : g.word) {
      const auto d = letter_length(syl.letter, syl.exp);
      if (!d) return std::nullopt;
      total += *d;
      if (total > cap) return std::nullopt;
    }
    return total;
  }
  if (auto it = table_.find(g); it != table_.end()) {
    if (it->second > cap) return std::nullopt;
    return it->second;
  }
  if (table_radius_ == std::numeric_limits<std::int32_t>::max()) return std::nullopt;
  if (static_cast<std::int64_t>(table_radius_) + 1 > cap) return std::nullopt;

  // Layer j holds the elements g*w with |w| = j. The first layer meeting the
  // table determines |g| = j + min table value there.
  std::unordered_set<Element, ElementHash> visited{g};
  std::vector<Element> layer{g};
  for (std::int64_t j = 1;; ++j) {
    std::vector<Element> next;
    std::optional<std::int32_t> best;
    for (const auto& u : layer)
      for (const auto& s : generators_) {
        auto y = group_.multiply(u, s);
        if (!visited.insert(y).second) continue;
        if (auto it = table_.find(y); it != table_.end()) {
          if (!best || it->second < *best) best = it->second;
        }
        next.push_back(std::move(y));
        if (visited.size() > search_limit_)
          throw SearchLimitExceeded("word length search budget exhausted for " + group_.to_string(g));
      }
    if (best) {
      const auto len = j + *best;
      if (len > cap) return std::nullopt;
      return len;
    }
    if (j + table_radius_ + 1 > cap) return std::nullopt;
    if (next.empty()) return std::nullopt;
    layer = std::move(next);
  }
}

std::int64_t WordMetric::length(const Element& g) const {
  auto v = length(g, std::numeric_limits<std::int64_t>::max() / 2);
  if (!v) throw GroupError("element " + group_.to_string(g) + " is not generated");
  return *v;
}

namespace {

void settle(StabilizedDistance& out, bool finite_family) {
  const auto& lv = out.per_level;
  out.value = lv.back();
  if (!out.value) return;
  for (std::size_t i = 0; i + 2 < lv.size(); ++i) {
    if (lv[i] && lv[i] == lv[i + 1] && lv[i] == lv[i + 2]) {
      out.value = lv[i];
      out.stabilized_at = static_cast<std::int32_t>(i + 1);
      return;
    }
  }
  if (finite_family) out.stabilized_at = 1;
}

}  // namespace

std::vector<StabilizedDistance> word_distances_stabilized(const Group& group, const GeneratorFamily& family,
                                                          const Element& x, std::span<const Element> ys,
                                                          std::int32_t r, std::int32_t k_max) {
  if (k_max < 1) throw GroupError("k_max must be >= 1");
  std::vector<StabilizedDistance> out(ys.size());
  std::vector<Element> targets;
  for (const auto& y : ys) targets.push_back(group.between(x, y));
  for (std::int32_t k = 1; k <= k_max; ++k) {
    if (family.is_finite() && k > 1) {
      for (auto& o : out) o.per_level.push_back(o.per_level.front());
      continue;
    }
    WordMetric metric(group, family.enumerate(group, k));
    for (std::size_t i = 0; i < targets.size(); ++i) out[i].per_level.push_back(metric.length(targets[i], r));
  }
  for (auto& o : out) settle(o, family.is_finite());
  return out;
}

StabilizedDistance word_distance_stabilized(const Group& group, const GeneratorFamily& family, const Element& x,
                                            const Element& y, std::int32_t r, std::int32_t k_max) {
  return word_distances_stabilized(group, family, x, std::span<const Element>(&y, 1), r, k_max).front();
}

HausdorffDistance hausdorff_distance_ball(std::span<const std::int32_t> X, std::span<const std::int32_t> Y,
                                          const BallGraph& ball, std::int32_t margin) {
  if (X.empty() || Y.empty()) throw GroupError("Hausdorff distance of an empty set");
  if (margin < 0) throw GroupError("margin must be >= 0");
  const auto inner = ball.radius - margin;
  HausdorffDistance out;
  bool any_inner = false;
  auto one_side = [&](std::span<const std::int32_t> from, std::span<const std::int32_t> to) {
    const auto d = bfs(ball.adj, to);
    for (auto x : from) {
      if (ball.dist[x] > inner) continue;
      any_inner = true;
      const auto dx = d[x];
      if (dx == kUnreachable || ball.dist[x] + dx > ball.radius) {
        if (!out.exceeds_bound) out.witness = x;
        out.exceeds_bound = true;
        continue;
      }
      if (dx > out.value) {
        out.value = dx;
        if (!out.exceeds_bound) out.witness = x;
      }
    }
  };
  one_side(X, Y);
  one_side(Y, X);
  if (!any_inner) out.exceeds_bound = true;
  return out;
}

std::vector<LabeledEdge> labeled_edges(const BallGraph& ball) {
  std::vector<LabeledEdge> out;
  for (std::size_t i = 0; i < ball.size(); ++i) {
    std::vector<LabeledEdge> row;
    for (const auto& s : ball.generators) {
      auto j = ball.find(ball.group.multiply(ball.vertices[i], s));
      if (j && static_cast<std::size_t>(*j) > i)
        row.push_back({static_cast<std::int32_t>(i), *j, ball.group.to_string(s)});
    }
    std::ranges::sort(row, {}, &LabeledEdge::dst);
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

void write_vertex_csv(const BallGraph& ball, std::ostream& os) {
  os << "index,element,dist\n";
  for (std::size_t i = 0; i < ball.size(); ++i)
    os << i << ',' << ball.group.to_string(ball.vertices[i]) << ',' << ball.dist[i] << '\n';
}

void write_edge_csv(const BallGraph& ball, std::ostream& os) {
  os << "src,dst,generator\n";
  for (const auto& e : labeled_edges(ball)) os << e.src << ',' << e.dst << ',' << e.label << '\n';
}

void write_dot(const BallGraph& ball, std::ostream& os) {
  os << "graph ball {\n";
  for (std::size_t i = 0; i < ball.size(); ++i)
    os << "  " << i << " [label=\"" << ball.group.to_string(ball.vertices[i]) << "\"];\n";
  for (const auto& e : labeled_edges(ball)) os << "  " << e.src << " -- " << e.dst << " [label=\"" << e.label << "\"];\n";
  os << "}\n";
}

std::vector<LabeledEdge> read_edge_csv(std::istream& is) {
  std::vector<LabeledEdge> out;
  std::string line;
  if (!std::getline(is, line) || line != "src,dst,generator") throw GroupError("edge CSV: missing header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string a, b, label;
    if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, label))
      throw GroupError("edge CSV: malformed row '" + line + "'");
    out.push_back({std::stoi(a), std::stoi(b), label});
  }
  return out;
}

}  // namespace conelab
