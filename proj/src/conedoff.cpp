#include "conelab/conedoff.hpp"

#include <algorithm>
#include <ostream>
#include <random>
#include <unordered_map>

#include "conelab/parallel.hpp"

namespace conelab {

namespace {

struct CosetHash {
  std::size_t operator()(const Coset& c) const noexcept {
    return ElementHash{}(c.key) * 31 + static_cast<std::size_t>(c.subgroup);
  }
};

}  // namespace

std::optional<std::int32_t> ConedOffBall::find_cone(const Coset& c) const {
  for (std::size_t i = 0; i < cones.size(); ++i)
    if (cones[i] == c) return cone_vertex(i);
  return std::nullopt;
}

std::optional<std::int32_t> ConedOffBall::cone_of(const Element& g, const std::string& subgroup_id) const {
  const auto p = collection.find(subgroup_id);
  if (!p) throw GroupError("unknown subgroup '" + subgroup_id + "'");
  return find_cone({collection[*p].coset_key(g), static_cast<std::int32_t>(*p)});
}

std::string ConedOffBall::vertex_label(std::int32_t v) const {
  if (!is_cone(v)) return base->group.to_string(base->vertices[v]);
  const auto& c = cones[v - base->size()];
  const auto& id = collection[c.subgroup].id();
  return c.key.is_identity() ? id : base->group.to_string(c.key) + "*" + id;
}

ConedOffBall build_coned_off(std::shared_ptr<const BallGraph> ball, const Collection& coll) {
  for (const auto& P : coll.members())
    if (!(P.group() == ball->group)) throw GroupError("subgroup '" + P.id() + "' belongs to another group");
  ConedOffBall cb;
  cb.base = ball;
  cb.collection = coll;
  const auto n = ball->size();
  std::unordered_map<Coset, std::int32_t, CosetHash> index;
  std::vector<std::pair<std::int32_t, std::int32_t>> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < coll.size(); ++p) {
      Coset c{coll[p].coset_key(ball->vertices[i]), static_cast<std::int32_t>(p)};
      auto [it, fresh] = index.emplace(std::move(c), static_cast<std::int32_t>(cb.cones.size()));
      if (fresh) {
        cb.cones.push_back(it->first);
        cb.members.emplace_back();
      }
      cb.members[it->second].push_back(static_cast<std::int32_t>(i));
    }
  }
  cb.adj = ball->adj;
  cb.adj.resize(n + cb.cones.size());
  for (std::size_t c = 0; c < cb.cones.size(); ++c) {
    const auto cv = static_cast<std::int32_t>(n + c);
    for (auto x : cb.members[c]) {
      cb.adj[x].push_back(cv);
      cb.adj[cv].push_back(x);
    }
  }
  for (auto& nb : cb.adj) std::ranges::sort(nb);
  return cb;
}

std::optional<std::int32_t> coned_distance(const ConedOffBall& cb, std::int32_t u, std::int32_t v) {
  const auto d = bfs(cb.adj, u)[v];
  if (d == kUnreachable) return std::nullopt;
  return d;
}

std::optional<std::int32_t> angle_distance(const ConedOffBall& cb, std::int32_t v, std::int32_t x, std::int32_t y) {
  if (!cb.is_cone(v)) throw GroupError("angle: vertex is not a cone");
  const auto& nb = cb.adj[v];
  if (!std::ranges::binary_search(nb, x) || !std::ranges::binary_search(nb, y))
    throw GroupError("angle: points must be neighbors of the cone");
  if (x == y) return 0;
  const auto d = bfs(cb.adj, x, v)[y];
  if (d == kUnreachable) return std::nullopt;
  return d;
}

const AngleCount* AngleProfile::at(std::int32_t neighbor, std::int32_t theta) const {
  for (const auto& c : counts)
    if (c.neighbor == neighbor && c.theta == theta) return &c;
  return nullptr;
}

AngleProfile fineness_profile(const ConedOffBall& cb, std::int32_t cone_vertex, std::int32_t theta_max,
                              std::optional<std::vector<std::int32_t>> neighbors) {
  if (!cb.is_cone(cone_vertex)) throw GroupError("fineness: vertex is not a cone");
  if (theta_max < 1) throw GroupError("fineness: theta_max must be >= 1");
  const auto& tv = cb.adj[cone_vertex];
  AngleProfile prof;
  prof.cone = cone_vertex;
  prof.theta_max = theta_max;
  prof.neighbors = neighbors ? *neighbors : tv;
  for (auto x : prof.neighbors)
    if (!std::ranges::binary_search(tv, x)) throw GroupError("fineness: point is not a neighbor of the cone");

  const auto& base = *cb.base;
  const auto own = cb.cones[cone_vertex - base.size()].subgroup;
  auto complete = [&](std::int32_t u) { return !cb.is_cone(u) && base.dist[u] <= base.radius - 1; };
  auto harmless_last = [&](std::int32_t u) {
    return complete(u) || (cb.is_cone(u) && cb.cones[u - base.size()].subgroup == own);
  };

  prof.angles.assign(prof.neighbors.size(), std::vector<std::optional<std::int32_t>>(prof.neighbors.size()));
  for (std::size_t i = 0; i < prof.neighbors.size(); ++i) {
    const auto x = prof.neighbors[i];
    const auto d = bfs(cb.adj, x, cone_vertex);
    for (std::size_t j = 0; j < prof.neighbors.size(); ++j) {
      const auto dy = d[prof.neighbors[j]];
      if (dy != kUnreachable) prof.angles[i][j] = dy;
    }
    // all_complete[k]: every vertex at depth k is complete; harmless[k]: each
    // is complete or a cone of v's subgroup.
    std::vector<char> all_complete(theta_max, 1), harmless(theta_max, 1);
    for (std::size_t u = 0; u < d.size(); ++u) {
      if (d[u] == kUnreachable || d[u] >= theta_max) continue;
      const auto uu = static_cast<std::int32_t>(u);
      if (!complete(uu)) all_complete[d[u]] = 0;
      if (!harmless_last(uu)) harmless[d[u]] = 0;
    }
    bool prefix_ok = true;  // all_complete up to theta - 2
    for (std::int32_t theta = 1; theta <= theta_max; ++theta) {
      if (theta >= 2) prefix_ok = prefix_ok && all_complete[theta - 2];
      std::int32_t count = 0;
      for (auto y : tv)
        if (d[y] != kUnreachable && d[y] <= theta) ++count;
      prof.counts.push_back({x, theta, count, prefix_ok && harmless[theta - 1] != 0});
    }
  }
  return prof;
}

TupleLimitExceeded::TupleLimitExceeded(std::uint64_t t, std::uint64_t l)
    : GroupError("four-point scan needs " + std::to_string(t) + " tuples, above the limit " + std::to_string(l) +
                 "; use sampled mode"),
      tuples(t),
      limit(l) {}

std::int64_t four_point_gap(std::int64_t wx, std::int64_t wy, std::int64_t wz, std::int64_t xy, std::int64_t xz,
                            std::int64_t yz) {
  std::int64_t s[3] = {wx + yz, wy + xz, wz + xy};
  std::sort(s, s + 3);
  return s[2] - s[1];
}

namespace {

std::uint64_t choose4(std::uint64_t n) {
  if (n < 4) return 0;
  const unsigned __int128 v = static_cast<unsigned __int128>(n) * (n - 1) * (n - 2) * (n - 3) / 24;
  return v > UINT64_MAX ? UINT64_MAX : static_cast<std::uint64_t>(v);
}

struct Best {
  std::int64_t gap = -1;
  std::array<std::int32_t, 4> tuple{-1, -1, -1, -1};
};

bool better(const Best& a, const Best& b) { return a.gap > b.gap || (a.gap == b.gap && a.tuple < b.tuple); }

Best scan_block(const std::vector<std::int32_t>& verts, const Adjacency& adj, unsigned workers) {
  const auto sub = induced_subgraph(adj, verts);
  const auto n = sub.size();
  std::vector<std::uint16_t> d(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = bfs(sub, static_cast<std::int32_t>(i));
    for (std::size_t j = 0; j < n; ++j) d[i * n + j] = static_cast<std::uint16_t>(row[j]);
  }
  // Strided rows balance the triangular workload.
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
  std::vector<Best> partial(workers);
  parallel_chunks(workers, workers, [&](std::size_t, std::size_t, unsigned w) {
    Best best;
    for (std::size_t i = w; i < n; i += workers) {
      const auto* di = &d[i * n];
      for (std::size_t j = i + 1; j < n; ++j) {
        const auto* dj = &d[j * n];
        const std::int64_t ij = di[j];
        for (std::size_t k = j + 1; k < n; ++k) {
          const auto* dk = &d[k * n];
          const std::int64_t ik = di[k], jk = dj[k];
          for (std::size_t l = k + 1; l < n; ++l) {
            const auto g = four_point_gap(ij, ik, di[l], jk, dj[l], dk[l]);
            if (g > best.gap) {
              best.gap = g;
              best.tuple = {static_cast<std::int32_t>(i), static_cast<std::int32_t>(j), static_cast<std::int32_t>(k),
                            static_cast<std::int32_t>(l)};
            }
          }
        }
      }
    }
    partial[w] = best;
  });
  Best out;
  for (const auto& p : partial)
    if (p.gap >= 0 && (out.gap < 0 || better(p, out))) out = p;
  if (out.gap >= 0)
    for (auto& t : out.tuple) t = verts[t];
  return out;
}

}  // namespace

DeltaEstimate four_point_delta(const Adjacency& adj, const DeltaOptions& options) {
  DeltaEstimate est;
  est.mode = options.mode;
  const unsigned workers = options.workers == 0 ? worker_count() : options.workers;

  std::int32_t ncomp = 0;
  const auto comp = connected_components(adj, &ncomp);
  std::vector<std::size_t> comp_size(ncomp, 0);
  for (auto c : comp) ++comp_size[c];
  std::int32_t largest = 0;
  for (std::int32_t c = 1; c < ncomp; ++c)
    if (comp_size[c] > comp_size[largest]) largest = c;
  est.largest_component_only = ncomp > 1;
  est.vertices = ncomp > 0 ? comp_size[largest] : 0;

  if (options.mode == DeltaMode::Exhaustive) {
    auto blocks = biconnected_blocks(adj);
    std::erase_if(blocks, [&](const auto& b) { return comp[b.front()] != largest; });
    est.blocks = blocks.size();
    std::uint64_t total = 0;
    for (const auto& b : blocks) {
      const auto c = choose4(b.size());
      total = total > UINT64_MAX - c ? UINT64_MAX : total + c;
    }
    if (total > options.max_tuples) throw TupleLimitExceeded(total, options.max_tuples);
    est.tuples = total;
    Best best;
    best.gap = 0;
    for (const auto& b : blocks) {
      if (b.size() < 4) continue;
      const auto r = scan_block(b, adj, workers);
      if (best.tuple[0] < 0 || r.gap > best.gap) best = r;
    }
    est.twice_delta = best.gap;
    est.witness = best.tuple;
    return est;
  }

  est.seed = options.seed;
  est.samples = options.samples;
  std::vector<std::int32_t> verts;
  for (std::size_t v = 0; v < adj.size(); ++v)
    if (comp[v] == largest) verts.push_back(static_cast<std::int32_t>(v));
  if (verts.size() < 4) return est;
  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<std::size_t> pick(0, verts.size() - 1);
  const bool matrix = verts.size() <= 4096;
  std::vector<std::vector<std::int32_t>> rows;
  if (matrix) {
    rows.resize(adj.size());
    for (auto v : verts) rows[v] = bfs(adj, v);
  }
  Best best;
  best.gap = 0;
  for (std::uint64_t s = 0; s < options.samples; ++s) {
    std::array<std::int32_t, 4> t;
    for (std::size_t i = 0; i < 4; ++i) {
      bool fresh;
      do {
        t[i] = verts[pick(rng)];
        fresh = std::find(t.begin(), t.begin() + i, t[i]) == t.begin() + i;
      } while (!fresh);
    }
    std::ranges::sort(t);
    std::vector<std::int32_t> rw, rx, ry;
    const std::vector<std::int32_t>*pw, *px, *py;
    if (matrix) {
      pw = &rows[t[0]];
      px = &rows[t[1]];
      py = &rows[t[2]];
    } else {
      rw = bfs(adj, t[0]);
      rx = bfs(adj, t[1]);
      ry = bfs(adj, t[2]);
      pw = &rw;
      px = &rx;
      py = &ry;
    }
    const auto g = four_point_gap((*pw)[t[1]], (*pw)[t[2]], (*pw)[t[3]], (*px)[t[2]], (*px)[t[3]], (*py)[t[3]]);
    ++est.tuples;
    Best cand{g, t};
    if (best.tuple[0] < 0 || better(cand, best)) best = cand;
  }
  est.twice_delta = best.gap;
  est.witness = best.tuple;
  return est;
}

void write_dot(const ConedOffBall& cb, std::ostream& os) {
  os << "graph coned {\n";
  for (std::size_t v = 0; v < cb.size(); ++v) {
    const auto vi = static_cast<std::int32_t>(v);
    os << "  " << v << " [label=\"" << cb.vertex_label(vi) << "\"" << (cb.is_cone(vi) ? ", shape=box" : "") << "];\n";
  }
  for (std::size_t v = 0; v < cb.size(); ++v)
    for (auto w : cb.adj[v]) {
      if (static_cast<std::size_t>(w) <= v) continue;
      os << "  " << v << " -- " << w;
      if (cb.is_cone(w)) os << " [style=dashed]";
      os << ";\n";
    }
  os << "}\n";
}

void write_fineness_csv(const ConedOffBall& cb, const AngleProfile& profile, std::ostream& os) {
  os << "theta,neighbor,count,exact\n";
  for (const auto& c : profile.counts)
    os << c.theta << ',' << cb.vertex_label(c.neighbor) << ',' << c.count << ',' << (c.exact ? "exact" : "lower-bound")
       << '\n';
}

}  // namespace conelab
