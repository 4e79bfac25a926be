#include "conelab/qi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_set>

#include "conelab/parallel.hpp"

namespace conelab {

std::string to_string(QiKind kind) {
  switch (kind) {
    case QiKind::Identity: return "identity";
    case QiKind::Inclusion: return "inclusion";
    case QiKind::FiniteIndexProjection: return "finite-index-projection";
    case QiKind::SemidirectRetraction: return "semidirect-retraction";
    case QiKind::Induced: return "induced";
    case QiKind::Composed: return "composed";
  }
  return "?";
}

std::string to_string(UniformityVerdict v) {
  switch (v) {
    case UniformityVerdict::UniformToSample: return "uniform-to-sample";
    case UniformityVerdict::NonUniform: return "non-uniform";
    case UniformityVerdict::Inconclusive: return "inconclusive";
    case UniformityVerdict::Unbounded: return "unbounded-distortion";
  }
  return "?";
}

QiMap::QiMap(QiKind kind, Group source, Group target, Fn forward, Fn backward, std::string label)
    : kind_(kind),
      source_(std::move(source)),
      target_(std::move(target)),
      forward_(std::move(forward)),
      backward_(std::move(backward)),
      label_(std::move(label)) {}

QiMap QiMap::quasi_inverse(QiKind kind, std::string label) const {
  return QiMap(kind, target_, source_, backward_, forward_, std::move(label));
}

QiMap identity_map(const Group& group) {
  auto id = [](const Element& x) { return x; };
  return QiMap(QiKind::Identity, group, group, id, id, "id");
}

QiMap finite_index_projection(const FiniteIndexPair& pair) {
  auto fwd = [pair](const Element& x) { return pair.decompose(x).first; };
  auto back = [](const Element& h) { return h; };
  return QiMap(QiKind::FiniteIndexProjection, pair.group(), pair.group(), fwd, back, "q");
}

QiMap inclusion_map(const FiniteIndexPair& pair) {
  return finite_index_projection(pair).quasi_inverse(QiKind::Inclusion, "incl");
}

QiMap semidirect_retraction(const Group& group) {
  if (!group.is_semidirect()) throw GroupError("semidirect retraction needs a semidirect product");
  auto fwd = [](const Element& x) { return Element{x.word, 0}; };
  auto back = [](const Element& a) { return a; };
  return QiMap(QiKind::SemidirectRetraction, group, group, fwd, back, "qbar");
}

QiMap induced_map(const QiMap& q, const Element& g) {
  const auto& G = q.source();
  const auto ginv = G.invert(g);
  auto fwd = [q, g, G](const Element& h) { return q(G.multiply(g, q.backward(h))); };
  auto back = [q, ginv, G](const Element& h) { return q(G.multiply(ginv, q.backward(h))); };
  QiMap out(QiKind::Induced, q.target(), q.target(), fwd, back, q.label() + "_" + G.to_string(g));
  out.induced_by_ = g;
  return out;
}

QiMap compose(const QiMap& outer, const QiMap& inner) {
  auto fwd = [outer, inner](const Element& x) { return outer(inner(x)); };
  auto back = [outer, inner](const Element& y) { return inner.backward(outer.backward(y)); };
  return QiMap(QiKind::Composed, inner.source(), outer.target(), fwd, back, outer.label() + "." + inner.label());
}

void DistortionSample::merge(const DistortionSample& other) {
  for (const auto& [key, w] : other.classes) classes.emplace(key, w);
  pairs += other.pairs;
}

namespace {

// a/b < c/d for positive denominators.
bool ratio_less(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d) { return a * d < c * b; }

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return a >= 0 ? (a + b - 1) / b : -((-a) / b); }

// Smallest C making the class admissible at L = lq / 4.
std::int64_t needed_c(std::int64_t d, std::int64_t dt, std::int32_t lq) {
  return std::max<std::int64_t>({0, ceil_div(4 * dt - lq * d, 4), ceil_div(4 * d - lq * dt, lq)});
}

}  // namespace

std::optional<PairWitness> DistortionSample::worst_ratio() const {
  std::optional<PairWitness> best;
  for (const auto& [key, w] : classes) {
    if (key.first <= 0) continue;
    if (!best || ratio_less(best->target, best->source, key.second, key.first)) best = w;
  }
  return best;
}

bool satisfies(const PairWitness& w, std::int32_t lq, std::int64_t c) {
  return 4 * w.target <= lq * w.source + 4 * c && 4 * w.source <= lq * (w.target + c);
}

QiFit fit_constants(const DistortionSample& sample) {
  QiFit fit;
  std::int64_t best_score = 0;
  for (std::int32_t lq = 4; lq <= kMaxLQuarters; ++lq) {
    std::int64_t c = 0;
    for (const auto& [key, w] : sample.classes) c = std::max(c, needed_c(key.first, key.second, lq));
    if (c > kMaxC) continue;
    fit.pareto.emplace_back(lq, c);
    const auto score = lq + 4 * c;
    if (!fit.bounded || score < best_score) {
      fit.bounded = true;
      best_score = score;
      fit.l_quarters = lq;
      fit.c = c;
    }
  }
  if (!fit.bounded) {
    fit.unbounded_witness = sample.worst_ratio();
    return fit;
  }
  auto violator = [&](std::int32_t lq, std::int64_t c) -> std::optional<PairWitness> {
    for (const auto& [key, w] : sample.classes)
      if (!satisfies(w, lq, c)) return w;
    return std::nullopt;
  };
  if (fit.l_quarters > 4) fit.l_witness = violator(fit.l_quarters - 1, fit.c);
  if (fit.c > 0) fit.c_witness = violator(fit.l_quarters, fit.c - 1);
  return fit;
}

std::vector<Element> inner_points(const Side& side, std::int32_t radius, std::int32_t margin,
                                  std::size_t max_vertices) {
  const auto ball = build_ball(side.group, side.family, side.k, radius, {}, max_vertices);
  std::vector<Element> out;
  for (std::size_t i = 0; i < ball.size(); ++i)
    if (ball.dist[i] <= radius - margin) out.push_back(ball.vertices[i]);
  return out;
}

namespace {

// Pairwise scan with caller-owned metrics. Workers take strided rows and each
// class keeps its least (i, j), so the result does not depend on scheduling.
DistortionSample scan_with(const std::vector<Element>& pts, const std::vector<Element>& imgs, const WordMetric& ms,
                           const WordMetric& mt) {
  using Key = std::pair<std::int64_t, std::int64_t>;
  using Idx = std::pair<std::size_t, std::size_t>;
  const auto n = pts.size();
  const auto workers = std::max(1u, std::min<unsigned>(worker_count(), static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  std::vector<std::map<Key, Idx>> parts(workers);
  std::vector<std::uint64_t> counts(workers, 0);
  const auto& sg = ms.group();
  const auto& tg = mt.group();
  parallel_chunks(workers, workers, [&](std::size_t, std::size_t, unsigned w) {
    auto& part = parts[w];
    for (std::size_t i = w; i < n; i += workers)
      for (std::size_t j = i + 1; j < n; ++j) {
        const Key key{ms.length(sg.between(pts[i], pts[j])), mt.length(tg.between(imgs[i], imgs[j]))};
        part.emplace(key, Idx{i, j});
        ++counts[w];
      }
  });
  std::map<Key, Idx> all;
  for (const auto& part : parts)
    for (const auto& [key, idx] : part) {
      auto [it, fresh] = all.emplace(key, idx);
      if (!fresh && idx < it->second) it->second = idx;
    }
  DistortionSample out;
  for (const auto& [key, idx] : all) out.classes.emplace(key, PairWitness{pts[idx.first], pts[idx.second], key.first, key.second});
  out.pairs = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  return out;
}

std::vector<Element> map_all(const QiMap& q, const std::vector<Element>& pts) {
  std::vector<Element> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(q(p));
  return out;
}

std::int32_t resolve_margin(std::int32_t margin, std::int32_t radius) {
  return margin < 0 ? default_margin(radius) : margin;
}

}  // namespace

DistortionSample scan_pairs(const QiMap& q, const Side& source, const Side& target, const std::vector<Element>& points,
                            std::size_t table_limit) {
  const WordMetric ms(source.group, source.generators(), table_limit);
  const WordMetric mt(target.group, target.generators(), table_limit);
  return scan_with(points, map_all(q, points), ms, mt);
}

QiConstants estimate_qi_constants(const QiMap& q, const Side& source, const Side& target, const ScanOptions& options) {
  QiConstants out;
  out.radius = options.radius;
  out.margin = resolve_margin(options.margin, options.radius);
  out.source_k = source.k;
  out.target_k = target.k;
  out.target_radius = options.target_radius < 0 ? options.radius : options.target_radius;

  const auto pts = inner_points(source, out.radius, out.margin, options.max_vertices);
  const auto sample = scan_pairs(q, source, target, pts, options.table_limit);
  out.fit = fit_constants(sample);
  out.worst_ratio = sample.worst_ratio();
  out.pairs = sample.pairs;

  // Coarse density: ball distance from inner target points to the image of
  // the whole source ball.
  const auto src = build_ball(source.group, source.family, source.k, out.radius, {}, options.max_vertices);
  const auto tgt = build_ball(target.group, target.family, target.k, out.target_radius, {}, options.max_vertices);
  std::vector<std::int32_t> image;
  for (const auto& x : src.vertices)
    if (auto i = tgt.find(q(x))) image.push_back(*i);
  std::ranges::sort(image);
  image.erase(std::unique(image.begin(), image.end()), image.end());
  const auto tmargin = resolve_margin(options.margin, out.target_radius);
  out.density_certified = !image.empty();
  if (!image.empty()) {
    const auto d = bfs(tgt.adj, image);
    for (std::size_t y = 0; y < tgt.size(); ++y) {
      if (tgt.dist[y] > out.target_radius - tmargin) continue;
      if (d[y] == kUnreachable) {
        out.density_certified = false;
        continue;
      }
      out.density = std::max<std::int64_t>(out.density, d[y]);
    }
  }
  return out;
}

InverseDefect quasi_inverse_defect(const QiMap& q, const Side& source, const Side& target,
                                   const std::vector<Element>& source_points,
                                   const std::vector<Element>& target_points) {
  const WordMetric ms(source.group, source.generators());
  const WordMetric mt(target.group, target.generators());
  InverseDefect out;
  for (const auto& x : source_points) out.source = std::max(out.source, ms.distance(q.backward(q(x)), x));
  for (const auto& y : target_points) out.target = std::max(out.target, mt.distance(q(q.backward(y)), y));
  return out;
}

std::vector<Element> default_g_sample(const Group& group) {
  return build_ball(group, GeneratorFamily::standard(group), 1, 2).vertices;
}

UniformityReport uniformity_report(const QiMap& q, const std::vector<Element>& g_sample, const Side& target,
                                   const std::vector<std::int32_t>& levels_in, const ScanOptions& options) {
  if (g_sample.empty()) throw GroupError("uniformity: empty g-sample");
  UniformityReport rep;
  rep.radius = options.radius;
  rep.margin = resolve_margin(options.margin, options.radius);
  std::vector<std::int32_t> levels = levels_in;
  if (target.family.is_finite() || levels.empty()) levels = {target.k};

  const auto& G = q.source();
  for (auto k : levels) {
    const auto side = target.at_level(k);
    const WordMetric metric(side.group, side.generators(), options.table_limit);
    const auto pts = inner_points(side, rep.radius, rep.margin, options.max_vertices);
    UniformityLevel lvl;
    lvl.k = k;
    DistortionSample all;
    std::optional<PairWitness> worst;
    for (const auto& g : g_sample) {
      const auto qg = induced_map(q, g);
      const auto sample = scan_with(pts, map_all(qg, pts), metric, metric);
      lvl.per_g.emplace_back(g, fit_constants(sample));
      all.merge(sample);
      const auto w = sample.worst_ratio();
      if (w && (!worst || ratio_less(worst->target, worst->source, w->target, w->source))) {
        worst = w;
        lvl.worst_g = g;
      }
    }
    lvl.fit = fit_constants(all);
    lvl.worst = worst;
    lvl.worst_ratio = worst ? static_cast<double>(worst->target) / static_cast<double>(worst->source) : 0.0;
    lvl.pairs = all.pairs;

    // Quasi-action axioms on the sample.
    std::vector<QiMap> maps;
    for (const auto& g : g_sample) maps.push_back(induced_map(q, g));
    for (std::size_t a = 0; a < g_sample.size(); ++a) {
      const auto inv = induced_map(q, G.invert(g_sample[a]));
      for (const auto& h : pts) lvl.quasi_action_k = std::max(lvl.quasi_action_k, metric.distance(maps[a](inv(h)), h));
      for (std::size_t b = 0; b < g_sample.size(); ++b) {
        const auto prod = induced_map(q, G.multiply(g_sample[a], g_sample[b]));
        for (const auto& h : pts)
          lvl.quasi_action_k = std::max(lvl.quasi_action_k, metric.distance(prod(h), maps[a](maps[b](h))));
      }
    }
    rep.levels.push_back(std::move(lvl));
  }

  const auto& last = rep.levels.back();
  rep.witness_g = last.worst_g;
  rep.witness = last.worst;
  rep.witness_ratio = last.worst_ratio;

  bool unbounded = false, same = true, growing = rep.levels.size() >= 2;
  for (std::size_t i = 0; i < rep.levels.size(); ++i) {
    const auto& f = rep.levels[i].fit;
    unbounded = unbounded || !f.bounded;
    if (i > 0) {
      const auto& p = rep.levels[i - 1];
      same = same && f.l_quarters == p.fit.l_quarters && f.c == p.fit.c;
      growing = growing && rep.levels[i].worst_ratio > p.worst_ratio;
    }
  }
  if (growing)
    rep.verdict = UniformityVerdict::NonUniform;
  else if (unbounded)
    rep.verdict = UniformityVerdict::Unbounded;
  else if (same)
    rep.verdict = UniformityVerdict::UniformToSample;
  else
    rep.verdict = UniformityVerdict::Inconclusive;
  return rep;
}

QiPreconditionFailed::QiPreconditionFailed(const std::string& what, PairWitness w)
    : GroupError(what), witness(std::move(w)) {}

LemmaResult lemma_generating_set(const QiMap& q, const Side& source0, const Side& target0, const Side& target,
                                 const LemmaOptions& opt) {
  LemmaResult res;
  const auto& G = source0.group;
  const auto& H = target0.group;
  const auto margin = resolve_margin(opt.margin, opt.check_radius);
  const auto pts = inner_points(source0, opt.check_radius, margin);

  const WordMetric ms0(G, source0.generators(), opt.table_limit);
  const WordMetric mt0(H, target0.generators(), opt.table_limit);
  const WordMetric mt(H, target.generators(), opt.table_limit);

  const auto base = scan_with(pts, map_all(q, pts), ms0, mt0);
  res.base_fit = fit_constants(base);
  for (const auto& [key, w] : base.classes)
    if (!satisfies(w, opt.l0_quarters, opt.c0))
      throw QiPreconditionFailed("q is not an (L0, C0)-quasi-isometry of the finite generating sets on the sample", w);

  res.k0 = (opt.l0_quarters + 4 * opt.c0 + 4) / 4;
  const auto N = build_ball(H, target0.family, target0.k, static_cast<std::int32_t>(res.k0)).vertices;
  const auto T = target.generators();
  std::unordered_set<Element, ElementHash> W;
  for (const auto& u : N)
    for (const auto& t : T) {
      const auto ut = H.multiply(u, t);
      for (const auto& v : N) W.insert(H.multiply(ut, v));
    }

  const auto F = build_ball(G, source0.family, source0.k, opt.pair_radius).vertices;
  std::vector<Element> qF;
  for (const auto& f : F) qF.push_back(q(f));
  std::set<Element> S;
  for (std::size_t i = 0; i < F.size(); ++i)
    for (std::size_t j = 0; j < F.size(); ++j)
      if (i != j && W.contains(H.between(qF[i], qF[j]))) S.insert(G.between(F[i], F[j]));
  res.generators.assign(S.begin(), S.end());
  for (const auto& s : source0.generators())
    if (!S.contains(s)) res.missing_s0.push_back(s);
  res.contains_s0 = res.missing_s0.empty();

  // dist_S(a, b) <= dist_T(qa, qb): follow a T-geodesic h_0..h_l from q(a) to
  // q(b), lift h_i to g_i = qbar(h_i), and certify each g_i^-1 g_{i+1} in S
  // with the witnesses f = g_i, g = g_{i+1}, h = h_i, t = h_i^-1 h_{i+1}.
  const auto k0 = res.k0;
  auto close = [&](const Element& x, const Element& y) { return mt0.distance(x, y, k0).has_value(); };
  std::uint64_t certified = 0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const auto& a = pts[i];
      const auto& b = pts[j];
      const auto qa = q(a), qb = q(b);
      const auto len = mt.length(H.between(qa, qb));
      ++res.lower_pairs;
      Element h = qa, g = a, rest = H.between(qa, qb);
      bool ok = true, covered = true;
      for (std::int64_t step = len; step > 0 && ok; --step) {
        std::optional<Element> next_t;
        for (const auto& t : T) {
          const auto r = H.multiply(H.invert(t), rest);
          if (mt.length(r, step - 1) == step - 1) {
            next_t = t;
            rest = r;
            break;
          }
        }
        if (!next_t) {
          covered = false;
          break;
        }
        const auto h_next = H.multiply(h, *next_t);
        const auto g_next = step == 1 ? b : q.backward(h_next);
        ok = close(q(g), h) && close(q(g_next), h_next);
        h = h_next;
        g = g_next;
      }
      if (!covered) continue;
      ++certified;
      if (!ok) {
        ++res.lower_violations;
        if (!res.lower_witness) res.lower_witness = PairWitness{a, b, ms0.length(G.between(a, b)), len};
      }
    }
  res.coverage = res.lower_pairs ? static_cast<double>(certified) / static_cast<double>(res.lower_pairs) : 1.0;

  // dist_T(q g, q gs) <= L-bar for listed s.
  const double L1 = quarters(opt.l1_quarters), C1 = static_cast<double>(opt.c1);
  res.l_bar = L1 * (L1 * (2.0 * static_cast<double>(k0) + 1.0) + 3.0 * C1) + 3.0 * C1;
  for (const auto& a : pts) {
    const auto qa = q(a);
    for (const auto& s : res.generators) {
      const auto as = G.multiply(a, s);
      const auto d = mt.length(H.between(qa, q(as)));
      ++res.upper_steps;
      res.upper_max = std::max(res.upper_max, d);
      if (static_cast<double>(d) > res.l_bar) {
        ++res.upper_violations;
        if (!res.upper_witness) res.upper_witness = PairWitness{a, as, 1, d};
      }
    }
  }

  // Re-estimated constants of q : Gamma(G, S) -> Gamma(H, T_k) on the inner
  // points of a small S0-ball.
  GeneratorFamily sfam;
  sfam.atoms = res.generators;
  const Side sside{G, sfam, 1};
  const auto rmargin = default_margin(opt.reestimate_radius);
  const auto small = inner_points(source0, opt.reestimate_radius, rmargin);
  const WordMetric msS(G, sside.generators(), opt.table_limit);
  const auto sample = scan_with(small, map_all(q, small), msS, mt);
  res.reestimated.fit = fit_constants(sample);
  res.reestimated.worst_ratio = sample.worst_ratio();
  res.reestimated.pairs = sample.pairs;
  res.reestimated.radius = opt.reestimate_radius;
  res.reestimated.margin = rmargin;
  res.reestimated.target_k = target.k;
  return res;
}

std::string coset_label(const Group& group, const Collection& coll, const Coset& c) {
  const auto& id = coll[c.subgroup].id();
  return c.key.is_identity() ? id : group.to_string(c.key) + "*" + id;
}

namespace {

// Depth-bounded Hausdorff distance in a ball, over inner points, accepting
// only nearest-point distances d <= cap with dist(x) + d <= r.
class BoundedHausdorff {
 public:
  BoundedHausdorff(const BallGraph& ball, std::int32_t margin, std::int32_t cap)
      : ball_(ball), inner_(ball.radius - margin), cap_(cap), stamp_(ball.size(), 0), depth_(ball.size(), 0),
        mark_(ball.size(), 0) {}

  HausdorffDistance operator()(const std::vector<std::int32_t>& X, const std::vector<std::int32_t>& Y) {
    HausdorffDistance out;
    bool any = false;
    one_side(X, Y, out, any);
    one_side(Y, X, out, any);
    if (!any) out.exceeds_bound = true;
    return out;
  }

 private:
  void one_side(const std::vector<std::int32_t>& from, const std::vector<std::int32_t>& to, HausdorffDistance& out,
                bool& any) {
    ++mark_gen_;
    for (auto y : to) mark_[y] = mark_gen_;
    for (auto x : from) {
      if (ball_.dist[x] > inner_) continue;
      any = true;
      const auto d = nearest(x, std::min(cap_, ball_.radius - ball_.dist[x]));
      if (!d) {
        if (!out.exceeds_bound) out.witness = x;
        out.exceeds_bound = true;
        continue;
      }
      if (*d > out.value) {
        out.value = *d;
        if (!out.exceeds_bound) out.witness = x;
      }
    }
  }

  std::optional<std::int32_t> nearest(std::int32_t src, std::int32_t limit) {
    if (mark_[src] == mark_gen_) return 0;
    ++stamp_gen_;
    queue_.clear();
    queue_.push_back(src);
    stamp_[src] = stamp_gen_;
    depth_[src] = 0;
    for (std::size_t head = 0; head < queue_.size(); ++head) {
      const auto u = queue_[head];
      if (depth_[u] >= limit) break;
      for (auto w : ball_.adj[u]) {
        if (stamp_[w] == stamp_gen_) continue;
        stamp_[w] = stamp_gen_;
        depth_[w] = depth_[u] + 1;
        if (mark_[w] == mark_gen_) return depth_[w];
        queue_.push_back(w);
      }
    }
    return std::nullopt;
  }

  const BallGraph& ball_;
  std::int32_t inner_, cap_;
  std::vector<std::uint32_t> stamp_;
  std::vector<std::int32_t> depth_;
  std::vector<std::uint32_t> mark_;
  std::uint32_t stamp_gen_ = 0, mark_gen_ = 0;
  std::vector<std::int32_t> queue_;
};

// Vertices within `radius` of a source vertex in the ball graph.
class Neighborhood {
 public:
  Neighborhood(const BallGraph& ball, std::int32_t radius) : ball_(ball), radius_(radius), stamp_(ball.size(), 0) {}

  const std::vector<std::int32_t>& operator()(std::int32_t src) {
    ++gen_;
    out_.assign(1, src);
    depth_.assign(1, 0);
    stamp_[src] = gen_;
    for (std::size_t head = 0; head < out_.size(); ++head) {
      if (depth_[head] >= radius_) continue;
      for (auto w : ball_.adj[out_[head]]) {
        if (stamp_[w] == gen_) continue;
        stamp_[w] = gen_;
        out_.push_back(w);
        depth_.push_back(depth_[head] + 1);
      }
    }
    return out_;
  }

 private:
  const BallGraph& ball_;
  std::int32_t radius_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t gen_ = 0;
  std::vector<std::int32_t> out_, depth_;
};

}  // namespace

CosetRelation coset_relation_dotq(const QiMap& q, const Side& source, const Collection& P, const Side& target,
                                  const Collection& Q, const RelationOptions& opt) {
  CosetRelation rel;
  rel.radius = opt.radius;
  rel.margin = resolve_margin(opt.margin, opt.radius);
  rel.search_radius = opt.search_radius;
  const auto inner = rel.radius - rel.margin;

  auto bs = std::make_shared<const BallGraph>(
      build_ball(source.group, source.family, source.k, rel.radius, {}, opt.max_vertices));
  auto bt = std::make_shared<const BallGraph>(
      build_ball(target.group, target.family, target.k, rel.radius, {}, opt.max_vertices));
  const auto cs = build_coned_off(bs, P);
  const auto ct = build_coned_off(bt, Q);

  std::vector<std::int32_t> img(bs->size(), -1);
  for (std::size_t v = 0; v < bs->size(); ++v)
    if (auto i = bt->find(q(bs->vertices[v]))) img[v] = *i;

  auto has_inner = [inner](const BallGraph& b, const std::vector<std::int32_t>& mem) {
    return std::ranges::any_of(mem, [&](auto v) { return b.dist[v] <= inner; });
  };
  std::vector<std::int32_t> src_cosets, tgt_cosets;
  for (std::size_t c = 0; c < cs.cones.size(); ++c)
    if (has_inner(*bs, cs.members[c])) src_cosets.push_back(static_cast<std::int32_t>(c));
  for (std::size_t c = 0; c < ct.cones.size(); ++c)
    if (has_inner(*bt, ct.members[c])) tgt_cosets.push_back(static_cast<std::int32_t>(c));
  std::vector<char> tgt_active(ct.cones.size(), 0), src_active(cs.cones.size(), 0);
  for (auto c : tgt_cosets) tgt_active[c] = 1;
  for (auto c : src_cosets) src_active[c] = 1;

  // Image point sets of source cosets, and the reverse index.
  std::vector<std::vector<std::int32_t>> image(cs.cones.size());
  std::vector<std::vector<std::int32_t>> preimage_cosets(bt->size());
  for (std::size_t c = 0; c < cs.cones.size(); ++c) {
    for (auto v : cs.members[c])
      if (img[v] >= 0) image[c].push_back(img[v]);
    std::ranges::sort(image[c]);
    image[c].erase(std::unique(image[c].begin(), image[c].end()), image[c].end());
    for (auto y : image[c]) preimage_cosets[y].push_back(static_cast<std::int32_t>(c));
  }

  const auto gsize = static_cast<std::int32_t>(bt->size());
  Neighborhood near(*bt, opt.search_radius);
  auto target_cosets_near = [&](std::int32_t y) {
    std::set<std::int32_t> out;
    for (auto u : near(y))
      for (auto w : ct.adj[u])
        if (w >= gsize) out.insert(w - gsize);
    return out;
  };
  auto source_cosets_near = [&](std::int32_t y) {
    std::set<std::int32_t> out;
    for (auto u : near(y))
      for (auto c : preimage_cosets[u]) out.insert(c);
    return out;
  };
  auto first_inner = [&](const std::vector<std::int32_t>& pts) -> std::optional<std::int32_t> {
    for (auto y : pts)
      if (bt->dist[y] <= inner) return y;
    return std::nullopt;
  };

  // Candidate pairs, then their distances in parallel.
  std::set<std::pair<std::int32_t, std::int32_t>> cand;
  std::vector<std::set<std::int32_t>> src_cand(cs.cones.size()), tgt_cand(ct.cones.size());
  for (auto a : src_cosets)
    if (auto y = first_inner(image[a]))
      for (auto b : target_cosets_near(*y)) {
        cand.emplace(a, b);
        src_cand[a].insert(b);
      }
  for (auto b : tgt_cosets)
    if (auto y = first_inner(ct.members[b]))
      for (auto a : source_cosets_near(*y)) {
        cand.emplace(a, b);
        tgt_cand[b].insert(a);
      }
  const std::vector<std::pair<std::int32_t, std::int32_t>> cand_list(cand.begin(), cand.end());
  std::vector<HausdorffDistance> dist(cand_list.size());
  const auto workers = worker_count();
  parallel_chunks(workers, workers, [&](std::size_t, std::size_t, unsigned w) {
    BoundedHausdorff hd(*bt, rel.margin, opt.search_radius);
    for (std::size_t i = w; i < cand_list.size(); i += workers) {
      const auto [a, b] = cand_list[i];
      if (image[a].empty()) {
        dist[i].exceeds_bound = true;
        continue;
      }
      dist[i] = hd(image[a], ct.members[b]);
    }
  });
  std::map<std::pair<std::int32_t, std::int32_t>, HausdorffDistance> dmap;
  for (std::size_t i = 0; i < cand_list.size(); ++i) dmap.emplace(cand_list[i], dist[i]);

  auto best_of = [&](std::int32_t self, const std::set<std::int32_t>& others, bool source_side) {
    CosetMatch m;
    m.coset = source_side ? cs.cones[self] : ct.cones[self];
    m.candidates = static_cast<std::int32_t>(others.size());
    m.distance.exceeds_bound = true;
    for (auto o : others) {
      const auto& d = dmap.at(source_side ? std::pair{self, o} : std::pair{o, self});
      if (d.exceeds_bound) continue;
      if (m.distance.exceeds_bound || d.value < m.distance.value) {
        m.distance = d;
        m.partner = source_side ? ct.cones[o] : cs.cones[o];
      }
    }
    return m;
  };
  rel.established = true;
  std::int32_t best_max = 0;
  for (auto a : src_cosets) {
    rel.source_matches.push_back(best_of(a, src_cand[a], true));
    const auto& m = rel.source_matches.back();
    if (!m.partner) rel.established = false;
    else best_max = std::max(best_max, m.distance.value);
  }
  for (auto b : tgt_cosets) {
    rel.target_matches.push_back(best_of(b, tgt_cand[b], false));
    const auto& m = rel.target_matches.back();
    if (!m.partner) rel.established = false;
    else best_max = std::max(best_max, m.distance.value);
  }
  if (opt.m_bound)
    rel.m = *opt.m_bound;
  else if (rel.established)
    rel.m = best_max;
  if (!rel.m) return rel;

  std::map<std::int32_t, int> src_deg, tgt_deg;
  for (const auto& [ab, d] : dmap) {
    if (d.exceeds_bound || d.value > *rel.m) continue;
    rel.pairs.emplace_back(cs.cones[ab.first], ct.cones[ab.second], d.value);
    ++src_deg[ab.first];
    ++tgt_deg[ab.second];
  }
  rel.left_surjective = std::ranges::all_of(src_cosets, [&](auto a) { return src_deg.contains(a); });
  rel.right_surjective = std::ranges::all_of(tgt_cosets, [&](auto b) { return tgt_deg.contains(b); });
  rel.functional = std::ranges::all_of(src_deg, [&](const auto& kv) { return !src_active[kv.first] || kv.second == 1; });
  rel.injective = std::ranges::all_of(tgt_deg, [&](const auto& kv) { return !tgt_active[kv.first] || kv.second == 1; });
  rel.bijective = rel.functional && rel.injective && rel.left_surjective && rel.right_surjective;
  return rel;
}

namespace {

Collection drop_finite(const Collection& c, std::vector<std::string>& dropped) {
  std::vector<Subgroup> keep;
  for (const auto& m : c.members()) {
    if (m.is_finite())
      dropped.push_back(m.id());
    else
      keep.push_back(m);
  }
  return Collection(std::move(keep));
}

std::vector<std::pair<std::string, AngleCount>> cone_counts(const Side& side, const Collection& coll,
                                                            std::int32_t radius, std::int32_t theta,
                                                            DeltaEstimate* delta, const DeltaOptions& dopt) {
  auto ball = std::make_shared<const BallGraph>(build_ball(side.group, side.family, side.k, radius));
  const auto cb = build_coned_off(ball, coll);
  if (delta) *delta = four_point_delta(cb.adj, dopt);
  std::vector<std::pair<std::string, AngleCount>> out;
  for (const auto& m : coll.members()) {
    const auto v = cb.cone_of(side.group.identity(), m.id());
    if (!v) continue;
    const std::vector<std::int32_t> from{0};
    const auto prof = fineness_profile(cb, *v, theta, from);
    out.emplace_back(m.id(), *prof.at(0, theta));
  }
  return out;
}

ConedSummary coned_summary(const Side& side, const Collection& coll, const TransferConfig& cfg) {
  ConedSummary out;
  out.radius = cfg.coned_radius;
  out.fineness = cone_counts(side, coll, cfg.coned_radius, cfg.theta_max, &out.delta, cfg.delta);
  out.fineness_wider = cone_counts(side, coll, cfg.coned_radius + 2, cfg.theta_max, nullptr, cfg.delta);
  out.fineness_stable = out.fineness.size() == out.fineness_wider.size();
  for (std::size_t i = 0; out.fineness_stable && i < out.fineness.size(); ++i)
    out.fineness_stable = out.fineness[i].second.exact || out.fineness[i].second.count == out.fineness_wider[i].second.count;
  return out;
}

std::string fmt_constants(const QiFit& f) {
  if (!f.bounded) return "no (L,C) on the grid";
  return "L=" + std::to_string(f.L()).substr(0, 4) + " C=" + std::to_string(f.c);
}

}  // namespace

QiPairsReport pair_transfer_report(const QiMap& q, const Side& source, const Collection& P, const Side& target,
                                   const Collection& Q, const TransferConfig& cfg) {
  QiPairsReport rep;
  const auto P0 = drop_finite(P, rep.dropped_finite);
  rep.target_used = drop_finite(Q, rep.dropped_finite);
  rep.source_used = P0;

  const auto src_ball = build_ball(source.group, source.family, source.k, cfg.reduced_radius);
  const auto tgt_ball = build_ball(target.group, target.family, target.k, cfg.reduced_radius);
  if (cfg.refine_source) {
    rep.refinement = refine(src_ball, P0, cfg.m);
    rep.source_used = rep.refinement->refined;
  }
  if (cfg.invariance_pair) {
    const auto& pair = *cfg.invariance_pair;
    const auto ball = build_ball(pair.group(), GeneratorFamily::standard(pair.group()), 1, cfg.reduced_radius);
    rep.invariance = conjugation_invariance_check(ball, pair, P0);
  }

  ScanOptions scan;
  scan.radius = cfg.qi_radius;
  rep.constants = estimate_qi_constants(q, source, target, scan);
  rep.relation = coset_relation_dotq(q, source, rep.source_used, target, rep.target_used, cfg.relation);
  rep.reduced_source = is_reduced_check(src_ball, rep.source_used, cfg.m);
  rep.reduced_target = is_reduced_check(tgt_ball, rep.target_used, cfg.m);
  rep.coned_source = coned_summary(source, rep.source_used, cfg);
  rep.coned_target = coned_summary(target, rep.target_used, cfg);

  auto add = [&](std::string name, bool ok, std::string detail) {
    rep.checks.push_back({std::move(name), ok, std::move(detail)});
  };
  add("qi-constants", rep.constants.fit.bounded, fmt_constants(rep.constants.fit));
  add("coset-relation", rep.relation.established && rep.relation.left_surjective && rep.relation.right_surjective,
      rep.relation.m ? "M=" + std::to_string(*rep.relation.m) : "no certified match for some coset");
  add("reduced-source", rep.reduced_source.reduced,
      rep.reduced_source.reduced ? "" : rep.reduced_source.p + " ~ " + rep.reduced_source.q);
  add("reduced-target", rep.reduced_target.reduced,
      rep.reduced_target.reduced ? "" : rep.reduced_target.p + " ~ " + rep.reduced_target.q);
  if (rep.invariance) {
    std::string detail;
    for (const auto& e : rep.invariance->entries)
      if (!e.covered) {
        detail = "(" + source.group.to_string(e.g) + "," + e.q + ")";
        break;
      }
    add("conjugation-invariance", rep.invariance->holds, detail);
  }
  for (const auto* side : {&rep.coned_source, &rep.coned_target}) {
    const auto which = side == &rep.coned_source ? std::string("source") : std::string("target");
    add("coned-delta-" + which, side->delta.delta() <= cfg.delta_bound,
        "delta=" + std::to_string(side->delta.delta()).substr(0, 4));
    const bool exact = std::ranges::all_of(side->fineness, [](const auto& f) { return f.second.exact; });
    add("fineness-" + which, side->fineness_stable,
        exact ? "exact counts" : side->fineness_stable ? "stable to radius " + std::to_string(side->radius + 2)
                                                       : "counts grow with the radius");
  }
  rep.certified = std::ranges::all_of(rep.checks, [](const auto& c) { return c.passed; });
  return rep;
}

}  // namespace conelab
