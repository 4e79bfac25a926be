#include "conelab/subgroup.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace conelab {

SubgroupSpec SubgroupSpec::cyclic(std::string id, Element generator) {
  SubgroupSpec s;
  s.id = std::move(id);
  s.rule = SubgroupRule::Cyclic;
  s.generator = std::move(generator);
  return s;
}

SubgroupSpec SubgroupSpec::factor_subgroup(std::string id, std::int32_t factor) {
  SubgroupSpec s;
  s.id = std::move(id);
  s.rule = SubgroupRule::Factor;
  s.factor = factor;
  return s;
}

SubgroupSpec SubgroupSpec::letter_subgroup(std::string id, std::vector<std::int32_t> letters) {
  SubgroupSpec s;
  s.id = std::move(id);
  s.rule = SubgroupRule::LetterSubgroup;
  s.letters = std::move(letters);
  return s;
}

SubgroupSpec SubgroupSpec::whole(std::string id) {
  SubgroupSpec s;
  s.id = std::move(id);
  s.rule = SubgroupRule::WholeGroup;
  return s;
}

namespace {

bool free_like(const Group& flat) { return flat.kind() != FamilyKind::FreeAbelian; }

Element as_flat(const Element& x) { return Element{x.word, 0}; }

std::vector<std::int64_t> coords(const Group& flat, const Element& x) {
  std::vector<std::int64_t> c(flat.letter_count(), 0);
  for (const auto& s : x.word) c[s.letter] = s.exp;
  return c;
}

Element from_coords(const Group& flat, const std::vector<std::int64_t>& c) {
  RawWord raw;
  for (std::int32_t l = 0; l < static_cast<std::int32_t>(c.size()); ++l)
    if (c[l] != 0) raw.push_back({l, c[l]});
  return flat.normal_form(raw);
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// A subgroup of a group without finite part.
struct Shape {
  enum class Kind { Trivial, Whole, Letters, Cyclic } kind = Kind::Trivial;
  std::vector<char> mask;
  Element u;
  Element conj, core;  // free-like cyclic: u = conj core conj^{-1}
};

Shape make_cyclic(const Group& flat, const Element& u) {
  Shape s;
  if (u.is_identity()) return s;
  s.kind = Shape::Kind::Cyclic;
  s.u = u;
  if (!free_like(flat)) return s;
  Element w = u;
  Element conj;
  while (w.word.size() >= 2) {
    const auto& f = w.word.front();
    const auto& b = w.word.back();
    if (f.letter != b.letter || (f.exp > 0) == (b.exp > 0)) break;
    const auto m = std::min(std::abs(f.exp), std::abs(b.exp));
    const auto p = flat.letter(f.letter, f.exp > 0 ? m : -m);
    conj = flat.multiply(conj, p);
    w = flat.multiply(flat.multiply(flat.invert(p), w), p);
  }
  s.conj = conj;
  s.core = w;
  return s;
}

Shape make_letters(const Group& flat, const std::vector<std::int32_t>& letters) {
  Shape s;
  s.kind = Shape::Kind::Letters;
  s.mask.assign(flat.letter_count(), 0);
  for (auto l : letters) {
    if (l < 0 || l >= flat.letter_count()) throw GroupError("letter subgroup: letter out of range");
    s.mask[l] = 1;
  }
  if (std::ranges::all_of(s.mask, [](char c) { return c != 0; })) s.kind = Shape::Kind::Whole;
  if (letters.empty()) s.kind = Shape::Kind::Trivial;
  return s;
}

// n with x = u^n.
std::optional<std::int64_t> cyclic_exponent(const Group& flat, const Shape& s, const Element& x) {
  if (x.is_identity()) return 0;
  if (free_like(flat)) {
    const auto y = flat.multiply(flat.multiply(flat.invert(s.conj), x), s.conj);
    const auto len = y.letter_length();
    const auto unit = s.core.letter_length();
    if (len % unit != 0) return std::nullopt;
    const auto n = len / unit;
    const auto cn = flat.power(s.core, n);
    if (y == cn) return n;
    if (y == flat.invert(cn)) return -n;
    return std::nullopt;
  }
  const auto cu = coords(flat, s.u);
  const auto cx = coords(flat, x);
  std::size_t i = 0;
  while (cu[i] == 0) ++i;
  if (cx[i] % cu[i] != 0) return std::nullopt;
  const auto n = cx[i] / cu[i];
  for (std::size_t j = 0; j < cu.size(); ++j)
    if (cx[j] != n * cu[j]) return std::nullopt;
  return n;
}

bool shape_contains(const Group& flat, const Shape& s, const Element& x) {
  switch (s.kind) {
    case Shape::Kind::Trivial:
      return x.is_identity();
    case Shape::Kind::Whole:
      return true;
    case Shape::Kind::Letters:
      return std::ranges::all_of(x.word, [&](const Syllable& y) { return s.mask[y.letter] != 0; });
    case Shape::Kind::Cyclic:
      return cyclic_exponent(flat, s, x).has_value();
  }
  return false;
}

bool shorter(const Element& a, const Element& b) {
  const auto la = a.letter_length(), lb = b.letter_length();
  if (la != lb) return la < lb;
  return a < b;
}

Element shape_key(const Group& flat, const Shape& s, const Element& g) {
  switch (s.kind) {
    case Shape::Kind::Trivial:
      return g;
    case Shape::Kind::Whole:
      return flat.identity();
    case Shape::Kind::Letters: {
      if (free_like(flat)) {
        Element k = g;
        while (!k.word.empty() && s.mask[k.word.back().letter]) k.word.pop_back();
        return k;
      }
      auto c = coords(flat, g);
      for (std::size_t l = 0; l < c.size(); ++l)
        if (s.mask[l]) c[l] = 0;
      return from_coords(flat, c);
    }
    case Shape::Kind::Cyclic: {
      if (free_like(flat)) {
        const auto h = flat.multiply(g, s.conj);
        const auto bound = 2 * h.letter_length() / s.core.letter_length() + 1;
        Element best = h;
        Element up = h, down = h;
        const auto inv = flat.invert(s.core);
        for (std::int64_t n = 1; n <= bound; ++n) {
          up = flat.multiply(up, s.core);
          down = flat.multiply(down, inv);
          if (shorter(up, best)) best = up;
          if (shorter(down, best)) best = down;
        }
        return flat.multiply(best, flat.invert(s.conj));
      }
      auto cu = coords(flat, s.u);
      auto cg = coords(flat, g);
      std::size_t i = 0;
      while (cu[i] == 0) ++i;
      if (cu[i] < 0)
        for (auto& v : cu) v = -v;
      const auto q = floor_div(cg[i], cu[i]);
      for (std::size_t j = 0; j < cg.size(); ++j) cg[j] -= q * cu[j];
      return from_coords(flat, cg);
    }
  }
  return g;
}

// Image of a base subgroup under the automorphism f of a semidirect product.
Shape image_shape(const Group& G, const Group& flat, const Shape& s, std::int32_t f) {
  switch (s.kind) {
    case Shape::Kind::Trivial:
    case Shape::Kind::Whole:
      return s;
    case Shape::Kind::Cyclic:
      return make_cyclic(flat, as_flat(G.apply_automorphism(f, s.u)));
    case Shape::Kind::Letters: {
      std::vector<std::int32_t> letters;
      for (std::int32_t l = 0; l < flat.letter_count(); ++l) {
        if (!s.mask[l]) continue;
        const auto img = G.apply_automorphism(f, G.letter(l));
        if (img.word.size() != 1 || std::abs(img.word[0].exp) != 1)
          throw GroupError("letter subgroup: automorphism " + G.finite_name(f) + " does not permute letters");
        letters.push_back(img.word[0].letter);
      }
      return make_letters(flat, letters);
    }
  }
  return s;
}

}  // namespace

namespace detail {

struct SubgroupImpl {
  Group group;
  Group flat;
  SubgroupSpec spec;
  std::vector<std::int32_t> letters;  // letter and factor rules
  bool in_base = true;                // P inside the base group
  Shape shape;                        // P (in_base) or P meet A
  std::vector<Shape> images;          // images[f]: f(shape); size 1 unless semidirect
  std::vector<Element> u_pows;        // u^s, s < order of the f-part (cyclic, not in_base)
};

}  // namespace detail

Subgroup::Subgroup(Group group, SubgroupSpec spec) {
  auto impl = std::make_shared<detail::SubgroupImpl>();
  impl->group = group;
  impl->flat = group.base_group();
  const auto& flat = impl->flat;
  switch (spec.rule) {
    case SubgroupRule::Cyclic: {
      group.check(spec.generator);
      const auto& u = spec.generator;
      if (u.fpart == 0) {
        impl->shape = make_cyclic(flat, as_flat(u));
      } else {
        impl->in_base = false;
        Element p = group.identity();
        do {
          impl->u_pows.push_back(p);
          p = group.multiply(p, u);
        } while (p.fpart != 0);
        impl->shape = make_cyclic(flat, as_flat(p));
      }
      break;
    }
    case SubgroupRule::Factor:
      if (group.kind() != FamilyKind::FreeProduct && !(group.is_semidirect() && flat.kind() == FamilyKind::FreeProduct))
        throw GroupError("subgroup '" + spec.id + "': factor rule needs a free product");
      if (spec.factor < 0 || spec.factor >= group.factor_count())
        throw GroupError("subgroup '" + spec.id + "': factor index out of range");
      for (std::int32_t l = 0; l < group.letter_count(); ++l)
        if (group.factor_of(l) == spec.factor) impl->letters.push_back(l);
      impl->shape = make_letters(flat, impl->letters);
      break;
    case SubgroupRule::LetterSubgroup:
      impl->letters = spec.letters;
      std::ranges::sort(impl->letters);
      impl->letters.erase(std::unique(impl->letters.begin(), impl->letters.end()), impl->letters.end());
      impl->shape = make_letters(flat, impl->letters);
      if (impl->shape.kind == Shape::Kind::Trivial)
        throw GroupError("subgroup '" + spec.id + "': empty letter set");
      break;
    case SubgroupRule::WholeGroup:
      impl->in_base = !group.is_semidirect();
      impl->shape.kind = Shape::Kind::Whole;
      break;
  }
  if (group.is_semidirect() && !(spec.rule == SubgroupRule::WholeGroup)) {
    for (std::int32_t f = 0; f < group.finite_order(); ++f)
      impl->images.push_back(f == 0 ? impl->shape : image_shape(group, flat, impl->shape, f));
  } else {
    impl->images.push_back(impl->shape);
  }
  impl->spec = std::move(spec);
  impl_ = std::move(impl);
}

const Group& Subgroup::group() const { return impl_->group; }
const SubgroupSpec& Subgroup::spec() const { return impl_->spec; }

bool Subgroup::contains(const Element& x) const {
  const auto& I = *impl_;
  if (I.spec.rule == SubgroupRule::WholeGroup) return true;
  if (I.in_base) return x.fpart == 0 && shape_contains(I.flat, I.shape, as_flat(x));
  for (const auto& p : I.u_pows) {
    const auto y = I.group.multiply(x, I.group.invert(p));
    if (y.fpart == 0 && shape_contains(I.flat, I.shape, as_flat(y))) return true;
  }
  return false;
}

bool Subgroup::conjugate_contains(const Element& g, const Element& x) const {
  const auto& G = impl_->group;
  return contains(G.multiply(G.multiply(G.invert(g), x), g));
}

bool Subgroup::same_coset(const Element& x, const Element& y) const { return contains(impl_->group.between(x, y)); }

Element Subgroup::coset_key(const Element& g) const {
  const auto& I = *impl_;
  if (I.spec.rule == SubgroupRule::WholeGroup) return I.group.identity();
  auto key_in_base = [&](const Element& z) {
    auto k = shape_key(I.flat, I.images[z.fpart], as_flat(z));
    k.fpart = z.fpart;
    return k;
  };
  if (!I.group.is_semidirect()) return shape_key(I.flat, I.shape, g);
  if (I.in_base) return key_in_base(g);
  std::optional<Element> best;
  for (const auto& p : I.u_pows) {
    auto k = key_in_base(I.group.multiply(g, p));
    if (!best || shorter(k, *best)) best = std::move(k);
  }
  return *best;
}

std::vector<Element> Subgroup::generators() const {
  const auto& I = *impl_;
  switch (I.spec.rule) {
    case SubgroupRule::Cyclic:
      return {I.spec.generator};
    case SubgroupRule::Factor:
    case SubgroupRule::LetterSubgroup: {
      std::vector<Element> out;
      for (auto l : I.letters) out.push_back(I.group.letter(l));
      return out;
    }
    case SubgroupRule::WholeGroup:
      return {};
  }
  return {};
}

bool Subgroup::is_finite() const {
  return impl_->spec.rule == SubgroupRule::Cyclic && impl_->shape.kind == Shape::Kind::Trivial;
}

Collection::Collection(const Group& group, const std::vector<SubgroupSpec>& specs) {
  for (const auto& s : specs) members_.emplace_back(group, s);
  std::set<std::string> seen;
  for (const auto& m : members_)
    if (!seen.insert(m.id()).second) throw GroupError("collection: duplicate subgroup id '" + m.id() + "'");
}

Collection::Collection(std::vector<Subgroup> members) : members_(std::move(members)) {
  std::set<std::string> seen;
  for (const auto& m : members_)
    if (!seen.insert(m.id()).second) throw GroupError("collection: duplicate subgroup id '" + m.id() + "'");
}

std::optional<std::size_t> Collection::find(const std::string& id) const {
  for (std::size_t i = 0; i < members_.size(); ++i)
    if (members_[i].id() == id) return i;
  return std::nullopt;
}

std::vector<std::string> Collection::ids() const {
  std::vector<std::string> out;
  for (const auto& m : members_) out.push_back(m.id());
  return out;
}

FiniteIndexPair::FiniteIndexPair(Group group, Subgroup subgroup, std::vector<Element> transversal)
    : group_(std::move(group)), subgroup_(std::move(subgroup)), transversal_(std::move(transversal)) {
  if (std::ranges::find(transversal_, group_.identity()) == transversal_.end())
    throw GroupError("transversal must contain the identity");
  for (std::size_t i = 0; i < transversal_.size(); ++i)
    for (std::size_t j = i + 1; j < transversal_.size(); ++j)
      if (subgroup_.contains(group_.multiply(transversal_[i], group_.invert(transversal_[j]))))
        throw GroupError("transversal elements " + group_.to_string(transversal_[i]) + " and " +
                         group_.to_string(transversal_[j]) + " lie in the same coset");
  const auto ball = build_ball(group_, GeneratorFamily::standard(group_), 1, 2);
  for (const auto& x : ball.vertices) decompose(x);
}

std::pair<Element, Element> FiniteIndexPair::decompose(const Element& x) const {
  for (const auto& r : transversal_) {
    auto h = group_.multiply(x, group_.invert(r));
    if (subgroup_.contains(h)) return {std::move(h), r};
  }
  throw GroupError("element " + group_.to_string(x) + " is not covered by the transversal");
}

std::vector<std::int32_t> coset_elements(const BallGraph& ball, const Subgroup& P, const Element& g) {
  std::vector<std::int32_t> out;
  const auto gi = ball.group.invert(g);
  for (std::size_t i = 0; i < ball.size(); ++i)
    if (P.contains(ball.group.multiply(gi, ball.vertices[i]))) out.push_back(static_cast<std::int32_t>(i));
  return out;
}

std::vector<std::int32_t> subgroup_elements(const BallGraph& ball, const Subgroup& P) {
  std::vector<std::int32_t> out;
  for (std::size_t i = 0; i < ball.size(); ++i)
    if (P.contains(ball.vertices[i])) out.push_back(static_cast<std::int32_t>(i));
  return out;
}

namespace {

void require_identity_center(const BallGraph& ball) {
  if (!ball.center.is_identity()) throw GroupError("subgroup scans need a ball centred at the identity");
}

// Number of classes of `elems` under x ~ y iff same(x^{-1} y), capped at cap + 1.
template <class Same>
std::int32_t count_classes(const BallGraph& ball, const std::vector<std::int32_t>& elems, Same same,
                           std::int32_t cap) {
  std::vector<Element> reps;
  for (auto i : elems) {
    const auto& x = ball.vertices[i];
    bool found = false;
    for (const auto& r : reps)
      if (same(ball.group.between(r, x))) {
        found = true;
        break;
      }
    if (!found) {
      reps.push_back(x);
      if (static_cast<std::int32_t>(reps.size()) > cap) break;
    }
  }
  return static_cast<std::int32_t>(reps.size());
}

CommensurabilityCertificate commensurable_cached(const BallGraph& ball, const Subgroup& P,
                                                 const std::vector<std::int32_t>& p_elems, const Subgroup& Q,
                                                 const Element& g, std::int32_t m) {
  CommensurabilityCertificate c;
  bool nontrivial = false;
  for (auto i : p_elems)
    if (!ball.vertices[i].is_identity() && Q.conjugate_contains(g, ball.vertices[i])) {
      nontrivial = true;
      break;
    }
  if (!nontrivial) return c;
  c.index_in_p = count_classes(
      ball, p_elems, [&](const Element& z) { return Q.conjugate_contains(g, z); }, m);
  if (c.index_in_p > m) return c;
  std::vector<std::int32_t> q_elems;
  for (std::size_t i = 0; i < ball.size(); ++i)
    if (Q.conjugate_contains(g, ball.vertices[i])) q_elems.push_back(static_cast<std::int32_t>(i));
  c.index_in_q = count_classes(
      ball, q_elems, [&](const Element& z) { return P.contains(z); }, m);
  c.commensurable = c.index_in_q <= m;
  return c;
}

// pred_a and pred_b agree on ball(limit) and both hold at some non-identity point.
template <class A, class B>
bool agree_in_ball(const BallGraph& ball, std::int32_t limit, A pred_a, B pred_b) {
  if (limit < 1) return false;
  bool witnessed = false;
  for (std::size_t i = 0; i < ball.size() && ball.dist[i] <= limit; ++i) {
    const auto& x = ball.vertices[i];
    const bool a = pred_a(x);
    if (a != pred_b(x)) return false;
    if (a && !x.is_identity()) witnessed = true;
  }
  return witnessed;
}

std::vector<std::int32_t> sorted_ids(const Collection& coll) {
  std::vector<std::int32_t> order(coll.size());
  std::iota(order.begin(), order.end(), 0);
  std::ranges::sort(order, [&](auto a, auto b) { return coll[a].id() < coll[b].id(); });
  return order;
}

}  // namespace

CommensurabilityCertificate commensurable_in_ball(const BallGraph& ball, const Subgroup& P, const Subgroup& Q,
                                                  const Element& g, std::int32_t m) {
  require_identity_center(ball);
  return commensurable_cached(ball, P, subgroup_elements(ball, P), Q, g, m);
}

CommensuratorEstimate commensurator_estimate(const BallGraph& ball, const Subgroup& P, std::int32_t m) {
  require_identity_center(ball);
  if (ball.radius < 1 || m < 1) throw GroupError("commensurator estimate needs r >= 1 and m >= 1");
  CommensuratorEstimate est;
  est.radius = ball.radius;
  est.index_bound = m;
  const auto p_elems = subgroup_elements(ball, P);
  for (std::size_t i = 0; i < ball.size(); ++i) {
    const auto& g = ball.vertices[i];
    if (P.contains(g) || commensurable_cached(ball, P, p_elems, P, g, m).commensurable) {
      est.elements.push_back(static_cast<std::int32_t>(i));
      if (!P.contains(g) && est.extra.size() < 8) est.extra.push_back(g);
    }
  }
  if (est.elements == p_elems) {
    est.form = ClosedForm::Itself;
  } else if (est.elements.size() == ball.size()) {
    est.form = ClosedForm::WholeGroup;
  } else if (est.elements.size() > 1) {
    const auto w = ball.vertices[est.elements[1]];
    const Subgroup cyc(ball.group, SubgroupSpec::cyclic(P.id(), w));
    if (subgroup_elements(ball, cyc) == est.elements) {
      est.form = ClosedForm::Cyclic;
      est.cyclic_generator = w;
    }
  }
  est.verdict = est.form == ClosedForm::None ? CommVerdict::TruncationLimited : CommVerdict::ClosedUnderBall;
  return est;
}

bool conjugate_equal_in_ball(const BallGraph& ball, const Subgroup& P, const Subgroup& Q, std::int32_t g_vertex) {
  require_identity_center(ball);
  const auto& g = ball.vertices[g_vertex];
  return agree_in_ball(
      ball, ball.radius - ball.dist[g_vertex], [&](const Element& x) { return P.conjugate_contains(g, x); },
      [&](const Element& x) { return Q.contains(x); });
}

Refinement refine(const BallGraph& ball, const Collection& coll, std::int32_t m) {
  require_identity_center(ball);
  Refinement out;
  out.radius = ball.radius;
  out.index_bound = m;
  std::vector<Subgroup> closed;
  for (const auto& P : coll.members()) {
    auto est = commensurator_estimate(ball, P, m);
    switch (est.form) {
      case ClosedForm::WholeGroup: {
        auto spec = SubgroupSpec::whole(P.id());
        spec.marked = P.spec().marked;
        closed.emplace_back(ball.group, spec);
        break;
      }
      case ClosedForm::Cyclic: {
        auto spec = SubgroupSpec::cyclic(P.id(), est.cyclic_generator);
        spec.marked = P.spec().marked;
        closed.emplace_back(ball.group, spec);
        break;
      }
      case ClosedForm::None:
        out.truncation_limited = true;
        closed.push_back(P);
        break;
      case ClosedForm::Itself:
        closed.push_back(P);
        break;
    }
    out.commensurators.emplace(P.id(), std::move(est));
  }

  std::vector<std::int32_t> reps;
  for (auto i : sorted_ids(coll)) {
    bool merged = false;
    for (auto r : reps) {
      for (std::size_t gv = 0; gv < ball.size() && !merged; ++gv) {
        if (conjugate_equal_in_ball(ball, closed[r], closed[i], static_cast<std::int32_t>(gv))) {
          out.merges.push_back({coll[i].id(), coll[r].id(), ball.vertices[gv]});
          merged = true;
        }
      }
      if (merged) break;
    }
    if (!merged) reps.push_back(i);
  }
  std::vector<Subgroup> members;
  for (auto r : reps) members.push_back(closed[r]);
  out.refined = Collection(std::move(members));
  return out;
}

ReducedCheck is_reduced_check(const BallGraph& ball, const Collection& coll, std::int32_t m) {
  require_identity_center(ball);
  ReducedCheck out;
  out.radius = ball.radius;
  std::vector<std::vector<std::int32_t>> elems;
  for (const auto& P : coll.members()) elems.push_back(subgroup_elements(ball, P));
  for (std::size_t gv = 0; gv < ball.size(); ++gv) {
    const auto& g = ball.vertices[gv];
    for (std::size_t p = 0; p < coll.size(); ++p)
      for (std::size_t q = 0; q < coll.size(); ++q) {
        if (p == q && coll[p].contains(g)) continue;
        const auto c = commensurable_cached(ball, coll[p], elems[p], coll[q], g, m);
        if (c.commensurable) {
          out.reduced = false;
          out.p = coll[p].id();
          out.q = coll[q].id();
          out.g = g;
          out.certificate = c;
          return out;
        }
      }
  }
  return out;
}

InvarianceCheck conjugation_invariance_check(const BallGraph& ball, const FiniteIndexPair& pair,
                                             const Collection& coll) {
  require_identity_center(ball);
  InvarianceCheck out;
  out.radius = ball.radius;
  const auto& H = pair.subgroup();
  std::vector<std::int32_t> h_vertices = subgroup_elements(ball, H);
  for (const auto& r : pair.transversal()) {
    const auto rv = ball.find(r);
    if (!rv) throw GroupError("transversal element " + ball.group.to_string(r) + " is outside the ball");
    for (const auto& Q : coll.members()) {
      InvarianceWitness w;
      w.g = r;
      w.q = Q.id();
      for (auto hv : h_vertices) {
        const auto& h = ball.vertices[hv];
        const auto limit = ball.radius - ball.dist[*rv] - ball.dist[hv];
        if (limit < 1) break;
        for (const auto& Qp : coll.members()) {
          if (agree_in_ball(
                  ball, limit, [&](const Element& x) { return Q.conjugate_contains(r, x); },
                  [&](const Element& x) { return Qp.conjugate_contains(h, x); })) {
            w.covered = true;
            w.h = h;
            w.q_prime = Qp.id();
            break;
          }
        }
        if (w.covered) break;
      }
      if (!w.covered && Q.is_whole()) {
        w.covered = true;
        w.q_prime = Q.id();
      }
      out.holds = out.holds && w.covered;
      out.entries.push_back(std::move(w));
    }
  }
  return out;
}

OrbitRepresentatives f_orbit_representatives(const Group& group, const Collection& coll) {
  OrbitRepresentatives out;
  const auto order = group.is_semidirect() ? group.finite_order() : 1;
  // image[f][i]: member equal to f P_i f^{-1}, or -1.
  std::vector<std::vector<std::int32_t>> image(order, std::vector<std::int32_t>(coll.size(), -1));
  for (std::int32_t f = 0; f < order; ++f) {
    const auto fe = group.finite_element(f);
    const auto fi = group.invert(fe);
    for (std::size_t i = 0; i < coll.size(); ++i) {
      const auto& P = coll[i];
      for (std::size_t j = 0; j < coll.size() && image[f][i] < 0; ++j) {
        const auto& Q = coll[j];
        bool eq;
        if (P.is_whole() || Q.is_whole()) {
          eq = P.is_whole() && Q.is_whole();
        } else {
          eq = std::ranges::all_of(P.generators(), [&](const Element& x) { return Q.contains(group.conjugate(fe, x)); }) &&
               std::ranges::all_of(Q.generators(), [&](const Element& x) { return P.contains(group.conjugate(fi, x)); });
        }
        if (eq) image[f][i] = static_cast<std::int32_t>(j);
      }
      if (image[f][i] < 0) {
        out.verdict = OrbitVerdict::NotInvariant;
        out.f = f;
        out.member = P.id();
        out.representatives = coll;
        return out;
      }
    }
  }
  for (std::int32_t f = 1; f < order && out.verdict == OrbitVerdict::Free; ++f)
    for (std::size_t i = 0; i < coll.size(); ++i)
      if (image[f][i] == static_cast<std::int32_t>(i)) {
        out.verdict = OrbitVerdict::NotFree;
        out.f = f;
        out.member = coll[i].id();
        break;
      }
  std::vector<bool> done(coll.size(), false);
  std::vector<Subgroup> reps;
  for (auto i : sorted_ids(coll)) {
    if (done[i]) continue;
    std::vector<std::string> orbit;
    for (std::int32_t f = 0; f < order; ++f) {
      const auto j = image[f][i];
      if (!done[j]) {
        done[j] = true;
        orbit.push_back(coll[j].id());
      }
    }
    std::ranges::sort(orbit);
    out.orbits.push_back(std::move(orbit));
    reps.push_back(coll[i]);
  }
  out.representatives = Collection(std::move(reps));
  return out;
}

std::string to_string(CommVerdict v) {
  return v == CommVerdict::ClosedUnderBall ? "closed-under-ball" : "truncation-limited";
}

std::string to_string(ClosedForm f) {
  switch (f) {
    case ClosedForm::None:
      return "none";
    case ClosedForm::Itself:
      return "itself";
    case ClosedForm::WholeGroup:
      return "whole-group";
    case ClosedForm::Cyclic:
      return "cyclic";
  }
  return "";
}

std::string to_string(OrbitVerdict v) {
  switch (v) {
    case OrbitVerdict::Free:
      return "free";
    case OrbitVerdict::NotFree:
      return "not-free";
    case OrbitVerdict::NotInvariant:
      return "not-invariant";
  }
  return "";
}

std::string to_string(SubgroupRule r) {
  switch (r) {
    case SubgroupRule::Cyclic:
      return "cyclic";
    case SubgroupRule::Factor:
      return "factor";
    case SubgroupRule::LetterSubgroup:
      return "letter-subgroup";
    case SubgroupRule::WholeGroup:
      return "whole-group";
  }
  return "";
}

}  // namespace conelab
