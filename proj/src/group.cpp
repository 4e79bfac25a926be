#include "conelab/group.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <set>

namespace conelab {

namespace {

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r = 0;
  if (__builtin_add_overflow(a, b, &r)) throw GroupError("exponent overflow");
  return r;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r)) throw GroupError("exponent overflow");
  return r;
}

// Appends a syllable to a freely reduced word, cancelling at the junction.
void free_append(std::vector<Syllable>& out, Syllable s) {
  if (s.exp == 0) return;
  if (!out.empty() && out.back().letter == s.letter) {
    const std::int64_t e = checked_add(out.back().exp, s.exp);
    if (e == 0) {
      out.pop_back();
    } else {
      out.back().exp = e;
    }
    return;
  }
  out.push_back(s);
}

std::vector<Syllable> free_multiply(const std::vector<Syllable>& x, const std::vector<Syllable>& y) {
  // Cancel the tail of x against the head of y before copying.
  std::size_t i = x.size();
  std::size_t j = 0;
  while (i > 0 && j < y.size() && x[i - 1].letter == y[j].letter && x[i - 1].exp + y[j].exp == 0) {
    --i;
    ++j;
  }
  std::vector<Syllable> out;
  out.reserve(i + (y.size() - j));
  out.insert(out.end(), x.begin(), x.begin() + static_cast<std::ptrdiff_t>(i));
  for (std::size_t k = j; k < y.size(); ++k) free_append(out, y[k]);
  return out;
}

std::vector<Syllable> free_invert(const std::vector<Syllable>& x) {
  std::vector<Syllable> out;
  out.reserve(x.size());
  for (auto it = x.rbegin(); it != x.rend(); ++it) {
    if (it->exp == std::numeric_limits<std::int64_t>::min()) throw GroupError("exponent overflow");
    out.push_back({it->letter, -it->exp});
  }
  return out;
}

std::vector<Syllable> abelian_multiply(const std::vector<Syllable>& x, const std::vector<Syllable>& y) {
  std::vector<Syllable> out;
  out.reserve(x.size() + y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < x.size() || j < y.size()) {
    if (j == y.size() || (i < x.size() && x[i].letter < y[j].letter)) {
      out.push_back(x[i++]);
    } else if (i == x.size() || y[j].letter < x[i].letter) {
      out.push_back(y[j++]);
    } else {
      const std::int64_t e = checked_add(x[i].exp, y[j].exp);
      if (e != 0) out.push_back({x[i].letter, e});
      ++i;
      ++j;
    }
  }
  return out;
}

bool is_identity_perm(const std::vector<std::int32_t>& p) {
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] != static_cast<std::int32_t>(i)) return false;
  return true;
}

std::string default_letter(std::int32_t i, std::int32_t rank) {
  if (rank <= 4) return std::string(1, static_cast<char>('a' + i));
  return "x" + std::to_string(i + 1);
}

}  // namespace

std::int64_t Element::letter_length() const {
  std::int64_t n = 0;
  for (const auto& s : word) n += s.exp < 0 ? -s.exp : s.exp;
  return n;
}

std::size_t ElementHash::operator()(const Element& e) const noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(e.fpart);
  for (const auto& s : e.word) {
    std::uint64_t v = (static_cast<std::uint64_t>(s.letter) << 40) ^ static_cast<std::uint64_t>(s.exp);
    v *= 0xff51afd7ed558ccdULL;
    v ^= v >> 33;
    h = (h ^ v) * 0xc4ceb9fe1a85ec53ULL;
    h ^= h >> 29;
  }
  return static_cast<std::size_t>(h);
}

FiniteActionSpec FiniteActionSpec::cyclic_permutation(std::vector<std::int32_t> perm,
                                                      std::string generator_name) {
  const auto n_letters = static_cast<std::int32_t>(perm.size());
  // Order of the permutation.
  std::vector<std::int32_t> cur(perm.size());
  for (std::int32_t i = 0; i < n_letters; ++i) cur[i] = i;
  std::int32_t order = 0;
  do {
    for (auto& c : cur) {
      if (c < 0 || c >= n_letters) throw GroupError("permutation entry out of range");
      c = perm[c];
    }
    ++order;
    if (order > 10000) throw GroupError("permutation has excessive order");
  } while (!is_identity_perm(cur));

  FiniteActionSpec spec;
  spec.mul.assign(order, std::vector<std::int32_t>(order));
  for (std::int32_t i = 0; i < order; ++i)
    for (std::int32_t j = 0; j < order; ++j) spec.mul[i][j] = (i + j) % order;
  spec.names.assign(order, "");
  for (std::int32_t i = 1; i < order; ++i)
    spec.names[i] = i == 1 ? generator_name : generator_name + std::to_string(i);
  spec.images.assign(order, std::vector<RawWord>(perm.size()));
  for (std::int32_t l = 0; l < n_letters; ++l) cur[l] = l;
  for (std::int32_t f = 0; f < order; ++f) {
    for (std::int32_t l = 0; l < n_letters; ++l) spec.images[f][l] = RawWord{{cur[l], 1}};
    for (auto& c : cur) c = perm[c];
  }
  return spec;
}

GroupSpec GroupSpec::free_group(std::int32_t rank) {
  GroupSpec s;
  s.kind = FamilyKind::Free;
  s.rank = rank;
  return s;
}

GroupSpec GroupSpec::free_abelian(std::int32_t rank) {
  GroupSpec s;
  s.kind = FamilyKind::FreeAbelian;
  s.rank = rank;
  return s;
}

GroupSpec GroupSpec::free_product(std::int32_t factors, std::int32_t factor_rank) {
  GroupSpec s;
  s.kind = FamilyKind::FreeProduct;
  s.rank = factors;
  s.factor_rank = factor_rank;
  return s;
}

GroupSpec GroupSpec::semidirect(GroupSpec base, FiniteActionSpec action) {
  GroupSpec s;
  s.kind = FamilyKind::SemidirectByFinite;
  s.base = std::make_shared<const GroupSpec>(std::move(base));
  s.action = std::move(action);
  return s;
}

namespace detail {

struct GroupImpl {
  GroupSpec spec;
  FamilyKind base_kind = FamilyKind::Free;  // arithmetic of the word part
  std::int32_t letters = 0;
  std::vector<std::string> names;
  std::vector<std::int32_t> factor;
  std::int32_t factors = 0;
  // finite part
  std::int32_t order = 1;
  std::vector<std::vector<std::int32_t>> mul{{0}};
  std::vector<std::int32_t> inv{0};
  std::vector<std::string> fnames{""};
  std::vector<std::vector<std::vector<Syllable>>> images;  // [f][letter] canonical base word
  std::shared_ptr<const GroupImpl> base;

  std::vector<Syllable> word_mul(const std::vector<Syllable>& x, const std::vector<Syllable>& y) const {
    return base_kind == FamilyKind::FreeAbelian ? abelian_multiply(x, y) : free_multiply(x, y);
  }
  std::vector<Syllable> word_inv(const std::vector<Syllable>& x) const {
    auto out = free_invert(x);
    if (base_kind == FamilyKind::FreeAbelian) std::ranges::reverse(out);
    return out;
  }
  std::vector<Syllable> word_pow(const std::vector<Syllable>& x, std::int64_t n) const {
    if (n == 0 || x.empty()) return {};
    if (x.size() == 1) return {{x[0].letter, checked_mul(x[0].exp, n)}};
    if (base_kind == FamilyKind::FreeAbelian) {
      std::vector<Syllable> out = x;
      for (auto& s : out) s.exp = checked_mul(s.exp, n);
      return out;
    }
    std::vector<Syllable> b = n < 0 ? word_inv(x) : x;
    std::uint64_t m = n < 0 ? static_cast<std::uint64_t>(-(n + 1)) + 1 : static_cast<std::uint64_t>(n);
    std::vector<Syllable> acc;
    while (m > 0) {
      if (m & 1U) acc = word_mul(acc, b);
      m >>= 1U;
      if (m > 0) b = word_mul(b, b);
    }
    return acc;
  }
  std::vector<Syllable> word_normal(const RawWord& raw) const {
    std::vector<Syllable> out;
    if (base_kind == FamilyKind::FreeAbelian) {
      for (const auto& s : raw) {
        if (s.letter < 0 || s.letter >= letters) throw GroupError("unknown letter id " + std::to_string(s.letter));
        if (s.exp == 0) continue;
        out = abelian_multiply(out, {s});
      }
      return out;
    }
    for (const auto& s : raw) {
      if (s.letter < 0 || s.letter >= letters) throw GroupError("unknown letter id " + std::to_string(s.letter));
      free_append(out, s);
    }
    return out;
  }
  std::vector<Syllable> automorphism(std::int32_t f, const std::vector<Syllable>& x) const {
    if (f == 0) return x;
    std::vector<Syllable> out;
    for (const auto& s : x) out = word_mul(out, word_pow(images[f][s.letter], s.exp));
    return out;
  }
  bool word_canonical(const std::vector<Syllable>& w) const {
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i].exp == 0 || w[i].letter < 0 || w[i].letter >= letters) return false;
      if (i > 0) {
        if (base_kind == FamilyKind::FreeAbelian ? w[i - 1].letter >= w[i].letter
                                                 : w[i - 1].letter == w[i].letter)
          return false;
      }
    }
    return true;
  }
};

}  // namespace detail

namespace {

std::shared_ptr<detail::GroupImpl> build_impl(const GroupSpec& spec) {
  auto impl = std::make_shared<detail::GroupImpl>();
  impl->spec = spec;
  switch (spec.kind) {
    case FamilyKind::Free:
    case FamilyKind::FreeAbelian: {
      if (spec.rank <= 0) throw GroupError("rank must be positive, got " + std::to_string(spec.rank));
      impl->base_kind = spec.kind;
      impl->letters = spec.rank;
      for (std::int32_t i = 0; i < spec.rank; ++i) impl->names.push_back(default_letter(i, spec.rank));
      impl->factor.assign(spec.rank, -1);
      break;
    }
    case FamilyKind::FreeProduct: {
      if (spec.rank <= 0) throw GroupError("factor count must be positive, got " + std::to_string(spec.rank));
      if (spec.factor_rank <= 0) throw GroupError("factor rank must be positive");
      impl->base_kind = FamilyKind::Free;
      impl->letters = spec.rank * spec.factor_rank;
      impl->factors = spec.rank;
      for (std::int32_t i = 0; i < spec.rank; ++i) {
        for (std::int32_t j = 0; j < spec.factor_rank; ++j) {
          impl->names.push_back(spec.factor_rank == 1 ? "b" + std::to_string(i + 1)
                                                      : "b" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
          impl->factor.push_back(i);
        }
      }
      break;
    }
    case FamilyKind::SemidirectByFinite: {
      if (!spec.base) throw GroupError("semidirect product without base group");
      if (spec.base->kind == FamilyKind::SemidirectByFinite)
        throw GroupError("nested semidirect products are not supported");
      auto base = build_impl(*spec.base);
      impl->base_kind = base->base_kind;
      impl->letters = base->letters;
      impl->names = base->names;
      impl->factor = base->factor;
      impl->factors = base->factors;
      impl->base = base;

      const auto& act = spec.action;
      const auto m = static_cast<std::int32_t>(act.mul.size());
      if (m == 0) throw GroupError("finite group table is empty");
      for (std::int32_t i = 0; i < m; ++i) {
        if (static_cast<std::int32_t>(act.mul[i].size()) != m)
          throw GroupError("finite group table row " + std::to_string(i) + " has wrong length");
        std::vector<bool> seen(m, false);
        for (std::int32_t j = 0; j < m; ++j) {
          const auto v = act.mul[i][j];
          if (v < 0 || v >= m || seen[v])
            throw GroupError("finite group table row " + std::to_string(i) + " is not a permutation");
          seen[v] = true;
        }
        if (act.mul[0][i] != i || act.mul[i][0] != i)
          throw GroupError("finite group element 0 must be the identity (row " + std::to_string(i) + ")");
      }
      for (std::int32_t i = 0; i < m; ++i)
        for (std::int32_t j = 0; j < m; ++j)
          for (std::int32_t k = 0; k < m; ++k)
            if (act.mul[act.mul[i][j]][k] != act.mul[i][act.mul[j][k]])
              throw GroupError("finite group table is not associative at row " + std::to_string(i));
      impl->order = m;
      impl->mul = act.mul;
      impl->inv.assign(m, 0);
      for (std::int32_t i = 0; i < m; ++i)
        for (std::int32_t j = 0; j < m; ++j)
          if (act.mul[i][j] == 0) impl->inv[i] = j;

      impl->fnames.assign(m, "");
      for (std::int32_t i = 1; i < m; ++i) {
        impl->fnames[i] = i < static_cast<std::int32_t>(act.names.size()) && !act.names[i].empty()
                              ? act.names[i]
                              : (m == 2 ? std::string("t") : "f" + std::to_string(i));
      }

      if (static_cast<std::int32_t>(act.images.size()) != m)
        throw GroupError("action table needs one row per finite group element");
      impl->images.resize(m);
      for (std::int32_t f = 0; f < m; ++f) {
        if (static_cast<std::int32_t>(act.images[f].size()) != impl->letters)
          throw GroupError("action table row " + std::to_string(f) + " must map every base letter");
        for (const auto& raw : act.images[f]) impl->images[f].push_back(base->word_normal(raw));
      }
      for (std::int32_t l = 0; l < impl->letters; ++l) {
        if (impl->images[0][l] != std::vector<Syllable>{{l, 1}})
          throw GroupError("action table row 0 must be the identity automorphism");
      }
      // Composition must match the finite-group multiplication; together with
      // row 0 being the identity this makes every row an automorphism.
      for (std::int32_t f = 0; f < m; ++f) {
        for (std::int32_t g = 0; g < m; ++g) {
          for (std::int32_t l = 0; l < impl->letters; ++l) {
            const auto lhs = impl->automorphism(f, impl->images[g][l]);
            if (lhs != impl->images[act.mul[f][g]][l])
              throw GroupError("action table row " + std::to_string(f) +
                               " is not an automorphism compatible with the group law (composed with row " +
                               std::to_string(g) + ")");
          }
        }
      }
      break;
    }
  }
  if (!spec.letter_names.empty()) {
    if (static_cast<std::int32_t>(spec.letter_names.size()) != impl->letters)
      throw GroupError("letter_names must name every letter");
    impl->names = spec.letter_names;
  }
  std::set<std::string> used;
  for (const auto& n : impl->names) {
    if (n.empty() || n == "e" || !used.insert(n).second) throw GroupError("invalid or duplicate letter name '" + n + "'");
  }
  for (std::int32_t i = 1; i < impl->order; ++i) {
    if (impl->fnames[i].empty() || impl->fnames[i] == "e" || !used.insert(impl->fnames[i]).second)
      throw GroupError("invalid or duplicate finite element name '" + impl->fnames[i] + "'");
  }
  return impl;
}

}  // namespace

Group Group::build(const GroupSpec& spec) { return Group(build_impl(spec)); }

FamilyKind Group::kind() const { return impl_->spec.kind; }
const GroupSpec& Group::spec() const { return impl_->spec; }
std::int32_t Group::letter_count() const { return impl_->letters; }
const std::string& Group::letter_name(std::int32_t letter) const { return impl_->names.at(letter); }
std::int32_t Group::factor_of(std::int32_t letter) const { return impl_->factor.at(letter); }
std::int32_t Group::factor_count() const { return impl_->factors; }
std::int32_t Group::finite_order() const { return impl_->order; }
const std::string& Group::finite_name(std::int32_t f) const { return impl_->fnames.at(f); }
std::int32_t Group::finite_mul(std::int32_t f, std::int32_t g) const { return impl_->mul.at(f).at(g); }
std::int32_t Group::finite_inverse(std::int32_t f) const { return impl_->inv.at(f); }

Element Group::letter(std::int32_t id, std::int64_t exp) const {
  if (id < 0 || id >= impl_->letters) throw GroupError("unknown letter id " + std::to_string(id));
  Element e;
  if (exp != 0) e.word.push_back({id, exp});
  return e;
}

Element Group::finite_element(std::int32_t f) const {
  if (f < 0 || f >= impl_->order) throw GroupError("unknown finite element id " + std::to_string(f));
  Element e;
  e.fpart = f;
  return e;
}

Element Group::normal_form(const RawWord& raw, std::int32_t fpart) const {
  if (fpart < 0 || fpart >= impl_->order) throw GroupError("unknown finite element id " + std::to_string(fpart));
  Element e;
  e.word = impl_->word_normal(raw);
  e.fpart = fpart;
  return e;
}

Element Group::normal_form(const Element& e) const { return normal_form(e.word, e.fpart); }

void Group::check(const Element& e) const {
  if (!is_canonical(e)) throw GroupError("element is not a canonical element of this group: family mismatch");
}

bool Group::is_canonical(const Element& e) const {
  return e.fpart >= 0 && e.fpart < impl_->order && impl_->word_canonical(e.word);
}

Element Group::multiply(const Element& x, const Element& y) const {
  Element out;
  if (impl_->order == 1) {
    if (x.fpart != 0 || y.fpart != 0) throw GroupError("family mismatch: finite part in a group without one");
    out.word = impl_->word_mul(x.word, y.word);
    return out;
  }
  if (x.fpart < 0 || x.fpart >= impl_->order || y.fpart < 0 || y.fpart >= impl_->order)
    throw GroupError("family mismatch: finite part out of range");
  // (x f)(y g) = x f(y) fg
  out.word = impl_->word_mul(x.word, impl_->automorphism(x.fpart, y.word));
  out.fpart = impl_->mul[x.fpart][y.fpart];
  return out;
}

Element Group::invert(const Element& x) const {
  Element out;
  const auto fi = impl_->inv.at(x.fpart);
  // (x f)^{-1} = f^{-1}(x^{-1}) f^{-1}
  out.word = impl_->automorphism(fi, impl_->word_inv(x.word));
  out.fpart = fi;
  return out;
}

Element Group::power(const Element& x, std::int64_t n) const {
  if (x.fpart == 0) {
    Element out;
    out.word = impl_->word_pow(x.word, n);
    return out;
  }
  Element base = n < 0 ? invert(x) : x;
  std::uint64_t m = n < 0 ? static_cast<std::uint64_t>(-(n + 1)) + 1 : static_cast<std::uint64_t>(n);
  Element acc;
  while (m > 0) {
    if (m & 1U) acc = multiply(acc, base);
    m >>= 1U;
    if (m > 0) base = multiply(base, base);
  }
  return acc;
}

Element Group::between(const Element& x, const Element& y) const { return multiply(invert(x), y); }

Element Group::conjugate(const Element& g, const Element& x) const { return multiply(multiply(g, x), invert(g)); }

Element Group::apply_automorphism(std::int32_t f, const Element& x) const {
  if (f < 0 || f >= impl_->order) throw GroupError("unknown finite element id " + std::to_string(f));
  if (x.fpart != 0) throw GroupError("apply_automorphism: element is not in the base group");
  Element out;
  out.word = impl_->automorphism(f, x.word);
  return out;
}

std::string Group::to_string(const Element& e) const {
  if (e.is_identity()) return "e";
  std::string s;
  for (const auto& syl : e.word) {
    if (!s.empty()) s += '*';
    s += impl_->names.at(syl.letter);
    if (syl.exp != 1) {
      s += '^';
      s += std::to_string(syl.exp);
    }
  }
  if (e.fpart != 0) {
    if (!s.empty()) s += '*';
    s += impl_->fnames.at(e.fpart);
  }
  return s;
}

std::optional<std::int32_t> Group::find_letter(std::string_view name) const {
  for (std::int32_t i = 0; i < impl_->letters; ++i)
    if (impl_->names[i] == name) return i;
  return std::nullopt;
}

std::optional<std::int32_t> Group::find_finite(std::string_view name) const {
  for (std::int32_t i = 1; i < impl_->order; ++i)
    if (impl_->fnames[i] == name) return i;
  return std::nullopt;
}

Element Group::parse(std::string_view text) const {
  auto trim = [](std::string_view v) {
    while (!v.empty() && (v.front() == ' ' || v.front() == '\t')) v.remove_prefix(1);
    while (!v.empty() && (v.back() == ' ' || v.back() == '\t')) v.remove_suffix(1);
    return v;
  };
  text = trim(text);
  if (text.empty()) throw GroupError("empty word");
  Element acc;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto star = text.find('*', pos);
    const auto tok = trim(text.substr(pos, star == std::string_view::npos ? std::string_view::npos : star - pos));
    if (tok.empty()) throw GroupError("malformed word '" + std::string(text) + "'");
    std::string_view name = tok;
    std::int64_t exp = 1;
    if (const auto caret = tok.find('^'); caret != std::string_view::npos) {
      name = trim(tok.substr(0, caret));
      const auto num = trim(tok.substr(caret + 1));
      const auto* first = num.data();
      const auto* last = num.data() + num.size();
      if (!num.empty() && *first == '+') ++first;
      auto [ptr, ec] = std::from_chars(first, last, exp);
      if (ec != std::errc() || ptr != last) throw GroupError("bad exponent in '" + std::string(tok) + "'");
    }
    Element factor;
    if (name == "e") {
      factor = identity();
    } else if (auto l = find_letter(name)) {
      factor = letter(*l, exp);
      exp = 1;
    } else if (auto f = find_finite(name)) {
      factor = finite_element(*f);
    } else {
      throw GroupError("unknown letter '" + std::string(name) + "'");
    }
    acc = multiply(acc, power(factor, exp));
    if (star == std::string_view::npos) break;
    pos = star + 1;
  }
  return acc;
}

Group Group::base_group() const {
  if (!impl_->base) return *this;
  return Group(impl_->base);
}

std::vector<Element> GeneratorFamily::enumerate(const Group& g, std::int32_t level) const {
  if (level < 1) throw GroupError("truncation level must be >= 1");
  std::vector<Element> out;
  for (const auto& a : atoms) out.push_back(g.normal_form(a));
  for (const auto& p : powers) {
    for (std::int64_t n = 1; n <= level; ++n) {
      out.push_back(g.power(p, n));
      if (symmetric) out.push_back(g.power(p, -n));
    }
  }
  for (const auto factor : factors) {
    if (factor < 0 || factor >= g.factor_count()) throw GroupError("factor index out of range");
    std::vector<std::int32_t> letters;
    for (std::int32_t l = 0; l < g.letter_count(); ++l)
      if (g.factor_of(l) == factor) letters.push_back(l);
    // All reduced words over the factor letters of length <= level.
    std::vector<Element> frontier{g.identity()};
    for (std::int32_t len = 1; len <= level; ++len) {
      std::vector<Element> next;
      for (const auto& w : frontier) {
        for (const auto l : letters) {
          for (const std::int64_t s : {1, -1}) {
            if (!w.word.empty() && w.word.back().letter == l && (w.word.back().exp > 0) != (s > 0)) continue;
            next.push_back(g.multiply(w, g.letter(l, s)));
          }
        }
      }
      out.insert(out.end(), next.begin(), next.end());
      frontier = std::move(next);
    }
  }
  if (finite_elements)
    for (std::int32_t f = 1; f < g.finite_order(); ++f) out.push_back(g.finite_element(f));
  if (symmetric) {
    const auto n = out.size();
    for (std::size_t i = 0; i < n; ++i) out.push_back(g.invert(out[i]));
  }
  std::erase_if(out, [](const Element& e) { return e.is_identity(); });
  std::ranges::sort(out);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

GeneratorFamily GeneratorFamily::standard(const Group& g) {
  GeneratorFamily fam;
  for (std::int32_t l = 0; l < g.letter_count(); ++l) fam.atoms.push_back(g.letter(l));
  fam.finite_elements = g.is_semidirect();
  fam.symmetric = true;
  fam.k = 1;
  return fam;
}

}  // namespace conelab
