#pragma once

// Groups and generating families shared by the test suites.

#include <random>

#include "conelab/group.hpp"

namespace fixtures {

using namespace conelab;

inline Group f2() { return Group::build(GroupSpec::free_group(2)); }
inline Group z2() { return Group::build(GroupSpec::free_abelian(2)); }

/// G = <a,b,t : tat^{-1}=b, t^2=e> as F2 x| Z2 with t swapping a and b.
inline Group f2_semidirect_z2() {
  return Group::build(GroupSpec::semidirect(GroupSpec::free_group(2), FiniteActionSpec::cyclic_permutation({1, 0}, "t")));
}

/// (B1*B2*B3) x| Z3 with s cyclically shifting the factors.
inline Group free_product_z3() {
  return Group::build(
      GroupSpec::semidirect(GroupSpec::free_product(3), FiniteActionSpec::cyclic_permutation({1, 2, 0}, "s")));
}

inline GeneratorFamily finite_family(const Group& g, std::initializer_list<const char*> words) {
  GeneratorFamily fam;
  for (const auto* w : words) fam.atoms.push_back(g.parse(w));
  return fam;
}

/// T = {b, a, a^-1, a^2, a^-2, ...} truncated at k.
inline GeneratorFamily minasyan_t(const Group& g, std::int32_t k) {
  GeneratorFamily fam;
  fam.atoms.push_back(g.parse("b"));
  fam.powers.push_back(g.parse("a"));
  fam.k = k;
  return fam;
}

/// S = T u {t}.
inline GeneratorFamily minasyan_s(const Group& g, std::int32_t k) {
  auto fam = minasyan_t(g, k);
  fam.atoms.push_back(g.parse("t"));
  return fam;
}

inline Element random_element(const Group& g, std::mt19937_64& rng, int max_len = 8) {
  std::uniform_int_distribution<int> len(0, max_len);
  std::uniform_int_distribution<int> letter(0, g.letter_count() - 1);
  std::uniform_int_distribution<int> expd(-3, 3);
  std::uniform_int_distribution<int> fd(0, g.finite_order() - 1);
  RawWord raw;
  for (int i = len(rng); i > 0; --i) raw.push_back({letter(rng), expd(rng)});
  return g.normal_form(raw, fd(rng));
}

}  // namespace fixtures
