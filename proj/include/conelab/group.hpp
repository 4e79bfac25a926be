#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace conelab {

/// Raised for malformed group specs, unknown letters, and arithmetic misuse.
class GroupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One maximal block x^n of a word.
struct Syllable {
  std::int32_t letter = 0;
  std::int64_t exp = 0;

  friend bool operator==(const Syllable&, const Syllable&) = default;
  friend auto operator<=>(const Syllable&, const Syllable&) = default;
};

/// Canonical normal form of a group element.
///
/// `word` is the base-group part; `fpart` is the finite-group element id for
/// semidirect products (always 0 otherwise). Two elements of the same group are
/// equal iff their normal forms are equal, so the defaulted comparisons are the
/// group's equality and the lexicographic (letter-id, exponent) ordering.
struct Element {
  std::vector<Syllable> word;
  std::int32_t fpart = 0;

  bool is_identity() const { return word.empty() && fpart == 0; }
  /// Sum of |exponents|: the word length over the base letters.
  std::int64_t letter_length() const;

  friend bool operator==(const Element&, const Element&) = default;
  friend auto operator<=>(const Element&, const Element&) = default;
};

struct ElementHash {
  std::size_t operator()(const Element& e) const noexcept;
};

/// A raw, unreduced letter sequence. Letter ids index the group's alphabet.
using RawWord = std::vector<Syllable>;

enum class FamilyKind { Free, FreeAbelian, FreeProduct, SemidirectByFinite };

/// Finite group F together with its action on the base group by automorphisms.
struct FiniteActionSpec {
  /// mul[i][j] = id of i*j; element 0 is the identity.
  std::vector<std::vector<std::int32_t>> mul;
  /// images[f][letter] = image of the base letter under the automorphism f,
  /// as a raw base word.
  std::vector<std::vector<RawWord>> images;
  /// Display names of the non-identity elements (names[0] is unused).
  std::vector<std::string> names;

  /// Z_n generated by one automorphism that permutes base letters:
  /// letter i -> letter perm[i] (exponent +1).
  static FiniteActionSpec cyclic_permutation(std::vector<std::int32_t> perm,
                                             std::string generator_name = "t");
};

/// Declarative description of a built-in marked group family.
struct GroupSpec {
  FamilyKind kind = FamilyKind::Free;
  std::int32_t rank = 0;         ///< Free / FreeAbelian rank; factor count for FreeProduct
  std::int32_t factor_rank = 1;  ///< FreeProduct: each factor is FreeGroup(factor_rank)
  std::vector<std::string> letter_names;  ///< optional; defaults are generated
  std::shared_ptr<const GroupSpec> base;  ///< SemidirectByFinite only
  FiniteActionSpec action;                ///< SemidirectByFinite only

  static GroupSpec free_group(std::int32_t rank);
  static GroupSpec free_abelian(std::int32_t rank);
  static GroupSpec free_product(std::int32_t factors, std::int32_t factor_rank = 1);
  static GroupSpec semidirect(GroupSpec base, FiniteActionSpec action);
};

namespace detail {
struct GroupImpl;
}

/// Immutable handle to a built group. Cheap to copy; safe to share across threads.
class Group {
 public:
  /// An empty handle; only assignment and destruction are valid on it.
  Group() = default;

  /// Validates the spec (ranks, action table) and builds the arithmetic.
  static Group build(const GroupSpec& spec);

  FamilyKind kind() const;
  const GroupSpec& spec() const;
  bool is_semidirect() const { return kind() == FamilyKind::SemidirectByFinite; }

  /// Number of base letters.
  std::int32_t letter_count() const;
  const std::string& letter_name(std::int32_t letter) const;
  /// FreeProduct: factor index (0-based) of a letter; -1 for other families.
  std::int32_t factor_of(std::int32_t letter) const;
  std::int32_t factor_count() const;

  /// Order of the finite part (1 unless semidirect).
  std::int32_t finite_order() const;
  const std::string& finite_name(std::int32_t f) const;
  std::int32_t finite_mul(std::int32_t f, std::int32_t g) const;
  std::int32_t finite_inverse(std::int32_t f) const;

  Element identity() const { return {}; }
  Element letter(std::int32_t id, std::int64_t exp = 1) const;
  Element finite_element(std::int32_t f) const;

  /// Normal form of a raw base word followed by the finite element `fpart`.
  Element normal_form(const RawWord& raw, std::int32_t fpart = 0) const;
  /// Re-normalizes an element (idempotent on canonical input).
  Element normal_form(const Element& e) const;

  Element multiply(const Element& x, const Element& y) const;
  Element invert(const Element& x) const;
  Element power(const Element& x, std::int64_t n) const;
  /// x^{-1} y, the Cayley-graph displacement from x to y.
  Element between(const Element& x, const Element& y) const;
  Element conjugate(const Element& g, const Element& x) const;  ///< g x g^{-1}

  /// The automorphism f applied to a base element.
  Element apply_automorphism(std::int32_t f, const Element& x) const;

  /// Throws unless `e` is a canonical element of this group.
  void check(const Element& e) const;
  bool is_canonical(const Element& e) const;

  std::string to_string(const Element& e) const;
  /// Parses "e", "a", "a^2*b^-1*t", ... and normalizes.
  Element parse(std::string_view text) const;
  std::optional<std::int32_t> find_letter(std::string_view name) const;
  std::optional<std::int32_t> find_finite(std::string_view name) const;

  /// The base group of a semidirect product (a group of its own).
  Group base_group() const;

  friend bool operator==(const Group& a, const Group& b) { return a.impl_ == b.impl_; }

 private:
  explicit Group(std::shared_ptr<const detail::GroupImpl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const detail::GroupImpl> impl_;
};

/// Finite or parameterized family of generators, truncated at a level k.
///
/// Atoms are always included. Power rules contribute base^n for 1 <= |n| <= k
/// (positive n only when `symmetric` is off). Factor rules contribute every
/// nontrivial element of a free-product factor of letter length <= k. When
/// `finite_elements` is set, every non-identity element of the finite part of a
/// semidirect product is added.
struct GeneratorFamily {
  std::vector<Element> atoms;
  std::vector<Element> powers;
  std::vector<std::int32_t> factors;
  bool finite_elements = false;
  bool symmetric = true;
  std::int32_t k = 1;

  /// True when no rule depends on the truncation level.
  bool is_finite() const { return powers.empty() && factors.empty(); }

  /// Sorted, duplicate-free, identity-free generator list at level k.
  std::vector<Element> enumerate(const Group& g, std::int32_t level) const;
  std::vector<Element> enumerate(const Group& g) const { return enumerate(g, k); }

  /// The standard letters (plus the finite part for semidirect groups).
  static GeneratorFamily standard(const Group& g);
};

}  // namespace conelab
