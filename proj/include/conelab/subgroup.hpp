#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "conelab/cayley.hpp"
#include "conelab/group.hpp"

namespace conelab {

enum class SubgroupRule { Cyclic, Factor, LetterSubgroup, WholeGroup };

/// Declarative subgroup: an id, a membership rule and optional marked generators.
struct SubgroupSpec {
  std::string id;
  SubgroupRule rule = SubgroupRule::WholeGroup;
  Element generator;                  ///< Cyclic
  std::int32_t factor = 0;            ///< Factor: free-product factor index
  std::vector<std::int32_t> letters;  ///< LetterSubgroup: base letters
  GeneratorFamily marked;

  static SubgroupSpec cyclic(std::string id, Element generator);
  static SubgroupSpec factor_subgroup(std::string id, std::int32_t factor);
  static SubgroupSpec letter_subgroup(std::string id, std::vector<std::int32_t> letters);
  static SubgroupSpec whole(std::string id);
};

namespace detail {
struct SubgroupImpl;
}

/// A subgroup bound to its ambient group, with exact membership and canonical
/// left-coset keys.
///
/// coset_key(g) is a fixed element of gP depending only on the coset: the
/// (length, lexicographic) least element for cyclic subgroups of free groups,
/// the reduced word with its trailing P-letters removed for letter subgroups,
/// and the lattice point reduced along the generator for free abelian groups.
/// In A x| F the key of (x, f)P is (key of x in f(P), f).
class Subgroup {
 public:
  Subgroup(Group group, SubgroupSpec spec);

  const Group& group() const;
  const SubgroupSpec& spec() const;
  const std::string& id() const { return spec().id; }

  bool contains(const Element& x) const;
  /// x in g P g^{-1}.
  bool conjugate_contains(const Element& g, const Element& x) const;
  Element coset_key(const Element& g) const;
  bool same_coset(const Element& x, const Element& y) const;
  /// Generators certifying the subgroup: {u} for cyclic, the letters for
  /// letter and factor subgroups, empty for the whole group.
  std::vector<Element> generators() const;
  bool is_whole() const { return spec().rule == SubgroupRule::WholeGroup; }
  /// True when the subgroup is known to be finite (cyclic of finite order).
  bool is_finite() const;

 private:
  std::shared_ptr<const detail::SubgroupImpl> impl_;
};

/// Finite list of subgroups with distinct ids.
class Collection {
 public:
  Collection() = default;
  Collection(const Group& group, const std::vector<SubgroupSpec>& specs);
  explicit Collection(std::vector<Subgroup> members);

  const std::vector<Subgroup>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  const Subgroup& operator[](std::size_t i) const { return members_[i]; }
  std::optional<std::size_t> find(const std::string& id) const;
  std::vector<std::string> ids() const;

 private:
  std::vector<Subgroup> members_;
};

/// Left coset gP identified by its canonical key and the subgroup's position.
struct Coset {
  Element key;
  std::int32_t subgroup = 0;
  friend bool operator==(const Coset&, const Coset&) = default;
  friend auto operator<=>(const Coset&, const Coset&) = default;
};

/// G with a finite-index subgroup H and a right transversal R (G = union of H r).
class FiniteIndexPair {
 public:
  /// Checks that R contains e, that its cosets are distinct, and that every
  /// element of the radius-2 ball of the standard generators decomposes.
  FiniteIndexPair(Group group, Subgroup subgroup, std::vector<Element> transversal);

  const Group& group() const { return group_; }
  const Subgroup& subgroup() const { return subgroup_; }
  const std::vector<Element>& transversal() const { return transversal_; }
  /// (h, r) with x = h r.
  std::pair<Element, Element> decompose(const Element& x) const;

 private:
  Group group_;
  Subgroup subgroup_;
  std::vector<Element> transversal_;
};

/// Elements of the ball lying in the coset, in vertex order.
std::vector<std::int32_t> coset_elements(const BallGraph& ball, const Subgroup& P, const Element& g);
/// Elements of the ball lying in P, in vertex order.
std::vector<std::int32_t> subgroup_elements(const BallGraph& ball, const Subgroup& P);

/// Ball-scale commensurability of P and g Q g^{-1}: the intersection meets the
/// ball nontrivially and has at most m cosets among the ball elements of each side.
struct CommensurabilityCertificate {
  bool commensurable = false;
  std::int32_t index_in_p = 0;  ///< cosets of the intersection among P in the ball
  std::int32_t index_in_q = 0;  ///< same for g Q g^{-1}
};

CommensurabilityCertificate commensurable_in_ball(const BallGraph& ball, const Subgroup& P, const Subgroup& Q,
                                                  const Element& g, std::int32_t m);

enum class CommVerdict { ClosedUnderBall, TruncationLimited };
enum class ClosedForm { None, Itself, WholeGroup, Cyclic };

struct CommensuratorEstimate {
  std::vector<std::int32_t> elements;  ///< ball vertices in the estimate
  CommVerdict verdict = CommVerdict::TruncationLimited;
  ClosedForm form = ClosedForm::None;
  Element cyclic_generator;           ///< when form == Cyclic
  std::vector<Element> extra;         ///< elements outside P (first few), the generating witnesses
  std::int32_t radius = 0;
  std::int32_t index_bound = 0;
};

CommensuratorEstimate commensurator_estimate(const BallGraph& ball, const Subgroup& P, std::int32_t m);

/// g P g^{-1} = Q on ball(r - |g|), where the comparison is non-vacuous.
bool conjugate_equal_in_ball(const BallGraph& ball, const Subgroup& P, const Subgroup& Q, std::int32_t g_vertex);

struct RefineMerge {
  std::string member;          ///< original member id
  std::string representative;  ///< id of the class representative
  Element conjugator;          ///< g with g Comm(rep) g^{-1} = Comm(member)
};

struct Refinement {
  Collection refined;
  std::vector<RefineMerge> merges;
  std::map<std::string, CommensuratorEstimate> commensurators;
  bool truncation_limited = false;
  std::int32_t radius = 0;
  std::int32_t index_bound = 0;
};

Refinement refine(const BallGraph& ball, const Collection& coll, std::int32_t m);

struct ReducedCheck {
  bool reduced = true;
  std::string p, q;  ///< violating pair
  Element g;
  CommensurabilityCertificate certificate;
  std::int32_t radius = 0;
};

ReducedCheck is_reduced_check(const BallGraph& ball, const Collection& coll, std::int32_t m);

struct InvarianceWitness {
  Element g;
  std::string q;
  Element h;            ///< conjugator in H (when covered)
  std::string q_prime;  ///< matching member (when covered)
  bool covered = false;
};

struct InvarianceCheck {
  bool holds = true;
  std::vector<InvarianceWitness> entries;  ///< one per (g, Q), transversal order
  std::int32_t radius = 0;
};

/// For every r in the transversal and Q in coll, looks for h in H within the
/// ball and Q' in coll with r Q r^{-1} = h Q' h^{-1} on ball(radius - |r| - |h|).
InvarianceCheck conjugation_invariance_check(const BallGraph& ball, const FiniteIndexPair& pair,
                                             const Collection& coll);

enum class OrbitVerdict { Free, NotFree, NotInvariant };

struct OrbitRepresentatives {
  Collection representatives;
  OrbitVerdict verdict = OrbitVerdict::Free;
  std::int32_t f = 0;     ///< witness automorphism (fixing or escaping)
  std::string member;     ///< witness member
  std::vector<std::vector<std::string>> orbits;
};

OrbitRepresentatives f_orbit_representatives(const Group& group, const Collection& coll);

std::string to_string(CommVerdict v);
std::string to_string(ClosedForm f);
std::string to_string(OrbitVerdict v);
std::string to_string(SubgroupRule r);

}  // namespace conelab
