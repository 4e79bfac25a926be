#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "conelab/cayley.hpp"
#include "conelab/conedoff.hpp"
#include "conelab/group.hpp"
#include "conelab/subgroup.hpp"

namespace conelab {

/// A group (or the subgroup generated by `family`) with the word metric of
/// enumerate(k). Subgroups of a semidirect product live in the ambient group.
struct Side {
  Group group;
  GeneratorFamily family;
  std::int32_t k = 1;

  std::vector<Element> generators() const { return family.enumerate(group, k); }
  Side at_level(std::int32_t level) const { return {group, family, level}; }
};

enum class QiKind { Identity, Inclusion, FiniteIndexProjection, SemidirectRetraction, Induced, Composed };

std::string to_string(QiKind kind);

/// A map between groups with a chosen quasi-inverse.
class QiMap {
 public:
  using Fn = std::function<Element(const Element&)>;

  QiMap(QiKind kind, Group source, Group target, Fn forward, Fn backward, std::string label);

  Element operator()(const Element& x) const { return forward_(x); }
  Element backward(const Element& y) const { return backward_(y); }

  QiKind kind() const { return kind_; }
  const Group& source() const { return source_; }
  const Group& target() const { return target_; }
  const std::string& label() const { return label_; }
  /// The element g of an induced map q_g.
  const std::optional<Element>& induced_by() const { return induced_by_; }

  /// Same pair of maps with the roles swapped.
  QiMap quasi_inverse(QiKind kind, std::string label) const;

 private:
  friend QiMap induced_map(const QiMap& q, const Element& g);
  QiKind kind_;
  Group source_, target_;
  Fn forward_, backward_;
  std::string label_;
  std::optional<Element> induced_by_;
};

QiMap identity_map(const Group& group);
/// q(h r) = h for the transversal; the quasi-inverse is the inclusion H -> G.
QiMap finite_index_projection(const FiniteIndexPair& pair);
/// H -> G with quasi-inverse q(h r) = h.
QiMap inclusion_map(const FiniteIndexPair& pair);
/// (a, f) -> a on a semidirect product A x| F; the quasi-inverse is A -> A x| F.
QiMap semidirect_retraction(const Group& group);
/// q_g(h) = q(g * qbar(h)), a self-map of the target; quasi-inverse q_{g^-1}.
QiMap induced_map(const QiMap& q, const Element& g);
/// outer o inner.
QiMap compose(const QiMap& outer, const QiMap& inner);

/// L is stored in quarters so the fitting grid is exact.
inline double quarters(std::int32_t q) { return q / 4.0; }

struct PairWitness {
  Element x, y;
  std::int64_t source = 0;  ///< d(x, y)
  std::int64_t target = 0;  ///< d(q x, q y)
  friend bool operator==(const PairWitness&, const PairWitness&) = default;
};

/// Distinct (source, target) distance pairs seen in a scan, each with the
/// first pair realizing it.
struct DistortionSample {
  std::map<std::pair<std::int64_t, std::int64_t>, PairWitness> classes;
  std::uint64_t pairs = 0;

  void merge(const DistortionSample& other);
  /// Largest target/source ratio over pairs with source > 0.
  std::optional<PairWitness> worst_ratio() const;
};

inline constexpr std::int32_t kMaxLQuarters = 64 * 4;
inline constexpr std::int64_t kMaxC = 64;

/// Witness-minimal (L, C) on the grid L in {1, 5/4, ..., 64}, C in {0..64}:
/// the admissible pair minimizing L + C, ties to the smaller L.
struct QiFit {
  bool bounded = false;
  std::int32_t l_quarters = 0;
  std::int64_t c = 0;
  /// Violating pairs for (L - 1/4, C) and (L, C - 1); empty when at the grid edge.
  std::optional<PairWitness> l_witness, c_witness;
  /// Unbounded verdict: the pair with the worst ratio.
  std::optional<PairWitness> unbounded_witness;
  /// Smallest admissible C for each L on the grid (nullopt above the cap).
  std::vector<std::pair<std::int32_t, std::int64_t>> pareto;

  double L() const { return quarters(l_quarters); }
};

QiFit fit_constants(const DistortionSample& sample);
bool satisfies(const PairWitness& w, std::int32_t l_quarters, std::int64_t c);

struct QiConstants {
  QiFit fit;
  std::int64_t density = 0;  ///< ball distance from inner target points to the image
  bool density_certified = false;
  std::optional<PairWitness> worst_ratio;
  std::uint64_t pairs = 0;
  std::int32_t radius = 0, margin = 0, source_k = 1, target_k = 1, target_radius = 0;
};

struct ScanOptions {
  std::int32_t radius = 4;
  std::int32_t margin = -1;  ///< -1: default_margin(radius)
  std::int32_t target_radius = -1;  ///< -1: radius
  std::size_t table_limit = 400'000;
  std::size_t max_vertices = kDefaultVertexCap;
};

/// Inner points (dist <= r - margin) of the source ball.
std::vector<Element> inner_points(const Side& side, std::int32_t radius, std::int32_t margin,
                                  std::size_t max_vertices = kDefaultVertexCap);

/// Exact distances of all pairs of `points` and of their images.
DistortionSample scan_pairs(const QiMap& q, const Side& source, const Side& target, const std::vector<Element>& points,
                            std::size_t table_limit = 400'000);

QiConstants estimate_qi_constants(const QiMap& q, const Side& source, const Side& target,
                                  const ScanOptions& options = {});

/// sup d(backward(forward x), x) over source points and sup d(forward(backward y), y)
/// over target points.
struct InverseDefect {
  std::int64_t source = 0, target = 0;
};
InverseDefect quasi_inverse_defect(const QiMap& q, const Side& source, const Side& target,
                                   const std::vector<Element>& source_points,
                                   const std::vector<Element>& target_points);

enum class UniformityVerdict { UniformToSample, NonUniform, Inconclusive, Unbounded };
std::string to_string(UniformityVerdict v);

struct UniformityLevel {
  std::int32_t k = 1;
  QiFit fit;  ///< one (L, C) covering every q_g in the sample
  std::optional<PairWitness> worst;
  Element worst_g;
  double worst_ratio = 0;
  std::vector<std::pair<Element, QiFit>> per_g;
  std::int64_t quasi_action_k = 0;  ///< sup defect of the quasi-action axioms
  std::uint64_t pairs = 0;
};

struct UniformityReport {
  UniformityVerdict verdict = UniformityVerdict::Inconclusive;
  std::vector<UniformityLevel> levels;
  Element witness_g;
  std::optional<PairWitness> witness;  ///< at the last level
  double witness_ratio = 0;
  std::int32_t radius = 0, margin = 0;
};

/// Fits q_g : Gamma(H, T_k) -> Gamma(H, T_k) for each g in the sample and each
/// level. Across levels the verdict is non-uniform when the worst distortion
/// ratio grows strictly with k, uniform-to-sample when the covering constants
/// do not change, and inconclusive otherwise.
UniformityReport uniformity_report(const QiMap& q, const std::vector<Element>& g_sample, const Side& target,
                                   const std::vector<std::int32_t>& levels, const ScanOptions& options = {});

/// The default g-sample: the radius-2 ball of the standard generators.
std::vector<Element> default_g_sample(const Group& group);

class QiPreconditionFailed : public GroupError {
 public:
  QiPreconditionFailed(const std::string& what, PairWitness witness);
  PairWitness witness;
};

struct LemmaOptions {
  std::int32_t l0_quarters = 4;
  std::int64_t c0 = 0;
  std::int32_t l1_quarters = 4;  ///< uniformity constants of the induced quasi-action
  std::int64_t c1 = 0;
  std::int32_t pair_radius = 2;   ///< f, g range over this ball when listing S
  std::int32_t check_radius = 6;  ///< inequalities are checked on its inner points
  std::int32_t margin = -1;
  std::int32_t reestimate_radius = 3;
  std::size_t table_limit = 400'000;
};

struct LemmaResult {
  std::int64_t k0 = 0;
  std::vector<Element> generators;  ///< listed part of S, sorted
  bool contains_s0 = false;
  std::vector<Element> missing_s0;
  QiFit base_fit;  ///< q on the finite sets
  double l_bar = 0;
  /// dist_S(a,b) <= dist_T(qa,qb): certified by a path whose steps are
  /// members of S with explicit witnesses.
  std::uint64_t lower_pairs = 0, lower_violations = 0;
  double coverage = 0;
  std::optional<PairWitness> lower_witness;
  /// dist_T(q g, q gs) <= L-bar for inner g and listed s.
  std::uint64_t upper_steps = 0, upper_violations = 0;
  std::int64_t upper_max = 0;
  std::optional<PairWitness> upper_witness;
  QiConstants reestimated;  ///< q : Gamma(G, listed S) -> Gamma(H, T_k)
};

/// Builds S = {f^-1 g : q(f)^-1 q(g) in N T_k N}, N the K0-ball of T0, and
/// checks the two inequalities of the construction on a ball sample.
/// Throws QiPreconditionFailed when q is not an (L0, C0)-quasi-isometry of
/// the finite generating sets on the sample.
LemmaResult lemma_generating_set(const QiMap& q, const Side& source0, const Side& target0, const Side& target,
                                 const LemmaOptions& options = {});

/// One side's best match for a coset.
struct CosetMatch {
  Coset coset;
  std::optional<Coset> partner;
  HausdorffDistance distance;
  std::int32_t candidates = 0;
};

struct CosetRelation {
  std::vector<CosetMatch> source_matches, target_matches;
  /// Related pairs (source coset, target coset, distance) with distance <= M.
  std::vector<std::tuple<Coset, Coset, std::int32_t>> pairs;
  std::optional<std::int32_t> m;
  bool established = false;  ///< every coset has a certified match
  bool left_surjective = false, right_surjective = false;
  bool functional = false, injective = false, bijective = false;
  std::int32_t radius = 0, margin = 0, search_radius = 0;
};

struct RelationOptions {
  std::int32_t radius = 6;
  std::int32_t margin = -1;
  std::int32_t search_radius = 3;  ///< candidate partners meet this ball around a point
  std::optional<std::int32_t> m_bound;  ///< compare against a given M instead of deriving it
  std::size_t max_vertices = kDefaultVertexCap;
};

/// Matches cosets of P meeting the inner source ball to cosets of Q meeting
/// the inner target ball by Hausdorff distance in the target ball.
CosetRelation coset_relation_dotq(const QiMap& q, const Side& source, const Collection& P, const Side& target,
                                  const Collection& Q, const RelationOptions& options = {});

std::string coset_label(const Group& group, const Collection& coll, const Coset& c);

struct HypothesisCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ConedSummary {
  DeltaEstimate delta;
  std::int32_t radius = 0;
  std::vector<std::pair<std::string, AngleCount>> fineness;  ///< one cone per subgroup, neighbor e
  /// The same counts on a ball of radius + 2.
  std::vector<std::pair<std::string, AngleCount>> fineness_wider;
  /// Each count is exact or unchanged on the wider ball.
  bool fineness_stable = false;
};

struct TransferConfig {
  std::int32_t qi_radius = 4;
  RelationOptions relation;
  std::int32_t m = 4;  ///< commensurability index bound
  std::int32_t reduced_radius = 4;
  bool refine_source = false;
  std::optional<FiniteIndexPair> invariance_pair;  ///< checked on the source side
  std::int32_t coned_radius = 4;
  std::int32_t theta_max = 3;
  DeltaOptions delta;
  double delta_bound = 2.0;
};

struct QiPairsReport {
  QiConstants constants;
  CosetRelation relation;
  ReducedCheck reduced_source, reduced_target;
  std::optional<Refinement> refinement;
  std::optional<InvarianceCheck> invariance;
  Collection source_used;  ///< refined when requested, finite members dropped
  Collection target_used;  ///< finite members dropped
  std::vector<std::string> dropped_finite;
  ConedSummary coned_source, coned_target;
  std::vector<HypothesisCheck> checks;
  bool certified = false;
};

QiPairsReport pair_transfer_report(const QiMap& q, const Side& source, const Collection& P, const Side& target,
                                   const Collection& Q, const TransferConfig& config = {});

}  // namespace conelab
