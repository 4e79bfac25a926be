#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "conelab/graph.hpp"
#include "conelab/group.hpp"

namespace conelab {

inline constexpr std::size_t kDefaultVertexCap = 5'000'000;

/// Thrown when a ball would exceed its vertex cap. `achieved_radius` is the
/// largest radius whose ball fit.
class VertexCapExceeded : public GroupError {
 public:
  VertexCapExceeded(std::int32_t achieved_radius, std::size_t cap);
  std::int32_t achieved_radius;
  std::size_t cap;
};

/// Thrown when a word-length search exhausts its budget.
class SearchLimitExceeded : public GroupError {
 public:
  using GroupError::GroupError;
};

/// Radius-r ball of the Cayley graph for enumerate(k), edges {g, gs}.
///
/// Vertices are indexed in BFS layer order and lexicographically within a
/// layer, so vertex 0 is the center. Adjacency is the induced subgraph.
struct BallGraph {
  Group group;
  GeneratorFamily family;
  std::int32_t k = 1;
  std::int32_t radius = 0;
  Element center;
  std::vector<Element> generators;
  std::vector<Element> vertices;
  std::vector<std::int32_t> dist;
  Adjacency adj;
  std::unordered_map<Element, std::int32_t, ElementHash> index;

  std::size_t size() const { return vertices.size(); }
  std::size_t edge_count() const;
  std::optional<std::int32_t> find(const Element& e) const;
  /// Vertex indices of `elems`; throws if one lies outside the ball.
  std::vector<std::int32_t> indices_of(std::span<const Element> elems) const;
};

BallGraph build_ball(const Group& group, const GeneratorFamily& family, std::int32_t k, std::int32_t r,
                     const Element& center = {}, std::size_t max_vertices = kDefaultVertexCap);

/// Exact word length |g| with respect to a finite generating set.
///
/// Holds the ball of radius `table_radius()` around e; longer elements are
/// resolved by searching outward from g until the search meets that ball.
///
/// When every generator is a power of a single base letter (and the group is
/// free, a free product, free abelian, or such a base inside a semidirect
/// product), the Cayley graph splits into one block per letter coset and |g|
/// is the sum over syllables x^m of the fewest generator powers of x summing
/// to m. No table is built in that case.
class WordMetric {
 public:
  WordMetric(Group group, std::vector<Element> generators, std::size_t table_limit = 50'000,
             std::size_t search_limit = 2'000'000);

  /// |g|, or nullopt when |g| > cap. Throws SearchLimitExceeded on budget.
  std::optional<std::int64_t> length(const Element& g, std::int64_t cap) const;
  std::int64_t length(const Element& g) const;
  std::optional<std::int64_t> distance(const Element& x, const Element& y, std::int64_t cap) const {
    return length(group_.between(x, y), cap);
  }
  std::int64_t distance(const Element& x, const Element& y) const { return length(group_.between(x, y)); }

  std::int32_t table_radius() const { return table_radius_; }
  bool syllable_mode() const { return syllable_mode_; }
  const Group& group() const { return group_; }
  const std::vector<Element>& generators() const { return generators_; }

 private:
  Group group_;
  std::vector<Element> generators_;
  std::unordered_map<Element, std::int32_t, ElementHash> table_;
  std::int32_t table_radius_ = 0;
  std::size_t search_limit_;
  bool syllable_mode_ = false;
  std::vector<std::vector<std::int64_t>> steps_;        ///< per letter: generator exponents > 0
  std::vector<std::vector<std::int32_t>> short_lengths_;  ///< per letter: length of x^m for m < table size

  bool try_syllable_mode();
  std::optional<std::int64_t> letter_length(std::int32_t letter, std::int64_t m) const;
};

struct StabilizedDistance {
  std::optional<std::int64_t> value;  ///< nullopt: exceeds the radius at k_max
  std::int32_t stabilized_at = 0;     ///< first k of a three-level plateau; 0 if none
  std::vector<std::optional<std::int64_t>> per_level;  ///< index k-1

  bool stabilized() const { return stabilized_at > 0; }
};

/// d(x, y) for enumerate(k), k = 1..k_max, each capped at r.
StabilizedDistance word_distance_stabilized(const Group& group, const GeneratorFamily& family, const Element& x,
                                            const Element& y, std::int32_t r, std::int32_t k_max);
/// The same for several targets, sharing one metric per level.
std::vector<StabilizedDistance> word_distances_stabilized(const Group& group, const GeneratorFamily& family,
                                                          const Element& x, std::span<const Element> ys,
                                                          std::int32_t r, std::int32_t k_max);

struct HausdorffDistance {
  bool exceeds_bound = false;
  /// Largest certified one-sided distance (the Hausdorff distance when
  /// !exceeds_bound).
  std::int32_t value = 0;
  /// Vertex attaining `value`, or the first point whose nearest match could
  /// not be certified inside the ball.
  std::int32_t witness = -1;
};

inline std::int32_t default_margin(std::int32_t r) { return (r + 3) / 4; }

/// Hausdorff distance of X and Y (vertex indices) in the ball metric, taken
/// over points with dist <= r - margin. A nearest-point distance d at x is
/// certified when dist(x) + d <= r, since then no shorter path can leave the
/// ball.
HausdorffDistance hausdorff_distance_ball(std::span<const std::int32_t> X, std::span<const std::int32_t> Y,
                                          const BallGraph& ball, std::int32_t margin);

/// Generator labelling each edge src < dst with vertices[src] * label = vertices[dst].
struct LabeledEdge {
  std::int32_t src = 0;
  std::int32_t dst = 0;
  std::string label;
  friend bool operator==(const LabeledEdge&, const LabeledEdge&) = default;
};

std::vector<LabeledEdge> labeled_edges(const BallGraph& ball);

void write_vertex_csv(const BallGraph& ball, std::ostream& os);
void write_edge_csv(const BallGraph& ball, std::ostream& os);
void write_dot(const BallGraph& ball, std::ostream& os);
std::vector<LabeledEdge> read_edge_csv(std::istream& is);

}  // namespace conelab
