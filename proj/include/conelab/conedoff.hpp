#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "conelab/cayley.hpp"
#include "conelab/graph.hpp"
#include "conelab/subgroup.hpp"

namespace conelab {

/// Cayley ball plus one cone vertex per coset gP meeting it.
///
/// Group vertices keep their ball indices; cone i is vertex base->size() + i.
/// Cones are numbered by their least member's vertex index, then by the
/// subgroup's position in the collection.
struct ConedOffBall {
  std::shared_ptr<const BallGraph> base;
  Collection collection;
  std::vector<Coset> cones;
  std::vector<std::vector<std::int32_t>> members;  ///< ball vertices of each cone
  Adjacency adj;

  std::size_t group_vertex_count() const { return base->size(); }
  std::size_t size() const { return adj.size(); }
  bool is_cone(std::int32_t v) const { return static_cast<std::size_t>(v) >= base->size(); }
  std::int32_t cone_vertex(std::size_t cone) const { return static_cast<std::int32_t>(base->size() + cone); }
  std::optional<std::int32_t> find_cone(const Coset& c) const;
  /// Cone vertex of gP for the member with the given id.
  std::optional<std::int32_t> cone_of(const Element& g, const std::string& subgroup_id) const;
  std::string vertex_label(std::int32_t v) const;
};

ConedOffBall build_coned_off(std::shared_ptr<const BallGraph> ball, const Collection& coll);

/// BFS distance in the coned-off ball; nullopt when disconnected there.
std::optional<std::int32_t> coned_distance(const ConedOffBall& cb, std::int32_t u, std::int32_t v);

/// Angle at cone vertex v: distance from x to y with v deleted; nullopt
/// means no path inside the truncation. Throws unless x, y are neighbors of v.
std::optional<std::int32_t> angle_distance(const ConedOffBall& cb, std::int32_t v, std::int32_t x, std::int32_t y);

struct AngleCount {
  std::int32_t neighbor = 0;
  std::int32_t theta = 0;
  std::int32_t count = 0;
  /// The count cannot grow in the untruncated graph: every vertex within
  /// punctured distance theta - 1 of the neighbor has its full neighborhood in
  /// the truncation, except cones of v's own subgroup at depth theta - 1,
  /// which cannot reach other members of v's coset.
  bool exact = false;
};

struct AngleProfile {
  std::int32_t cone = 0;
  std::int32_t theta_max = 0;
  std::vector<AngleCount> counts;  ///< neighbor-major, theta ascending
  /// Pairwise angles among the profiled neighbors (nullopt: beyond the truncation).
  std::vector<std::vector<std::optional<std::int32_t>>> angles;
  std::vector<std::int32_t> neighbors;

  const AngleCount* at(std::int32_t neighbor, std::int32_t theta) const;
};

/// Profiles all neighbors of the cone unless `neighbors` restricts them.
AngleProfile fineness_profile(const ConedOffBall& cb, std::int32_t cone_vertex, std::int32_t theta_max,
                              std::optional<std::vector<std::int32_t>> neighbors = std::nullopt);

enum class DeltaMode { Exhaustive, Sampled };

struct DeltaOptions {
  DeltaMode mode = DeltaMode::Exhaustive;
  std::uint64_t seed = 1;
  std::uint64_t samples = 200'000;
  std::uint64_t max_tuples = 400'000'000;
  unsigned workers = 0;  ///< 0: hardware concurrency
};

class TupleLimitExceeded : public GroupError {
 public:
  TupleLimitExceeded(std::uint64_t tuples, std::uint64_t limit);
  std::uint64_t tuples;
  std::uint64_t limit;
};

/// Gromov four-point delta: the maximum over 4-tuples of half the gap between
/// the two largest pairing sums.
///
/// Exhaustive mode scans the 4-subsets of each biconnected block; the
/// four-point delta of a graph is the maximum over its blocks, and distances
/// between vertices of a block are realized inside it. The tuple limit
/// applies to the sum over blocks.
struct DeltaEstimate {
  std::int64_t twice_delta = 0;
  DeltaMode mode = DeltaMode::Exhaustive;
  std::uint64_t seed = 0;
  std::uint64_t samples = 0;
  std::array<std::int32_t, 4> witness{-1, -1, -1, -1};
  bool largest_component_only = false;
  std::size_t vertices = 0;
  std::size_t blocks = 0;
  std::uint64_t tuples = 0;

  double delta() const { return static_cast<double>(twice_delta) / 2.0; }
};

DeltaEstimate four_point_delta(const Adjacency& adj, const DeltaOptions& options = {});

/// Gap between the two largest pairing sums of a 4-tuple given its six distances.
std::int64_t four_point_gap(std::int64_t wx, std::int64_t wy, std::int64_t wz, std::int64_t xy, std::int64_t xz,
                            std::int64_t yz);

void write_dot(const ConedOffBall& cb, std::ostream& os);
void write_fineness_csv(const ConedOffBall& cb, const AngleProfile& profile, std::ostream& os);

}  // namespace conelab
