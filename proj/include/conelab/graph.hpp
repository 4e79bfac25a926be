#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace conelab {

/// Sorted, symmetric neighbor lists indexed by vertex.
using Adjacency = std::vector<std::vector<std::int32_t>>;

inline constexpr std::int32_t kUnreachable = -1;

/// Multi-source BFS. `removed` (if >= 0) is treated as deleted; exploration
/// stops at `max_depth` when that is >= 0. Unreached vertices get kUnreachable.
std::vector<std::int32_t> bfs(const Adjacency& adj, std::span<const std::int32_t> sources,
                              std::int32_t removed = -1, std::int32_t max_depth = -1);

inline std::vector<std::int32_t> bfs(const Adjacency& adj, std::int32_t source, std::int32_t removed = -1,
                                     std::int32_t max_depth = -1) {
  return bfs(adj, std::span<const std::int32_t>(&source, 1), removed, max_depth);
}

/// Component id per vertex, ids assigned in order of least vertex.
std::vector<std::int32_t> connected_components(const Adjacency& adj, std::int32_t* count = nullptr);

/// Biconnected components (blocks) as sorted vertex lists. Isolated vertices
/// belong to no block; a bridge is a two-vertex block.
std::vector<std::vector<std::int32_t>> biconnected_blocks(const Adjacency& adj);

/// Induced subgraph on `vertices` (sorted), re-indexed 0..n-1 in that order.
Adjacency induced_subgraph(const Adjacency& adj, std::span<const std::int32_t> vertices);

/// Symmetrizes, sorts and deduplicates neighbor lists in place.
void normalize(Adjacency& adj);

}  // namespace conelab
