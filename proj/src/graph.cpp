#include "conelab/graph.hpp"

#include <algorithm>
#include <utility>

namespace conelab {

std::vector<std::int32_t> bfs(const Adjacency& adj, std::span<const std::int32_t> sources, std::int32_t removed,
                              std::int32_t max_depth) {
  std::vector<std::int32_t> dist(adj.size(), kUnreachable);
  std::vector<std::int32_t> queue;
  queue.reserve(adj.size());
  for (auto s : sources) {
    if (s == removed || dist[s] == 0) continue;
    dist[s] = 0;
    queue.push_back(s);
  }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const auto v = queue[head];
    if (max_depth >= 0 && dist[v] >= max_depth) continue;
    for (auto w : adj[v]) {
      if (w == removed || dist[w] != kUnreachable) continue;
      dist[w] = dist[v] + 1;
      queue.push_back(w);
    }
  }
  return dist;
}

std::vector<std::int32_t> connected_components(const Adjacency& adj, std::int32_t* count) {
  std::vector<std::int32_t> comp(adj.size(), -1);
  std::int32_t next = 0;
  std::vector<std::int32_t> stack;
  for (std::size_t root = 0; root < adj.size(); ++root) {
    if (comp[root] != -1) continue;
    comp[root] = next;
    stack.push_back(static_cast<std::int32_t>(root));
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      for (auto w : adj[v]) {
        if (comp[w] == -1) {
          comp[w] = next;
          stack.push_back(w);
        }
      }
    }
    ++next;
  }
  if (count) *count = next;
  return comp;
}

std::vector<std::vector<std::int32_t>> biconnected_blocks(const Adjacency& adj) {
  const auto n = static_cast<std::int32_t>(adj.size());
  std::vector<std::int32_t> disc(n, -1), low(n, 0);
  std::vector<std::pair<std::int32_t, std::int32_t>> edges;
  std::vector<std::vector<std::int32_t>> blocks;
  struct Frame {
    std::int32_t v, parent;
    std::size_t next;
  };
  std::vector<Frame> frames;
  std::int32_t timer = 0;

  for (std::int32_t root = 0; root < n; ++root) {
    if (disc[root] != -1) continue;
    disc[root] = low[root] = timer++;
    frames.push_back({root, -1, 0});
    while (!frames.empty()) {
      auto& fr = frames.back();
      const auto v = fr.v;
      if (fr.next < adj[v].size()) {
        const auto w = adj[v][fr.next++];
        if (disc[w] == -1) {
          edges.emplace_back(v, w);
          disc[w] = low[w] = timer++;
          frames.push_back({w, v, 0});
        } else if (w != fr.parent && disc[w] < disc[v]) {
          edges.emplace_back(v, w);
          low[v] = std::min(low[v], disc[w]);
        }
        continue;
      }
      frames.pop_back();
      if (frames.empty()) break;
      const auto u = frames.back().v;
      low[u] = std::min(low[u], low[v]);
      if (low[v] >= disc[u]) {
        std::vector<std::int32_t> block;
        while (true) {
          const auto [a, b] = edges.back();
          edges.pop_back();
          block.push_back(a);
          block.push_back(b);
          if (a == u && b == v) break;
        }
        std::ranges::sort(block);
        block.erase(std::unique(block.begin(), block.end()), block.end());
        blocks.push_back(std::move(block));
      }
    }
  }
  std::ranges::sort(blocks);
  return blocks;
}

Adjacency induced_subgraph(const Adjacency& adj, std::span<const std::int32_t> vertices) {
  Adjacency sub(vertices.size());
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    for (auto w : adj[vertices[i]]) {
      auto it = std::ranges::lower_bound(vertices, w);
      if (it != vertices.end() && *it == w) sub[i].push_back(static_cast<std::int32_t>(it - vertices.begin()));
    }
    std::ranges::sort(sub[i]);
  }
  return sub;
}

void normalize(Adjacency& adj) {
  const auto n = adj.size();
  for (std::size_t v = 0; v < n; ++v)
    for (auto w : adj[v])
      if (static_cast<std::size_t>(w) != v) adj[w].push_back(static_cast<std::int32_t>(v));
  for (std::size_t v = 0; v < n; ++v) {
    auto& nb = adj[v];
    std::erase(nb, static_cast<std::int32_t>(v));
    std::ranges::sort(nb);
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
}

}  // namespace conelab
