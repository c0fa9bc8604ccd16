#include "rum/tree_precond.hpp"

#include <deque>
#include <numeric>
#include <string>

namespace rum {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<unsigned char> rank_;
};

int sign_at(const Lattice& lat, Subset vertex, std::size_t edge) {
  return lat.edge_upper(edge) == vertex ? +1 : -1;
}

std::vector<unsigned char> tree_flags(const Lattice& lat, std::span<const std::size_t> cotree, bool& valid_indices) {
  std::vector<unsigned char> flags(lat.pair_count(), 1);
  valid_indices = true;
  for (std::size_t e : cotree) {
    if (e >= lat.pair_count() || flags[e] == 0) {
      valid_indices = false;
      break;
    }
    flags[e] = 0;
  }
  return flags;
}

}  // namespace

SpanningTree SpanningTree::from_cotree(const Lattice& lat, std::vector<std::size_t> cotree) {
  std::sort(cotree.begin(), cotree.end());
  bool valid = true;
  auto flags = tree_flags(lat, cotree, valid);
  if (!valid) throw ConfigError("co-tree contains a repeated or out-of-range edge");
  if (cotree.size() != lat.reduced_count()) {
    throw ConfigError("co-tree has " + std::to_string(cotree.size()) + " edges, expected " +
                      std::to_string(lat.reduced_count()));
  }

  SpanningTree tree;
  tree.n_ = lat.alternatives();
  tree.cotree_ = std::move(cotree);
  tree.in_tree_ = std::move(flags);

  const std::size_t vertices = lat.vertex_count();
  std::vector<int> degree(vertices, 0);
  for (std::size_t e = 0; e < lat.pair_count(); ++e) {
    if (!tree.in_tree_[e]) continue;
    ++degree[lat.edge_upper(e).bits];
    ++degree[lat.edge_lower(e).bits];
  }

  std::deque<std::uint32_t> leaves;
  for (std::uint32_t v = 0; v < vertices; ++v) {
    if (degree[v] == 1) leaves.push_back(v);
  }

  std::vector<unsigned char> solved(lat.pair_count(), 0);
  tree.schedule_.reserve(vertices - 1);
  tree.term_offset_.reserve(vertices);
  tree.term_offset_.push_back(0);
  while (!leaves.empty() && tree.schedule_.size() + 1 < vertices) {
    const Subset u{leaves.front()};
    leaves.pop_front();
    if (degree[u.bits] == 0) continue;

    const auto incident = lat.incident_edges(u);
    std::size_t unknown = Lattice::npos;
    int unknown_count = 0;
    for (const auto& ie : incident) {
      if (tree.in_tree_[ie.edge] && !solved[ie.edge]) {
        unknown = ie.edge;
        ++unknown_count;
      }
    }
    if (unknown_count != 1) {
      throw ConfigError("leaf elimination reached vertex " + to_hex(u) + " with " + std::to_string(unknown_count) +
                        " unknown tree edges");
    }

    const int own = sign_at(lat, u, unknown);
    for (const auto& ie : incident) {
      if (ie.edge == unknown) continue;
      tree.terms_.push_back({ie.edge, -static_cast<double>(own * ie.sign)});
    }
    tree.term_offset_.push_back(tree.terms_.size());
    tree.schedule_.push_back({unknown, u});
    solved[unknown] = 1;

    const Subset w = lat.edge_upper(unknown) == u ? lat.edge_lower(unknown) : lat.edge_upper(unknown);
    --degree[u.bits];
    if (--degree[w.bits] == 1) leaves.push_back(w.bits);
  }

  if (tree.schedule_.size() + 1 != vertices) {
    throw ConfigError("co-tree complement is not a spanning tree (leaf elimination stalled after " +
                      std::to_string(tree.schedule_.size()) + " of " + std::to_string(vertices - 1) + " edges)");
  }
  return tree;
}

std::vector<std::size_t> SpanningTree::tree_edges() const {
  std::vector<std::size_t> out;
  for (std::size_t e = 0; e < in_tree_.size(); ++e) {
    if (in_tree_[e]) out.push_back(e);
  }
  return out;
}

SpanningTree build_tree(const Lattice& lat, const Vector<double>& d) {
  check_barrier(lat, d);
  const std::size_t edges = lat.pair_count();
  std::vector<double> weight(edges);
  for (std::size_t e = 0; e < edges; ++e) weight[e] = std::max(d[static_cast<Eigen::Index>(e)], 1.0);

  std::vector<std::size_t> order(edges);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return weight[a] < weight[b]; });

  DisjointSets sets(lat.vertex_count());
  std::vector<std::size_t> cotree;
  cotree.reserve(lat.reduced_count());
  std::size_t taken = 0;
  for (std::size_t e : order) {
    if (taken + 1 < lat.vertex_count() && sets.unite(lat.edge_upper(e).bits, lat.edge_lower(e).bits)) {
      ++taken;
    } else {
      cotree.push_back(e);
    }
  }
  return SpanningTree::from_cotree(lat, std::move(cotree));
}

bool verify_cotree(const Lattice& lat, std::span<const std::size_t> cotree) {
  bool valid = true;
  const auto flags = tree_flags(lat, cotree, valid);
  if (!valid || cotree.size() != lat.reduced_count()) return false;
  DisjointSets sets(lat.vertex_count());
  std::size_t count = 0;
  for (std::size_t e = 0; e < lat.pair_count(); ++e) {
    if (!flags[e]) continue;
    if (!sets.unite(lat.edge_upper(e).bits, lat.edge_lower(e).bits)) return false;
    ++count;
  }
  // Acyclic with |V| - 1 edges implies connected.
  return count + 1 == lat.vertex_count();
}

bool verify_cotree(const Lattice& lat, const SpanningTree& tree) {
  return tree.alternatives() == lat.alternatives() && verify_cotree(lat, tree.cotree());
}

}  // namespace rum
