#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rum {

/// Bitmask over the ground set {0, ..., n-1}.
struct Subset {
  std::uint32_t bits = 0;

  constexpr bool contains(int x) const noexcept { return (bits >> x) & 1u; }
  constexpr int size() const noexcept { return std::popcount(bits); }
  constexpr bool empty() const noexcept { return bits == 0; }
  /// Highest set bit. Undefined for the empty set.
  constexpr int max() const noexcept { return 31 - std::countl_zero(bits); }
  constexpr Subset with(int x) const noexcept { return {bits | (1u << x)}; }
  constexpr Subset without(int x) const noexcept { return {bits & ~(1u << x)}; }
  friend constexpr bool operator==(Subset, Subset) = default;
};

/// "0x"-prefixed lowercase hex of the bitmask.
std::string to_hex(Subset d);

/// A coordinate (D, x) with x in D. Also names the lattice edge D -- D\{x}.
struct Pair {
  Subset subset;
  int alt = 0;
  friend constexpr bool operator==(const Pair&, const Pair&) = default;
};

/// An edge incident to a vertex together with its conservation sign:
/// +1 when the vertex is the upper endpoint (flow leaves toward D\{x}),
/// -1 when it is the lower endpoint.
struct IncidentEdge {
  std::size_t edge;
  int sign;
};

/// Canonical indexing of pairs, reduced pairs and lattice edges for a ground
/// set of n alternatives.
///
/// Dense order: subsets ascending by bitmask, alternatives ascending within a
/// subset. Reduced order is the dense order with every (D, max D) removed.
/// Edge e and dense coordinate e are the same index.
class Lattice {
 public:
  static constexpr int kMaxAlternatives = 24;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  explicit Lattice(int n);

  int alternatives() const noexcept { return n_; }
  /// N = n 2^(n-1).
  std::size_t pair_count() const noexcept { return pair_count_; }
  /// |B| = N - (2^n - 1).
  std::size_t reduced_count() const noexcept { return reduced_count_; }
  std::size_t vertex_count() const noexcept { return std::size_t{1} << n_; }
  Subset ground_set() const noexcept { return {static_cast<std::uint32_t>(vertex_count() - 1)}; }

  std::size_t dense_index(Pair p) const noexcept {
    return offset_[p.subset.bits] + rank_in(p.subset, p.alt);
  }
  Pair pair(std::size_t dense) const noexcept {
    return {{pair_subset_[dense]}, static_cast<int>(pair_alt_[dense])};
  }
  /// First dense index of subset D; pairs of D occupy [offset(D), offset(D) + |D|).
  std::size_t offset(Subset d) const noexcept { return offset_[d.bits]; }
  std::size_t reduced_offset(Subset d) const noexcept { return reduced_offset_[d.bits]; }

  bool is_reduced(std::size_t dense) const noexcept { return dense_to_reduced_[dense] != npos; }
  /// npos for max coordinates.
  std::size_t dense_to_reduced(std::size_t dense) const noexcept { return dense_to_reduced_[dense]; }
  std::size_t reduced_to_dense(std::size_t reduced) const noexcept { return reduced_to_dense_[reduced]; }
  /// Precondition: p.alt != max(p.subset).
  std::size_t reduced_index(Pair p) const noexcept {
    return reduced_offset_[p.subset.bits] + rank_in(p.subset, p.alt);
  }

  /// Dense indices of (T, x) for all T containing x, ordered by the compressed
  /// (n-1)-bit mask of T\{x}. This is the layout the subset transforms run on.
  std::span<const std::size_t> family(int x) const noexcept {
    const std::size_t len = vertex_count() / 2;
    return {family_.data() + static_cast<std::size_t>(x) * len, len};
  }

  /// Edges touching vertex D with their conservation signs, outflow edges
  /// (D, x) first in ascending x, then inflow edges (D+{y}, y) in ascending y.
  std::vector<IncidentEdge> incident_edges(Subset d) const;

  /// Endpoints of edge e: upper = D, lower = D\{x}.
  Subset edge_upper(std::size_t e) const noexcept { return {pair_subset_[e]}; }
  Subset edge_lower(std::size_t e) const noexcept { return pair(e).subset.without(pair(e).alt); }

 private:
  static std::size_t rank_in(Subset d, int x) noexcept {
    return static_cast<std::size_t>(std::popcount(d.bits & ((1u << x) - 1u)));
  }

  int n_;
  std::size_t pair_count_;
  std::size_t reduced_count_;
  std::vector<std::size_t> offset_;
  std::vector<std::size_t> reduced_offset_;
  std::vector<std::uint32_t> pair_subset_;
  std::vector<std::uint8_t> pair_alt_;
  std::vector<std::size_t> dense_to_reduced_;
  std::vector<std::size_t> reduced_to_dense_;
  std::vector<std::size_t> family_;
};

}  // namespace rum
