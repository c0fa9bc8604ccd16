#include "rum/lattice.hpp"

#include <cstdio>
#include <string>

#include "rum/errors.hpp"

namespace rum {

namespace {

// Insert a zero bit at position x into the (n-1)-bit mask t.
std::uint32_t expand(std::uint32_t t, int x) {
  const std::uint32_t low = t & ((1u << x) - 1u);
  const std::uint32_t high = (t >> x) << (x + 1);
  return low | high | (1u << x);
}

}  // namespace

std::string to_hex(Subset d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%x", d.bits);
  return buf;
}

Lattice::Lattice(int n) : n_(n) {
  if (n < 1 || n > kMaxAlternatives) {
    throw ConfigError("alternative count must lie in [1, " + std::to_string(kMaxAlternatives) +
                      "], got " + std::to_string(n));
  }
  const std::size_t vertices = vertex_count();
  pair_count_ = static_cast<std::size_t>(n) << (n - 1);
  reduced_count_ = pair_count_ - (vertices - 1);

  offset_.resize(vertices + 1);
  reduced_offset_.resize(vertices + 1);
  offset_[0] = reduced_offset_[0] = 0;
  for (std::size_t d = 0; d < vertices; ++d) {
    const auto size = static_cast<std::size_t>(std::popcount(static_cast<std::uint32_t>(d)));
    offset_[d + 1] = offset_[d] + size;
    reduced_offset_[d + 1] = reduced_offset_[d] + (size == 0 ? 0 : size - 1);
  }

  pair_subset_.resize(pair_count_);
  pair_alt_.resize(pair_count_);
  dense_to_reduced_.assign(pair_count_, npos);
  reduced_to_dense_.resize(reduced_count_);
  std::size_t dense = 0;
  std::size_t reduced = 0;
  for (std::uint32_t d = 1; d < vertices; ++d) {
    const int top = Subset{d}.max();
    for (int x = 0; x < n; ++x) {
      if (!((d >> x) & 1u)) continue;
      pair_subset_[dense] = d;
      pair_alt_[dense] = static_cast<std::uint8_t>(x);
      if (x != top) {
        dense_to_reduced_[dense] = reduced;
        reduced_to_dense_[reduced] = dense;
        ++reduced;
      }
      ++dense;
    }
  }

  const std::size_t half = vertices / 2;
  family_.resize(pair_count_);
  for (int x = 0; x < n; ++x) {
    for (std::uint32_t t = 0; t < half; ++t) {
      family_[static_cast<std::size_t>(x) * half + t] = dense_index({{expand(t, x)}, x});
    }
  }
}

std::vector<IncidentEdge> Lattice::incident_edges(Subset d) const {
  std::vector<IncidentEdge> edges;
  edges.reserve(static_cast<std::size_t>(n_));
  for (int x = 0; x < n_; ++x) {
    if (d.contains(x)) edges.push_back({dense_index({d, x}), +1});
  }
  for (int y = 0; y < n_; ++y) {
    if (!d.contains(y)) edges.push_back({dense_index({d.with(y), y}), -1});
  }
  return edges;
}

}  // namespace rum
