#pragma once

// Seeded random streams. Every random draw in the library goes through
// stream(seed, index) so results depend only on the seed, never on thread
// count or scheduling.

#include <cstdint>
#include <random>

#include "rum/lattice.hpp"
#include "rum/operators.hpp"

namespace rum {

inline std::mt19937_64 seeded_stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

inline Vector<double> gaussian_vector(Eigen::Index size, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Vector<double> v(size);
  for (Eigen::Index i = 0; i < size; ++i) v[i] = normal(rng);
  return v;
}

/// Uniform(0, 1] entries normalized within each choice set.
inline Vector<double> random_choice_vector(const Lattice& lat, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Vector<double> rho(static_cast<Eigen::Index>(lat.pair_count()));
  for (Eigen::Index i = 0; i < rho.size(); ++i) rho[i] = 1.0 - uniform(rng);
  for (std::uint32_t bits = 1; bits < lat.vertex_count(); ++bits) {
    auto block = rho.segment(static_cast<Eigen::Index>(lat.offset({bits})), std::popcount(bits));
    block /= block.sum();
  }
  return rho;
}

}  // namespace rum
