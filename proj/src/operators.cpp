#include "rum/operators.hpp"

#include <string>

namespace rum {

ObservationMask::ObservationMask(int n) : n_(n) {
  if (n < 1 || n > Lattice::kMaxAlternatives) {
    throw ConfigError("mask alternative count out of range: " + std::to_string(n));
  }
  observed_.assign(std::size_t{1} << n, 0);
}

ObservationMask ObservationMask::full(int n) {
  ObservationMask m(n);
  for (std::size_t d = 1; d < m.observed_.size(); ++d) m.observed_[d] = 1;
  return m;
}

ObservationMask ObservationMask::none(int n) { return ObservationMask(n); }

ObservationMask ObservationMask::from_sets(int n, const std::vector<Subset>& sets) {
  ObservationMask m(n);
  for (Subset d : sets) m.set(d, true);
  return m;
}

void ObservationMask::set(Subset d, bool value) {
  if (d.empty() || d.bits >= observed_.size()) {
    throw ConfigError("observed set " + to_hex(d) + " is empty or outside the ground set");
  }
  observed_[d.bits] = value ? 1 : 0;
}

bool ObservationMask::is_full() const noexcept {
  for (std::size_t d = 1; d < observed_.size(); ++d) {
    if (!observed_[d]) return false;
  }
  return true;
}

std::vector<Subset> ObservationMask::sets() const {
  std::vector<Subset> out;
  for (std::size_t d = 1; d < observed_.size(); ++d) {
    if (observed_[d]) out.push_back({static_cast<std::uint32_t>(d)});
  }
  return out;
}

std::size_t effective_rank(const ObservationMask& mask) {
  std::size_t r = 0;
  for (Subset d : mask.sets()) r += static_cast<std::size_t>(d.size() - 1);
  return r;
}

}  // namespace rum
