#pragma once

// Matrix-free linear operators on the pair space R^N and the reduced space
// R^|B|. Every operator accepts any Eigen dense column expression and returns
// a freshly evaluated vector of the same scalar type.

#include <Eigen/Core>
#include <cmath>
#include <cstddef>
#include <vector>

#include "rum/errors.hpp"
#include "rum/lattice.hpp"

namespace rum {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// The set of observed choice sets. Unobserved pairs are masked out of the
/// objective; the rationality constraints still cover every pair.
class ObservationMask {
 public:
  static ObservationMask full(int n);
  static ObservationMask none(int n);
  /// Observed sets given as bitmasks; the empty set is rejected.
  static ObservationMask from_sets(int n, const std::vector<Subset>& sets);

  int alternatives() const noexcept { return n_; }
  bool observed(Subset d) const noexcept { return observed_[d.bits] != 0; }
  bool is_full() const noexcept;
  std::vector<Subset> sets() const;

  void set(Subset d, bool value);

 private:
  explicit ObservationMask(int n);
  int n_;
  std::vector<unsigned char> observed_;
};

/// r = sum over observed D of (|D| - 1).
std::size_t effective_rank(const ObservationMask& mask);

namespace detail {

enum class Direction { kSupersets, kSubsets };

// In-place Moebius (sign = -1) or zeta (sign = +1) transform over every
// alternative family. Supersets: f(T) += sign * f(T + y); subsets: f(T) +=
// sign * f(T - y).
template <typename Scalar>
void lattice_transform(const Lattice& lat, Vector<Scalar>& v, Direction dir, int sign) {
  const int n = lat.alternatives();
  const std::size_t len = lat.vertex_count() / 2;
  std::vector<Scalar> f(len);
  for (int x = 0; x < n; ++x) {
    const auto fam = lat.family(x);
    for (std::size_t t = 0; t < len; ++t) f[t] = v[static_cast<Eigen::Index>(fam[t])];
    for (int j = 0; j + 1 < n; ++j) {
      const std::size_t bit = std::size_t{1} << j;
      for (std::size_t t = 0; t < len; ++t) {
        if (dir == Direction::kSupersets) {
          if (!(t & bit)) f[t] += sign > 0 ? f[t | bit] : -f[t | bit];
        } else {
          if (t & bit) f[t] += sign > 0 ? f[t ^ bit] : -f[t ^ bit];
        }
      }
    }
    for (std::size_t t = 0; t < len; ++t) v[static_cast<Eigen::Index>(fam[t])] = f[t];
  }
}

template <typename Derived>
void check_pair_length(const Lattice& lat, const Eigen::MatrixBase<Derived>& v) {
  if (static_cast<std::size_t>(v.size()) != lat.pair_count()) {
    throw ConfigError("pair-space vector has length " + std::to_string(v.size()) + ", expected " +
                      std::to_string(lat.pair_count()));
  }
}

template <typename Derived>
void check_reduced_length(const Lattice& lat, const Eigen::MatrixBase<Derived>& v) {
  if (static_cast<std::size_t>(v.size()) != lat.reduced_count()) {
    throw ConfigError("reduced vector has length " + std::to_string(v.size()) + ", expected " +
                      std::to_string(lat.reduced_count()));
  }
}

}  // namespace detail

/// Block-Marschak transform: (K rho)(D,x) = sum_{E >= D} (-1)^|E\D| rho(E,x).
template <typename Derived>
Vector<typename Derived::Scalar> apply_K(const Lattice& lat, const Eigen::MatrixBase<Derived>& rho) {
  detail::check_pair_length(lat, rho);
  Vector<typename Derived::Scalar> out = rho;
  detail::lattice_transform(lat, out, detail::Direction::kSupersets, -1);
  return out;
}

template <typename Derived>
Vector<typename Derived::Scalar> apply_K_T(const Lattice& lat, const Eigen::MatrixBase<Derived>& y) {
  detail::check_pair_length(lat, y);
  Vector<typename Derived::Scalar> out = y;
  detail::lattice_transform(lat, out, detail::Direction::kSubsets, -1);
  return out;
}

/// Zeta transform: (K^-1 kappa)(D,x) = sum_{E >= D} kappa(E,x).
template <typename Derived>
Vector<typename Derived::Scalar> apply_K_inv(const Lattice& lat, const Eigen::MatrixBase<Derived>& kappa) {
  detail::check_pair_length(lat, kappa);
  Vector<typename Derived::Scalar> out = kappa;
  detail::lattice_transform(lat, out, detail::Direction::kSupersets, +1);
  return out;
}

template <typename Derived>
Vector<typename Derived::Scalar> apply_K_inv_T(const Lattice& lat, const Eigen::MatrixBase<Derived>& y) {
  detail::check_pair_length(lat, y);
  Vector<typename Derived::Scalar> out = y;
  detail::lattice_transform(lat, out, detail::Direction::kSubsets, +1);
  return out;
}

/// Reduced -> pair space. Copies xi onto non-max coordinates and puts the
/// negated set sum on each max coordinate, so every set sums to zero.
template <typename Derived>
Vector<typename Derived::Scalar> apply_B(const Lattice& lat, const Eigen::MatrixBase<Derived>& xi) {
  using Scalar = typename Derived::Scalar;
  detail::check_reduced_length(lat, xi);
  Vector<Scalar> out(static_cast<Eigen::Index>(lat.pair_count()));
  for (std::uint32_t d = 1; d < lat.vertex_count(); ++d) {
    const auto off = static_cast<Eigen::Index>(lat.offset({d}));
    const auto roff = static_cast<Eigen::Index>(lat.reduced_offset({d}));
    const int k = std::popcount(d);
    Scalar sum(0);
    for (int i = 0; i + 1 < k; ++i) {
      out[off + i] = xi[roff + i];
      sum += xi[roff + i];
    }
    out[off + k - 1] = -sum;
  }
  return out;
}

/// (B^T rho)(D,x) = rho(D,x) - rho(D, max D).
template <typename Derived>
Vector<typename Derived::Scalar> apply_B_T(const Lattice& lat, const Eigen::MatrixBase<Derived>& rho) {
  using Scalar = typename Derived::Scalar;
  detail::check_pair_length(lat, rho);
  Vector<Scalar> out(static_cast<Eigen::Index>(lat.reduced_count()));
  for (std::uint32_t d = 1; d < lat.vertex_count(); ++d) {
    const auto off = static_cast<Eigen::Index>(lat.offset({d}));
    const auto roff = static_cast<Eigen::Index>(lat.reduced_offset({d}));
    const int k = std::popcount(d);
    const Scalar top = rho[off + k - 1];
    for (int i = 0; i + 1 < k; ++i) out[roff + i] = rho[off + i] - top;
  }
  return out;
}

/// Restriction to reduced pairs.
template <typename Derived>
Vector<typename Derived::Scalar> apply_R(const Lattice& lat, const Eigen::MatrixBase<Derived>& rho) {
  detail::check_pair_length(lat, rho);
  Vector<typename Derived::Scalar> out(static_cast<Eigen::Index>(lat.reduced_count()));
  for (std::size_t r = 0; r < lat.reduced_count(); ++r) {
    out[static_cast<Eigen::Index>(r)] = rho[static_cast<Eigen::Index>(lat.reduced_to_dense(r))];
  }
  return out;
}

/// Zero-padding from reduced pairs.
template <typename Derived>
Vector<typename Derived::Scalar> apply_R_T(const Lattice& lat, const Eigen::MatrixBase<Derived>& xi) {
  detail::check_reduced_length(lat, xi);
  Vector<typename Derived::Scalar> out =
      Vector<typename Derived::Scalar>::Zero(static_cast<Eigen::Index>(lat.pair_count()));
  for (std::size_t r = 0; r < lat.reduced_count(); ++r) {
    out[static_cast<Eigen::Index>(lat.reduced_to_dense(r))] = xi[static_cast<Eigen::Index>(r)];
  }
  return out;
}

template <typename Derived>
Vector<typename Derived::Scalar> apply_KB(const Lattice& lat, const Eigen::MatrixBase<Derived>& xi) {
  return apply_K(lat, apply_B(lat, xi));
}

template <typename Derived>
Vector<typename Derived::Scalar> apply_KB_T(const Lattice& lat, const Eigen::MatrixBase<Derived>& y) {
  return apply_B_T(lat, apply_K_T(lat, y));
}

/// P_M: zero every pair whose set is unobserved.
template <typename Derived>
Vector<typename Derived::Scalar> apply_mask(const Lattice& lat, const ObservationMask& mask,
                                            const Eigen::MatrixBase<Derived>& rho) {
  detail::check_pair_length(lat, rho);
  Vector<typename Derived::Scalar> out = rho;
  for (std::uint32_t d = 1; d < lat.vertex_count(); ++d) {
    if (mask.observed({d})) continue;
    const auto off = static_cast<Eigen::Index>(lat.offset({d}));
    out.segment(off, std::popcount(d)).setZero();
  }
  return out;
}

/// u(D,x) = 1 iff x = max D.
template <typename Scalar = double>
Vector<Scalar> unit_choice(const Lattice& lat) {
  Vector<Scalar> u = Vector<Scalar>::Zero(static_cast<Eigen::Index>(lat.pair_count()));
  for (std::uint32_t d = 1; d < lat.vertex_count(); ++d) {
    u[static_cast<Eigen::Index>(lat.offset({d}) + std::popcount(d) - 1)] = Scalar(1);
  }
  return u;
}

/// b = K u: b(D,x) = 1 iff D = {0, ..., x}.
template <typename Scalar = double>
Vector<Scalar> unit_flow(const Lattice& lat) {
  Vector<Scalar> b = Vector<Scalar>::Zero(static_cast<Eigen::Index>(lat.pair_count()));
  for (int x = 0; x < lat.alternatives(); ++x) {
    const Subset prefix{(1u << (x + 1)) - 1u};
    b[static_cast<Eigen::Index>(lat.dense_index({prefix, x}))] = Scalar(1);
  }
  return b;
}

/// rho_int(D,x) = 1/|D|; an interior point of the RUM polytope.
template <typename Scalar = double>
Vector<Scalar> uniform_choice(const Lattice& lat) {
  Vector<Scalar> v(static_cast<Eigen::Index>(lat.pair_count()));
  for (std::uint32_t d = 1; d < lat.vertex_count(); ++d) {
    const int k = std::popcount(d);
    v.segment(static_cast<Eigen::Index>(lat.offset({d})), k).setConstant(Scalar(1) / Scalar(k));
  }
  return v;
}

/// Throws InvalidBarrierError unless every entry is finite and strictly positive.
template <typename Derived>
void check_barrier(const Lattice& lat, const Eigen::MatrixBase<Derived>& d) {
  detail::check_pair_length(lat, d);
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (!(d[i] > 0) || !std::isfinite(static_cast<double>(d[i]))) {
      throw InvalidBarrierError("barrier entry " + std::to_string(i) + " is not finite and positive");
    }
  }
}

/// Q_M xi = B^T P_M B xi.
template <typename Derived>
Vector<typename Derived::Scalar> apply_Q(const Lattice& lat, const ObservationMask& mask,
                                         const Eigen::MatrixBase<Derived>& xi) {
  return apply_B_T(lat, apply_mask(lat, mask, apply_B(lat, xi)));
}

/// H xi = Q_M xi + (KB)^T diag(d) (KB) xi, the reduced Newton matrix.
template <typename Derived, typename DerivedD>
Vector<typename Derived::Scalar> apply_H(const Lattice& lat, const Eigen::MatrixBase<Derived>& xi,
                                         const Eigen::MatrixBase<DerivedD>& d, const ObservationMask& mask) {
  check_barrier(lat, d);
  Vector<typename Derived::Scalar> kb = apply_KB(lat, xi);
  kb.array() *= d.array();
  return apply_Q(lat, mask, xi) + apply_KB_T(lat, kb);
}

/// c = B^T P_M (rho_hat - u). Only observed coordinates of rho_hat are read.
/// With the full mask this is B^T rho_hat + 1.
template <typename Derived>
Vector<typename Derived::Scalar> masked_linear_term(const Lattice& lat, const Eigen::MatrixBase<Derived>& rho_hat,
                                                    const ObservationMask& mask) {
  using Scalar = typename Derived::Scalar;
  detail::check_pair_length(lat, rho_hat);
  Vector<Scalar> c = Vector<Scalar>::Zero(static_cast<Eigen::Index>(lat.reduced_count()));
  for (std::uint32_t d = 1; d < lat.vertex_count(); ++d) {
    if (!mask.observed({d})) continue;
    const auto off = static_cast<Eigen::Index>(lat.offset({d}));
    const auto roff = static_cast<Eigen::Index>(lat.reduced_offset({d}));
    const int k = std::popcount(d);
    const Scalar top = rho_hat[off + k - 1] - Scalar(1);
    for (int i = 0; i + 1 < k; ++i) c[roff + i] = rho_hat[off + i] - top;
  }
  return c;
}

/// Exact diagonal of H. Column (E,x) of KB is +-1 on (D,x) and (D,max E) for
/// D subset of E, so the barrier part is a transposed zeta transform of d.
template <typename DerivedD>
Vector<typename DerivedD::Scalar> newton_diagonal(const Lattice& lat, const Eigen::MatrixBase<DerivedD>& d,
                                                  const ObservationMask& mask) {
  using Scalar = typename DerivedD::Scalar;
  check_barrier(lat, d);
  const Vector<Scalar> sums = apply_K_inv_T(lat, d);
  Vector<Scalar> diag(static_cast<Eigen::Index>(lat.reduced_count()));
  for (std::uint32_t e = 1; e < lat.vertex_count(); ++e) {
    const auto off = static_cast<Eigen::Index>(lat.offset({e}));
    const auto roff = static_cast<Eigen::Index>(lat.reduced_offset({e}));
    const int k = std::popcount(e);
    const Scalar data = mask.observed({e}) ? Scalar(2) : Scalar(0);
    for (int i = 0; i + 1 < k; ++i) diag[roff + i] = data + sums[off + i] + sums[off + k - 1];
  }
  return diag;
}

}  // namespace rum
