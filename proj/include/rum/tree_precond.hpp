#pragma once

// Spanning-tree preconditioner M = A_m^T max(D_m, I) A_m, where A_m is the
// restriction of KB to the co-tree rows P. A_m is invertible exactly when
// E \ P is a spanning tree of the Boolean lattice; its inverse is a zero-flow
// extension along the tree followed by a zeta transform.

#include <Eigen/Core>
#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "rum/lattice.hpp"
#include "rum/operators.hpp"

namespace rum {

/// One leaf-elimination step: the tree edge solved for and the leaf vertex
/// whose conservation law determines it.
struct EliminationStep {
  std::size_t edge;
  Subset vertex;
};

/// Tree/co-tree partition of the lattice edges plus the leaf-elimination
/// schedule used by the forward and adjoint extensions. Immutable once built.
class SpanningTree {
 public:
  /// Throws ConfigError when E \ cotree is not a spanning tree, i.e. when leaf
  /// elimination reaches a vertex without exactly one unknown tree edge.
  static SpanningTree from_cotree(const Lattice& lat, std::vector<std::size_t> cotree);

  int alternatives() const noexcept { return n_; }
  /// Co-tree edges P in ascending edge order; position i holds coordinate i
  /// of the |B|-dimensional co-tree space.
  const std::vector<std::size_t>& cotree() const noexcept { return cotree_; }
  std::vector<std::size_t> tree_edges() const;
  bool in_tree(std::size_t e) const noexcept { return in_tree_[e] != 0; }
  const std::vector<EliminationStep>& schedule() const noexcept { return schedule_; }

  // Flattened per-step coefficients: kappa[step.edge] = sum coef * kappa[other].
  struct Term {
    std::size_t edge;
    double coef;
  };
  std::span<const Term> terms(std::size_t step) const noexcept {
    return {terms_.data() + term_offset_[step], term_offset_[step + 1] - term_offset_[step]};
  }

 private:
  SpanningTree() = default;

  int n_ = 0;
  std::vector<std::size_t> cotree_;
  std::vector<unsigned char> in_tree_;
  std::vector<EliminationStep> schedule_;
  std::vector<Term> terms_;
  std::vector<std::size_t> term_offset_;
};

/// Kruskal minimum spanning tree under w_e = max(d_e, 1), ties broken by
/// ascending edge index. The co-tree keeps the largest barrier weights.
SpanningTree build_tree(const Lattice& lat, const Vector<double>& d);

/// True iff E \ cotree has 2^n - 1 edges, no cycle, and touches every vertex.
bool verify_cotree(const Lattice& lat, std::span<const std::size_t> cotree);
bool verify_cotree(const Lattice& lat, const SpanningTree& tree);

/// L_ext: the unique total-flow-zero flow agreeing with v on the co-tree.
template <typename Derived>
Vector<typename Derived::Scalar> forward_ext(const Lattice& lat, const SpanningTree& tree,
                                             const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const auto& cotree = tree.cotree();
  if (static_cast<std::size_t>(v.size()) != cotree.size()) {
    throw ConfigError("co-tree vector length mismatch");
  }
  Vector<Scalar> kappa = Vector<Scalar>::Zero(static_cast<Eigen::Index>(lat.pair_count()));
  for (std::size_t i = 0; i < cotree.size(); ++i) {
    kappa[static_cast<Eigen::Index>(cotree[i])] = v[static_cast<Eigen::Index>(i)];
  }
  const auto& schedule = tree.schedule();
  for (std::size_t s = 0; s < schedule.size(); ++s) {
    Scalar acc(0);
    for (const auto& t : tree.terms(s)) acc += Scalar(t.coef) * kappa[static_cast<Eigen::Index>(t.edge)];
    kappa[static_cast<Eigen::Index>(schedule[s].edge)] = acc;
  }
  return kappa;
}

/// L_ext^T: reverse sweep distributing each tree-edge adjoint onto the edges
/// it was computed from, then restriction to the co-tree.
template <typename Derived>
Vector<typename Derived::Scalar> adjoint_ext(const Lattice& lat, const SpanningTree& tree,
                                             const Eigen::MatrixBase<Derived>& q) {
  using Scalar = typename Derived::Scalar;
  detail::check_pair_length(lat, q);
  Vector<Scalar> bar = q;
  const auto& schedule = tree.schedule();
  for (std::size_t s = schedule.size(); s-- > 0;) {
    const Scalar g = bar[static_cast<Eigen::Index>(schedule[s].edge)];
    if (g == Scalar(0)) continue;
    for (const auto& t : tree.terms(s)) bar[static_cast<Eigen::Index>(t.edge)] += Scalar(t.coef) * g;
  }
  const auto& cotree = tree.cotree();
  Vector<Scalar> z(static_cast<Eigen::Index>(cotree.size()));
  for (std::size_t i = 0; i < cotree.size(); ++i) z[static_cast<Eigen::Index>(i)] = bar[static_cast<Eigen::Index>(cotree[i])];
  return z;
}

/// A_m xi = (KB xi) restricted to the co-tree.
template <typename Derived>
Vector<typename Derived::Scalar> apply_A_m(const Lattice& lat, const SpanningTree& tree,
                                           const Eigen::MatrixBase<Derived>& xi) {
  const Vector<typename Derived::Scalar> kb = apply_KB(lat, xi);
  const auto& cotree = tree.cotree();
  Vector<typename Derived::Scalar> out(static_cast<Eigen::Index>(cotree.size()));
  for (std::size_t i = 0; i < cotree.size(); ++i) out[static_cast<Eigen::Index>(i)] = kb[static_cast<Eigen::Index>(cotree[i])];
  return out;
}

/// A_m^T w = (KB)^T applied to w zero-padded off the co-tree.
template <typename Derived>
Vector<typename Derived::Scalar> apply_A_m_T(const Lattice& lat, const SpanningTree& tree,
                                             const Eigen::MatrixBase<Derived>& w) {
  using Scalar = typename Derived::Scalar;
  const auto& cotree = tree.cotree();
  Vector<Scalar> y = Vector<Scalar>::Zero(static_cast<Eigen::Index>(lat.pair_count()));
  for (std::size_t i = 0; i < cotree.size(); ++i) y[static_cast<Eigen::Index>(cotree[i])] = w[static_cast<Eigen::Index>(i)];
  return apply_KB_T(lat, y);
}

/// A_m^-1 w = R K^-1 L_ext w.
template <typename Derived>
Vector<typename Derived::Scalar> apply_A_m_inv(const Lattice& lat, const SpanningTree& tree,
                                               const Eigen::MatrixBase<Derived>& w) {
  return apply_R(lat, apply_K_inv(lat, forward_ext(lat, tree, w)));
}

/// A_m^-T v = L_ext^T K^-T R^T v.
template <typename Derived>
Vector<typename Derived::Scalar> apply_A_m_inv_T(const Lattice& lat, const SpanningTree& tree,
                                                 const Eigen::MatrixBase<Derived>& v) {
  return adjoint_ext(lat, tree, apply_K_inv_T(lat, apply_R_T(lat, v)));
}

/// M v = A_m^T max(D_m, I) A_m v.
template <typename Derived, typename DerivedD>
Vector<typename Derived::Scalar> apply_M(const Lattice& lat, const SpanningTree& tree,
                                         const Eigen::MatrixBase<DerivedD>& d, const Eigen::MatrixBase<Derived>& v) {
  Vector<typename Derived::Scalar> w = apply_A_m(lat, tree, v);
  const auto& cotree = tree.cotree();
  for (std::size_t i = 0; i < cotree.size(); ++i) {
    w[static_cast<Eigen::Index>(i)] *= std::max<typename Derived::Scalar>(d[static_cast<Eigen::Index>(cotree[i])], 1);
  }
  return apply_A_m_T(lat, tree, w);
}

/// M^-1 v: adjoint sweep, diagonal division by max(d_e, 1) over the co-tree,
/// forward sweep.
template <typename Derived, typename DerivedD>
Vector<typename Derived::Scalar> apply_M_inv(const Lattice& lat, const SpanningTree& tree,
                                             const Eigen::MatrixBase<DerivedD>& d, const Eigen::MatrixBase<Derived>& v) {
  detail::check_reduced_length(lat, v);
  Vector<typename Derived::Scalar> u = apply_A_m_inv_T(lat, tree, v);
  const auto& cotree = tree.cotree();
  for (std::size_t i = 0; i < cotree.size(); ++i) {
    u[static_cast<Eigen::Index>(i)] /= std::max<typename Derived::Scalar>(d[static_cast<Eigen::Index>(cotree[i])], 1);
  }
  return apply_A_m_inv(lat, tree, u);
}

}  // namespace rum
