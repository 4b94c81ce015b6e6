#pragma once

// Bi-orthogonal post-processing of eigenpairs: c-normalization, the
// Hermitian overlap metrics A and B, mixing coefficients in the unperturbed
// basis and the state purity difference delta.

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "openqs/linalg.hpp"
#include "openqs/model.hpp"

namespace openqs {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct SpectralDecomposition {
  std::vector<ComplexEnergy> eigenvalues;
  /// c-normalized right eigenvectors (cproduct(v, v) == 1). States in a
  /// defective pair keep their unit-norm raw vector instead.
  std::vector<ComplexVector> vectors;
  /// A_R = <v_R|v_R>, +inf for defective states.
  std::vector<double> a_metrics;
  /// b_metrics[R][R'] = |<v_R|v_R'>| for R != R', 0 on the diagonal.
  std::vector<std::vector<double>> b_metrics;
  /// |cproduct(v, v)| / |v|^2 of the raw eigenvector.
  std::vector<double> ep_proximity;
  bool defective = false;
  std::vector<bool> state_defective;

  std::size_t n() const { return eigenvalues.size(); }
  cplx eigenvalue(std::size_t k) const { return eigenvalues[k].value(); }
};

struct DecomposeOptions {
  EigenTolerances eigen{};
  /// Non-defective states with |cproduct(v,v)|/|v|^2 below this are rejected.
  double near_defective = 1e-10;
  /// Non-defective eigenvalues closer than this (relative to ||m||) are
  /// c-orthogonalized against each other explicitly.
  double cluster_gap = 1e-6;
};

namespace detail {

// Sign gauge: the largest coordinate gets an argument in (-pi/2, pi/2].
inline void fix_gauge(ComplexVector& v) {
  double big = 0.0;
  for (const cplx& z : v) big = std::max(big, std::abs(z));
  for (const cplx& z : v) {
    if (std::abs(z) >= (1.0 - 1e-9) * big) {
      if (z.real() < 0.0 || (z.real() == 0.0 && z.imag() <= 0.0)) {
        for (cplx& w : v) w = -w;
      }
      return;
    }
  }
}

inline void c_normalize(ComplexVector& v) {
  const cplx s = std::sqrt(cproduct(v, v));
  for (cplx& z : v) z /= s;
}

}  // namespace detail

inline SpectralDecomposition decompose(const EffectiveHamiltonian& h, const DecomposeOptions& opt = {}) {
  const ComplexMatrix& m = h.matrix();
  EigenPairs raw = eig_complex_symmetric(m, opt.eigen);
  const std::size_t n = raw.values.size();
  const double scale = m.max_abs();

  SpectralDecomposition d;
  d.defective = raw.defective;
  d.state_defective.assign(n, false);
  for (const auto& [i, j] : raw.defective_pairs) d.state_defective[i] = d.state_defective[j] = true;

  d.eigenvalues.reserve(n);
  for (const cplx& z : raw.values) d.eigenvalues.push_back(ComplexEnergy::from_eigenvalue(z));
  d.ep_proximity.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double nv = norm2(raw.vectors[k]);
    d.ep_proximity[k] = std::abs(cproduct(raw.vectors[k], raw.vectors[k])) / (nv * nv);
  }

  d.vectors = raw.vectors;
  std::vector<bool> done(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    if (d.state_defective[k] || done[k]) continue;
    // cluster of non-defective, (near-)degenerate partners
    std::vector<std::size_t> cluster{k};
    for (std::size_t j = k + 1; j < n; ++j)
      if (!d.state_defective[j] && !done[j] &&
          std::abs(raw.values[j] - raw.values[k]) <= opt.cluster_gap * scale)
        cluster.push_back(j);
    for (std::size_t c = 0; c < cluster.size(); ++c) {
      ComplexVector& v = d.vectors[cluster[c]];
      for (std::size_t p = 0; p < c; ++p) {
        const ComplexVector& u = d.vectors[cluster[p]];
        const cplx proj = cproduct(u, v);
        for (std::size_t r = 0; r < v.size(); ++r) v[r] -= proj * u[r];
      }
      const double nv = norm2(v);
      const double self = std::abs(cproduct(v, v)) / (nv * nv);
      if (self < opt.near_defective)
        throw NearDefectiveError("state " + std::to_string(cluster[c]) +
                                 " is self-c-orthogonal but its eigenvalue is not coalesced");
      detail::c_normalize(v);
      detail::fix_gauge(v);
      done[cluster[c]] = true;
    }
  }

  d.a_metrics.assign(n, 0.0);
  d.b_metrics.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    d.a_metrics[i] = d.state_defective[i] ? kInf : hproduct(d.vectors[i], d.vectors[i]).real();
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      d.b_metrics[i][j] = (d.state_defective[i] || d.state_defective[j])
                              ? kInf
                              : std::abs(hproduct(d.vectors[i], d.vectors[j]));
    }
  }
  return d;
}

/// b(i, j): component of eigenstate i on unperturbed basis state j.
struct MixingCoefficients {
  std::size_t n = 0;
  std::vector<cplx> b;
  bool defective = false;

  cplx operator()(std::size_t i, std::size_t j) const { return b[i * n + j]; }
  cplx& operator()(std::size_t i, std::size_t j) { return b[i * n + j]; }
  double weight(std::size_t i, std::size_t j) const { return std::norm((*this)(i, j)); }

  /// Index of the largest |b(i, j)|^2; ties go to the lower index.
  std::size_t dominant(std::size_t i) const {
    std::size_t best = 0;
    for (std::size_t j = 1; j < n; ++j)
      if (weight(i, j) > weight(i, best)) best = j;
    return best;
  }
};

namespace detail {
// c-orthonormal eigenbasis of the unperturbed matrix (identity when diagonal).
inline std::vector<ComplexVector> unperturbed_basis(const EffectiveHamiltonian& h) {
  const ComplexMatrix& u = h.unperturbed();
  const std::size_t n = u.n();
  std::vector<ComplexVector> basis;
  if (u.is_diagonal()) {
    for (std::size_t j = 0; j < n; ++j) {
      ComplexVector e(n);
      e[j] = 1.0;
      basis.push_back(std::move(e));
    }
    return basis;
  }
  const SpectralDecomposition d0 = decompose(build_explicit(u));
  if (d0.defective) throw NearDefectiveError("unperturbed matrix is defective; no mixing basis");
  return d0.vectors;
}

inline MixingCoefficients project(const std::vector<ComplexVector>& basis, const SpectralDecomposition& d) {
  MixingCoefficients mc;
  mc.n = d.n();
  mc.b.assign(mc.n * mc.n, cplx{});
  mc.defective = d.defective;
  for (std::size_t i = 0; i < mc.n; ++i)
    for (std::size_t j = 0; j < mc.n; ++j)
      mc(i, j) = d.state_defective[i] ? cplx{kNaN, kNaN} : cproduct(basis[j], d.vectors[i]);
  return mc;
}
}  // namespace detail

/// Mixing coefficients of every eigenstate in the unperturbed basis. Rows of
/// defective states are NaN.
inline MixingCoefficients mixing(const EffectiveHamiltonian& h, const SpectralDecomposition& d) {
  return detail::project(detail::unperturbed_basis(h), d);
}

/// |b_ii|^2 - |b_ij|^2. For N > 2 the partner j is the dominant foreign
/// component of row i.
inline double purity_delta(const MixingCoefficients& b, std::size_t i) {
  if (b.n < 2) return 1.0;
  std::size_t j = i == 0 ? 1 : 0;
  for (std::size_t k = 0; k < b.n; ++k)
    if (k != i && b.weight(i, k) > b.weight(i, j)) j = k;
  return b.weight(i, i) - b.weight(i, j);
}

/// Distance of a two-state decomposition from the branch-point relation
/// v1 = +-i v2.
struct ExchangeRelation {
  double minus_i = 0.0;  ///< |v1 - i v2|
  double plus_i = 0.0;   ///< |v1 + i v2|
  double v1_norm = 0.0;

  double closest() const { return std::min(minus_i, plus_i); }
  double relative() const { return closest() / v1_norm; }
};

inline ExchangeRelation verify_exchange_relation(const SpectralDecomposition& d) {
  if (d.n() != 2) throw DimensionError("exchange relation is defined for two states");
  if (d.defective) throw NearDefectiveError("exchange relation needs a non-defective approach sequence");
  const ComplexVector& v1 = d.vectors[0];
  const ComplexVector& v2 = d.vectors[1];
  const cplx i{0.0, 1.0};
  ComplexVector m(2), p(2);
  for (std::size_t k = 0; k < 2; ++k) {
    m[k] = v1[k] - i * v2[k];
    p[k] = v1[k] + i * v2[k];
  }
  return {norm2(m), norm2(p), norm2(v1)};
}

}  // namespace openqs
