#pragma once

// Resonance part of the S matrix: pole expansion over the eigenstates of
// H_eff, the direct resolvent form as an independent route, and resonance
// trapping scans over the coupling strength.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <numbers>
#include <optional>
#include <vector>

#include "openqs/linalg.hpp"
#include "openqs/model.hpp"
#include "openqs/spectral.hpp"

namespace openqs {

/// K x K complex matrix, row-major.
struct ChannelMatrix {
  std::size_t k = 0;
  std::vector<cplx> data;

  explicit ChannelMatrix(std::size_t k_ = 0) : k(k_), data(k_ * k_) {}
  cplx& operator()(std::size_t c, std::size_t d) { return data[c * k + d]; }
  cplx operator()(std::size_t c, std::size_t d) const { return data[c * k + d]; }
};

/// W~_R^c = sum_j (v_R)_j W_j^c with c-normalized v_R.
struct TransformedCouplings {
  std::size_t n_states = 0;
  std::size_t n_channels = 0;
  std::vector<cplx> w_tilde;

  cplx operator()(std::size_t r, std::size_t c) const { return w_tilde[r * n_channels + c]; }

  /// sum_{R,c} (W~_R^c)^2, bilinear (no absolute values).
  cplx squared_sum() const {
    cplx s = 0.0;
    for (const cplx& z : w_tilde) s += z * z;
    return s;
  }
};

inline TransformedCouplings transform_couplings(const SpectralDecomposition& d, const ChannelCoupling& w) {
  if (d.defective) throw NearDefectiveError("transformed couplings need a non-defective decomposition");
  if (w.n_states() != d.n()) throw DimensionError("coupling rows must match the number of states");
  TransformedCouplings t;
  t.n_states = d.n();
  t.n_channels = w.n_channels();
  t.w_tilde.assign(t.n_states * t.n_channels, cplx{});
  for (std::size_t r = 0; r < t.n_states; ++r)
    for (std::size_t c = 0; c < t.n_channels; ++c) {
      cplx s = 0.0;
      for (std::size_t j = 0; j < t.n_states; ++j) s += d.vectors[r][j] * w.w(j, c);
      t.w_tilde[r * t.n_channels + c] = s;
    }
  return t;
}

struct SMatrixGrid {
  std::vector<double> energies;
  std::vector<ChannelMatrix> s;
  std::vector<ChannelMatrix> direct;     ///< S^(1): diagonal phases
  std::vector<ChannelMatrix> resonance;  ///< S^(2)
};

namespace detail {
inline ChannelMatrix direct_part(std::size_t k, const std::vector<double>& phases) {
  ChannelMatrix m(k);
  for (std::size_t c = 0; c < k; ++c) {
    const double delta = phases.empty() ? 0.0 : phases[c];
    m(c, c) = std::exp(cplx{0.0, 2.0 * delta});
  }
  return m;
}

inline void check_phases(std::size_t k, const std::vector<double>& phases) {
  if (!phases.empty() && phases.size() != k) throw DimensionError("one phase per channel expected");
}
}  // namespace detail

/// S = S1 - S2 with S2_cc' = 2 i pi sum_R W~_R^c W~_R^c' / (E - E_R + (i/2) G_R).
inline SMatrixGrid resonance_smatrix(const SpectralDecomposition& d, const TransformedCouplings& tw,
                                     const std::vector<double>& energies, const std::vector<double>& phases = {}) {
  const std::size_t k = tw.n_channels;
  detail::check_phases(k, phases);
  SMatrixGrid g;
  g.energies = energies;
  const cplx two_i_pi{0.0, 2.0 * std::numbers::pi};
  for (const double e : energies) {
    ChannelMatrix s2(k);
    for (std::size_t r = 0; r < d.n(); ++r) {
      const cplx denom = e - d.eigenvalue(r);
      if (std::abs(denom) <= 1e-14) throw Error("energy grid point coincides with a real pole");
      for (std::size_t c = 0; c < k; ++c)
        for (std::size_t c2 = 0; c2 < k; ++c2) s2(c, c2) += tw(r, c) * tw(r, c2) / denom;
    }
    for (cplx& z : s2.data) z *= two_i_pi;
    ChannelMatrix s1 = detail::direct_part(k, phases);
    ChannelMatrix s(k);
    for (std::size_t i = 0; i < k * k; ++i) s.data[i] = s1.data[i] - s2.data[i];
    g.s.push_back(std::move(s));
    g.direct.push_back(std::move(s1));
    g.resonance.push_back(std::move(s2));
  }
  return g;
}

/// S = S1 - 2 i pi W^T (E - H_eff)^-1 W by direct linear solves.
inline SMatrixGrid resolvent_smatrix(const EffectiveHamiltonian& h, const ChannelCoupling& w,
                                     const std::vector<double>& energies, const std::vector<double>& phases = {}) {
  const std::size_t n = h.n();
  const std::size_t k = w.n_channels();
  if (w.n_states() != n) throw DimensionError("coupling rows must match the number of states");
  detail::check_phases(k, phases);
  SMatrixGrid g;
  g.energies = energies;
  const cplx two_i_pi{0.0, 2.0 * std::numbers::pi};
  std::vector<cplx> rhs(n * k);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < k; ++c) rhs[i * k + c] = w.w(i, c);
  for (const double e : energies) {
    ComplexMatrix a(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) a(i, j) = (i == j ? cplx{e} : cplx{}) - h.matrix()(i, j);
    std::vector<cplx> x;
    try {
      x = lu_solve(a, rhs, k);
    } catch (const Error&) {
      throw Error("E - H_eff is singular at E = " + std::to_string(e));
    }
    ChannelMatrix s2(k);
    for (std::size_t c = 0; c < k; ++c)
      for (std::size_t c2 = 0; c2 < k; ++c2) {
        cplx sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += w.w(i, c) * x[i * k + c2];
        s2(c, c2) = two_i_pi * sum;
      }
    ChannelMatrix s1 = detail::direct_part(k, phases);
    ChannelMatrix s(k);
    for (std::size_t i = 0; i < k * k; ++i) s.data[i] = s1.data[i] - s2.data[i];
    g.s.push_back(std::move(s));
    g.direct.push_back(std::move(s1));
    g.resonance.push_back(std::move(s2));
  }
  return g;
}

/// max |(S^dagger S - 1)_cc'|
inline double unitarity_defect(const ChannelMatrix& s) {
  double worst = 0.0;
  for (std::size_t c = 0; c < s.k; ++c)
    for (std::size_t d = 0; d < s.k; ++d) {
      cplx sum = 0.0;
      for (std::size_t q = 0; q < s.k; ++q) sum += std::conj(s(q, c)) * s(q, d);
      if (c == d) sum -= 1.0;
      worst = std::max(worst, std::abs(sum));
    }
  return worst;
}

struct TrapRow {
  double alpha = 0.0;
  std::vector<double> widths;  ///< descending
  double sum = 0.0;
  double trap_ratio = 0.0;  ///< sum of all but the K broadest widths over the total
  bool defective = false;
};

/// Widths of H_eff(alpha) = h_cl - i pi alpha^2 W W^T for each alpha.
inline std::vector<TrapRow> trapping_scan(const RealMatrix& h_cl, const ChannelCoupling& w,
                                          const std::vector<double>& alphas) {
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 0.0)) throw InputError("coupling strengths must be positive");
    if (i > 0 && !(alphas[i] > alphas[i - 1])) throw InputError("coupling strengths must be ascending");
  }
  const std::size_t keep = w.n_channels();
  std::vector<TrapRow> rows;
  for (const double alpha : alphas) {
    TrapRow row;
    row.alpha = alpha;
    const EffectiveHamiltonian h = build_channel_coupled(h_cl, scaled(w, alpha));
    const EigenPairs e = eig_complex_symmetric(h.matrix());
    row.defective = e.defective;
    for (const cplx& z : e.values) row.widths.push_back(-2.0 * z.imag());
    std::sort(row.widths.begin(), row.widths.end(), std::greater<>());
    if (row.defective) {
      std::fill(row.widths.begin(), row.widths.end(), kNaN);
      row.sum = kNaN;
      row.trap_ratio = kNaN;
    } else {
      for (const double g : row.widths) row.sum += g;
      double trapped = 0.0;
      for (std::size_t r = keep; r < row.widths.size(); ++r) trapped += row.widths[r];
      row.trap_ratio = row.sum > 0.0 ? trapped / row.sum : 0.0;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace openqs
