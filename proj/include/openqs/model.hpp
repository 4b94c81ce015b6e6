#pragma once

// Effective Hamiltonians: the analytic two-level and four-level families,
// explicit complex symmetric matrices and the channel-coupled form
// H_cl + PV - i*pi*W*W^T.

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <variant>

#include "openqs/linalg.hpp"

namespace openqs {

/// Complex energy E - (i/2) Gamma; `width` is the full width Gamma.
struct ComplexEnergy {
  double energy = 0.0;
  double width = 0.0;

  static ComplexEnergy from_eigenvalue(cplx z) { return {z.real(), -2.0 * z.imag()}; }
  cplx value() const { return {energy, -0.5 * width}; }
  double half_width() const { return 0.5 * width; }
};

/// a -> offset + slope * a
struct Affine {
  double offset = 0.0;
  double slope = 0.0;

  double operator()(double a) const { return offset + slope * a; }
};

/// Two coupled levels with energies e_k(a), full widths gamma_k and a real
/// coupling omega. Defaults to e1 = 1 - a/2, e2 = a.
struct TwoLevelParams {
  double a = 0.0;
  Affine e1{1.0, -0.5};
  Affine e2{0.0, 1.0};
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double omega = 0.0;

  cplx eps1() const { return {e1(a), -0.5 * gamma1}; }
  cplx eps2() const { return {e2(a), -0.5 * gamma2}; }

  /// a at which e1(a) == e2(a); throws for parallel energies.
  double crossing() const {
    const double ds = e1.slope - e2.slope;
    if (ds == 0.0) throw InputError("unperturbed energies are parallel: no crossing");
    return (e2.offset - e1.offset) / ds;
  }

  void validate() const {
    if (!(gamma1 >= 0.0) || !(gamma2 >= 0.0)) throw InputError("widths must be non-negative");
    if (!std::isfinite(omega) || !std::isfinite(a)) throw InputError("non-finite two-level parameter");
  }
};

struct FourLevelParams {
  double a = 0.0;
  std::array<Affine, 4> energies{};
  std::array<std::array<double, 4>, 4> omegas{};
  std::array<double, 4> gammas{};
};

/// Coupling amplitudes W_R^c between N discrete states and K channels.
struct ChannelCoupling {
  RealMatrix w;

  std::size_t n_states() const { return w.rows(); }
  std::size_t n_channels() const { return w.cols(); }

  void validate() const {
    for (std::size_t i = 0; i < w.rows(); ++i)
      for (std::size_t c = 0; c < w.cols(); ++c)
        if (!std::isfinite(w(i, c))) throw InputError("coupling amplitudes must be finite");
  }

  /// sum_{R,c} (W_R^c)^2
  double squared_sum() const {
    double s = 0.0;
    for (std::size_t i = 0; i < w.rows(); ++i)
      for (std::size_t c = 0; c < w.cols(); ++c) s += w(i, c) * w(i, c);
    return s;
  }
};

namespace provenance {
struct TwoLevel {
  TwoLevelParams params;
};
struct FourLevel {
  FourLevelParams params;
};
struct Explicit {};
struct ChannelCoupled {
  RealMatrix h_cl;
  ChannelCoupling coupling;
  std::optional<RealMatrix> pv_term;
};
}  // namespace provenance

using Provenance =
    std::variant<provenance::TwoLevel, provenance::FourLevel, provenance::Explicit, provenance::ChannelCoupled>;

/// Symmetric complex matrix together with where it came from and its
/// unperturbed (couplings removed) counterpart.
class EffectiveHamiltonian {
 public:
  EffectiveHamiltonian(ComplexMatrix matrix, Provenance prov, ComplexMatrix unperturbed)
      : matrix_(std::move(matrix)), provenance_(std::move(prov)), unperturbed_(std::move(unperturbed)) {
    if (!matrix_.symmetric()) throw InputError("effective Hamiltonian must be symmetric");
  }

  const ComplexMatrix& matrix() const noexcept { return matrix_; }
  const Provenance& provenance() const noexcept { return provenance_; }
  /// Matrix with every state-state coupling removed; its eigenbasis is the
  /// basis for mixing coefficients.
  const ComplexMatrix& unperturbed() const noexcept { return unperturbed_; }
  std::size_t n() const noexcept { return matrix_.n(); }

 private:
  ComplexMatrix matrix_;
  Provenance provenance_;
  ComplexMatrix unperturbed_;
};

namespace detail {
inline ComplexMatrix diagonal_part(const ComplexMatrix& m) {
  ComplexMatrix d(m.n());
  for (std::size_t i = 0; i < m.n(); ++i) d(i, i) = m(i, i);
  d.mark_symmetric();
  return d;
}
}  // namespace detail

/// [[e1 - i g1/2, -w], [-w, e2 - i g2/2]]: diagonal part minus the coupling block.
inline EffectiveHamiltonian build_two_level(const TwoLevelParams& p) {
  p.validate();
  ComplexMatrix m(2);
  m(0, 0) = p.eps1();
  m(1, 1) = p.eps2();
  m(0, 1) = -p.omega;
  m(1, 0) = -p.omega;
  m.mark_symmetric();
  ComplexMatrix unperturbed = detail::diagonal_part(m);
  return {std::move(m), provenance::TwoLevel{p}, std::move(unperturbed)};
}

inline EffectiveHamiltonian build_four_level(const FourLevelParams& p) {
  for (std::size_t k = 0; k < 4; ++k) {
    if (p.omegas[k][k] != 0.0) throw InputError("four-level couplings must have a zero diagonal");
    if (!(p.gammas[k] >= 0.0)) throw InputError("widths must be non-negative");
    for (std::size_t l = 0; l < 4; ++l)
      if (p.omegas[k][l] != p.omegas[l][k]) throw InputError("four-level couplings must be symmetric");
  }
  ComplexMatrix m(4);
  for (std::size_t k = 0; k < 4; ++k) {
    m(k, k) = cplx{p.energies[k](p.a), -0.5 * p.gammas[k]};
    for (std::size_t l = 0; l < 4; ++l)
      if (l != k) m(k, l) = -p.omegas[k][l];
  }
  m.mark_symmetric();
  ComplexMatrix unperturbed = detail::diagonal_part(m);
  return {std::move(m), provenance::FourLevel{p}, std::move(unperturbed)};
}

/// Any complex symmetric matrix; the unperturbed part is its diagonal.
inline EffectiveHamiltonian build_explicit(ComplexMatrix m) {
  if (!m.symmetric()) m.mark_symmetric();
  ComplexMatrix unperturbed = detail::diagonal_part(m);
  return {std::move(m), provenance::Explicit{}, std::move(unperturbed)};
}

/// h_cl + pv_term - i*pi*W*W^T. The unperturbed part is h_cl + pv_term.
inline EffectiveHamiltonian build_channel_coupled(const RealMatrix& h_cl, const ChannelCoupling& coupling,
                                                  const std::optional<RealMatrix>& pv_term = std::nullopt) {
  const std::size_t n = h_cl.rows();
  if (!h_cl.square() || n == 0) throw DimensionError("h_cl must be square and non-empty");
  if (coupling.n_states() != n) throw DimensionError("coupling rows must match h_cl dimension");
  if (pv_term && (pv_term->rows() != n || pv_term->cols() != n))
    throw DimensionError("principal-value term must match h_cl dimension");
  if (!h_cl.is_symmetric()) throw InputError("h_cl must be symmetric");
  if (pv_term && !pv_term->is_symmetric()) throw InputError("principal-value term must be symmetric");
  coupling.validate();

  ComplexMatrix m(n);
  ComplexMatrix unperturbed(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double re = h_cl(i, j);
      if (pv_term) re += (*pv_term)(i, j);
      double ww = 0.0;
      for (std::size_t c = 0; c < coupling.n_channels(); ++c) ww += coupling.w(i, c) * coupling.w(j, c);
      m(i, j) = cplx{re, -std::numbers::pi * ww};
      unperturbed(i, j) = re;
    }
  }
  m.mark_symmetric();
  unperturbed.mark_symmetric();
  return {std::move(m), provenance::ChannelCoupled{h_cl, coupling, pv_term}, std::move(unperturbed)};
}

/// The decay coupling scaled by alpha: W -> alpha * W.
inline ChannelCoupling scaled(const ChannelCoupling& c, double alpha) {
  ChannelCoupling out = c;
  for (std::size_t i = 0; i < out.w.rows(); ++i)
    for (std::size_t k = 0; k < out.w.cols(); ++k) out.w(i, k) *= alpha;
  return out;
}

}  // namespace openqs
