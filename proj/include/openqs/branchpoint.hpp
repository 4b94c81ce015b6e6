#pragma once

// Branch points of the two-level family: zeros of the discriminant
// F = (eps1 - eps2)^2 + 4 omega^2 over two real parameters.

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "openqs/linalg.hpp"
#include "openqs/model.hpp"
#include "openqs/spectral.hpp"

namespace openqs {

/// Second real search parameter next to a.
enum class SearchParameter {
  gamma1,  ///< full width gamma1, with gamma2 = width_ratio * gamma1
  omega,   ///< coupling omega, widths fixed
};

/// Two-parameter slice (a, s) through the two-level family.
struct BranchPointFamily {
  TwoLevelParams base;
  SearchParameter parameter = SearchParameter::gamma1;
  double width_ratio = 1.1;

  TwoLevelParams at(double a, double s) const {
    TwoLevelParams p = base;
    p.a = a;
    if (parameter == SearchParameter::gamma1) {
      p.gamma1 = s;
      p.gamma2 = width_ratio * s;
    } else {
      p.omega = s;
    }
    return p;
  }

  double s_of(const TwoLevelParams& p) const { return parameter == SearchParameter::gamma1 ? p.gamma1 : p.omega; }
};

struct Discriminant {
  cplx value;
  cplx d_a;
  cplx d_s;
};

/// F and its closed-form gradient along (a, s).
inline Discriminant discriminant(const TwoLevelParams& p, SearchParameter s = SearchParameter::omega,
                                 double width_ratio = 1.1) {
  const cplx diff = p.eps1() - p.eps2();
  Discriminant d;
  d.value = diff * diff + 4.0 * p.omega * p.omega;
  d.d_a = 2.0 * diff * (p.e1.slope - p.e2.slope);
  if (s == SearchParameter::gamma1) {
    // d(eps1 - eps2)/d gamma1 = -(i/2)(1 - ratio)
    d.d_s = 2.0 * diff * cplx{0.0, -0.5 * (1.0 - width_ratio)};
  } else {
    d.d_s = 8.0 * p.omega;
  }
  return d;
}

inline Discriminant discriminant(const BranchPointFamily& f, double a, double s) {
  return discriminant(f.at(a, s), f.parameter, f.width_ratio);
}

struct BranchPoint {
  double a_star = 0.0;
  double s_star = 0.0;
  cplx energy;  ///< X = (eps1 + eps2) / 2
  double residual = 0.0;
  int newton_iters = 0;
};

/// Best iterate of a failed search.
class BranchPointError : public ConvergenceError {
 public:
  BranchPointError(const std::string& what, double residual, double a, double s)
      : ConvergenceError(what, residual), a_(a), s_(s) {}
  double a() const noexcept { return a_; }
  double s() const noexcept { return s_; }

 private:
  double a_;
  double s_;
};

struct NewtonOptions {
  int max_iterations = 100;
  double residual_scale = 1e-12;
};

// residual bound scale max(1, |eps1|^2, |eps2|^2)
inline double branch_residual_bound(const TwoLevelParams& p, double rel) {
  return rel * std::max({1.0, std::norm(p.eps1()), std::norm(p.eps2())});
}

/// Damped Newton on (a, s) -> (Re F, Im F). The step is halved until |F|
/// decreases.
inline BranchPoint find_branch_point(const BranchPointFamily& fam, double a0, double s0,
                                     const NewtonOptions& opt = {}) {
  double a = a0;
  double s = s0;
  Discriminant d = discriminant(fam, a, s);
  double fabs = std::abs(d.value);
  for (int it = 0; it <= opt.max_iterations; ++it) {
    const TwoLevelParams p = fam.at(a, s);
    if (fabs <= branch_residual_bound(p, opt.residual_scale)) {
      return {a, s, 0.5 * (p.eps1() + p.eps2()), fabs, it};
    }
    if (it == opt.max_iterations) break;

    const double j11 = d.d_a.real(), j12 = d.d_s.real();
    const double j21 = d.d_a.imag(), j22 = d.d_s.imag();
    const double det = j11 * j22 - j12 * j21;
    const double jscale = std::max({std::abs(j11), std::abs(j12), std::abs(j21), std::abs(j22)});
    if (!(std::abs(det) > 1e-14 * jscale * jscale) || jscale == 0.0)
      throw BranchPointError("singular Jacobian in branch-point search", fabs, a, s);
    const double fr = d.value.real(), fi = d.value.imag();
    const double da = -(j22 * fr - j12 * fi) / det;
    const double ds = -(-j21 * fr + j11 * fi) / det;

    double t = 1.0;
    bool improved = false;
    for (int halvings = 0; halvings < 60; ++halvings, t *= 0.5) {
      const Discriminant trial = discriminant(fam, a + t * da, s + t * ds);
      if (std::abs(trial.value) < fabs) {
        a += t * da;
        s += t * ds;
        d = trial;
        fabs = std::abs(trial.value);
        improved = true;
        break;
      }
    }
    if (!improved) throw BranchPointError("branch-point search stalled", fabs, a, s);
  }
  throw BranchPointError("branch-point search did not converge in " + std::to_string(opt.max_iterations) +
                             " iterations",
                         fabs, a, s);
}

struct UnfoldingSample {
  double offset;
  double gap;
};

struct DoublePoleReport {
  double coalescence_gap = 0.0;  ///< |E1 - E2| from the eigensolver at the point
  bool coalesced = false;
  std::vector<UnfoldingSample> unfolding;
  double beta = 0.0;  ///< fitted exponent of gap ~ offset^beta
  bool square_root = false;
  bool defective = false;

  bool ok() const { return coalesced && square_root && defective; }
};

/// Diagnose a located point: coalescence, square-root unfolding of the pair
/// along a, and the defective flag of the eigensolver.
inline DoublePoleReport verify_double_pole(const BranchPointFamily& fam, const BranchPoint& bp,
                                           const std::vector<double>& offsets = {1e-2, 1e-3, 1e-4, 1e-5}) {
  DoublePoleReport r;
  const EffectiveHamiltonian h = build_two_level(fam.at(bp.a_star, bp.s_star));
  const EigenPairs at = eig_complex_symmetric(h.matrix());
  const double scale = std::max(1.0, h.matrix().max_abs());
  r.coalescence_gap = std::abs(at.values[0] - at.values[1]);
  r.coalesced = r.coalescence_gap <= 1e-6 * scale;
  r.defective = at.defective;

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const double off : offsets) {
    const EigenPairs e = eig_complex_symmetric(build_two_level(fam.at(bp.a_star + off, bp.s_star)).matrix());
    const double gap = std::abs(e.values[0] - e.values[1]);
    r.unfolding.push_back({off, gap});
    const double x = std::log(std::abs(off));
    const double y = std::log(gap);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(offsets.size());
  r.beta = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  r.square_root = std::abs(r.beta - 0.5) <= 0.05;
  return r;
}

}  // namespace openqs
