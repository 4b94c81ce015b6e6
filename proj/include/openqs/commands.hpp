#pragma once

// Figure presets, demo systems and CSV writers behind the openqs CLI.
//
// CSV conventions: comma separated, '.' decimal point, 17 significant
// digits, non-finite values spelled `inf`, `-inf`, `nan`. Widths are stored
// as full widths everywhere in the library; the sweep CSV writes half widths
// (G_half_i = Gamma_i / 2) and that is the only place the conversion happens.

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "openqs/branchpoint.hpp"
#include "openqs/model.hpp"
#include "openqs/smatrix.hpp"
#include "openqs/spectral.hpp"
#include "openqs/sweep.hpp"

namespace openqs {

inline std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) x = 0.0;  // no "-0"
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Two-level parameters with gamma1/2 given and gamma2 = 1.1 gamma1,
/// e1 = 1 - a/2, e2 = a, omega = 0.05.
inline TwoLevelParams figure_two_level(double gamma1_half, double omega = 0.05, double width_ratio = 1.1) {
  TwoLevelParams p;
  p.gamma1 = 2.0 * gamma1_half;
  p.gamma2 = width_ratio * p.gamma1;
  p.omega = omega;
  return p;
}

/// e1 = 1 - a/3, e2 = 1 - 5a/12, e3 = 1 - a/2, e4 = a, every pair coupled by omega.
inline FourLevelParams figure_four_level(double omega) {
  FourLevelParams p;
  p.energies = {Affine{1.0, -1.0 / 3.0}, Affine{1.0, -5.0 / 12.0}, Affine{1.0, -0.5}, Affine{0.0, 1.0}};
  for (std::size_t k = 0; k < 4; ++k)
    for (std::size_t l = 0; l < 4; ++l) p.omegas[k][l] = k == l ? 0.0 : omega;
  return p;
}

/// e1 = 1, e2 = 1.2 fixed; only states 3 and 4 coupled, by 0.1.
inline FourLevelParams figure_four_level_isolated() {
  FourLevelParams p;
  p.energies = {Affine{1.0, 0.0}, Affine{1.2, 0.0}, Affine{1.0, -0.5}, Affine{0.0, 1.0}};
  p.omegas[2][3] = p.omegas[3][2] = 0.1;
  return p;
}

struct SweepPreset {
  std::string name;
  std::string caption;
  std::variant<TwoLevelParams, FourLevelParams> params;
  double a_min = 0.5;
  double a_max = 0.9;
  std::size_t steps = 2001;

  Family family() const {
    if (const auto* two = std::get_if<TwoLevelParams>(&params)) return two_level_family(*two);
    return four_level_family(std::get<FourLevelParams>(params));
  }
};

namespace detail {
inline std::string short_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}
}  // namespace detail

inline const std::vector<SweepPreset>& sweep_presets() {
  static const std::vector<SweepPreset> presets = [] {
    std::vector<SweepPreset> v;
    v.push_back({"fig1", "double pole: gamma1/2 = 1.0, gamma2/2 = 1.1, omega = 0.05", figure_two_level(1.0), 0.62,
                 0.72, 2001});
    struct Panel {
      const char* suffix;
      double g;
    };
    for (const char* fig : {"fig2", "fig3"}) {
      for (const Panel& p : {Panel{"top", 1.10}, Panel{"middle", 0.90}, Panel{"bottom", 0.0}}) {
        v.push_back({std::string(fig) + "-" + p.suffix,
                     "gamma1/2 = " + detail::short_real(p.g) + ", gamma2 = 1.1 gamma1, omega = 0.05",
                     figure_two_level(p.g), 0.5, 0.9, 2001});
      }
    }
    for (const char* fig : {"fig4", "fig5", "fig6"}) {
      for (const Panel& p : {Panel{"top-left", 1.010}, Panel{"bottom-left", 0.990}, Panel{"top-right", 0.90},
                             Panel{"bottom-right", 0.0}}) {
        v.push_back({std::string(fig) + "-" + p.suffix,
                     "gamma1/2 = " + detail::short_real(p.g) + ", gamma2 = 1.1 gamma1, omega = 0.05",
                     figure_two_level(p.g), 0.5, 0.9, 2001});
      }
    }
    v.push_back({"fig7-top", "four discrete states, omega = 0.05 for all couplings", figure_four_level(0.05), 0.5,
                 0.9, 2001});
    v.push_back({"fig7-middle", "four discrete states, omega = 0.1 for all couplings", figure_four_level(0.1), 0.5,
                 0.9, 2001});
    v.push_back({"fig7-bottom", "e1 = 1, e2 = 1.2, omega = 0.1 between states 3 and 4 only",
                 figure_four_level_isolated(), 0.5, 0.9, 2001});
    return v;
  }();
  return presets;
}

inline std::string preset_names() {
  std::string s;
  for (const SweepPreset& p : sweep_presets()) s += (s.empty() ? "" : ", ") + p.name;
  return s;
}

inline const SweepPreset& find_preset(const std::string& name) {
  for (const SweepPreset& p : sweep_presets())
    if (p.name == name) return p;
  throw InputError("unknown preset '" + name + "'; available presets: " + preset_names());
}

// ---------------------------------------------------------------- sweep CSV

inline std::vector<std::string> sweep_csv_header(std::size_t n) {
  std::vector<std::string> h{"a"};
  for (std::size_t i = 1; i <= n; ++i) {
    h.push_back("E_" + std::to_string(i));
    h.push_back("G_half_" + std::to_string(i));
  }
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= n; ++j) {
      h.push_back("Re_b" + std::to_string(i) + std::to_string(j));
      h.push_back("Im_b" + std::to_string(i) + std::to_string(j));
    }
  for (std::size_t i = 1; i <= n; ++i) h.push_back("delta_" + std::to_string(i));
  for (std::size_t i = 1; i <= n; ++i) h.push_back("A_" + std::to_string(i));
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = i + 1; j <= n; ++j) h.push_back("B_" + std::to_string(i) + std::to_string(j));
  for (std::size_t i = 1; i <= n; ++i) h.push_back("ep_prox_" + std::to_string(i));
  h.push_back("exchange_flag");
  return h;
}

/// exchange_flag: 1 when a resolved exchange happens in the interval ending
/// at this row, 2 when only unresolved label changes happen there, else 0.
inline void write_sweep_csv(std::ostream& out, const Trajectory& t) {
  const std::size_t n = t.n_states;
  const auto header = sweep_csv_header(n);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  std::vector<int> flags(t.steps.size(), 0);
  for (const ExchangeEvent& e : t.exchange_events) {
    int& f = flags[e.step];
    if (!e.unresolved) f = 1;
    else if (f == 0) f = 2;
  }
  for (std::size_t k = 0; k < t.steps.size(); ++k) {
    const StepRecord& s = t.steps[k];
    out << format_real(s.a);
    for (std::size_t i = 0; i < n; ++i)
      out << ',' << format_real(s.energies[i].energy) << ',' << format_real(s.energies[i].half_width());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        out << ',' << format_real(s.mixing(i, j).real()) << ',' << format_real(s.mixing(i, j).imag());
    for (std::size_t i = 0; i < n; ++i) out << ',' << format_real(s.delta[i]);
    for (std::size_t i = 0; i < n; ++i) out << ',' << format_real(s.a_metrics[i]);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) out << ',' << format_real(s.b_metrics[i][j]);
    for (std::size_t i = 0; i < n; ++i) out << ',' << format_real(s.ep_proximity[i]);
    out << ',' << flags[k] << '\n';
  }
}

// ---------------------------------------------------------- branch points

struct BranchPointRun {
  BranchPoint point;
  DoublePoleReport report;
};

inline std::string branchpoint_summary(const BranchPointFamily& fam, const BranchPointRun& run) {
  const char* sname = fam.parameter == SearchParameter::gamma1 ? "gamma1" : "omega";
  char buf[320];
  const cplx x = run.point.energy;
  std::snprintf(buf, sizeof buf,
                "a*=%.12f %s*=%.12f X=%.4f%+.4fi residual=%.3e beta=%.4f iterations=%d coalesced=%d defective=%d",
                run.point.a_star, sname, run.point.s_star, x.real(), x.imag(), run.point.residual,
                run.report.beta, run.point.newton_iters, run.report.coalesced ? 1 : 0,
                run.report.defective ? 1 : 0);
  return buf;
}

inline void write_unfolding_csv(std::ostream& out, const DoublePoleReport& r) {
  out << "h,gap\n";
  for (const UnfoldingSample& s : r.unfolding) out << format_real(s.offset) << ',' << format_real(s.gap) << '\n';
}

// --------------------------------------------------------- S-matrix demos

struct ChannelSystem {
  std::string name;
  RealMatrix h_cl;
  ChannelCoupling coupling;
  std::optional<RealMatrix> pv_term;
};

/// One resonance at E = 0.5 decaying equally into two channels, so the
/// elastic |S_11|^2 drops to zero on resonance.
inline ChannelSystem single_resonance_demo() {
  ChannelSystem s{"single", RealMatrix::from_rows({{0.5}}), {RealMatrix::from_rows({{0.15, 0.15}})}, std::nullopt};
  return s;
}

/// Two overlapping resonances sharing one channel.
inline ChannelSystem overlapping_demo() {
  return {"overlap", RealMatrix::from_rows({{0.45, 0.0}, {0.0, 0.55}}), {RealMatrix::from_rows({{0.2}, {0.2}})},
          std::nullopt};
}

/// Four levels coupled equally to one channel.
inline ChannelSystem trapping_demo() {
  return {"trap",
          RealMatrix::from_rows({{-0.3, 0, 0, 0}, {0, -0.1, 0, 0}, {0, 0, 0.1, 0}, {0, 0, 0, 0.3}}),
          {RealMatrix::from_rows({{0.1}, {0.1}, {0.1}, {0.1}})},
          std::nullopt};
}

inline std::vector<double> linear_grid(double lo, double hi, std::size_t points) {
  if (points < 2) throw InputError("grid needs at least 2 points");
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i)
    g[i] = i + 1 == points ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  return g;
}

inline std::vector<double> log_grid(double lo, double hi, std::size_t points) {
  if (!(lo > 0.0) || !(hi > lo)) throw InputError("log grid needs 0 < lo < hi");
  std::vector<double> g = linear_grid(std::log(lo), std::log(hi), points);
  for (double& x : g) x = std::exp(x);
  g.front() = lo;
  g.back() = hi;
  return g;
}

inline std::string channel_label(std::size_t c, std::size_t d) {
  return std::to_string(c + 1) + (c >= 9 || d >= 9 ? "_" : "") + std::to_string(d + 1);
}

inline void write_smatrix_csv(std::ostream& out, const SMatrixGrid& g) {
  const std::size_t k = g.s.empty() ? 0 : g.s.front().k;
  out << 'E';
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t d = c; d < k; ++d) {
      const std::string l = channel_label(c, d);
      out << ",Re_S_" << l << ",Im_S_" << l << ",absS2_" << l;
    }
  out << '\n';
  for (std::size_t e = 0; e < g.energies.size(); ++e) {
    out << format_real(g.energies[e]);
    for (std::size_t c = 0; c < k; ++c)
      for (std::size_t d = c; d < k; ++d) {
        const cplx z = g.s[e](c, d);
        out << ',' << format_real(z.real()) << ',' << format_real(z.imag()) << ',' << format_real(std::norm(z));
      }
    out << '\n';
  }
}

inline void write_trap_csv(std::ostream& out, const std::vector<TrapRow>& rows, std::size_t n) {
  out << "alpha";
  for (std::size_t i = 1; i <= n; ++i) out << ",Gamma_" << i;
  out << ",sum_Gamma,trap_ratio\n";
  for (const TrapRow& r : rows) {
    out << format_real(r.alpha);
    for (const double g : r.widths) out << ',' << format_real(g);
    out << ',' << format_real(r.sum) << ',' << format_real(r.trap_ratio) << '\n';
  }
}

/// Pole expansion on the eigenstates of the channel-coupled Hamiltonian.
inline SMatrixGrid smatrix_from_system(const ChannelSystem& sys, const std::vector<double>& energies,
                                       const std::vector<double>& phases = {}) {
  const EffectiveHamiltonian h = build_channel_coupled(sys.h_cl, sys.coupling, sys.pv_term);
  const SpectralDecomposition d = decompose(h);
  return resonance_smatrix(d, transform_couplings(d, sys.coupling), energies, phases);
}

}  // namespace openqs
