#pragma once

// Parameter sweeps: eigenvalue and eigenvector trajectories over a uniform
// grid in a, with state identity carried by eigenvector overlap.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "openqs/linalg.hpp"
#include "openqs/model.hpp"
#include "openqs/spectral.hpp"

namespace openqs {

using Family = std::function<EffectiveHamiltonian(double)>;

inline Family two_level_family(TwoLevelParams base) {
  return [base](double a) {
    TwoLevelParams p = base;
    p.a = a;
    return build_two_level(p);
  };
}

inline Family four_level_family(FourLevelParams base) {
  return [base](double a) {
    FourLevelParams p = base;
    p.a = a;
    return build_four_level(p);
  };
}

/// One grid point, every per-state vector indexed by tracked state.
struct StepRecord {
  double a = 0.0;
  std::vector<ComplexEnergy> energies;
  std::vector<ComplexVector> vectors;
  MixingCoefficients mixing;
  std::vector<double> delta;
  std::vector<double> a_metrics;
  std::vector<std::vector<double>> b_metrics;
  std::vector<double> ep_proximity;
  /// sorted_index[i]: position of tracked state i in the eigensolver order
  std::vector<std::size_t> sorted_index;
  bool defective = false;
  /// The eigenvalue jump from the previous step exceeded the local slope bound.
  bool continuity_flag = false;
};

struct ExchangeEvent {
  std::size_t step = 0;  ///< the swap happens between grid points step-1 and step
  double a_lo = 0.0;
  double a_hi = 0.0;
  std::size_t state_i = 0;
  std::size_t state_j = 0;
  std::size_t label_i = 0;  ///< dominant unperturbed label of state_i before the swap
  std::size_t label_j = 0;  ///< label state_i carries after the swap
  bool unresolved = false;
};

struct Trajectory {
  std::size_t n_states = 0;
  std::vector<double> grid;
  std::vector<StepRecord> steps;
  std::vector<ExchangeEvent> exchange_events;

  /// Permutation p with: eigensolver index k at step s becomes p[k] at s+1.
  std::vector<std::size_t> association(std::size_t s) const {
    std::vector<std::size_t> p(n_states);
    for (std::size_t i = 0; i < n_states; ++i) p[steps[s].sorted_index[i]] = steps[s + 1].sorted_index[i];
    return p;
  }
};

enum class Regime { energy_cross, width_cross, double_pole };

inline std::string to_string(Regime r) {
  switch (r) {
    case Regime::energy_cross:
      return "energy_cross";
    case Regime::width_cross:
      return "width_cross";
    case Regime::double_pole:
      return "double_pole";
  }
  return "unknown";
}

/// Sign of F_cr = 4 w^2 - (g1 - g2)^2 / 4 at the unperturbed crossing.
inline Regime classify_regime(const TwoLevelParams& p, double tol = 1e-12) {
  (void)p.crossing();  // throws for parallel energies
  const double dg = p.gamma1 - p.gamma2;
  const double f_cr = 4.0 * p.omega * p.omega - 0.25 * dg * dg;
  if (f_cr > tol) return Regime::width_cross;
  if (f_cr < -tol) return Regime::energy_cross;
  return Regime::double_pole;
}

inline double critical_discriminant(const TwoLevelParams& p) {
  const double dg = p.gamma1 - p.gamma2;
  return 4.0 * p.omega * p.omega - 0.25 * dg * dg;
}

namespace detail {

inline ComplexVector unit(const ComplexVector& v) {
  ComplexVector u = v;
  const double n = norm2(v);
  for (cplx& z : u) z /= n;
  return u;
}

// Tracked order for a fresh start: state i is the eigenstate dominated by
// unperturbed state i when that labelling is a permutation.
inline std::vector<std::size_t> seed_order(const MixingCoefficients& mc) {
  std::vector<std::size_t> order(mc.n, mc.n);
  for (std::size_t k = 0; k < mc.n; ++k) {
    const std::size_t lab = mc.dominant(k);
    if (order[lab] != mc.n) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      return order;
    }
    order[lab] = k;
  }
  return order;
}

// Greedy assignment by descending |<u_i|w_j>|, ties broken by |dE|.
inline std::vector<std::size_t> associate(const std::vector<ComplexVector>& prev_vectors,
                                          const std::vector<ComplexEnergy>& prev_energies,
                                          const SpectralDecomposition& d) {
  const std::size_t n = d.n();
  struct Cand {
    double overlap;
    double de;
    std::size_t i;
    std::size_t j;
  };
  std::vector<ComplexVector> cur(n);
  for (std::size_t j = 0; j < n; ++j) cur[j] = unit(d.vectors[j]);
  std::vector<Cand> cands;
  cands.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    const ComplexVector u = unit(prev_vectors[i]);
    for (std::size_t j = 0; j < n; ++j)
      cands.push_back({std::abs(hproduct(u, cur[j])), std::abs(prev_energies[i].value() - d.eigenvalue(j)), i, j});
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
    if (std::abs(x.overlap - y.overlap) > 1e-12) return x.overlap > y.overlap;
    if (x.de != y.de) return x.de < y.de;
    if (x.i != y.i) return x.i < y.i;
    return x.j < y.j;
  });
  std::vector<std::size_t> assign(n, n);
  std::vector<bool> taken(n, false);
  for (const Cand& c : cands) {
    if (assign[c.i] != n || taken[c.j]) continue;
    assign[c.i] = c.j;
    taken[c.j] = true;
  }
  return assign;
}

inline StepRecord make_record(double a, const EffectiveHamiltonian& h, const SpectralDecomposition& d,
                              const std::vector<std::size_t>& order, const std::vector<ComplexVector>* prev) {
  const std::size_t n = d.n();
  StepRecord r;
  r.a = a;
  r.sorted_index = order;
  r.defective = d.defective;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = order[i];
    r.energies.push_back(d.eigenvalues[k]);
    ComplexVector v = d.vectors[k];
    if (prev != nullptr && !d.defective && hproduct((*prev)[i], v).real() < 0.0)
      for (cplx& z : v) z = -z;
    r.vectors.push_back(std::move(v));
    r.a_metrics.push_back(d.a_metrics[k]);
    r.ep_proximity.push_back(d.ep_proximity[k]);
  }
  r.b_metrics.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) r.b_metrics[i][j] = d.b_metrics[order[i]][order[j]];

  SpectralDecomposition tracked = d;
  tracked.vectors = r.vectors;
  for (std::size_t i = 0; i < n; ++i) tracked.state_defective[i] = d.state_defective[order[i]];
  r.mixing = mixing(h, tracked);
  r.delta.resize(n);
  for (std::size_t i = 0; i < n; ++i) r.delta[i] = d.defective ? kNaN : purity_delta(r.mixing, i);
  return r;
}

}  // namespace detail

/// Dominant-label swaps along the trajectory. A state's label is the
/// unperturbed state carrying its largest |b_ij|^2; grid points where the
/// two largest weights tie (within `tie`) leave the label undetermined and
/// are skipped. A clean pairwise swap between tracked states i and j is an
/// exchange; any other change of label is reported as an unresolved event.
/// Events involving a state whose dominance is ambiguous (top two weights
/// within `ambiguity`) at either end of the sweep are marked unresolved too.
/// Defective rows reset the labels, so no event spans a double pole.
inline std::vector<ExchangeEvent> detect_exchange(const Trajectory& t, double ambiguity = 1e-3, double tie = 1e-9) {
  std::vector<ExchangeEvent> events;
  const std::size_t n = t.n_states;
  if (t.steps.size() < 2 || n < 2) return events;

  auto top_two_gap = [&](const StepRecord& s, std::size_t i) {
    std::vector<double> w(n);
    for (std::size_t j = 0; j < n; ++j) w[j] = s.mixing.weight(i, j);
    std::sort(w.begin(), w.end(), std::greater<>());
    return w[0] - w[1];
  };
  auto ambiguous_at = [&](const StepRecord& s, std::size_t i) { return s.defective || top_two_gap(s, i) <= ambiguity; };
  const StepRecord& first = t.steps.front();
  const StepRecord& last = t.steps.back();

  std::vector<std::optional<std::size_t>> label(n);
  std::vector<std::size_t> since(n, 0);
  for (std::size_t k = 0; k < t.steps.size(); ++k) {
    const StepRecord& c = t.steps[k];
    if (c.defective) {
      std::fill(label.begin(), label.end(), std::nullopt);
      continue;
    }
    std::vector<std::optional<std::size_t>> cur(n);
    for (std::size_t i = 0; i < n; ++i)
      if (top_two_gap(c, i) > tie) cur[i] = c.mixing.dominant(i);

    std::vector<std::size_t> changed;
    for (std::size_t i = 0; i < n; ++i)
      if (cur[i] && label[i] && *cur[i] != *label[i]) changed.push_back(i);
    std::vector<bool> used(n, false);
    for (const std::size_t i : changed) {
      if (used[i]) continue;
      std::optional<std::size_t> partner;
      for (const std::size_t j : changed)
        if (j != i && !used[j] && *label[i] == *cur[j] && *label[j] == *cur[i]) {
          partner = j;
          break;
        }
      ExchangeEvent e;
      e.step = k;
      e.a_hi = c.a;
      e.state_i = i;
      e.label_i = *label[i];
      std::size_t j = i;
      if (partner) {
        j = *partner;
        used[j] = true;
      } else {
        // no clean partner: whoever held the label state i moved to
        for (std::size_t q = 0; q < n; ++q)
          if (q != i && label[q] && *label[q] == *cur[i]) j = q;
        e.unresolved = true;
      }
      e.state_j = j;
      e.label_j = *cur[i];
      e.a_lo = t.steps[std::min(since[i], since[j])].a;
      used[i] = true;
      if (ambiguous_at(first, e.state_i) || ambiguous_at(first, e.state_j) || ambiguous_at(last, e.state_i) ||
          ambiguous_at(last, e.state_j))
        e.unresolved = true;
      events.push_back(e);
    }
    for (std::size_t i = 0; i < n; ++i)
      if (cur[i]) {
        label[i] = cur[i];
        since[i] = k;
      }
  }
  return events;
}

struct SweepOptions {
  DecomposeOptions decompose{};
  /// Continuity flag threshold, in multiples of the local slope estimate.
  double continuity_factor = 10.0;
};

/// Decompose the family on a uniform grid of `steps` points and track the
/// states across it.
inline Trajectory run_sweep(const Family& family, double a_min, double a_max, std::size_t steps,
                            const SweepOptions& opt = {}) {
  if (steps < 2) throw InputError("a sweep needs at least 2 grid points");
  if (!(a_max > a_min)) throw InputError("sweep range must satisfy a_min < a_max");
  Trajectory t;
  t.grid.resize(steps);
  const double da = (a_max - a_min) / static_cast<double>(steps - 1);
  for (std::size_t k = 0; k < steps; ++k) t.grid[k] = k + 1 == steps ? a_max : a_min + static_cast<double>(k) * da;

  std::optional<EffectiveHamiltonian> prev_h;
  double prev_slope = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double a = t.grid[k];
    const EffectiveHamiltonian h = family(a);
    if (t.n_states == 0) t.n_states = h.n();
    if (h.n() != t.n_states) throw DimensionError("family changed dimension during the sweep");

    std::optional<SpectralDecomposition> d;
    try {
      d = decompose(h, opt.decompose);
    } catch (const NearDefectiveError&) {
      d.reset();
    }

    const bool have_prev = !t.steps.empty() && !t.steps.back().defective;
    if (!d || d->defective) {
      // sentinel row; association restarts at the next regular point
      SpectralDecomposition s;
      if (d) {
        s = *d;
      } else {
        const EigenPairs raw = eig_complex_symmetric(h.matrix(), opt.decompose.eigen);
        for (const cplx& z : raw.values) s.eigenvalues.push_back(ComplexEnergy::from_eigenvalue(z));
        s.vectors = raw.vectors;
        s.ep_proximity.assign(raw.values.size(), 0.0);
        for (std::size_t i = 0; i < raw.values.size(); ++i)
          s.ep_proximity[i] = std::abs(cproduct(raw.vectors[i], raw.vectors[i]));
      }
      s.defective = true;
      s.state_defective.assign(t.n_states, true);
      s.a_metrics.assign(t.n_states, kInf);
      s.b_metrics.assign(t.n_states, std::vector<double>(t.n_states, kInf));
      for (std::size_t i = 0; i < t.n_states; ++i) s.b_metrics[i][i] = 0.0;
      std::vector<std::size_t> order(t.n_states);
      std::iota(order.begin(), order.end(), std::size_t{0});
      t.steps.push_back(detail::make_record(a, h, s, order, nullptr));
      prev_h = h;
      continue;
    }

    std::vector<std::size_t> order;
    if (have_prev) {
      order = detail::associate(t.steps.back().vectors, t.steps.back().energies, *d);
    } else {
      order = detail::seed_order(mixing(h, *d));
    }
    StepRecord rec = detail::make_record(a, h, *d, order, have_prev ? &t.steps.back().vectors : nullptr);

    if (have_prev) {
      const StepRecord& p = t.steps.back();
      double jump = 0.0;
      for (std::size_t i = 0; i < t.n_states; ++i)
        jump = std::max(jump, std::abs(rec.energies[i].value() - p.energies[i].value()));
      double hslope = 0.0;
      for (std::size_t i = 0; i < t.n_states; ++i)
        for (std::size_t j = 0; j < t.n_states; ++j)
          hslope = std::max(hslope, std::abs(h.matrix()(i, j) - prev_h->matrix()(i, j)) / da);
      const double bound = opt.continuity_factor * std::max(prev_slope, hslope) * da;
      rec.continuity_flag = jump > bound;
      prev_slope = jump / da;
    }
    t.steps.push_back(std::move(rec));
    prev_h = h;
  }
  t.exchange_events = detect_exchange(t);
  return t;
}

/// Whether the tracked energy and width trajectories of states i, j change
/// order somewhere on the grid.
struct CrossingPattern {
  bool energies_cross = false;
  bool widths_cross = false;
};

inline CrossingPattern crossing_pattern(const Trajectory& t, std::size_t i = 0, std::size_t j = 1) {
  CrossingPattern c;
  std::optional<double> de0, dg0;
  for (const StepRecord& s : t.steps) {
    if (s.defective) continue;
    const double de = s.energies[i].energy - s.energies[j].energy;
    const double dg = s.energies[i].width - s.energies[j].width;
    if (de0 && de != 0.0 && (de > 0.0) != (*de0 > 0.0)) c.energies_cross = true;
    if (dg0 && dg != 0.0 && (dg > 0.0) != (*dg0 > 0.0)) c.widths_cross = true;
    if (de != 0.0) de0 = de;
    if (dg != 0.0) dg0 = dg;
  }
  return c;
}

/// Local minima over the grid of the gap between consecutive levels when
/// levels are ordered by energy. Returns (k, a, gap) for level pair (k, k+1).
struct GapMinimum {
  std::size_t lower_level = 0;
  double a = 0.0;
  double gap = 0.0;
};

inline std::vector<GapMinimum> level_gap_minima(const Trajectory& t) {
  const std::size_t n = t.n_states;
  std::vector<std::vector<double>> gaps(n > 0 ? n - 1 : 0, std::vector<double>(t.steps.size(), kNaN));
  for (std::size_t s = 0; s < t.steps.size(); ++s) {
    std::vector<double> e;
    for (const ComplexEnergy& z : t.steps[s].energies) e.push_back(z.energy);
    std::sort(e.begin(), e.end());
    for (std::size_t k = 0; k + 1 < n; ++k) gaps[k][s] = e[k + 1] - e[k];
  }
  std::vector<GapMinimum> out;
  for (std::size_t k = 0; k + 1 < n; ++k)
    for (std::size_t s = 1; s + 1 < t.steps.size(); ++s)
      if (gaps[k][s] < gaps[k][s - 1] && gaps[k][s] <= gaps[k][s + 1]) out.push_back({k, t.steps[s].a, gaps[k][s]});
  return out;
}

}  // namespace openqs
