#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "openqs/commands.hpp"
#include "openqs/smatrix.hpp"
#include "oracles.hpp"

using namespace openqs;
using namespace std::complex_literals;

namespace {

constexpr double kPi = std::numbers::pi;

double max_entry_diff(const ChannelMatrix& x, const ChannelMatrix& y) {
  double worst = 0.0;
  for (std::size_t i = 0; i < x.data.size(); ++i) worst = std::max(worst, std::abs(x.data[i] - y.data[i]));
  return worst;
}

}  // namespace

TEST(TransformCouplings, SingleStateIsIdentity) {
  const ChannelSystem s = single_resonance_demo();
  const SpectralDecomposition d = decompose(build_channel_coupled(s.h_cl, s.coupling));
  const TransformedCouplings t = transform_couplings(d, s.coupling);
  // the gauge picks v = +1
  EXPECT_NEAR(std::abs(t(0, 0) - 0.15), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(t(0, 1) - 0.15), 0.0, 1e-15);
}

TEST(TransformCouplings, ClosedChannelsGiveZero) {
  const RealMatrix h = RealMatrix::from_rows({{0.3, 0.1}, {0.1, 0.6}});
  const ChannelCoupling w{RealMatrix(2, 2)};
  const SpectralDecomposition d = decompose(build_channel_coupled(h, w));
  const TransformedCouplings t = transform_couplings(d, w);
  for (const cplx& z : t.w_tilde) EXPECT_EQ(z, cplx{0.0});
}

TEST(TransformCouplings, OverlappingStatesAreComplexButObeySumRule) {
  const ChannelSystem s = overlapping_demo();
  const SpectralDecomposition d = decompose(build_channel_coupled(s.h_cl, s.coupling));
  const TransformedCouplings t = transform_couplings(d, s.coupling);
  EXPECT_GT(std::max(std::abs(t(0, 0).imag()), std::abs(t(1, 0).imag())), 1e-3);
  // 0.2^2 + 0.2^2
  EXPECT_LE(std::abs(t.squared_sum() - 0.08), 1e-12);
  EXPECT_GT(std::abs(std::norm(t(0, 0)) + std::norm(t(1, 0)) - 0.08), 1e-3);
}

TEST(TransformCouplings, SumRuleOnRandomInstances) {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 8, k = 1 + trial % 3;
    const auto sys = oracle::random_channel_system(rng, n, k, 0.3);
    const ChannelCoupling w{sys.w};
    const SpectralDecomposition d = decompose(build_channel_coupled(sys.h_cl, w));
    const TransformedCouplings t = transform_couplings(d, w);
    const double ref = w.squared_sum();
    ASSERT_LE(std::abs(t.squared_sum() - ref), 1e-10 * std::max(ref, 1e-300));
  }
}

TEST(TransformCouplings, RejectsDefectiveDecomposition) {
  ComplexMatrix m = ComplexMatrix::from_rows({{2.0 / 3.0 - 1.0i, -0.05}, {-0.05, 2.0 / 3.0 - 1.1i}});
  m.mark_symmetric();
  const SpectralDecomposition d = decompose(build_explicit(m));
  ASSERT_TRUE(d.defective);
  EXPECT_THROW(transform_couplings(d, ChannelCoupling{RealMatrix(2, 1, 0.1)}), NearDefectiveError);
}

TEST(ResonanceSMatrix, FullDipOnIsolatedResonance) {
  // one channel, Gamma = 2 pi W^2, E = E_R
  const RealMatrix h = RealMatrix::from_rows({{0.5}});
  const ChannelCoupling w{RealMatrix::from_rows({{0.2}})};
  const SpectralDecomposition d = decompose(build_channel_coupled(h, w));
  const SMatrixGrid g = resonance_smatrix(d, transform_couplings(d, w), {0.5});
  EXPECT_LE(std::abs(g.resonance[0](0, 0) - 2.0), 1e-14);
  EXPECT_LE(std::abs(g.s[0](0, 0) + 1.0), 1e-14);
}

TEST(ResonanceSMatrix, MatchesBreitWigner) {
  const RealMatrix h = RealMatrix::from_rows({{0.4}});
  const ChannelCoupling w{RealMatrix::from_rows({{0.12}})};
  const SpectralDecomposition d = decompose(build_channel_coupled(h, w));
  const auto energies = linear_grid(0.0, 1.0, 101);
  const SMatrixGrid g = resonance_smatrix(d, transform_couplings(d, w), energies);
  for (std::size_t i = 0; i < energies.size(); ++i)
    EXPECT_LE(std::abs(g.s[i](0, 0) - oracle::breit_wigner(energies[i], 0.4, 0.12)), 1e-14);
}

TEST(ResonanceSMatrix, TwoChannelDemoIsFullyInelasticOnResonance) {
  const ChannelSystem s = single_resonance_demo();
  const SMatrixGrid g = smatrix_from_system(s, {0.5});
  EXPECT_LE(std::norm(g.s[0](0, 0)), 1e-20);
  EXPECT_NEAR(std::norm(g.s[0](0, 1)), 1.0, 1e-12);
}

TEST(ResonanceSMatrix, FarFromResonanceApproachesDirectPart) {
  const ChannelSystem s = overlapping_demo();
  const std::vector<double> phases{0.3};
  const SMatrixGrid g = smatrix_from_system(s, {1e8}, phases);
  EXPECT_LE(std::abs(g.s[0](0, 0) - std::exp(0.6i)), 1e-8);
}

TEST(ResonanceSMatrix, SDecomposesIntoDirectMinusResonance) {
  const ChannelSystem s = single_resonance_demo();
  const SMatrixGrid g = smatrix_from_system(s, linear_grid(0.0, 1.0, 11), {0.1, -0.2});
  for (std::size_t e = 0; e < g.energies.size(); ++e)
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(g.s[e].data[i], g.direct[e].data[i] - g.resonance[e].data[i]);
  EXPECT_EQ(g.direct[0](0, 1), cplx{0.0});
}

TEST(ResonanceSMatrix, RealPoleOnGridIsAnError) {
  const RealMatrix h = RealMatrix::from_rows({{0.25, 0.0}, {0.0, 0.75}});
  // state 2 is decoupled: a real pole at 0.75
  const ChannelCoupling w{RealMatrix::from_rows({{0.1}, {0.0}})};
  const SpectralDecomposition d = decompose(build_channel_coupled(h, w));
  const TransformedCouplings t = transform_couplings(d, w);
  EXPECT_THROW(resonance_smatrix(d, t, {0.75}), Error);
  EXPECT_NO_THROW(resonance_smatrix(d, t, {0.7}));
}

TEST(ResonanceSMatrix, PhaseCountMustMatchChannels) {
  const ChannelSystem s = single_resonance_demo();
  EXPECT_THROW(smatrix_from_system(s, {0.5}, {0.1}), DimensionError);
}

TEST(ResolventSMatrix, NoCouplingGivesIdentity) {
  const RealMatrix h = RealMatrix::from_rows({{0.3, 0.1}, {0.1, 0.6}});
  const ChannelCoupling w{RealMatrix(2, 2)};
  const SMatrixGrid g = resolvent_smatrix(build_channel_coupled(h, w), w, {0.1, 0.9});
  for (const ChannelMatrix& s : g.s) {
    EXPECT_EQ(s(0, 0), cplx{1.0});
    EXPECT_EQ(s(0, 1), cplx{0.0});
  }
}

TEST(ResolventSMatrix, SingularSystemIsAnError) {
  const RealMatrix h = RealMatrix::from_rows({{0.5}});
  const ChannelCoupling w{RealMatrix(1, 1)};
  EXPECT_THROW(resolvent_smatrix(build_channel_coupled(h, w), w, {0.5}), Error);
}

// Pole expansion, resolvent, unitarity and symmetry on random systems.
TEST(SMatrixProperty, PoleExpansionMatchesResolvent) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> nd(1, 8), kd(1, 3);
  const auto energies = linear_grid(-0.5, 1.5, 200);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = nd(rng), k = kd(rng);
    const auto sys = oracle::random_channel_system(rng, n, k);
    const ChannelCoupling w{sys.w};
    const EffectiveHamiltonian h = build_channel_coupled(sys.h_cl, w);
    const SpectralDecomposition d = decompose(h);
    const SMatrixGrid pole = resonance_smatrix(d, transform_couplings(d, w), energies);
    const SMatrixGrid res = resolvent_smatrix(h, w, energies);
    for (std::size_t e = 0; e < energies.size(); ++e) {
      ASSERT_LE(max_entry_diff(pole.s[e], res.s[e]), 1e-10) << "trial " << trial << " E=" << energies[e];
      ASSERT_LE(unitarity_defect(pole.s[e]), 1e-10);
      ASSERT_LE(unitarity_defect(res.s[e]), 1e-10);
      for (std::size_t c = 0; c < k; ++c)
        for (std::size_t c2 = c + 1; c2 < k; ++c2) ASSERT_LE(std::abs(pole.s[e](c, c2) - pole.s[e](c2, c)), 1e-10);
    }
  }
}

TEST(SMatrixProperty, SingleChannelStaysOnUnitCircle) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto sys = oracle::random_channel_system(rng, 1 + trial % 6, 1);
    const SMatrixGrid g = smatrix_from_system({"r", sys.h_cl, {sys.w}, std::nullopt}, linear_grid(-0.2, 1.2, 50));
    for (const ChannelMatrix& s : g.s) ASSERT_NEAR(std::abs(s(0, 0)), 1.0, 1e-10);
  }
}

TEST(SMatrixProperty, PerStateWidthForWeakOverlap) {
  const RealMatrix h = RealMatrix::from_rows({{0.1, 0.02, 0.0}, {0.02, 0.4, 0.01}, {0.0, 0.01, 0.7}});
  const ChannelCoupling w{RealMatrix::from_rows({{0.01, 0.005}, {0.008, -0.01}, {0.012, 0.003}})};
  const SpectralDecomposition d = decompose(build_channel_coupled(h, w));
  const TransformedCouplings t = transform_couplings(d, w);
  for (std::size_t r = 0; r < d.n(); ++r) {
    cplx s = 0.0;
    for (std::size_t c = 0; c < t.n_channels; ++c) s += t(r, c) * t(r, c);
    EXPECT_NEAR(d.eigenvalues[r].width, 2.0 * kPi * s.real(), 1e-8);
  }
}

TEST(Trapping, SumRuleAtEveryAlpha) {
  std::mt19937_64 rng(6);
  const auto alphas = log_grid(0.01, 30.0, 61);
  for (int trial = 0; trial < 20; ++trial) {
    const auto sys = oracle::random_channel_system(rng, 2 + trial % 6, 1 + trial % 3);
    const ChannelCoupling w{sys.w};
    const auto rows = trapping_scan(sys.h_cl, w, alphas);
    for (const TrapRow& row : rows) {
      if (row.defective) continue;
      const double ref = 2.0 * kPi * row.alpha * row.alpha * w.squared_sum();
      ASSERT_LE(std::abs(row.sum - ref), 1e-12 * ref) << row.alpha;
    }
  }
}

TEST(Trapping, OneBroadStateAtStrongCoupling) {
  const ChannelSystem s = trapping_demo();
  const auto rows = trapping_scan(s.h_cl, s.coupling, log_grid(0.01, 30.0, 61));
  const TrapRow& last = rows.back();
  EXPECT_LT(last.trap_ratio, 0.01);
  EXPECT_GT(last.widths[0] / last.sum, 0.99);
  for (std::size_t i = 1; i < last.widths.size(); ++i) EXPECT_LE(last.widths[i], last.widths[i - 1]);
}

TEST(Trapping, WeakCouplingScalesAsAlphaSquared) {
  const ChannelSystem s = trapping_demo();
  const auto rows = trapping_scan(s.h_cl, s.coupling, {1e-3, 2e-3});
  for (std::size_t r = 0; r < rows[0].widths.size(); ++r)
    EXPECT_NEAR(rows[1].widths[r] / rows[0].widths[r], 4.0, 1e-4);
}

TEST(Trapping, TwoStateClosedForm) {
  // h = diag(-d, d), W = (w, w): widths g -+ sqrt(g^2 - d^2) once g = pi alpha^2 w^2 exceeds d
  const double dd = 0.1, wc = 0.1;
  const RealMatrix h = RealMatrix::from_rows({{-dd, 0.0}, {0.0, dd}});
  const ChannelCoupling w{RealMatrix::from_rows({{wc}, {wc}})};
  const auto alphas = log_grid(0.5, 20.0, 80);
  const auto rows = trapping_scan(h, w, alphas);
  double prev = 1.0;
  for (const TrapRow& row : rows) {
    const double g = kPi * row.alpha * row.alpha * wc * wc;
    const double ref = g > dd ? (g - std::sqrt(g * g - dd * dd)) / (2.0 * g) : 0.5;
    if (std::abs(g - dd) < 1e-3) continue;
    EXPECT_NEAR(row.trap_ratio, ref, 1e-9) << row.alpha;
    if (g > dd) {
      EXPECT_LE(row.trap_ratio, prev);
      prev = row.trap_ratio;
    }
  }
}

TEST(Trapping, RejectsBadAlphaGrid) {
  const ChannelSystem s = trapping_demo();
  EXPECT_THROW(trapping_scan(s.h_cl, s.coupling, {0.0, 1.0}), InputError);
  EXPECT_THROW(trapping_scan(s.h_cl, s.coupling, {1.0, 0.5}), InputError);
}
