#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "openqs/commands.hpp"

using namespace openqs;

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

std::string sweep_text(const Family& f, double lo, double hi, std::size_t steps) {
  std::ostringstream os;
  write_sweep_csv(os, run_sweep(f, lo, hi, steps));
  return os.str();
}

}  // namespace

TEST(FormatReal, SeventeenDigitsAndSentinels) {
  EXPECT_EQ(format_real(0.1), "0.10000000000000001");
  EXPECT_EQ(format_real(2.0 / 3.0), "0.66666666666666663");
  EXPECT_EQ(format_real(1.0), "1");
  EXPECT_EQ(format_real(-0.0), "0");
  EXPECT_EQ(format_real(kInf), "inf");
  EXPECT_EQ(format_real(-kInf), "-inf");
  EXPECT_EQ(format_real(kNaN), "nan");
}

TEST(FormatReal, RoundTrips) {
  for (const double x : {1e-300, 3.14159, -2.5e17, 0.0499999999999}) EXPECT_EQ(std::stod(format_real(x)), x);
}

TEST(SweepCsv, TwoLevelHeaderIsExact) {
  const SweepPreset& p = find_preset("fig2-middle");
  const auto lines = lines_of(sweep_text(p.family(), p.a_min, p.a_max, 11));
  EXPECT_EQ(lines.front(),
            "a,E_1,G_half_1,E_2,G_half_2,Re_b11,Im_b11,Re_b12,Im_b12,Re_b21,Im_b21,Re_b22,Im_b22,delta_1,delta_2,A_1,A_2,"
            "B_12,ep_prox_1,ep_prox_2,exchange_flag");
  EXPECT_EQ(lines.size(), 12u);
  for (std::size_t i = 1; i < lines.size(); ++i) EXPECT_EQ(split(lines[i]).size(), 21u);
}

TEST(SweepCsv, FourLevelHeaderExtendsPattern) {
  const auto h = sweep_csv_header(4);
  // a + 8 energy/width + 32 mixing + 4 delta + 4 A + 6 B + 4 ep_prox + flag
  EXPECT_EQ(h.size(), 60u);
  EXPECT_EQ(h[1], "E_1");
  EXPECT_EQ(h[9], "Re_b11");
  EXPECT_EQ(h[40], "Im_b44");
  EXPECT_EQ(h[49], "B_12");
  EXPECT_EQ(h[54], "B_34");
  EXPECT_EQ(h.back(), "exchange_flag");
}

TEST(SweepCsv, HalfWidthsAreWritten) {
  const auto lines = lines_of(sweep_text(two_level_family(figure_two_level(1.0)), 0.0, 0.01, 2));
  const auto row = split(lines[1]);
  // far from the crossing each width is close to its unperturbed gamma/2
  EXPECT_NEAR(std::stod(row[2]) + std::stod(row[4]), 1.0 + 1.1, 1e-9);
}

TEST(SweepCsv, DefectiveRowUsesSentinels) {
  const auto lines = lines_of(sweep_text(two_level_family(figure_two_level(1.0)), 1.0 / 3.0, 1.0, 2001));
  const auto row = split(lines[1001]);
  EXPECT_EQ(row[5], "nan");   // Re_b11
  EXPECT_EQ(row[13], "nan");  // delta_1
  EXPECT_EQ(row[15], "inf");  // A_1
  EXPECT_EQ(row[17], "inf");  // B_12
  EXPECT_EQ(split(lines[1000])[15].find("inf"), std::string::npos);
}

TEST(SweepCsv, ExchangeFlagMarksTheSwap) {
  const SweepPreset& p = find_preset("fig2-middle");
  const auto lines = lines_of(sweep_text(p.family(), p.a_min, p.a_max, p.steps));
  int ones = 0, twos = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string flag = split(lines[i]).back();
    ones += flag == "1";
    twos += flag == "2";
  }
  EXPECT_EQ(ones, 1);
  EXPECT_EQ(twos, 0);
}

TEST(SweepCsv, RepeatedRunsAreByteIdentical) {
  for (const char* name : {"fig1", "fig7-top"}) {
    const SweepPreset& p = find_preset(name);
    EXPECT_EQ(sweep_text(p.family(), p.a_min, p.a_max, 401), sweep_text(p.family(), p.a_min, p.a_max, 401));
  }
}

TEST(Presets, ParametersMatchCaptions) {
  const struct {
    const char* name;
    double gamma1_half;
  } two[] = {{"fig1", 1.0},          {"fig2-top", 1.10},          {"fig2-middle", 0.90},       {"fig2-bottom", 0.0},
             {"fig3-top", 1.10},     {"fig3-middle", 0.90},       {"fig3-bottom", 0.0},        {"fig4-top-left", 1.01},
             {"fig4-bottom-left", 0.99}, {"fig4-top-right", 0.90}, {"fig4-bottom-right", 0.0}, {"fig5-top-left", 1.01},
             {"fig5-bottom-left", 0.99}, {"fig5-top-right", 0.90}, {"fig5-bottom-right", 0.0}, {"fig6-top-left", 1.01},
             {"fig6-bottom-left", 0.99}, {"fig6-top-right", 0.90}, {"fig6-bottom-right", 0.0}};
  for (const auto& e : two) {
    const SweepPreset& p = find_preset(e.name);
    const auto& q = std::get<TwoLevelParams>(p.params);
    EXPECT_DOUBLE_EQ(q.gamma1 / 2.0, e.gamma1_half) << e.name;
    EXPECT_DOUBLE_EQ(q.gamma2, 1.1 * q.gamma1) << e.name;
    EXPECT_DOUBLE_EQ(q.omega, 0.05) << e.name;
    EXPECT_DOUBLE_EQ(q.e1.offset, 1.0);
    EXPECT_DOUBLE_EQ(q.e1.slope, -0.5);
    EXPECT_DOUBLE_EQ(q.e2.offset, 0.0);
    EXPECT_DOUBLE_EQ(q.e2.slope, 1.0);
    EXPECT_LT(p.a_min, 2.0 / 3.0);
    EXPECT_GT(p.a_max, 2.0 / 3.0);
  }
  for (const auto& [name, omega] : {std::pair{"fig7-top", 0.05}, std::pair{"fig7-middle", 0.1}}) {
    const auto& q = std::get<FourLevelParams>(find_preset(name).params);
    for (std::size_t k = 0; k < 4; ++k)
      for (std::size_t l = 0; l < 4; ++l) EXPECT_DOUBLE_EQ(q.omegas[k][l], k == l ? 0.0 : omega);
    EXPECT_DOUBLE_EQ(q.energies[0].slope, -1.0 / 3.0);
    EXPECT_DOUBLE_EQ(q.energies[1].slope, -5.0 / 12.0);
    EXPECT_DOUBLE_EQ(q.energies[2].slope, -0.5);
    EXPECT_DOUBLE_EQ(q.energies[3].slope, 1.0);
  }
  const auto& bottom = std::get<FourLevelParams>(find_preset("fig7-bottom").params);
  EXPECT_DOUBLE_EQ(bottom.energies[0](0.7), 1.0);
  EXPECT_DOUBLE_EQ(bottom.energies[1](0.7), 1.2);
  EXPECT_DOUBLE_EQ(bottom.omegas[2][3], 0.1);
  EXPECT_DOUBLE_EQ(bottom.omegas[0][3], 0.0);
  EXPECT_DOUBLE_EQ(bottom.omegas[0][1], 0.0);
}

TEST(Presets, UnknownNameListsAlternatives) {
  try {
    find_preset("fig9");
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("fig7-bottom"), std::string::npos);
  }
}

TEST(BranchPointSummary, DefaultFamily) {
  BranchPointFamily fam;
  fam.base = figure_two_level(1.0);
  BranchPointRun run;
  run.point = find_branch_point(fam, 0.6, 1.8);
  run.report = verify_double_pole(fam, run.point);
  const std::string s = branchpoint_summary(fam, run);
  EXPECT_EQ(s.rfind("a*=0.666666666666", 0), 0u) << s;
  EXPECT_NE(s.find("gamma1*=2.000000000"), std::string::npos) << s;
  EXPECT_NE(s.find("X=0.6667-1.0500i"), std::string::npos) << s;
  std::ostringstream os;
  write_unfolding_csv(os, run.report);
  const auto lines = lines_of(os.str());
  EXPECT_EQ(lines.front(), "h,gap");
  EXPECT_EQ(lines.size(), 5u);
}

TEST(SMatrixCsv, HeaderCoversChannelPairs) {
  const SMatrixGrid g = smatrix_from_system(single_resonance_demo(), linear_grid(0.0, 1.0, 3));
  std::ostringstream os;
  write_smatrix_csv(os, g);
  const auto lines = lines_of(os.str());
  EXPECT_EQ(lines.front(), "E,Re_S_11,Im_S_11,absS2_11,Re_S_12,Im_S_12,absS2_12,Re_S_22,Im_S_22,absS2_22");
  EXPECT_EQ(lines.size(), 4u);
  EXPECT_EQ(split(lines[2])[0], "0.5");
}

TEST(TrapCsv, SumColumnScalesWithAlphaSquared) {
  const ChannelSystem s = trapping_demo();
  const auto alphas = log_grid(0.01, 30.0, 7);
  std::ostringstream os;
  write_trap_csv(os, trapping_scan(s.h_cl, s.coupling, alphas), 4);
  const auto lines = lines_of(os.str());
  EXPECT_EQ(lines.front(), "alpha,Gamma_1,Gamma_2,Gamma_3,Gamma_4,sum_Gamma,trap_ratio");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto row = split(lines[i]);
    const double alpha = std::stod(row[0]);
    EXPECT_NEAR(std::stod(row[5]) / (alpha * alpha), 2.0 * std::numbers::pi * 0.04, 1e-12);
  }
}

TEST(Grids, EndpointsExact) {
  const auto g = linear_grid(0.1, 0.7, 7);
  EXPECT_EQ(g.front(), 0.1);
  EXPECT_EQ(g.back(), 0.7);
  const auto l = log_grid(0.01, 30.0, 5);
  EXPECT_EQ(l.front(), 0.01);
  EXPECT_EQ(l.back(), 30.0);
  EXPECT_NEAR(l[2], std::sqrt(0.3), 1e-14);
  EXPECT_THROW(linear_grid(0.0, 1.0, 1), InputError);
  EXPECT_THROW(log_grid(0.0, 1.0, 5), InputError);
}
