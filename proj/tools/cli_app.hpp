#pragma once

// Argument handling for the openqs executable. Kept in a header so the test
// suite can drive the same code path in-process.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "openqs/branchpoint.hpp"
#include "openqs/commands.hpp"
#include "openqs/matrix_file.hpp"

namespace openqs::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConvergence = 2;
inline constexpr int kExitInput = 3;

namespace detail {

// Opens --output or falls back to the given stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : out_(&fallback) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file_) throw InputError("cannot open output file '" + path + "'");
    out_ = file_.get();
  }
  std::ostream& stream() { return *out_; }
  bool to_file() const { return file_ != nullptr; }
  void finish() {
    out_->flush();
    if (!*out_) throw InputError("writing output failed");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* out_;
};

struct TwoLevelFlags {
  std::optional<double> gamma1_half, gamma2_half, omega;
  std::optional<double> e1_offset, e1_slope, e2_offset, e2_slope;
  double ratio = 1.1;

  void add(CLI::App* app) {
    app->add_option("--gamma1-half", gamma1_half, "gamma1/2");
    app->add_option("--gamma2-half", gamma2_half, "gamma2/2 (default: ratio * gamma1/2)");
    app->add_option("--ratio", ratio, "gamma2/gamma1 when --gamma2-half is absent")->default_val(1.1);
    app->add_option("--omega", omega, "coupling omega");
    app->add_option("--e1-offset", e1_offset, "e1(a) = offset + slope a");
    app->add_option("--e1-slope", e1_slope);
    app->add_option("--e2-offset", e2_offset);
    app->add_option("--e2-slope", e2_slope);
  }

  bool any(const CLI::App* app) const {
    for (const char* name : {"--gamma1-half", "--gamma2-half", "--ratio", "--omega", "--e1-offset", "--e1-slope",
                             "--e2-offset", "--e2-slope"})
      if (app->count(name) > 0) return true;
    return false;
  }

  TwoLevelParams build(TwoLevelParams p) const {
    if (gamma1_half) p.gamma1 = 2.0 * *gamma1_half;
    p.gamma2 = gamma2_half ? 2.0 * *gamma2_half : ratio * p.gamma1;
    if (omega) p.omega = *omega;
    if (e1_offset) p.e1.offset = *e1_offset;
    if (e1_slope) p.e1.slope = *e1_slope;
    if (e2_offset) p.e2.offset = *e2_offset;
    if (e2_slope) p.e2.slope = *e2_slope;
    p.validate();
    return p;
  }
};

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (const char ch : s) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!s.empty()) out.push_back(cur);
  return out;
}

inline std::vector<double> parse_phases(const std::string& s) {
  std::vector<double> out;
  for (const std::string& tok : split_list(s)) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != tok.size()) throw InputError("bad phase value '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

inline ChannelSystem system_from_file(const std::string& path) {
  const MatrixFile f = load_matrix_file(path);
  return {path, f.h_cl, f.coupling, f.pv_term};
}

}  // namespace detail

/// Runs one invocation; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral dynamics of open quantum systems with non-Hermitian effective Hamiltonians", "openqs"};
  app.require_subcommand(1);

  // sweep
  CLI::App* sweep = app.add_subcommand("sweep", "eigenvalue/eigenvector trajectories over a");
  std::string preset;
  bool list_presets = false;
  detail::TwoLevelFlags sweep_flags;
  std::optional<double> a_min, a_max;
  std::optional<std::size_t> steps;
  std::string output;
  sweep->add_option("--preset", preset, "figure preset");
  sweep->add_flag("--list-presets", list_presets, "print the preset table");
  sweep_flags.add(sweep);
  sweep->add_option("--a-min", a_min);
  sweep->add_option("--a-max", a_max);
  sweep->add_option("--steps", steps, "grid points (default 2001)");
  sweep->add_option("--output,-o", output, "CSV path (default stdout)");

  // branchpoint
  CLI::App* bp = app.add_subcommand("branchpoint", "locate a double pole of the two-level family");
  std::string search = "gamma1";
  std::optional<double> a0, s0;
  std::string bp_preset;
  detail::TwoLevelFlags bp_flags;
  bp->add_option("--search", search, "second parameter: gamma1 or omega")->check(CLI::IsMember({"gamma1", "omega"}));
  bp->add_option("--a0", a0, "initial a");
  bp->add_option("--s0", s0, "initial value of the search parameter");
  bp->add_option("--preset", bp_preset, "two-level preset used as the base family");
  bp_flags.add(bp);
  bp->add_option("--output,-o", output, "unfolding CSV path (default stdout)");

  // smatrix
  CLI::App* sm = app.add_subcommand("smatrix", "resonance S matrix over an energy grid");
  std::string matrix_path, demo, method = "pole", phases;
  double e_min = 0.0, e_max = 1.0;
  std::size_t points = 401;
  sm->add_option("--matrix", matrix_path, "matrix file");
  sm->add_option("--demo", demo, "built-in system: single or overlap")->check(CLI::IsMember({"single", "overlap"}));
  sm->add_option("--e-min", e_min)->default_val(0.0);
  sm->add_option("--e-max", e_max)->default_val(1.0);
  sm->add_option("--points", points)->default_val(401);
  sm->add_option("--phases", phases, "comma-separated direct phases, one per channel");
  sm->add_option("--method", method, "pole or resolvent")->check(CLI::IsMember({"pole", "resolvent"}));
  sm->add_option("--output,-o", output);

  // trap
  CLI::App* trap = app.add_subcommand("trap", "widths against the overall coupling strength alpha");
  bool trap_demo = false;
  double alpha_min = 0.01, alpha_max = 30.0;
  std::size_t alpha_points = 61;
  trap->add_option("--matrix", matrix_path, "matrix file");
  trap->add_flag("--demo", trap_demo, "four levels, one channel");
  trap->add_option("--alpha-min", alpha_min)->default_val(0.01);
  trap->add_option("--alpha-max", alpha_max)->default_val(30.0);
  trap->add_option("--points", alpha_points)->default_val(61);
  trap->add_option("--output,-o", output);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitInput;
  }

  try {
    if (sweep->parsed()) {
      if (list_presets) {
        for (const SweepPreset& p : sweep_presets())
          out << p.name << "  a in [" << p.a_min << ", " << p.a_max << "]  " << p.caption << '\n';
        return kExitOk;
      }
      const bool explicit_params = sweep_flags.any(sweep);
      if (preset.empty() == !explicit_params)
        throw InputError("give exactly one of --preset or explicit two-level parameters");
      Family family;
      double lo = 0.5, hi = 0.9;
      std::size_t n = 2001;
      if (!preset.empty()) {
        const SweepPreset& p = find_preset(preset);
        family = p.family();
        lo = p.a_min;
        hi = p.a_max;
        n = p.steps;
      } else {
        TwoLevelParams base;
        base.omega = 0.05;
        family = two_level_family(sweep_flags.build(base));
      }
      const Trajectory t = run_sweep(family, a_min.value_or(lo), a_max.value_or(hi), steps.value_or(n));
      detail::Sink sink(output, out);
      write_sweep_csv(sink.stream(), t);
      sink.finish();
      return kExitOk;
    }

    if (bp->parsed()) {
      if (!bp_preset.empty() && bp_flags.any(bp))
        throw InputError("give either --preset or explicit two-level parameters, not both");
      TwoLevelParams base = figure_two_level(1.0);
      if (!bp_preset.empty()) {
        const SweepPreset& p = find_preset(bp_preset);
        const auto* two = std::get_if<TwoLevelParams>(&p.params);
        if (two == nullptr) throw InputError("preset '" + bp_preset + "' is not a two-level family");
        base = *two;
      } else {
        base = bp_flags.build(base);
      }
      BranchPointFamily fam;
      fam.base = base;
      fam.parameter = search == "omega" ? SearchParameter::omega : SearchParameter::gamma1;
      fam.width_ratio = base.gamma1 != 0.0 ? base.gamma2 / base.gamma1 : bp_flags.ratio;
      const bool by_omega = fam.parameter == SearchParameter::omega;
      const double guess_a = a0.value_or(by_omega ? 0.7 : 0.6);
      const double guess_s = s0.value_or(by_omega ? 0.04 : 1.8);

      detail::Sink sink(output, out);
      std::ostream& summary = sink.to_file() ? out : err;
      BranchPointRun run;
      try {
        run.point = find_branch_point(fam, guess_a, guess_s);
      } catch (const BranchPointError& e) {
        char buf[200];
        std::snprintf(buf, sizeof buf, "no branch point: %s; best iterate a=%.12f %s=%.12f residual=%.3e", e.what(),
                      e.a(), by_omega ? "omega" : "gamma1", e.s(), e.residual());
        err << buf << '\n';
        return kExitConvergence;
      }
      run.report = verify_double_pole(fam, run.point);
      write_unfolding_csv(sink.stream(), run.report);
      sink.finish();
      summary << branchpoint_summary(fam, run) << '\n';
      return kExitOk;
    }

    if (sm->parsed() || trap->parsed()) {
      const bool is_trap = trap->parsed();
      const bool use_demo = is_trap ? trap_demo : !demo.empty();
      if (matrix_path.empty() == !use_demo) throw InputError("give exactly one of --matrix or --demo");
      ChannelSystem sys = !matrix_path.empty() ? detail::system_from_file(matrix_path)
                          : is_trap            ? trapping_demo()
                          : demo == "single"   ? single_resonance_demo()
                                               : overlapping_demo();
      if (is_trap) {
        RealMatrix h = sys.h_cl;
        if (sys.pv_term)
          for (std::size_t i = 0; i < h.rows(); ++i)
            for (std::size_t j = 0; j < h.cols(); ++j) h(i, j) += (*sys.pv_term)(i, j);
        const auto rows = trapping_scan(h, sys.coupling, log_grid(alpha_min, alpha_max, alpha_points));
        detail::Sink sink(output, out);
        write_trap_csv(sink.stream(), rows, h.rows());
        sink.finish();
        return kExitOk;
      }
      if (!(e_max > e_min)) throw InputError("energy range must satisfy e-min < e-max");
      const std::vector<double> energies = linear_grid(e_min, e_max, points);
      const std::vector<double> ph = detail::parse_phases(phases);
      SMatrixGrid g;
      if (method == "pole") {
        g = smatrix_from_system(sys, energies, ph);
      } else {
        g = resolvent_smatrix(build_channel_coupled(sys.h_cl, sys.coupling, sys.pv_term), sys.coupling, energies, ph);
      }
      detail::Sink sink(output, out);
      write_smatrix_csv(sink.stream(), g);
      sink.finish();
      return kExitOk;
    }
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const NearDefectiveError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace openqs::cli
