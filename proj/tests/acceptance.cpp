// Acceptance suite: one line per criterion, PASS or FAIL, with the measured
// numbers. Exit code is the number of failed gating criteria (criterion 7 is
// diagnostic only).

#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "platoonmac/delay.hpp"
#include "platoonmac/des.hpp"
#include "platoonmac/edca.hpp"
#include "platoonmac/platoon.hpp"
#include "platoonmac/scenario.hpp"
#include "platoonmac/traffic.hpp"

using namespace platoonmac;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& what, bool gating = true) {
  std::printf("%s criterion %d: %s%s\n", pass ? "PASS" : "FAIL", id,
              what.c_str(), gating ? "" : " [diagnostic, not gating]");
  if (!pass && gating) ++failures;
}

PlatoonModel make_model(double l, double y_star) {
  PlatoonModel m;
  m.a = 5.0;
  m.l = l;
  m.ovf.y_m = 5.0;
  m.ovf.y_tilde = 10.0;
  m.lead_speed = 25.0;
  m.ovf.v0 = solve_v0_for_equilibrium(y_star, m.lead_speed, m.ovf.y_m,
                                      m.ovf.y_tilde);
  return m;
}

double tau_cr_at(double l, double y) {
  const PlatoonModel m = make_model(l, y);
  return critical_delay(m, equilibrium(m, y));
}

// --- criterion 1 -----------------------------------------------------------
void criterion1() {
  EdcaParams p;
  const double ttr_us = transmission_time(p) * 1e6;
  const double shift_us = static_cast<double>(slot_timing(p).ttr_us);
  const bool ok_value = std::abs(ttr_us - 1420.7) <= 0.5;
  const bool ok_shift = std::abs(ttr_us - shift_us) <= 0.5;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "transmission time %.4f us (target 1420.7 +- 0.5), fit shift "
                "%.0f us",
                ttr_us, shift_us);
  report(1, ok_value && ok_shift, buf);
}

// --- criterion 2 -----------------------------------------------------------
void criterion2() {
  bool positive = true, increasing = true, envelope = true;
  for (double l : {0.0, 2.0}) {
    double prev = -1;
    for (int y = 2; y <= 10; ++y) {
      const double tc = tau_cr_at(l, y);
      positive = positive && tc > 0;
      envelope = envelope && tc <= 0.11;
      if (prev >= 0 && tc <= prev) increasing = false;
      prev = tc;
    }
  }
  const double movm5 = tau_cr_at(0.0, 5.0);
  const double fvd5 = tau_cr_at(2.0, 5.0);
  const bool anchored = std::abs(movm5 - 0.0895) / 0.0895 < 0.05 &&
                        std::abs(fvd5 - 0.0744) / 0.0744 < 0.05;
  char buf[240];
  std::snprintf(buf, sizeof buf,
                "critical delay curve: positive=%d strictly_increasing=%d "
                "envelope<=0.11s=%d anchor(y*=5: %.4f movm / %.4f fvd)=%d",
                positive, increasing, envelope, movm5, fvd5, anchored);
  report(2, positive && increasing && envelope && anchored, buf);
}

// --- criterion 3 -----------------------------------------------------------
double bisect_boundary(double l, double y) {
  const PlatoonModel base = make_model(l, y);
  const Equilibrium eq = equilibrium(base, y);
  const double tc = critical_delay(base, eq);
  auto classify = [&](double tau) {
    PlatoonModel m = base;
    m.tau = tau;
    const double horizon = std::max(20.0 / eq.d_tilde, 40.0 * tau);
    const DdeTrajectory t =
        simulate_dde(m, y, 0.1, horizon, tau / 20.0, DdeMode::Linearized);
    return oscillation_detector(t, 0.1);
  };
  double lo = 0.2 * tc, hi = 2.0 * tc;
  // expand if needed so the bracket straddles the observed boundary
  for (int i = 0; i < 8 && classify(lo) != TrajectoryClass::NonOscillatory;
       ++i)
    lo *= 0.5;
  for (int i = 0; i < 8 && classify(hi) == TrajectoryClass::NonOscillatory;
       ++i)
    hi *= 1.5;
  for (int i = 0; i < 30; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (classify(mid) == TrajectoryClass::NonOscillatory)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

void criterion3() {
  bool ok = true;
  std::string detail;
  for (double l : {0.0, 2.0}) {
    for (double y : {3.0, 5.0, 8.0}) {
      const double tc = tau_cr_at(l, y);
      const double tb = bisect_boundary(l, y);
      const double rel = std::abs(tb - tc) / tc;
      char buf[96];
      std::snprintf(buf, sizeof buf, " [l=%.0f y*=%.0f: closed %.4f vs dde %.4f (%.0f%%)]",
                    l, y, tc, tb, 100 * rel);
      detail += buf;
      if (rel > 0.05) ok = false;
    }
  }
  report(3, ok, "dde bisection vs closed form" + detail);
}

// --- criterion 4 -----------------------------------------------------------
void criterion4() {
  EdcaParams p;
  std::mt19937_64 rng(424242);
  std::uniform_real_distribution<double> u(0.0, 0.95);
  bool ok = true;
  double worst = 0;
  for (int trial = 0; trial < 20; ++trial) {
    FixedPointSolution s;
    s.pb0 = u(rng);
    s.pb1 = u(rng);
    s.omega0 = u(rng);
    for (int ac = 0; ac < 2; ++ac) {
      const DelayDistribution d = delay_pgf(s, p, ac);
      const DelayMoments m =
          access_delay_moments(p, ac, ac == 0 ? s.pb0 : s.pb1, s.omega0);
      const double em = std::abs(d.mean_us() - m.mean_us) / m.mean_us;
      const double ev =
          std::abs(d.variance_us2() - m.variance_us2) / m.variance_us2;
      worst = std::max({worst, em, ev});
      if (em > 1e-9 || ev > 1e-9) ok = false;
    }
  }
  char buf[120];
  std::snprintf(buf, sizeof buf,
                "moment identities on 20 random sets, worst rel err %.2e",
                worst);
  report(4, ok, buf);
}

// --- criterion 5 -----------------------------------------------------------
void criterion5() {
  EdcaParams p;
  GapModelParams gap;
  RateModel rm;  // linear, k = 500
  bool ok = true;
  std::string detail;
  for (double y : {3.0, 5.0, 10.0}) {
    const double P = gap_probability(y, 25.0, gap);
    const double lam0 = lambda0(P, rm);
    const int ncs = contender_count(y, p.cs_range);
    const FixedPointSolution fp = solve_fixed_point(lam0, 10.0, ncs, p);

    SimConfig sc;
    sc.n_vehicles = ncs;
    sc.headway = y;
    sc.lambda0 = lam0;
    sc.lambda1 = 10.0;
    sc.duration_s = 1e6 * p.slot;  // one million slots
    sc.warmup_s = 0.1 * sc.duration_s;
    sc.seed = 12345;
    sc.edca = p;
    std::vector<double> pooled[2];
    for (int rep = 0; rep < 8; ++rep) {
      SimConfig rc = sc;
      rc.seed = sc.seed + rep;
      const SimStats st = run_simulation(rc);
      for (int ac = 0; ac < 2; ++ac)
        pooled[ac].insert(pooled[ac].end(), st.ac[ac].access_us.begin(),
                          st.ac[ac].access_us.end());
    }
    for (int ac = 0; ac < 2; ++ac) {
      const DelayMoments m = access_delay_moments(
          p, ac, ac == 0 ? fp.pb0 : fp.pb1, fp.omega0);
      double s = 0;
      for (double v : pooled[ac]) s += v;
      const double mean = pooled[ac].empty() ? 0 : s / pooled[ac].size();
      double q = 0;
      for (double v : pooled[ac]) q += (v - mean) * (v - mean);
      const double sd =
          pooled[ac].size() > 1 ? std::sqrt(q / (pooled[ac].size() - 1)) : 0;
      const double asd = std::sqrt(m.variance_us2);
      const double em = std::abs(mean - m.mean_us) / m.mean_us;
      const double es = std::abs(sd - asd) / asd;
      char buf[128];
      std::snprintf(buf, sizeof buf,
                    " [y*=%.0f ac%d mean %.0f/%.0f us (%.1f%%) std %.0f/%.0f "
                    "(%.1f%%)]",
                    y, ac, mean, m.mean_us, 100 * em, sd, asd, 100 * es);
      detail += buf;
      if (em > 0.10 || es > 0.10) ok = false;
    }
  }
  report(5, ok, "analytic vs simulated delay (10%)" + detail);
}

// --- criteria 6 + 7 share the sweep ----------------------------------------
void criteria678() {
  ScenarioConfig cfg = *validate_config("").config;  // defaults: grid 2..10
  const ScenarioResult r = run_pipeline_in_memory(cfg);

  // criterion 6
  bool prio = true, mono_mean = true, mono_rel = true;
  std::string rel_detail;
  for (RateKind kind : cfg.rate_models) {
    double prev_mean[2] = {1e300, 1e300};
    double prev_rel_fvd[2] = {-1, -1}, prev_rel_movm[2] = {-1, -1};
    for (const auto& c : r.cells) {
      if (c.rate != kind) continue;
      if (!(c.moments[0].mean_us < c.moments[1].mean_us)) prio = false;
      for (int ac = 0; ac < 2; ++ac) {
        if (c.moments[ac].mean_us > prev_mean[ac] + 1e-9) mono_mean = false;
        prev_mean[ac] = c.moments[ac].mean_us;
        if (c.reliability_fvd[ac] + 1e-12 < prev_rel_fvd[ac]) {
          mono_rel = false;
          char buf[96];
          std::snprintf(buf, sizeof buf, " [fvd %s ac%d drops at y*=%.0f]",
                        to_string(kind), ac, c.headway);
          if (rel_detail.size() < 300) rel_detail += buf;
        }
        if (c.reliability_movm[ac] + 1e-12 < prev_rel_movm[ac]) {
          mono_rel = false;
          char buf[96];
          std::snprintf(buf, sizeof buf, " [movm %s ac%d drops at y*=%.0f]",
                        to_string(kind), ac, c.headway);
          if (rel_detail.size() < 300) rel_detail += buf;
        }
        prev_rel_fvd[ac] = c.reliability_fvd[ac];
        prev_rel_movm[ac] = c.reliability_movm[ac];
      }
    }
  }
  char buf6[96];
  std::snprintf(buf6, sizeof buf6,
                "priority ac0<ac1=%d, means non-increasing=%d, reliability "
                "non-decreasing=%d",
                prio, mono_mean, mono_rel);
  report(6, prio && mono_mean && mono_rel, buf6 + rel_detail);

  // criterion 7 (diagnostic)
  const double paper0[] = {0.2918, 0.4224, 0.674};
  const double paper1[] = {0.1024, 0.1351, 0.2109};
  const double ys[] = {3.0, 5.0, 10.0};
  bool fits_ok = true;
  std::string d7;
  for (int i = 0; i < 3; ++i) {
    for (const auto& c : r.cells) {
      if (c.rate != RateKind::Linear || std::abs(c.headway - ys[i]) > 1e-9)
        continue;
      const double e0 = std::abs(c.fit[0].rate_per_ms - paper0[i]) / paper0[i];
      const double e1 = std::abs(c.fit[1].rate_per_ms - paper1[i]) / paper1[i];
      char buf[128];
      std::snprintf(buf, sizeof buf,
                    " [y*=%.0f rate0 %.3f vs %.3f (%.0f%%) rate1 %.4f vs "
                    "%.4f (%.0f%%)]",
                    ys[i], c.fit[0].rate_per_ms, paper0[i], 100 * e0,
                    c.fit[1].rate_per_ms, paper1[i], 100 * e1);
      d7 += buf;
      if (e0 > 0.25 || e1 > 0.25) fits_ok = false;
    }
  }
  // Table 5 linear regression coefficients
  std::vector<double> hw, r0, r1;
  for (const auto& c : r.cells)
    if (c.rate == RateKind::Linear) {
      hw.push_back(c.headway);
      r0.push_back(c.fit[0].rate_per_ms);
      r1.push_back(c.fit[1].rate_per_ms);
    }
  const LinearFit f0 = headway_rate_regression(hw, r0);
  const LinearFit f1 = headway_rate_regression(hw, r1);
  const bool reg_ok =
      std::abs(f0.slope - 0.0566) / 0.0566 <= 0.30 &&
      std::abs(f0.intercept - 0.1277) / 0.1277 <= 0.30 &&
      std::abs(f1.slope - 0.0156) / 0.0156 <= 0.30 &&
      std::abs(f1.intercept - 0.057) / 0.057 <= 0.30;
  char buf7[160];
  std::snprintf(buf7, sizeof buf7,
                " regression ac0 (%.4f, %.4f) vs (0.0566, 0.1277), "
                "ac1 (%.4f, %.4f) vs (0.0156, 0.0570)",
                f0.slope, f0.intercept, f1.slope, f1.intercept);
  report(7, fits_ok && reg_ok, "published coefficients:" + d7 + buf7,
         /*gating=*/false);

  // criterion 8
  const double tc = tau_cr_at(2.0, 5.0);
  const double budget = 0.10 * tc;
  CdfFit paper_fit;
  paper_fit.shift_us = 1421.0;
  paper_fit.rate_per_ms = 0.4224;  // published fit, linear model, y* = 5
  const double rel = reliability_fitted(paper_fit, budget);
  const bool ok8 = std::abs(budget * 1e3 - 7.44) < 0.15 &&
                   std::abs(rel - 0.92) <= 0.05;
  char buf8[128];
  std::snprintf(buf8, sizeof buf8,
                "budget %.3f ms (target ~7.44), reliability %.4f (target "
                "0.92 +- 0.05)",
                budget * 1e3, rel);
  report(8, ok8, buf8);
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criteria678();
  std::printf("%d gating criterion(s) failed\n", failures);
  return failures;
}
