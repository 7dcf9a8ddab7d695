#include "platoonmac/platoon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace platoonmac {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
}

void OvfParams::validate() const {
  if (!(y_tilde > 0.0)) throw std::invalid_argument("ovf.y_tilde must be > 0");
  if (!(v0 > 0.0)) throw std::invalid_argument("ovf.v0 must be > 0");
  if (y_m < 0.0) throw std::invalid_argument("ovf.y_m must be >= 0");
}

void PlatoonModel::validate() const {
  if (!(a > 0.0)) throw std::invalid_argument("platoon.a must be > 0");
  if (l < 0.0) throw std::invalid_argument("platoon.l must be >= 0");
  if (!(lead_speed > 0.0))
    throw std::invalid_argument("platoon.lead_speed must be > 0");
  if (n_vehicles < 1)
    throw std::invalid_argument("platoon.n_vehicles must be >= 1");
  if (tau < 0.0) throw std::invalid_argument("platoon.tau must be >= 0");
}

double ovf_velocity(double y, const OvfParams& p) {
  return p.v0 *
         (std::tanh((y - p.y_m) / p.y_tilde) + std::tanh(p.y_m / p.y_tilde));
}

double solve_v0_for_equilibrium(double y_star, double lead_speed, double y_m,
                                double y_tilde) {
  if (!(y_star > 0.0))
    throw InvalidEquilibriumError("equilibrium headway must be > 0");
  const double bracket =
      std::tanh((y_star - y_m) / y_tilde) + std::tanh(y_m / y_tilde);
  if (!(bracket > 0.0))
    throw InvalidEquilibriumError(
        "degenerate equilibrium: tanh bracket is non-positive at y* = " +
        std::to_string(y_star));
  return lead_speed / bracket;
}

Equilibrium equilibrium(const PlatoonModel& model, double y_star) {
  const OvfParams& p = model.ovf;
  const double s = 1.0 / std::cosh((y_star - p.y_m) / p.y_tilde);
  Equilibrium eq;
  eq.headway_star = y_star;
  eq.v_prime = p.v0 / p.y_tilde * s * s;
  eq.d_tilde = model.a * eq.v_prime / (model.a + model.l);
  return eq;
}

double critical_delay(const PlatoonModel& model, const Equilibrium& eq) {
  const double c = -2.0 - kSqrt2;
  const double d = eq.d_tilde;
  const double avp = model.a * eq.v_prime;
  const double denom = (d * c) * (d * c);
  const double arg = (-d * (model.a + model.l) * c - avp) / denom;
  if (!(arg > 0.0))
    throw NoRealRootError(
        "no real-root critical delay: log argument = " + std::to_string(arg));
  return std::log(arg) / (d * c);
}

namespace {

using cplx = std::complex<double>;

cplx char_fn(double apl, double avp, double tau, cplx lam) {
  return lam * lam + (apl * lam + avp) * std::exp(-lam * tau);
}

cplx char_fn_deriv(double apl, double avp, double tau, cplx lam) {
  const cplx e = std::exp(-lam * tau);
  return 2.0 * lam + apl * e - tau * (apl * lam + avp) * e;
}

// Newton refinement; returns true on convergence.
bool newton_refine(double apl, double avp, double tau, cplx& lam) {
  for (int it = 0; it < 100; ++it) {
    const cplx f = char_fn(apl, avp, tau, lam);
    const cplx fp = char_fn_deriv(apl, avp, tau, lam);
    if (std::abs(fp) == 0.0) return false;
    const cplx step = f / fp;
    lam -= step;
    if (std::abs(step) < 1e-13 * std::max(1.0, std::abs(lam))) return true;
  }
  return false;
}

// All real roots found by sign-change bracketing on [lo, 0].
std::vector<double> real_roots(double apl, double avp, double tau, double lo) {
  std::vector<double> roots;
  const int n = 4000;
  auto f = [&](double s) { return char_fn(apl, avp, tau, cplx(s, 0.0)).real(); };
  double prev = f(lo);
  for (int i = 1; i <= n; ++i) {
    const double x = lo + (0.0 - lo) * i / n;
    const double cur = f(x);
    if (prev == 0.0) roots.push_back(lo + (0.0 - lo) * (i - 1) / n);
    if (prev * cur < 0.0) {
      double a = lo + (0.0 - lo) * (i - 1) / n, b = x;
      for (int k = 0; k < 200; ++k) {
        const double m = 0.5 * (a + b);
        if (f(a) * f(m) <= 0.0)
          b = m;
        else
          a = m;
      }
      roots.push_back(0.5 * (a + b));
    }
    prev = cur;
  }
  return roots;
}

}  // namespace

std::complex<double> characteristic_roots(const PlatoonModel& model,
                                          const Equilibrium& eq, double tau) {
  if (tau < 0.0) throw std::invalid_argument("tau must be >= 0");
  const double apl = model.a + model.l;
  const double avp = model.a * eq.v_prime;

  // delay-free quadratic seed
  const double disc = apl * apl - 4.0 * avp;
  cplx lam = disc >= 0.0 ? cplx(0.5 * (-apl + std::sqrt(disc)), 0.0)
                         : cplx(-0.5 * apl, 0.5 * std::sqrt(-disc));
  if (tau == 0.0) return lam;

  // continuation in small tau steps keeps Newton on the quadratic branch
  const int steps = std::max(20, static_cast<int>(tau / 0.002));
  cplx last = lam;
  for (int i = 1; i <= steps; ++i) {
    const double t = tau * i / steps;
    if (!newton_refine(apl, avp, t, lam)) {
      throw std::runtime_error(
          "characteristic root continuation failed at tau = " +
          std::to_string(t) + ", last iterate re = " +
          std::to_string(last.real()) + " im = " + std::to_string(last.imag()));
    }
    last = lam;
  }
  if (lam.imag() < 0.0) lam = std::conj(lam);
  // a root that collapsed onto the real axis is reported as real
  if (std::abs(lam.imag()) < 1e-9 * std::max(1.0, std::abs(lam.real())))
    lam = cplx(lam.real(), 0.0);

  // the real axis can carry delay-induced branches to the right of the
  // tracked pair
  const double lo = -std::max(50.0, 10.0 * apl + 10.0 / tau);
  cplx best = lam;
  for (double r : real_roots(apl, avp, tau, lo)) {
    if (r > best.real()) best = cplx(r, 0.0);
  }
  return best;
}

RealRootPoint real_root_condition_solve(const PlatoonModel& model,
                                        const Equilibrium& eq) {
  const double apl = model.a + model.l;
  const double avp = model.a * eq.v_prime;
  // The second condition 2 sigma^2 e^{2 sigma tau} = apl^2 fixes
  // tau(sigma) = ln(apl^2 / (2 sigma^2)) / (2 sigma); substitute it into
  // g1 = sigma^2 + (apl sigma + avp) e^{-sigma tau} and bisect in sigma.
  auto tau_of = [&](double sigma) {
    return std::log(apl * apl / (2.0 * sigma * sigma)) / (2.0 * sigma);
  };
  auto g1_of = [&](double sigma) {
    return sigma * sigma +
           (apl * sigma + avp) * std::exp(-sigma * tau_of(sigma));
  };
  double lo = -0.5 * eq.d_tilde, hi = -10.0 * eq.d_tilde;
  double flo = g1_of(lo), fhi = g1_of(hi);
  for (int it = 0; it < 60 && flo * fhi > 0.0; ++it) {
    hi *= 1.5;
    fhi = g1_of(hi);
  }
  if (flo * fhi > 0.0)
    throw std::runtime_error(
        "real-root condition: no sign change on the sigma bracket");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = g1_of(mid);
    if (fm == 0.0 || std::abs(hi - lo) < 1e-15 * std::abs(mid)) {
      lo = hi = mid;
      break;
    }
    if (flo * fm <= 0.0) {
      hi = mid;
    } else {
      lo = mid;
      flo = fm;
    }
  }
  const double sigma = 0.5 * (lo + hi);
  return {sigma, tau_of(sigma)};
}

DdeTrajectory simulate_dde(const PlatoonModel& model, double y_star,
                           double perturbation, double horizon, double dt,
                           DdeMode mode) {
  model.validate();
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  if (model.tau > 0.0 && dt > model.tau / 10.0)
    throw std::invalid_argument("dt must be <= tau/10 for delayed simulation");
  const int n_veh = model.n_vehicles;
  const int n_steps = static_cast<int>(std::ceil(horizon / dt));
  const double tau = model.tau;
  const Equilibrium eq = equilibrium(model, y_star);
  const double avp = model.a * eq.v_prime;

  DdeTrajectory out;
  out.times.resize(n_steps + 1);
  out.headway_perturbations.assign(n_veh, std::vector<double>(n_steps + 1));
  out.relative_velocities.assign(n_veh, std::vector<double>(n_steps + 1));

  // state layout: [u_1..u_N, v_1..v_N]
  std::vector<std::vector<double>> hist(
      n_steps + 1, std::vector<double>(2 * n_veh, 0.0));
  for (int i = 0; i < n_veh; ++i) hist[0][i] = perturbation;

  auto delayed = [&](int step, double t_now, std::vector<double>& buf) {
    const double td = t_now - tau;
    if (td <= 0.0) {
      for (int i = 0; i < n_veh; ++i) {
        buf[i] = perturbation;  // constant history
        buf[n_veh + i] = 0.0;
      }
      return;
    }
    const double pos = td / dt;
    const int k = std::min(static_cast<int>(pos), step - 1);
    const double w = pos - k;
    for (int j = 0; j < 2 * n_veh; ++j)
      buf[j] = (1.0 - w) * hist[k][j] + w * hist[k + 1][j];
  };

  auto rhs = [&](const std::vector<double>& y, const std::vector<double>& yd,
                 std::vector<double>& dy) {
    for (int i = 0; i < n_veh; ++i) {
      const double ud = yd[i];
      const double vd = yd[n_veh + i];
      const double vd_prev = i == 0 ? 0.0 : yd[n_veh + i - 1];
      double acc;
      if (mode == DdeMode::Linearized) {
        const double ud_prev = i == 0 ? 0.0 : yd[i - 1];
        acc = avp * (ud_prev - ud) - model.a * vd + model.l * (vd_prev - vd);
      } else {
        // nonlinear right-hand side about absolute headways y* + u
        const double y_prev = i == 0 ? y_star : y_star + yd[i - 1];
        const double y_own = y_star + ud;
        const double v_prev_term =
            i == 0 ? ovf_velocity(y_star, model.ovf)  // leader: V(y*) = lead
                   : ovf_velocity(y_prev, model.ovf);
        acc = model.a * (v_prev_term - ovf_velocity(y_own, model.ovf) - vd) +
              model.l * (vd_prev - vd);
      }
      dy[i] = y[n_veh + i];
      dy[n_veh + i] = acc;
    }
  };

  std::vector<double> yd(2 * n_veh), k1(2 * n_veh), k2(2 * n_veh),
      k3(2 * n_veh), k4(2 * n_veh), tmp(2 * n_veh);
  for (int s = 0; s < n_steps; ++s) {
    const double t = s * dt;
    const std::vector<double>& y = hist[s];
    // delay terms interpolated once per stage time; with dt << tau the
    // delayed argument is effectively constant over the step
    delayed(s, t, yd);
    rhs(y, yd, k1);
    delayed(s, t + 0.5 * dt, yd);
    for (int j = 0; j < 2 * n_veh; ++j) tmp[j] = y[j] + 0.5 * dt * k1[j];
    rhs(tmp, yd, k2);
    for (int j = 0; j < 2 * n_veh; ++j) tmp[j] = y[j] + 0.5 * dt * k2[j];
    rhs(tmp, yd, k3);
    delayed(s, t + dt, yd);
    for (int j = 0; j < 2 * n_veh; ++j) tmp[j] = y[j] + dt * k3[j];
    rhs(tmp, yd, k4);
    for (int j = 0; j < 2 * n_veh; ++j)
      hist[s + 1][j] =
          y[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
  }

  for (int s = 0; s <= n_steps; ++s) {
    out.times[s] = s * dt;
    for (int i = 0; i < n_veh; ++i) {
      out.headway_perturbations[i][s] = hist[s][i];
      out.relative_velocities[i][s] = hist[s][n_veh + i];
    }
  }
  return out;
}

TrajectoryClass oscillation_detector(const DdeTrajectory& traj,
                                     double settle_fraction) {
  if (traj.times.empty() || traj.headway_perturbations.empty())
    throw std::invalid_argument("empty trajectory");
  const std::vector<double>& u = traj.headway_perturbations.front();
  const size_t n = u.size();

  double max_all = 0.0;
  for (double x : u) max_all = std::max(max_all, std::abs(x));
  const size_t tenth = std::max<size_t>(1, n / 10);
  double max_head = 0.0, max_tail = 0.0;
  for (size_t k = 0; k < tenth; ++k) max_head = std::max(max_head, std::abs(u[k]));
  for (size_t k = n - tenth; k < n; ++k)
    max_tail = std::max(max_tail, std::abs(u[k]));
  if (max_tail > max_head) return TrajectoryClass::Diverging;

  const size_t start = static_cast<size_t>(settle_fraction * n);
  const double eps = 1e-12 * std::max(1.0, max_all);
  int crossings = 0;
  int prev_sign = 0;
  for (size_t k = start; k < n; ++k) {
    if (std::abs(u[k]) <= eps) continue;
    const int s = u[k] > 0.0 ? 1 : -1;
    if (prev_sign != 0 && s != prev_sign) ++crossings;
    prev_sign = s;
  }
  return crossings > 0 ? TrajectoryClass::Oscillatory
                       : TrajectoryClass::NonOscillatory;
}

const char* to_string(TrajectoryClass c) {
  switch (c) {
    case TrajectoryClass::NonOscillatory: return "non_oscillatory";
    case TrajectoryClass::Oscillatory: return "oscillatory";
    case TrajectoryClass::Diverging: return "diverging";
  }
  return "?";
}

}  // namespace platoonmac
