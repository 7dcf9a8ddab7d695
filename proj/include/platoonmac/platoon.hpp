#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace platoonmac {

/// Bando optimal-velocity-function parameters.
struct OvfParams {
  double v0 = 0.0;       ///< speed scale V0 (m/s)
  double y_m = 5.0;      ///< offset headway (m)
  double y_tilde = 10.0; ///< transition width (m)

  void validate() const;
};

/// Car-following model of the platoon. l = 0 selects MOVM, l > 0 FVD.
struct PlatoonModel {
  double a = 5.0;           ///< headway sensitivity (1/s)
  double l = 0.0;           ///< velocity-difference sensitivity (1/s)
  OvfParams ovf;
  double lead_speed = 25.0; ///< leader speed (m/s), constant
  int n_vehicles = 1;
  double tau = 0.0;         ///< feedback delay (s)

  void validate() const;
};

struct Equilibrium {
  double headway_star = 0.0; ///< y* (m)
  double v_prime = 0.0;      ///< V'(y*) (1/s)
  double d_tilde = 0.0;      ///< a V'(y*) / (a + l) (1/s)
};

struct DdeTrajectory {
  std::vector<double> times;
  // state[i][k]: vehicle i, sample k
  std::vector<std::vector<double>> headway_perturbations;
  std::vector<std::vector<double>> relative_velocities;
};

enum class DdeMode { Linearized, Nonlinear };

enum class TrajectoryClass { NonOscillatory, Oscillatory, Diverging };

class InvalidEquilibriumError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class NoRealRootError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Bando OVF: V(y) = V0 (tanh((y - y_m)/y_tilde) + tanh(y_m/y_tilde)).
double ovf_velocity(double y, const OvfParams& p);

/// Inverts the equilibrium condition V(y*) = lead_speed for V0.
/// Throws InvalidEquilibriumError when the tanh bracket is non-positive.
double solve_v0_for_equilibrium(double y_star, double lead_speed, double y_m,
                                double y_tilde);

/// Equilibrium quantities at headway y_star. Requires model.ovf.v0 already
/// solved so that V(y_star) = lead_speed.
Equilibrium equilibrium(const PlatoonModel& model, double y_star);

/// Critical feedback delay for the non-oscillatory real-root condition.
/// Throws NoRealRootError when the logarithm argument is non-positive.
double critical_delay(const PlatoonModel& model, const Equilibrium& eq);

/// Rightmost characteristic root of
///   lambda^2 + (a + l) lambda e^{-lambda tau} + a V'(y*) e^{-lambda tau} = 0
/// found by Newton continuation from the delay-free quadratic plus a scan of
/// the real axis. Throws std::runtime_error on non-convergence.
std::complex<double> characteristic_roots(const PlatoonModel& model,
                                          const Equilibrium& eq, double tau);

/// Solves the two simultaneous real-root conditions
///   f(sigma, tau) = 0  and  2 sigma^2 e^{2 sigma tau} = (a + l)^2
/// by damped 2-D Newton, independent of the closed form in critical_delay().
/// Returns the (sigma, tau) pair. Test/validation oracle.
struct RealRootPoint {
  double sigma;
  double tau;
};
RealRootPoint real_root_condition_solve(const PlatoonModel& model,
                                        const Equilibrium& eq);

/// Integrates the delayed car-following system with constant history equal to
/// the initial perturbation (u = perturbation, v = 0). Fixed-step RK4 with
/// linear interpolation into the delay buffer.
DdeTrajectory simulate_dde(const PlatoonModel& model, double y_star,
                           double perturbation, double horizon, double dt,
                           DdeMode mode = DdeMode::Linearized);

/// Classifies a trajectory by zero crossings of u_1(t) after discarding the
/// first settle_fraction of the horizon. Diverging iff max|u| over the last
/// 10% exceeds max|u| over the first 10%.
TrajectoryClass oscillation_detector(const DdeTrajectory& traj,
                                     double settle_fraction);

const char* to_string(TrajectoryClass c);

}  // namespace platoonmac
