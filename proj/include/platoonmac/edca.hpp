#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace platoonmac {

/// EDCA channel access, PHY and traffic constants. AC0 carries event-driven
/// safety-critical packets, AC1 periodic beacons. Index 0/1 = AC0/AC1.
struct EdcaParams {
  std::array<int, 2> cw_min = {3, 15};
  std::array<int, 2> cw_max = {3, 31};
  std::array<int, 2> aifsn = {2, 3};
  int retry_limit = 2;          ///< L, AC1 virtual-collision retries
  double sifs = 32e-6;          ///< s
  double slot = 13e-6;          ///< sigma (s)
  double phy_header_bits = 48;
  double mac_header_bits = 112;
  double basic_rate = 1e6;      ///< bit/s
  double data_rate = 3e6;       ///< bit/s
  double mean_payload_bytes = 500;
  double prop_delay = 2e-6;     ///< s
  double tx_range = 500.0;      ///< m
  double cs_range = 700.0;      ///< m

  void validate() const;
};

/// Integer-microsecond time grid derived from EdcaParams. All distribution
/// atoms and closed-form moments live on this grid so the two routes agree
/// exactly.
struct SlotTiming {
  std::int64_t slot_us = 13;
  std::int64_t ttr_us = 1421;              ///< round(T_tr)
  std::array<std::int64_t, 2> aifs_us = {58, 71};
};

struct FixedPointSolution {
  double omega0 = 0, omega1 = 0;          ///< internal transmission prob.
  double tau0 = 0, tau1 = 0, tau_total = 0;
  double pb0 = 0, pb1 = 0;                ///< backoff blocking prob.
  double pa0 = 0, pa1 = 0;                ///< arrival prob.
  double rho0 = 0, rho1 = 0;              ///< utilizations (clamped)
  bool rho0_clamped = false, rho1_clamped = false;
  double mean_service_us0 = 0, mean_service_us1 = 0;
  int n_cs = 0;
  int iterations = 0;
  double residual = 0;
};

class DegenerateRegimeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class FixedPointError : public std::runtime_error {
 public:
  FixedPointError(const std::string& what, std::vector<double> residuals)
      : std::runtime_error(what), residual_history(std::move(residuals)) {}
  std::vector<double> residual_history;
};

/// Average broadcast transmission time (s):
/// PHY_H / R_b + (MAC_H + 8 E[P]) / R_d + delta.
double transmission_time(const EdcaParams& p);

/// Number of CW doublings for AC1: log2((CWmax1+1)/(CWmin1+1)).
/// Throws std::invalid_argument when the ratio is not a power of two.
int backoff_stages(const EdcaParams& p);

/// AC1 contention window at backoff stage j (plateau at 2^M CWmin+1).
int cw_at_stage(const EdcaParams& p, int stage);

/// AIFS[i] = SIFS + AIFSN[i] * slot (s).
double aifs(const EdcaParams& p, int ac);

/// AIFSN slot penalty of AC i relative to AC0 (A_0 = 0).
int aifs_slot_penalty(const EdcaParams& p, int ac);

/// Microsecond grid for p (T_tr rounded to nearest microsecond).
SlotTiming slot_timing(const EdcaParams& p);

/// Vehicles inside the carrier sensing range at equilibrium headway y_star:
/// floor(2 cs / y*) + 1, capped at platoon_cap when positive.
int contender_count(double y_star, double cs_range, int platoon_cap = 0);

/// p_a0 = 1 - e^{-lambda0 sigma}, p_a1 = lambda1 sigma.
/// Throws std::invalid_argument when lambda1 * slot > 1.
std::array<double, 2> arrival_probabilities(double lambda0, double lambda1,
                                            double slot);

/// Backoff blocking probability of AC i,
/// p_bi = 1 - [e^{-tau (N_cs - 1)} (1 - omega_other)]^{A_i + 1}.
double blocking_probability(double omega_other, double tau_total, int n_cs,
                            int a_i);

/// Poisson partial-sum evaluation of the contender term, for cross-checking
/// the closed form used in blocking_probability().
double poisson_busy_series(double tau_total, int n_cs, int terms);

/// Closed-form stationary probabilities of the zero-backoff states.
/// Throws DegenerateRegimeError when p_b >= 1 or p_a <= 0.
std::array<double, 2> omega_closed_forms(double pb0, double pb1, double pa0,
                                         double pa1, double rho0, double rho1,
                                         double pv1, const EdcaParams& p);

/// Closed-form mean and variance (microsecond grid) of the AC access delay
/// at given blocking / virtual-collision probabilities. Independent of the
/// atom-list construction in delay.hpp.
struct DelayMoments {
  double mean_us = 0;
  double variance_us2 = 0;
};
DelayMoments access_delay_moments(const EdcaParams& p, int ac, double pb,
                                  double pv1);

/// Damped Picard iteration over (omega0, omega1) through Eqs. coupling
/// arrival, blocking and service-time quantities.
FixedPointSolution solve_fixed_point(double lambda0, double lambda1, int n_cs,
                                     const EdcaParams& p,
                                     double damping = 0.5,
                                     double tol = 1e-10,
                                     int max_iterations = 10000);

}  // namespace platoonmac
