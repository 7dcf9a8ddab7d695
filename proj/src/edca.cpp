#include "platoonmac/edca.hpp"

#include <algorithm>
#include <cmath>

namespace platoonmac {

void EdcaParams::validate() const {
  for (int i = 0; i < 2; ++i) {
    if (cw_min[i] < 0 || cw_max[i] < cw_min[i])
      throw std::invalid_argument("edca.cw_min/cw_max invalid for AC" +
                                  std::to_string(i));
  }
  const int ratio = (cw_max[1] + 1) / (cw_min[1] + 1);
  if ((cw_max[1] + 1) % (cw_min[1] + 1) != 0 || (ratio & (ratio - 1)) != 0)
    throw std::invalid_argument(
        "edca: (cw_max1+1)/(cw_min1+1) must be a power of two");
  if (aifsn[1] <= aifsn[0])
    throw std::invalid_argument("edca: aifsn1 must exceed aifsn0");
  if (retry_limit < 0)
    throw std::invalid_argument("edca.retry_limit must be >= 0");
  if (!(sifs > 0) || !(slot > 0) || !(basic_rate > 0) || !(data_rate > 0) ||
      !(mean_payload_bytes > 0) || !(prop_delay >= 0))
    throw std::invalid_argument("edca: times and rates must be positive");
  // the stage plateau needs retry_limit >= M for the AC1 chain to be
  // well formed
  int m = 0, r = ratio;
  while (r > 1) { r >>= 1; ++m; }
  if (retry_limit < m)
    throw std::invalid_argument("edca.retry_limit must be >= backoff stages");
}

double transmission_time(const EdcaParams& p) {
  return p.phy_header_bits / p.basic_rate +
         (p.mac_header_bits + 8.0 * p.mean_payload_bytes) / p.data_rate +
         p.prop_delay;
}

int backoff_stages(const EdcaParams& p) {
  const int num = p.cw_max[1] + 1, den = p.cw_min[1] + 1;
  if (num % den != 0)
    throw std::invalid_argument("CW ratio is not integral");
  int ratio = num / den;
  if ((ratio & (ratio - 1)) != 0)
    throw std::invalid_argument("CW ratio is not a power of two");
  int m = 0;
  while (ratio > 1) { ratio >>= 1; ++m; }
  return m;
}

int cw_at_stage(const EdcaParams& p, int stage) {
  const int m = backoff_stages(p);
  const int w0 = p.cw_min[1] + 1;
  return (1 << std::min(stage, m)) * w0;  // window size W_{1,j}
}

double aifs(const EdcaParams& p, int ac) {
  return p.sifs + p.aifsn[ac] * p.slot;
}

int aifs_slot_penalty(const EdcaParams& p, int ac) {
  return ac == 0 ? 0 : p.aifsn[1] - p.aifsn[0];
}

SlotTiming slot_timing(const EdcaParams& p) {
  SlotTiming t;
  t.slot_us = std::llround(p.slot * 1e6);
  t.ttr_us = std::llround(transmission_time(p) * 1e6);
  t.aifs_us[0] = std::llround(aifs(p, 0) * 1e6);
  t.aifs_us[1] = std::llround(aifs(p, 1) * 1e6);
  return t;
}

int contender_count(double y_star, double cs_range, int platoon_cap) {
  if (!(y_star > 0)) throw std::invalid_argument("y_star must be > 0");
  int n = static_cast<int>(std::floor(2.0 * cs_range / y_star)) + 1;
  if (platoon_cap > 0) n = std::min(n, platoon_cap);
  return n;
}

std::array<double, 2> arrival_probabilities(double lambda0, double lambda1,
                                            double slot) {
  if (lambda1 * slot > 1.0)
    throw std::invalid_argument("lambda1 * slot exceeds 1: p_a1 not a probability");
  return {1.0 - std::exp(-lambda0 * slot), lambda1 * slot};
}

double blocking_probability(double omega_other, double tau_total, int n_cs,
                            int a_i) {
  const double pk = std::exp(-tau_total * (n_cs - 1));
  return 1.0 - std::pow(pk * (1.0 - omega_other), a_i + 1);
}

double poisson_busy_series(double tau_total, int n_cs, int terms) {
  // sum_k (1 - tau)^k (N-1)^k e^{-(N-1)} / k!
  const double n1 = n_cs - 1;
  double term = std::exp(-n1);
  double sum = term;
  for (int k = 1; k < terms; ++k) {
    term *= (1.0 - tau_total) * n1 / k;
    sum += term;
  }
  return sum;
}

namespace {

// mean and second moment of the per-decrement cost H_i on the us grid
struct H {
  double m1, m2;
};

H h_moments(const SlotTiming& t, int ac, double pb) {
  const double t1 = static_cast<double>(t.slot_us);
  const double t2 = static_cast<double>(t.ttr_us + t.aifs_us[ac]);
  return {(1.0 - pb) * t1 + pb * t2, (1.0 - pb) * t1 * t1 + pb * t2 * t2};
}

// mean/variance of sum of K iid H with K uniform on {0..W-1}
void uniform_backoff_moments(const H& h, int w, double& mean, double& var) {
  const double ek = (w - 1) / 2.0;
  double ek2 = 0;
  for (int k = 0; k < w; ++k) ek2 += static_cast<double>(k) * k;
  ek2 /= w;
  const double vh = h.m2 - h.m1 * h.m1;
  mean = ek * h.m1;
  var = ek * vh + (ek2 - ek * ek) * h.m1 * h.m1;
}

}  // namespace

DelayMoments access_delay_moments(const EdcaParams& p, int ac, double pb,
                                  double pv1) {
  const SlotTiming t = slot_timing(p);
  const double ttr = static_cast<double>(t.ttr_us);
  DelayMoments out;
  if (ac == 0) {
    const H h = h_moments(t, 0, pb);
    double m, v;
    uniform_backoff_moments(h, p.cw_min[0] + 1, m, v);
    out.mean_us = ttr + m;
    out.variance_us2 = v;
    return out;
  }
  // AC1: mixture over the retry count n of (TR + sum_{j<=n} B_{1,j}),
  // plus the dropped branch (no TR) after L+1 virtual collisions
  const H h = h_moments(t, 1, pb);
  const int L = p.retry_limit;
  double cum_mean = 0, cum_var = 0;
  double mix_m1 = 0, mix_m2 = 0;
  for (int n = 0; n <= L; ++n) {
    double m, v;
    uniform_backoff_moments(h, cw_at_stage(p, n), m, v);
    cum_mean += m;
    cum_var += v;
    const double prob = (1.0 - pv1) * std::pow(pv1, n);
    const double mean_n = ttr + cum_mean;
    mix_m1 += prob * mean_n;
    mix_m2 += prob * (cum_var + mean_n * mean_n);
  }
  const double pdrop = std::pow(pv1, L + 1);
  mix_m1 += pdrop * cum_mean;
  mix_m2 += pdrop * (cum_var + cum_mean * cum_mean);
  out.mean_us = mix_m1;
  out.variance_us2 = mix_m2 - mix_m1 * mix_m1;
  return out;
}

std::array<double, 2> omega_closed_forms(double pb0, double pb1, double pa0,
                                         double pa1, double rho0, double rho1,
                                         double pv1, const EdcaParams& p) {
  if (pb0 >= 1.0 || pb1 >= 1.0)
    throw DegenerateRegimeError("blocking probability reached 1 (pb0=" +
                                std::to_string(pb0) + ", pb1=" +
                                std::to_string(pb1) + ")");
  if (pa0 <= 0.0 || pa1 <= 0.0)
    throw DegenerateRegimeError("arrival probability vanished (pa0=" +
                                std::to_string(pa0) + ", pa1=" +
                                std::to_string(pa1) + ")");
  const int w00 = p.cw_min[0] + 1;
  const double omega0 =
      1.0 / (1.0 + (w00 - 1) / (2.0 * (1.0 - pb0)) + (1.0 - rho0) / pa0);

  const int m = backoff_stages(p);
  const int L = p.retry_limit;
  const int w10 = p.cw_min[1] + 1;
  const double pv = pv1;
  const double g =
      pv < 1.0 ? (1.0 - std::pow(pv, L + 1)) / (1.0 - pv) : L + 1.0;
  double term_a;
  if (std::abs(2.0 * pv - 1.0) < 1e-12) {
    term_a = w10 * 2.0 * pv * m;  // limit of (1 - (2p)^M)/(1 - 2p)
  } else {
    term_a = w10 * 2.0 * pv * (1.0 - std::pow(2.0 * pv, m)) / (1.0 - 2.0 * pv);
  }
  const double term_b =
      pv < 1.0 ? pv * (1.0 - std::pow(pv, m)) / (1.0 - pv) : m;
  const double term_c =
      pv < 1.0 ? ((1 << m) * w10 - 1.0) * (1.0 - std::pow(pv, L - m)) *
                     std::pow(pv, m + 1) / (1.0 - pv)
               : 0.0;
  const double bracket = g + (w10 - 1) / (2.0 * (1.0 - pb1)) +
                         (term_a - term_b + term_c) / (2.0 * (1.0 - pb1)) +
                         (1.0 - rho1) / pa1;
  return {omega0, g / bracket};
}

FixedPointSolution solve_fixed_point(double lambda0, double lambda1, int n_cs,
                                     const EdcaParams& p, double damping,
                                     double tol, int max_iterations) {
  p.validate();
  if (n_cs < 1) throw std::invalid_argument("n_cs must be >= 1");
  const auto pa = arrival_probabilities(lambda0, lambda1, p.slot);

  FixedPointSolution s;
  s.n_cs = n_cs;
  s.pa0 = pa[0];
  s.pa1 = pa[1];

  const bool ac0_idle = pa[0] <= 0.0;
  const bool ac1_idle = pa[1] <= 0.0;

  double w0 = ac0_idle ? 0.0 : 0.01;
  double w1 = ac1_idle ? 0.0 : 0.01;
  std::vector<double> residuals;
  residuals.reserve(64);

  for (int it = 1; it <= max_iterations; ++it) {
    const double pv1 = w0;
    const double tau0 = w0;
    const double tau1 = w1 * (1.0 - w0);
    const double tau = tau0 + tau1;
    const double pb0 = blocking_probability(w1, tau, n_cs, 0);
    const double pb1 =
        blocking_probability(w0, tau, n_cs, aifs_slot_penalty(p, 1));
    const DelayMoments d0 = access_delay_moments(p, 0, pb0, pv1);
    const DelayMoments d1 = access_delay_moments(p, 1, pb1, pv1);
    double rho0 = lambda0 * d0.mean_us * 1e-6;
    double rho1 = lambda1 * d1.mean_us * 1e-6;
    s.rho0_clamped = rho0 > 1.0;
    s.rho1_clamped = rho1 > 1.0;
    rho0 = std::min(rho0, 1.0);
    rho1 = std::min(rho1, 1.0);

    double nw0 = 0.0, nw1 = 0.0;
    if (!ac0_idle || !ac1_idle) {
      // degenerate ACs keep omega = 0; solve the other one normally
      const auto w = omega_closed_forms(pb0, pb1,
                                        ac0_idle ? 1.0 : pa[0],
                                        ac1_idle ? 1.0 : pa[1],
                                        rho0, rho1, pv1, p);
      nw0 = ac0_idle ? 0.0 : w[0];
      nw1 = ac1_idle ? 0.0 : w[1];
    }
    const double res = std::max(std::abs(nw0 - w0), std::abs(nw1 - w1));
    residuals.push_back(res);
    w0 = damping * nw0 + (1.0 - damping) * w0;
    w1 = damping * nw1 + (1.0 - damping) * w1;

    s.omega0 = w0;
    s.omega1 = w1;
    s.tau0 = w0;
    s.tau1 = w1 * (1.0 - w0);
    s.tau_total = s.tau0 + s.tau1;
    s.pb0 = pb0;
    s.pb1 = pb1;
    s.rho0 = rho0;
    s.rho1 = rho1;
    s.mean_service_us0 = d0.mean_us;
    s.mean_service_us1 = d1.mean_us;
    s.iterations = it;
    s.residual = res;
    if (res < tol) return s;
  }
  throw FixedPointError("fixed point did not converge after " +
                            std::to_string(max_iterations) +
                            " iterations (last residual " +
                            std::to_string(s.residual) + ")",
                        std::move(residuals));
}

}  // namespace platoonmac
