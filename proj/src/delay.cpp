#include "platoonmac/delay.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace platoonmac {

double DelayDistribution::mean_us() const {
  double m = 0;
  for (const auto& [x, p] : atoms) m += p * static_cast<double>(x);
  return m;
}

double DelayDistribution::variance_us2() const {
  const double m = mean_us();
  double m2 = 0;
  for (const auto& [x, p] : atoms)
    m2 += p * static_cast<double>(x) * static_cast<double>(x);
  return m2 - m * m;
}

double DelayDistribution::cdf(double x_us) const {
  double c = 0;
  for (const auto& [x, p] : atoms) {
    if (static_cast<double>(x) > x_us) break;
    c += p;
  }
  return c;
}

namespace {

using Pmf = std::map<std::int64_t, double>;

Pmf convolve(const Pmf& a, const Pmf& b) {
  Pmf out;
  for (const auto& [xa, pa] : a)
    for (const auto& [xb, pb] : b) out[xa + xb] += pa * pb;
  return out;
}

void add_scaled(Pmf& acc, const Pmf& d, double w) {
  for (const auto& [x, p] : d) acc[x] += w * p;
}

// distribution of sum of K iid H, K uniform on {0..w-1}
Pmf uniform_backoff_pmf(const Pmf& h, int w) {
  Pmf acc{{0, 1.0 / w}};  // K = 0 term
  Pmf power{{0, 1.0}};
  for (int k = 1; k < w; ++k) {
    power = convolve(power, h);
    for (const auto& [x, p] : power) acc[x] += p / w;
  }
  return acc;
}

}  // namespace

DelayDistribution delay_pgf(const FixedPointSolution& sol, const EdcaParams& p,
                            int ac) {
  p.validate();
  if (ac != 0 && ac != 1) throw std::invalid_argument("ac must be 0 or 1");
  const SlotTiming t = slot_timing(p);
  const double pb = ac == 0 ? sol.pb0 : sol.pb1;
  const Pmf h{{t.slot_us, 1.0 - pb}, {t.ttr_us + t.aifs_us[ac], pb}};

  Pmf total;
  if (ac == 0) {
    const Pmf b = uniform_backoff_pmf(h, p.cw_min[0] + 1);
    for (const auto& [x, pr] : b) total[x + t.ttr_us] += pr;
  } else {
    const double pv = sol.omega0;  // virtual-collision probability
    const int L = p.retry_limit;
    Pmf cum{{0, 1.0}};  // sum of B_{1,0..n}
    for (int n = 0; n <= L; ++n) {
      cum = convolve(cum, uniform_backoff_pmf(h, cw_at_stage(p, n)));
      const double prob = (1.0 - pv) * std::pow(pv, n);
      for (const auto& [x, pr] : cum) total[x + t.ttr_us] += prob * pr;
    }
    // dropped after L+1 virtual collisions: backoff cost only, no TR
    const double pdrop = std::pow(pv, L + 1);
    add_scaled(total, cum, pdrop);
  }

  DelayDistribution d;
  d.atoms.reserve(total.size());
  for (const auto& [x, pr] : total) {
    if (pr <= 0.0) continue;  // zero-mass keys from degenerate H branches
    d.atoms.emplace_back(x, pr);
    d.total_mass += pr;
  }
  return d;
}

CdfFit cdf_fit(const DelayDistribution& dist, std::int64_t ttr_us) {
  if (dist.atoms.size() < 2)
    throw DegenerateFitError("cdf fit needs at least two support points");
  // empirical CDF sampled at the atom support
  std::vector<double> xs, fs;
  xs.reserve(dist.atoms.size());
  fs.reserve(dist.atoms.size());
  double c = 0;
  for (const auto& [x, p] : dist.atoms) {
    c += p;
    xs.push_back(static_cast<double>(x));
    fs.push_back(c);
  }
  const double shift = static_cast<double>(ttr_us);

  auto sse = [&](double rate_per_ms) {
    double s = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double dx = xs[i] - shift;
      const double model = dx <= 0 ? 0.0 : 1.0 - std::exp(-rate_per_ms * dx / 1000.0);
      const double e = model - fs[i];
      s += e * e;
    }
    return s;
  };

  // the objective can have several local minima (coarse atom supports make
  // the empirical CDF step sharply); scan a log grid first, then refine
  // around the best cell by golden section
  const int kGrid = 600;
  const double rate_lo = 1e-4, rate_hi = 50.0;
  int best = 0;
  double best_val = sse(rate_lo);
  for (int i = 1; i < kGrid; ++i) {
    const double r = rate_lo * std::pow(rate_hi / rate_lo,
                                        static_cast<double>(i) / (kGrid - 1));
    const double v = sse(r);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  auto grid_at = [&](int i) {
    return rate_lo * std::pow(rate_hi / rate_lo,
                              static_cast<double>(i) / (kGrid - 1));
  };
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = grid_at(std::max(0, best - 1));
  double hi = grid_at(std::min(kGrid - 1, best + 1));
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = sse(x1), f2 = sse(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
    if (f1 < f2) {
      hi = x2; x2 = x1; f2 = f1;
      x1 = hi - gr * (hi - lo); f1 = sse(x1);
    } else {
      lo = x1; x1 = x2; f1 = f2;
      x2 = lo + gr * (hi - lo); f2 = sse(x2);
    }
  }
  CdfFit fit;
  fit.shift_us = shift;
  fit.rate_per_ms = 0.5 * (lo + hi);
  fit.rms_error = std::sqrt(sse(fit.rate_per_ms) / xs.size());
  return fit;
}

double reliability_exact(const DelayDistribution& dist, double budget_s) {
  return dist.cdf(budget_s * 1e6);
}

double reliability_fitted(const CdfFit& fit, double budget_s) {
  const double dx = budget_s * 1e6 - fit.shift_us;
  return dx <= 0 ? 0.0 : 1.0 - std::exp(-fit.rate_per_ms * dx / 1000.0);
}

LinearFit headway_rate_regression(const std::vector<double>& headways,
                                  const std::vector<double>& rates) {
  const std::size_t n = headways.size();
  if (n != rates.size())
    throw std::invalid_argument("headway/rate length mismatch");
  if (n < 3) throw std::invalid_argument("regression needs >= 3 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += headways[i];
    sy += rates[i];
    sxx += headways[i] * headways[i];
    sxy += headways[i] * rates[i];
  }
  const double det = n * sxx - sx * sx;
  if (std::abs(det) < 1e-12 * (n * sxx + sx * sx + 1.0))
    throw std::invalid_argument("regression design is rank deficient");
  LinearFit f;
  f.slope = (n * sxy - sx * sy) / det;
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

}  // namespace platoonmac
