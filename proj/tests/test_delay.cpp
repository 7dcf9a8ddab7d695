#include <doctest.h>

#include <cmath>
#include <random>

#include "platoonmac/delay.hpp"

using namespace platoonmac;

namespace {

FixedPointSolution fake_solution(double pb0, double pb1, double pv) {
  FixedPointSolution s;
  s.pb0 = pb0;
  s.pb1 = pb1;
  s.omega0 = pv;
  return s;
}

}  // namespace

TEST_CASE("AC0 distribution with an idle channel") {
  EdcaParams p;
  const DelayDistribution d = delay_pgf(fake_solution(0, 0, 0), p, 0);
  REQUIRE(d.atoms.size() == 4);
  for (int k = 0; k < 4; ++k) {
    CHECK(d.atoms[k].first == 1421 + 13 * k);
    CHECK(d.atoms[k].second == doctest::Approx(0.25).epsilon(1e-12));
  }
  CHECK(d.total_mass == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.mean_us() == doctest::Approx(1421.0 + 1.5 * 13.0).epsilon(1e-12));
}

TEST_CASE("distribution mass and ordering at a loaded operating point") {
  EdcaParams p;
  const auto sol = fake_solution(0.288203739814, 0.494292724039,
                                 0.00107416038127);
  for (int ac = 0; ac < 2; ++ac) {
    const DelayDistribution d = delay_pgf(sol, p, ac);
    CHECK(std::abs(d.total_mass - 1.0) < 1e-9);
    for (std::size_t i = 1; i < d.atoms.size(); ++i)
      CHECK(d.atoms[i].first > d.atoms[i - 1].first);
    for (const auto& [x, pr] : d.atoms) CHECK(pr > 0.0);
  }
  // frozen means from the independent moment route
  CHECK(delay_pgf(sol, p, 0).mean_us() ==
        doctest::Approx(2074.26002385).epsilon(1e-9));
  CHECK(delay_pgf(sol, p, 1).mean_us() ==
        doctest::Approx(7013.8435458).epsilon(1e-9));
  CHECK(delay_pgf(sol, p, 1).atoms.size() == 6162);
}

TEST_CASE("moment identities on randomized parameter sets") {
  EdcaParams p;
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 0.95);
  for (int trial = 0; trial < 20; ++trial) {
    const double pb0 = u(rng), pb1 = u(rng), pv = u(rng);
    const auto sol = fake_solution(pb0, pb1, pv);
    for (int ac = 0; ac < 2; ++ac) {
      const DelayDistribution d = delay_pgf(sol, p, ac);
      const DelayMoments m =
          access_delay_moments(p, ac, ac == 0 ? pb0 : pb1, pv);
      CHECK(d.mean_us() == doctest::Approx(m.mean_us).epsilon(1e-9));
      CHECK(d.variance_us2() ==
            doctest::Approx(m.variance_us2).epsilon(1e-9));
      CHECK(std::abs(d.total_mass - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("cdf evaluation") {
  EdcaParams p;
  const DelayDistribution d = delay_pgf(fake_solution(0, 0, 0), p, 0);
  CHECK(d.cdf(0.0) == 0.0);
  CHECK(d.cdf(1420.9) == 0.0);
  CHECK(d.cdf(1421.0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(d.cdf(1e9) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("shifted-exponential fit recovers a discretized exponential") {
  // geometric masses on the slot grid = exact discretization of
  // a shifted exponential with the given rate
  const double rate = 0.3;  // per ms
  const double q = std::exp(-rate * 13.0 / 1000.0);
  DelayDistribution d;
  double mass = 0;
  for (int k = 0; k < 4000; ++k) {
    const double pr = (1.0 - q) * std::pow(q, k);
    d.atoms.emplace_back(1421 + 13 * k, pr);
    mass += pr;
  }
  d.total_mass = mass;
  const CdfFit f = cdf_fit(d, 1421);
  CHECK(f.shift_us == 1421.0);
  CHECK(f.rate_per_ms == doctest::Approx(rate).epsilon(0.01));
  CHECK(f.rms_error < 0.01);
}

TEST_CASE("fit at frozen operating points") {
  EdcaParams p;
  struct Row {
    double pb0, pb1, pv, rate0, rate1;
  };
  const Row rows[] = {
      {0.424615877376, 0.669529514155, 0.00104346890046, 24.1897619881,
       0.1257969467},
      {0.288203739814, 0.494292724039, 0.00107416038127, 31.5894142526,
       0.1719077670},
      {0.170241338223, 0.312957720339, 0.00119540856789, 40.5044432206,
       0.2748912570},
  };
  for (const Row& r : rows) {
    const auto sol = fake_solution(r.pb0, r.pb1, r.pv);
    const CdfFit f0 = cdf_fit(delay_pgf(sol, p, 0), 1421);
    const CdfFit f1 = cdf_fit(delay_pgf(sol, p, 1), 1421);
    CHECK(f0.rate_per_ms == doctest::Approx(r.rate0).epsilon(0.01));
    CHECK(f1.rate_per_ms == doctest::Approx(r.rate1).epsilon(0.01));
  }
}

TEST_CASE("degenerate fit input") {
  DelayDistribution d;
  d.atoms.emplace_back(1421, 1.0);
  d.total_mass = 1.0;
  CHECK_THROWS_AS(cdf_fit(d, 1421), DegenerateFitError);
}

TEST_CASE("reliability") {
  EdcaParams p;
  const DelayDistribution d = delay_pgf(fake_solution(0, 0, 0), p, 0);
  // budget below one transmission time: nothing can finish
  CHECK(reliability_exact(d, 1.0e-3) == 0.0);
  CHECK(reliability_exact(d, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CdfFit f;
  f.shift_us = 1421;
  f.rate_per_ms = 0.4224;
  CHECK(reliability_fitted(f, 1.0e-3) == 0.0);
  CHECK(reliability_fitted(f, 7.44e-3) ==
        doctest::Approx(1.0 - std::exp(-0.4224 * (7.44 - 1.421)))
            .epsilon(1e-12));
  CHECK(reliability_fitted(f, 10.0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("headway rate regression") {
  // exact line
  std::vector<double> ys{2, 3, 5, 8, 10}, rates;
  for (double y : ys) rates.push_back(0.0566 * y + 0.1277);
  const LinearFit f = headway_rate_regression(ys, rates);
  CHECK(f.slope == doctest::Approx(0.0566).epsilon(1e-9));
  CHECK(f.intercept == doctest::Approx(0.1277).epsilon(1e-9));
  // constant input: slope 0
  const LinearFit c =
      headway_rate_regression(ys, std::vector<double>(5, 0.5));
  CHECK(c.slope == doctest::Approx(0.0).epsilon(1e-9));
  CHECK_THROWS_AS(headway_rate_regression({1, 2}, {1, 2}),
                  std::invalid_argument);
  CHECK_THROWS_AS(headway_rate_regression({3, 3, 3}, {1, 2, 3}),
                  std::invalid_argument);
}
