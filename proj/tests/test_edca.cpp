#include <doctest.h>

#include <cmath>

#include "platoonmac/edca.hpp"

using namespace platoonmac;

TEST_CASE("transmission time") {
  EdcaParams p;
  CHECK(transmission_time(p) ==
        doctest::Approx(1.4206667e-3).epsilon(1e-6));
  CHECK(slot_timing(p).ttr_us == 1421);

  EdcaParams bare = p;
  bare.prop_delay = 0;
  bare.mac_header_bits = 0;
  bare.mean_payload_bytes = 1e-300;  // positive, negligible
  CHECK(transmission_time(bare) ==
        doctest::Approx(p.phy_header_bits / p.basic_rate).epsilon(1e-9));

  EdcaParams dbl = p;
  dbl.mean_payload_bytes = 2 * p.mean_payload_bytes;
  CHECK(transmission_time(dbl) - transmission_time(p) ==
        doctest::Approx(8.0 * p.mean_payload_bytes / p.data_rate)
            .epsilon(1e-9));
}

TEST_CASE("backoff stages and CW ladder") {
  EdcaParams p;
  CHECK(backoff_stages(p) == 1);
  CHECK(cw_at_stage(p, 0) == 16);
  CHECK(cw_at_stage(p, 1) == 32);
  CHECK(cw_at_stage(p, 2) == 32);  // plateau past M
  CHECK(cw_at_stage(p, 5) == 32);

  EdcaParams flat = p;
  flat.cw_max[1] = flat.cw_min[1];
  CHECK(backoff_stages(flat) == 0);

  EdcaParams bad = p;
  bad.cw_max[1] = 30;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("aifs values") {
  EdcaParams p;
  CHECK(aifs(p, 0) == doctest::Approx(58e-6).epsilon(1e-12));
  CHECK(aifs(p, 1) == doctest::Approx(71e-6).epsilon(1e-12));
  CHECK(aifs_slot_penalty(p, 0) == 0);
  CHECK(aifs_slot_penalty(p, 1) == 1);
  EdcaParams z = p;
  z.aifsn[0] = 0;
  CHECK(aifs(z, 0) == doctest::Approx(z.sifs).epsilon(1e-12));
  CHECK(slot_timing(p).aifs_us[0] == 58);
  CHECK(slot_timing(p).aifs_us[1] == 71);
}

TEST_CASE("contender count") {
  CHECK(contender_count(10.0, 700.0) == 141);
  CHECK(contender_count(3.0, 700.0) == 467);
  CHECK(contender_count(5.0, 700.0) == 281);
  CHECK(contender_count(1500.0, 700.0) == 1);  // self only
  CHECK(contender_count(10.0, 700.0, 50) == 50);
  int prev = contender_count(2.0, 700.0);
  for (double y = 2.5; y <= 20.0; y += 0.5) {
    const int n = contender_count(y, 700.0);
    CHECK(n <= prev);
    prev = n;
  }
  CHECK_THROWS_AS(contender_count(0.0, 700.0), std::invalid_argument);
}

TEST_CASE("arrival probabilities") {
  auto pa = arrival_probabilities(70.8, 10.0, 13e-6);
  CHECK(pa[0] == doctest::Approx(1.0 - std::exp(-70.8 * 13e-6)).epsilon(1e-12));
  CHECK(pa[1] == doctest::Approx(1.3e-4).epsilon(1e-12));
  CHECK(arrival_probabilities(0.0, 10.0, 13e-6)[0] == 0.0);
  CHECK_THROWS_AS(arrival_probabilities(0.0, 1e6, 13e-6),
                  std::invalid_argument);
}

TEST_CASE("blocking probability and the Poisson series") {
  CHECK(blocking_probability(0.0, 0.0, 141, 0) == 0.0);
  CHECK(blocking_probability(0.0, 0.5, 1, 1) == 0.0);  // no neighbors
  // N_cs = 1 leaves only the virtual-collision term
  CHECK(blocking_probability(0.3, 0.7, 1, 1) ==
        doctest::Approx(1.0 - 0.7 * 0.7).epsilon(1e-12));
  // series equals the closed form
  for (double tau : {0.001, 0.01, 0.05}) {
    for (int ncs : {2, 47, 141, 281}) {
      const double closed = std::exp(-tau * (ncs - 1));
      const double series = poisson_busy_series(tau, ncs, 2000);
      CHECK(std::abs(series - closed) < 1e-12);
    }
  }
}

TEST_CASE("omega closed forms") {
  EdcaParams p;
  // saturated AC0 with an idle channel: 1 / (1 + (W-1)/2)
  auto w = omega_closed_forms(0.0, 0.0, 0.5, 0.5, 1.0, 1.0, 0.0, p);
  CHECK(w[0] == doctest::Approx(0.4).epsilon(1e-12));
  // p_v1 = 0 collapses the geometric factor to 1 and omega1 stays in (0,1)
  CHECK(w[1] > 0.0);
  CHECK(w[1] < 1.0);
  CHECK_THROWS_AS(omega_closed_forms(1.0, 0.5, 0.5, 0.5, 0.5, 0.5, 0.0, p),
                  DegenerateRegimeError);
  CHECK_THROWS_AS(omega_closed_forms(0.5, 0.5, 0.0, 0.5, 0.5, 0.5, 0.0, p),
                  DegenerateRegimeError);
}

TEST_CASE("fixed point at frozen operating points") {
  EdcaParams p;
  struct Row {
    double lam0;
    int ncs;
    double w0, w1, pb0, pb1, rho0, rho1, t0, t1;
  };
  // linear rate model, lambda1 = 10 pkts/s, y* = 3 / 5 / 10 m
  const Row rows[] = {
      {67.6574932712, 467, 0.00104346890046, 0.000142462850444,
       0.424615877376, 0.669529514155, 0.160634471517, 0.0896149914262,
       2374.23031435, 8961.49914262},
      {70.7674316184, 281, 0.00107416038127, 0.000139646371336,
       0.288203739814, 0.494292724039, 0.146790054397, 0.070138435458,
       2074.26002385, 7013.8435458},
      {79.0655410536, 141, 0.00119540856789, 0.000136780612371,
       0.170241338223, 0.312957720339, 0.1434929434, 0.0499881126397,
       1814.86070275, 4998.81126397},
  };
  for (const Row& r : rows) {
    const FixedPointSolution s = solve_fixed_point(r.lam0, 10.0, r.ncs, p);
    CHECK(s.omega0 == doctest::Approx(r.w0).epsilon(1e-8));
    CHECK(s.omega1 == doctest::Approx(r.w1).epsilon(1e-8));
    CHECK(s.pb0 == doctest::Approx(r.pb0).epsilon(1e-8));
    CHECK(s.pb1 == doctest::Approx(r.pb1).epsilon(1e-8));
    CHECK(s.rho0 == doctest::Approx(r.rho0).epsilon(1e-8));
    CHECK(s.rho1 == doctest::Approx(r.rho1).epsilon(1e-8));
    CHECK(s.mean_service_us0 == doctest::Approx(r.t0).epsilon(1e-8));
    CHECK(s.mean_service_us1 == doctest::Approx(r.t1).epsilon(1e-8));
    CHECK(s.residual < 1e-10);
    CHECK(!s.rho0_clamped);
    CHECK(!s.rho1_clamped);
    CHECK(s.tau_total ==
          doctest::Approx(s.tau0 + s.tau1).epsilon(1e-12));
    // re-applying the update map barely moves the solution
    const double pv = s.omega0;
    const double pb0 = blocking_probability(s.omega1, s.tau_total, r.ncs, 0);
    const double pb1 = blocking_probability(s.omega0, s.tau_total, r.ncs, 1);
    const auto w = omega_closed_forms(pb0, pb1, s.pa0, s.pa1, s.rho0, s.rho1,
                                      pv, p);
    CHECK(std::abs(w[0] - s.omega0) < 1e-9);
    CHECK(std::abs(w[1] - s.omega1) < 1e-9);
  }
}

TEST_CASE("fixed point degenerate no-traffic limit") {
  EdcaParams p;
  const FixedPointSolution s = solve_fixed_point(0.0, 0.0, 141, p);
  CHECK(s.omega0 == 0.0);
  CHECK(s.omega1 == 0.0);
  CHECK(s.pb0 == 0.0);
  CHECK(s.pb1 == 0.0);
  CHECK(s.tau_total == 0.0);
}

TEST_CASE("parameter validation") {
  EdcaParams p;
  CHECK_NOTHROW(p.validate());
  EdcaParams a = p;
  a.aifsn[1] = a.aifsn[0];
  CHECK_THROWS_AS(a.validate(), std::invalid_argument);
  EdcaParams b = p;
  b.retry_limit = 0;  // below M = 1
  CHECK_THROWS_AS(b.validate(), std::invalid_argument);
  EdcaParams c = p;
  c.slot = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  EdcaParams d = p;
  d.cw_max[0] = d.cw_min[0] - 1;
  CHECK_THROWS_AS(d.validate(), std::invalid_argument);
}
