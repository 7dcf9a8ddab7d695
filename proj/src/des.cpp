#include "platoonmac/des.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <stdexcept>

namespace platoonmac {

void SimConfig::validate() const {
  edca.validate();
  if (n_vehicles < 1) throw std::invalid_argument("sim.n_vehicles must be >= 1");
  if (!(headway > 0)) throw std::invalid_argument("sim.headway must be > 0");
  if (!(lambda0 >= 0) || !(lambda1 >= 0))
    throw std::invalid_argument("sim rates must be >= 0");
  if (!(duration_s > 0) || warmup_s < 0 || warmup_s >= duration_s)
    throw std::invalid_argument("sim: need 0 <= warmup < duration");
}

double AcStats::mean_us() const {
  if (access_us.empty()) return 0;
  double s = 0;
  for (double d : access_us) s += d;
  return s / access_us.size();
}

double AcStats::std_us() const {
  if (access_us.size() < 2) return 0;
  const double m = mean_us();
  double s = 0;
  for (double d : access_us) s += (d - m) * (d - m);
  return std::sqrt(s / (access_us.size() - 1));
}

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d4ecda38dffb7bULL;
  return z ^ (z >> 31);
}

constexpr std::int64_t kNever = INT64_MAX;

// head-of-line contention state of one AC at one station
struct AcHead {
  std::deque<std::int64_t> queue;  // arrival times of packets behind HOL
  bool busy = false;
  std::int64_t arrival_us = 0;     // of the HOL packet
  std::int64_t hol_us = 0;         // service start
  int counter = 0;
  int stage = 0;                   // AC1 CW stage
  int retries = 0;                 // AC1 virtual collisions so far
  int suspend = 0;                 // AC1 extra AIFS slots to sit out
};

}  // namespace

SimStats run_simulation(const SimConfig& cfg) {
  cfg.validate();
  const EdcaParams& p = cfg.edca;
  const SlotTiming t = slot_timing(p);
  const int a1 = aifs_slot_penalty(p, 1);
  const int m_stages = backoff_stages(p);
  const int L = p.retry_limit;
  const std::int64_t busy_dur = t.ttr_us + t.aifs_us[0];
  const std::int64_t end_us = std::llround(cfg.duration_s * 1e6);
  const std::int64_t warm_us = std::llround(cfg.warmup_s * 1e6);
  const bool line = cfg.topology == Topology::LineWithRanges;
  const int n = cfg.n_vehicles;

  std::vector<std::mt19937_64> rng;
  rng.reserve(n);
  std::uint64_t seed_state = cfg.seed;
  for (int i = 0; i < n; ++i) rng.emplace_back(splitmix64(seed_state));

  std::vector<AcHead> head[2]{std::vector<AcHead>(n), std::vector<AcHead>(n)};

  // arrival processes: AC0 Poisson, AC1 periodic with random phase
  std::vector<std::int64_t> next0(n, kNever), next1(n, kNever);
  const std::int64_t period1 =
      cfg.lambda1 > 0 ? std::llround(1e6 / cfg.lambda1) : 0;
  for (int i = 0; i < n; ++i) {
    if (cfg.lambda0 > 0)
      next0[i] = std::llround(
          std::exponential_distribution<double>(cfg.lambda0 * 1e-6)(rng[i]));
    if (cfg.lambda1 > 0)
      next1[i] = std::uniform_int_distribution<std::int64_t>(
          0, period1 - 1)(rng[i]);
  }

  SimStats out;
  std::vector<std::pair<int, int>> tx;  // (station, ac)
  tx.reserve(n);

  auto draw_counter = [&](int st, int ac, int stage) {
    const int w = ac == 0 ? p.cw_min[0] + 1 : cw_at_stage(p, stage);
    return std::uniform_int_distribution<int>(0, w - 1)(rng[st]);
  };
  auto start_next = [&](int ac, int st, std::int64_t now) {
    AcHead& h = head[ac][st];
    if (!h.queue.empty()) {
      h.arrival_us = h.queue.front();
      h.queue.pop_front();
      h.busy = true;
      h.hol_us = now;
      h.stage = 0;
      h.retries = 0;
      h.counter = draw_counter(st, ac, 0);
    } else {
      h.busy = false;
    }
  };
  auto record = [&](int ac, int st, std::int64_t done, const char* outcome) {
    const AcHead& h = head[ac][st];
    if (h.hol_us < warm_us) return;
    out.ac[ac].access_us.push_back(static_cast<double>(done - h.hol_us));
    out.ac[ac].sojourn_us.push_back(static_cast<double>(done - h.arrival_us));
    if (cfg.record_packets)
      out.packets.push_back(
          {st, ac, h.arrival_us, h.hol_us, done, outcome});
  };

  std::int64_t now = 0, busy_rounds = 0;
  while (now < end_us) {
    // who is ready; AC0 wins the in-station virtual collision
    tx.clear();
    for (int st = 0; st < n; ++st) {
      AcHead& h0 = head[0][st];
      AcHead& h1 = head[1][st];
      const bool r0 = h0.busy && h0.counter == 0;
      const bool r1 = h1.busy && h1.counter == 0 && h1.suspend == 0;
      if (r0) {
        tx.emplace_back(st, 0);
        if (r1) {
          out.ac[1].virtual_collisions++;
          ++h1.retries;
          if (h1.retries > L) {
            // retry-limit drop: backoff cost only, no transmission
            if (h1.hol_us >= warm_us) out.ac[1].dropped++;
            record(1, st, now, "dropped");
            start_next(1, st, now);
          } else {
            h1.stage = std::min(h1.stage + 1, m_stages);
            h1.counter = draw_counter(st, 1, h1.stage);
          }
        }
      } else if (r1) {
        tx.emplace_back(st, 1);
      }
    }

    // stations whose head of line was replaced or redrawn this round must
    // not also decrement the fresh counter
    std::vector<char> touched[2]{std::vector<char>(n, 0),
                                 std::vector<char>(n, 0)};
    for (const auto& [st, ac] : tx) {
      touched[ac][st] = 1;
      if (ac == 0) touched[1][st] = 1;  // covers the virtual-collision redraw
    }

    std::int64_t dur;
    if (!tx.empty()) {
      dur = busy_dur;
      ++busy_rounds;
      for (const auto& [st, ac] : tx) {
        bool collided;
        if (line) {
          // shared receivers exist when two transmitters sit within twice
          // the transmission range of each other
          collided = false;
          for (const auto& [st2, ac2] : tx)
            if (st2 != st &&
                std::abs(st2 - st) * cfg.headway <= 2.0 * p.tx_range) {
              collided = true;
              break;
            }
        } else {
          collided = tx.size() > 1;
        }
        if (head[ac][st].hol_us >= warm_us) {
          out.ac[ac].transmissions++;
          if (collided) out.ac[ac].external_collisions++;
        }
        record(ac, st, now + t.ttr_us, collided ? "collided" : "ok");
        start_next(ac, st, now + dur);
      }
      // counters advance once per virtual slot: a busy round is one
      // (expensive) decrement for AC0; AC1 additionally owes its extra
      // AIFS slots before its blocked decrement completes
      for (int st = 0; st < n; ++st) {
        bool sensed = true;
        if (line) {
          sensed = false;
          for (const auto& [st2, ac2] : tx)
            if (std::abs(st2 - st) * cfg.headway <= p.cs_range) {
              sensed = true;
              break;
            }
        }
        AcHead& h0 = head[0][st];
        AcHead& h1 = head[1][st];
        if (sensed) {
          if (!touched[0][st] && h0.busy && h0.counter > 0) --h0.counter;
          h1.suspend = a1;
        } else {
          // out of sensing range: the round looks idle locally
          if (!touched[0][st] && h0.busy && h0.counter > 0) --h0.counter;
          if (!touched[1][st]) {
            if (h1.suspend > 0) {
              if (--h1.suspend == 0 && h1.busy && h1.counter > 0) --h1.counter;
            } else if (h1.busy && h1.counter > 0) {
              --h1.counter;
            }
          }
        }
      }
    } else {
      dur = t.slot_us;
      for (int st = 0; st < n; ++st) {
        AcHead& h0 = head[0][st];
        if (h0.busy && h0.counter > 0) --h0.counter;
        AcHead& h1 = head[1][st];
        if (h1.suspend > 0) {
          // the blocked decrement lands at the end of the extra AIFS slot
          if (--h1.suspend == 0 && h1.busy && h1.counter > 0) --h1.counter;
        } else if (h1.busy && h1.counter > 0) {
          --h1.counter;
        }
      }
    }

    // arrivals inside this round enter service at the round boundary
    const std::int64_t round_end = now + dur;
    for (int st = 0; st < n; ++st) {
      while (next0[st] < round_end) {
        if (next0[st] >= warm_us) out.ac[0].arrivals++;
        head[0][st].queue.push_back(next0[st]);
        next0[st] += std::max<std::int64_t>(
            1, std::llround(std::exponential_distribution<double>(
                   cfg.lambda0 * 1e-6)(rng[st])));
      }
      while (next1[st] < round_end) {
        if (next1[st] >= warm_us) out.ac[1].arrivals++;
        head[1][st].queue.push_back(next1[st]);
        next1[st] += period1;
      }
      for (int ac = 0; ac < 2; ++ac)
        if (!head[ac][st].busy && !head[ac][st].queue.empty())
          start_next(ac, st, round_end);
    }

    now = round_end;
    out.rounds++;
  }

  for (int ac = 0; ac < 2; ++ac)
    for (int st = 0; st < n; ++st)
      out.ac[ac].backlog += static_cast<std::int64_t>(head[ac][st].queue.size()) +
                            (head[ac][st].busy ? 1 : 0);
  out.busy_fraction =
      out.rounds ? static_cast<double>(busy_rounds) / out.rounds : 0.0;
  return out;
}

ReplicateSummary replicate_mean_delay(const SimConfig& cfg, int ac,
                                      int n_reps) {
  if (n_reps < 1) throw std::invalid_argument("n_reps must be >= 1");
  if (ac != 0 && ac != 1) throw std::invalid_argument("ac must be 0 or 1");
  ReplicateSummary r;
  r.values.reserve(n_reps);
  for (int i = 0; i < n_reps; ++i) {
    SimConfig c = cfg;
    c.seed = cfg.seed + static_cast<std::uint64_t>(i);
    r.values.push_back(run_simulation(c).ac[ac].mean_us());
  }
  double s = 0;
  for (double v : r.values) s += v;
  r.mean = s / n_reps;
  if (n_reps > 1) {
    double q = 0;
    for (double v : r.values) q += (v - r.mean) * (v - r.mean);
    r.std_dev = std::sqrt(q / (n_reps - 1));
    r.ci95_half_width = 1.96 * r.std_dev / std::sqrt(static_cast<double>(n_reps));
  }
  return r;
}

}  // namespace platoonmac
