#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "platoonmac/edca.hpp"

namespace platoonmac {

enum class Topology {
  SingleDomain,     ///< all stations mutually in carrier-sense range
  LineWithRanges,   ///< stations on a line, tx/cs ranges from EdcaParams
};

struct SimConfig {
  int n_vehicles = 100;
  double headway = 10.0;          ///< spacing (m), used by LineWithRanges
  double lambda0 = 50.0;          ///< Poisson AC0 arrivals (pkts/s) per station
  double lambda1 = 10.0;          ///< periodic AC1 arrivals (pkts/s)
  double duration_s = 20.0;
  double warmup_s = 2.0;          ///< discarded transient
  std::uint64_t seed = 1;
  Topology topology = Topology::SingleDomain;
  bool record_packets = false;    ///< keep the per-packet log
  EdcaParams edca;

  void validate() const;
};

/// One delivered (or dropped) packet, all times in microseconds.
struct PacketRecord {
  int station = 0;
  int ac = 0;
  std::int64_t arrival_us = 0;
  std::int64_t hol_us = 0;        ///< head-of-line (service start)
  std::int64_t done_us = 0;
  // "ok", "collided" (external, broadcast: no retry) or "dropped"
  std::string outcome;
};

/// Per-AC outcome of one run. Delays in microseconds, post-warmup only.
struct AcStats {
  std::vector<double> access_us;  ///< HOL to end of transmission
  std::vector<double> sojourn_us; ///< arrival to end of transmission
  std::int64_t arrivals = 0;
  std::int64_t transmissions = 0;
  std::int64_t external_collisions = 0;
  std::int64_t virtual_collisions = 0;
  std::int64_t dropped = 0;       ///< AC1 retry-limit drops
  std::int64_t backlog = 0;       ///< queued or in service at the end
  double mean_us() const;         ///< mean access delay
  double std_us() const;
};

struct SimStats {
  AcStats ac[2];
  std::vector<PacketRecord> packets;  ///< only when record_packets
  double busy_fraction = 0;
  std::int64_t rounds = 0;
};

/// Slot-synchronous broadcast EDCA simulation. Rounds are idle slots or
/// busy periods. Backoff counters freeze while the medium is sensed busy
/// and resume at AIFS expiry, so a busy round costs one expensive
/// decrement; AC1 additionally owes its extra AIFS slots before its
/// blocked decrement completes. Virtual collisions resolve in favour of
/// AC0, doubling AC1's CW up to the stage cap and dropping after the
/// retry limit. Deterministic for a given config (per-station substreams
/// from the master seed).
SimStats run_simulation(const SimConfig& cfg);

struct ReplicateSummary {
  std::vector<double> values;     ///< one per replication
  double mean = 0;
  double std_dev = 0;             ///< across replications
  double ci95_half_width = 0;
};

/// Runs n_reps copies of cfg with seeds seed, seed+1, ... and summarises
/// the per-run mean access delay (us) of the chosen AC.
ReplicateSummary replicate_mean_delay(const SimConfig& cfg, int ac,
                                      int n_reps);

}  // namespace platoonmac
