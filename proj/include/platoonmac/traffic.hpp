#pragma once

#include <stdexcept>
#include <string>

namespace platoonmac {

/// Logistic gap-acceptance parameters for a two-wheeler merging into the
/// platoon. Defaults are the calibrated motorised-two-wheeler values.
struct GapModelParams {
  double alpha = -1.933;
  double beta0 = 0.652;  ///< slope per second of time gap
};

enum class RateKind { Linear, Quadratic, Sigmoidal, Logarithmic };

/// Event-driven (AC0) packet-rate model as a function of the gap-acceptance
/// probability.
struct RateModel {
  RateKind kind = RateKind::Linear;
  double k = 500.0;  ///< scale (pkts/s)

  void validate() const;
};

struct TrafficMix {
  GapModelParams gap;
  RateModel rate;
  double lambda1 = 10.0;  ///< periodic AC1 rate (pkts/s)
};

/// Probability that a two-wheeler accepts the gap at equilibrium headway
/// y_star, driven by the time gap y_star / lead_speed.
double gap_probability(double y_star, double lead_speed,
                       const GapModelParams& p);

/// AC0 packet generation rate for gap-acceptance probability P.
/// Logarithmic kind uses the natural logarithm and requires P < 1.
double lambda0(double P, const RateModel& m);

RateKind rate_kind_from_string(const std::string& s);
const char* to_string(RateKind k);

}  // namespace platoonmac
