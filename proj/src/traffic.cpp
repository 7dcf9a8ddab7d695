#include "platoonmac/traffic.hpp"

#include <cmath>

namespace platoonmac {

void RateModel::validate() const {
  if (!(k > 0.0)) throw std::invalid_argument("rate.k must be > 0");
}

double gap_probability(double y_star, double lead_speed,
                       const GapModelParams& p) {
  if (!(lead_speed > 0.0))
    throw std::invalid_argument("lead_speed must be > 0");
  if (y_star < 0.0) throw std::invalid_argument("y_star must be >= 0");
  const double x = p.alpha + p.beta0 * (y_star / lead_speed);
  // 1 / (1 + e^{-x}) avoids overflow for large |x|
  return 1.0 / (1.0 + std::exp(-x));
}

double lambda0(double P, const RateModel& m) {
  m.validate();
  if (P < 0.0 || P > 1.0) throw std::invalid_argument("P must be in [0,1]");
  switch (m.kind) {
    case RateKind::Linear:
      return m.k * P;
    case RateKind::Quadratic:
      return m.k * (P * P + P);
    case RateKind::Sigmoidal:
      return m.k * std::tanh(P);
    case RateKind::Logarithmic:
      if (P >= 1.0)
        throw std::domain_error("logarithmic rate model requires P < 1");
      return 1.0 - m.k * std::log(1.0 - P);
  }
  throw std::logic_error("unreachable rate kind");
}

RateKind rate_kind_from_string(const std::string& s) {
  if (s == "linear") return RateKind::Linear;
  if (s == "quadratic") return RateKind::Quadratic;
  if (s == "sigmoidal") return RateKind::Sigmoidal;
  if (s == "logarithmic") return RateKind::Logarithmic;
  throw std::invalid_argument("unknown rate model kind: " + s);
}

const char* to_string(RateKind k) {
  switch (k) {
    case RateKind::Linear: return "linear";
    case RateKind::Quadratic: return "quadratic";
    case RateKind::Sigmoidal: return "sigmoidal";
    case RateKind::Logarithmic: return "logarithmic";
  }
  return "?";
}

}  // namespace platoonmac
