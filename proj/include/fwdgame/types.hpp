#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fwdgame {

// Raised by configuration/input validation. The CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a computation produces a non-finite state. CLI exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Conditional forwarding strategies s(Good)s(Bad). Index order FF=0, FD=1,
// DD=2 is fixed project-wide and matches the frequency components x1,x2,x3.
enum class Strategy : int { FF = 0, FD = 1, DD = 2 };

enum class Reputation : int { Bad = 0, Good = 1 };

enum class Action : int { Drop = 0, Forward = 1 };

// What the receiver observes: a completed forward or a drop. A forward whose
// packet is lost in the channel is observed as a drop.
enum class Signal : int { Dropped = 0, Forwarded = 1 };

inline constexpr std::array<Strategy, 3> all_strategies{Strategy::FF, Strategy::FD, Strategy::DD};

inline constexpr int index_of(Strategy s) { return static_cast<int>(s); }

inline constexpr std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::FF: return "FF";
    case Strategy::FD: return "FD";
    case Strategy::DD: return "DD";
  }
  return "??";
}

// Accepts exactly FF, FD, DD. DF is rejected here: a strategy that drops for
// good providers but forwards for bad ones is not part of the model.
inline Strategy strategy_from_string(std::string_view name) {
  if (name == "FF") return Strategy::FF;
  if (name == "FD") return Strategy::FD;
  if (name == "DD") return Strategy::DD;
  throw ConfigError("unknown strategy \"" + std::string(name) + "\" (expected FF, FD or DD)");
}

// Point on the 2-simplex of strategy frequencies.
struct StrategyDistribution {
  double x1 = 0.0;
  double x2 = 0.0;
  double x3 = 0.0;

  constexpr double operator[](int m) const { return m == 0 ? x1 : (m == 1 ? x2 : x3); }

  std::array<double, 3> to_array() const { return {x1, x2, x3}; }

  static StrategyDistribution from_array(const std::array<double, 3>& a) {
    return {a[0], a[1], a[2]};
  }

  static StrategyDistribution vertex(Strategy s) {
    StrategyDistribution d;
    if (s == Strategy::FF) d.x1 = 1.0;
    if (s == Strategy::FD) d.x2 = 1.0;
    if (s == Strategy::DD) d.x3 = 1.0;
    return d;
  }

  bool on_simplex(double tol = 1e-12) const {
    return x1 >= -tol && x2 >= -tol && x3 >= -tol && std::abs(x1 + x2 + x3 - 1.0) <= tol;
  }

  void require_on_simplex(double tol = 1e-9) const {
    if (!on_simplex(tol))
      throw ConfigError("strategy distribution (" + std::to_string(x1) + ", " + std::to_string(x2) +
                        ", " + std::to_string(x3) + ") is not on the simplex");
  }

  double l1_distance(const StrategyDistribution& o) const {
    return std::abs(x1 - o.x1) + std::abs(x2 - o.x2) + std::abs(x3 - o.x3);
  }
};

// Good-reputation frequencies per strategy class plus the population aggregate
// r = x1*r1 + x2*r2 + x3*r3 for the distribution it was computed against.
struct ReputationState {
  double r1 = 1.0;
  double r2 = 1.0;
  double r3 = 1.0;
  double r = 1.0;

  constexpr double of(Strategy s) const {
    return s == Strategy::FF ? r1 : (s == Strategy::FD ? r2 : r3);
  }
};

}  // namespace fwdgame
