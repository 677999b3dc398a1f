#pragma once

#include <array>
#include <cmath>
#include <string>

#include "fwdgame/types.hpp"

namespace fwdgame {

// Scalar model parameters.
//   b      benefit per delivered packet (b > 0)
//   c      forwarding cost (c > 0)
//   p_e    channel loss probability in [0,1]
//   mu     reputation updating error in [0, 0.5); the discrimination q = 1-2*mu
//          must stay positive or every cooperation threshold becomes infinite
//   beta   imitation intensity (>= 0)
//   omega  probability of a strategy event per co-evolution step, in (0,1]
//   L      average degree (positive)
//   N      population size (N >= L+1)
struct GameParams {
  double b = 4.0;
  double c = 2.0;
  double p_e = 0.01;
  double mu = 0.01;
  double beta = 10.0;
  double omega = 0.02;
  int L = 4;
  int N = 100;

  double discrimination() const { return 1.0 - 2.0 * mu; }
  double delivery_gain() const { return b * (1.0 - p_e); }

  void validate(bool structured = false) const {
    if (!(b > 0.0)) throw ConfigError("params: b must be > 0");
    if (!(c > 0.0)) throw ConfigError("params: c must be > 0");
    if (!(p_e >= 0.0 && p_e <= 1.0)) throw ConfigError("params: p_e must be in [0,1]");
    if (!(mu >= 0.0 && mu < 0.5))
      throw ConfigError("params: mu must be in [0, 0.5) so the discrimination 1-2*mu stays positive");
    if (!(beta >= 0.0)) throw ConfigError("params: beta must be >= 0");
    if (!(omega > 0.0 && omega <= 1.0)) throw ConfigError("params: omega must be in (0,1]");
    if (L < 1) throw ConfigError("params: L must be a positive integer");
    if (N < L + 1) throw ConfigError("params: N must be at least L+1");
    if (structured && (static_cast<long long>(L) * N) % 2 != 0)
      throw ConfigError("params: L*N must be even in structured mode (H = L*N/2 links)");
  }
};

// Symmetric 3x3 matrix of per-type link breaking probabilities. Entries must
// be strictly positive: they divide payoffs and the normalization a(x).
class LinkBreakMatrix {
 public:
  LinkBreakMatrix() { k_.fill({1.0, 1.0, 1.0}); }

  static LinkBreakMatrix from_upper(double k11, double k12, double k13, double k22, double k23,
                                    double k33) {
    LinkBreakMatrix m;
    m.k_[0] = {k11, k12, k13};
    m.k_[1] = {k12, k22, k23};
    m.k_[2] = {k13, k23, k33};
    m.validate();
    return m;
  }

  double operator()(int a, int b) const { return k_[a][b]; }
  double operator()(Strategy a, Strategy b) const { return k_[index_of(a)][index_of(b)]; }

  void validate() const {
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        if (!(k_[a][b] > 0.0 && k_[a][b] <= 1.0))
          throw ConfigError("link break matrix: k[" + std::to_string(a + 1) + "][" +
                            std::to_string(b + 1) + "] must be in (0,1]");
        if (k_[a][b] != k_[b][a]) throw ConfigError("link break matrix must be symmetric");
      }
    }
  }

 private:
  std::array<std::array<double, 3>, 3> k_;
};

}  // namespace fwdgame
