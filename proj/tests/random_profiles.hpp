#pragma once

// Random profiles compatible with a mean magnetization, for maximality checks.

#include <algorithm>
#include <random>
#include <vector>

namespace gravising::testing {

// Moves entries towards +-limit in proportion to their headroom until the mean is m.
inline void restore_mean(std::vector<double>& q, double m, double limit) {
  double excess = 0.0;
  for (double v : q) excess += v - m;
  if (excess == 0.0) return;
  double room = 0.0;
  for (double v : q) room += excess > 0.0 ? v + limit : limit - v;
  if (room <= 0.0) return;
  const double t = std::abs(excess) / room;
  for (double& v : q) {
    v += excess > 0.0 ? -t * (v + limit) : t * (limit - v);
    v = std::clamp(v, -limit, limit);
  }
}

// Half the draws are uniform in [-limit, limit], half perturb `centre`.
inline std::vector<double> random_compatible(const std::vector<double>& centre, double m,
                                             double limit, std::mt19937_64& rng, bool near) {
  std::vector<double> q(centre.size());
  std::uniform_real_distribution<double> uniform(-limit, limit);
  std::normal_distribution<double> noise(0.0, 0.05);
  for (std::size_t k = 0; k < q.size(); ++k) {
    q[k] = near ? std::clamp(centre[k] + noise(rng), -limit, limit) : uniform(rng);
  }
  restore_mean(q, m, limit);
  return q;
}

}  // namespace gravising::testing
