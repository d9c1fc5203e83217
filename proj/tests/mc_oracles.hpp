#pragma once

// Exhaustive enumeration of a small fixed-magnetization sector.

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "gravising/mc.hpp"

namespace gravising::testing {

struct Sector {
  std::vector<std::uint32_t> states;  // bit k set iff spin k is +
  std::vector<double> weights;        // normalized Boltzmann weights
  std::map<std::uint32_t, std::size_t> index;
};

inline mc::SpinConfiguration from_mask(const LatticeGeometry& geometry, const mc::Boundary& boundary,
                                       std::uint32_t mask) {
  std::vector<std::int8_t> spins(static_cast<std::size_t>(geometry.site_count()));
  for (std::size_t k = 0; k < spins.size(); ++k) spins[k] = (mask >> k) & 1U ? 1 : -1;
  return mc::SpinConfiguration(geometry, boundary, std::move(spins));
}

inline std::uint32_t to_mask(const mc::SpinConfiguration& config) {
  std::uint32_t mask = 0;
  for (std::int64_t k = 0; k < config.geometry().site_count(); ++k) {
    if (config.spin(k) > 0) mask |= 1U << k;
  }
  return mask;
}

inline Sector enumerate_sector(const LatticeGeometry& geometry, const mc::Boundary& boundary,
                               const FieldSpec& field, double beta, std::int64_t magnetization) {
  Sector s;
  const auto v = static_cast<int>(geometry.site_count());
  const int plus = static_cast<int>((v + magnetization) / 2);
  std::vector<double> energies;
  for (std::uint32_t mask = 0; mask < (1U << v); ++mask) {
    if (std::popcount(mask) != plus) continue;
    s.index[mask] = s.states.size();
    s.states.push_back(mask);
    energies.push_back(mc::energy(from_mask(geometry, boundary, mask), field));
  }
  const double e0 = *std::min_element(energies.begin(), energies.end());
  double z = 0.0;
  for (double e : energies) {
    s.weights.push_back(std::exp(-beta * (e - e0)));
    z += s.weights.back();
  }
  for (auto& w : s.weights) w /= z;
  return s;
}

}  // namespace gravising::testing
