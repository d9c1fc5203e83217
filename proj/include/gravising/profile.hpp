#pragma once

// Optimal mesoscopic magnetization profiles for a slowly varying field at
// fixed total magnetization, and the continuum gravitational profile.

#include <cstdint>
#include <optional>
#include <vector>

#include "gravising/lattice.hpp"
#include "gravising/thermo.hpp"

namespace gravising::profile {

inline constexpr double kCompatibilityTolerance = 1e-12;

/// Cell-wise magnetization on Gamma_N.
struct MesoProfile {
  LatticeGeometry geometry;
  std::vector<double> values;
  double target_m = 0.0;

  double mean() const;
  bool compatible(double tol = kCompatibilityTolerance) const;
};

/// Value of M(h) = |Gamma|^-1 sum_x m(h_N(x) - h). At a field value carried by
/// some cells (and with a coexistence plateau) M jumps, and the result is the
/// interval [M(h+), M(h-)].
struct ShiftedMagnetization {
  double lower;  // right limit
  double upper;  // left limit

  bool is_point() const { return lower == upper; }
};

ShiftedMagnetization mean_magnetization_at_shift(const FieldSpec& field,
                                                 const thermo::Backend& backend, double h);

/// h-bar = sup{h not a field value : M(h) >= m}. If m falls in the jump of M at
/// a field value, that value is returned exactly. `tol <= 0` bisects to
/// adjacent doubles.
double solve_hbar(const FieldSpec& field, const thermo::Backend& backend, double m,
                  double tol = 1e-8);

struct ProfileSolution {
  double hbar = 0.0;
  MesoProfile profile;
  /// Cells with h_N(x) == h-bar; empty unless the backend has a plateau.
  std::vector<std::int64_t> plateau_cells;
  std::optional<double> plateau_value;
  double psi_value = 0.0;
  /// h-bar / g for first-order gravitational fields with a plateau, when in [0, 1).
  std::optional<double> interface_height;
};

/// Maximizer q*_N of Psi_N over profiles compatible with m. On the plateau
/// cells all entries share one value (the maximizer is not unique there).
/// `tol` is passed to solve_hbar.
ProfileSolution optimal_profile(const FieldSpec& field, const thermo::Backend& backend, double m,
                                double tol = 0.0);

/// Psi_N(q) = |Gamma|^-1 sum_x (h_N(x) q(x) - f(q(x))).
double psi(const FieldSpec& field, const thermo::Backend& backend, const MesoProfile& q);

/// Limit profile x_d -> m(g x_d - h-bar) for h_N = g x_d.
class ContinuumProfile {
 public:
  ContinuumProfile(thermo::Backend backend, double g, double hbar);

  double hbar() const { return hbar_; }
  double g() const { return g_; }
  /// Height of the discontinuity, present when a plateau exists and
  /// h-bar / g lies in [0, 1).
  std::optional<double> interface_height() const;
  /// Magnetization at height x_d (right-limit convention at the interface).
  double operator()(double height) const;

 private:
  thermo::Backend backend_;
  double g_;
  double hbar_;
};

/// Solves pressure(g - h) - pressure(-h) = m g for h-bar by bisection.
ContinuumProfile continuum_gravity_profile(const thermo::Backend& backend, double g, double m,
                                           double tol = 1e-12);

}  // namespace gravising::profile
