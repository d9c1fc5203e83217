#pragma once

// Homogeneous Ising thermodynamics: pressure, magnetization isotherm,
// spontaneous magnetization and the Legendre-dual free energy.
//
// Conventions: pressure(h) = lim (beta N^d)^-1 log Z^GC, so that
// magnetization(h) = d pressure / dh and free_energy(m) = sup_h (h m - pressure(h)).
// At h = 0 the magnetization is reported as the right limit +m*.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace gravising::thermo {

/// Below this the backend is treated as having no coexistence plateau.
inline constexpr double kPlateauThreshold = 1e-12;

enum class BackendKind { Exact1D, MeanField, Tabulated };

/// Exact one-dimensional nearest-neighbour chain (transfer matrix).
struct Exact1D {
  double beta;
};

/// Curie-Weiss approximation with coordination number 2d.
struct MeanField {
  double beta;
  int dimension;
  double spontaneous;  // cached positive root of m = tanh(2 d beta m)
};

/// Monotone piecewise-linear isotherm on h >= 0, extended to h < 0 by oddness.
struct Tabulated {
  double beta;
  std::vector<double> fields;         // strictly increasing, fields[0] == 0
  std::vector<double> magnetizations; // non-decreasing, in [0, 1]
  std::vector<double> pressure_nodes; // pressure at each grid point
};

class Backend {
 public:
  static Backend exact_1d(double beta);
  static Backend mean_field(double beta, int dimension);
  /// `fields` must start at 0 and be strictly increasing; `magnetizations`
  /// non-decreasing in [0, 1]. `pressure_at_zero` is the reference value of
  /// the pressure at h = 0 from which the isotherm is integrated.
  static Backend tabulated(double beta, std::vector<double> fields,
                           std::vector<double> magnetizations,
                           double pressure_at_zero = 0.0);
  /// Reads a two-column `h,m` CSV (header required, `#` lines ignored).
  static Backend tabulated_from_csv(double beta, std::istream& in,
                                    double pressure_at_zero = 0.0);
  static Backend tabulated_from_csv(double beta, const std::filesystem::path& path,
                                    double pressure_at_zero = 0.0);

  BackendKind kind() const;
  double beta() const;
  std::string name() const;

  double pressure(double h) const;
  double magnetization(double h) const;
  double spontaneous_magnetization() const;
  bool has_plateau() const { return spontaneous_magnetization() > kPlateauThreshold; }
  double free_energy(double m) const;

  /// Largest |h| the backend can evaluate (infinite except for Tabulated).
  double field_limit() const;
  /// Largest |m| for which free_energy is finite and evaluable.
  double magnetization_limit() const;

  /// Unique h with magnetization(h) = m, by closed form where available.
  /// Returns 0 on the coexistence plateau |m| <= m*.
  double field_for_magnetization(double m) const;

  const std::variant<Exact1D, MeanField, Tabulated>& data() const { return data_; }

 private:
  explicit Backend(std::variant<Exact1D, MeanField, Tabulated> d) : data_(std::move(d)) {}
  std::variant<Exact1D, MeanField, Tabulated> data_;
};

double pressure(const Backend& backend, double h);
double magnetization(const Backend& backend, double h);
double spontaneous_magnetization(const Backend& backend);
double free_energy(const Backend& backend, double m);

/// Generic monotone bisection for magnetization(h) = m, independent of the
/// backend-specific inverses. Stops when the bracket is narrower than `tol`
/// or no longer shrinks.
double solve_field_by_bisection(const Backend& backend, double m, double tol = 1e-10);

struct ThermoPoint {
  double h;
  double pressure;
  double magnetization;
};

std::vector<ThermoPoint> sample_potentials(const Backend& backend, double h_min, double h_max,
                                           int count);

/// Binary entropy s(m) = -(1+m)/2 log((1+m)/2) - (1-m)/2 log((1-m)/2).
double spin_entropy(double m);

}  // namespace gravising::thermo
