#include "gravising/profile.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gravising::profile {
namespace {

// Distinct cell field values with their cell fractions, sorted ascending.
struct FieldLevels {
  std::vector<double> values;
  std::vector<double> weights;

  explicit FieldLevels(const FieldSpec& field) {
    std::vector<double> cells = field.cell_values();
    std::sort(cells.begin(), cells.end());
    const double total = static_cast<double>(cells.size());
    for (std::size_t k = 0; k < cells.size();) {
      std::size_t end = k;
      while (end < cells.size() && cells[end] == cells[k]) ++end;
      values.push_back(cells[k]);
      weights.push_back(static_cast<double>(end - k) / total);
      k = end;
    }
  }

  std::size_t size() const { return values.size(); }

  std::optional<std::size_t> atom(double h) const {
    auto it = std::lower_bound(values.begin(), values.end(), h);
    if (it != values.end() && *it == h) return static_cast<std::size_t>(it - values.begin());
    return std::nullopt;
  }

  ShiftedMagnetization at(const thermo::Backend& backend, double h) const {
    const auto hit = atom(h);
    double base = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (hit && *hit == k) continue;
      base += weights[k] * backend.magnetization(values[k] - h);
    }
    if (!hit) return {base, base};
    const double jump = weights[*hit] * backend.spontaneous_magnetization();
    if (!backend.has_plateau()) return {base, base};
    return {base - jump, base + jump};
  }

  ShiftedMagnetization at_atom(const thermo::Backend& backend, std::size_t j) const {
    return at(backend, values[j]);
  }
};

double spread_of(const FieldLevels& levels) {
  return std::max(1.0, levels.values.back() - levels.values.front());
}

}  // namespace

double MesoProfile::mean() const {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

bool MesoProfile::compatible(double tol) const { return std::abs(mean() - target_m) <= tol; }

ShiftedMagnetization mean_magnetization_at_shift(const FieldSpec& field,
                                                 const thermo::Backend& backend, double h) {
  return FieldLevels(field).at(backend, h);
}

double solve_hbar(const FieldSpec& field, const thermo::Backend& backend, double m, double tol) {
  if (!(std::abs(m) < 1.0)) throw std::domain_error("solve_hbar: m must lie in (-1, 1)");
  const FieldLevels levels(field);
  const std::size_t count = levels.size();

  // Smallest atom index j with M(v_j+) <= m; the right limits decrease in j.
  std::size_t lo_idx = 0;
  std::size_t hi_idx = count;
  while (lo_idx < hi_idx) {
    const std::size_t mid = (lo_idx + hi_idx) / 2;
    if (levels.at_atom(backend, mid).lower <= m) {
      hi_idx = mid;
    } else {
      lo_idx = mid + 1;
    }
  }
  const std::size_t j = lo_idx;
  if (j < count && levels.at_atom(backend, j).upper >= m) return levels.values[j];

  // h-bar lies strictly between consecutive atoms, where M is continuous.
  auto point = [&](double h) { return levels.at(backend, h).lower; };
  const double step0 = spread_of(levels);
  double a = 0.0;
  double b = 0.0;
  if (j == 0) {
    b = levels.values.front();
    double step = step0;
    a = b - step;
    while (point(a) < m) {
      step *= 2.0;
      a = b - step;
    }
  } else {
    a = levels.values[j - 1];
  }
  if (j == count) {
    a = levels.values.back();
    double step = step0;
    b = a + step;
    while (point(b) >= m) {
      step *= 2.0;
      b = a + step;
    }
  } else if (j != 0) {
    b = levels.values[j];
  }

  while (true) {
    if (tol > 0.0 && b - a <= tol) break;
    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;
    if (point(mid) >= m) {
      a = mid;
    } else {
      b = mid;
    }
  }
  if (tol > 0.0) return 0.5 * (a + b);
  return levels.atom(a) ? b : a;
}

ProfileSolution optimal_profile(const FieldSpec& field, const thermo::Backend& backend, double m,
                                double tol) {
  ProfileSolution sol{.hbar = solve_hbar(field, backend, m, tol),
                      .profile = {field.geometry(), {}, m},
                      .plateau_cells = {},
                      .plateau_value = std::nullopt,
                      .psi_value = 0.0,
                      .interface_height = std::nullopt};
  const FieldLevels levels(field);
  const auto cells = field.cell_values();
  sol.profile.values.resize(cells.size());
  for (std::size_t x = 0; x < cells.size(); ++x) {
    sol.profile.values[x] = backend.magnetization(cells[x] - sol.hbar);
  }

  const auto atom = levels.atom(sol.hbar);
  if (atom && backend.has_plateau()) {
    const double mstar = backend.spontaneous_magnetization();
    const double left_limit = levels.at_atom(backend, *atom).upper;
    double value = mstar + (m - left_limit) / levels.weights[*atom];
    value = std::clamp(value, -mstar, mstar);
    sol.plateau_value = value;
    for (std::size_t x = 0; x < cells.size(); ++x) {
      if (cells[x] == sol.hbar) {
        sol.plateau_cells.push_back(static_cast<std::int64_t>(x));
        sol.profile.values[x] = value;
      }
    }
  }

  sol.psi_value = psi(field, backend, sol.profile);
  if (field.kind() == FieldSpec::Kind::Gravitational && field.exponent() == 1 &&
      field.g() != 0.0 && backend.has_plateau()) {
    const double height = sol.hbar / field.g();
    if (height >= 0.0 && height < 1.0) sol.interface_height = height;
  }
  return sol;
}

double psi(const FieldSpec& field, const thermo::Backend& backend, const MesoProfile& q) {
  if (!(q.geometry == field.geometry())) {
    throw std::invalid_argument("psi: profile and field geometries differ");
  }
  if (static_cast<std::int64_t>(q.values.size()) != q.geometry.cell_count()) {
    throw std::invalid_argument("psi: profile has the wrong number of cells");
  }
  double total = 0.0;
  for (std::size_t x = 0; x < q.values.size(); ++x) {
    const double v = q.values[x];
    total += field.at_cell(static_cast<std::int64_t>(x)) * v - backend.free_energy(v);
  }
  return total / static_cast<double>(q.values.size());
}

ContinuumProfile::ContinuumProfile(thermo::Backend backend, double g, double hbar)
    : backend_(std::move(backend)), g_(g), hbar_(hbar) {}

std::optional<double> ContinuumProfile::interface_height() const {
  if (!backend_.has_plateau()) return std::nullopt;
  const double height = hbar_ / g_;
  if (height >= 0.0 && height < 1.0) return height;
  return std::nullopt;
}

double ContinuumProfile::operator()(double height) const {
  return backend_.magnetization(g_ * height - hbar_);
}

ContinuumProfile continuum_gravity_profile(const thermo::Backend& backend, double g, double m,
                                           double tol) {
  if (g == 0.0 || !std::isfinite(g)) {
    throw std::domain_error("continuum_gravity_profile: degenerate field g = 0");
  }
  if (!(std::abs(m) < 1.0)) {
    throw std::domain_error("continuum_gravity_profile: m must lie in (-1, 1)");
  }
  // Mean magnetization of the column, decreasing in h.
  auto column_mean = [&](double h) {
    return (backend.pressure(g - h) - backend.pressure(-h)) / g;
  };
  const double centre = 0.5 * g;
  double step = std::abs(g) + 1.0;
  double lo = centre - step;
  while (column_mean(lo) < m) {
    step *= 2.0;
    lo = centre - step;
  }
  step = std::abs(g) + 1.0;
  double hi = centre + step;
  while (column_mean(hi) > m) {
    step *= 2.0;
    hi = centre + step;
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (column_mean(mid) >= m) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return ContinuumProfile(backend, g, 0.5 * (lo + hi));
}

}  // namespace gravising::profile
