#include "gravising/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace gravising::thermo {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_beta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("thermo: beta must be positive and finite");
  }
}

// Largest root of m = tanh(beta (z m + h)) in [0, 1] for h >= 0. On [0, 1] the
// map m - tanh(...) is convex with a single sign change, so plain bisection
// to adjacent doubles is safe.
double mean_field_root(double beta, double coordination, double h) {
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (mid - std::tanh(beta * (coordination * mid + h)) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double mean_field_spontaneous(double beta, int dimension) {
  const double z = 2.0 * dimension;
  if (beta * z <= 1.0) return 0.0;
  return mean_field_root(beta, z, 0.0);
}

// Curie-Weiss free energy F(m) = -(z/2) m^2 - s(m)/beta, before convexification.
double mean_field_bare_free_energy(const MeanField& mf, double m) {
  const double z = 2.0 * mf.dimension;
  return -0.5 * z * m * m - spin_entropy(m) / mf.beta;
}

// --- Exact 1D transfer matrix ----------------------------------------------
//
// lambda_+ = e^b cosh(b h) + sqrt(e^{2b} sinh^2(b h) + e^{-2b}); we factor out
// e^{b + b|h|} so that neither cosh nor sinh can overflow.

double exact_pressure(const Exact1D& e, double h) {
  const double a = e.beta * std::abs(h);
  const double u = std::exp(-2.0 * a);
  const double half_diff = 0.5 * (1.0 - u);
  const double w =
      0.5 * (1.0 + u) + std::sqrt(half_diff * half_diff + std::exp(-4.0 * e.beta - 2.0 * a));
  return 1.0 + std::abs(h) + std::log(w) / e.beta;
}

double exact_magnetization(const Exact1D& e, double h) {
  if (h == 0.0) return 0.0;
  const double a = e.beta * std::abs(h);
  // r = e^{-2 beta} / sinh(a)
  const double r = 2.0 * std::exp(-2.0 * e.beta - a) / (-std::expm1(-2.0 * a));
  const double m = 1.0 / std::sqrt(1.0 + r * r);
  return h > 0.0 ? m : -m;
}

double exact_field_for(const Exact1D& e, double m) {
  if (m == 0.0) return 0.0;
  const double u = std::abs(m);
  const double one_minus = (1.0 - u) * (1.0 + u);
  const double s = std::exp(-2.0 * e.beta) * u / std::sqrt(one_minus);
  const double h = std::asinh(s) / e.beta;
  return m > 0.0 ? h : -h;
}

// --- Tabulated ---------------------------------------------------------------

std::size_t segment_for_field(const Tabulated& t, double a) {
  // index k with fields[k] <= a <= fields[k+1]
  auto it = std::upper_bound(t.fields.begin(), t.fields.end(), a);
  std::size_t k = static_cast<std::size_t>(it - t.fields.begin());
  if (k == 0) return 0;
  k -= 1;
  return std::min(k, t.fields.size() - 2);
}

double tabulated_magnetization(const Tabulated& t, double h) {
  const double a = std::abs(h);
  if (a > t.fields.back()) {
    throw std::out_of_range("tabulated backend: field outside tabulated range");
  }
  const std::size_t k = segment_for_field(t, a);
  const double w = (a - t.fields[k]) / (t.fields[k + 1] - t.fields[k]);
  const double m = (1.0 - w) * t.magnetizations[k] + w * t.magnetizations[k + 1];
  return h < 0.0 ? -m : m;
}

double tabulated_pressure(const Tabulated& t, double h) {
  const double a = std::abs(h);
  if (a > t.fields.back()) {
    throw std::out_of_range("tabulated backend: field outside tabulated range");
  }
  const std::size_t k = segment_for_field(t, a);
  const double dx = a - t.fields[k];
  const double width = t.fields[k + 1] - t.fields[k];
  const double m0 = t.magnetizations[k];
  const double slope = (t.magnetizations[k + 1] - m0) / width;
  return t.pressure_nodes[k] + m0 * dx + 0.5 * slope * dx * dx;
}

double tabulated_field_for(const Tabulated& t, double m) {
  const double u = std::abs(m);
  if (u <= t.magnetizations.front()) return 0.0;
  if (u > t.magnetizations.back()) {
    throw std::out_of_range("tabulated backend: magnetization outside tabulated range");
  }
  // first node with magnetization >= u
  auto it = std::lower_bound(t.magnetizations.begin(), t.magnetizations.end(), u);
  const std::size_t k1 = static_cast<std::size_t>(it - t.magnetizations.begin());
  const std::size_t k0 = k1 - 1;
  const double dm = t.magnetizations[k1] - t.magnetizations[k0];
  const double w = dm > 0.0 ? (u - t.magnetizations[k0]) / dm : 1.0;
  const double h = t.fields[k0] + w * (t.fields[k1] - t.fields[k0]);
  return m < 0.0 ? -h : h;
}

}  // namespace

double spin_entropy(double m) {
  const double u = std::abs(m);
  if (u > 1.0) throw std::domain_error("spin_entropy: |m| > 1");
  const double plus = (1.0 + u) * std::log1p(u);
  const double minus = u < 1.0 ? (1.0 - u) * std::log1p(-u) : 0.0;
  return std::log(2.0) - 0.5 * (plus + minus);
}

Backend Backend::exact_1d(double beta) {
  require_beta(beta);
  return Backend(Exact1D{beta});
}

Backend Backend::mean_field(double beta, int dimension) {
  require_beta(beta);
  if (dimension < 1) throw std::invalid_argument("mean-field backend: dimension must be >= 1");
  return Backend(MeanField{beta, dimension, mean_field_spontaneous(beta, dimension)});
}

Backend Backend::tabulated(double beta, std::vector<double> fields,
                           std::vector<double> magnetizations, double pressure_at_zero) {
  require_beta(beta);
  if (fields.size() != magnetizations.size()) {
    throw std::invalid_argument("tabulated backend: column lengths differ");
  }
  if (fields.size() < 2) throw std::invalid_argument("tabulated backend: need at least two rows");
  if (fields.front() != 0.0) {
    throw std::invalid_argument("tabulated backend: grid must start at h = 0");
  }
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (!std::isfinite(fields[k]) || !std::isfinite(magnetizations[k])) {
      throw std::invalid_argument("tabulated backend: non-finite entry");
    }
    if (magnetizations[k] < 0.0 || magnetizations[k] > 1.0) {
      throw std::invalid_argument("tabulated backend: magnetization outside [0, 1] for h >= 0");
    }
    if (k > 0 && !(fields[k] > fields[k - 1])) {
      throw std::invalid_argument("tabulated backend: fields must be strictly increasing");
    }
    if (k > 0 && magnetizations[k] < magnetizations[k - 1]) {
      throw std::invalid_argument("tabulated backend: magnetization must be non-decreasing");
    }
  }
  std::vector<double> nodes(fields.size());
  nodes[0] = pressure_at_zero;
  for (std::size_t k = 1; k < fields.size(); ++k) {
    nodes[k] = nodes[k - 1] +
               0.5 * (magnetizations[k] + magnetizations[k - 1]) * (fields[k] - fields[k - 1]);
  }
  return Backend(Tabulated{beta, std::move(fields), std::move(magnetizations), std::move(nodes)});
}

Backend Backend::tabulated_from_csv(double beta, std::istream& in, double pressure_at_zero) {
  std::string line;
  bool header_seen = false;
  std::vector<double> h;
  std::vector<double> m;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      std::string compact;
      for (char c : line) {
        if (c != ' ') compact.push_back(c);
      }
      if (compact != "h,m") {
        throw std::invalid_argument("tabulated CSV: expected header 'h,m'");
      }
      header_seen = true;
      continue;
    }
    std::istringstream row(line);
    double hv = 0.0;
    double mv = 0.0;
    char comma = 0;
    if (!(row >> hv >> comma >> mv) || comma != ',') {
      throw std::invalid_argument("tabulated CSV: malformed row at line " + std::to_string(line_no));
    }
    h.push_back(hv);
    m.push_back(mv);
  }
  if (!header_seen) throw std::invalid_argument("tabulated CSV: missing header");
  return tabulated(beta, std::move(h), std::move(m), pressure_at_zero);
}

Backend Backend::tabulated_from_csv(double beta, const std::filesystem::path& path,
                                    double pressure_at_zero) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return tabulated_from_csv(beta, in, pressure_at_zero);
}

BackendKind Backend::kind() const {
  return std::visit(Overloaded{[](const Exact1D&) { return BackendKind::Exact1D; },
                               [](const MeanField&) { return BackendKind::MeanField; },
                               [](const Tabulated&) { return BackendKind::Tabulated; }},
                    data_);
}

double Backend::beta() const {
  return std::visit([](const auto& b) { return b.beta; }, data_);
}

std::string Backend::name() const {
  switch (kind()) {
    case BackendKind::Exact1D:
      return "exact1d";
    case BackendKind::MeanField:
      return "meanfield";
    case BackendKind::Tabulated:
      return "tabulated";
  }
  return "unknown";
}

double Backend::pressure(double h) const {
  return std::visit(
      Overloaded{[h](const Exact1D& e) { return exact_pressure(e, h); },
                 [h](const MeanField& mf) {
                   const double a = std::abs(h);
                   const double m = a == 0.0 ? mf.spontaneous
                                             : mean_field_root(mf.beta, 2.0 * mf.dimension, a);
                   return mf.dimension * m * m + a * m + spin_entropy(m) / mf.beta;
                 },
                 [h](const Tabulated& t) { return tabulated_pressure(t, h); }},
      data_);
}

double Backend::magnetization(double h) const {
  return std::visit(Overloaded{[h](const Exact1D& e) { return exact_magnetization(e, h); },
                               [h](const MeanField& mf) {
                                 if (h == 0.0) return mf.spontaneous;
                                 const double m = mean_field_root(mf.beta, 2.0 * mf.dimension,
                                                                  std::abs(h));
                                 return h > 0.0 ? m : -m;
                               },
                               [h](const Tabulated& t) { return tabulated_magnetization(t, h); }},
                    data_);
}

double Backend::spontaneous_magnetization() const {
  return std::visit(Overloaded{[](const Exact1D&) { return 0.0; },
                               [](const MeanField& mf) { return mf.spontaneous; },
                               [](const Tabulated& t) { return t.magnetizations.front(); }},
                    data_);
}

double Backend::field_limit() const {
  if (const auto* t = std::get_if<Tabulated>(&data_)) return t->fields.back();
  return std::numeric_limits<double>::infinity();
}

double Backend::magnetization_limit() const {
  if (const auto* t = std::get_if<Tabulated>(&data_)) return t->magnetizations.back();
  return 1.0;
}

double Backend::field_for_magnetization(double m) const {
  if (!(std::abs(m) < 1.0)) throw std::domain_error("field_for_magnetization: need |m| < 1");
  if (std::abs(m) <= spontaneous_magnetization()) return 0.0;
  return std::visit(Overloaded{[m](const Exact1D& e) { return exact_field_for(e, m); },
                               [m](const MeanField& mf) {
                                 return std::atanh(m) / mf.beta - 2.0 * mf.dimension * m;
                               },
                               [m](const Tabulated& t) { return tabulated_field_for(t, m); }},
                    data_);
}

double Backend::free_energy(double m) const {
  if (std::isnan(m) || std::abs(m) > 1.0) {
    throw std::domain_error("free_energy: magnetization outside [-1, 1]");
  }
  const double u = std::abs(m);
  const double mstar = spontaneous_magnetization();
  if (u <= mstar) {
    // Coexistence plateau (or m = 0 without one): sup attained at h = 0.
    return -pressure(0.0);
  }
  return std::visit(
      Overloaded{[u](const Exact1D& e) {
                   if (u == 1.0) return -1.0;
                   const double h = exact_field_for(e, u);
                   return h * u - exact_pressure(e, h);
                 },
                 [u](const MeanField& mf) { return mean_field_bare_free_energy(mf, u); },
                 [u, this](const Tabulated& t) {
                   if (u > t.magnetizations.back()) {
                     if (u == 1.0) {
                       throw std::domain_error(
                           "free_energy: m = +-1 is not reachable within the tabulated range");
                     }
                     throw std::out_of_range(
                         "free_energy: magnetization outside tabulated range");
                   }
                   const double h = tabulated_field_for(t, u);
                   return h * u - pressure(h);
                 }},
      data_);
}

double pressure(const Backend& backend, double h) { return backend.pressure(h); }
double magnetization(const Backend& backend, double h) { return backend.magnetization(h); }
double spontaneous_magnetization(const Backend& backend) {
  return backend.spontaneous_magnetization();
}
double free_energy(const Backend& backend, double m) { return backend.free_energy(m); }

double solve_field_by_bisection(const Backend& backend, double m, double tol) {
  if (!(std::abs(m) < 1.0)) throw std::domain_error("solve_field_by_bisection: need |m| < 1");
  const double u = std::abs(m);
  if (u <= backend.spontaneous_magnetization()) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  const double limit = backend.field_limit();
  while (backend.magnetization(hi) < u) {
    if (hi >= limit) throw std::out_of_range("solve_field_by_bisection: target beyond range");
    lo = hi;
    hi = std::min(2.0 * hi, limit);
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (backend.magnetization(mid) < u) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double h = 0.5 * (lo + hi);
  return m < 0.0 ? -h : h;
}

std::vector<ThermoPoint> sample_potentials(const Backend& backend, double h_min, double h_max,
                                           int count) {
  if (count < 2 || !(h_max > h_min)) {
    throw std::invalid_argument("sample_potentials: need count >= 2 and h_max > h_min");
  }
  std::vector<ThermoPoint> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double h = h_min + (h_max - h_min) * k / (count - 1);
    out.push_back({h, backend.pressure(h), backend.magnetization(h)});
  }
  return out;
}

}  // namespace gravising::thermo
