#include "gravising/droplet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace gravising::droplet {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Accepted steps over which the relative energy decrease is measured.
constexpr std::size_t kConvergenceWindow = 50;
// Relative finite-difference step of the tension gradient; a wide stencil
// smooths the kinks of crystalline tensions and is narrowed when it stalls.
constexpr double kCoarsestSmoothing = 0.05;
constexpr double kFinestSmoothing = 1e-7;
// Preconditioner strength in units of (n / 2 pi)^2.
constexpr double kSmoothingLength = 3.0;

double cross(Point a, Point b, Point c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

bool segments_cross(Point a, Point b, Point c, Point d) {
  const double d1 = cross(a, b, c);
  const double d2 = cross(a, b, d);
  const double d3 = cross(c, d, a);
  const double d4 = cross(c, d, b);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

double point_segment_distance(Point p, Point a, Point b) {
  const double ex = b.x - a.x;
  const double ey = b.y - a.y;
  const double len2 = ex * ex + ey * ey;
  double t = len2 > 0.0 ? ((p.x - a.x) * ex + (p.y - a.y) * ey) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - a.x - t * ex, p.y - a.y - t * ey);
}

// Directed Hausdorff distance from densified boundary of a to boundary of b.
double directed_hausdorff(const std::vector<Point>& a, const std::vector<Point>& b) {
  constexpr int kSubdivisions = 8;
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const Point p = a[k];
    const Point q = a[(k + 1) % a.size()];
    for (int s = 0; s < kSubdivisions; ++s) {
      const double t = static_cast<double>(s) / kSubdivisions;
      const Point x{p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)};
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < b.size(); ++j) {
        best = std::min(best, point_segment_distance(x, b[j], b[(j + 1) % b.size()]));
      }
      worst = std::max(worst, best);
    }
  }
  return worst;
}

// Edge functional |e| tau(outer normal of e) for a counter-clockwise polygon.
double edge_energy(const SurfaceTension& tau, double ex, double ey) {
  const double len = std::hypot(ex, ey);
  if (len == 0.0) return 0.0;
  return len * tau(ey / len, -ex / len);
}

std::vector<Point> clip(const std::vector<Point>& poly, double nx, double ny, double c) {
  std::vector<Point> out;
  out.reserve(poly.size() + 1);
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const Point p = poly[k];
    const Point q = poly[(k + 1) % poly.size()];
    const double fp = p.x * nx + p.y * ny - c;
    const double fq = q.x * nx + q.y * ny - c;
    if (fp <= 0.0) out.push_back(p);
    if ((fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0)) {
      const double t = fp / (fp - fq);
      out.push_back({p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)});
    }
  }
  return out;
}

std::vector<Point> ellipse(int vertices, double area, double aspect, Point centre) {
  const double b = std::sqrt(area / (std::numbers::pi * aspect));
  const double a = aspect * b;
  std::vector<Point> poly(static_cast<std::size_t>(vertices));
  for (int k = 0; k < vertices; ++k) {
    const double t = kTwoPi * k / vertices;
    poly[static_cast<std::size_t>(k)] = {centre.x + a * std::cos(t), centre.y + b * std::sin(t)};
  }
  return poly;
}

void clamp_to_box(std::vector<Point>& poly) {
  for (auto& p : poly) {
    p.x = std::clamp(p.x, 0.0, 1.0);
    p.y = std::clamp(p.y, 0.0, 1.0);
  }
}

// Moves every vertex along its averaged edge normal by a common offset until
// the polygon has the requested area. Returns false if that fails.
bool project_area(std::vector<Point>& poly, double area, double tolerance) {
  const std::size_t n = poly.size();
  for (int iter = 0; iter < 60; ++iter) {
    const double current = signed_area(poly);
    const double error = area - current;
    if (std::abs(error) <= tolerance) return true;
    std::vector<Point> normal(n, Point{0.0, 0.0});
    for (std::size_t k = 0; k < n; ++k) {
      const Point p = poly[k];
      const Point q = poly[(k + 1) % n];
      // Outer normal scaled by edge length.
      const Point e{q.y - p.y, -(q.x - p.x)};
      normal[k].x += 0.5 * e.x;
      normal[k].y += 0.5 * e.y;
      normal[(k + 1) % n].x += 0.5 * e.x;
      normal[(k + 1) % n].y += 0.5 * e.y;
    }
    // First-order area change per unit offset along the unit directions.
    double rate = 0.0;
    std::vector<Point> dir(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double len = std::hypot(normal[k].x, normal[k].y);
      dir[k] = len > 0.0 ? Point{normal[k].x / len, normal[k].y / len} : Point{0.0, 0.0};
      const bool stuck_x = (poly[k].x <= 0.0 && dir[k].x < 0.0) || (poly[k].x >= 1.0 && dir[k].x > 0.0);
      const bool stuck_y = (poly[k].y <= 0.0 && dir[k].y < 0.0) || (poly[k].y >= 1.0 && dir[k].y > 0.0);
      if (stuck_x) dir[k].x = 0.0;
      if (stuck_y) dir[k].y = 0.0;
      rate += dir[k].x * normal[k].x + dir[k].y * normal[k].y;
    }
    if (!(rate > 0.0)) return false;
    const double delta = error / rate;
    for (std::size_t k = 0; k < n; ++k) {
      poly[k].x += delta * dir[k].x;
      poly[k].y += delta * dir[k].y;
    }
    clamp_to_box(poly);
  }
  return std::abs(area - signed_area(poly)) <= tolerance;
}

std::vector<Point> energy_gradient(const std::vector<Point>& poly, const SurfaceTension& tau,
                                   double gravity, double smoothing) {
  const std::size_t n = poly.size();
  std::vector<Point> grad(n, Point{0.0, 0.0});
  for (std::size_t k = 0; k < n; ++k) {
    const Point p = poly[k];
    const Point q = poly[(k + 1) % n];
    const double ex = q.x - p.x;
    const double ey = q.y - p.y;
    const double len = std::hypot(ex, ey);
    if (len == 0.0) continue;
    const double step = smoothing * len;
    const double gx = (edge_energy(tau, ex + step, ey) - edge_energy(tau, ex - step, ey)) / (2 * step);
    const double gy = (edge_energy(tau, ex, ey + step) - edge_energy(tau, ex, ey - step)) / (2 * step);
    grad[k].x -= gx;
    grad[k].y -= gy;
    grad[(k + 1) % n].x += gx;
    grad[(k + 1) % n].y += gy;

    // Moment term (1/6)(x_k y_{k+1} - x_{k+1} y_k)(y_k + y_{k+1}).
    const double c = p.x * q.y - q.x * p.y;
    const double s = p.y + q.y;
    grad[k].x += gravity * q.y * s / 6.0;
    grad[k].y += gravity * (-q.x * s + c) / 6.0;
    grad[(k + 1) % n].x += gravity * (-p.y) * s / 6.0;
    grad[(k + 1) % n].y += gravity * (p.x * s + c) / 6.0;
  }
  return grad;
}

// Solves (1 + 2 alpha) v_k - alpha (v_{k-1} + v_{k+1}) = r_k on a cycle
// (Sherman-Morrison on top of a tridiagonal sweep).
std::vector<double> smooth_cyclic(const std::vector<double>& r, double alpha) {
  const std::size_t n = r.size();
  const double diag = 1.0 + 2.0 * alpha;
  const double off = -alpha;
  const double gamma = -diag;
  std::vector<double> b(n, diag);
  b[0] = diag - gamma;
  b[n - 1] = diag - off * off / gamma;
  auto solve = [&](std::vector<double> d) {
    std::vector<double> c(n, 0.0);
    c[0] = off / b[0];
    d[0] /= b[0];
    for (std::size_t k = 1; k < n; ++k) {
      const double m = b[k] - off * c[k - 1];
      c[k] = off / m;
      d[k] = (d[k] - off * d[k - 1]) / m;
    }
    for (std::size_t k = n - 1; k-- > 0;) d[k] -= c[k] * d[k + 1];
    return d;
  };
  const auto x = solve(r);
  std::vector<double> u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = off;
  const auto z = solve(u);
  const double factor = (x[0] + off * x[n - 1] / gamma) / (1.0 + z[0] + off * z[n - 1] / gamma);
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = x[k] - factor * z[k];
  return v;
}

// H1-type preconditioning of a vertex gradient; the constant mode passes unchanged.
std::vector<Point> precondition(const std::vector<Point>& grad) {
  const std::size_t n = grad.size();
  const double alpha = kSmoothingLength * std::pow(static_cast<double>(n) / kTwoPi, 2);
  std::vector<double> gx(n);
  std::vector<double> gy(n);
  for (std::size_t k = 0; k < n; ++k) {
    gx[k] = grad[k].x;
    gy[k] = grad[k].y;
  }
  gx = smooth_cyclic(gx, alpha);
  gy = smooth_cyclic(gy, alpha);
  std::vector<Point> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = {gx[k], gy[k]};
  return out;
}

// Descent direction -M P M (g - mu a) with a the area gradient, M the mask of
// coordinates held on the box walls, and mu chosen so the step preserves area
// to first order.
std::vector<Point> descent_direction(const std::vector<Point>& poly, const std::vector<Point>& grad) {
  const std::size_t n = poly.size();
  std::vector<Point> area_grad(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Point prev = poly[(k + n - 1) % n];
    const Point next = poly[(k + 1) % n];
    area_grad[k] = {0.5 * (next.y - prev.y), 0.5 * (prev.x - next.x)};
  }
  std::vector<Point> mask(n, Point{1.0, 1.0});
  auto blocked = [](double coordinate, double direction) {
    return (coordinate <= 0.0 && direction < 0.0) || (coordinate >= 1.0 && direction > 0.0);
  };
  std::vector<Point> dir(n);
  // The second pass releases nothing: it only adds walls the first pass pushed into.
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<Point> mg(n);
    std::vector<Point> ma(n);
    for (std::size_t k = 0; k < n; ++k) {
      mg[k] = {mask[k].x * grad[k].x, mask[k].y * grad[k].y};
      ma[k] = {mask[k].x * area_grad[k].x, mask[k].y * area_grad[k].y};
    }
    const auto pg = precondition(mg);
    const auto pa = precondition(ma);
    double apg = 0.0;
    double apa = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      apg += ma[k].x * pg[k].x + ma[k].y * pg[k].y;
      apa += ma[k].x * pa[k].x + ma[k].y * pa[k].y;
    }
    const double mu = apa > 0.0 ? apg / apa : 0.0;
    bool changed = false;
    for (std::size_t k = 0; k < n; ++k) {
      dir[k] = {-mask[k].x * (pg[k].x - mu * pa[k].x), -mask[k].y * (pg[k].y - mu * pa[k].y)};
      if (mask[k].x != 0.0 && blocked(poly[k].x, dir[k].x)) {
        mask[k].x = 0.0;
        changed = true;
      }
      if (mask[k].y != 0.0 && blocked(poly[k].y, dir[k].y)) {
        mask[k].y = 0.0;
        changed = true;
      }
    }
    if (!changed) break;
    if (pass == 1) {
      for (std::size_t k = 0; k < n; ++k) dir[k] = {mask[k].x * dir[k].x, mask[k].y * dir[k].y};
    }
  }
  return dir;
}

}  // namespace

SurfaceTension::SurfaceTension(std::string name, Rule rule, bool even)
    : name_(std::move(name)), rule_(std::move(rule)), even_(even) {}

SurfaceTension SurfaceTension::isotropic(double value) {
  if (!(value > 0.0)) throw std::invalid_argument("surface tension must be positive");
  return {"isotropic", [value](double, double) { return value; }};
}

SurfaceTension SurfaceTension::ell1() {
  return {"ell1", [](double nx, double ny) { return std::abs(nx) + std::abs(ny); }};
}

SurfaceTension SurfaceTension::tabulated(std::vector<double> angles, std::vector<double> values) {
  if (angles.size() != values.size() || angles.empty()) {
    throw std::invalid_argument("tabulated tension: need matching, non-empty angle and value lists");
  }
  for (std::size_t k = 0; k < angles.size(); ++k) {
    if (!(values[k] > 0.0)) throw std::invalid_argument("tabulated tension: values must be positive");
    if (angles[k] < 0.0 || angles[k] >= kTwoPi || (k > 0 && !(angles[k] > angles[k - 1]))) {
      throw std::invalid_argument("tabulated tension: angles must increase within [0, 2 pi)");
    }
  }
  auto rule = [angles = std::move(angles), values = std::move(values)](double nx, double ny) {
    double theta = std::atan2(ny, nx);
    if (theta < 0.0) theta += kTwoPi;
    const std::size_t n = angles.size();
    auto it = std::upper_bound(angles.begin(), angles.end(), theta);
    const std::size_t hi = static_cast<std::size_t>(it - angles.begin()) % n;
    const std::size_t lo = (hi + n - 1) % n;
    double a0 = angles[lo];
    double a1 = angles[hi];
    if (a1 <= a0) a1 += kTwoPi;
    double t = theta;
    if (t < a0) t += kTwoPi;
    if (a1 == a0) return values[lo];
    const double w = (t - a0) / (a1 - a0);
    return (1.0 - w) * values[lo] + w * values[hi];
  };
  return {"tabulated", std::move(rule), false};
}

SurfaceTension SurfaceTension::tabulated_from_csv(std::istream& in) {
  std::string line;
  bool header_seen = false;
  std::vector<double> angles;
  std::vector<double> values;
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
      if (compact != "angle,tau") throw std::invalid_argument("tension CSV: expected header 'angle,tau'");
      header_seen = true;
      continue;
    }
    std::istringstream row(line);
    double a = 0.0;
    double v = 0.0;
    char comma = 0;
    if (!(row >> a >> comma >> v) || comma != ',') {
      throw std::invalid_argument("tension CSV: malformed row at line " + std::to_string(line_no));
    }
    angles.push_back(a);
    values.push_back(v);
  }
  if (!header_seen) throw std::invalid_argument("tension CSV: missing header");
  return tabulated(std::move(angles), std::move(values));
}

SurfaceTension SurfaceTension::tabulated_from_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return tabulated_from_csv(in);
}

double SurfaceTension::at_angle(double theta) const { return rule_(std::cos(theta), std::sin(theta)); }

SurfaceTension SurfaceTension::scaled(double factor) const {
  if (!(factor > 0.0)) throw std::invalid_argument("surface tension scale must be positive");
  return {name_, [rule = rule_, factor](double nx, double ny) { return factor * rule(nx, ny); }, even_};
}

double phase_fraction(double m_star, double m) {
  if (!(m_star > 0.0)) throw std::domain_error("phase_fraction: m* must be positive");
  if (std::abs(m) > m_star) throw std::domain_error("phase_fraction: |m| must not exceed m*");
  return (m_star + m) / (2.0 * m_star);
}

double signed_area(const std::vector<Point>& polygon) {
  double total = 0.0;
  for (std::size_t k = 0; k < polygon.size(); ++k) {
    const Point p = polygon[k];
    const Point q = polygon[(k + 1) % polygon.size()];
    total += p.x * q.y - q.x * p.y;
  }
  return 0.5 * total;
}

double perimeter(const std::vector<Point>& polygon) {
  double total = 0.0;
  for (std::size_t k = 0; k < polygon.size(); ++k) {
    const Point p = polygon[k];
    const Point q = polygon[(k + 1) % polygon.size()];
    total += std::hypot(q.x - p.x, q.y - p.y);
  }
  return total;
}

Point centroid(const std::vector<Point>& polygon) {
  const double a = signed_area(polygon);
  if (a == 0.0) throw std::domain_error("centroid: zero-area polygon");
  double cx = 0.0;
  double cy = 0.0;
  for (std::size_t k = 0; k < polygon.size(); ++k) {
    const Point p = polygon[k];
    const Point q = polygon[(k + 1) % polygon.size()];
    const double c = p.x * q.y - q.x * p.y;
    cx += (p.x + q.x) * c;
    cy += (p.y + q.y) * c;
  }
  return {cx / (6.0 * a), cy / (6.0 * a)};
}

double first_moment_y(const std::vector<Point>& polygon) {
  double total = 0.0;
  for (std::size_t k = 0; k < polygon.size(); ++k) {
    const Point p = polygon[k];
    const Point q = polygon[(k + 1) % polygon.size()];
    total += (p.x * q.y - q.x * p.y) * (p.y + q.y);
  }
  return total / 6.0;
}

bool is_simple(const std::vector<Point>& polygon) {
  const std::size_t n = polygon.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = polygon[i];
    const Point b = polygon[(i + 1) % n];
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (segments_cross(a, b, polygon[j], polygon[(j + 1) % n])) return false;
    }
  }
  return true;
}

double isoperimetric_ratio(const std::vector<Point>& polygon) {
  const double p = perimeter(polygon);
  return p * p / (4.0 * std::numbers::pi * signed_area(polygon));
}

double diameter(const std::vector<Point>& polygon) {
  double best = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    for (std::size_t j = i + 1; j < polygon.size(); ++j) {
      best = std::max(best, std::hypot(polygon[i].x - polygon[j].x, polygon[i].y - polygon[j].y));
    }
  }
  return best;
}

std::vector<Point> translated(const std::vector<Point>& polygon, double dx, double dy) {
  std::vector<Point> out(polygon);
  for (auto& p : out) {
    p.x += dx;
    p.y += dy;
  }
  return out;
}

double hausdorff_distance(const std::vector<Point>& a, const std::vector<Point>& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("hausdorff_distance: empty polygon");
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

std::vector<Point> wulff_body(const SurfaceTension& tau, int directions) {
  if (directions < 3) throw std::invalid_argument("wulff: need at least 3 directions");
  double bound = 0.0;
  for (int k = 0; k < directions; ++k) {
    const double v = tau.at_angle(kTwoPi * k / directions);
    if (!(v > 0.0)) throw std::invalid_argument("wulff: surface tension must be positive");
    bound = std::max(bound, v);
  }
  const double r = 4.0 * bound;
  std::vector<Point> poly{{-r, -r}, {r, -r}, {r, r}, {-r, r}};
  for (int k = 0; k < directions; ++k) {
    const double theta = kTwoPi * k / directions;
    const double nx = std::cos(theta);
    const double ny = std::sin(theta);
    poly = clip(poly, nx, ny, tau(nx, ny));
  }
  // Drop vertices that coincide with their predecessor.
  std::vector<Point> out;
  for (const auto& p : poly) {
    if (!out.empty() && std::hypot(p.x - out.back().x, p.y - out.back().y) <= 1e-14 * r) continue;
    out.push_back(p);
  }
  while (out.size() > 1 && std::hypot(out.front().x - out.back().x, out.front().y - out.back().y) <= 1e-14 * r) {
    out.pop_back();
  }
  return out;
}

DropletShape wulff_shape(const SurfaceTension& tau, double area, int directions) {
  if (!(area > 0.0) || area > 1.0) throw std::domain_error("wulff_shape: area must lie in (0, 1]");
  auto body = wulff_body(tau, directions);
  const double scale = std::sqrt(area / signed_area(body));
  for (auto& p : body) {
    p.x *= scale;
    p.y *= scale;
  }
  const Point c = centroid(body);
  body = translated(body, 0.5 - c.x, 0.5 - c.y);
  for (const auto& p : body) {
    if (p.x < -1e-12 || p.x > 1.0 + 1e-12 || p.y < -1e-12 || p.y > 1.0 + 1e-12) {
      throw std::domain_error("wulff_shape: area infeasible in the unit box");
    }
  }
  return {std::move(body), area, 0.0};
}

double surface_energy(const std::vector<Point>& polygon, const SurfaceTension& tau) {
  double total = 0.0;
  for (std::size_t k = 0; k < polygon.size(); ++k) {
    const Point p = polygon[k];
    const Point q = polygon[(k + 1) % polygon.size()];
    total += edge_energy(tau, q.x - p.x, q.y - p.y);
  }
  return total;
}

double droplet_energy(const std::vector<Point>& polygon, const SurfaceTension& tau, double gamma,
                      double m_star) {
  return surface_energy(polygon, tau) + 2.0 * m_star * gamma * first_moment_y(polygon);
}

double droplet_energy(const DropletShape& shape, const SurfaceTension& tau, double gamma,
                      double m_star) {
  return droplet_energy(shape.polygon, tau, gamma, m_star);
}

MinimizeResult minimize_droplet(const SurfaceTension& tau, double gamma, double m_star,
                                double area, const MinimizeOptions& options) {
  if (!(area > 0.0) || area >= 1.0) throw std::domain_error("minimize_droplet: area must lie in (0, 1)");
  if (options.vertices < 8) throw std::invalid_argument("minimize_droplet: need at least 8 vertices");
  if (!(options.initial_aspect > 0.0)) throw std::invalid_argument("minimize_droplet: aspect must be positive");

  // Coarse-to-fine: faceted optima are reached quickly with few vertices, and
  // midpoint insertion leaves energy and area unchanged.
  int coarse = options.vertices;
  while (coarse % 2 == 0 && coarse / 2 >= options.coarsest_vertices) coarse /= 2;

  auto poly = ellipse(coarse, area, options.initial_aspect, options.initial_centre);
  clamp_to_box(poly);
  if (!project_area(poly, area, options.area_tolerance) || !is_simple(poly)) {
    throw std::domain_error("minimize_droplet: initial shape infeasible");
  }
  const double gravity = 2.0 * m_star * gamma;
  MinimizeResult result;
  result.energy = droplet_energy(poly, tau, gamma, m_star);
  result.trace.push_back(result.energy);
  double smoothing = kCoarsestSmoothing;
  while (true) {
    double step = options.initial_step;
    int rejections = 0;
    const std::size_t level_start = result.trace.size() - 1;
    bool level_converged = false;
    while (result.iterations < options.max_iterations) {
      ++result.iterations;
      const auto dir = descent_direction(poly, energy_gradient(poly, tau, gravity, smoothing));
      auto trial = poly;
      for (std::size_t k = 0; k < trial.size(); ++k) {
        trial[k].x += step * dir[k].x;
        trial[k].y += step * dir[k].y;
      }
      clamp_to_box(trial);
      bool ok = project_area(trial, area, options.area_tolerance) && is_simple(trial);
      double energy = 0.0;
      if (ok) {
        energy = droplet_energy(trial, tau, gamma, m_star);
        ok = energy <= result.energy;
      }
      if (!ok) {
        step *= 0.5;
        if (++rejections > 60) {
          // The smoothed gradient is no longer a descent direction; sharpen it.
          smoothing *= 0.1;
          if (smoothing < kFinestSmoothing) {
            throw std::runtime_error("minimize_droplet: no admissible step found");
          }
          step = options.initial_step;
          rejections = 0;
        }
        continue;
      }
      rejections = 0;
      poly = std::move(trial);
      result.energy = energy;
      result.trace.push_back(energy);
      step *= 1.2;
      const std::size_t last = result.trace.size() - 1;
      if (last - level_start >= kConvergenceWindow &&
          result.trace[last - kConvergenceWindow] - energy <= options.tolerance * std::abs(energy)) {
        level_converged = true;
        break;
      }
    }
    if (!level_converged) break;
    if (static_cast<int>(poly.size()) >= options.vertices) {
      result.converged = true;
      break;
    }
    std::vector<Point> fine;
    fine.reserve(2 * poly.size());
    for (std::size_t k = 0; k < poly.size(); ++k) {
      const Point p = poly[k];
      const Point q = poly[(k + 1) % poly.size()];
      fine.push_back(p);
      fine.push_back({0.5 * (p.x + q.x), 0.5 * (p.y + q.y)});
    }
    poly = std::move(fine);
  }
  result.shape = {std::move(poly), area, 0.0};
  return result;
}

}  // namespace gravising::droplet
