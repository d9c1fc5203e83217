#pragma once

// Two-dimensional equilibrium crystal shapes: Wulff construction and the
// fixed-area minimization of surface energy plus a gravity term,
//   E(V) = sum over edges tau(outer normal) |edge| + 2 m* gamma int_V y dA,
// inside the unit box. gamma > 0 penalizes height and pulls the droplet down.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <istream>
#include <string>
#include <vector>

namespace gravising::droplet {

struct Point {
  double x;
  double y;
};

class SurfaceTension {
 public:
  using Rule = std::function<double(double nx, double ny)>;

  SurfaceTension(std::string name, Rule rule, bool even = true);

  static SurfaceTension isotropic(double value = 1.0);
  /// tau(n) = |n_1| + |n_2|.
  static SurfaceTension ell1();
  /// Periodic linear interpolation in the normal angle; angles in radians,
  /// strictly increasing within [0, 2 pi).
  static SurfaceTension tabulated(std::vector<double> angles, std::vector<double> values);
  /// CSV with header "angle,tau".
  static SurfaceTension tabulated_from_csv(std::istream& in);
  static SurfaceTension tabulated_from_csv(const std::filesystem::path& path);

  const std::string& name() const { return name_; }
  bool even() const { return even_; }
  double operator()(double nx, double ny) const { return rule_(nx, ny); }
  double at_angle(double theta) const;
  /// Same tension multiplied by a positive constant.
  SurfaceTension scaled(double factor) const;

 private:
  std::string name_;
  Rule rule_;
  bool even_;
};

/// Counter-clockwise oriented simple polygon.
struct DropletShape {
  std::vector<Point> polygon;
  double area = 0.0;
  double phase_fraction = 0.0;
};

/// Volume fraction (m* + m) / (2 m*) of the + phase.
double phase_fraction(double m_star, double m);

double signed_area(const std::vector<Point>& polygon);
double perimeter(const std::vector<Point>& polygon);
Point centroid(const std::vector<Point>& polygon);
/// int_P y dA for a counter-clockwise polygon.
double first_moment_y(const std::vector<Point>& polygon);
/// True if no two non-adjacent edges intersect.
bool is_simple(const std::vector<Point>& polygon);
double isoperimetric_ratio(const std::vector<Point>& polygon);
double diameter(const std::vector<Point>& polygon);
std::vector<Point> translated(const std::vector<Point>& polygon, double dx, double dy);
/// Symmetric Hausdorff distance between the boundaries.
double hausdorff_distance(const std::vector<Point>& a, const std::vector<Point>& b);

/// Polygon intersection of {x . n <= tau(n)} over `directions` uniform normals,
/// scaled to `area` and centred at (1/2, 1/2). Throws std::domain_error if it
/// does not fit in the unit box.
DropletShape wulff_shape(const SurfaceTension& tau, double area, int directions = 720);
/// Wulff body before normalization (support values tau itself).
std::vector<Point> wulff_body(const SurfaceTension& tau, int directions = 720);

double surface_energy(const std::vector<Point>& polygon, const SurfaceTension& tau);
double droplet_energy(const DropletShape& shape, const SurfaceTension& tau, double gamma,
                      double m_star);
double droplet_energy(const std::vector<Point>& polygon, const SurfaceTension& tau, double gamma,
                      double m_star);

struct MinimizeOptions {
  int vertices = 256;
  int coarsest_vertices = 16;   // first level of the coarse-to-fine refinement
  double initial_aspect = 1.5;  // initial ellipse, width / height
  Point initial_centre{0.5, 0.5};
  int max_iterations = 200000;
  double tolerance = 1e-9;      // relative energy decrease over 50 accepted steps
  double initial_step = 1e-3;
  double area_tolerance = 1e-12;
};

struct MinimizeResult {
  DropletShape shape;
  double energy = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;  // energy after each accepted step, starting with the initial one
};

/// Projected gradient descent on the vertices with area re-projection by a
/// uniform normal offset and clamping to the unit box, refined by midpoint
/// insertion from `coarsest_vertices` up to `vertices`.
MinimizeResult minimize_droplet(const SurfaceTension& tau, double gamma, double m_star,
                                double area, const MinimizeOptions& options = {});

}  // namespace gravising::droplet
