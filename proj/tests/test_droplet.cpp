#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "gravising/droplet.hpp"

namespace dr = gravising::droplet;
using dr::Point;

namespace {

std::vector<Point> square(double x0, double y0, double side) {
  return {{x0, y0}, {x0 + side, y0}, {x0 + side, y0 + side}, {x0, y0 + side}};
}

// Intersection of the four half-planes |x - 1/2| <= s/2, |y - 1/2| <= s/2.
std::vector<Point> ell1_oracle(double area) {
  const double s = std::sqrt(area);
  return square(0.5 - s / 2, 0.5 - s / 2, s);
}

std::vector<Point> align_centroids(const std::vector<Point>& a, const std::vector<Point>& b) {
  const auto ca = dr::centroid(a);
  const auto cb = dr::centroid(b);
  return dr::translated(a, cb.x - ca.x, cb.y - ca.y);
}

std::vector<Point> random_star(std::mt19937_64& rng, int vertices, double area) {
  std::uniform_real_distribution<double> radius(0.6, 1.4);
  std::vector<Point> p(static_cast<std::size_t>(vertices));
  for (int k = 0; k < vertices; ++k) {
    const double t = 2 * std::numbers::pi * k / vertices;
    const double r = radius(rng);
    p[static_cast<std::size_t>(k)] = {r * std::cos(t), r * std::sin(t)};
  }
  const double scale = std::sqrt(area / dr::signed_area(p));
  for (auto& q : p) q = {0.5 + scale * q.x, 0.5 + scale * q.y};
  return p;
}

}  // namespace

TEST_CASE("polygon utilities") {
  const auto sq = square(0, 0, 1);
  CHECK(dr::signed_area(sq) == 1.0);
  CHECK(dr::perimeter(sq) == 4.0);
  CHECK(dr::first_moment_y(sq) == doctest::Approx(0.5));
  CHECK(dr::centroid(sq).x == doctest::Approx(0.5));
  CHECK(dr::is_simple(sq));
  const std::vector<Point> bow{{0, 0}, {1, 1}, {1, 0}, {0, 1}};
  CHECK(!dr::is_simple(bow));
  CHECK(dr::hausdorff_distance(sq, dr::translated(sq, 0.1, 0.0)) == doctest::Approx(0.1));
  CHECK(dr::diameter(sq) == doctest::Approx(std::sqrt(2.0)));
  CHECK(dr::phase_fraction(0.9, 0.0) == 0.5);
  CHECK(dr::phase_fraction(0.9, 0.9) == 1.0);
}

TEST_CASE("droplet energy") {
  const auto tau = dr::SurfaceTension::isotropic();
  const auto sq = square(0, 0, 1);
  CHECK(dr::droplet_energy(sq, tau, 0.0, 1.0) == doctest::Approx(4.0));
  CHECK(dr::droplet_energy(sq, tau, 3.0, 1.0) == doctest::Approx(4.0 + 2 * 3.0 * 0.5));
  const auto small = square(0.1, 0.2, 0.3);
  CHECK(dr::droplet_energy(dr::translated(small, 0.4, 0.0), tau, 2.0, 0.8) ==
        doctest::Approx(dr::droplet_energy(small, tau, 2.0, 0.8)).epsilon(1e-14));
  // Zero-length edges carry no energy.
  auto repeated = sq;
  repeated.insert(repeated.begin() + 1, repeated[0]);
  CHECK(dr::droplet_energy(repeated, dr::SurfaceTension::ell1(), 0.0, 1.0) == doctest::Approx(4.0));
}

TEST_CASE("Wulff shapes") {
  const double area = 0.2;
  const auto disc = dr::wulff_shape(dr::SurfaceTension::isotropic(), area);
  CHECK(dr::signed_area(disc.polygon) == doctest::Approx(area).epsilon(1e-12));
  CHECK(std::abs(dr::perimeter(disc.polygon) / (2 * std::sqrt(std::numbers::pi * area)) - 1) <= 1e-3);
  CHECK(disc.polygon.size() == 720);

  const auto sq = dr::wulff_shape(dr::SurfaceTension::ell1(), area);
  CHECK(dr::hausdorff_distance(sq.polygon, ell1_oracle(area)) <= 1e-9);

  const auto doubled = dr::wulff_shape(dr::SurfaceTension::isotropic().scaled(2.0), area);
  CHECK(dr::hausdorff_distance(doubled.polygon, disc.polygon) <= 1e-12);
  const auto body = dr::wulff_body(dr::SurfaceTension::ell1().scaled(2.0));
  CHECK(dr::signed_area(body) == doctest::Approx(4.0 * dr::signed_area(dr::wulff_body(dr::SurfaceTension::ell1()))));
  CHECK_THROWS_AS(dr::wulff_shape(dr::SurfaceTension::isotropic(), 0.9), std::domain_error);
  CHECK_THROWS_AS(dr::wulff_shape(dr::SurfaceTension::isotropic(), -1.0), std::domain_error);
}

TEST_CASE("Wulff shape beats random star-shaped competitors") {
  std::mt19937_64 rng(21);
  for (const auto& tau : {dr::SurfaceTension::isotropic(), dr::SurfaceTension::ell1()}) {
    const double wulff = dr::droplet_energy(dr::wulff_shape(tau, 0.15), tau, 0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
      CHECK(wulff <= dr::droplet_energy(random_star(rng, 64, 0.15), tau, 0.0, 1.0));
    }
  }
}

TEST_CASE("tabulated surface tension") {
  std::istringstream csv("# angle in radians\nangle,tau\n0,1\n1.5707963267948966,2\n3.141592653589793,1\n4.71238898038469,2\n");
  const auto tau = dr::SurfaceTension::tabulated_from_csv(csv);
  CHECK(tau(1.0, 0.0) == doctest::Approx(1.0));
  CHECK(tau(0.0, 1.0) == doctest::Approx(2.0));
  CHECK(tau.at_angle(std::numbers::pi / 4) == doctest::Approx(1.5));
  CHECK(tau.at_angle(7 * std::numbers::pi / 4) == doctest::Approx(1.5));
  std::istringstream bad("theta,value\n0,1\n");
  CHECK_THROWS_AS(dr::SurfaceTension::tabulated_from_csv(bad), std::invalid_argument);
  CHECK_THROWS_AS(dr::SurfaceTension::tabulated({0.0, 1.0}, {1.0, -1.0}), std::invalid_argument);
}

TEST_CASE("minimization without gravity gives the Wulff shape") {
  const double area = 0.1;
  const auto tau = dr::SurfaceTension::isotropic();
  const auto r = dr::minimize_droplet(tau, 0.0, 1.0, area);
  CHECK(r.converged);
  CHECK(dr::isoperimetric_ratio(r.shape.polygon) <= 1.001);
  CHECK(std::abs(r.energy / (2 * std::sqrt(std::numbers::pi * area)) - 1) <= 2e-3);
  for (std::size_t k = 1; k < r.trace.size(); ++k) CHECK(r.trace[k] <= r.trace[k - 1]);
  CHECK(std::abs(dr::signed_area(r.shape.polygon) - area) <= 1e-8);
  CHECK(dr::is_simple(r.shape.polygon));

  for (const auto& t : {dr::SurfaceTension::isotropic(), dr::SurfaceTension::ell1()}) {
    const auto w = dr::wulff_shape(t, area).polygon;
    const auto m = dr::minimize_droplet(t, 0.0, 1.0, area).shape.polygon;
    INFO(t.name());
    CHECK(dr::hausdorff_distance(align_centroids(m, w), w) <= 0.01 * dr::diameter(w));
  }
}

TEST_CASE("gravity lowers and flattens the droplet") {
  const auto tau = dr::SurfaceTension::isotropic();
  double previous = dr::centroid(dr::minimize_droplet(tau, 0.0, 0.9, 0.1).shape.polygon).y;
  for (double gamma : {1.0, 4.0, 16.0}) {
    const auto r = dr::minimize_droplet(tau, gamma, 0.9, 0.1);
    const double cy = dr::centroid(r.shape.polygon).y;
    CHECK(cy < previous);
    previous = cy;
    for (const auto& p : r.shape.polygon) CHECK(p.y >= 0.0);
  }
  const auto strong = dr::minimize_droplet(tau, 16.0, 0.9, 0.1).shape.polygon;
  double width = 0.0;
  double height = 0.0;
  for (const auto& p : strong) {
    for (const auto& q : strong) {
      width = std::max(width, std::abs(p.x - q.x));
      height = std::max(height, std::abs(p.y - q.y));
    }
  }
  CHECK(width > 1.2 * height);
}

TEST_CASE("minimizer input validation") {
  const auto tau = dr::SurfaceTension::isotropic();
  CHECK_THROWS_AS(dr::minimize_droplet(tau, 0.0, 1.0, 1.5), std::domain_error);
  dr::MinimizeOptions o;
  o.vertices = 4;
  CHECK_THROWS_AS(dr::minimize_droplet(tau, 0.0, 1.0, 0.1, o), std::invalid_argument);
}
