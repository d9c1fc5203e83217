#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <random>

#include "gravising/profile.hpp"
#include "random_profiles.hpp"

using gravising::FieldSpec;
using gravising::LatticeGeometry;
using gravising::thermo::Backend;
namespace pr = gravising::profile;

TEST_CASE("shifted mean magnetization against a direct sum") {
  const LatticeGeometry geom(64, 1, 8);
  const auto field = FieldSpec::gravitational(geom, -1.0);
  const auto b = Backend::exact_1d(1.0);
  for (double h : {-0.7, 0.0, 0.13, 0.5}) {
    double direct = 0.0;
    for (std::int64_t x = 0; x < geom.cell_count(); ++x) {
      direct += b.magnetization(-1.0 * (geom.cell_height(x)) - h);
    }
    direct /= static_cast<double>(geom.cell_count());
    const auto value = pr::mean_magnetization_at_shift(field, b, h);
    CHECK(value.is_point());
    CHECK(std::abs(value.lower - direct) <= 1e-12);
  }
  const auto c = FieldSpec::constant(geom, 0.3);
  CHECK(pr::mean_magnetization_at_shift(c, b, 0.1).lower == b.magnetization(0.3 - 0.1));
  CHECK(pr::mean_magnetization_at_shift(field, b, 1e6).lower == doctest::Approx(-1.0));
  CHECK(pr::mean_magnetization_at_shift(field, b, -1e6).lower == doctest::Approx(1.0));
}

TEST_CASE("shifted mean magnetization is an interval at atoms") {
  const LatticeGeometry geom(4, 1, 2);
  const auto field = FieldSpec::explicit_cells(geom, {0.0, 0.5});
  const auto mf = Backend::mean_field(1.0, 2);
  const double ms = mf.spontaneous_magnetization();
  const auto at0 = pr::mean_magnetization_at_shift(field, mf, 0.0);
  const double other = mf.magnetization(0.5);
  CHECK(at0.lower == doctest::Approx(0.5 * (-ms + other)));
  CHECK(at0.upper == doctest::Approx(0.5 * (ms + other)));
}

TEST_CASE("solve_hbar") {
  const LatticeGeometry geom(64, 1, 8);
  for (const auto& b : {Backend::exact_1d(1.0), Backend::mean_field(1.0, 2), Backend::mean_field(0.1, 1)}) {
    for (double g : {-1.0, 2.0}) {
      CHECK(pr::solve_hbar(FieldSpec::gravitational(geom, g), b, 0.0, 1e-10) ==
            doctest::Approx(g / 2).epsilon(1e-9));
    }
  }
  const auto ex = Backend::exact_1d(1.0);
  const auto c = FieldSpec::constant(geom, 0.3);
  for (double m : {-0.6, 0.2, 0.8}) {
    const double h = gravising::thermo::solve_field_by_bisection(ex, m, 1e-13);
    CHECK(pr::solve_hbar(c, ex, m, 1e-10) == doctest::Approx(0.3 - h).epsilon(1e-9));
  }
  // m inside the jump gap of M at the atom 0.
  const LatticeGeometry two(4, 1, 2);
  const auto field = FieldSpec::explicit_cells(two, {0.0, 0.02});
  const auto mf = Backend::mean_field(1.0, 2);
  const auto gap = pr::mean_magnetization_at_shift(field, mf, 0.0);
  REQUIRE(gap.lower < gap.upper);
  CHECK(pr::solve_hbar(field, mf, 0.5 * (gap.lower + gap.upper)) == 0.0);
  CHECK_THROWS_AS(pr::solve_hbar(field, mf, 1.0), std::domain_error);
}

TEST_CASE("optimal profile: constant field is uniform") {
  const LatticeGeometry geom(32, 2, 4);
  for (const auto& b : {Backend::exact_1d(0.7), Backend::mean_field(1.0, 2)}) {
    for (double m : {-0.3, 0.0, 0.6}) {
      const auto sol = pr::optimal_profile(FieldSpec::constant(geom, -0.2), b, m);
      for (double v : sol.profile.values) CHECK(v == doctest::Approx(m).epsilon(1e-12));
      CHECK(sol.profile.compatible());
    }
  }
}

TEST_CASE("optimal profile is the maximizer and is compatible") {
  const LatticeGeometry geom(64, 1, 8);
  const auto field = FieldSpec::gravitational(geom, -1.0);
  const auto b = Backend::exact_1d(1.0);
  const auto sol = pr::optimal_profile(field, b, 0.4);
  CHECK(sol.profile.compatible());
  CHECK(sol.plateau_cells.empty());
  for (std::int64_t x = 0; x < geom.cell_count(); ++x) {
    CHECK(sol.profile.values[static_cast<std::size_t>(x)] == b.magnetization(field.at_cell(x) - sol.hbar));
  }
  std::mt19937_64 rng(7);
  for (int k = 0; k < 1000; ++k) {
    auto q = sol.profile;
    q.values = gravising::testing::random_compatible(sol.profile.values, 0.4, 1.0 - 1e-12, rng, k % 2 == 1);
    REQUIRE(q.compatible());
    CHECK(pr::psi(field, b, q) <= sol.psi_value + 1e-9);
  }
}

TEST_CASE("off-plateau perturbations strictly lower psi") {
  const LatticeGeometry geom(64, 1, 8);
  const auto field = FieldSpec::gravitational(geom, -1.0);
  const auto b = Backend::exact_1d(1.0);
  const auto sol = pr::optimal_profile(field, b, 0.4);
  for (std::size_t x = 0; x + 1 < sol.profile.values.size(); ++x) {
    for (double eps : {1e-3, -1e-3}) {
      auto q = sol.profile;
      q.values[x] += eps;
      q.values[x + 1] -= eps;
      CHECK(pr::psi(field, b, q) < sol.psi_value);
    }
  }
}

TEST_CASE("coexistence plateau in a gravitational field") {
  const LatticeGeometry geom(64, 2, 8);
  const auto field = FieldSpec::gravitational(geom, -1.0);
  const auto mf = Backend::mean_field(1.0, 2);
  const double ms = mf.spontaneous_magnetization();
  // m = 0 puts h-bar = g/2 between two layers: no plateau cells.
  CHECK(pr::optimal_profile(field, mf, 0.0).plateau_cells.empty());
  std::vector<double> targets;
  for (int layer : {2, 5}) {
    const auto gap = pr::mean_magnetization_at_shift(field, mf, field.at_cell(layer * 8));
    REQUIRE(gap.lower < gap.upper);
    targets.push_back(0.5 * (gap.lower + gap.upper));
    targets.push_back(0.8 * gap.lower + 0.2 * gap.upper);
  }
  for (double m : targets) {
    const auto sol = pr::optimal_profile(field, mf, m);
    CHECK(sol.profile.compatible());
    REQUIRE(sol.plateau_value.has_value());
    CHECK(std::abs(*sol.plateau_value) <= ms);
    REQUIRE(!sol.plateau_cells.empty());
    // Mass balance on the plateau.
    const auto at = pr::mean_magnetization_at_shift(field, mf, sol.hbar);
    double excess = 0.0;
    for (auto x : sol.plateau_cells) excess += sol.profile.values[static_cast<std::size_t>(x)] - ms;
    const double cells = static_cast<double>(geom.cell_count());
    CHECK(excess == doctest::Approx(cells * (m - at.upper)).epsilon(1e-12));
    for (auto x : sol.plateau_cells) CHECK(field.at_cell(x) == sol.hbar);
  }
  const auto sol = pr::optimal_profile(field, mf, 0.0);
  REQUIRE(sol.interface_height.has_value());
  CHECK(*sol.interface_height == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("psi: zero field and shift identity") {
  const LatticeGeometry geom(64, 1, 8);
  const auto b = Backend::exact_1d(1.0);
  const auto zero = FieldSpec::constant(geom, 0.0);
  pr::MesoProfile q{geom, std::vector<double>(8, 0.3), 0.3};
  CHECK(pr::psi(zero, b, q) == doctest::Approx(-b.free_energy(0.3)).epsilon(1e-14));
  const auto field = FieldSpec::gravitational(geom, -1.0);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 20; ++k) {
    q.values = gravising::testing::random_compatible(q.values, 0.3, 0.99, rng, false);
    const double hbar = 0.17 * k;
    CHECK(std::abs(pr::psi(field.shifted(-hbar), b, q) - (pr::psi(field, b, q) - hbar * 0.3)) <= 1e-12);
  }
}

TEST_CASE("continuum gravity profile") {
  const auto b = Backend::exact_1d(1.0);
  const auto mf = Backend::mean_field(1.0, 2);
  const auto sym = pr::continuum_gravity_profile(mf, -1.0, 0.0);
  CHECK(sym.hbar() == doctest::Approx(-0.5).epsilon(1e-11));
  REQUIRE(sym.interface_height().has_value());
  CHECK(*sym.interface_height() == doctest::Approx(0.5).epsilon(1e-11));
  CHECK(!pr::continuum_gravity_profile(b, -1.0, 0.0).interface_height().has_value());
  for (double m : {-0.5, 0.0, 0.4}) {
    const auto c = pr::continuum_gravity_profile(b, -1.0, m);
    const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double s) { return c(s); }, 0.0, 1.0, 10, 1e-14);
    CHECK(std::abs(integral - m) <= 1e-8);
  }
  // Dense scan of the defining equation for m = 0.4.
  auto lhs = [&](double h) { return b.pressure(-1.0 - h) - b.pressure(-h) + 0.4; };
  double best = 0.0;
  double best_value = 1e300;
  for (double h = -1.5; h <= 0.5; h += 1e-6) {
    if (std::abs(lhs(h)) < best_value) {
      best_value = std::abs(lhs(h));
      best = h;
    }
  }
  CHECK(std::abs(pr::continuum_gravity_profile(b, -1.0, 0.4).hbar() - best) <= 1e-6);
  CHECK_THROWS_AS(pr::continuum_gravity_profile(b, 0.0, 0.1), std::domain_error);
}

TEST_CASE("discrete profile approaches the continuum profile") {
  const auto b = Backend::exact_1d(1.0);
  const LatticeGeometry geom(512, 1, 16);
  const auto field = FieldSpec::gravitational(geom, -1.0);
  const auto sol = pr::optimal_profile(field, b, 0.4);
  const auto c = pr::continuum_gravity_profile(b, -1.0, 0.4);
  double worst = 0.0;
  for (std::int64_t x = 0; x < geom.cell_count(); ++x) {
    worst = std::max(worst, std::abs(sol.profile.values[static_cast<std::size_t>(x)] - c(geom.cell_height(x))));
  }
  CHECK(worst <= 2e-2);
}
