#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "gravising/gchain.hpp"

namespace gc = gravising::gchain;
using gc::GaussianChain;

namespace {

Eigen::MatrixXd dense_precision(int n, double mass) {
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    q(k, k) = 1.0 + mass * mass;
    if (k + 1 < n) q(k, k + 1) = q(k + 1, k) = -0.5;
  }
  return q;
}

double bridge_conditioned_limit(double t1, double t2) {
  if (t1 > t2) std::swap(t1, t2);
  return 2 * t1 * (1 - t2) - 6 * t1 * t2 * (1 - t1) * (1 - t2);
}

}  // namespace

TEST_CASE("nu") {
  CHECK(gc::nu(0.0) == 0.0);
  CHECK(gc::nu(1.0) == doctest::Approx(std::log(2.0 + std::sqrt(3.0))).epsilon(1e-14));
  CHECK(gc::nu(1.0) == doctest::Approx(std::acosh(2.0)).epsilon(1e-14));
  CHECK(std::abs(gc::nu(1e-4) / (std::sqrt(2.0) * 1e-4) - 1.0) <= 1e-6);
  for (double m = 0.0; m < 5.0; m += 0.25) CHECK(gc::nu(m + 0.25) > gc::nu(m));
  CHECK_THROWS_AS(gc::nu(-1.0), std::invalid_argument);
}

TEST_CASE("covariance closed forms against dense inversion") {
  CHECK(gc::covariance({1, 0.0, false}, 1, 1) == 1.0);
  CHECK(gc::covariance({3, 0.0, false}, 1, 2) == 1.0);
  for (int n : {1, 2, 7, 60, 200}) {
    for (double mass : {0.0, 1e-3, 0.1, 1.0, 5.0}) {
      const Eigen::MatrixXd inv = dense_precision(n, mass).inverse();
      const GaussianChain chain{n, mass, false};
      double worst = 0.0;
      for (int i = 1; i <= n; ++i) {
        for (int j = 1; j <= n; ++j) {
          const double ref = inv(i - 1, j - 1);
          worst = std::max(worst, std::abs(gc::covariance(chain, i, j) - ref) / (std::abs(ref) + 1e-300));
        }
      }
      INFO("n=", n, " mass=", mass);
      CHECK(worst <= 1e-10);
    }
  }
  CHECK_THROWS_AS(gc::covariance({5, 0.1, false}, 0, 2), std::out_of_range);
  CHECK(gc::covariance({5, 0.1, false}, 4, 2) == gc::covariance({5, 0.1, false}, 2, 4));
}

TEST_CASE("large masses and long chains stay finite") {
  const GaussianChain chain{1 << 16, 2.0 / 256.0, false};
  const double v = gc::covariance(chain, 1 << 15, 1 << 15);
  CHECK(std::isfinite(v));
  CHECK(v == doctest::Approx(1.0 / std::sinh(gc::nu(chain.mass))).epsilon(1e-10));
  CHECK(std::isfinite(gc::covariance({4000, 50.0, false}, 1, 4000)));
}

TEST_CASE("covariance sandwich") {
  CHECK_NOTHROW(gc::covariance_bounds_check({100, 0.5, false}, 50, 60));
  CHECK_NOTHROW(gc::covariance_bounds_check({100, 0.5, false}, 1, 100));
  for (double mass : {0.1, 1.0, 3.0}) {
    for (int i = 1; i <= 40; ++i) {
      for (int j = i; j <= 40; ++j) {
        const auto b = gc::covariance_bounds_check({40, mass, false}, i, j);
        CHECK(b.lower <= b.value * (1 + 1e-15));
        CHECK(b.value <= b.upper * (1 + 1e-15));
      }
    }
  }
  CHECK_THROWS_AS(gc::covariance_bounds_check({10, 0.0, false}, 1, 2), std::invalid_argument);
}

TEST_CASE("signed area covariances") {
  const auto a2 = gc::area_covariances({2, 0.0, false});
  CHECK(a2.area_variance == 4.0);
  double total = 0.0;
  for (int i = 1; i <= 2; ++i) {
    for (int j = 1; j <= 2; ++j) total += gc::covariance({2, 0.0, false}, i, j);
  }
  CHECK(total == doctest::Approx(4.0).epsilon(1e-15));
  const GaussianChain chain{50, 0.2, false};
  const Eigen::MatrixXd inv = dense_precision(50, 0.2).inverse();
  const auto area = gc::area_covariances(chain);
  for (int i = 0; i < 50; ++i) {
    CHECK(area.with_height[static_cast<std::size_t>(i)] == doctest::Approx(inv.row(i).sum()).epsilon(1e-10));
  }
  CHECK(area.area_variance == doctest::Approx(inv.sum()).epsilon(1e-10));
}

TEST_CASE("conditioned covariance") {
  const int n = 1000;
  const GaussianChain chain{n, 0.0, true};
  const gc::CovarianceKernel kernel(chain);
  for (double t1 : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    for (double t2 : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      const int i = static_cast<int>(std::floor(t1 * n));
      const int j = static_cast<int>(std::floor(t2 * n));
      CHECK(std::abs(kernel(i, j) / n - bridge_conditioned_limit(t1, t2)) <= 1e-2);
    }
  }
  CHECK(bridge_conditioned_limit(0.5, 0.5) == doctest::Approx(0.125));
  for (double mass : {0.0, 0.05, 1.0}) {
    const gc::CovarianceKernel k({100, mass, true});
    for (int i = 1; i <= 100; ++i) CHECK(k.conditioned(i, i) <= k.unconditioned(i, i));
    CHECK(gc::conditioned_covariance({100, mass, true}, 10, 20) == k.conditioned(10, 20));
  }
}

TEST_CASE("conditioned kernels are positive semidefinite") {
  std::mt19937_64 rng(11);
  for (double mass : {0.0, 0.02, 0.5}) {
    const gc::CovarianceKernel k({300, mass, true});
    std::uniform_int_distribution<int> pick(1, 300);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<int> idx(10);
      for (auto& v : idx) v = pick(rng);
      Eigen::MatrixXd c(10, 10);
      for (int a = 0; a < 10; ++a) {
        for (int b = 0; b < 10; ++b) c(a, b) = k(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
      }
      CHECK((c - c.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(c).eigenvalues().minCoeff() >= -1e-9);
    }
  }
}

TEST_CASE("rescaled processes") {
  const GaussianChain bridge{2000, 0.0, false};
  // 2 t1 (1 - t2) at (1/4, 3/4).
  CHECK(std::abs(gc::rescaled_covariance(bridge, gc::Scaling::Bridge, 0.25, 0.75) - 0.125) <= 5e-3);
  const gc::RescaledProcess p(bridge, gc::Scaling::Bridge);
  const auto s = p.stencil(0.25);
  CHECK(s.index == 500);
  CHECK(s.w1 == 0.0);
  CHECK(p.covariance(0.25, 0.75) == doctest::Approx(p.kernel()(500, 1500) / 2000.0).epsilon(1e-14));
  // Affine between grid points.
  const double a = p.covariance(0.2505, 0.5);
  CHECK(a == doctest::Approx(0.5 * (p.covariance(0.25, 0.5) + p.covariance(0.251, 0.5))).epsilon(1e-12));

  const int n = 4096;
  const auto window = GaussianChain::with_scaled_mass(n, 1.0, false);
  const gc::RescaledProcess w(window, gc::Scaling::Window, 1.0);
  CHECK(std::abs(w.covariance(0.0, 0.0) / (1.0 / std::sqrt(2.0)) - 1.0) <= 0.02);
  for (double shift : {-0.5, 0.25, 1.0}) {
    CHECK(std::abs(w.covariance(shift, shift + 0.5) - w.covariance(0.0, 0.5)) <= 1e-3);
  }
  CHECK_THROWS_AS(gc::RescaledProcess(GaussianChain::with_scaled_mass(101, 1.0), gc::Scaling::Window, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(gc::RescaledProcess(GaussianChain{100, 0.3, false}, gc::Scaling::Window, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(w.covariance(0.0, 1e6), std::out_of_range);
}

TEST_CASE("Ornstein-Uhlenbeck limit") {
  CHECK(gc::ou_covariance(1.0, 0.3, 0.3) == doctest::Approx(1.0 / std::sqrt(2.0)));
  double prev = gc::ou_covariance(1.0, 0.0, 0.0);
  for (double t = 0.5; t < 20.0; t += 0.5) {
    const double v = gc::ou_covariance(1.0, 0.0, t);
    CHECK(v < prev);
    prev = v;
  }
  CHECK_THROWS_AS(gc::ou_covariance(0.0, 0.0, 1.0), std::invalid_argument);
  const int n = 4096;
  const gc::RescaledProcess w(GaussianChain::with_scaled_mass(n, 1.0), gc::Scaling::Window, 1.0);
  for (double dt : {0.0, 0.3, 0.7, 1.0}) {
    CHECK(std::abs(w.covariance(-0.2, -0.2 + dt) / gc::ou_covariance(1.0, 0.0, dt) - 1.0) <= 0.02);
  }
  const std::vector<double> times{-0.5, 0.0, 0.4};
  const std::vector<double> lambdas{0.7, -1.2, 0.5};
  CHECK(std::abs(gc::characteristic_function(w, times, lambdas) -
                 gc::ou_characteristic_function(1.0, times, lambdas)) <= 1e-2);
}

TEST_CASE("gradient moment bound") {
  for (double mass : {0.0, 0.3, 2.0}) {
    const gc::CovarianceKernel k({60, mass, false});
    for (int i = 0; i <= 61; ++i) {
      for (int j = 0; j <= 61; ++j) {
        const auto r = gc::gradient_moment_check(k, i, j);
        CHECK(r.fourth_moment <= r.bound);
      }
    }
  }
  const auto diag = gc::gradient_moment_check({60, 0.0, false}, 7, 7);
  CHECK(diag.fourth_moment == 0.0);
  CHECK(diag.bound == 0.0);
  const auto adj = gc::gradient_moment_check({5000, 0.0, false}, 2500, 2501);
  CHECK(adj.fourth_moment <= 12.0);
  CHECK_THROWS_AS(gc::gradient_moment_check({60, 0.0, false}, -1, 3), std::out_of_range);
  CHECK_THROWS_AS(gc::gradient_moment_check({60, 0.0, false}, 3, 62), std::out_of_range);
}

TEST_CASE("canonical and grand canonical kernels agree in the bulk") {
  const int n = 4096;
  const gc::CovarianceKernel k(GaussianChain::with_scaled_mass(n, 1.0, true));
  CHECK(gc::canonical_covariance_agreement(k, n / 2, n / 2) <= 0.05);
  double prev = gc::canonical_covariance_agreement(
      GaussianChain::with_scaled_mass(1024, 1.0, true), 512, 512 + 16);
  for (int e = 11; e <= 14; ++e) {
    const int m = 1 << e;
    const double dev = gc::canonical_covariance_agreement(
        GaussianChain::with_scaled_mass(m, 1.0, true), m / 2, m / 2 + static_cast<int>(std::sqrt(m) / 2));
    const double ratio = dev / prev;
    CHECK(ratio >= 1.0 / (std::sqrt(2.0) * 1.5));
    CHECK(ratio <= 1.5 / std::sqrt(2.0));
    prev = dev;
  }
  CHECK_THROWS_AS(gc::canonical_covariance_agreement(k, 3, 4), std::out_of_range);
  CHECK_THROWS_AS(gc::canonical_covariance_agreement(GaussianChain{100, 0.0, true}, 50, 50),
                  std::invalid_argument);
}

TEST_CASE("exact sampler") {
  const int n = 100;
  const std::size_t count = 100000;
  {
    const auto xs = gc::sample({n, 0.0, true}, 5, 200);
    for (const auto& x : xs) CHECK(std::abs(std::accumulate(x.begin(), x.end(), 0.0)) <= 1e-8);
  }
  for (const auto& [chain, i, j] : {std::tuple{GaussianChain{n, 0.0, false}, 50, 50},
                                    std::tuple{GaussianChain{n, 0.5, false}, 30, 60},
                                    std::tuple{GaussianChain{n, 0.05, true}, 20, 70}}) {
    const gc::ChainSampler sampler(chain);
    std::vector<double> x(static_cast<std::size_t>(n));
    double acc = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
      sampler.draw(42, k, x);
      acc += x[static_cast<std::size_t>(i - 1)] * x[static_cast<std::size_t>(j - 1)];
    }
    const gc::CovarianceKernel kernel(chain);
    const double exact = kernel(i, j);
    const double se = std::sqrt((kernel(i, i) * kernel(j, j) + exact * exact) / count);
    INFO("mass=", chain.mass, " constrained=", chain.constrained);
    CHECK(std::abs(acc / count - exact) <= 3.0 * se);
  }
}

TEST_CASE("sampling is deterministic and thread independent") {
  const GaussianChain chain{64, 0.2, true};
  const auto a = gc::sample(chain, 9, 50, 1);
  const auto b = gc::sample(chain, 9, 50, 4);
  CHECK(a == b);
  CHECK(a != gc::sample(chain, 10, 50, 1));
  std::vector<double> x(64);
  gc::ChainSampler(chain).draw(9, 17, x);
  CHECK(x == a[17]);
}
