#include "gravising/gchain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>

namespace gravising::gchain {
namespace {

constexpr double kSlack = 8.0 * std::numeric_limits<double>::epsilon();

void check_index(const GaussianChain& chain, int i) {
  if (i < 1 || i > chain.n) throw std::out_of_range("gchain: index outside 1..n");
}

// 1 - e^{-x} for x >= 0, accurate for small x.
double one_minus_exp(double x) { return -std::expm1(-x); }

double massive_covariance(int n, double nu_m, double sinh_nu, int i, int j) {
  // 2 sinh(nu i) sinh(nu (n+1-j)) / (sinh(nu) sinh(nu (n+1))), written with
  // 2 sinh(x) = e^x (1 - e^{-2x}) so that large nu n cannot overflow.
  const double a = nu_m * i;
  const double b = nu_m * (n + 1 - j);
  const double c = nu_m * (n + 1);
  return std::exp(-nu_m * (j - i)) * one_minus_exp(2.0 * a) * one_minus_exp(2.0 * b) /
         (sinh_nu * one_minus_exp(2.0 * c));
}

double massless_covariance(int n, int i, int j) {
  return 2.0 * i * static_cast<double>(n + 1 - j) / (n + 1);
}

// Solves Q u = 1 for the tridiagonal precision by forward elimination.
std::vector<double> solve_precision_ones(int n, double mass) {
  const double diag = 1.0 + mass * mass;
  const double off = -0.5;
  std::vector<double> cprime(static_cast<std::size_t>(n));
  std::vector<double> u(static_cast<std::size_t>(n));
  double denom = diag;
  cprime[0] = off / denom;
  u[0] = 1.0 / denom;
  for (int k = 1; k < n; ++k) {
    denom = diag - off * cprime[static_cast<std::size_t>(k - 1)];
    cprime[static_cast<std::size_t>(k)] = off / denom;
    u[static_cast<std::size_t>(k)] = (1.0 - off * u[static_cast<std::size_t>(k - 1)]) / denom;
  }
  for (int k = n - 2; k >= 0; --k) {
    u[static_cast<std::size_t>(k)] -=
        cprime[static_cast<std::size_t>(k)] * u[static_cast<std::size_t>(k + 1)];
  }
  return u;
}

}  // namespace

GaussianChain GaussianChain::with_scaled_mass(int n, double g, bool constrained) {
  if (n < 1) throw std::invalid_argument("gchain: n must be positive");
  return GaussianChain{n, g / std::sqrt(static_cast<double>(n)), constrained};
}

void validate(const GaussianChain& chain) {
  if (chain.n < 1) throw std::invalid_argument("gchain: n must be positive");
  if (!(chain.mass >= 0.0) || !std::isfinite(chain.mass)) {
    throw std::invalid_argument("gchain: mass must be finite and non-negative");
  }
}

double nu(double mass) {
  if (!(mass >= 0.0)) throw std::invalid_argument("nu: mass must be non-negative");
  const double m2 = mass * mass;
  return std::log1p(m2 + mass * std::sqrt(2.0 + m2));
}

double covariance(const GaussianChain& chain, int i, int j) {
  validate(chain);
  check_index(chain, i);
  check_index(chain, j);
  if (i > j) std::swap(i, j);
  if (chain.mass == 0.0) return massless_covariance(chain.n, i, j);
  const double v = nu(chain.mass);
  return massive_covariance(chain.n, v, std::sinh(v), i, j);
}

CovarianceBounds covariance_bounds_check(const GaussianChain& chain, int i, int j) {
  validate(chain);
  if (chain.mass == 0.0) {
    throw std::invalid_argument("covariance_bounds_check: not applicable to the massless chain");
  }
  check_index(chain, i);
  check_index(chain, j);
  if (i > j) std::swap(i, j);
  const double v = nu(chain.mass);
  const double bulk = std::exp(-v * (j - i)) / std::sinh(v);
  CovarianceBounds out{};
  out.lower = one_minus_exp(2.0 * v * i) * one_minus_exp(2.0 * v * (chain.n + 1 - j)) * bulk;
  out.upper = bulk / one_minus_exp(2.0 * v * (chain.n + 1));
  out.value = covariance(chain, i, j);
  if (out.value < out.lower * (1.0 - kSlack) || out.value > out.upper * (1.0 + kSlack)) {
    throw std::logic_error("covariance_bounds_check: sandwich violated");
  }
  return out;
}

AreaCovariances area_covariances(const GaussianChain& chain) {
  validate(chain);
  const int n = chain.n;
  AreaCovariances out;
  if (chain.mass == 0.0) {
    out.with_height.resize(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) {
      out.with_height[static_cast<std::size_t>(i - 1)] =
          static_cast<double>(i) * static_cast<double>(n + 1 - i);
    }
    const double nn = n;
    out.area_variance = nn * (nn + 1.0) * (nn + 2.0) / 6.0;
    return out;
  }
  out.with_height = solve_precision_ones(n, chain.mass);
  double total = 0.0;
  for (double v : out.with_height) total += v;
  out.area_variance = total;
  return out;
}

CovarianceKernel::CovarianceKernel(GaussianChain chain)
    : chain_(chain), area_(area_covariances(chain)) {
  if (chain_.mass > 0.0) {
    nu_ = nu(chain_.mass);
    sinh_nu_ = std::sinh(nu_);
  }
}

double CovarianceKernel::unconditioned(int i, int j) const {
  if (i <= 0 || j <= 0 || i > chain_.n || j > chain_.n) return 0.0;
  if (i > j) std::swap(i, j);
  if (chain_.mass == 0.0) return massless_covariance(chain_.n, i, j);
  return massive_covariance(chain_.n, nu_, sinh_nu_, i, j);
}

double CovarianceKernel::conditioned(int i, int j) const {
  if (i <= 0 || j <= 0 || i > chain_.n || j > chain_.n) return 0.0;
  if (!(area_.area_variance > 0.0)) {
    throw std::logic_error("conditioned covariance: degenerate area variance");
  }
  const double ai = area_.with_height[static_cast<std::size_t>(i - 1)];
  const double aj = area_.with_height[static_cast<std::size_t>(j - 1)];
  return unconditioned(i, j) - ai * aj / area_.area_variance;
}

double CovarianceKernel::operator()(int i, int j) const {
  return chain_.constrained ? conditioned(i, j) : unconditioned(i, j);
}

double conditioned_covariance(const GaussianChain& chain, int i, int j) {
  validate(chain);
  check_index(chain, i);
  check_index(chain, j);
  return CovarianceKernel(chain).conditioned(i, j);
}

RescaledProcess::RescaledProcess(GaussianChain chain, Scaling scaling, double g)
    : kernel_(chain), scaling_(scaling), g_(g) {
  const double n = chain.n;
  if (scaling == Scaling::Window) {
    if (chain.n % 2 != 0) throw std::invalid_argument("window scaling: n must be even");
    if (!(g > 0.0)) throw std::invalid_argument("window scaling: g must be positive");
    const double expected = g / std::sqrt(n);
    if (std::abs(chain.mass - expected) > 1e-12 * expected) {
      throw std::invalid_argument("window scaling: chain mass must equal g / sqrt(n)");
    }
    height_scale_ = std::pow(n, -0.25);
  } else {
    height_scale_ = 1.0 / std::sqrt(n);
  }
}

double RescaledProcess::t_min() const {
  if (scaling_ == Scaling::Bridge) return 0.0;
  const double n = kernel_.n();
  return -(n / 2.0) / std::sqrt(n);
}

double RescaledProcess::t_max() const {
  if (scaling_ == Scaling::Bridge) return 1.0;
  const double n = kernel_.n();
  return (n / 2.0 + 1.0) / std::sqrt(n);
}

RescaledProcess::Stencil RescaledProcess::stencil(double t) const {
  if (!(t >= t_min() && t <= t_max())) throw std::out_of_range("rescaled process: t out of domain");
  const double n = kernel_.n();
  const double pos = scaling_ == Scaling::Bridge ? t * n : n / 2.0 + t * std::sqrt(n);
  const double base = std::floor(pos);
  const double frac = pos - base;
  return {static_cast<int>(base), 1.0 - frac, frac};
}

double RescaledProcess::covariance(double t1, double t2) const {
  const Stencil a = stencil(t1);
  const Stencil b = stencil(t2);
  double s = 0.0;
  const double wa[2] = {a.w0, a.w1};
  const double wb[2] = {b.w0, b.w1};
  for (int p = 0; p < 2; ++p) {
    if (wa[p] == 0.0) continue;
    for (int q = 0; q < 2; ++q) {
      if (wb[q] == 0.0) continue;
      s += wa[p] * wb[q] * kernel_(a.index + p, b.index + q);
    }
  }
  return height_scale_ * height_scale_ * s;
}

double rescaled_covariance(const GaussianChain& chain, Scaling scaling, double t1, double t2,
                           double g) {
  return RescaledProcess(chain, scaling, g).covariance(t1, t2);
}

double ou_covariance(double g, double t1, double t2) {
  if (!(g > 0.0)) throw std::invalid_argument("ou_covariance: g must be positive");
  const double theta = std::sqrt(2.0) * g;
  return std::exp(-theta * std::abs(t2 - t1)) / theta;
}

namespace {
template <class Cov>
double gaussian_characteristic(std::span<const double> times, std::span<const double> lambdas,
                               Cov&& cov) {
  if (times.size() != lambdas.size()) {
    throw std::invalid_argument("characteristic function: size mismatch");
  }
  double q = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    for (std::size_t l = 0; l < times.size(); ++l) {
      q += lambdas[k] * lambdas[l] * cov(times[k], times[l]);
    }
  }
  return std::exp(-0.5 * q);
}
}  // namespace

double characteristic_function(const RescaledProcess& process, std::span<const double> times,
                               std::span<const double> lambdas) {
  return gaussian_characteristic(times, lambdas,
                                 [&](double s, double t) { return process.covariance(s, t); });
}

double ou_characteristic_function(double g, std::span<const double> times,
                                  std::span<const double> lambdas) {
  return gaussian_characteristic(times, lambdas,
                                 [g](double s, double t) { return ou_covariance(g, s, t); });
}

GradientMoment gradient_moment_check(const CovarianceKernel& kernel, int i, int j) {
  if (i < 0 || j < 0 || i > kernel.n() + 1 || j > kernel.n() + 1) {
    throw std::out_of_range("gradient_moment_check: index outside 0..n+1");
  }
  const double var = kernel(i, i) + kernel(j, j) - 2.0 * kernel(i, j);
  const double d = static_cast<double>(i - j);
  GradientMoment out{3.0 * var * var, 12.0 * d * d};
  if (out.fourth_moment > out.bound * (1.0 + kSlack) + 1e-300) {
    throw std::logic_error("gradient_moment_check: fourth moment exceeds 12 |i-j|^2");
  }
  return out;
}

GradientMoment gradient_moment_check(const GaussianChain& chain, int i, int j) {
  return gradient_moment_check(CovarianceKernel(chain), i, j);
}

double canonical_covariance_agreement(const CovarianceKernel& kernel, int i, int j,
                                      WindowLimits limits) {
  if (!(kernel.chain().mass > 0.0)) {
    throw std::invalid_argument(
        "canonical_covariance_agreement: massless chain (conditioning is macroscopic)");
  }
  const double n = kernel.n();
  const double edge = std::pow(n, limits.b);
  const auto inside = [&](int k) { return k >= edge && k <= n - edge; };
  if (!inside(i) || !inside(j) || std::abs(i - j) > limits.M * std::sqrt(n)) {
    throw std::out_of_range("canonical_covariance_agreement: indices outside the bulk window");
  }
  const double g = kernel.unconditioned(i, j);
  return std::abs(kernel.conditioned(i, j) - g) / g;
}

double canonical_covariance_agreement(const GaussianChain& chain, int i, int j,
                                      WindowLimits limits) {
  return canonical_covariance_agreement(CovarianceKernel(chain), i, j, limits);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

ChainSampler::ChainSampler(GaussianChain chain) : chain_(chain), area_(area_covariances(chain)) {
  const int n = chain.n;
  const double q = 1.0 + chain.mass * chain.mass;
  diag_.resize(static_cast<std::size_t>(n));
  sub_.assign(static_cast<std::size_t>(n), 0.0);
  diag_[0] = std::sqrt(q);
  for (int k = 1; k < n; ++k) {
    const double c = -0.5 / diag_[static_cast<std::size_t>(k - 1)];
    sub_[static_cast<std::size_t>(k)] = c;
    diag_[static_cast<std::size_t>(k)] = std::sqrt(q - c * c);
  }
}

void ChainSampler::draw(std::uint64_t seed, std::uint64_t index, std::span<double> out) const {
  const auto n = static_cast<std::size_t>(chain_.n);
  if (out.size() != n) throw std::invalid_argument("ChainSampler::draw: output size must be n");
  std::mt19937_64 engine(mix_seed(seed, index));
  std::normal_distribution<double> normal;
  for (std::size_t k = 0; k < n; ++k) out[k] = normal(engine);
  // Solve L^T x = z in place; x then has covariance Q^{-1}.
  out[n - 1] /= diag_[n - 1];
  for (std::size_t k = n - 1; k-- > 0;) {
    out[k] = (out[k] - sub_[k + 1] * out[k + 1]) / diag_[k];
  }
  if (chain_.constrained) {
    double area = 0.0;
    for (double v : out) area += v;
    const double c = area / area_.area_variance;
    for (std::size_t k = 0; k < n; ++k) out[k] -= c * area_.with_height[k];
  }
}

std::vector<std::vector<double>> ChainSampler::sample(std::uint64_t seed, std::size_t count,
                                                      unsigned threads) const {
  if (count < 1) throw std::invalid_argument("sample: count must be >= 1");
  std::vector<std::vector<double>> out(count,
                                       std::vector<double>(static_cast<std::size_t>(chain_.n)));
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (threads == 1) {
    for (std::size_t k = 0; k < count; ++k) draw(seed, k, out[k]);
    return out;
  }
  {
    std::vector<std::jthread> workers;
    for (unsigned t = 0; t < threads; ++t) {
      workers.emplace_back([&, t] {
        for (std::size_t k = t; k < count; k += threads) draw(seed, k, out[k]);
      });
    }
  }
  return out;
}

std::vector<std::vector<double>> sample(const GaussianChain& chain, std::uint64_t seed,
                                        std::size_t count, unsigned threads) {
  validate(chain);
  return ChainSampler(chain).sample(seed, count, threads);
}

}  // namespace gravising::gchain
