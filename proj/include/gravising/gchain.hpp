#pragma once

// Dirichlet Gaussian chains, the effective model for a gravitational interface.
//
// The law of (phi_1..phi_n) with phi_0 = phi_{n+1} = 0 is proportional to
//   exp(-1/4 sum_{i=1}^{n+1} (phi_i - phi_{i-1})^2 - m^2/2 sum_i phi_i^2),
// i.e. a centred Gaussian with tridiagonal precision Q: Q_ii = 1 + m^2,
// Q_{i,i+1} = -1/2. The constrained chain is conditioned on the signed area
// X = sum_i phi_i = 0.

#include <cstdint>
#include <span>
#include <vector>

namespace gravising::gchain {

struct GaussianChain {
  int n = 1;
  double mass = 0.0;
  bool constrained = false;

  /// Chain with mass g / sqrt(n), the massive scaling regime.
  static GaussianChain with_scaled_mass(int n, double g, bool constrained = false);
};

void validate(const GaussianChain& chain);

/// nu_m = ln(1 + m^2 + sqrt(2 m^2 + m^4)) = arcosh(1 + m^2).
double nu(double mass);

/// Unconditioned covariance G_m(i, j), 1 <= i, j <= n.
double covariance(const GaussianChain& chain, int i, int j);

struct CovarianceBounds {
  double lower;
  double value;
  double upper;
};

/// Sandwich (1-e^{-2 nu i})(1-e^{-2 nu (n+1-j)}) K <= G_m(i,j) <= K / (1-e^{-2 nu (n+1)}),
/// K = e^{-nu (j-i)} / sinh(nu). Requires mass > 0; throws std::logic_error if
/// the sandwich is violated.
CovarianceBounds covariance_bounds_check(const GaussianChain& chain, int i, int j);

struct AreaCovariances {
  std::vector<double> with_height;  // E(X phi_i), i = 1..n stored at [i-1]
  double area_variance;             // E(X^2)
};

/// Massless: closed forms i(n+1-i) and n(n+1)(n+2)/6. Massive: G 1 (row sums
/// of the kernel) obtained from one tridiagonal solve, and its total.
AreaCovariances area_covariances(const GaussianChain& chain);

/// Covariance operator of a chain, caching the area data when constrained.
class CovarianceKernel {
 public:
  explicit CovarianceKernel(GaussianChain chain);

  const GaussianChain& chain() const { return chain_; }
  int n() const { return chain_.n; }

  /// Kernel of the chain's own law (conditioned iff chain().constrained).
  /// Indices 0 and n+1 are the pinned boundary and give 0.
  double operator()(int i, int j) const;
  double unconditioned(int i, int j) const;
  double conditioned(int i, int j) const;

  const AreaCovariances& area() const { return area_; }

 private:
  GaussianChain chain_;
  AreaCovariances area_;
  double nu_ = 0.0;
  double sinh_nu_ = 0.0;
};

/// G_m(i,j) - E(X phi_i) E(X phi_j) / E(X^2).
double conditioned_covariance(const GaussianChain& chain, int i, int j);

enum class Scaling {
  Bridge,  // t in [0,1], position t n, height 1/sqrt(n)
  Window,  // t in R, position n/2 + t sqrt(n), height n^{-1/4}; needs even n
};

/// Linearly interpolated, rescaled chain W^n_t.
class RescaledProcess {
 public:
  /// For Window scaling the chain mass must equal g / sqrt(n).
  RescaledProcess(GaussianChain chain, Scaling scaling, double g = 0.0);

  Scaling scaling() const { return scaling_; }
  const CovarianceKernel& kernel() const { return kernel_; }
  /// Range of admissible t.
  double t_min() const;
  double t_max() const;

  /// Exact E(W_t1 W_t2).
  double covariance(double t1, double t2) const;

  /// Interpolation stencil: W_t = scale * (w0 phi_{i0} + w1 phi_{i0+1}).
  struct Stencil {
    int index;
    double w0;
    double w1;
  };
  Stencil stencil(double t) const;
  double height_scale() const { return height_scale_; }

 private:
  CovarianceKernel kernel_;
  Scaling scaling_;
  double g_;
  double height_scale_;
};

double rescaled_covariance(const GaussianChain& chain, Scaling scaling, double t1, double t2,
                           double g = 0.0);

/// Stationary OU covariance e^{-sqrt2 g |t2-t1|} / (sqrt2 g) (theta = sqrt2 g, sigma^2 = 1).
double ou_covariance(double g, double t1, double t2);

/// E exp(i sum_k lambda_k W_{t_k}) = exp(-1/2 lambda^T C lambda) for the chain.
double characteristic_function(const RescaledProcess& process, std::span<const double> times,
                               std::span<const double> lambdas);
/// Same for the OU limit.
double ou_characteristic_function(double g, std::span<const double> times,
                                  std::span<const double> lambdas);

struct GradientMoment {
  double fourth_moment;  // E|phi_i - phi_j|^4 = 3 (G_ii + G_jj - 2 G_ij)^2
  double bound;          // 12 |i - j|^2
};

/// Indices 0..n+1, the ends being the pinned values. Throws std::logic_error
/// if the moment exceeds the bound.
GradientMoment gradient_moment_check(const GaussianChain& chain, int i, int j);
GradientMoment gradient_moment_check(const CovarianceKernel& kernel, int i, int j);

struct WindowLimits {
  double b = 0.75;  // indices in [n^b, n - n^b]
  double M = 4.0;   // |i - j| <= M sqrt(n)
};

/// |E(phi_i phi_j | X = 0) - G_m(i,j)| / G_m(i,j) for a massive chain, with
/// (i, j) inside the bulk window. Throws std::out_of_range outside it.
double canonical_covariance_agreement(const CovarianceKernel& kernel, int i, int j,
                                      WindowLimits limits = {});
double canonical_covariance_agreement(const GaussianChain& chain, int i, int j,
                                      WindowLimits limits = {});

/// Exact sampler for the chain law (grand canonical or area-conditioned).
/// Sample k of any batch depends only on (seed, k).
class ChainSampler {
 public:
  explicit ChainSampler(GaussianChain chain);

  const GaussianChain& chain() const { return chain_; }
  /// Writes sample number `index` for `seed` into `out` (size n).
  void draw(std::uint64_t seed, std::uint64_t index, std::span<double> out) const;
  std::vector<std::vector<double>> sample(std::uint64_t seed, std::size_t count,
                                          unsigned threads = 1) const;

 private:
  GaussianChain chain_;
  std::vector<double> diag_;  // Cholesky factor L: diagonal
  std::vector<double> sub_;   // and sub-diagonal, L_{i,i-1}
  AreaCovariances area_;
};

std::vector<std::vector<double>> sample(const GaussianChain& chain, std::uint64_t seed,
                                        std::size_t count, unsigned threads = 1);

/// splitmix64 finalizer, used to derive per-sample streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace gravising::gchain
