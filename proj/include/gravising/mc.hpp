#pragma once

// Fixed-magnetization Ising Monte Carlo in a slowly varying field.
//
// H(sigma) = -sum_<ij> sigma_i sigma_j - sum_i h_N(i) sigma_i - sum_{i in box, j outside} sigma_i eta_j
// with J = 1 and eta the boundary condition. The canonical sampler uses
// Metropolis spin exchange, which conserves M_N = sum_i sigma_i.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gravising/lattice.hpp"
#include "gravising/profile.hpp"

namespace gravising::mc {

enum class BoundaryKind { Free, Plus, Minus, Dobrushin };

struct Boundary {
  BoundaryKind kind = BoundaryKind::Free;
  /// Dobrushin normal; eta_j = +1 iff (j - centre) . normal >= 0, with the
  /// centre of the box at ((N-1)/2, ...).
  std::vector<double> normal;

  static Boundary free() { return {}; }
  static Boundary plus() { return {BoundaryKind::Plus, {}}; }
  static Boundary minus() { return {BoundaryKind::Minus, {}}; }
  static Boundary dobrushin(std::vector<double> normal) {
    return {BoundaryKind::Dobrushin, std::move(normal)};
  }
};

class SpinConfiguration {
 public:
  SpinConfiguration(LatticeGeometry geometry, Boundary boundary, std::vector<std::int8_t> spins);
  static SpinConfiguration uniform(LatticeGeometry geometry, Boundary boundary, std::int8_t spin);

  const LatticeGeometry& geometry() const { return geometry_; }
  const Boundary& boundary() const { return boundary_; }
  std::span<const std::int8_t> spins() const { return spins_; }
  std::int8_t spin(std::int64_t site) const { return spins_[static_cast<std::size_t>(site)]; }
  void set_spin(std::int64_t site, std::int8_t value);
  std::int64_t magnetization() const;

  /// Neighbour of `site` along `axis` in direction `dir` (+1/-1), or -1 if outside.
  std::int64_t neighbour(std::int64_t site, int axis, int dir) const;
  /// sum of eta_j over the outside neighbours j of `site`.
  double boundary_field(std::int64_t site) const;
  std::vector<double> boundary_fields() const;

 private:
  LatticeGeometry geometry_;
  Boundary boundary_;
  std::vector<std::int8_t> spins_;
};

/// Full energy evaluation.
double energy(const SpinConfiguration& config, const FieldSpec& field);
/// Zero-field energy.
double energy(const SpinConfiguration& config);

/// Nearest element of Mag_N to m N^d (parity of N^d), ties towards +.
std::int64_t quantize_magnetization(double m, const LatticeGeometry& geometry);

enum class InitialState {
  Random,   // uniformly random arrangement at the target magnetization
  Layered,  // + spins on the sites with the largest field (ground state of the field term)
};

SpinConfiguration initial_configuration(const LatticeGeometry& geometry, const Boundary& boundary,
                                        std::int64_t magnetization, InitialState state,
                                        const FieldSpec& field, std::uint64_t seed);

enum class ProposalKind {
  NearestNeighbour,  // random site and random direction; null move if same spin or outside
  ArbitraryPair,     // uniformly random (+, -) pair anywhere in the box
};

struct Move {
  std::int64_t first;
  std::int64_t second;
  double probability;  // proposal probability of exchanging first and second
};

struct SamplerStats {
  std::uint64_t proposals = 0;          // all proposals, including null moves
  std::uint64_t exchange_proposals = 0; // proposals of opposite-spin pairs
  std::uint64_t accepted = 0;

  double acceptance_rate() const {
    return exchange_proposals == 0 ? 1.0
                                   : static_cast<double>(accepted) /
                                         static_cast<double>(exchange_proposals);
  }
};

class CanonicalSampler {
 public:
  CanonicalSampler(SpinConfiguration config, double beta, FieldSpec field, ProposalKind proposal,
                   std::uint64_t seed);

  const SpinConfiguration& configuration() const { return config_; }
  double beta() const { return beta_; }
  const FieldSpec& field() const { return field_; }
  ProposalKind proposal() const { return proposal_; }
  const SamplerStats& stats() const { return stats_; }
  std::uint64_t sweeps_done() const { return sweeps_; }

  /// count * N^d proposals.
  void sweep(int count = 1);
  /// A single proposal.
  void step();

  /// Incrementally tracked energy.
  double energy() const { return energy_; }
  double recompute_energy() const;

  /// Energy change of exchanging the spins at i and j.
  double exchange_delta(std::int64_t i, std::int64_t j) const;
  double acceptance_probability(double delta) const;
  /// All exchange moves available from the current configuration.
  std::vector<Move> proposal_distribution() const;

 private:
  void accept(std::int64_t i, std::int64_t j, double delta);
  double flip_delta(std::int64_t site) const;

  SpinConfiguration config_;
  double beta_;
  FieldSpec field_;
  ProposalKind proposal_;
  std::mt19937_64 rng_;
  std::vector<double> external_;         // h_N(i) + boundary field
  std::vector<std::int64_t> neighbours_; // 2d per site, -1 outside
  std::vector<std::int64_t> plus_sites_;
  std::vector<std::int64_t> minus_sites_;
  std::vector<std::int64_t> slot_;       // position of a site in its list
  double energy_ = 0.0;
  SamplerStats stats_;
  std::uint64_t sweeps_ = 0;
};

/// Cell-average profile with side `cell_side`; target_m is M_N / N^d.
profile::MesoProfile coarse_grain(const SpinConfiguration& config, int cell_side);

/// Running time average of coarse-grained profiles.
class ProfileAverager {
 public:
  ProfileAverager(LatticeGeometry geometry, int cell_side);
  void add(const SpinConfiguration& config);
  std::size_t count() const { return count_; }
  profile::MesoProfile mean() const;

 private:
  LatticeGeometry geometry_;
  std::vector<double> sums_;
  double target_m_ = 0.0;
  std::size_t count_ = 0;
};

/// |Gamma|^-1 sum_x |a(x) - b(x)|.
double concentration_distance(const profile::MesoProfile& empirical,
                              const profile::MesoProfile& reference);

/// Binary PGM bytes (P5, 255 for +, 0 for -), top row = largest height first.
std::string snapshot_bytes(const SpinConfiguration& config);
void snapshot(const SpinConfiguration& config, const std::filesystem::path& path);

struct InterfaceOptions {
  double monotone_tolerance = 0.2;  // allowed increase against the trend between layers
  double min_jump = 0.1;            // minimal top-bottom contrast
  double max_width = 0.2;           // 25%-75% crossing width, in height units
};

struct InterfaceEstimate {
  double height;  // in [0, 1)
  double jump;    // contrast between the layers one below and one above the crossing pair
  double width;   // 25%-75% crossing width
};

/// Mean magnetization of each horizontal layer of cells, bottom first.
std::vector<double> layer_averages(const profile::MesoProfile& profile);

/// Height where the layer-averaged magnetization crosses the mid-value between
/// bottom and top, or nullopt when there is no sharp monotone crossing.
std::optional<InterfaceEstimate> interface_height_estimate(const profile::MesoProfile& profile,
                                                           InterfaceOptions options = {});

/// Grand-canonical single-flip Metropolis on a homogeneous periodic box; estimates
/// the isotherm m(h) for h >= 0, <|m|> at h = 0, made monotone by isotonic regression.
struct TabulateOptions {
  int side = 32;
  int dimension = 2;
  int burn_in = 1000;
  int sweeps = 10000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct IsothermPoint {
  double h;
  double m;
};

std::vector<IsothermPoint> tabulate_isotherm(double beta, std::span<const double> fields,
                                             const TabulateOptions& options);

/// Pool-adjacent-violators fit: the closest non-decreasing sequence in L2.
std::vector<double> isotonic_fit(std::span<const double> values);

}  // namespace gravising::mc
