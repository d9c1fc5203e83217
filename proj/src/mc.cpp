#include "gravising/mc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "gravising/gchain.hpp"

namespace gravising::mc {
namespace {

void check_spins(const LatticeGeometry& geometry, const std::vector<std::int8_t>& spins) {
  if (static_cast<std::int64_t>(spins.size()) != geometry.site_count()) {
    throw std::invalid_argument("spin configuration: need one spin per site");
  }
  for (auto s : spins) {
    if (s != 1 && s != -1) throw std::invalid_argument("spin configuration: spins must be +1 or -1");
  }
}

std::int64_t stride_of(const LatticeGeometry& geometry, int axis) {
  std::int64_t stride = 1;
  for (int k = 0; k < axis; ++k) stride *= geometry.side();
  return stride;
}

}  // namespace

SpinConfiguration::SpinConfiguration(LatticeGeometry geometry, Boundary boundary,
                                     std::vector<std::int8_t> spins)
    : geometry_(geometry), boundary_(std::move(boundary)), spins_(std::move(spins)) {
  check_spins(geometry_, spins_);
  if (boundary_.kind == BoundaryKind::Dobrushin &&
      static_cast<int>(boundary_.normal.size()) != geometry_.dimension()) {
    throw std::invalid_argument("Dobrushin boundary: normal must have d components");
  }
}

SpinConfiguration SpinConfiguration::uniform(LatticeGeometry geometry, Boundary boundary,
                                             std::int8_t spin) {
  return SpinConfiguration(geometry, std::move(boundary),
                           std::vector<std::int8_t>(static_cast<std::size_t>(geometry.site_count()), spin));
}

void SpinConfiguration::set_spin(std::int64_t site, std::int8_t value) {
  if (value != 1 && value != -1) throw std::invalid_argument("set_spin: spin must be +1 or -1");
  spins_.at(static_cast<std::size_t>(site)) = value;
}

std::int64_t SpinConfiguration::magnetization() const {
  return std::accumulate(spins_.begin(), spins_.end(), std::int64_t{0});
}

std::int64_t SpinConfiguration::neighbour(std::int64_t site, int axis, int dir) const {
  const int c = geometry_.site_coordinate(site, axis) + dir;
  if (c < 0 || c >= geometry_.side()) return -1;
  return site + dir * stride_of(geometry_, axis);
}

double SpinConfiguration::boundary_field(std::int64_t site) const {
  if (boundary_.kind == BoundaryKind::Free) return 0.0;
  const int d = geometry_.dimension();
  const int n = geometry_.side();
  double total = 0.0;
  for (int axis = 0; axis < d; ++axis) {
    const int c = geometry_.site_coordinate(site, axis);
    for (int dir : {-1, 1}) {
      const int outside = c + dir;
      if (outside >= 0 && outside < n) continue;
      double eta = 1.0;
      if (boundary_.kind == BoundaryKind::Minus) {
        eta = -1.0;
      } else if (boundary_.kind == BoundaryKind::Dobrushin) {
        const double centre = 0.5 * (n - 1);
        double dot = 0.0;
        for (int k = 0; k < d; ++k) {
          const double x = (k == axis) ? outside : geometry_.site_coordinate(site, k);
          dot += (x - centre) * boundary_.normal[static_cast<std::size_t>(k)];
        }
        eta = dot >= 0.0 ? 1.0 : -1.0;
      }
      total += eta;
    }
  }
  return total;
}

std::vector<double> SpinConfiguration::boundary_fields() const {
  std::vector<double> out(spins_.size());
  for (std::int64_t i = 0; i < geometry_.site_count(); ++i) {
    out[static_cast<std::size_t>(i)] = boundary_field(i);
  }
  return out;
}

double energy(const SpinConfiguration& config, const FieldSpec& field) {
  if (!(field.geometry().side() == config.geometry().side() &&
        field.geometry().dimension() == config.geometry().dimension())) {
    throw std::invalid_argument("energy: field and configuration geometries differ");
  }
  const auto& geometry = config.geometry();
  double bonds = 0.0;
  double external = 0.0;
  for (std::int64_t i = 0; i < geometry.site_count(); ++i) {
    const double s = config.spin(i);
    for (int axis = 0; axis < geometry.dimension(); ++axis) {
      const auto j = config.neighbour(i, axis, 1);
      if (j >= 0) bonds += s * config.spin(j);
    }
    external += s * (field.at_site(i) + config.boundary_field(i));
  }
  return -bonds - external;
}

double energy(const SpinConfiguration& config) {
  return energy(config, FieldSpec::constant(LatticeGeometry(config.geometry().side(),
                                                            config.geometry().dimension(), 1),
                                            0.0));
}

std::int64_t quantize_magnetization(double m, const LatticeGeometry& geometry) {
  if (!(std::abs(m) <= 1.0)) throw std::domain_error("quantize_magnetization: |m| must be <= 1");
  const std::int64_t v = geometry.site_count();
  // M = V - 2k with k minus spins; k nearest to (V - mV)/2, ties to fewer minus spins.
  const double target = 0.5 * (static_cast<double>(v) - m * static_cast<double>(v));
  auto k = static_cast<std::int64_t>(std::ceil(target - 0.5));
  k = std::clamp<std::int64_t>(k, 0, v);
  return v - 2 * k;
}

SpinConfiguration initial_configuration(const LatticeGeometry& geometry, const Boundary& boundary,
                                        std::int64_t magnetization, InitialState state,
                                        const FieldSpec& field, std::uint64_t seed) {
  const std::int64_t v = geometry.site_count();
  if (std::abs(magnetization) > v || (v - magnetization) % 2 != 0) {
    throw std::invalid_argument("initial_configuration: magnetization not in Mag_N");
  }
  const std::int64_t plus = (v + magnetization) / 2;
  std::vector<std::int64_t> order(static_cast<std::size_t>(v));
  std::iota(order.begin(), order.end(), std::int64_t{0});
  if (state == InitialState::Random) {
    std::mt19937_64 rng(gchain::mix_seed(seed, 0));
    std::shuffle(order.begin(), order.end(), rng);
  } else {
    const auto values = field.site_values();
    std::stable_sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
      return values[static_cast<std::size_t>(a)] > values[static_cast<std::size_t>(b)];
    });
  }
  std::vector<std::int8_t> spins(static_cast<std::size_t>(v), -1);
  for (std::int64_t k = 0; k < plus; ++k) spins[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = 1;
  return SpinConfiguration(geometry, boundary, std::move(spins));
}

CanonicalSampler::CanonicalSampler(SpinConfiguration config, double beta, FieldSpec field,
                                   ProposalKind proposal, std::uint64_t seed)
    : config_(std::move(config)),
      beta_(beta),
      field_(std::move(field)),
      proposal_(proposal),
      rng_(gchain::mix_seed(seed, 1)) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("sampler: beta must be finite and >= 0");
  }
  const auto& geometry = config_.geometry();
  if (field_.geometry().side() != geometry.side() ||
      field_.geometry().dimension() != geometry.dimension()) {
    throw std::invalid_argument("sampler: field and configuration geometries differ");
  }
  const std::int64_t v = geometry.site_count();
  const int d = geometry.dimension();
  external_ = field_.site_values();
  const auto boundary = config_.boundary_fields();
  for (std::size_t i = 0; i < external_.size(); ++i) external_[i] += boundary[i];

  neighbours_.resize(static_cast<std::size_t>(v * 2 * d));
  for (std::int64_t i = 0; i < v; ++i) {
    for (int axis = 0; axis < d; ++axis) {
      neighbours_[static_cast<std::size_t>(i * 2 * d + 2 * axis)] = config_.neighbour(i, axis, -1);
      neighbours_[static_cast<std::size_t>(i * 2 * d + 2 * axis + 1)] = config_.neighbour(i, axis, 1);
    }
  }
  slot_.resize(static_cast<std::size_t>(v));
  for (std::int64_t i = 0; i < v; ++i) {
    auto& list = config_.spin(i) > 0 ? plus_sites_ : minus_sites_;
    slot_[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(list.size());
    list.push_back(i);
  }
  energy_ = recompute_energy();
}

double CanonicalSampler::recompute_energy() const { return mc::energy(config_, field_); }

double CanonicalSampler::flip_delta(std::int64_t site) const {
  const int deg = 2 * config_.geometry().dimension();
  const std::int64_t* nb = neighbours_.data() + site * deg;
  int local = 0;
  for (int k = 0; k < deg; ++k) {
    if (nb[k] >= 0) local += config_.spin(nb[k]);
  }
  return 2.0 * config_.spin(site) * (local + external_[static_cast<std::size_t>(site)]);
}

double CanonicalSampler::exchange_delta(std::int64_t i, std::int64_t j) const {
  if (config_.spin(i) == config_.spin(j)) return 0.0;
  double delta = flip_delta(i) + flip_delta(j);
  const int deg = 2 * config_.geometry().dimension();
  const std::int64_t* nb = neighbours_.data() + i * deg;
  for (int k = 0; k < deg; ++k) {
    if (nb[k] == j) {
      delta += 4.0;
      break;
    }
  }
  return delta;
}

double CanonicalSampler::acceptance_probability(double delta) const {
  if (delta <= 0.0) return 1.0;
  return std::exp(-beta_ * delta);
}

void CanonicalSampler::accept(std::int64_t i, std::int64_t j, double delta) {
  // i is + and j is - before the move.
  const auto si = static_cast<std::size_t>(slot_[static_cast<std::size_t>(i)]);
  const auto sj = static_cast<std::size_t>(slot_[static_cast<std::size_t>(j)]);
  plus_sites_[si] = j;
  minus_sites_[sj] = i;
  slot_[static_cast<std::size_t>(j)] = static_cast<std::int64_t>(si);
  slot_[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(sj);
  config_.set_spin(i, -1);
  config_.set_spin(j, 1);
  energy_ += delta;
  ++stats_.accepted;
}

void CanonicalSampler::step() {
  ++stats_.proposals;
  std::int64_t i = 0;
  std::int64_t j = 0;
  if (proposal_ == ProposalKind::NearestNeighbour) {
    const auto v = static_cast<std::uint64_t>(config_.geometry().site_count());
    const auto deg = static_cast<std::uint64_t>(2 * config_.geometry().dimension());
    const std::uint64_t pick = std::uniform_int_distribution<std::uint64_t>(0, v * deg - 1)(rng_);
    const auto site = static_cast<std::int64_t>(pick / deg);
    const std::int64_t other = neighbours_[static_cast<std::size_t>(pick)];
    if (other < 0 || config_.spin(site) == config_.spin(other)) return;
    i = config_.spin(site) > 0 ? site : other;
    j = config_.spin(site) > 0 ? other : site;
  } else {
    if (plus_sites_.empty() || minus_sites_.empty()) return;
    i = plus_sites_[std::uniform_int_distribution<std::size_t>(0, plus_sites_.size() - 1)(rng_)];
    j = minus_sites_[std::uniform_int_distribution<std::size_t>(0, minus_sites_.size() - 1)(rng_)];
  }
  ++stats_.exchange_proposals;
  const double delta = exchange_delta(i, j);
  if (delta <= 0.0 || std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < std::exp(-beta_ * delta)) {
    accept(i, j, delta);
  }
}

void CanonicalSampler::sweep(int count) {
  if (count < 1) throw std::invalid_argument("sweep: count must be >= 1");
  const std::int64_t v = config_.geometry().site_count();
  for (int c = 0; c < count; ++c) {
    for (std::int64_t k = 0; k < v; ++k) step();
    ++sweeps_;
  }
}

std::vector<Move> CanonicalSampler::proposal_distribution() const {
  std::vector<Move> moves;
  const std::int64_t v = config_.geometry().site_count();
  if (proposal_ == ProposalKind::NearestNeighbour) {
    const int deg = 2 * config_.geometry().dimension();
    const double p = 2.0 / (static_cast<double>(v) * deg);
    for (std::int64_t i = 0; i < v; ++i) {
      if (config_.spin(i) < 0) continue;
      for (int k = 0; k < deg; ++k) {
        const std::int64_t j = neighbours_[static_cast<std::size_t>(i * deg + k)];
        if (j >= 0 && config_.spin(j) < 0) moves.push_back({i, j, p});
      }
    }
  } else {
    if (plus_sites_.empty() || minus_sites_.empty()) return moves;
    const double p = 1.0 / (static_cast<double>(plus_sites_.size()) *
                            static_cast<double>(minus_sites_.size()));
    for (std::int64_t i = 0; i < v; ++i) {
      if (config_.spin(i) < 0) continue;
      for (std::int64_t j = 0; j < v; ++j) {
        if (config_.spin(j) < 0) moves.push_back({i, j, p});
      }
    }
  }
  return moves;
}

profile::MesoProfile coarse_grain(const SpinConfiguration& config, int cell_side) {
  const LatticeGeometry cells(config.geometry().side(), config.geometry().dimension(), cell_side);
  std::vector<double> sums(static_cast<std::size_t>(cells.cell_count()), 0.0);
  for (std::int64_t i = 0; i < cells.site_count(); ++i) {
    sums[static_cast<std::size_t>(cells.cell_of_site(i))] += config.spin(i);
  }
  double volume = 1.0;
  for (int k = 0; k < cells.dimension(); ++k) volume *= cell_side;
  for (auto& s : sums) s /= volume;
  return {cells, std::move(sums),
          static_cast<double>(config.magnetization()) / static_cast<double>(cells.site_count())};
}

ProfileAverager::ProfileAverager(LatticeGeometry geometry, int cell_side)
    : geometry_(geometry.side(), geometry.dimension(), cell_side),
      sums_(static_cast<std::size_t>(geometry_.cell_count()), 0.0) {}

void ProfileAverager::add(const SpinConfiguration& config) {
  const auto q = coarse_grain(config, geometry_.cell_side());
  if (!(q.geometry == geometry_)) throw std::invalid_argument("ProfileAverager: geometry mismatch");
  for (std::size_t x = 0; x < sums_.size(); ++x) sums_[x] += q.values[x];
  target_m_ = q.target_m;
  ++count_;
}

profile::MesoProfile ProfileAverager::mean() const {
  if (count_ == 0) throw std::logic_error("ProfileAverager: no samples");
  std::vector<double> values(sums_);
  for (auto& v : values) v /= static_cast<double>(count_);
  return {geometry_, std::move(values), target_m_};
}

double concentration_distance(const profile::MesoProfile& empirical,
                              const profile::MesoProfile& reference) {
  if (!(empirical.geometry == reference.geometry) ||
      empirical.values.size() != reference.values.size()) {
    throw std::invalid_argument("concentration_distance: geometries differ");
  }
  if (empirical.values.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t x = 0; x < empirical.values.size(); ++x) {
    total += std::abs(empirical.values[x] - reference.values[x]);
  }
  return total / static_cast<double>(empirical.values.size());
}

std::string snapshot_bytes(const SpinConfiguration& config) {
  const auto& geometry = config.geometry();
  if (geometry.dimension() != 2) throw std::invalid_argument("snapshot: requires d = 2");
  const int n = geometry.side();
  std::string out = "P5\n" + std::to_string(n) + " " + std::to_string(n) + "\n255\n";
  out.reserve(out.size() + static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  for (int row = n - 1; row >= 0; --row) {
    for (int col = 0; col < n; ++col) {
      const std::int64_t site = static_cast<std::int64_t>(row) * n + col;
      out.push_back(config.spin(site) > 0 ? static_cast<char>(255) : static_cast<char>(0));
    }
  }
  return out;
}

void snapshot(const SpinConfiguration& config, const std::filesystem::path& path) {
  const std::string bytes = snapshot_bytes(config);
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("snapshot: cannot open " + path.string());
  file.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!file) throw std::runtime_error("snapshot: write failed for " + path.string());
}

std::vector<double> layer_averages(const profile::MesoProfile& profile) {
  const int layers = profile.geometry.cells_per_side();
  std::vector<double> sums(static_cast<std::size_t>(layers), 0.0);
  std::vector<double> counts(static_cast<std::size_t>(layers), 0.0);
  for (std::size_t x = 0; x < profile.values.size(); ++x) {
    const auto layer = static_cast<std::size_t>(profile.geometry.cell_layer(static_cast<std::int64_t>(x)));
    sums[layer] += profile.values[x];
    counts[layer] += 1.0;
  }
  for (std::size_t k = 0; k < sums.size(); ++k) sums[k] /= counts[k];
  return sums;
}

namespace {

// Height of the first upward crossing of `level` by the normalized sequence s.
std::optional<double> crossing(const std::vector<double>& s, double level) {
  const double layers = static_cast<double>(s.size());
  for (std::size_t k = 0; k + 1 < s.size(); ++k) {
    if (s[k] < level && s[k + 1] >= level) {
      const double t = (level - s[k]) / (s[k + 1] - s[k]);
      return (static_cast<double>(k) + 0.5 + t) / layers;
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<InterfaceEstimate> interface_height_estimate(const profile::MesoProfile& profile,
                                                           InterfaceOptions options) {
  const auto layers = layer_averages(profile);
  if (layers.size() < 2) return std::nullopt;
  const double bottom = layers.front();
  const double top = layers.back();
  const double contrast = top - bottom;
  if (std::abs(contrast) < options.min_jump) return std::nullopt;

  std::vector<double> s(layers.size());
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = (layers[k] - bottom) / contrast;
  for (std::size_t k = 0; k + 1 < s.size(); ++k) {
    if (s[k + 1] < s[k] - options.monotone_tolerance) return std::nullopt;
  }

  const auto mid = crossing(s, 0.5);
  const auto low = crossing(s, 0.25);
  const auto high = crossing(s, 0.75);
  if (!mid || !low || !high) return std::nullopt;
  const double width = *high - *low;
  if (width > options.max_width) return std::nullopt;

  const double count = static_cast<double>(layers.size());
  const auto k = static_cast<std::size_t>(std::floor(*mid * count - 0.5));
  const std::size_t below = k == 0 ? 0 : k - 1;
  const std::size_t above = std::min(k + 2, layers.size() - 1);
  return InterfaceEstimate{*mid, std::abs(layers[above] - layers[below]), width};
}

std::vector<double> isotonic_fit(std::span<const double> values) {
  std::vector<double> level;
  std::vector<double> weight;
  for (double v : values) {
    level.push_back(v);
    weight.push_back(1.0);
    while (level.size() > 1 && level[level.size() - 2] > level.back()) {
      const double w = weight[weight.size() - 2] + weight.back();
      const double l = (level[level.size() - 2] * weight[weight.size() - 2] +
                        level.back() * weight.back()) / w;
      level.pop_back();
      weight.pop_back();
      level.back() = l;
      weight.back() = w;
    }
  }
  std::vector<double> out;
  out.reserve(values.size());
  for (std::size_t b = 0; b < level.size(); ++b) {
    out.insert(out.end(), static_cast<std::size_t>(weight[b]), level[b]);
  }
  return out;
}

namespace {

double grand_canonical_average(double beta, double h, bool absolute, const TabulateOptions& opt,
                               std::uint64_t seed) {
  const LatticeGeometry geometry(opt.side, opt.dimension, 1);
  const std::int64_t v = geometry.site_count();
  const int d = opt.dimension;
  const int deg = 2 * d;
  std::vector<std::int64_t> nb(static_cast<std::size_t>(v * deg));
  for (std::int64_t i = 0; i < v; ++i) {
    std::int64_t stride = 1;
    for (int axis = 0; axis < d; ++axis) {
      const int c = geometry.site_coordinate(i, axis);
      const std::int64_t base = i - c * stride;
      nb[static_cast<std::size_t>(i * deg + 2 * axis)] = base + ((c + opt.side - 1) % opt.side) * stride;
      nb[static_cast<std::size_t>(i * deg + 2 * axis + 1)] = base + ((c + 1) % opt.side) * stride;
      stride *= opt.side;
    }
  }
  std::vector<std::int8_t> spin(static_cast<std::size_t>(v), 1);
  std::int64_t total = v;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> pick(0, v - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Acceptance factors indexed by (local sum + deg) / 2 and the spin sign.
  std::vector<double> accept_plus(static_cast<std::size_t>(deg + 1));
  std::vector<double> accept_minus(static_cast<std::size_t>(deg + 1));
  for (int k = 0; k <= deg; ++k) {
    const int local = 2 * k - deg;
    accept_plus[static_cast<std::size_t>(k)] = std::exp(-beta * 2.0 * (local + h));
    accept_minus[static_cast<std::size_t>(k)] = std::exp(beta * 2.0 * (local + h));
  }

  auto sweep = [&] {
    for (std::int64_t n = 0; n < v; ++n) {
      const std::int64_t i = pick(rng);
      int local = 0;
      for (int k = 0; k < deg; ++k) local += spin[static_cast<std::size_t>(nb[static_cast<std::size_t>(i * deg + k)])];
      const auto idx = static_cast<std::size_t>((local + deg) / 2);
      const int s = spin[static_cast<std::size_t>(i)];
      const double a = s > 0 ? accept_plus[idx] : accept_minus[idx];
      if (a >= 1.0 || unit(rng) < a) {
        spin[static_cast<std::size_t>(i)] = static_cast<std::int8_t>(-s);
        total -= 2 * s;
      }
    }
  };
  for (int k = 0; k < opt.burn_in; ++k) sweep();
  double acc = 0.0;
  for (int k = 0; k < opt.sweeps; ++k) {
    sweep();
    const double m = static_cast<double>(total) / static_cast<double>(v);
    acc += absolute ? std::abs(m) : m;
  }
  return acc / static_cast<double>(opt.sweeps);
}

}  // namespace

std::vector<IsothermPoint> tabulate_isotherm(double beta, std::span<const double> fields,
                                             const TabulateOptions& options) {
  if (!(beta >= 0.0)) throw std::invalid_argument("tabulate: beta must be >= 0");
  if (options.side < 2 || options.sweeps < 1 || options.burn_in < 0) {
    throw std::invalid_argument("tabulate: need side >= 2, sweeps >= 1, burn_in >= 0");
  }
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (fields[k] < 0.0 || (k > 0 && !(fields[k] > fields[k - 1]))) {
      throw std::invalid_argument("tabulate: fields must be >= 0 and strictly increasing");
    }
  }
  std::vector<double> m(fields.size());
  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(fields.size())));
  {
    std::vector<std::jthread> workers;
    for (unsigned t = 0; t < threads; ++t) {
      workers.emplace_back([&, t] {
        for (std::size_t k = t; k < fields.size(); k += threads) {
          m[k] = grand_canonical_average(beta, fields[k], fields[k] == 0.0, options,
                                         gchain::mix_seed(options.seed, k));
        }
      });
    }
  }
  auto fitted = isotonic_fit(m);
  std::vector<IsothermPoint> out(fields.size());
  for (std::size_t k = 0; k < fields.size(); ++k) {
    out[k] = {fields[k], std::clamp(fitted[k], 0.0, 1.0)};
  }
  return out;
}

}  // namespace gravising::mc
