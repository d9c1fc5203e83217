// gravising: command-line front end for the thermodynamics, profile, Gaussian
// chain, Monte Carlo and droplet modules.
//
// Exit codes: 0 success, 1 usage, 2 validation, 3 I/O, 4 numerical failure.

#include <CLI11.hpp>

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gravising/droplet.hpp"
#include "gravising/gchain.hpp"
#include "gravising/lattice.hpp"
#include "gravising/mc.hpp"
#include "gravising/profile.hpp"
#include "gravising/thermo.hpp"

namespace fs = std::filesystem;
using namespace gravising;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;
constexpr int kExitFailure = 4;  // numerical failure inside a module

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string fmt(const std::optional<double>& value) {
  return value ? fmt(*value) : std::string("nan");
}

// Integers as integers, other numbers as the shortest decimal that reads back
// to the same double; other text unchanged.
std::string canonical_value(const std::string& text) {
  if (text.empty()) return text;
  char* end = nullptr;
  const long long integer = std::strtoll(text.c_str(), &end, 10);
  if (end == text.c_str() + text.size()) return std::to_string(integer);
  const double value = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || !std::isfinite(value)) return text;
  char buf[40];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, value);
    if (std::strtod(buf, nullptr) == value) break;
  }
  return buf;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t hash = 14695981039346656037ull;
  for (const unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

// ---------------------------------------------------------------------------
// Options

struct GlobalOptions {
  std::string output_dir = ".";
  unsigned threads = 1;
};

struct BackendOptions {
  std::string backend = "exact1d";
  double beta = 1.0;
  int dimension = 1;
  std::string table;
  double pressure_at_zero = 0.0;
};

struct ThermoOptions {
  BackendOptions backend;
  double h_min = -2.0;
  double h_max = 2.0;
  int points = 81;
};

struct ProfileOptions {
  BackendOptions backend;
  double g = -1.0;
  int exponent = 1;
  double m = 0.0;
  int side = 64;
  int cell_side = 8;
  double tol = 0.0;
};

struct ChainOptions {
  int n = 100;
  std::optional<double> mass;
  std::optional<double> g;
  bool constrained = false;
  std::uint64_t seed = 1;
  int count = 10;
  std::string mode = "samples";
  std::string scaling = "bridge";
  int grid = 5;
  double t_range = 1.0;
};

struct SimulateOptions {
  BackendOptions backend{"auto", 1.0, 1, {}, 0.0};
  int side = 256;
  int cell_side = 16;
  double g = -1.0;
  int exponent = 1;
  double m = 0.0;
  std::string boundary = "free";
  std::string normal;
  std::string proposal = "pair";
  std::string init = "random";
  int sweeps = 1000;
  int burn_in = 100;
  int measure_every = 10;
  int snapshot_every = 0;
  std::uint64_t seed = 1;
};

struct TabulateCliOptions {
  double beta = 1.0;
  int side = 32;
  int dimension = 2;
  double h_max = 1.0;
  int points = 21;
  int burn_in = 1000;
  int sweeps = 10000;
  std::uint64_t seed = 1;
};

struct DropletOptions {
  std::string tau = "isotropic";
  std::string tau_table;
  double gamma = 0.0;
  double m_star = 1.0;
  std::optional<double> area;
  std::optional<double> m;
  int vertices = 256;
  int max_iterations = 200000;
};

void add_backend_options(CLI::App* cmd, BackendOptions& o, const std::string& choices) {
  cmd->add_option("--backend", o.backend, "Thermodynamic backend: " + choices);
  cmd->add_option("--beta", o.beta, "Inverse temperature");
  cmd->add_option("--table", o.table, "h,m CSV for the tabulated backend");
  cmd->add_option("--pressure-at-zero", o.pressure_at_zero,
                  "Pressure at h = 0 for the tabulated backend");
}

// ---------------------------------------------------------------------------
// Validation helpers

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

void require_magnetization(double m) {
  require(m > -1.0 && m < 1.0, "--m must lie in the open interval (-1, 1), got " + fmt(m));
}

void require_divides(int side, int cell_side) {
  require(side >= 1, "--N must be positive");
  require(cell_side >= 1, "--a must be positive");
  require(side % cell_side == 0,
          "--a must divide --N (a_N | N), got N=" + std::to_string(side) +
              " a=" + std::to_string(cell_side));
}

void require_readable(const std::string& path, const std::string& flag) {
  require(!path.empty(), flag + " is required");
  std::ifstream probe(path);
  if (!probe) throw IoError("cannot read " + flag + " file '" + path + "'");
}

thermo::Backend make_backend(const BackendOptions& o) {
  require(std::isfinite(o.beta) && o.beta >= 0.0, "--beta must be non-negative, got " + fmt(o.beta));
  if (o.backend == "exact1d") return thermo::Backend::exact_1d(o.beta);
  if (o.backend == "meanfield") return thermo::Backend::mean_field(o.beta, o.dimension);
  if (o.backend == "tabulated") {
    require_readable(o.table, "--table");
    return thermo::Backend::tabulated_from_csv(o.beta, fs::path(o.table), o.pressure_at_zero);
  }
  throw ValidationError("--backend must be one of exact1d, meanfield, tabulated; got '" +
                        o.backend + "'");
}

// ---------------------------------------------------------------------------
// Run context: output directory, config echo and file headers

class Run {
 public:
  Run(fs::path dir, std::string config_text)
      : dir_(std::move(dir)), config_text_(std::move(config_text)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "# gravising %s config=%016" PRIx64, kVersion,
                  fnv1a(hashed_part(config_text_)));
    header_ = buf;
  }

  const std::string& header() const { return header_; }

  void prepare() const {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) {
      throw IoError("cannot create output directory '" + dir_.string() + "'");
    }
    auto out = open("run.config");
    out << config_text_;
    finish(out, "run.config");
  }

  /// Text file starting with the version and config-hash comment.
  std::ofstream open(const std::string& name) const {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw IoError("cannot write '" + (dir_ / name).string() + "'");
    out << header_ << '\n';
    return out;
  }

  void write_binary(const std::string& name, const std::string& bytes) const {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw IoError("cannot write '" + (dir_ / name).string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    finish(out, name);
  }

  void finish(std::ofstream& out, const std::string& name) const {
    out.flush();
    if (!out) throw IoError("write failed for '" + (dir_ / name).string() + "'");
  }

 private:
  // The output location and thread count do not change results.
  static std::string hashed_part(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::string kept;
    while (std::getline(in, line)) {
      if (line.rfind("output-dir=", 0) == 0 || line.rfind("threads=", 0) == 0) continue;
      kept += line + '\n';
    }
    return kept;
  }

  fs::path dir_;
  std::string config_text_;
  std::string header_;
};

std::string option_value(const CLI::Option* opt) {
  if (opt->count() > 0) {
    const auto& results = opt->results();
    if (opt->get_type_size() == 0) return results.empty() || results.back() != "false" ? "true" : "false";
    std::string joined;
    for (std::size_t k = 0; k < results.size(); ++k) joined += (k ? "," : "") + results[k];
    return joined;
  }
  if (opt->get_type_size() == 0) return "false";
  return opt->get_default_str();
}

std::string quote_if_needed(const std::string& value) {
  if (value.empty() || value.find_first_of(" #;=\"") != std::string::npos) {
    return "\"" + value + "\"";
  }
  return value;
}

// INI text with every option of the selected subcommand, defaults included.
std::string config_text(const CLI::App& app, const CLI::App& cmd) {
  std::string text;
  auto emit = [&text](const CLI::Option* opt) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config" || opt->get_lnames().empty()) return;
    const std::string value = option_value(opt);
    // Unset optional values are left out so they stay unset on re-reading.
    if (value.empty()) return;
    text += name + "=" + quote_if_needed(canonical_value(value)) + "\n";
  };
  for (const CLI::Option* opt : app.get_options()) emit(opt);
  text += "[" + cmd.get_name() + "]\n";
  for (const CLI::Option* opt : cmd.get_options()) emit(opt);
  return text;
}

// ---------------------------------------------------------------------------
// Subcommands

void write_cell_columns(std::ostream& out, const LatticeGeometry& geometry) {
  for (int axis = 0; axis < geometry.dimension(); ++axis) out << "cell_" << axis << ',';
}

void write_cell_index(std::ostream& out, const LatticeGeometry& geometry, std::int64_t cell) {
  const auto origin = geometry.cell_origin(cell);
  for (const int coordinate : origin) out << coordinate / geometry.cell_side() << ',';
}

int run_thermo(const ThermoOptions& o, const Run& run) {
  auto backend = make_backend(o.backend);
  require(o.points >= 2, "--points must be at least 2");
  require(std::isfinite(o.h_min) && std::isfinite(o.h_max) && o.h_min < o.h_max,
          "--h-min must be smaller than --h-max");
  const double limit = backend.field_limit();
  require(std::abs(o.h_min) <= limit && std::abs(o.h_max) <= limit,
          "field range exceeds the backend limit |h| <= " + fmt(limit));
  const auto points = thermo::sample_potentials(backend, o.h_min, o.h_max, o.points);
  run.prepare();
  auto out = run.open("thermo.csv");
  out << "h,pressure,magnetization\n";
  for (const auto& p : points) out << fmt(p.h) << ',' << fmt(p.pressure) << ',' << fmt(p.magnetization) << '\n';
  run.finish(out, "thermo.csv");
  std::cout << "backend=" << backend.name() << " m_star=" << fmt(backend.spontaneous_magnetization())
            << '\n';
  return 0;
}

int run_profile(const ProfileOptions& o, const Run& run) {
  require_magnetization(o.m);
  require_divides(o.side, o.cell_side);
  require(o.exponent == 1 || o.exponent == 2, "--exponent must be 1 or 2");
  require(std::isfinite(o.g), "--g must be finite");
  auto backend = make_backend(o.backend);
  const LatticeGeometry geometry(o.side, o.backend.dimension, o.cell_side);
  const auto field = FieldSpec::gravitational(geometry, o.g, o.exponent);
  const double limit = backend.magnetization_limit();
  require(std::abs(o.m) <= limit, "--m exceeds the backend magnetization limit " + fmt(limit));
  require(o.tol >= 0.0, "--tol must be non-negative");
  const auto solution = profile::optimal_profile(field, backend, o.m, o.tol);

  run.prepare();
  auto out = run.open("profile.csv");
  write_cell_columns(out, geometry);
  out << "height,q_star\n";
  for (std::int64_t cell = 0; cell < geometry.cell_count(); ++cell) {
    write_cell_index(out, geometry, cell);
    out << fmt(geometry.cell_height(cell)) << ',' << fmt(solution.profile.values[static_cast<std::size_t>(cell)])
        << '\n';
  }
  run.finish(out, "profile.csv");
  auto summary = run.open("profile_summary.csv");
  summary << "hbar,interface_height,psi\n"
          << fmt(solution.hbar) << ',' << fmt(solution.interface_height) << ',' << fmt(solution.psi_value)
          << '\n';
  run.finish(summary, "profile_summary.csv");
  std::cout << "hbar=" << fmt(solution.hbar) << " interface_height=" << fmt(solution.interface_height)
            << " psi=" << fmt(solution.psi_value) << '\n';
  return 0;
}

double bridge_limit(double t1, double t2, bool constrained) {
  const double s = std::min(t1, t2);
  const double t = std::max(t1, t2);
  double value = 2.0 * s * (1.0 - t);
  if (constrained) value -= 6.0 * s * t * (1.0 - s) * (1.0 - t);
  return value;
}

int run_chain(const ChainOptions& o, const GlobalOptions& global, const Run& run) {
  require(o.n >= 1, "--n must be positive");
  require(!(o.mass && o.g), "give either --mass or --g, not both");
  require(o.count >= 0, "--count must be non-negative");
  require(o.mode == "samples" || o.mode == "table", "--mode must be samples or table");
  require(o.scaling == "bridge" || o.scaling == "window", "--scaling must be bridge or window");
  gchain::GaussianChain chain{o.n, 0.0, o.constrained};
  if (o.g) {
    require(std::isfinite(*o.g) && *o.g >= 0.0, "--g must be non-negative");
    chain = gchain::GaussianChain::with_scaled_mass(o.n, *o.g, o.constrained);
  } else if (o.mass) {
    require(std::isfinite(*o.mass) && *o.mass >= 0.0, "--mass must be non-negative");
    chain.mass = *o.mass;
  }
  gchain::validate(chain);

  if (o.mode == "samples") {
    run.prepare();
    const auto samples = gchain::sample(chain, o.seed, static_cast<std::size_t>(o.count), global.threads);
    auto out = run.open("chain_samples.csv");
    out << "sample,index,phi\n";
    for (std::size_t s = 0; s < samples.size(); ++s) {
      for (std::size_t i = 0; i < samples[s].size(); ++i) {
        out << s << ',' << i + 1 << ',' << fmt(samples[s][i]) << '\n';
      }
    }
    run.finish(out, "chain_samples.csv");
    std::cout << "samples=" << samples.size() << " n=" << o.n << " mass=" << fmt(chain.mass) << '\n';
    return 0;
  }

  require(o.grid >= 1, "--grid must be positive");
  const bool window = o.scaling == "window";
  if (window) {
    require(o.n % 2 == 0, "window scaling needs even --n, got " + std::to_string(o.n));
    require(o.g.has_value() && *o.g > 0.0, "window scaling needs --g > 0");
    require(o.t_range > 0.0, "--t-range must be positive");
  } else {
    require(chain.mass == 0.0, "bridge tables compare with the massless limit; use mass 0");
  }
  const gchain::RescaledProcess process(chain, window ? gchain::Scaling::Window : gchain::Scaling::Bridge,
                                        o.g.value_or(0.0));
  run.prepare();
  std::vector<double> times;
  for (int k = 0; k < o.grid; ++k) {
    if (window) {
      const double span = std::min(o.t_range, std::min(-process.t_min(), process.t_max()));
      times.push_back(o.grid == 1 ? 0.0 : -span + 2.0 * span * k / (o.grid - 1));
    } else {
      times.push_back(static_cast<double>(k + 1) / (o.grid + 1));
    }
  }
  auto out = run.open("chain_covariance.csv");
  out << "t1,t2,exact,limit,deviation\n";
  for (const double t1 : times) {
    for (const double t2 : times) {
      const double exact = process.covariance(t1, t2);
      const double limit = window ? gchain::ou_covariance(*o.g, t1, t2) : bridge_limit(t1, t2, o.constrained);
      out << fmt(t1) << ',' << fmt(t2) << ',' << fmt(exact) << ',' << fmt(limit) << ','
          << fmt(exact - limit) << '\n';
    }
  }
  run.finish(out, "chain_covariance.csv");
  std::cout << "table=" << times.size() * times.size() << " n=" << o.n << " mass=" << fmt(chain.mass) << '\n';
  return 0;
}

mc::Boundary make_boundary(const SimulateOptions& o, int dimension) {
  if (o.boundary == "free") return mc::Boundary::free();
  if (o.boundary == "plus") return mc::Boundary::plus();
  if (o.boundary == "minus") return mc::Boundary::minus();
  if (o.boundary == "dobrushin") {
    std::vector<double> normal(static_cast<std::size_t>(dimension), 0.0);
    if (o.normal.empty()) {
      normal.back() = 1.0;
    } else {
      std::stringstream in(o.normal);
      std::string item;
      normal.clear();
      while (std::getline(in, item, ',')) {
        char* end = nullptr;
        const double v = std::strtod(item.c_str(), &end);
        require(end != item.c_str() && *end == '\0' && std::isfinite(v), "--normal: cannot parse '" + item + "'");
        normal.push_back(v);
      }
      require(static_cast<int>(normal.size()) == dimension, "--normal needs one component per dimension");
    }
    return mc::Boundary::dobrushin(normal);
  }
  throw ValidationError("--boundary must be one of free, plus, minus, dobrushin; got '" + o.boundary + "'");
}

int run_simulate(const SimulateOptions& o, const Run& run) {
  require_magnetization(o.m);
  require_divides(o.side, o.cell_side);
  require(o.exponent == 1 || o.exponent == 2, "--exponent must be 1 or 2");
  require(o.sweeps >= 0 && o.burn_in >= 0, "--sweeps and --burn-in must be non-negative");
  require(o.measure_every >= 1, "--measure-every must be positive");
  require(o.snapshot_every >= 0, "--snapshot-every must be non-negative");
  require(o.snapshot_every == 0 || o.backend.dimension == 2, "PGM snapshots need --d 2");
  require(o.proposal == "pair" || o.proposal == "nn", "--proposal must be pair or nn");
  require(o.init == "random" || o.init == "layered", "--init must be random or layered");

  BackendOptions backend_options = o.backend;
  if (backend_options.backend == "auto") {
    backend_options.backend = o.backend.dimension == 1 ? "exact1d" : "meanfield";
  }
  auto backend = make_backend(backend_options);
  const LatticeGeometry geometry(o.side, o.backend.dimension, o.cell_side);
  const auto field = FieldSpec::gravitational(geometry, o.g, o.exponent);
  const auto boundary = make_boundary(o, o.backend.dimension);
  const std::int64_t magnetization = mc::quantize_magnetization(o.m, geometry);
  const double m_exact = static_cast<double>(magnetization) / static_cast<double>(geometry.site_count());
  require(std::abs(m_exact) <= backend.magnetization_limit(),
          "--m exceeds the backend magnetization limit " + fmt(backend.magnetization_limit()));
  const auto reference = profile::optimal_profile(field, backend, m_exact).profile;

  auto config = mc::initial_configuration(geometry, boundary, magnetization,
                                          o.init == "layered" ? mc::InitialState::Layered : mc::InitialState::Random,
                                          field, o.seed);
  mc::CanonicalSampler sampler(std::move(config), backend.beta(), field,
                               o.proposal == "pair" ? mc::ProposalKind::ArbitraryPair
                                                    : mc::ProposalKind::NearestNeighbour,
                               gchain::mix_seed(o.seed, 1));
  mc::ProfileAverager averager(geometry, o.cell_side);

  run.prepare();
  auto out = run.open("measurements.csv");
  out << "sweep,energy,distance_to_qstar,interface_height\n";
  auto snapshot_name = [](int sweep) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "snapshot_%08d.pgm", sweep);
    return std::string(buf);
  };
  auto measure = [&](int sweep) {
    const auto coarse = mc::coarse_grain(sampler.configuration(), o.cell_side);
    std::optional<double> height;
    if (const auto estimate = mc::interface_height_estimate(coarse)) height = estimate->height;
    out << sweep << ',' << fmt(sampler.energy()) << ',' << fmt(mc::concentration_distance(coarse, reference))
        << ',' << fmt(height) << '\n';
    if (sweep > o.burn_in || (o.burn_in == 0 && sweep == 0)) averager.add(sampler.configuration());
  };
  measure(0);
  if (o.snapshot_every > 0) run.write_binary(snapshot_name(0), mc::snapshot_bytes(sampler.configuration()));
  for (int sweep = 1; sweep <= o.sweeps; ++sweep) {
    sampler.sweep(1);
    if (sweep % o.measure_every == 0 || sweep == o.sweeps) measure(sweep);
    if (o.snapshot_every > 0 && sweep % o.snapshot_every == 0) {
      run.write_binary(snapshot_name(sweep), mc::snapshot_bytes(sampler.configuration()));
    }
  }
  run.finish(out, "measurements.csv");

  const auto final_profile = mc::coarse_grain(sampler.configuration(), o.cell_side);
  const auto average = averager.count() > 0 ? std::optional(averager.mean()) : std::nullopt;
  auto prof = run.open("final_profile.csv");
  write_cell_columns(prof, geometry);
  prof << "height,m_final,m_average,q_star\n";
  for (std::int64_t cell = 0; cell < geometry.cell_count(); ++cell) {
    const auto k = static_cast<std::size_t>(cell);
    write_cell_index(prof, geometry, cell);
    prof << fmt(geometry.cell_height(cell)) << ',' << fmt(final_profile.values[k]) << ','
         << fmt(average ? std::optional(average->values[k]) : std::nullopt) << ',' << fmt(reference.values[k])
         << '\n';
  }
  run.finish(prof, "final_profile.csv");
  std::cout << "distance_final=" << fmt(mc::concentration_distance(final_profile, reference))
            << " distance_average="
            << fmt(average ? std::optional(mc::concentration_distance(*average, reference)) : std::nullopt)
            << " acceptance=" << fmt(sampler.stats().acceptance_rate()) << '\n';
  return 0;
}

int run_tabulate(const TabulateCliOptions& o, const GlobalOptions& global, const Run& run) {
  require(std::isfinite(o.beta) && o.beta >= 0.0, "--beta must be non-negative");
  require(o.side >= 2, "--N must be at least 2");
  require(o.dimension >= 1 && o.dimension <= 3, "--d must be 1, 2 or 3");
  require(o.points >= 2, "--points must be at least 2");
  require(std::isfinite(o.h_max) && o.h_max > 0.0, "--h-max must be positive");
  require(o.burn_in >= 0 && o.sweeps >= 1, "--burn-in must be non-negative and --sweeps positive");
  std::vector<double> fields;
  for (int k = 0; k < o.points; ++k) fields.push_back(o.h_max * k / (o.points - 1));
  mc::TabulateOptions options;
  options.side = o.side;
  options.dimension = o.dimension;
  options.burn_in = o.burn_in;
  options.sweeps = o.sweeps;
  options.seed = o.seed;
  options.threads = global.threads;
  const auto isotherm = mc::tabulate_isotherm(o.beta, fields, options);
  run.prepare();
  auto out = run.open("isotherm.csv");
  out << "h,m\n";
  for (const auto& p : isotherm) out << fmt(p.h) << ',' << fmt(p.m) << '\n';
  run.finish(out, "isotherm.csv");
  std::cout << "m_star_estimate=" << fmt(isotherm.front().m) << '\n';
  return 0;
}

int run_droplet(const DropletOptions& o, const Run& run) {
  require(!(o.area && o.m), "give either --area or --m, not both");
  require(std::isfinite(o.gamma), "--gamma must be finite");
  require(o.m_star > 0.0 && o.m_star <= 1.0, "--m-star must lie in (0, 1]");
  require(o.vertices >= 8, "--vertices must be at least 8");
  require(o.max_iterations >= 1, "--max-iterations must be positive");
  double area = 0.1;
  if (o.area) area = *o.area;
  if (o.m) {
    require(std::abs(*o.m) < o.m_star, "--m must lie in (-m*, m*)");
    area = droplet::phase_fraction(o.m_star, *o.m);
  }
  require(area > 0.0 && area < 1.0, "--area must lie in (0, 1), got " + fmt(area));

  std::optional<droplet::SurfaceTension> tau;
  if (o.tau == "isotropic") {
    tau = droplet::SurfaceTension::isotropic();
  } else if (o.tau == "ell1") {
    tau = droplet::SurfaceTension::ell1();
  } else if (o.tau == "tabulated") {
    require_readable(o.tau_table, "--tau-table");
    tau = droplet::SurfaceTension::tabulated_from_csv(fs::path(o.tau_table));
  } else {
    throw ValidationError("--tau must be one of isotropic, ell1, tabulated; got '" + o.tau + "'");
  }

  droplet::MinimizeOptions options;
  options.vertices = o.vertices;
  options.max_iterations = o.max_iterations;
  const auto result = droplet::minimize_droplet(*tau, o.gamma, o.m_star, area, options);
  run.prepare();
  auto poly = run.open("droplet_polygon.csv");
  poly << "x,y\n";
  for (const auto& p : result.shape.polygon) poly << fmt(p.x) << ',' << fmt(p.y) << '\n';
  run.finish(poly, "droplet_polygon.csv");
  auto trace = run.open("droplet_trace.csv");
  trace << "step,energy\n";
  for (std::size_t k = 0; k < result.trace.size(); ++k) trace << k << ',' << fmt(result.trace[k]) << '\n';
  run.finish(trace, "droplet_trace.csv");
  const auto c = droplet::centroid(result.shape.polygon);
  std::cout << "energy=" << fmt(result.energy) << " converged=" << (result.converged ? "true" : "false")
            << " centroid_x=" << fmt(c.x) << " centroid_y=" << fmt(c.y) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ising crystals in slowly varying fields: thermodynamics, optimal profiles, "
               "Gaussian interface chains, canonical Monte Carlo and droplet shapes."};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "Read options from an INI file (e.g. an emitted run.config)");
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--output-dir", global.output_dir, "Directory for output files")
      ->envname("GRAVISING_OUTPUT_DIR")
      ->capture_default_str();
  app.add_option("--threads", global.threads, "Maximum worker threads")->capture_default_str();

  ThermoOptions thermo_o;
  auto* thermo_cmd = app.add_subcommand("thermo", "Pressure and magnetization isotherm as CSV");
  add_backend_options(thermo_cmd, thermo_o.backend, "exact1d, meanfield, tabulated");
  thermo_cmd->add_option("--d", thermo_o.backend.dimension, "Dimension (mean-field coordination 2d)");
  thermo_cmd->add_option("--h-min", thermo_o.h_min, "Smallest field");
  thermo_cmd->add_option("--h-max", thermo_o.h_max, "Largest field");
  thermo_cmd->add_option("--points", thermo_o.points, "Number of field values");

  ProfileOptions profile_o;
  auto* profile_cmd = app.add_subcommand("profile", "Optimal mesoscopic profile for a gravitational field");
  add_backend_options(profile_cmd, profile_o.backend, "exact1d, meanfield, tabulated");
  profile_cmd->add_option("--d", profile_o.backend.dimension, "Lattice dimension");
  profile_cmd->add_option("--g", profile_o.g, "Field intensity");
  profile_cmd->add_option("--exponent", profile_o.exponent, "Field scaling exponent (1 or 2)");
  profile_cmd->add_option("--m", profile_o.m, "Total magnetization per site");
  profile_cmd->add_option("--N", profile_o.side, "Box side");
  profile_cmd->add_option("--a", profile_o.cell_side, "Coarse cell side a_N");
  profile_cmd->add_option("--tol", profile_o.tol, "Tolerance of the h-bar search (0: adjacent doubles)");

  ChainOptions chain_o;
  auto* chain_cmd = app.add_subcommand("chain", "Dirichlet Gaussian chain samples or covariance tables");
  chain_cmd->add_option("--n", chain_o.n, "Chain length");
  auto* mass_opt = chain_cmd->add_option("--mass", chain_o.mass, "Chain mass");
  chain_cmd->add_option("--g", chain_o.g, "Scaled mass: mass = g / sqrt(n)")->excludes(mass_opt);
  chain_cmd->add_flag("--constrained", chain_o.constrained, "Condition on zero signed area");
  chain_cmd->add_option("--seed", chain_o.seed, "Random seed");
  chain_cmd->add_option("--count", chain_o.count, "Number of samples");
  chain_cmd->add_option("--mode", chain_o.mode, "samples or table");
  chain_cmd->add_option("--scaling", chain_o.scaling, "bridge or window (table mode)");
  chain_cmd->add_option("--grid", chain_o.grid, "Points per axis of the t grid (table mode)");
  chain_cmd->add_option("--t-range", chain_o.t_range, "Window half-width in t (table mode)");

  SimulateOptions sim_o;
  auto* sim_cmd = app.add_subcommand("simulate", "Canonical spin-exchange Monte Carlo in a gravitational field");
  add_backend_options(sim_cmd, sim_o.backend, "auto, exact1d, meanfield, tabulated (reference profile)");
  sim_cmd->add_option("--d", sim_o.backend.dimension, "Lattice dimension");
  sim_cmd->add_option("--N", sim_o.side, "Box side");
  sim_cmd->add_option("--a", sim_o.cell_side, "Coarse cell side a_N");
  sim_cmd->add_option("--g", sim_o.g, "Field intensity");
  sim_cmd->add_option("--exponent", sim_o.exponent, "Field scaling exponent (1 or 2)");
  sim_cmd->add_option("--m", sim_o.m, "Total magnetization per site");
  sim_cmd->add_option("--boundary", sim_o.boundary, "free, plus, minus or dobrushin");
  sim_cmd->add_option("--normal", sim_o.normal, "Dobrushin normal, comma separated");
  sim_cmd->add_option("--proposal", sim_o.proposal, "pair (any +/- pair) or nn (nearest neighbours)");
  sim_cmd->add_option("--init", sim_o.init, "random or layered");
  sim_cmd->add_option("--sweeps", sim_o.sweeps, "Total sweeps");
  sim_cmd->add_option("--burn-in", sim_o.burn_in, "Sweeps before profile averaging starts");
  sim_cmd->add_option("--measure-every", sim_o.measure_every, "Sweeps between measurements");
  sim_cmd->add_option("--snapshot-every", sim_o.snapshot_every, "Sweeps between PGM snapshots (0: none)");
  sim_cmd->add_option("--seed", sim_o.seed, "Random seed");

  TabulateCliOptions tab_o;
  auto* tab_cmd = app.add_subcommand("tabulate", "Monte Carlo isotherm h,m for the tabulated backend");
  tab_cmd->add_option("--beta", tab_o.beta, "Inverse temperature");
  tab_cmd->add_option("--N", tab_o.side, "Periodic box side");
  tab_cmd->add_option("--d", tab_o.dimension, "Lattice dimension");
  tab_cmd->add_option("--h-max", tab_o.h_max, "Largest field");
  tab_cmd->add_option("--points", tab_o.points, "Number of field values from 0 to h-max");
  tab_cmd->add_option("--burn-in", tab_o.burn_in, "Sweeps discarded per field");
  tab_cmd->add_option("--sweeps", tab_o.sweeps, "Measured sweeps per field");
  tab_cmd->add_option("--seed", tab_o.seed, "Random seed");

  DropletOptions drop_o;
  auto* drop_cmd = app.add_subcommand("droplet", "Minimal droplet shape with surface tension and gravity");
  drop_cmd->add_option("--tau", drop_o.tau, "isotropic, ell1 or tabulated");
  drop_cmd->add_option("--tau-table", drop_o.tau_table, "angle,tau CSV for --tau tabulated");
  drop_cmd->add_option("--gamma", drop_o.gamma, "Signed gravity coefficient; > 0 penalizes height");
  drop_cmd->add_option("--m-star", drop_o.m_star, "Spontaneous magnetization");
  auto* area_opt = drop_cmd->add_option("--area", drop_o.area, "Droplet area (default 0.1)");
  drop_cmd->add_option("--m", drop_o.m, "Magnetization; area = (m* + m) / (2 m*)")->excludes(area_opt);
  drop_cmd->add_option("--vertices", drop_o.vertices, "Polygon vertices");
  drop_cmd->add_option("--max-iterations", drop_o.max_iterations, "Descent iteration cap");

  for (auto* cmd : app.get_subcommands({})) {
    cmd->configurable();
    for (auto* opt : cmd->get_options()) opt->capture_default_str();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::FileError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  const CLI::App* cmd = app.get_subcommands().front();
  try {
    require(global.threads >= 1, "--threads must be at least 1");
    const Run run(global.output_dir, config_text(app, *cmd));
    const std::string name = cmd->get_name();
    if (name == "thermo") return run_thermo(thermo_o, run);
    if (name == "profile") return run_profile(profile_o, run);
    if (name == "chain") return run_chain(chain_o, global, run);
    if (name == "simulate") return run_simulate(sim_o, run);
    if (name == "tabulate") return run_tabulate(tab_o, global, run);
    if (name == "droplet") return run_droplet(drop_o, run);
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}
