#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "gravising/droplet.hpp"
#include "gravising/gchain.hpp"
#include "gravising/lattice.hpp"
#include "gravising/mc.hpp"
#include "gravising/profile.hpp"
#include "gravising/thermo.hpp"

namespace py = pybind11;
using namespace gravising;

namespace {

py::array_t<double> to_array(const std::vector<double>& values) {
  py::array_t<double> out(static_cast<py::ssize_t>(values.size()));
  std::copy(values.begin(), values.end(), out.mutable_data());
  return out;
}

py::array_t<double> points_array(const std::vector<droplet::Point>& points) {
  py::array_t<double> out({static_cast<py::ssize_t>(points.size()), py::ssize_t{2}});
  auto view = out.mutable_unchecked<2>();
  for (std::size_t k = 0; k < points.size(); ++k) {
    view(k, 0) = points[k].x;
    view(k, 1) = points[k].y;
  }
  return out;
}

std::vector<droplet::Point> points_from(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2 || a.shape(1) != 2) throw std::invalid_argument("expected an (n, 2) array of vertices");
  std::vector<droplet::Point> points(static_cast<std::size_t>(a.shape(0)));
  auto view = a.unchecked<2>();
  for (py::ssize_t k = 0; k < a.shape(0); ++k) points[static_cast<std::size_t>(k)] = {view(k, 0), view(k, 1)};
  return points;
}

void bind_thermo(py::module_& m) {
  py::class_<thermo::Backend>(m, "Backend")
      .def_static("exact_1d", &thermo::Backend::exact_1d, py::arg("beta"))
      .def_static("mean_field", &thermo::Backend::mean_field, py::arg("beta"), py::arg("dimension"))
      .def_static("tabulated", &thermo::Backend::tabulated, py::arg("beta"), py::arg("fields"),
                  py::arg("magnetizations"), py::arg("pressure_at_zero") = 0.0)
      .def_static(
          "tabulated_from_csv",
          [](double beta, const std::filesystem::path& path, double p0) {
            return thermo::Backend::tabulated_from_csv(beta, path, p0);
          },
          py::arg("beta"), py::arg("path"), py::arg("pressure_at_zero") = 0.0)
      .def_property_readonly("beta", &thermo::Backend::beta)
      .def_property_readonly("name", &thermo::Backend::name)
      .def("pressure", &thermo::Backend::pressure, py::arg("h"))
      .def("magnetization", &thermo::Backend::magnetization, py::arg("h"))
      .def("spontaneous_magnetization", &thermo::Backend::spontaneous_magnetization)
      .def("has_plateau", &thermo::Backend::has_plateau)
      .def("free_energy", &thermo::Backend::free_energy, py::arg("m"))
      .def("field_for_magnetization", &thermo::Backend::field_for_magnetization, py::arg("m"))
      .def("field_limit", &thermo::Backend::field_limit)
      .def("magnetization_limit", &thermo::Backend::magnetization_limit)
      .def("__repr__", [](const thermo::Backend& b) {
        return "<Backend " + b.name() + " beta=" + std::to_string(b.beta()) + ">";
      });
  m.def("solve_field_by_bisection", &thermo::solve_field_by_bisection, py::arg("backend"), py::arg("m"),
        py::arg("tol") = 1e-10);
  m.def("spin_entropy", &thermo::spin_entropy, py::arg("m"));
}

void bind_lattice(py::module_& m) {
  py::class_<LatticeGeometry>(m, "LatticeGeometry")
      .def(py::init<int, int, int>(), py::arg("side"), py::arg("dimension"), py::arg("cell_side"))
      .def_property_readonly("side", &LatticeGeometry::side)
      .def_property_readonly("dimension", &LatticeGeometry::dimension)
      .def_property_readonly("cell_side", &LatticeGeometry::cell_side)
      .def_property_readonly("site_count", &LatticeGeometry::site_count)
      .def_property_readonly("cell_count", &LatticeGeometry::cell_count)
      .def("cell_height", &LatticeGeometry::cell_height, py::arg("cell"));

  py::class_<FieldSpec>(m, "FieldSpec")
      .def_static("gravitational", &FieldSpec::gravitational, py::arg("geometry"), py::arg("g"),
                  py::arg("exponent") = 1)
      .def_static("explicit_cells", &FieldSpec::explicit_cells, py::arg("geometry"), py::arg("cell_values"))
      .def_static("constant", &FieldSpec::constant, py::arg("geometry"), py::arg("value"))
      .def_property_readonly("geometry", &FieldSpec::geometry)
      .def("cell_values", [](const FieldSpec& f) { return to_array(f.cell_values()); })
      .def("site_values", [](const FieldSpec& f) { return to_array(f.site_values()); })
      .def("sup_norm", &FieldSpec::sup_norm)
      .def("variation_bound", &FieldSpec::variation_bound);
}

void bind_profile(py::module_& m) {
  py::class_<profile::MesoProfile>(m, "MesoProfile")
      .def(py::init([](LatticeGeometry g, std::vector<double> v, double target) {
             return profile::MesoProfile{g, std::move(v), target};
           }),
           py::arg("geometry"), py::arg("values"), py::arg("target_m"))
      .def_readonly("geometry", &profile::MesoProfile::geometry)
      .def_property_readonly("values", [](const profile::MesoProfile& p) { return to_array(p.values); })
      .def_readonly("target_m", &profile::MesoProfile::target_m)
      .def("mean", &profile::MesoProfile::mean);

  py::class_<profile::ProfileSolution>(m, "ProfileSolution")
      .def_readonly("hbar", &profile::ProfileSolution::hbar)
      .def_readonly("profile", &profile::ProfileSolution::profile)
      .def_readonly("plateau_cells", &profile::ProfileSolution::plateau_cells)
      .def_readonly("plateau_value", &profile::ProfileSolution::plateau_value)
      .def_readonly("psi", &profile::ProfileSolution::psi_value)
      .def_readonly("interface_height", &profile::ProfileSolution::interface_height);

  m.def("solve_hbar", &profile::solve_hbar, py::arg("field"), py::arg("backend"), py::arg("m"),
        py::arg("tol") = 1e-8);
  m.def("optimal_profile", &profile::optimal_profile, py::arg("field"), py::arg("backend"), py::arg("m"),
        py::arg("tol") = 0.0);
  m.def("psi", &profile::psi, py::arg("field"), py::arg("backend"), py::arg("q"));

  py::class_<profile::ContinuumProfile>(m, "ContinuumProfile")
      .def_property_readonly("hbar", &profile::ContinuumProfile::hbar)
      .def_property_readonly("g", &profile::ContinuumProfile::g)
      .def("interface_height", &profile::ContinuumProfile::interface_height)
      .def("__call__", &profile::ContinuumProfile::operator(), py::arg("height"));
  m.def("continuum_gravity_profile", &profile::continuum_gravity_profile, py::arg("backend"), py::arg("g"),
        py::arg("m"), py::arg("tol") = 1e-12);
}

void bind_gchain(py::module_& m) {
  py::class_<gchain::GaussianChain>(m, "GaussianChain")
      .def(py::init([](int n, double mass, bool constrained) {
             gchain::GaussianChain c{n, mass, constrained};
             gchain::validate(c);
             return c;
           }),
           py::arg("n"), py::arg("mass") = 0.0, py::arg("constrained") = false)
      .def_static("with_scaled_mass", &gchain::GaussianChain::with_scaled_mass, py::arg("n"), py::arg("g"),
                  py::arg("constrained") = false)
      .def_readonly("n", &gchain::GaussianChain::n)
      .def_readonly("mass", &gchain::GaussianChain::mass)
      .def_readonly("constrained", &gchain::GaussianChain::constrained);

  py::enum_<gchain::Scaling>(m, "Scaling")
      .value("Bridge", gchain::Scaling::Bridge)
      .value("Window", gchain::Scaling::Window);

  m.def("nu", &gchain::nu, py::arg("mass"));
  m.def("covariance", &gchain::covariance, py::arg("chain"), py::arg("i"), py::arg("j"));
  m.def("conditioned_covariance", &gchain::conditioned_covariance, py::arg("chain"), py::arg("i"),
        py::arg("j"));
  m.def(
      "area_covariances",
      [](const gchain::GaussianChain& c) {
        const auto a = gchain::area_covariances(c);
        return py::make_tuple(to_array(a.with_height), a.area_variance);
      },
      py::arg("chain"), "Returns (E(X phi_i) for i = 1..n, E(X^2)).");
  m.def("rescaled_covariance", &gchain::rescaled_covariance, py::arg("chain"), py::arg("scaling"),
        py::arg("t1"), py::arg("t2"), py::arg("g") = 0.0);
  m.def("ou_covariance", &gchain::ou_covariance, py::arg("g"), py::arg("t1"), py::arg("t2"));
  m.def(
      "sample",
      [](const gchain::GaussianChain& c, std::uint64_t seed, std::size_t count, unsigned threads) {
        const auto samples = gchain::sample(c, seed, count, threads);
        py::array_t<double> out({static_cast<py::ssize_t>(count), static_cast<py::ssize_t>(c.n)});
        auto view = out.mutable_unchecked<2>();
        for (std::size_t s = 0; s < count; ++s) {
          for (int i = 0; i < c.n; ++i) view(s, i) = samples[s][static_cast<std::size_t>(i)];
        }
        return out;
      },
      py::arg("chain"), py::arg("seed"), py::arg("count"), py::arg("threads") = 1);
  m.def("mix_seed", &gchain::mix_seed, py::arg("seed"), py::arg("index"));
}

void bind_mc(py::module_& m) {
  py::enum_<mc::ProposalKind>(m, "ProposalKind")
      .value("NearestNeighbour", mc::ProposalKind::NearestNeighbour)
      .value("ArbitraryPair", mc::ProposalKind::ArbitraryPair);
  py::enum_<mc::InitialState>(m, "InitialState")
      .value("Random", mc::InitialState::Random)
      .value("Layered", mc::InitialState::Layered);

  py::class_<mc::Boundary>(m, "Boundary")
      .def_static("free", &mc::Boundary::free)
      .def_static("plus", &mc::Boundary::plus)
      .def_static("minus", &mc::Boundary::minus)
      .def_static("dobrushin", &mc::Boundary::dobrushin, py::arg("normal"));

  py::class_<mc::SpinConfiguration>(m, "SpinConfiguration")
      .def_property_readonly("geometry", &mc::SpinConfiguration::geometry)
      .def("magnetization", &mc::SpinConfiguration::magnetization)
      .def("spins", [](const mc::SpinConfiguration& c) {
        const auto s = c.spins();
        py::array_t<std::int8_t> out(static_cast<py::ssize_t>(s.size()));
        std::copy(s.begin(), s.end(), out.mutable_data());
        return out;
      });

  m.def("quantize_magnetization", &mc::quantize_magnetization, py::arg("m"), py::arg("geometry"));
  m.def("initial_configuration", &mc::initial_configuration, py::arg("geometry"), py::arg("boundary"),
        py::arg("magnetization"), py::arg("state"), py::arg("field"), py::arg("seed"));
  m.def("energy", py::overload_cast<const mc::SpinConfiguration&, const FieldSpec&>(&mc::energy),
        py::arg("config"), py::arg("field"));

  py::class_<mc::CanonicalSampler>(m, "CanonicalSampler")
      .def(py::init<mc::SpinConfiguration, double, FieldSpec, mc::ProposalKind, std::uint64_t>(),
           py::arg("config"), py::arg("beta"), py::arg("field"), py::arg("proposal"), py::arg("seed"))
      .def("sweep", &mc::CanonicalSampler::sweep, py::arg("count") = 1,
           py::call_guard<py::gil_scoped_release>())
      .def("energy", &mc::CanonicalSampler::energy)
      .def("acceptance_rate", [](const mc::CanonicalSampler& s) { return s.stats().acceptance_rate(); })
      .def_property_readonly("sweeps_done", &mc::CanonicalSampler::sweeps_done)
      .def("configuration", &mc::CanonicalSampler::configuration);

  m.def("coarse_grain", &mc::coarse_grain, py::arg("config"), py::arg("cell_side"));
  m.def("concentration_distance", &mc::concentration_distance, py::arg("empirical"), py::arg("reference"));
  m.def("snapshot_bytes", [](const mc::SpinConfiguration& c) { return py::bytes(mc::snapshot_bytes(c)); });
  m.def(
      "interface_height_estimate",
      [](const profile::MesoProfile& p) -> std::optional<py::tuple> {
        const auto e = mc::interface_height_estimate(p);
        if (!e) return std::nullopt;
        return py::make_tuple(e->height, e->jump, e->width);
      },
      py::arg("profile"), "Returns (height, jump, width) or None.");
  m.def(
      "tabulate_isotherm",
      [](double beta, const std::vector<double>& fields, int side, int dimension, int burn_in, int sweeps,
         std::uint64_t seed, unsigned threads) {
        mc::TabulateOptions o;
        o.side = side;
        o.dimension = dimension;
        o.burn_in = burn_in;
        o.sweeps = sweeps;
        o.seed = seed;
        o.threads = threads;
        std::vector<double> m_values;
        {
          py::gil_scoped_release release;
          for (const auto& p : mc::tabulate_isotherm(beta, fields, o)) m_values.push_back(p.m);
        }
        return to_array(m_values);
      },
      py::arg("beta"), py::arg("fields"), py::arg("side") = 32, py::arg("dimension") = 2,
      py::arg("burn_in") = 1000, py::arg("sweeps") = 10000, py::arg("seed") = 1, py::arg("threads") = 1);
}

void bind_droplet(py::module_& m) {
  py::class_<droplet::SurfaceTension>(m, "SurfaceTension")
      .def_static("isotropic", &droplet::SurfaceTension::isotropic, py::arg("value") = 1.0)
      .def_static("ell1", &droplet::SurfaceTension::ell1)
      .def_static("tabulated", &droplet::SurfaceTension::tabulated, py::arg("angles"), py::arg("values"))
      .def_static(
          "tabulated_from_csv",
          [](const std::filesystem::path& p) { return droplet::SurfaceTension::tabulated_from_csv(p); },
          py::arg("path"))
      .def_property_readonly("name", &droplet::SurfaceTension::name)
      .def("__call__", &droplet::SurfaceTension::operator(), py::arg("nx"), py::arg("ny"))
      .def("at_angle", &droplet::SurfaceTension::at_angle, py::arg("theta"));

  m.def("phase_fraction", &droplet::phase_fraction, py::arg("m_star"), py::arg("m"));
  m.def(
      "wulff_shape",
      [](const droplet::SurfaceTension& tau, double area, int directions) {
        return points_array(droplet::wulff_shape(tau, area, directions).polygon);
      },
      py::arg("tau"), py::arg("area"), py::arg("directions") = 720);
  m.def(
      "droplet_energy",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& polygon,
         const droplet::SurfaceTension& tau, double gamma, double m_star) {
        return droplet::droplet_energy(points_from(polygon), tau, gamma, m_star);
      },
      py::arg("polygon"), py::arg("tau"), py::arg("gamma"), py::arg("m_star"));
  m.def("isoperimetric_ratio",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& polygon) {
          return droplet::isoperimetric_ratio(points_from(polygon));
        });
  m.def("centroid", [](const py::array_t<double, py::array::c_style | py::array::forcecast>& polygon) {
    const auto c = droplet::centroid(points_from(polygon));
    return py::make_tuple(c.x, c.y);
  });
  m.def(
      "minimize_droplet",
      [](const droplet::SurfaceTension& tau, double gamma, double m_star, double area, int vertices,
         int max_iterations) {
        droplet::MinimizeOptions o;
        o.vertices = vertices;
        o.max_iterations = max_iterations;
        const auto r = droplet::minimize_droplet(tau, gamma, m_star, area, o);
        py::dict out;
        out["polygon"] = points_array(r.shape.polygon);
        out["energy"] = r.energy;
        out["iterations"] = r.iterations;
        out["converged"] = r.converged;
        out["trace"] = to_array(r.trace);
        return out;
      },
      py::arg("tau"), py::arg("gamma"), py::arg("m_star"), py::arg("area"), py::arg("vertices") = 256,
      py::arg("max_iterations") = 200000);
}

}  // namespace

PYBIND11_MODULE(_gravising, m) {
  m.doc() = "Ising crystals in slowly varying fields.";
  m.attr("__version__") = "0.1.0";
  auto thermo_m = m.def_submodule("thermo", "Homogeneous thermodynamic backends");
  bind_thermo(thermo_m);
  bind_lattice(m);
  auto profile_m = m.def_submodule("profile", "Optimal mesoscopic profiles");
  bind_profile(profile_m);
  auto gchain_m = m.def_submodule("gchain", "Dirichlet Gaussian chains");
  bind_gchain(gchain_m);
  auto mc_m = m.def_submodule("mc", "Canonical spin-exchange Monte Carlo");
  bind_mc(mc_m);
  auto droplet_m = m.def_submodule("droplet", "Wulff shapes and droplet minimization");
  bind_droplet(droplet_m);
}
