#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "superlens/errors.hpp"
#include "superlens/experiment.hpp"
#include "superlens/forward.hpp"
#include "superlens/inverse.hpp"
#include "superlens/measurement.hpp"
#include "superlens/profile.hpp"
#include "superlens/tfe.hpp"

namespace py = pybind11;
using namespace superlens;

namespace {

using CArray = py::array_t<cplx, py::array::c_style | py::array::forcecast>;

// Mode windows travel as (2 h1 + 1, 2 h2 + 1) arrays; entry [n1 + h1, n2 + h2].
CArray to_numpy(const ModeArray& m) {
  CArray out({2 * m.half1() + 1, 2 * m.half2() + 1});
  std::copy(m.values().begin(), m.values().end(), out.mutable_data());
  return out;
}

ModeArray modes_from_numpy(const CArray& a) {
  if (a.ndim() != 2 || a.shape(0) % 2 == 0 || a.shape(1) % 2 == 0)
    throw InvalidConfig("mode arrays must be 2-D with odd extents");
  ModeArray m(static_cast<int>(a.shape(0) / 2), static_cast<int>(a.shape(1) / 2));
  std::copy(a.data(), a.data() + a.size(), m.values().begin());
  return m;
}

CArray to_numpy(const GridField& g) {
  CArray out({g.rows(), g.cols()});
  std::copy(g.values().begin(), g.values().end(), out.mutable_data());
  return out;
}

GridField grid_from_numpy(const CArray& a) {
  if (a.ndim() != 2) throw InvalidConfig("grid fields must be 2-D");
  GridField g(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), g.values().begin());
  return g;
}

ModeIndex mode(std::pair<int, int> n) { return {n.first, n.second}; }

}  // namespace

PYBIND11_MODULE(_superlens, m) {
  m.doc() = "Biperiodic surface imaging through a negative-index slab";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  auto invariant = py::register_exception<InvariantError>(m, "InvariantError", error.ptr());
  auto numerical = py::register_exception<NumericalError>(m, "NumericalError", error.ptr());
  py::register_exception<InvalidConfig>(m, "InvalidConfig", invariant.ptr());
  py::register_exception<ProfileTooTall>(m, "ProfileTooTall", invariant.ptr());
  py::register_exception<NyquistViolation>(m, "NyquistViolation", invariant.ptr());
  py::register_exception<CutoffOutOfRange>(m, "CutoffOutOfRange", invariant.ptr());
  py::register_exception<EmptyImage>(m, "EmptyImage", invariant.ptr());
  py::register_exception<BadThreshold>(m, "BadThreshold", invariant.ptr());
  py::register_exception<ZeroNoise>(m, "ZeroNoise", invariant.ptr());
  py::register_exception<GridMismatch>(m, "GridMismatch", invariant.ptr());
  py::register_exception<ResonantMode>(m, "ResonantMode", numerical.ptr());
  py::register_exception<NearSingularSystem>(m, "NearSingularSystem", numerical.ptr());
  py::register_exception<DegenerateSlab>(m, "DegenerateSlab", numerical.ptr());
  py::register_exception<NoConvergence>(m, "NoConvergence", numerical.ptr());

  py::class_<PhysicalConfig>(m, "PhysicalConfig")
      .def(py::init<>())
      .def_readwrite("omega", &PhysicalConfig::omega)
      .def_readwrite("period1", &PhysicalConfig::period1)
      .def_readwrite("period2", &PhysicalConfig::period2)
      .def_readwrite("a", &PhysicalConfig::a)
      .def_readwrite("b", &PhysicalConfig::b)
      .def_readwrite("rho", &PhysicalConfig::rho)
      .def_readwrite("kappa", &PhysicalConfig::kappa)
      .def_readwrite("epsilon", &PhysicalConfig::epsilon)
      .def_property_readonly("h", &PhysicalConfig::h)
      .def_property_readonly("wavelength", &PhysicalConfig::wavelength)
      .def("validate", &PhysicalConfig::validate)
      .def_static("from_wavelength", &PhysicalConfig::from_wavelength);

  m.def("gamma", [](std::pair<int, int> n, const PhysicalConfig& c) { return gamma_of(mode(n), c); });
  m.def("eta", [](std::pair<int, int> n, const PhysicalConfig& c) { return eta_of(mode(n), c); });
  m.def("sigma_n", [](std::pair<int, int> n, const PhysicalConfig& c) { return sigma_n(mode(n), c); });
  m.def("u0_top", [](const PhysicalConfig& c, std::pair<int, int> n) { return u0_top(mode(n), c); }, py::arg("cfg"),
        py::arg("n") = std::pair<int, int>{0, 0});
  m.def("first_order_top",
        [](std::pair<int, int> n, cplx g, const PhysicalConfig& c) { return first_order_top(mode(n), g, c); });
  m.def("first_order_ode_oracle", [](std::pair<int, int> n, cplx g, const PhysicalConfig& c, int steps) {
    return first_order_ode_oracle(mode(n), g, c, steps);
  });
  m.def("scaling_factor", [](std::pair<int, int> n, const PhysicalConfig& c) { return scaling_factor(mode(n), c); });
  m.def("scaling_factor_no_slab",
        [](std::pair<int, int> n, const PhysicalConfig& c) { return scaling_factor_no_slab(mode(n), c); });
  m.def("scaling_factor_ideal_lens",
        [](std::pair<int, int> n, const PhysicalConfig& c) { return scaling_factor_ideal_lens(mode(n), c); });

  py::class_<SurfaceProfile>(m, "SurfaceProfile")
      .def("__call__", &SurfaceProfile::operator())
      .def_property_readonly("kind", [](const SurfaceProfile& p) { return to_string(p.kind()); })
      .def_static("flat", [](double level) { return SurfaceProfile::flat(level); }, py::arg("level") = 0.0)
      .def_static("from_spectrum",
                  [](const CArray& c, double p1, double p2) { return SurfaceProfile::from_spectrum(modes_from_numpy(c), p1, p2); },
                  py::arg("coeffs"), py::arg("period1") = 1.0, py::arg("period2") = 1.0);
  m.def("profile1", [] { return make_profile1(); });
  m.def("profile2", [] { return make_profile2(); });
  m.def("glyph_profile", [](double threshold) { return profile3_from_image(builtin_glyph(), threshold); },
        py::arg("threshold") = 0.5);
  m.def("profile_spectrum",
        [](const SurfaceProfile& p, int n_max, int quad) { return to_numpy(profile_spectrum(p, n_max, quad)); });

  py::class_<Discretization>(m, "Discretization")
      .def(py::init<>())
      .def_readwrite("I", &Discretization::I)
      .def_readwrite("N_f", &Discretization::N_f)
      .def_readwrite("M", &Discretization::M)
      .def_readwrite("fd_order", &Discretization::fd_order)
      .def_property(
          "solver", [](const Discretization& d) { return to_string(d.solver); },
          [](Discretization& d, const std::string& s) { d.solver = solver_kind_from_string(s); })
      .def_readwrite("iter_tol", &Discretization::iter_tol)
      .def_readwrite("iter_max", &Discretization::iter_max)
      .def("validate", &Discretization::validate)
      .def_static("fast", &Discretization::fast);

  py::class_<ForwardSolution>(m, "ForwardSolution")
      .def_property_readonly("top", [](const ForwardSolution& s) { return to_numpy(s.top); })
      .def_property_readonly("top_field", [](const ForwardSolution& s) { return to_numpy(s.top_field); })
      .def_readonly("iterations", &ForwardSolution::iterations)
      .def_readonly("residual", &ForwardSolution::residual)
      .def("interior_mode", [](const ForwardSolution& s, int level, std::pair<int, int> n) {
        return s.interior_mode(level, mode(n));
      });
  m.def("solve_forward",
        [](const SurfaceProfile& p, const PhysicalConfig& c, const Discretization& d) {
          py::gil_scoped_release release;
          return solve_forward(p, c, d);
        },
        py::arg("profile"), py::arg("cfg"), py::arg("disc") = Discretization{});
  m.def("synthesize_linear_data",
        [](const CArray& g, const PhysicalConfig& c) { return to_numpy(synthesize_linear_data(modes_from_numpy(g), c)); });

  m.def("dft2", [](const CArray& u) { return to_numpy(dft2(grid_from_numpy(u))); });
  m.def("synthesize",
        [](const CArray& c, int N, int rows, int cols, bool take_real) {
          return to_numpy(synthesize(modes_from_numpy(c), N, rows, cols, take_real));
        },
        py::arg("coeffs"), py::arg("N"), py::arg("rows"), py::arg("cols"), py::arg("take_real") = false);
  m.def("grid_l2_norm", [](const CArray& u) { return grid_l2_norm(grid_from_numpy(u)); });

  py::class_<Measurement>(m, "Measurement")
      .def_property_readonly("u_delta", [](const Measurement& x) { return to_numpy(x.u_delta); })
      .def_property_readonly("delta", [](const Measurement& x) { return to_numpy(x.delta); })
      .def_readonly("sigma", &Measurement::sigma)
      .def_readonly("seed", &Measurement::seed)
      .def_readonly("snr", &Measurement::snr);
  m.def("noise_grid", [](int rows, int cols, double sigma, std::uint64_t seed) {
    return to_numpy(noise_grid(rows, cols, {sigma, seed}));
  });
  m.def("add_noise", [](const CArray& u, double sigma, std::uint64_t seed) {
    return add_noise(grid_from_numpy(u), {sigma, seed});
  });
  m.def("add_noise_at_snr", [](const CArray& u, double target, std::uint64_t seed) {
    return add_noise_at_snr(grid_from_numpy(u), target, seed);
  });
  m.def("snr_of", [](const CArray& u, const CArray& d) { return snr_of(grid_from_numpy(u), grid_from_numpy(d)); });

  py::class_<ReconCoefficients>(m, "ReconCoefficients")
      .def_property_readonly("f_delta", [](const ReconCoefficients& r) { return to_numpy(r.f_delta); })
      .def("is_usable", [](const ReconCoefficients& r, std::pair<int, int> n) { return r.is_usable(mode(n)); })
      .def("reconstruct", [](const ReconCoefficients& r, int N, int rows, int cols) {
        return to_numpy(reconstruct(r, N, rows, cols));
      });
  m.def("recon_coefficients",
        [](const CArray& U, const PhysicalConfig& c) { return recon_coefficients(modes_from_numpy(U), c); });
  m.def("residual_curve", [](const CArray& U, const PhysicalConfig& c, int N_window) {
    return residual_curve(modes_from_numpy(U), c, N_window).residual;
  });
  m.def("choose_cutoff", [](const std::vector<double>& residual, double noise_norm, double c) {
    ResidualCurve curve;
    curve.residual = residual;
    for (std::size_t k = 0; k < residual.size(); ++k) curve.N.push_back(static_cast<int>(k));
    const CutoffChoice ch = choose_cutoff(curve, noise_norm, c);
    return std::pair<int, bool>{ch.N, ch.satisfied};
  });

  m.def("config_keys", [] {
    std::vector<std::string> out;
    for (const auto& k : config_keys()) out.push_back(k.name);
    return out;
  });
  m.def("resolve_config", [](const std::map<std::string, std::string>& kv) { return ExperimentConfig::from_map(kv).to_map(); });
  m.def("cmd_forward", [](const std::map<std::string, std::string>& kv) { return cmd_forward(ExperimentConfig::from_map(kv)); });
  m.def("cmd_invert", [](const std::map<std::string, std::string>& kv, const std::string& data) {
    return cmd_invert(ExperimentConfig::from_map(kv), data);
  });
  m.def("cmd_experiment", [](int id, const std::map<std::string, std::string>& overrides) {
    py::gil_scoped_release release;
    return cmd_experiment(id, overrides);
  }, py::arg("id"), py::arg("overrides") = std::map<std::string, std::string>{});
  m.def("cmd_noise_stats", [](double sigma, std::uint64_t seed, int I, int trials, const std::string& out) {
    return cmd_noise_stats({sigma, seed}, I, trials, out);
  });
}
