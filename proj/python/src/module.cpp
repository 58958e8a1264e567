#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "dsar/config.hpp"
#include "dsar/errors.hpp"
#include "dsar/forward.hpp"
#include "dsar/geometry.hpp"
#include "dsar/heightsolver.hpp"
#include "dsar/imaging.hpp"
#include "dsar/interferometry.hpp"
#include "dsar/io.hpp"
#include "dsar/parallel.hpp"
#include "dsar/pipeline.hpp"

namespace py = pybind11;
using namespace dsar;

// Vec3 <-> any length-3 sequence of floats; returned as a tuple.
namespace pybind11::detail {
template <>
struct type_caster<Vec3> {
  PYBIND11_TYPE_CASTER(Vec3, const_name("tuple[float, float, float]"));

  bool load(handle src, bool) {
    if (!isinstance<sequence>(src) || isinstance<str>(src)) return false;
    const auto seq = reinterpret_borrow<sequence>(src);
    if (seq.size() != 3) return false;
    try {
      value = {seq[0].cast<double>(), seq[1].cast<double>(), seq[2].cast<double>()};
    } catch (const cast_error&) {
      return false;
    }
    return true;
  }

  static handle cast(const Vec3& v, return_value_policy, handle) {
    return make_tuple(v.x, v.y, v.z).release();
  }
};
}  // namespace pybind11::detail

namespace {

py::array_t<cdouble> to_numpy(const ComplexMatrix& m) {
  py::array_t<cdouble> a({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), a.mutable_data());
  return a;
}

ComplexMatrix from_numpy(const py::array_t<cdouble, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D complex array");
  ComplexMatrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), m.data().begin());
  return m;
}

py::array_t<double> axis_values(const Axis& axis) { return py::array_t<double>(axis.values.size(), axis.values.data()); }

Scene to_scene(const std::vector<Scatterer>& s) { return s; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Wideband and Doppler-SAR interferometry core";
  m.attr("__version__") = DSAR_VERSION;

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<NotFoundError>(m, "NotFoundError", PyExc_RuntimeError);
  py::register_exception<SingularityError>(m, "SingularityError", PyExc_ArithmeticError);
  py::register_exception<StageDependencyError>(m, "StageDependencyError", PyExc_RuntimeError);

  m.def("set_thread_count", &set_thread_count, py::arg("n"));
  m.def("thread_count", &thread_count);

  // ---------------------------------------------------------------- geometry
  py::class_<PhysicalConstants>(m, "PhysicalConstants")
      .def(py::init<>())
      .def_readwrite("c", &PhysicalConstants::c);

  py::enum_<TrajectoryKind>(m, "TrajectoryKind")
      .value("Linear", TrajectoryKind::Linear)
      .value("ConstantAcceleration", TrajectoryKind::ConstantAcceleration);

  py::class_<Trajectory>(m, "Trajectory")
      .def_static("linear", &Trajectory::linear, py::arg("start"), py::arg("velocity"), py::arg("s_begin"),
                  py::arg("s_end"))
      .def_static("constant_acceleration", &Trajectory::constant_acceleration, py::arg("start"),
                  py::arg("velocity"), py::arg("acceleration"), py::arg("s_begin"), py::arg("s_end"))
      .def_static("y_pass", &Trajectory::y_pass, py::arg("x"), py::arg("height"), py::arg("speed"),
                  py::arg("length"))
      .def_property_readonly("kind", &Trajectory::kind)
      .def_property_readonly("s_begin", &Trajectory::s_begin)
      .def_property_readonly("s_end", &Trajectory::s_end)
      .def("position", &Trajectory::position, py::arg("s"))
      .def("velocity", &Trajectory::velocity, py::arg("s"))
      .def("acceleration", &Trajectory::acceleration, py::arg("s"));

  const PhysicalConstants c0{};
  m.def("range", &range, py::arg("traj"), py::arg("s"), py::arg("x"));
  m.def("look_direction", &look_direction, py::arg("traj"), py::arg("s"), py::arg("x"));
  m.def("range_rate", &range_rate, py::arg("traj"), py::arg("s"), py::arg("x"));
  m.def("zero_doppler_time", &zero_doppler_time, py::arg("traj"), py::arg("x"));
  m.def("zero_doppler_rate_time", &zero_doppler_rate_time, py::arg("traj"), py::arg("x"));
  m.def("doppler", &doppler, py::arg("traj"), py::arg("s"), py::arg("x"), py::arg("omega0"),
        py::arg("consts") = c0);
  m.def("doppler_rate", &doppler_rate, py::arg("traj"), py::arg("s"), py::arg("x"), py::arg("omega0"),
        py::arg("consts") = c0);
  m.def("far_field_range", &far_field_range, py::arg("x"), py::arg("y"));

  // ----------------------------------------------------------------- forward
  py::class_<Scatterer>(m, "Scatterer")
      .def(py::init([](double x, double y, double height, cdouble reflectivity) {
             return Scatterer{x, y, height, reflectivity};
           }),
           py::arg("x"), py::arg("y"), py::arg("height"), py::arg("reflectivity") = cdouble{1.0, 0.0})
      .def_readwrite("x", &Scatterer::x)
      .def_readwrite("y", &Scatterer::y)
      .def_readwrite("height", &Scatterer::height)
      .def_readwrite("reflectivity", &Scatterer::reflectivity)
      .def_property_readonly("position", &Scatterer::position);

  py::class_<WidebandConfig>(m, "WidebandConfig")
      .def(py::init<>())
      .def_readwrite("omega0", &WidebandConfig::omega0)
      .def_readwrite("bandwidth", &WidebandConfig::bandwidth)
      .def_readwrite("n_freq", &WidebandConfig::n_freq)
      .def_readwrite("n_slow", &WidebandConfig::n_slow)
      .def("validate", &WidebandConfig::validate);

  py::class_<UNBConfig>(m, "UNBConfig")
      .def(py::init<>())
      .def_readwrite("omega0", &UNBConfig::omega0)
      .def_readwrite("t_phi", &UNBConfig::t_phi)
      .def_readwrite("n_fast", &UNBConfig::n_fast)
      .def_readwrite("n_slow", &UNBConfig::n_slow)
      .def_readwrite("n_mu", &UNBConfig::n_mu)
      .def_readwrite("mu_span", &UNBConfig::mu_span)
      .def("validate", &UNBConfig::validate);

  py::class_<WidebandDataSet>(m, "WidebandDataSet")
      .def_property_readonly("samples", [](const WidebandDataSet& d) { return to_numpy(d.samples); })
      .def_property_readonly("frequency_offsets", [](const WidebandDataSet& d) { return axis_values(d.frequency_axis); })
      .def_property_readonly("slow_times", [](const WidebandDataSet& d) { return axis_values(d.slow_time_axis); })
      .def_readonly("config", &WidebandDataSet::config);

  py::class_<UNBDataSet>(m, "UNBDataSet")
      .def_property_readonly("samples", [](const UNBDataSet& d) { return to_numpy(d.samples); })
      .def_property_readonly("mu_offsets", [](const UNBDataSet& d) { return axis_values(d.mu_axis); })
      .def_property_readonly("slow_times", [](const UNBDataSet& d) { return axis_values(d.slow_time_axis); })
      .def_readonly("config", &UNBDataSet::config)
      .def_readonly("warnings", &UNBDataSet::warnings);

  m.def(
      "simulate_wideband",
      [](const std::vector<Scatterer>& scene, const Trajectory& traj, const WidebandConfig& cfg,
         const PhysicalConstants& consts) { return simulate_wideband(to_scene(scene), traj, cfg, consts); },
      py::arg("scene"), py::arg("traj"), py::arg("config") = WidebandConfig{}, py::arg("consts") = c0,
      py::call_guard<py::gil_scoped_release>());
  m.def(
      "simulate_unb",
      [](const std::vector<Scatterer>& scene, const Trajectory& traj, const UNBConfig& cfg,
         const PhysicalConstants& consts) { return simulate_unb(to_scene(scene), traj, cfg, consts); },
      py::arg("scene"), py::arg("traj"), py::arg("config") = UNBConfig{}, py::arg("consts") = c0,
      py::call_guard<py::gil_scoped_release>());

  // ----------------------------------------------------------------- imaging
  py::enum_<Modality>(m, "Modality").value("Wideband", Modality::Wideband).value("UNB", Modality::UNB);

  py::class_<ImageGrid>(m, "ImageGrid")
      .def(py::init([](double hx, double hy, double spacing, double href) { return ImageGrid{hx, hy, spacing, href}; }),
           py::arg("half_extent_x") = 64.0, py::arg("half_extent_y") = 64.0, py::arg("spacing") = 1.0,
           py::arg("reference_height") = 0.0)
      .def_readwrite("half_extent_x", &ImageGrid::half_extent_x)
      .def_readwrite("half_extent_y", &ImageGrid::half_extent_y)
      .def_readwrite("spacing", &ImageGrid::spacing)
      .def_readwrite("reference_height", &ImageGrid::reference_height)
      .def_property_readonly("nx", &ImageGrid::nx)
      .def_property_readonly("ny", &ImageGrid::ny)
      .def("point", &ImageGrid::point, py::arg("row"), py::arg("col"));

  py::class_<ComplexImage>(m, "ComplexImage")
      .def(py::init([](const ImageGrid& grid, const py::array_t<cdouble>& pixels) {
             ComplexImage img;
             img.grid = grid;
             img.pixels = from_numpy(pixels);
             if (img.pixels.rows() != grid.ny() || img.pixels.cols() != grid.nx())
               throw py::value_error("pixel array shape does not match the grid");
             return img;
           }),
           py::arg("grid"), py::arg("pixels"))
      .def_readonly("grid", &ComplexImage::grid)
      .def_property_readonly("pixels", [](const ComplexImage& i) { return to_numpy(i.pixels); })
      .def_property_readonly("notes", [](const ComplexImage& i) { return i.provenance.notes; });

  py::class_<Peak>(m, "Peak")
      .def_readonly("row", &Peak::row)
      .def_readonly("col", &Peak::col)
      .def_readonly("value", &Peak::value)
      .def_readonly("position", &Peak::position);

  py::class_<WidebandBackprojector>(m, "WidebandBackprojector")
      .def(py::init<const WidebandDataSet&, const Trajectory&, const PhysicalConstants&>(), py::arg("data"),
           py::arg("traj"), py::arg("consts") = c0)
      .def("at", &WidebandBackprojector::at, py::arg("z"))
      .def("image", &WidebandBackprojector::image, py::arg("grid"), py::call_guard<py::gil_scoped_release>());
  py::class_<UnbBackprojector>(m, "UnbBackprojector")
      .def(py::init<const UNBDataSet&, const Trajectory&, const PhysicalConstants&>(), py::arg("data"),
           py::arg("traj"), py::arg("consts") = c0)
      .def("at", &UnbBackprojector::at, py::arg("z"))
      .def("image", &UnbBackprojector::image, py::arg("grid"), py::call_guard<py::gil_scoped_release>());

  m.def("backproject_wideband", &backproject_wideband, py::arg("data"), py::arg("traj"), py::arg("grid"),
        py::arg("consts") = c0, py::call_guard<py::gil_scoped_release>());
  m.def("backproject_unb", &backproject_unb, py::arg("data"), py::arg("traj"), py::arg("grid"),
        py::arg("consts") = c0, py::call_guard<py::gil_scoped_release>());
  m.def("find_peak", &find_peak, py::arg("image"));
  m.def("equalize_doppler_rate_factor", &equalize_doppler_rate_factor, py::arg("image"), py::arg("s_d_own"),
        py::arg("s_d_ref"));

  // ---------------------------------------------------------- interferometry
  py::class_<PhaseMeasurement>(m, "PhaseMeasurement")
      .def_readonly("wrapped", &PhaseMeasurement::wrapped)
      .def_readonly("unwrapped", &PhaseMeasurement::unwrapped)
      .def_readonly("ambiguity_index", &PhaseMeasurement::ambiguity_index)
      .def_readonly("resolved", &PhaseMeasurement::resolved);

  py::class_<RegistrationOffset>(m, "RegistrationOffset")
      .def_readonly("dx", &RegistrationOffset::dx)
      .def_readonly("dy", &RegistrationOffset::dy);

  py::class_<Interferogram>(m, "Interferogram")
      .def_readonly("image", &Interferogram::image)
      .def_readonly("offset", &Interferogram::offset);

  m.def("wrap_phase", &wrap_phase, py::arg("phase"));
  m.def("resolve_ambiguity", &resolve_ambiguity, py::arg("wrapped"), py::arg("predicted"),
        py::arg("modality") = Modality::Wideband);
  m.def("interferogram", py::overload_cast<const ComplexImage&, const ComplexImage&>(&interferogram),
        py::arg("image1"), py::arg("image2"));
  m.def("wb_phase_model", &wb_phase_model, py::arg("x"), py::arg("traj1"), py::arg("s01"), py::arg("traj2"),
        py::arg("s02"), py::arg("omega0"), py::arg("consts") = c0);
  m.def("unb_phase_model", &unb_phase_model, py::arg("x"), py::arg("traj1"), py::arg("s_d1"), py::arg("traj2"),
        py::arg("s_d2"), py::arg("omega0"), py::arg("t_phi"), py::arg("consts") = c0);

  // ------------------------------------------------------------ heightsolver
  py::enum_<PhaseSurface>(m, "PhaseSurface")
      .value("Exact", PhaseSurface::Exact)
      .value("Linearized", PhaseSurface::Linearized);

  py::class_<WbGeometry>(m, "WbGeometry")
      .def(py::init([](const Trajectory& t1, const Trajectory& t2, double omega0, const PhysicalConstants& c) {
             return WbGeometry{t1, t2, omega0, c};
           }),
           py::arg("traj1"), py::arg("traj2"), py::arg("omega0"), py::arg("consts") = c0);
  py::class_<UnbGeometry>(m, "UnbGeometry")
      .def(py::init([](const Trajectory& t1, const Trajectory& t2, double omega0, double t_phi,
                       const PhysicalConstants& c) { return UnbGeometry{t1, t2, omega0, t_phi, c}; }),
           py::arg("traj1"), py::arg("traj2"), py::arg("omega0"), py::arg("t_phi"), py::arg("consts") = c0);

  py::class_<WBMeasurement>(m, "WBMeasurement")
      .def_readonly("R1", &WBMeasurement::R1)
      .def_readonly("doppler1", &WBMeasurement::doppler1)
      .def_readonly("phi", &WBMeasurement::phi)
      .def_readonly("s01", &WBMeasurement::s01)
      .def_readonly("s02", &WBMeasurement::s02);
  py::class_<UNBMeasurement>(m, "UNBMeasurement")
      .def_readonly("f1", &UNBMeasurement::f1)
      .def_readonly("f1_rate", &UNBMeasurement::f1_rate)
      .def_readonly("phi", &UNBMeasurement::phi)
      .def_readonly("s_d1", &UNBMeasurement::s_d1)
      .def_readonly("s_d2", &UNBMeasurement::s_d2);

  py::class_<SearchGrid>(m, "SearchGrid")
      .def(py::init<>())
      .def_readwrite("x_min", &SearchGrid::x_min)
      .def_readwrite("x_max", &SearchGrid::x_max)
      .def_readwrite("x_step", &SearchGrid::x_step)
      .def_readwrite("h_min", &SearchGrid::h_min)
      .def_readwrite("h_max", &SearchGrid::h_max)
      .def_readwrite("h_step", &SearchGrid::h_step)
      .def_readwrite("fixed_y", &SearchGrid::fixed_y)
      .def_readwrite("full_3d", &SearchGrid::full_3d)
      .def_readwrite("y_min", &SearchGrid::y_min)
      .def_readwrite("y_max", &SearchGrid::y_max)
      .def_readwrite("y_step", &SearchGrid::y_step);

  py::class_<Solution>(m, "Solution")
      .def_readonly("position", &Solution::position)
      .def_readonly("combined", &Solution::combined)
      .def_readonly("residuals", &Solution::residuals)
      .def_readonly("names", &Solution::names)
      .def_readonly("informative", &Solution::informative)
      .def_readonly("degenerate", &Solution::degenerate)
      .def_readonly("wrapped_fallback", &Solution::wrapped_fallback)
      .def_readonly("candidates", &Solution::candidates);

  m.def("measure_wb_truth", &measure_wb_truth, py::arg("x"), py::arg("geometry"));
  m.def("measure_unb_truth", &measure_unb_truth, py::arg("x"), py::arg("geometry"));
  m.def("solve_wb", &solve_wb, py::arg("measurement"), py::arg("geometry"), py::arg("grid") = SearchGrid{},
        py::arg("surface") = PhaseSurface::Exact, py::call_guard<py::gil_scoped_release>());
  m.def("solve_unb", &solve_unb, py::arg("measurement"), py::arg("geometry"), py::arg("grid") = SearchGrid{},
        py::arg("surface") = PhaseSurface::Exact, py::call_guard<py::gil_scoped_release>());

  // --------------------------------------------------------------- pipeline
  py::class_<RunConfig>(m, "RunConfig")
      .def_readonly("name", &RunConfig::name)
      .def_readwrite("full", &RunConfig::full)
      .def("validate", &RunConfig::validate)
      .def("hash", &RunConfig::hash)
      .def("echo_json", &RunConfig::echo_json);
  m.def("load_config", &load_config, py::arg("path"));
  m.def("parse_config", &parse_config, py::arg("text"), py::arg("source") = "<memory>");
  m.def("builtin_config_text", &builtin_config_text, py::arg("name"));

  py::class_<ModalityResult>(m, "ModalityResult")
      .def_readonly("peak1", &ModalityResult::peak1)
      .def_readonly("peak2", &ModalityResult::peak2)
      .def_readonly("offset", &ModalityResult::offset)
      .def_readonly("equalization_ratio", &ModalityResult::equalization_ratio)
      .def_readonly("solution", &ModalityResult::solution)
      .def_readonly("warnings", &ModalityResult::warnings)
      .def_property_readonly("phase", [](const ModalityResult& r) { return r.wb ? r.wb->phi : r.unb->phi; });

  py::class_<RunResult>(m, "RunResult")
      .def_readonly("wideband", &RunResult::wideband)
      .def_readonly("unb", &RunResult::unb)
      .def_readonly("timings", &RunResult::timings_s)
      .def_property_readonly("files", [](const RunResult& r) {
        py::dict d;
        for (const auto& f : r.files) d[py::str(f.path)] = f.sha256;
        return d;
      });

  m.def("run_pipeline", &run_pipeline, py::arg("config"), py::arg("out"), py::call_guard<py::gil_scoped_release>());
  m.def("read_image", &read_image, py::arg("path"));
}
