#include "eegloc/cli.hpp"
#include "eegloc/detection.hpp"
#include "eegloc/error.hpp"
#include "eegloc/evaluation.hpp"
#include "eegloc/hough.hpp"
#include "eegloc/morphology.hpp"
#include "eegloc/nifti.hpp"
#include "eegloc/phantom.hpp"
#include "eegloc/registration.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace eegloc;

namespace {

using Points = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

py::object to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

nlohmann::json from_py(const py::object& o) {
  if (o.is_none()) return nlohmann::json::object();
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

const char* dtype_name(DType t) {
  switch (t) {
    case DType::U8: return "u8";
    case DType::I16: return "i16";
    case DType::F32: return "f32";
  }
  return "f32";
}

DType parse_dtype(const std::string& s) {
  if (s == "u8") return DType::U8;
  if (s == "i16") return DType::I16;
  if (s == "f32") return DType::F32;
  throw py::value_error("dtype must be 'u8', 'i16' or 'f32', got '" + s + "'");
}

// Voxel arrays are indexed [i, j, k]; the x-fastest layout is Fortran order.
py::array_t<float> volume_array(const Volume3D& v) {
  const auto d = v.geometry.dims();
  py::array_t<float, py::array::f_style> a({d[0], d[1], d[2]});
  std::copy(v.data.begin(), v.data.end(), a.mutable_data());
  return a;
}

Volume3D make_volume(const py::array_t<float, py::array::f_style | py::array::forcecast>& data,
                     const Affine& affine, const std::string& dtype) {
  if (data.ndim() != 3) throw py::value_error("volume data must be 3-dimensional");
  const Geometry g({static_cast<int>(data.shape(0)), static_cast<int>(data.shape(1)),
                    static_cast<int>(data.shape(2))},
                   affine);
  return Volume3D(g, parse_dtype(dtype), std::vector<float>(data.data(), data.data() + data.size()));
}

Points to_matrix(const std::vector<Eigen::Vector3d>& pts) {
  Points m(static_cast<Eigen::Index>(pts.size()), 3);
  for (std::size_t i = 0; i < pts.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = pts[i];
  return m;
}

PointList to_points(const Points& m) {
  PointList p(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) p[static_cast<std::size_t>(i)] = m.row(i).transpose();
  return p;
}

py::dict labeled_dict(const LabeledPoints& pts) {
  py::dict d;
  for (const auto& p : pts) d[py::str(p.label)] = Eigen::Vector3d(p.position);
  return d;
}

LabeledPoints labeled_from(const py::dict& d) {
  LabeledPoints out;
  for (const auto& [k, v] : d) out.push_back({k.cast<std::string>(), v.cast<Eigen::Vector3d>()});
  return out;
}

py::dict transform_dict(const SimilarityTransform& t) {
  py::dict d;
  d["R"] = Eigen::Matrix3d(t.rotation);
  d["t"] = Eigen::Vector3d(t.translation);
  d["s"] = t.scale;
  return d;
}

ElectrodeTemplate template_or_default(const std::optional<std::filesystem::path>& path) {
  return path ? load_template(*path) : default_template();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "EEG electrode localisation on T1 + UTE volumes";

  py::register_exception<Error>(m, "EeglocError", PyExc_RuntimeError);

  py::class_<Volume3D>(m, "Volume")
      .def(py::init(&make_volume), py::arg("data"), py::arg("affine"), py::arg("dtype") = "f32")
      .def_property_readonly("shape", [](const Volume3D& v) { return v.geometry.dims(); })
      .def_property_readonly("dtype", [](const Volume3D& v) { return dtype_name(v.dtype); })
      .def_property_readonly("affine", [](const Volume3D& v) { return Affine(v.geometry.affine()); })
      .def_property_readonly("spacing", [](const Volume3D& v) { return v.geometry.spacing(); })
      .def_property_readonly("data", &volume_array)
      .def("voxel_to_world",
           [](const Volume3D& v, const Eigen::Vector3d& ijk) {
             return Eigen::Vector3d(v.geometry.voxel_to_world(ijk));
           })
      .def("world_to_voxel",
           [](const Volume3D& v, const Eigen::Vector3d& p) {
             return Eigen::Vector3d(v.geometry.world_to_voxel(p));
           })
      .def("__eq__", [](const Volume3D& a, const Volume3D& b) { return a == b; });

  m.def("read_nifti", &read_nifti, py::arg("path"));
  m.def("write_nifti", &write_nifti, py::arg("volume"), py::arg("path"));

  m.def(
      "default_template",
      []() {
        const auto tpl = default_template();
        return py::make_tuple(tpl.labels(), to_matrix(tpl.unit_positions()));
      },
      "(labels, unit positions N x 3) of the built-in 65-channel layout");

  m.def(
      "generate_phantom",
      [](const py::object& spec) {
        const PhantomSpec s = phantom_spec_from_json(from_py(spec));
        Phantom ph = generate_phantom(s);
        py::dict out;
        out["t1"] = std::move(ph.t1);
        out["ute"] = std::move(ph.ute);
        out["truth"] = labeled_dict(ph.truth);
        out["fiducials"] = labeled_dict(fiducials_to_points(ph.fiducials));
        out["spec"] = to_py(phantom_spec_to_json(s));
        return out;
      },
      py::arg("spec") = py::none());

  m.def(
      "sphere_volume",
      [](std::array<int, 3> dims, std::array<double, 3> spacing, const Eigen::Vector3d& center,
         double radius_mm, double inside, double outside) {
        return sphere_volume(dims, spacing, center, radius_mm, inside, outside);
      },
      py::arg("dims"), py::arg("spacing"), py::arg("center"), py::arg("radius_mm"),
      py::arg("inside") = 200.0, py::arg("outside") = 10.0);

  m.def(
      "detect_spheres",
      [](const Volume3D& ute, const py::object& params) {
        const PipelineConfig cfg = config_from_json(nlohmann::json{{"hough", from_py(params)}});
        const auto cands = detect_spheres(ute, complement(BinaryMask(ute.geometry)), cfg.hough);
        py::list out;
        for (const auto& c : cands) {
          py::dict d;
          d["center"] = Eigen::Vector3d(c.center);
          d["radius_mm"] = c.radius_mm;
          d["score"] = c.score;
          out.append(d);
        }
        return out;
      },
      py::arg("ute"), py::arg("params") = py::none(),
      "Sphere candidates over the whole volume, strongest first");

  m.def(
      "detect_electrodes",
      [](const Volume3D& t1, const Volume3D& ute, const py::object& config,
         const std::optional<std::filesystem::path>& template_path) {
        const auto tpl = template_or_default(template_path);
        const auto set = detect_electrodes(t1, ute, tpl, config_from_json(from_py(config)));
        py::dict out = to_py(electrodes_json(set));
        out["positions"] = labeled_dict(set.points());
        return out;
      },
      py::arg("t1"), py::arg("ute"), py::arg("config") = py::none(),
      py::arg("template_path") = py::none(),
      "The electrodes JSON document plus a label -> position map");

  m.def(
      "umeyama",
      [](const Points& src, const Points& dst, bool with_scale) {
        return transform_dict(umeyama(to_points(src), to_points(dst), with_scale));
      },
      py::arg("src"), py::arg("dst"), py::arg("with_scale") = true);

  m.def(
      "icp_register",
      [](const Points& tpl, const Points& cands, int max_iter, double tol, bool with_scale) {
        IcpOptions opts;
        opts.max_iter = max_iter;
        opts.tol = tol;
        opts.with_scale = with_scale;
        const auto r = icp_register(to_points(tpl), to_points(cands), opts);
        py::dict out;
        out["transform"] = transform_dict(r.transform);
        out["residual_history"] = r.residual_history;
        out["iterations"] = r.iterations;
        out["converged"] = r.converged;
        return out;
      },
      py::arg("template_pts"), py::arg("candidates"), py::arg("max_iter") = 100,
      py::arg("tol") = 1e-6, py::arg("with_scale") = true);

  m.def(
      "fiducial_baseline",
      [](const py::dict& fiducials, const std::optional<std::filesystem::path>& template_path) {
        const auto tpl = template_or_default(template_path);
        const auto t = fiducial_register(tpl, fiducials_from_points(labeled_from(fiducials)));
        return labeled_dict(place_template(tpl, t));
      },
      py::arg("fiducials"), py::arg("template_path") = py::none(),
      "Template electrodes placed by the five named fiducials");

  m.def(
      "evaluate",
      [](const py::dict& detected, const py::dict& truth, double threshold_mm) {
        const auto pe = position_errors(labeled_from(detected), labeled_from(truth));
        return to_py(report_to_json(detection_stats(pe, threshold_mm)));
      },
      py::arg("detected"), py::arg("truth"), py::arg("threshold_mm") = 10.0,
      "Detection report (PE per label, FN/FP, accuracy, summary statistics)");

  m.def(
      "paired_t_test",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        const auto r = paired_t_test(a, b);
        return py::make_tuple(r.t, r.df, r.p_two_sided);
      },
      py::arg("a"), py::arg("b"), "(t, df, two-sided p) for the paired differences a - b");

  m.def("student_t_cdf", &student_t_cdf, py::arg("t"), py::arg("df"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<const char*> argv{"eegloc"};
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in-process: (exit code, stdout, stderr)");
}
