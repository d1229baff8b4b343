#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

#include "qtf/certify.hpp"
#include "qtf/count_matrix.hpp"
#include "qtf/report.hpp"
#include "qtf/stats.hpp"

namespace py = pybind11;
using namespace qtf;

namespace {

JointCountMatrix matrix_from_array(py::array_t<std::uint64_t, py::array::c_style | py::array::forcecast> a,
                                   const std::string& basis_a, const std::string& basis_b,
                                   double acquisition_seconds) {
  if (a.ndim() != 2) throw std::invalid_argument("counts must be a 2-d array");
  JointCountMatrix m = JointCountMatrix::zeros(static_cast<int>(a.shape(0)),
                                               static_cast<int>(a.shape(1)), basis_a, basis_b);
  m.acquisition_seconds = acquisition_seconds;
  std::copy(a.data(), a.data() + a.size(), m.counts.begin());
  return m;
}

py::array_t<std::uint64_t> matrix_to_array(const JointCountMatrix& m) {
  py::array_t<std::uint64_t> out({m.d_a, m.d_b});
  std::copy(m.counts.begin(), m.counts.end(), out.mutable_data());
  return out;
}

py::dict fidelity_dict(const FidelityResult& r) {
  py::dict d;
  d["f1"] = r.f1;
  d["f2_tilde"] = r.f2_tilde;
  d["f_tilde"] = r.f_tilde;
  d["b_k"] = r.b_k;
  d["d_ent"] = r.d_ent;
  return d;
}

py::dict eof_dict(const EofResult& r) {
  py::dict d;
  d["h1"] = r.h1;
  d["h2"] = r.h2;
  d["max_overlap"] = r.max_overlap;
  d["eof_lb"] = r.eof_lb;
  d["eof_lb_raw"] = r.eof_lb_raw;
  return d;
}

py::dict steering_dict(const SteeringResult& r) {
  py::dict d;
  d["s"] = r.s;
  d["sr_lb"] = r.sr_lb;
  d["delta"] = r.delta;
  d["n_cert"] = r.n_cert;
  return d;
}

}  // namespace

PYBIND11_MODULE(_qtfcert, m) {
  m.doc() = "entanglement certification core (time-tag simulation, two-basis "
            "coincidence matrices, fidelity / EoF / steering bounds)";

  py::class_<JointCountMatrix>(m, "JointCountMatrix")
      .def(py::init(&matrix_from_array), py::arg("counts"), py::arg("basis_a") = "time",
           py::arg("basis_b") = "time", py::arg("acquisition_seconds") = 0.0)
      .def_readonly("d_a", &JointCountMatrix::d_a)
      .def_readonly("d_b", &JointCountMatrix::d_b)
      .def_readonly("basis_a", &JointCountMatrix::basis_a)
      .def_readonly("basis_b", &JointCountMatrix::basis_b)
      .def_readonly("acquisition_seconds", &JointCountMatrix::acquisition_seconds)
      .def_readonly("meta", &JointCountMatrix::meta)
      .def("counts", &matrix_to_array)
      .def("total", &JointCountMatrix::total)
      .def("normalized", [](const JointCountMatrix& m) { return normalize(m); })
      .def("subspace", [](const JointCountMatrix& m, int d, int offset) {
        return subspace(m, d, offset);
      }, py::arg("d"), py::arg("offset") = 0)
      .def("to_csv", [](const JointCountMatrix& m) {
        std::ostringstream out;
        write_matrix_csv(m, out);
        return out.str();
      })
      .def("save_csv", &write_matrix_csv_file, py::arg("path"))
      .def_static("load_csv", &read_matrix_csv_file, py::arg("path"))
      .def("__repr__", [](const JointCountMatrix& m) {
        std::ostringstream out;
        out << "<JointCountMatrix " << m.d_a << "x" << m.d_b << " " << m.basis_a << "/"
            << m.basis_b << " total=" << m.total() << ">";
        return out.str();
      });

  py::class_<TargetState>(m, "TargetState")
      .def_static("maximally_entangled", &TargetState::maximally_entangled, py::arg("d"))
      .def(py::init([](int d, std::vector<double> lambdas) {
             TargetState t{d, std::move(lambdas)};
             t.validate();
             return t;
           }),
           py::arg("d"), py::arg("lambdas"))
      .def_readonly("d", &TargetState::d)
      .def_readonly("lambdas", &TargetState::lambdas);

  m.def("b_k", &b_k, py::arg("target"), py::arg("k"));
  m.def("certified_dimension", &certified_dimension, py::arg("f_tilde"), py::arg("target"));
  m.def("schmidt_number_from_delta", &schmidt_number_from_delta, py::arg("delta"));
  m.def("schmidt_decompose",
        [](const JointCountMatrix& mat) { return schmidt_decompose(mat); },
        py::arg("counts"));

  m.def("fidelity_certify",
        [](const JointCountMatrix& jti, const JointCountMatrix& jsi,
           const TargetState& target, bool allow_nonprime) {
          return fidelity_dict(fidelity_certify(jti, jsi, target, allow_nonprime));
        },
        py::arg("jti"), py::arg("jsi"), py::arg("target"), py::arg("allow_nonprime") = false);

  m.def("eof_certify",
        [](const JointCountMatrix& jti, const JointCountMatrix& jsi, double max_overlap) {
          return eof_dict(eof_certify(jti, jsi, max_overlap));
        },
        py::arg("jti"), py::arg("jsi"), py::arg("max_overlap"));

  m.def("steering_certify",
        [](const JointCountMatrix& jti, const JointCountMatrix& jsi, int d,
           bool allow_nonprime) {
          return steering_dict(steering_certify(jti, jsi, d, allow_nonprime));
        },
        py::arg("jti"), py::arg("jsi"), py::arg("d"), py::arg("allow_nonprime") = false);

  m.def("poisson_bootstrap",
        [](const JointCountMatrix& jti, const JointCountMatrix& jsi,
           const TargetState& target, double max_overlap, const std::string& estimator,
           int resamples, std::uint64_t seed, bool allow_nonprime) {
          py::dict out;
          for (const auto& [name, s] :
               poisson_bootstrap(jti, jsi, target, max_overlap, estimator, resamples, seed,
                                 allow_nonprime)) {
            py::dict row;
            row["estimate"] = s.estimate;
            row["std"] = s.std;
            row["resamples"] = s.resamples;
            row["excluded"] = s.excluded;
            row["seed"] = s.seed;
            out[py::str(name)] = row;
          }
          return out;
        },
        py::arg("jti"), py::arg("jsi"), py::arg("target"), py::arg("max_overlap") = 0.0,
        py::arg("estimator") = "all", py::arg("resamples") = 1000, py::arg("seed") = 1,
        py::arg("allow_nonprime") = false);

  m.def("measurement_budget", [](int d) {
    const MeasurementBudget b = measurement_budget(d);
    py::dict out;
    out["fst"] = b.fst;
    out["fidelity_direct"] = b.fidelity_direct;
    out["two_bases"] = b.two_bases;
    out["this_work"] = b.this_work;
    return out;
  }, py::arg("d"));

  m.def("run_pipeline",
        [](const std::string& config_path, const std::string& out_dir) {
          std::ifstream in(config_path, std::ios::binary);
          if (!in) throw std::runtime_error("cannot open config: " + config_path);
          std::stringstream ss;
          ss << in.rdbuf();
          const std::string raw = ss.str();
          return run_pipeline(pipeline_config_from(parse_config(raw), raw), out_dir);
        },
        py::arg("config_path"), py::arg("out_dir"),
        "Run the full simulate -> correlate -> bin -> certify pipeline; returns the "
        "report.json path.");

  m.attr("__version__") = kToolVersion;
}
