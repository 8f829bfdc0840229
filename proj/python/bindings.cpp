#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "anticorr/bell.hpp"
#include "anticorr/error.hpp"
#include "anticorr/run.hpp"

namespace py = pybind11;
using namespace anticorr;

namespace {

py::array_t<double> to_array(std::span<const double> values) {
  return py::array_t<double>(static_cast<py::ssize_t>(values.size()), values.data());
}

std::vector<double> from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 1) throw std::invalid_argument("timestamps must be a 1-d array");
  return {a.data(), a.data() + a.size()};
}

RunConfig load(const std::string& yaml, std::optional<std::uint64_t> seed, std::optional<std::string> model) {
  auto c = parse_run_config(yaml);
  if (seed) c.seed = c.source.seed = *seed;
  if (model) c.model = c.apparatus.model = parse_physics_model(*model);
  c.validate();
  return c;
}

}  // namespace

PYBIND11_MODULE(_anticorr, m) {
  m.doc() = "Beam-splitter coincidence simulator core";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);

  py::class_<EventStreams>(m, "EventStreams")
      .def(py::init([](py::array_t<double> d0, py::array_t<double> d1, py::array_t<double> d2) {
             return EventStreams({from_array(d0), from_array(d1), from_array(d2)});
           }),
           py::arg("d0"), py::arg("d1"), py::arg("d2"))
      .def("channel", [](const EventStreams& s, int c) {
        if (c < 0 || c >= static_cast<int>(kChannelCount)) throw py::index_error("channel must be 0, 1 or 2");
        return to_array(s.channel(static_cast<Channel>(c)));
      })
      .def("metadata_json", [](const EventStreams& s) { return to_json(s.metadata()).dump(); })
      .def("to_bytes", [](const EventStreams& s) {
        const auto bytes = encode_stream(s);
        return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
      })
      .def_static("from_bytes", [](const py::bytes& b) {
        const std::string_view view = b;
        return decode_stream({reinterpret_cast<const std::uint8_t*>(view.data()), view.size()});
      })
      .def("__len__", &EventStreams::size)
      .def("__eq__", [](const EventStreams& a, const EventStreams& b) { return a == b; });

  m.def("simulate", [](const std::string& yaml, std::optional<std::uint64_t> seed,
                       std::optional<std::string> model) {
        const auto c = load(yaml, seed, model);
        py::gil_scoped_release release;
        return simulate(c);
      },
      py::arg("config_yaml") = "", py::arg("seed") = py::none(), py::arg("model") = py::none());

  m.def("analyze_json", [](const EventStreams& s, std::optional<double> alpha) {
        return report_document(analyze(s, alpha), s).dump();
      },
      py::arg("streams"), py::arg("alpha") = py::none());

  m.def("count_coincidences", [](const EventStreams& s, double alpha, double shift) {
        const auto c = count_coincidences(s, {alpha, shift});
        return py::make_tuple(c.triggers, c.hits1, c.hits2, c.hits_both);
      },
      py::arg("streams"), py::arg("alpha"), py::arg("shift") = 0.0);

  m.def("shape_scan_json", [](const std::string& yaml, const std::vector<double>& shifts,
                              std::optional<std::uint64_t> seed) {
        const auto c = load(yaml, seed, std::nullopt);
        ShapeScanResult r;
        {
          py::gil_scoped_release release;
          r = run_shape_scan(c, shifts);
        }
        nlohmann::json points = nlohmann::json::array();
        for (const auto& p : r.points) {
          points.push_back({{"s", p.shift}, {"p", p.value}, {"hits", p.hits},
                            {"ci95", {p.interval.lower, p.interval.upper}}});
        }
        return nlohmann::json{{"shape", std::string(to_string(r.shape))},
                              {"configured_width", r.configured_width},
                              {"recovered_width", r.recovered_width},
                              {"peak_shift", r.peak_shift},
                              {"points", points}}
            .dump();
      },
      py::arg("config_yaml"), py::arg("shifts"), py::arg("seed") = py::none());

  m.def("check_feasibility_json", [](std::array<double, 3> marginals, std::array<double, 3> agreements) {
        return bell::to_json(bell::check_feasibility({marginals, agreements})).dump();
      },
      py::arg("marginals"), py::arg("agreements"));

  m.def("conjunction_bound", &bell::conjunction_bound, py::arg("p_a"), py::arg("p_b"));

  m.def("poisson_check_json", [](double lambda, std::uint64_t replications, std::uint64_t seed,
                                 std::size_t absorbers, double width) {
        const EnvelopeSpec packet{EnvelopeShape::gaussian, width, 1.0};
        const PlanckConfig bank{absorbers, lambda / packet.energy()};
        return to_json(run_poisson_diagnostic(packet, bank, replications, seed)).dump();
      },
      py::arg("lam"), py::arg("replications") = 100000, py::arg("seed") = 1,
      py::arg("absorbers") = kDiagnosticAbsorbers, py::arg("width") = 1e-9);

  m.def("expected_overlap_probability",
        py::overload_cast<double, double, double>(&expected_overlap_probability), py::arg("rate"),
        py::arg("alpha"), py::arg("support"));
}
