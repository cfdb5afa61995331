#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "batchlab/cli.hpp"
#include "batchlab/datastage.hpp"
#include "batchlab/errors.hpp"
#include "batchlab/experiment.hpp"
#include "batchlab/report.hpp"

namespace py = pybind11;
using namespace batchlab;

namespace {

std::optional<VitalCdfTable> load_cdfs(const std::optional<std::string>& dists) {
  if (!dists) return std::nullopt;
  return read_distribution_bundle(*dists).vital_cdfs();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Centrifuge batching simulator and optimizers";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

  py::enum_<Priority>(m, "Priority")
      .value("routine", Priority::routine)
      .value("statim", Priority::statim)
      .value("vital", Priority::vital);

  py::class_<Sample>(m, "Sample")
      .def(py::init([](SampleId id, Seconds registration, Seconds transport, std::string ward,
                       Priority priority, Seconds processing) {
             Sample s{id, registration, transport, std::move(ward), priority, processing};
             validate(s);
             return s;
           }),
           py::arg("id"), py::arg("registration"), py::arg("transport"), py::arg("ward"),
           py::arg("priority"), py::arg("processing"))
      .def_readonly("id", &Sample::id)
      .def_readonly("registration", &Sample::registration)
      .def_readonly("transport", &Sample::transport)
      .def_readonly("ward", &Sample::ward)
      .def_readonly("priority", &Sample::priority)
      .def_readonly("processing", &Sample::processing)
      .def_property_readonly("arrival", &Sample::arrival)
      .def("__eq__", [](const Sample& a, const Sample& b) { return a == b; });

  py::class_<CompletionRecord>(m, "CompletionRecord")
      .def_readonly("sample_id", &CompletionRecord::sample_id)
      .def_readonly("batch_start", &CompletionRecord::batch_start)
      .def_readonly("completion", &CompletionRecord::completion)
      .def_readonly("arrival", &CompletionRecord::arrival)
      .def_readonly("batch_id", &CompletionRecord::batch_id);

  m.def(
      "generate_synthetic",
      [](int days, std::uint64_t seed, int vital_per_day) {
        SyntheticConfig cfg;
        cfg.days = days;
        cfg.vital_per_day = vital_per_day;
        return generate_synthetic(cfg, seed);
      },
      py::arg("days") = 1, py::arg("seed") = 1, py::arg("vital_per_day") = 5);

  m.def("read_instance", [](const std::string& path) { return read_instance_csv(path); });
  m.def("write_instance", [](const std::vector<Sample>& s, const std::string& path) {
    write_instance_csv(s, path);
  });

  m.def(
      "simulate",
      [](const std::vector<Sample>& samples, const std::string& policy, int capacity, Seconds cycle_time,
         std::optional<std::string> dists) {
        PolicySpec spec;
        spec.kind = parse_policy_kind(policy);
        auto cdfs = load_cdfs(dists);
        if (spec.kind == PolicyKind::stochastic && !cdfs)
          throw UsageError("the stochastic policy needs a distribution bundle");
        py::gil_scoped_release release;
        return simulate_daily(samples, spec, cdfs ? &*cdfs : nullptr, CentrifugeConfig{capacity, cycle_time});
      },
      py::arg("samples"), py::arg("policy") = "lookahead", py::arg("capacity") = 56,
      py::arg("cycle_time") = 900, py::arg("dists") = py::none());

  m.def(
      "solve_offline",
      [](const std::vector<Sample>& samples, int capacity, Seconds cycle_time) {
        py::gil_scoped_release release;
        return solve_offline_daily(samples, CentrifugeConfig{capacity, cycle_time}, StageRoutines{});
      },
      py::arg("samples"), py::arg("capacity") = 56, py::arg("cycle_time") = 900);

  m.def(
      "report_json",
      [](const std::vector<CompletionRecord>& records, const std::vector<Sample>& samples,
         const std::string& label) { return report_to_json(compute_report(records, samples, label)); },
      py::arg("records"), py::arg("samples"), py::arg("label") = "");

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
  });
}
