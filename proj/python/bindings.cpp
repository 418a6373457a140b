#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "kava/cli.hpp"
#include "kava/error.hpp"
#include "kava/gait.hpp"
#include "kava/jsonld.hpp"
#include "kava/manifestation.hpp"
#include "kava/skos.hpp"
#include "kava/turtle.hpp"
#include "kava/utilization.hpp"

namespace py = pybind11;
using namespace kava;

namespace {

Graph parseAs(const std::string& text, const std::string& format) {
  if (format == "turtle") return parseTurtle(text);
  if (format == "jsonld") return parseJsonLd(text);
  throw Error(ErrorCode::InvalidArgument, "unknown format: " + format);
}

std::string serializeAs(const Graph& g, const std::string& format) {
  if (format == "turtle") return serializeTurtle(g);
  if (format == "jsonld") return serializeJsonLd(g);
  throw Error(ErrorCode::InvalidArgument, "unknown format: " + format);
}

py::dict findingDict(const Finding& f) {
  py::dict d;
  d["code"] = std::string(findingCodeName(f.code));
  d["severity"] = f.severity == Severity::Error ? "error" : "warning";
  d["subject"] = f.subject;
  d["path"] = f.path;
  d["message"] = f.message;
  return d;
}

TimeSeries series(const std::vector<double>& t, const std::vector<double>& v) {
  if (t.size() != v.size()) throw Error(ErrorCode::InvalidArgument, "t and v lengths differ");
  TimeSeries s;
  for (std::size_t i = 0; i < t.size(); ++i) s.samples.push_back({t[i], v[i]});
  return s;
}

py::dict paramsDict(const gait::SpatioTemporalParams& p) {
  py::dict d;
  const auto& roster = gait::parameterRoster();
  for (std::size_t i = 0; i < roster.size(); ++i) d[py::str(std::string(roster[i].name))] = p[i];
  return d;
}

}  // namespace

PYBIND11_MODULE(_kava, m) {
  static auto* kavaError = new py::exception<Error>(m, "KavaError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(kavaError->ptr())(e.what());
      exc.attr("code") = std::string(errorCodeName(e.code()));
      PyErr_SetObject(kavaError->ptr(), exc.ptr());
    }
  });

  m.def("convert", [](const std::string& text, const std::string& from, const std::string& to) {
    return serializeAs(parseAs(text, from), to);
  }, py::arg("text"), py::arg("source") = "turtle", py::arg("target") = "jsonld");

  m.def("triples", [](const std::string& text, const std::string& format) {
    std::vector<std::tuple<std::string, std::string, std::string>> out;
    Graph g = parseAs(text, format);
    for (const Triple& t : g.triples())
      out.emplace_back(t.subject.toString(), t.predicate.toString(), t.object.toString());
    return out;
  }, py::arg("text"), py::arg("format") = "turtle");

  m.def("isomorphic", [](const std::string& a, const std::string& fa, const std::string& b,
                         const std::string& fb) {
    return isomorphicTrees(parseAs(a, fa), parseAs(b, fb));
  }, py::arg("a"), py::arg("a_format"), py::arg("b"), py::arg("b_format"));

  m.def("validate", [](const std::string& text, const std::string& format) {
    py::list out;
    for (const Finding& f : validateStore(parseAs(text, format))) out.append(findingDict(f));
    return out;
  }, py::arg("text"), py::arg("format") = "turtle");

  m.def("evaluate", [](const std::string& knowledge, const std::string& csv) {
    Dataset d = loadCsv(csv, inferSchema(csv));
    py::list out;
    for (const Manifestation& man : loadManifestations(parseTurtle(knowledge))) {
      py::dict row;
      row["concept"] = man.conceptId;
      row["anchor"] = man.anchor;
      row["ids"] = evaluateManifestation(man, d);
      out.append(row);
    }
    return out;
  }, py::arg("knowledge"), py::arg("csv"));

  m.def("threshold_regions", [](const std::string& knowledge, const std::string& axis) {
    std::vector<std::string> out;
    for (const Manifestation& man : loadManifestations(parseTurtle(knowledge)))
      out.push_back(thresholdRegionSpec(man.kind, axis).document.dump());
    return out;
  }, py::arg("knowledge"), py::arg("axis"));

  m.def("validate_fragment", [](const std::string& document) {
    return validateFragment(nlohmann::json::parse(document));
  });

  m.def("parameter_names", [] {
    std::vector<std::string> out;
    for (const auto& p : gait::parameterRoster()) out.emplace_back(p.name);
    return out;
  });

  m.def("compute_params", [](const std::vector<double>& tLeft, const std::vector<double>& fvLeft,
                             const std::vector<double>& tRight, const std::vector<double>& fvRight,
                             std::optional<double> bodyMass) {
    gait::GaitTrial trial{"", series(tLeft, fvLeft), series(tRight, fvRight), bodyMass, {}};
    return paramsDict(gait::computeParams(trial));
  }, py::arg("t_left"), py::arg("fv_left"), py::arg("t_right"), py::arg("fv_right"),
        py::arg("body_mass") = py::none());

  m.def("synthesize_trial", [](double stance, double period, double leftOnset,
                               double rightOffset, double peak, double duration,
                               double sampleRate, const std::string& shape) {
    gait::SyntheticGait g{stance, period, leftOnset, rightOffset, peak, duration, sampleRate,
                          shape == "arch" ? gait::Waveform::Arch : gait::Waveform::Square};
    gait::GaitTrial trial = gait::synthesizeTrial("synthetic", g);
    auto split = [](const TimeSeries& s) {
      std::pair<std::vector<double>, std::vector<double>> tv;
      for (const Sample& x : s.samples) {
        tv.first.push_back(x.t);
        tv.second.push_back(x.v);
      }
      return tv;
    };
    auto [tl, vl] = split(trial.fvLeft);
    auto [tr, vr] = split(trial.fvRight);
    py::dict d;
    d["t_left"] = tl;
    d["fv_left"] = vl;
    d["t_right"] = tr;
    d["fv_right"] = vr;
    return d;
  }, py::arg("stance") = 0.6, py::arg("period") = 1.0, py::arg("left_onset") = 0.2,
        py::arg("right_offset") = 0.5, py::arg("peak") = 800.0, py::arg("duration") = 10.0,
        py::arg("sample_rate") = 1000.0, py::arg("shape") = "square");

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = runCli(args, out, err);
    return std::make_tuple(code, out.str(), err.str());
  });
}
