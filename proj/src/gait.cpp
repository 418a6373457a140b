#include "kava/gait.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "kava/error.hpp"
#include "kava/skos.hpp"

namespace kava::gait {

using nlohmann::json;

namespace {

constexpr double kGravity = 9.81;

enum Param : std::size_t {
  StepLeft, StepRight,
  StanceLeft, StanceRight,
  SwingLeft, SwingRight,
  StrideLeft, StrideRight,
  DoubleSupportLeft, DoubleSupportRight,
  PeakForceLeft, PeakForceRight,
  TimeToPeakLeft, TimeToPeakRight,
  Cadence,
  SupportAsymmetry,
};

double mean(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

}  // namespace

const std::array<ParameterInfo, kParameterCount>& parameterRoster() {
  static const std::array<ParameterInfo, kParameterCount> roster = {{
      {"stepTimeLeft", "s"},
      {"stepTimeRight", "s"},
      {"stanceTimeLeft", "s"},
      {"stanceTimeRight", "s"},
      {"swingTimeLeft", "s"},
      {"swingTimeRight", "s"},
      {"strideTimeLeft", "s"},
      {"strideTimeRight", "s"},
      {"doubleSupportTimeLeft", "s"},
      {"doubleSupportTimeRight", "s"},
      {"peakForceLeft", "N or body weights"},
      {"peakForceRight", "N or body weights"},
      {"timeToPeakLeft", "s"},
      {"timeToPeakRight", "s"},
      {"cadence", "steps/min"},
      {"supportAsymmetry", "%"},
  }};
  return roster;
}

std::optional<std::size_t> parameterIndex(std::string_view name) {
  const auto& roster = parameterRoster();
  for (std::size_t i = 0; i < roster.size(); ++i) {
    if (roster[i].name == name) return i;
  }
  return std::nullopt;
}

std::vector<std::size_t> resolveParameter(std::string_view name) {
  if (auto i = parameterIndex(name)) return {*i};
  auto left = parameterIndex(std::string(name) + "Left");
  auto right = parameterIndex(std::string(name) + "Right");
  if (left && right) return {*left, *right};
  throw Error(ErrorCode::UnknownParameter, std::string(name));
}

double SpatioTemporalParams::get(std::string_view name) const {
  auto i = parameterIndex(name);
  if (!i) throw Error(ErrorCode::UnknownParameter, std::string(name));
  return values[*i];
}

// ---------------------------------------------------------------------------
// Contacts and parameters

std::vector<Contact> detectContacts(const TimeSeries& series, double threshold,
                                    double debounce) {
  std::vector<Contact> raw;
  const auto& s = series.samples;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i].v <= threshold) continue;
    Contact c;
    c.start = s[i].t;
    c.truncatedStart = i == 0;
    c.peak = s[i].v;
    c.peakTime = s[i].t;
    std::size_t j = i;
    while (j < s.size() && s[j].v > threshold) {
      if (s[j].v > c.peak) {
        c.peak = s[j].v;
        c.peakTime = s[j].t;
      }
      ++j;
    }
    if (j < s.size()) {
      c.end = s[j].t;
    } else {
      c.end = s.back().t;
      c.truncatedEnd = true;
    }
    raw.push_back(c);
    i = j;
  }

  std::vector<Contact> merged;
  for (const Contact& c : raw) {
    if (!merged.empty() && c.start - merged.back().end < debounce) {
      Contact& prev = merged.back();
      prev.end = c.end;
      prev.truncatedEnd = c.truncatedEnd;
      if (c.peak > prev.peak) {
        prev.peak = c.peak;
        prev.peakTime = c.peakTime;
      }
      continue;
    }
    merged.push_back(c);
  }
  std::erase_if(merged,
                [&](const Contact& c) { return c.end - c.start < debounce; });
  return merged;
}

namespace {

struct FootEvents {
  std::vector<Contact> contacts;
  std::vector<double> heelStrikes;
};

FootEvents footEvents(const TimeSeries& series, double threshold,
                      const char* side) {
  FootEvents f;
  f.contacts = detectContacts(series, threshold);
  for (const Contact& c : f.contacts) {
    if (!c.truncatedStart) f.heelStrikes.push_back(c.start);
  }
  if (f.heelStrikes.size() < 2) {
    throw Error(ErrorCode::InsufficientSteps,
                std::string(side) + " foot has " +
                    std::to_string(f.heelStrikes.size()) +
                    " heel strike(s); at least 2 are needed");
  }
  return f;
}

double overlap(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

// Time within [from, to) during which both feet are in contact.
double bothInContact(const FootEvents& a, const FootEvents& b, double from,
                     double to) {
  double total = 0;
  for (const Contact& ca : a.contacts) {
    double a0 = std::max(ca.start, from);
    double a1 = std::min(ca.end, to);
    if (a1 <= a0) continue;
    for (const Contact& cb : b.contacts) total += overlap(a0, a1, cb.start, cb.end);
  }
  return total;
}

struct SideParams {
  std::vector<double> step, stance, swing, stride, doubleSupport, peak, timeToPeak;
};

SideParams sideParams(const FootEvents& self, const FootEvents& other) {
  SideParams p;
  for (const Contact& c : self.contacts) {
    if (c.truncatedStart || c.truncatedEnd) continue;
    p.stance.push_back(c.end - c.start);
    p.peak.push_back(c.peak);
    p.timeToPeak.push_back(c.peakTime - c.start);
  }
  for (std::size_t i = 0; i + 1 < self.contacts.size(); ++i) {
    const Contact& a = self.contacts[i];
    const Contact& b = self.contacts[i + 1];
    if (a.truncatedEnd || b.truncatedStart) continue;
    p.swing.push_back(b.start - a.end);
  }
  const auto& hs = self.heelStrikes;
  for (std::size_t i = 0; i + 1 < hs.size(); ++i) {
    p.stride.push_back(hs[i + 1] - hs[i]);
    p.doubleSupport.push_back(bothInContact(self, other, hs[i], hs[i + 1]));
  }
  for (std::size_t i = 0; i < hs.size(); ++i) {
    auto it = std::lower_bound(other.heelStrikes.begin(), other.heelStrikes.end(),
                               hs[i]);
    if (it == other.heelStrikes.begin()) continue;
    double previous = *std::prev(it);
    if (i > 0 && previous < hs[i - 1]) continue;  // no contralateral strike in between
    p.step.push_back(hs[i] - previous);
  }
  return p;
}

double requireMean(const std::vector<double>& xs, std::string_view name) {
  if (xs.empty()) {
    throw Error(ErrorCode::InsufficientSteps,
                "no complete events for " + std::string(name));
  }
  return mean(xs);
}

}  // namespace

SpatioTemporalParams computeParams(const GaitTrial& trial) {
  auto maxOf = [](const TimeSeries& s) {
    double m = 0;
    for (const Sample& x : s.samples) m = std::max(m, x.v);
    return m;
  };
  double peak = std::max(maxOf(trial.fvLeft), maxOf(trial.fvRight));
  if (!(peak > 0)) {
    throw Error(ErrorCode::InsufficientSteps,
                "trial " + trial.patientId + " has no positive force");
  }
  double threshold = kContactFraction * peak;
  FootEvents left = footEvents(trial.fvLeft, threshold, "left");
  FootEvents right = footEvents(trial.fvRight, threshold, "right");
  SideParams l = sideParams(left, right);
  SideParams r = sideParams(right, left);

  const auto& roster = parameterRoster();
  SpatioTemporalParams out;
  auto& v = out.values;
  v[StepLeft] = requireMean(l.step, roster[StepLeft].name);
  v[StepRight] = requireMean(r.step, roster[StepRight].name);
  v[StanceLeft] = requireMean(l.stance, roster[StanceLeft].name);
  v[StanceRight] = requireMean(r.stance, roster[StanceRight].name);
  v[SwingLeft] = requireMean(l.swing, roster[SwingLeft].name);
  v[SwingRight] = requireMean(r.swing, roster[SwingRight].name);
  v[StrideLeft] = requireMean(l.stride, roster[StrideLeft].name);
  v[StrideRight] = requireMean(r.stride, roster[StrideRight].name);
  v[DoubleSupportLeft] = requireMean(l.doubleSupport, roster[DoubleSupportLeft].name);
  v[DoubleSupportRight] = requireMean(r.doubleSupport, roster[DoubleSupportRight].name);
  double weight = trial.bodyMass ? *trial.bodyMass * kGravity : 1.0;
  v[PeakForceLeft] = requireMean(l.peak, roster[PeakForceLeft].name) / weight;
  v[PeakForceRight] = requireMean(r.peak, roster[PeakForceRight].name) / weight;
  v[TimeToPeakLeft] = requireMean(l.timeToPeak, roster[TimeToPeakLeft].name);
  v[TimeToPeakRight] = requireMean(r.timeToPeak, roster[TimeToPeakRight].name);

  std::vector<double> steps = l.step;
  steps.insert(steps.end(), r.step.begin(), r.step.end());
  double meanStep = mean(steps);
  v[Cadence] = 60.0 / meanStep;
  double stanceSum = v[StanceLeft] + v[StanceRight];
  v[SupportAsymmetry] =
      200.0 * std::fabs(v[StanceLeft] - v[StanceRight]) / stanceSum;

  for (std::size_t i : {StepLeft, StepRight, StanceLeft, StanceRight, SwingLeft,
                        SwingRight, StrideLeft, StrideRight}) {
    if (!(v[i] > 0)) {
      throw Error(ErrorCode::NonPositivePhase,
                  std::string(roster[i].name) + " = " + formatNumber(v[i]));
    }
  }
  for (std::size_t i : {DoubleSupportLeft, DoubleSupportRight, TimeToPeakLeft,
                        TimeToPeakRight}) {
    if (v[i] < 0) {
      throw Error(ErrorCode::NonPositivePhase,
                  std::string(roster[i].name) + " = " + formatNumber(v[i]));
    }
  }
  return out;
}

TimeSeries combinedForce(const GaitTrial& trial) {
  auto at = [](const TimeSeries& s, double t) {
    const auto& xs = s.samples;
    if (xs.empty() || t < xs.front().t || t > xs.back().t) return 0.0;
    auto it = std::lower_bound(xs.begin(), xs.end(), t,
                               [](const Sample& a, double t) { return a.t < t; });
    if (it->t == t) return it->v;
    const Sample& hi = *it;
    const Sample& lo = *std::prev(it);
    return lo.v + (hi.v - lo.v) * (t - lo.t) / (hi.t - lo.t);
  };
  std::set<double> grid;
  for (const Sample& s : trial.fvLeft.samples) grid.insert(s.t);
  for (const Sample& s : trial.fvRight.samples) grid.insert(s.t);
  TimeSeries out;
  out.label = "Fv";
  for (double t : grid) {
    out.samples.push_back({t, at(trial.fvLeft, t) + at(trial.fvRight, t)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Category models

std::optional<Range> CategoryModel::computedRange(std::size_t parameter) const {
  if (prototypes.empty()) return std::nullopt;
  Range r{prototypes.front().params[parameter], prototypes.front().params[parameter]};
  for (const Prototype& p : prototypes) {
    r.min = std::min(r.min, p.params[parameter]);
    r.max = std::max(r.max, p.params[parameter]);
  }
  return r;
}

std::optional<Range> CategoryModel::effectiveRange(std::size_t parameter) const {
  auto it = overrides.find(std::string(parameterRoster()[parameter].name));
  if (it != overrides.end()) return it->second;
  return computedRange(parameter);
}

Schema metadataSchema() {
  return Schema({{"patientId", VariableKind::String},
                 {"age", VariableKind::Number},
                 {"bodyMass", VariableKind::Number}},
                {"patientId"});
}

Dataset metadataDataset(const std::vector<GaitTrial>& trials) {
  Dataset d(metadataSchema());
  for (const GaitTrial& t : trials) {
    Record r;
    r.values = {t.patientId, t.age ? Value(*t.age) : Value(),
                t.bodyMass ? Value(*t.bodyMass) : Value()};
    d.append(std::move(r));
  }
  return d;
}

namespace {

std::set<std::string> passingIds(const std::vector<GaitTrial>& trials,
                                 const std::optional<Predicate>& filter) {
  std::set<std::string> ids;
  Dataset meta = metadataDataset(trials);
  std::optional<BoundPredicate> bound;
  if (filter) bound.emplace(*filter, meta.schema());
  for (std::size_t row = 0; row < meta.size(); ++row) {
    if (!bound || (*bound)(meta.records()[row])) ids.insert(meta.recordId(row));
  }
  return ids;
}

}  // namespace

CategoryModel buildCategoryModel(const std::string& conceptId,
                                 const std::vector<GaitTrial>& trials,
                                 const std::optional<Predicate>& filter) {
  CategoryModel model;
  model.conceptId = conceptId;
  model.populationFilter = filter;
  auto ids = passingIds(trials, filter);
  for (const GaitTrial& t : trials) {
    if (ids.contains(t.patientId)) {
      model.prototypes.push_back({t.patientId, computeParams(t)});
    }
  }
  if (model.prototypes.empty()) {
    throw Error(ErrorCode::EmptyPopulation,
                "no prototype of " + conceptId + " passes the filter");
  }
  return model;
}

std::pair<CategoryModel, Manifestation> overrideRange(
    const CategoryModel& model, const std::string& parameter, double min,
    double max, const std::string& creator, const std::string& date) {
  if (!parameterIndex(parameter)) {
    throw Error(ErrorCode::UnknownParameter, parameter);
  }
  if (!(min <= max)) {
    throw Error(ErrorCode::InvertedRange,
                parameter + ": " + formatNumber(min) + " > " + formatNumber(max));
  }
  CategoryModel updated = model;
  updated.overrides[parameter] = {min, max};
  IndirectVariableMapping mapping{Term::string(parameter), Term::decimal(min),
                                  Term::decimal(max)};
  return {std::move(updated),
          createManifestation(model.conceptId, mapping, creator, date)};
}

std::string_view placementName(Placement p) {
  switch (p) {
    case Placement::Inside: return "inside";
    case Placement::Below: return "below";
    case Placement::Above: return "above";
    case Placement::Undefined: return "undefined";
  }
  return "?";
}

MatchResult matchCategory(const SpatioTemporalParams& params,
                          const CategoryModel& model) {
  MatchResult result;
  result.conceptId = model.conceptId;
  for (std::size_t i = 0; i < kParameterCount; ++i) {
    auto range = model.effectiveRange(i);
    if (!range) {
      result.perParameter[i] = Placement::Undefined;
      continue;
    }
    ++result.defined;
    double v = params[i];
    if (v < range->min) {
      result.perParameter[i] = Placement::Below;
    } else if (v > range->max) {
      result.perParameter[i] = Placement::Above;
    } else {
      result.perParameter[i] = Placement::Inside;
      ++result.inside;
    }
  }
  if (result.defined == 0) {
    throw Error(ErrorCode::NoDefinedRanges, model.conceptId);
  }
  result.score =
      static_cast<double>(result.inside) / static_cast<double>(result.defined);
  return result;
}

std::vector<KnowledgeRow> knowledgeTable(const std::vector<CategoryModel>& models,
                                         const SpatioTemporalParams& params) {
  std::vector<KnowledgeRow> rows;
  for (const CategoryModel& m : models) {
    KnowledgeRow row;
    row.conceptId = m.conceptId;
    row.label = m.label;
    row.prototypes = m.prototypes;
    for (std::size_t i = 0; i < kParameterCount; ++i) row.ranges[i] = m.effectiveRange(i);
    try {
      row.match = matchCategory(params, m);
      row.score = row.match.score;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoDefinedRanges) throw;
      row.match.conceptId = m.conceptId;
      row.match.perParameter.fill(Placement::Undefined);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

json finiteOrNull(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json paramsJson(const SpatioTemporalParams& p) {
  json out = json::object();
  for (std::size_t i = 0; i < kParameterCount; ++i) {
    out[std::string(parameterRoster()[i].name)] = p[i];
  }
  return out;
}

}  // namespace

json knowledgeRowJson(const KnowledgeRow& row) {
  json parameters = json::object();
  for (std::size_t i = 0; i < kParameterCount; ++i) {
    json entry = {{"placement", placementName(row.match.perParameter[i])}};
    if (row.ranges[i]) {
      entry["min"] = finiteOrNull(row.ranges[i]->min);
      entry["max"] = finiteOrNull(row.ranges[i]->max);
    }
    parameters[std::string(parameterRoster()[i].name)] = std::move(entry);
  }
  json prototypes = json::array();
  for (const Prototype& p : row.prototypes) {
    prototypes.push_back({{"patientId", p.patientId}, {"values", paramsJson(p.params)}});
  }
  return {{"concept", row.conceptId},
          {"label", row.label},
          {"score", row.score ? json(*row.score) : json(nullptr)},
          {"inside", row.match.inside},
          {"defined", row.match.defined},
          {"parameters", std::move(parameters)},
          {"prototypes", std::move(prototypes)}};
}

VisSpecFragment parameterExplorerSpec(const SpatioTemporalParams& params,
                                      const std::vector<CategoryModel>& models) {
  const auto& roster = parameterRoster();
  json values = json::array();
  for (std::size_t i = 0; i < kParameterCount; ++i) {
    values.push_back({{"parameter", roster[i].name},
                      {"value", params[i]},
                      {"concept", "patient"},
                      {"role", "patient"}});
  }
  json layers = json::array();
  for (const CategoryModel& m : models) {
    for (const Prototype& p : m.prototypes) {
      for (std::size_t i = 0; i < kParameterCount; ++i) {
        values.push_back({{"parameter", roster[i].name},
                          {"value", p.params[i]},
                          {"concept", m.conceptId},
                          {"role", "prototype"},
                          {"patientId", p.patientId}});
      }
    }
    for (std::size_t i = 0; i < kParameterCount; ++i) {
      auto range = m.effectiveRange(i);
      if (!range) continue;
      layers.push_back({{"mark", {{"type", "rule"}}},
                        {"concept", m.conceptId},
                        {"encoding",
                         {{"x", {{"datum", finiteOrNull(range->min)},
                                 {"type", "quantitative"}}},
                          {"x2", {{"datum", finiteOrNull(range->max)}}},
                          {"y", {{"datum", roster[i].name}, {"type", "nominal"}}}}}});
    }
  }
  VisSpecFragment f{FragmentKind::EncodedMarks, json::object(), {}};
  f.document = {{"kind", "encodedMarks"},
                {"description", "parameter explorer"},
                {"data", {{"name", "parameters"}, {"values", std::move(values)}}},
                {"mark", "tick"},
                {"encoding",
                 {{"x", {{"field", "value"}, {"type", "quantitative"}}},
                  {"y", {{"field", "parameter"}, {"type", "nominal"}}},
                  {"color", {{"field", "concept"}, {"type", "nominal"}}}}},
                {"layer", std::move(layers)}};
  return f;
}

BoxStats boxStats(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "no values");
  std::sort(values.begin(), values.end());
  auto quantile = [&](double p) {
    double h = (static_cast<double>(values.size()) - 1) * p;
    auto lo = static_cast<std::size_t>(std::floor(h));
    std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  return {values.front(), quantile(0.25), quantile(0.5), quantile(0.75),
          values.back()};
}

BoxStats parameterBoxStats(const CategoryModel& model, std::size_t parameter) {
  std::vector<double> xs;
  for (const Prototype& p : model.prototypes) xs.push_back(p.params[parameter]);
  return boxStats(std::move(xs));
}

// ---------------------------------------------------------------------------
// Knowledge store

namespace {

Term patientTerm(const std::string& id) {
  if (!id.empty() && id.size() < 19 &&
      std::all_of(id.begin(), id.end(), [](unsigned char c) { return std::isdigit(c); }) &&
      (id == "0" || id.front() != '0')) {
    return Term::integer(std::stoll(id));
  }
  return Term::string(id);
}

std::optional<std::string> prototypePatient(const Manifestation& m) {
  const auto* direct = std::get_if<DirectMapping>(&m.kind);
  if (!direct || direct->bindings.size() != 1) return std::nullopt;
  const Binding& b = direct->bindings.front();
  if (variableName(b.variable) != "patientId") return std::nullopt;
  return b.value.value();
}

}  // namespace

Graph addPrototype(const Graph& store, const std::string& conceptId,
                   const GaitTrial& trial, const std::string& creator,
                   const std::string& date) {
  if (!store.contains({Term::iri(conceptId), vocab::rdfType(),
                       vocab::skos("Concept")})) {
    throw Error(ErrorCode::UnknownConcept, conceptId);
  }
  for (const Manifestation& m : loadManifestations(store)) {
    if (m.conceptId == conceptId && prototypePatient(m) == trial.patientId) {
      throw Error(ErrorCode::DuplicatePrototype,
                  trial.patientId + " is already a prototype of " + conceptId);
    }
  }
  computeParams(trial);  // refuses trials that cannot yield parameters
  Manifestation m = createManifestation(
      conceptId, DirectMapping{{{Term::string("patientId"), patientTerm(trial.patientId)}}},
      creator, date);
  Graph updated = store;
  appendManifestation(updated, m);
  return updated;
}

std::vector<CategoryModel> categoryModelsFromStore(
    const Graph& store, const std::string& schemeId,
    const std::vector<GaitTrial>& trials, const std::optional<Predicate>& filter,
    std::vector<std::string>* warnings) {
  auto warn = [&](const std::string& w) {
    if (warnings) warnings->push_back(w);
  };
  ConceptScheme scheme = loadScheme(store, schemeId);
  std::map<std::string, const GaitTrial*> byId;
  for (const GaitTrial& t : trials) byId[t.patientId] = &t;
  auto passing = passingIds(trials, filter);
  std::map<std::string, SpatioTemporalParams> cache;

  std::map<std::string, CategoryModel> models;
  for (const auto& [id, c] : scheme.concepts) {
    CategoryModel& m = models[id];
    m.conceptId = id;
    m.label = c.prefLabel;
    m.populationFilter = filter;
  }
  for (const Manifestation& man : loadManifestations(store)) {
    auto it = models.find(man.conceptId);
    if (it == models.end()) continue;
    CategoryModel& model = it->second;
    if (auto patient = prototypePatient(man)) {
      auto trial = byId.find(*patient);
      if (trial == byId.end()) {
        warn("no trial data for prototype " + *patient + " of " + man.conceptId);
        continue;
      }
      if (!passing.contains(*patient)) continue;
      auto cached = cache.find(*patient);
      if (cached == cache.end()) {
        cached = cache.emplace(*patient, computeParams(*trial->second)).first;
      }
      model.prototypes.push_back({*patient, cached->second});
    } else if (const auto* range = std::get_if<IndirectVariableMapping>(&man.kind)) {
      std::string name = variableName(range->variable);
      if (!parameterIndex(name)) {
        warn("ignoring range on unknown parameter '" + name + "' of " + man.conceptId);
        continue;
      }
      double inf = std::numeric_limits<double>::infinity();
      model.overrides[name] = {range->minValue ? range->minValue->asDouble() : -inf,
                               range->maxValue ? range->maxValue->asDouble() : inf};
    } else {
      warn("ignoring non-gait manifestation " + man.anchor + " of " + man.conceptId);
    }
  }
  std::vector<CategoryModel> out;
  for (auto& [id, m] : models) out.push_back(std::move(m));
  return out;
}

// ---------------------------------------------------------------------------
// Trial files

namespace {

std::string readFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void writeFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
}

}  // namespace

std::vector<GaitTrial> loadTrials(const std::filesystem::path& dir) {
  Dataset meta = loadCsv(readFile(dir / "patients.csv"), metadataSchema());
  std::vector<GaitTrial> trials;
  for (std::size_t row = 0; row < meta.size(); ++row) {
    GaitTrial t;
    t.patientId = meta.recordId(row);
    if (const double* age = std::get_if<double>(&meta.value(row, "age"))) t.age = *age;
    if (const double* mass = std::get_if<double>(&meta.value(row, "bodyMass"))) {
      t.bodyMass = *mass;
    }
    t.fvLeft = loadTimeSeries(readFile(dir / (t.patientId + "_left.csv")));
    t.fvRight = loadTimeSeries(readFile(dir / (t.patientId + "_right.csv")));
    trials.push_back(std::move(t));
  }
  return trials;
}

void writeTrials(const std::filesystem::path& dir,
                 const std::vector<GaitTrial>& trials) {
  std::filesystem::create_directories(dir);
  writeFile(dir / "patients.csv", writeCsv(metadataDataset(trials)));
  for (const GaitTrial& t : trials) {
    writeFile(dir / (t.patientId + "_left.csv"), writeTimeSeries(t.fvLeft));
    writeFile(dir / (t.patientId + "_right.csv"), writeTimeSeries(t.fvRight));
  }
}

// ---------------------------------------------------------------------------

GaitTrial synthesizeTrial(const std::string& patientId, const SyntheticGait& g,
                          std::optional<double> bodyMass, std::optional<double> age) {
  auto samplesOf = [&](double seconds) {
    return static_cast<long long>(std::llround(seconds * g.sampleRate));
  };
  const long long n = samplesOf(g.duration);
  const long long period = samplesOf(g.period);
  const long long stance = samplesOf(g.stance);
  if (n <= 0 || period <= 0 || stance <= 0 || stance >= period) {
    throw Error(ErrorCode::InvalidArgument, "degenerate synthetic gait");
  }
  auto foot = [&](double onset) {
    TimeSeries s;
    s.label = "Fv";
    long long first = samplesOf(onset);
    for (long long i = 0; i < n; ++i) {
      // Phase of sample i within the stride that started at or before it.
      long long phase = ((i - first) % period + period) % period;
      double v = 0;
      if (phase < stance) {
        v = g.peak;
        if (g.shape == Waveform::Arch) {
          v = g.peak * (0.6 + 0.4 * std::sin(M_PI * static_cast<double>(phase) /
                                             static_cast<double>(stance)));
        }
      }
      s.samples.push_back({static_cast<double>(i) / g.sampleRate, v});
    }
    return s;
  };
  GaitTrial t;
  t.patientId = patientId;
  t.fvLeft = foot(g.leftOnset);
  t.fvRight = foot(g.leftOnset + g.rightOffset);
  t.bodyMass = bodyMass;
  t.age = age;
  return t;
}

}  // namespace kava::gait
