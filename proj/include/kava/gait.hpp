#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kava/dataset.hpp"
#include "kava/manifestation.hpp"
#include "kava/predicate.hpp"
#include "kava/rdf.hpp"
#include "kava/utilization.hpp"

namespace kava::gait {

struct GaitTrial {
  std::string patientId;
  TimeSeries fvLeft;   // vertical ground reaction force, newtons
  TimeSeries fvRight;
  std::optional<double> bodyMass;  // kg
  std::optional<double> age;       // years
};

inline constexpr std::size_t kParameterCount = 16;

struct ParameterInfo {
  std::string_view name;
  std::string_view unit;
};

// stepTime, stanceTime, swingTime, strideTime, doubleSupportTime, peakForce
// and timeToPeak for each side (Left, Right), then cadence and
// supportAsymmetry.
const std::array<ParameterInfo, kParameterCount>& parameterRoster();

std::optional<std::size_t> parameterIndex(std::string_view name);

// Exact roster names, or a per-side base name ("stanceTime") which expands
// to both sides. Throws UnknownParameter.
std::vector<std::size_t> resolveParameter(std::string_view name);

struct SpatioTemporalParams {
  std::array<double, kParameterCount> values{};

  double operator[](std::size_t i) const { return values[i]; }
  double get(std::string_view name) const;
  bool operator==(const SpatioTemporalParams&) const = default;
};

struct Contact {
  double start = 0;
  double end = 0;
  bool truncatedStart = false;
  bool truncatedEnd = false;
  double peak = 0;
  double peakTime = 0;
};

inline constexpr double kContactFraction = 0.05;
inline constexpr double kDebounceSeconds = 0.05;

// Samples with v > threshold are in contact. A contact spans from its first
// sample above the threshold to the first sample below it. Gaps and
// contacts shorter than `debounce` are merged away / dropped.
std::vector<Contact> detectContacts(const TimeSeries& series, double threshold,
                                    double debounce = kDebounceSeconds);

// Throws InsufficientSteps (fewer than two heel strikes on a foot) or
// NonPositivePhase.
SpatioTemporalParams computeParams(const GaitTrial& trial);

// Sum of both feet on the union of the two time grids, each side linearly
// interpolated and zero outside its own recording.
TimeSeries combinedForce(const GaitTrial& trial);

struct Range {
  double min = 0;
  double max = 0;

  bool contains(double v) const { return v >= min && v <= max; }
  bool operator==(const Range&) const = default;
};

struct Prototype {
  std::string patientId;
  SpatioTemporalParams params;
};

struct CategoryModel {
  std::string conceptId;
  std::string label;
  std::vector<Prototype> prototypes;
  std::map<std::string, Range> overrides;
  std::optional<Predicate> populationFilter;

  // Min/max over the prototypes; empty without prototypes.
  std::optional<Range> computedRange(std::size_t parameter) const;
  // Override when present, else the computed range.
  std::optional<Range> effectiveRange(std::size_t parameter) const;
};

// patientId (string, identifying), age, bodyMass.
Schema metadataSchema();
Dataset metadataDataset(const std::vector<GaitTrial>& trials);

// Prototypes are the trials passing `filter` (evaluated on the metadata
// dataset). Throws EmptyPopulation.
CategoryModel buildCategoryModel(const std::string& conceptId,
                                 const std::vector<GaitTrial>& trials,
                                 const std::optional<Predicate>& filter = {});

// Throws UnknownParameter or InvertedRange. The manifestation is an
// indirect variable mapping on the parameter name with both bounds.
std::pair<CategoryModel, Manifestation> overrideRange(
    const CategoryModel& model, const std::string& parameter, double min,
    double max, const std::string& creator, const std::string& date);

enum class Placement { Inside, Below, Above, Undefined };

std::string_view placementName(Placement p);

struct MatchResult {
  std::string conceptId;
  double score = 0;
  std::size_t inside = 0;
  std::size_t defined = 0;
  std::array<Placement, kParameterCount> perParameter{};
};

// score = inside / defined. Throws NoDefinedRanges.
MatchResult matchCategory(const SpatioTemporalParams& params,
                          const CategoryModel& model);

struct KnowledgeRow {
  std::string conceptId;
  std::string label;
  std::optional<double> score;  // empty when no range is defined
  MatchResult match;
  std::array<std::optional<Range>, kParameterCount> ranges;
  std::vector<Prototype> prototypes;
};

std::vector<KnowledgeRow> knowledgeTable(const std::vector<CategoryModel>& models,
                                         const SpatioTemporalParams& params);

nlohmann::json knowledgeRowJson(const KnowledgeRow& row);

// Patient values, prototype values and effective ranges of the given
// categories as an encodedMarks fragment (one tick row per value, one rule
// layer per range).
VisSpecFragment parameterExplorerSpec(const SpatioTemporalParams& params,
                                      const std::vector<CategoryModel>& models);

struct BoxStats {
  double min = 0;
  double q1 = 0;
  double median = 0;
  double q3 = 0;
  double max = 0;
};

// Linear-interpolation quantiles (R type 7). Throws InvalidArgument on an
// empty input.
BoxStats boxStats(std::vector<double> values);

// Prototype statistics of one parameter of a category.
BoxStats parameterBoxStats(const CategoryModel& model, std::size_t parameter);

// ---------------------------------------------------------------------------
// Knowledge store

// Appends a Listing-3 shaped direct mapping (patientId binding) with
// provenance to a copy of `store`. Throws UnknownConcept (no skos:Concept
// with that IRI) or DuplicatePrototype.
Graph addPrototype(const Graph& store, const std::string& conceptId,
                   const GaitTrial& trial, const std::string& creator,
                   const std::string& date);

// Models for every concept of `schemeId`: prototypes from patientId direct
// mappings (looked up in `trials`), overrides from indirect variable
// mappings on roster parameters. Prototypes missing from `trials` or
// rejected by `filter` are skipped and reported in `warnings`.
std::vector<CategoryModel> categoryModelsFromStore(
    const Graph& store, const std::string& schemeId,
    const std::vector<GaitTrial>& trials,
    const std::optional<Predicate>& filter = {},
    std::vector<std::string>* warnings = nullptr);

// ---------------------------------------------------------------------------
// Trial files: <dir>/patients.csv (patientId, age, bodyMass) and
// <dir>/<patientId>_left.csv, <dir>/<patientId>_right.csv with "t,Fv".

std::vector<GaitTrial> loadTrials(const std::filesystem::path& dir);
void writeTrials(const std::filesystem::path& dir,
                 const std::vector<GaitTrial>& trials);

// ---------------------------------------------------------------------------
// Synthetic trials

enum class Waveform { Square, Arch };

struct SyntheticGait {
  double stance = 0.6;       // contact duration per foot, s
  double period = 1.0;       // stride time, s
  double leftOnset = 0.2;    // first left heel strike, s
  double rightOffset = 0.5;  // right heel strike after left, s
  double peak = 800;         // N
  double duration = 10;      // s
  double sampleRate = 1000;  // Hz
  Waveform shape = Waveform::Square;
};

// Contacts are laid out on whole sample indices, so contact boundaries fall
// exactly on samples.
GaitTrial synthesizeTrial(const std::string& patientId, const SyntheticGait& g,
                          std::optional<double> bodyMass = {},
                          std::optional<double> age = {});

}  // namespace kava::gait
