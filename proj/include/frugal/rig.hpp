#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "frugal/dataset.hpp"
#include "frugal/fft.hpp"
#include "frugal/metrics.hpp"

namespace frugal {

// A trained classifier as seen by the rig.
class Model {
 public:
  virtual ~Model() = default;
  virtual bool predict(std::span<const double> row) const = 0;
  // Higher means "inspect earlier" when ranking for Popt.
  virtual double priority(std::span<const double> row) const = 0;
  virtual const FFTree* tree() const { return nullptr; }
};

class Learner {
 public:
  virtual ~Learner() = default;
  virtual std::string name() const = 0;
  virtual std::unique_ptr<Model> fit(const Dataset& train, const ScoreFunction& fn) const = 0;
};

struct LearnerOptions {
  int depth = 4;
  int lr_epochs = 500;
  double lr_rate = 0.1;
};

// "fft", "nb", "lr", "always-true", "always-false". Throws ConfigError
// for anything else.
std::unique_ptr<Learner> make_learner(const std::string& name, const LearnerOptions& options = {});

enum class AttributeSet { kAll, kTopChanged };
std::string attribute_set_name(AttributeSet s);  // "all" / "top"
AttributeSet parse_attribute_set(const std::string& text);

struct EvalResult {
  std::string dataset;
  std::string learner;
  ScoreFunction score;
  AttributeSet attribute_set = AttributeSet::kAll;
  int repeat = 0;
  int bin = 0;
  Confusion confusion;
  double recall = 0.0;
  double far = 0.0;
  double dis2heaven = 0.0;
  std::optional<double> popt;
  bool popt_degenerate = false;
  std::optional<double> recall_at_20;
  // The value of `score` on the test rows.
  double metric = 0.0;
  std::string policy;  // FFT only
  bool truncated = false;
  std::vector<std::string> attributes;
  double wall_ms = 0.0;  // not serialized; varies run to run
};

// Scores a trained model on test rows.
EvalResult evaluate(const Model& model, const Dataset& test, const ScoreFunction& fn);

enum class SplitKind { kVersionOrdered, kCrossValidation };

// Row indices into a pooled dataset.
struct SplitPlan {
  SplitKind kind = SplitKind::kVersionOrdered;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  int repeat = 0;
  int bin = 0;
  std::uint64_t seed = 0;
};

// Train on every version but the last, test on the last. Indices refer to
// merge(versions).
SplitPlan version_split(std::span<const Dataset> versions);

// repeats x bins plans; within a repeat the test bins partition the rows.
std::vector<SplitPlan> cross_val(std::size_t rows, int bins = 10, int repeats = 5,
                                 std::uint64_t seed = 1);

// Seeded Fisher-Yates permutation of 0..n-1, identical on every platform.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

// One prediction task: ordered versions (version-ordered mode) or a single
// table (cross-validation mode). Labels must be binary.
struct Task {
  std::string name;
  SplitKind mode = SplitKind::kVersionOrdered;
  std::vector<Dataset> versions;
  // Provenance recorded in reports.
  std::vector<std::string> files;
  std::string rule;
};

struct RigConfig {
  std::vector<std::string> learners = {"fft"};
  std::vector<ScoreFunction> scores = {ScoreFunction::dis2heaven()};
  std::vector<AttributeSet> attribute_sets = {AttributeSet::kAll};
  double top_fraction = 0.25;
  int depth = 4;
  std::uint64_t seed = 1;
  int bins = 10;
  int repeats = 5;
  int threads = 1;
  LearnerOptions learner_options() const;
  std::vector<Task> tasks;
};

// Reads a JSON rig configuration; CSV paths resolve against `base_dir`.
RigConfig load_rig_config(const std::string& path);
RigConfig parse_rig_config(const std::string& json_text, const std::string& base_dir);

// Attributes kept for the top-changed set: ranked on the last two training
// versions only.
std::vector<std::string> operational_attributes(const Task& task, double fraction);

struct RigOutput {
  std::vector<EvalResult> results;
  // Combinations that cannot run (e.g. the top-changed set on a task with
  // fewer than two training versions).
  std::vector<std::string> skipped;
};

RigOutput run(const RigConfig& config);

// policy -> count, per (score, attribute set) column.
struct PolicyHistogram {
  struct Column {
    ScoreFunction score;
    AttributeSet attribute_set = AttributeSet::kAll;
    std::map<std::string, std::size_t> counts;
    std::size_t total = 0;
  };
  int depth = 0;
  std::vector<Column> columns;
  bool empty() const { return columns.empty(); }
};

PolicyHistogram policy_histogram(std::span<const EvalResult> results);

enum class Verdict { kBetter, kWorse, kTie, kInconclusive };
std::string verdict_name(Verdict v);

struct ComparisonCell {
  std::string dataset;
  ScoreFunction score;
  AttributeSet attribute_set = AttributeSet::kAll;
  Verdict verdict = Verdict::kInconclusive;
  // learner -> Mann-Whitney outcome of FFT vs that learner
  std::map<std::string, MannWhitney> tests;
};

// FFT is better when significantly better than every other learner, worse
// when any learner is significantly better than it.
std::vector<ComparisonCell> compare(std::span<const EvalResult> results, double alpha = 0.05);

struct DeltaRow {
  std::string dataset;
  std::string learner;
  ScoreFunction score;
  double delta = 0.0;
};

// Median score with the top-changed set versus all attributes:
// (25% - 100%) for dis2heaven and (100% - 25%) for Popt.
std::vector<DeltaRow> attribute_deltas(std::span<const EvalResult> results);

std::string results_csv(std::span<const EvalResult> results, const RigConfig& config);
std::string results_json(const RigOutput& output, const RigConfig& config);
std::string histogram_csv(const PolicyHistogram& histogram);
std::string comparison_csv(std::span<const ComparisonCell> cells);
std::string deltas_csv(std::span<const DeltaRow> rows);

// Writes results.csv, results.json, policy_histogram.csv, comparison.csv
// (plus deltas.csv and timing.csv) into `dir`, each via a temporary file
// and rename.
void write_reports(const RigOutput& output, const RigConfig& config, const std::string& dir);

// Writes `contents` to `path` atomically.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace frugal
