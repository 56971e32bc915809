#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace frugal {

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  void add(bool actual, bool predicted);
  bool operator==(const Confusion&) const = default;
};

// Builds the confusion matrix of paired actual/predicted classes.
Confusion confusion(std::span<const bool> actual, std::span<const bool> predicted);

// What recall (or FAR) returns when its denominator is zero.
enum class EmptyClass {
  kPerfect,  // recall = 1 / FAR = 0 when nothing was missed
  kZero,     // recall = 0 / FAR = 0
  kThrow,
};

double recall(const Confusion& c, EmptyClass convention = EmptyClass::kPerfect);
double far(const Confusion& c, EmptyClass convention = EmptyClass::kPerfect);

// Normalized distance from (recall, far) to the ideal point (1, 0).
double dis2heaven(double recall, double far);
double dis2heaven(const Confusion& c, EmptyClass convention = EmptyClass::kPerfect);

enum class ScoreKind { kDis2heaven, kPopt };

// A scoring objective together with its orientation.
struct ScoreFunction {
  ScoreKind kind = ScoreKind::kDis2heaven;

  static ScoreFunction dis2heaven() { return {ScoreKind::kDis2heaven}; }
  static ScoreFunction popt() { return {ScoreKind::kPopt}; }

  bool lower_is_better() const { return kind == ScoreKind::kDis2heaven; }
  // Strictly better.
  bool better(double a, double b) const { return lower_is_better() ? a < b : a > b; }
  // The value every real score beats or ties.
  double worst() const { return lower_is_better() ? 1.0 : 0.0; }
  bool needs_effort() const { return kind == ScoreKind::kPopt; }

  std::string name() const;  // "d2h" / "popt"
  static ScoreFunction parse(const std::string& text);
  bool operator==(const ScoreFunction&) const = default;
};

struct EffortCurvePoint {
  double effort_fraction = 0.0;
  double defects_fraction = 0.0;
};

// One inspected module: its actual defect weight (0/1 flag or a count) and
// its inspection effort (> 0).
struct EffortRow {
  double defects = 0.0;
  double effort = 1.0;
};

// Cumulative lift curve of rows inspected in the given order. Starts at
// (0,0) and ends at (1,1) whenever the rows contain at least one defect.
std::vector<EffortCurvePoint> effort_curve(std::span<const EffortRow> ordered);

// Trapezoid-rule area under a curve.
double curve_area(std::span<const EffortCurvePoint> curve);

// Orders by defect density (defects / effort), descending for the optimal
// model and ascending for the worst. Equal densities keep ascending effort.
std::vector<EffortRow> optimal_order(std::span<const EffortRow> rows);
std::vector<EffortRow> worst_order(std::span<const EffortRow> rows);

struct PoptResult {
  double value = 0.5;
  // True when the rows carry no defects (or every ordering has the same
  // area), so the ratio is undefined and value is fixed at 0.5.
  bool degenerate = false;
};

// Effort-aware Popt of a predicted inspection order:
//   1 - (S(optimal) - S(predicted)) / (S(optimal) - S(worst)), clamped to [0,1].
PoptResult popt(std::span<const EffortRow> predicted_order);

// Fraction of all defects found after inspecting the first `budget`
// fraction of total effort, interpolated along the lift curve.
double recall_at_effort(std::span<const EffortRow> predicted_order, double budget = 0.2);

// Orders rows by descending priority; equal priorities by ascending effort,
// then by original index.
std::vector<std::size_t> order_by_priority(std::span<const double> priority,
                                           std::span<const double> effort);

// Vargha-Delaney A12: P(x > y) + 0.5 P(x == y) for random x in xs, y in ys.
double a12(std::span<const double> xs, std::span<const double> ys);

// True when |a12 - 0.5| reaches the small-effect threshold.
inline constexpr double kSmallEffect = 0.06;
bool a12_differs(double a12_value, double threshold = kSmallEffect);

struct MannWhitney {
  bool different = false;
  double u = 0.0;  // U statistic of xs: #(x > y) + 0.5 #(x == y)
  double z = 0.0;
  double p = 1.0;
};

// Two-sided rank-sum test, normal approximation with tie and continuity
// corrections. Both samples need at least three values.
MannWhitney mann_whitney(std::span<const double> xs, std::span<const double> ys,
                         double alpha = 0.05);

double median(std::vector<double> values);

}  // namespace frugal
