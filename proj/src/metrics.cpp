#include "frugal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "frugal/error.hpp"

namespace frugal {

namespace {

// Average ranks (1-based) of the pooled values; ties share their mean rank.
// Also returns sum over tie groups of (t^3 - t).
std::vector<double> midranks(std::span<const double> pooled, double* tie_term) {
  const std::size_t n = pooled.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
  std::vector<double> ranks(n);
  double ties = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && pooled[idx[j + 1]] == pooled[idx[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = rank;
    const double t = static_cast<double>(j - i + 1);
    ties += t * t * t - t;
    i = j + 1;
  }
  if (tie_term) *tie_term = ties;
  return ranks;
}

// U statistic of xs from the rank sum.
double rank_sum_u(std::span<const double> xs, std::span<const double> ys, double* tie_term) {
  std::vector<double> pooled(xs.begin(), xs.end());
  pooled.insert(pooled.end(), ys.begin(), ys.end());
  const std::vector<double> ranks = midranks(pooled, tie_term);
  double r1 = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) r1 += ranks[i];
  const double n1 = static_cast<double>(xs.size());
  return r1 - n1 * (n1 + 1.0) / 2.0;
}

double density(const EffortRow& r) { return r.defects / r.effort; }

}  // namespace

void Confusion::add(bool actual, bool predicted) {
  if (actual) {
    predicted ? ++tp : ++fn;
  } else {
    predicted ? ++fp : ++tn;
  }
}

Confusion confusion(std::span<const bool> actual, std::span<const bool> predicted) {
  if (actual.size() != predicted.size())
    throw PreconditionError("confusion: actual and predicted lengths differ");
  Confusion c;
  for (std::size_t i = 0; i < actual.size(); ++i) c.add(actual[i], predicted[i]);
  return c;
}

double recall(const Confusion& c, EmptyClass convention) {
  if (c.tp + c.fn == 0) {
    switch (convention) {
      case EmptyClass::kPerfect: return 1.0;
      case EmptyClass::kZero: return 0.0;
      case EmptyClass::kThrow: throw PreconditionError("recall undefined: no actual positives");
    }
  }
  return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}

double far(const Confusion& c, EmptyClass convention) {
  if (c.fp + c.tn == 0) {
    if (convention == EmptyClass::kThrow)
      throw PreconditionError("false alarm rate undefined: no actual negatives");
    return 0.0;
  }
  return static_cast<double>(c.fp) / static_cast<double>(c.fp + c.tn);
}

double dis2heaven(double recall_value, double far_value) {
  const double miss = 1.0 - recall_value;
  return std::sqrt((miss * miss + far_value * far_value) / 2.0);
}

double dis2heaven(const Confusion& c, EmptyClass convention) {
  return dis2heaven(recall(c, convention), far(c, convention));
}

std::string ScoreFunction::name() const { return kind == ScoreKind::kDis2heaven ? "d2h" : "popt"; }

ScoreFunction ScoreFunction::parse(const std::string& text) {
  if (text == "d2h" || text == "dis2heaven") return dis2heaven();
  if (text == "popt" || text == "Popt") return popt();
  throw ConfigError("unknown score '" + text + "' (expected d2h or popt)");
}

std::vector<EffortCurvePoint> effort_curve(std::span<const EffortRow> ordered) {
  double total_effort = 0.0, total_defects = 0.0;
  for (const EffortRow& r : ordered) {
    if (!(r.effort > 0.0)) throw PreconditionError("effort values must be > 0");
    total_effort += r.effort;
    total_defects += r.defects;
  }
  std::vector<EffortCurvePoint> curve;
  curve.reserve(ordered.size() + 1);
  curve.push_back({0.0, 0.0});
  double effort = 0.0, defects = 0.0;
  for (const EffortRow& r : ordered) {
    effort += r.effort;
    defects += r.defects;
    curve.push_back({effort / total_effort, total_defects > 0.0 ? defects / total_defects : 0.0});
  }
  // Pin the end point against rounding drift.
  if (!ordered.empty()) curve.back() = {1.0, total_defects > 0.0 ? 1.0 : 0.0};
  return curve;
}

double curve_area(std::span<const EffortCurvePoint> curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const double dx = curve[i].effort_fraction - curve[i - 1].effort_fraction;
    area += dx * (curve[i].defects_fraction + curve[i - 1].defects_fraction) / 2.0;
  }
  return area;
}

std::vector<EffortRow> optimal_order(std::span<const EffortRow> rows) {
  std::vector<EffortRow> out(rows.begin(), rows.end());
  std::stable_sort(out.begin(), out.end(), [](const EffortRow& a, const EffortRow& b) {
    const double da = density(a), db = density(b);
    if (da != db) return da > db;
    return a.effort < b.effort;
  });
  return out;
}

std::vector<EffortRow> worst_order(std::span<const EffortRow> rows) {
  std::vector<EffortRow> out(rows.begin(), rows.end());
  std::stable_sort(out.begin(), out.end(), [](const EffortRow& a, const EffortRow& b) {
    const double da = density(a), db = density(b);
    if (da != db) return da < db;
    return a.effort < b.effort;
  });
  return out;
}

namespace {

// 2 * total_effort * total_defects * area under the curve. The normalizers
// cancel in Popt, and with integral efforts and defect counts every term is
// exact, so equal areas compare equal.
double scaled_area(std::span<const EffortRow> ordered) {
  double area = 0.0, before = 0.0;
  for (const EffortRow& r : ordered) {
    if (!(r.effort > 0.0)) throw PreconditionError("effort values must be > 0");
    area += r.effort * (2.0 * before + r.defects);
    before += r.defects;
  }
  return area;
}

}  // namespace

PoptResult popt(std::span<const EffortRow> predicted_order) {
  double total_defects = 0.0;
  for (const EffortRow& r : predicted_order) total_defects += r.defects;
  if (predicted_order.empty() || !(total_defects > 0.0)) return {0.5, true};

  const double s_model = scaled_area(predicted_order);
  const double s_opt = scaled_area(optimal_order(predicted_order));
  const double s_worst = scaled_area(worst_order(predicted_order));
  const double span = s_opt - s_worst;
  if (!(span > 1e-12 * s_opt)) return {0.5, true};
  // 1 - (opt - model) / (opt - worst)
  return {std::clamp((s_model - s_worst) / span, 0.0, 1.0), false};
}

double recall_at_effort(std::span<const EffortRow> predicted_order, double budget) {
  const std::vector<EffortCurvePoint> curve = effort_curve(predicted_order);
  if (curve.size() < 2) return 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const EffortCurvePoint& a = curve[i - 1];
    const EffortCurvePoint& b = curve[i];
    if (b.effort_fraction >= budget) {
      const double dx = b.effort_fraction - a.effort_fraction;
      const double t = dx > 0.0 ? (budget - a.effort_fraction) / dx : 1.0;
      return a.defects_fraction + t * (b.defects_fraction - a.defects_fraction);
    }
  }
  return curve.back().defects_fraction;
}

std::vector<std::size_t> order_by_priority(std::span<const double> priority,
                                           std::span<const double> effort) {
  if (priority.size() != effort.size())
    throw PreconditionError("order_by_priority: priority and effort lengths differ");
  std::vector<std::size_t> idx(priority.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (priority[a] != priority[b]) return priority[a] > priority[b];
    return effort[a] < effort[b];
  });
  return idx;
}

double a12(std::span<const double> xs, std::span<const double> ys) {
  if (xs.empty() || ys.empty()) throw PreconditionError("a12 needs two nonempty samples");
  const double u = rank_sum_u(xs, ys, nullptr);
  return u / (static_cast<double>(xs.size()) * static_cast<double>(ys.size()));
}

bool a12_differs(double a12_value, double threshold) {
  // The tolerance absorbs rounding of values like 0.56 - 0.5.
  return std::abs(a12_value - 0.5) >= threshold - 1e-12;
}

MannWhitney mann_whitney(std::span<const double> xs, std::span<const double> ys, double alpha) {
  if (xs.size() < 3 || ys.size() < 3)
    throw PreconditionError("Mann-Whitney test needs at least 3 values per sample");
  double ties = 0.0;
  MannWhitney out;
  out.u = rank_sum_u(xs, ys, &ties);

  const double n1 = static_cast<double>(xs.size());
  const double n2 = static_cast<double>(ys.size());
  const double n = n1 + n2;
  const double mean = n1 * n2 / 2.0;
  const double var = n1 * n2 / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
  if (!(var > 0.0)) return out;  // every value tied

  const double diff = std::abs(out.u - mean);
  out.z = std::max(diff - 0.5, 0.0) / std::sqrt(var);
  if (out.u < mean) out.z = -out.z;
  out.p = std::min(1.0, std::erfc(std::abs(out.z) / std::sqrt(2.0)));
  out.different = out.p < alpha;
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) throw PreconditionError("median of an empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

}  // namespace frugal
