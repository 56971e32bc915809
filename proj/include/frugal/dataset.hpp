#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace frugal {

// Marker for an absent numeric cell.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

// Rule turning a raw numeric label into a boolean class.
struct LabelRule {
  enum class Kind { kBugCount, kDaysThreshold };
  enum class Direction { kLessThan, kGreaterThan };

  Kind kind = Kind::kBugCount;
  double threshold_days = 0.0;
  Direction direction = Direction::kLessThan;

  static LabelRule bug_count() { return {}; }
  static LabelRule days(double threshold, Direction dir);

  // Parses "bug", "<30", ">365" (also "lt30" / "gt365").
  static LabelRule parse(const std::string& text);
  std::string to_string() const;
};

// A named table of numeric attributes with a label column and an optional
// effort column. Rows are stored row-major; absent cells hold kMissing.
struct Dataset {
  std::string name;
  std::string version;
  std::vector<std::string> attributes;
  std::vector<std::vector<double>> rows;
  // Raw numeric labels before binarize(); exactly 0.0 / 1.0 afterwards.
  std::vector<double> labels;
  bool binary = false;
  std::optional<std::vector<double>> effort;
  // Non-attribute identifier columns (class name, version string, ...).
  std::vector<std::string> id_columns;
  std::vector<std::vector<std::string>> ids;

  std::size_t size() const { return rows.size(); }
  std::size_t width() const { return attributes.size(); }
  bool has_effort() const { return effort.has_value(); }

  bool label(std::size_t i) const { return labels[i] != 0.0; }
  std::span<const double> row(std::size_t i) const { return rows[i]; }

  // Index of a named attribute, or nullopt.
  std::optional<std::size_t> column(const std::string& attribute) const;

  // "name-version" when a version is set, else the name.
  std::string label_text() const;

  // Rows selected by index, preserving the given order.
  Dataset subset(std::span<const std::size_t> indices) const;

  // Throws PreconditionError if an invariant is broken.
  void validate() const;
};

struct CsvOptions {
  std::string label_column = "bug";
  std::optional<std::string> effort_column;
  // When set, effort values at or below zero are raised to this floor
  // instead of being rejected (some public defect tables carry loc = 0).
  std::optional<double> effort_floor;
  // Columns never treated as attributes.
  std::vector<std::string> exclude = {"name", "version"};
  std::string name;     // defaults to the file stem
  std::string version;  // defaults to the text after the last '-' of the stem
};

// Loads a comma-separated file with a header row. "?" and empty cells are
// missing. Throws ParseError naming the row and column of any bad cell.
Dataset load_csv(const std::string& path, const CsvOptions& options = {});
Dataset parse_csv(const std::string& text, const CsvOptions& options);

// Turns raw labels into booleans. Rejects already-binary datasets.
Dataset binarize(const Dataset& ds, const LabelRule& rule);

// Concatenates rows in order. All inputs must share the attribute list.
Dataset merge(std::span<const Dataset> versions);

}  // namespace frugal
