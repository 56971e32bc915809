#include "frugal/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "frugal/error.hpp"

namespace frugal {

namespace {

std::string trim(std::string_view s) {
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return std::string(s);
}

// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_record(std::string_view line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  out.push_back(trim(cell));
  return out;
}

bool is_missing_cell(const std::string& cell) { return cell.empty() || cell == "?"; }

std::optional<double> parse_number(const std::string& cell) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

LabelRule LabelRule::days(double threshold, Direction dir) {
  if (!(threshold > 0.0)) throw PreconditionError("days threshold must be > 0");
  LabelRule r;
  r.kind = Kind::kDaysThreshold;
  r.threshold_days = threshold;
  r.direction = dir;
  return r;
}

LabelRule LabelRule::parse(const std::string& text) {
  if (text == "bug" || text == "bug-count") return bug_count();
  std::string_view s = text;
  Direction dir;
  if (s.starts_with("<")) {
    dir = Direction::kLessThan;
    s.remove_prefix(1);
  } else if (s.starts_with(">")) {
    dir = Direction::kGreaterThan;
    s.remove_prefix(1);
  } else if (s.starts_with("lt")) {
    dir = Direction::kLessThan;
    s.remove_prefix(2);
  } else if (s.starts_with("gt")) {
    dir = Direction::kGreaterThan;
    s.remove_prefix(2);
  } else {
    throw ParseError("unknown label rule '" + text + "'");
  }
  auto v = parse_number(std::string(s));
  if (!v) throw ParseError("bad threshold in label rule '" + text + "'");
  return days(*v, dir);
}

std::string LabelRule::to_string() const {
  if (kind == Kind::kBugCount) return "bug";
  std::ostringstream os;
  os << (direction == Direction::kLessThan ? '<' : '>') << threshold_days;
  return os.str();
}

std::optional<std::size_t> Dataset::column(const std::string& attribute) const {
  auto it = std::find(attributes.begin(), attributes.end(), attribute);
  if (it == attributes.end()) return std::nullopt;
  return static_cast<std::size_t>(it - attributes.begin());
}

std::string Dataset::label_text() const {
  return version.empty() ? name : name + "-" + version;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.name = name;
  out.version = version;
  out.attributes = attributes;
  out.binary = binary;
  out.id_columns = id_columns;
  out.rows.reserve(indices.size());
  out.labels.reserve(indices.size());
  if (effort) out.effort.emplace();
  for (std::size_t i : indices) {
    out.rows.push_back(rows.at(i));
    out.labels.push_back(labels.at(i));
    if (effort) out.effort->push_back((*effort)[i]);
    if (!ids.empty()) out.ids.push_back(ids[i]);
  }
  return out;
}

void Dataset::validate() const {
  if (labels.size() != rows.size())
    throw PreconditionError(label_text() + ": label count differs from row count");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != attributes.size())
      throw PreconditionError(label_text() + ": row " + std::to_string(i) +
                              " has the wrong number of values");
  }
  if (binary) {
    for (double l : labels)
      if (l != 0.0 && l != 1.0)
        throw PreconditionError(label_text() + ": binary labels must be 0 or 1");
  }
  if (effort) {
    if (effort->size() != rows.size())
      throw PreconditionError(label_text() + ": effort count differs from row count");
    for (double e : *effort)
      if (!(e > 0.0)) throw PreconditionError(label_text() + ": effort values must be > 0");
  }
}

Dataset parse_csv(const std::string& text, const CsvOptions& options) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("CSV has no header row");
  if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
  const std::vector<std::string> header = split_record(line);

  enum class Role { kAttribute, kLabel, kEffort, kIdentifier };
  std::vector<Role> roles(header.size(), Role::kAttribute);
  std::optional<std::size_t> label_col, effort_col;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == options.label_column && !label_col) {
      roles[c] = Role::kLabel;
      label_col = c;
    } else if (options.effort_column && header[c] == *options.effort_column && !effort_col) {
      roles[c] = Role::kEffort;
      effort_col = c;
    } else if (std::find(options.exclude.begin(), options.exclude.end(), header[c]) !=
               options.exclude.end()) {
      roles[c] = Role::kIdentifier;
    }
  }
  if (!label_col) throw ParseError("label column '" + options.label_column + "' not in header");
  if (options.effort_column && !effort_col)
    throw ParseError("effort column '" + *options.effort_column + "' not in header");

  Dataset ds;
  ds.name = options.name;
  ds.version = options.version;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (roles[c] == Role::kAttribute) ds.attributes.push_back(header[c]);
    if (roles[c] == Role::kIdentifier) ds.id_columns.push_back(header[c]);
  }
  if (effort_col) ds.effort.emplace();

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_record(line);
    if (cells.size() != header.size()) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " cells, found " +
                       std::to_string(cells.size()));
    }
    auto bad_cell = [&](std::size_t c) {
      return ParseError("line " + std::to_string(line_no) + ", column '" + header[c] +
                        "': cannot parse '" + cells[c] + "' as a number");
    };
    std::vector<double> values;
    values.reserve(ds.attributes.size());
    std::vector<std::string> id_values;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      switch (roles[c]) {
        case Role::kIdentifier:
          id_values.push_back(cells[c]);
          break;
        case Role::kAttribute: {
          if (is_missing_cell(cells[c])) {
            values.push_back(kMissing);
          } else if (auto v = parse_number(cells[c])) {
            values.push_back(*v);
          } else {
            throw bad_cell(c);
          }
          break;
        }
        case Role::kLabel: {
          auto v = parse_number(cells[c]);
          if (!v) throw bad_cell(c);
          ds.labels.push_back(*v);
          break;
        }
        case Role::kEffort: {
          auto v = parse_number(cells[c]);
          if (!v) throw bad_cell(c);
          if (!(*v > 0.0) && options.effort_floor) *v = *options.effort_floor;
          if (!(*v > 0.0)) {
            throw ParseError("line " + std::to_string(line_no) + ", column '" + header[c] +
                             "': effort must be > 0");
          }
          ds.effort->push_back(*v);
          break;
        }
      }
    }
    ds.rows.push_back(std::move(values));
    if (!ds.id_columns.empty()) ds.ids.push_back(std::move(id_values));
  }
  return ds;
}

Dataset load_csv(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();

  CsvOptions opts = options;
  const std::string stem = std::filesystem::path(path).stem().string();
  if (opts.name.empty()) {
    auto dash = stem.rfind('-');
    opts.name = dash == std::string::npos ? stem : stem.substr(0, dash);
    if (opts.version.empty() && dash != std::string::npos) opts.version = stem.substr(dash + 1);
  }
  try {
    return parse_csv(buf.str(), opts);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

Dataset binarize(const Dataset& ds, const LabelRule& rule) {
  if (ds.binary)
    throw PreconditionError(ds.label_text() + ": labels are already binary, not raw numeric");
  if (rule.kind == LabelRule::Kind::kDaysThreshold && !(rule.threshold_days > 0.0))
    throw PreconditionError("days threshold must be > 0");
  Dataset out = ds;
  for (double& l : out.labels) {
    if (is_missing(l)) throw PreconditionError(ds.label_text() + ": missing label");
    bool positive = false;
    switch (rule.kind) {
      case LabelRule::Kind::kBugCount:
        positive = l > 0.0;
        break;
      case LabelRule::Kind::kDaysThreshold:
        positive = rule.direction == LabelRule::Direction::kLessThan ? l < rule.threshold_days
                                                                    : l > rule.threshold_days;
        break;
    }
    l = positive ? 1.0 : 0.0;
  }
  out.binary = true;
  return out;
}

Dataset merge(std::span<const Dataset> versions) {
  if (versions.empty()) throw PreconditionError("merge needs at least one dataset");
  const Dataset& first = versions.front();
  Dataset out;
  out.name = first.name;
  out.attributes = first.attributes;
  out.binary = first.binary;
  out.id_columns = first.id_columns;
  bool all_effort = true;
  for (const Dataset& v : versions) {
    if (v.attributes != first.attributes)
      throw PreconditionError("merge: attribute lists differ between " + first.label_text() +
                              " and " + v.label_text());
    if (v.binary != first.binary)
      throw PreconditionError("merge: cannot mix raw and binary labels");
    all_effort = all_effort && v.has_effort();
  }
  std::string lineage;
  for (const Dataset& v : versions) {
    if (!lineage.empty()) lineage += "+";
    lineage += v.version;
  }
  out.version = lineage;
  if (all_effort) out.effort.emplace();
  for (const Dataset& v : versions) {
    out.rows.insert(out.rows.end(), v.rows.begin(), v.rows.end());
    out.labels.insert(out.labels.end(), v.labels.begin(), v.labels.end());
    if (all_effort) out.effort->insert(out.effort->end(), v.effort->begin(), v.effort->end());
    if (v.id_columns == out.id_columns)
      out.ids.insert(out.ids.end(), v.ids.begin(), v.ids.end());
  }
  if (out.ids.size() != out.rows.size()) out.ids.clear();
  return out;
}

}  // namespace frugal
