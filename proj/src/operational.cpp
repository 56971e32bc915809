#include "frugal/operational.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "frugal/error.hpp"

namespace frugal {

namespace {

std::vector<double> present_values(const Dataset& ds, std::size_t column) {
  std::vector<double> out;
  out.reserve(ds.size());
  for (const auto& row : ds.rows)
    if (!is_missing(row[column])) out.push_back(row[column]);
  return out;
}

void require_same_schema(const Dataset& a, const Dataset& b) {
  if (a.attributes != b.attributes)
    throw PreconditionError("attribute lists differ between " + a.label_text() + " and " + b.label_text());
}

}  // namespace

const AttributeChange* ChangeStats::find(const std::string& attribute) const {
  for (const AttributeChange& a : attributes)
    if (a.attribute == attribute) return &a;
  return nullptr;
}

std::string ChangeStats::to_csv() const {
  std::ostringstream os;
  os << "attribute,changed,total,percent\n";
  for (const AttributeChange& a : attributes) {
    char pct[32];
    std::snprintf(pct, sizeof pct, "%.2f", a.percent());
    os << a.attribute << ',' << a.changed << ',' << a.total << ',' << pct << '\n';
  }
  return os.str();
}

double attribute_a12(const Dataset& before, const Dataset& after, std::size_t column) {
  const std::vector<double> xs = present_values(after, column);
  const std::vector<double> ys = present_values(before, column);
  if (xs.empty() || ys.empty()) return 0.5;
  return a12(xs, ys);
}

ChangeStats change_frequency(std::span<const std::vector<Dataset>> version_sequences,
                             double threshold) {
  ChangeStats stats;
  auto slot = [&](const std::string& name) -> AttributeChange& {
    for (AttributeChange& a : stats.attributes)
      if (a.attribute == name) return a;
    stats.attributes.push_back({name, 0, 0});
    return stats.attributes.back();
  };
  for (const std::vector<Dataset>& seq : version_sequences) {
    if (seq.size() < 2)
      throw PreconditionError("change frequency needs at least 2 versions per project");
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
      require_same_schema(seq[i], seq[i + 1]);
      for (std::size_t c = 0; c < seq[i].width(); ++c) {
        AttributeChange& a = slot(seq[i].attributes[c]);
        ++a.total;
        if (a12_differs(attribute_a12(seq[i], seq[i + 1], c), threshold)) ++a.changed;
      }
    }
  }
  return stats;
}

std::vector<std::string> top_changed(const Dataset& before, const Dataset& after, double fraction) {
  require_same_schema(before, after);
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("attribute fraction must be in (0, 1]");

  struct Ranked {
    std::string name;
    double magnitude;
  };
  std::vector<Ranked> ranked;
  for (std::size_t c = 0; c < before.width(); ++c)
    ranked.push_back({before.attributes[c], std::abs(attribute_a12(before, after, c) - 0.5)});
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.magnitude != b.magnitude) return a.magnitude > b.magnitude;
    return a.name < b.name;
  });

  const double want = std::ceil(fraction * static_cast<double>(ranked.size()) - 1e-9);
  const std::size_t keep = std::min(ranked.size(), static_cast<std::size_t>(want));
  std::vector<std::string> out;
  for (std::size_t i = 0; i < keep; ++i) out.push_back(ranked[i].name);
  return out;
}

Dataset project(const Dataset& ds, std::span<const std::string> attributes) {
  std::vector<std::size_t> cols;
  for (const std::string& name : attributes) {
    auto c = ds.column(name);
    if (!c) throw PreconditionError("unknown attribute '" + name + "' in " + ds.label_text());
    cols.push_back(*c);
  }
  Dataset out = ds;
  out.attributes.assign(attributes.begin(), attributes.end());
  for (std::size_t r = 0; r < ds.size(); ++r) {
    std::vector<double> row;
    row.reserve(cols.size());
    for (std::size_t c : cols) row.push_back(ds.rows[r][c]);
    out.rows[r] = std::move(row);
  }
  return out;
}

}  // namespace frugal
