#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "frugal/dataset.hpp"
#include "frugal/metrics.hpp"

namespace frugal {

// How often each attribute's distribution shifted between adjacent versions.
struct AttributeChange {
  std::string attribute;
  std::size_t changed = 0;
  std::size_t total = 0;
  double percent() const { return total == 0 ? 0.0 : 100.0 * static_cast<double>(changed) / static_cast<double>(total); }
};

struct ChangeStats {
  std::vector<AttributeChange> attributes;  // first-seen order

  const AttributeChange* find(const std::string& attribute) const;
  std::string to_csv() const;  // attribute,changed,total,percent
};

// A12 effect of attribute values between two versions, non-missing values
// only. Returns 0.5 when either side has no values.
double attribute_a12(const Dataset& before, const Dataset& after, std::size_t column);

// For each adjacent pair (i, i+1) of every sequence, counts the attributes
// whose A12 clears the small-effect threshold.
ChangeStats change_frequency(std::span<const std::vector<Dataset>> version_sequences,
                             double threshold = kSmallEffect);

// The ceil(fraction * width) attributes with the largest |a12 - 0.5|
// between two versions, ties by name.
std::vector<std::string> top_changed(const Dataset& before, const Dataset& after,
                                     double fraction = 0.25);

// Restricts columns to `attributes`, in the given order.
Dataset project(const Dataset& ds, std::span<const std::string> attributes);

}  // namespace frugal
