#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "frugal/dataset.hpp"

namespace fixtures {

inline frugal::Dataset make(std::vector<std::string> attrs, std::vector<std::vector<double>> rows,
                            std::vector<double> labels, std::vector<double> effort = {},
                            std::string name = "fixture", std::string version = "1") {
  frugal::Dataset ds;
  ds.name = std::move(name);
  ds.version = std::move(version);
  ds.attributes = std::move(attrs);
  ds.rows = std::move(rows);
  ds.labels = std::move(labels);
  ds.binary = true;
  if (!effort.empty()) ds.effort = std::move(effort);
  return ds;
}

// b <= 3.5 selects rows 1, 3, 4.
inline frugal::Dataset six() {
  return make({"a", "b"}, {{1, 5}, {2, 3}, {3, 6}, {4, 1}, {5, 2}, {6, 4}}, {0, 0, 1, 0, 1, 1});
}

inline frugal::Dataset eight() {
  return make({"x", "y", "z"},
              {{1, 3, 0}, {2, 1, 0}, {3, 4, 1}, {4, 1, 1}, {5, 5, 0}, {6, 9, 1}, {7, 2, 0}, {8, 6, 1}},
              {0, 0, 0, 1, 0, 1, 1, 1}, {10, 20, 15, 30, 25, 5, 40, 12});
}

inline frugal::Dataset twelve() {
  return make({"loc", "cbo", "rfc", "dam"},
              {{120, 4, 30, 0.0}, {340, 9, 55, 0.5}, {80, 2, 12, 1.0}, {500, 14, 80, 0.2},
               {60, 1, 9, 1.0}, {220, 7, 41, 0.0}, {410, 11, 60, 0.8}, {95, 3, 20, 0.6},
               {300, 6, 48, 0.1}, {150, 5, 25, 0.9}, {700, 15, 99, 0.3}, {45, 2, 14, 0.7}},
              {0, 1, 0, 1, 0, 0, 1, 0, 1, 0, 1, 0},
              {120, 340, 80, 500, 60, 220, 410, 95, 300, 150, 700, 45});
}

// Five rows, two features, used for gradient checks.
inline frugal::Dataset five() {
  return make({"u", "v"}, {{0.5, 2.0}, {1.5, -1.0}, {-0.3, 0.7}, {2.2, 1.1}, {-1.0, -0.4}}, {1, 0, 1, 1, 0},
              {10, 20, 30, 40, 100});
}

// Small integer values so medians and ties occur often; about 5% missing.
inline frugal::Dataset random(std::uint64_t seed, std::size_t n, std::size_t width, bool missing = true) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> value(0, 9);
  std::uniform_int_distribution<int> effort(1, 50);
  std::uniform_int_distribution<int> pct(0, 99);
  std::vector<std::string> attrs;
  for (std::size_t c = 0; c < width; ++c) attrs.push_back("m" + std::to_string(c));
  std::vector<std::vector<double>> rows(n, std::vector<double>(width));
  std::vector<double> labels(n), eff(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < width; ++c)
      rows[i][c] = (missing && pct(rng) < 5) ? frugal::kMissing : value(rng);
    // Label loosely tied to the first column so trees have signal.
    const double first = frugal::is_missing(rows[i][0]) ? 5 : rows[i][0];
    labels[i] = (first + value(rng)) > 10 ? 1.0 : 0.0;
    eff[i] = effort(rng);
  }
  if (n >= 2) {
    labels[0] = 1.0;
    labels[1] = 0.0;
  }
  return make(attrs, rows, labels, eff, "rand" + std::to_string(seed), "1");
}

// All fixtures with at most 32 rows.
inline std::vector<frugal::Dataset> corpus() {
  std::vector<frugal::Dataset> out = {six(), eight(), twelve(), five()};
  out[0].effort = std::vector<double>{3, 1, 4, 1, 5, 9};
  for (std::uint64_t s = 1; s <= 12; ++s) out.push_back(random(s, 8 + (s * 7) % 25, 2 + s % 4));
  return out;
}

}  // namespace fixtures

#include "oracle.hpp"

namespace fixtures {

inline oracle::Table to_table(const frugal::Dataset& ds) {
  oracle::Table t;
  t.attrs = ds.attributes;
  t.rows = ds.rows;
  for (double l : ds.labels) t.labels.push_back(l != 0.0);
  if (ds.effort) t.effort = *ds.effort;
  return t;
}

}  // namespace fixtures
