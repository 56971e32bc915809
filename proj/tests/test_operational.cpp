#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "frugal/error.hpp"
#include "frugal/operational.hpp"
#include "oracle.hpp"

using namespace frugal;

namespace {

Dataset shifted(const Dataset& ds, std::size_t column, double by) {
  Dataset out = ds;
  for (auto& row : out.rows) row[column] += by;
  return out;
}

std::vector<double> column_values(const Dataset& ds, std::size_t c) {
  std::vector<double> out;
  for (const auto& row : ds.rows)
    if (!is_missing(row[c])) out.push_back(row[c]);
  return out;
}

}  // namespace

TEST_SUITE("operational") {

TEST_CASE("attribute_a12 against pairwise enumeration") {
  const Dataset a = fixtures::random(21, 12, 4), b = fixtures::random(22, 11, 4);
  for (std::size_t c = 0; c < 4; ++c)
    CHECK(attribute_a12(a, b, c) == oracle::pairwise_a12(column_values(b, c), column_values(a, c)));
  Dataset blank = a;
  for (auto& row : blank.rows) row[0] = kMissing;
  CHECK(attribute_a12(blank, b, 0) == 0.5);
}

TEST_CASE("identical versions never change") {
  const Dataset v = fixtures::twelve();
  const std::vector<std::vector<Dataset>> seqs = {{v, v, v}};
  const ChangeStats s = change_frequency(seqs);
  REQUIRE(s.attributes.size() == 4);
  for (const auto& a : s.attributes) {
    CHECK(a.total == 2);
    CHECK(a.percent() == 0.0);
  }
}

TEST_CASE("a column shifted past all overlap changes every time") {
  const Dataset v = fixtures::twelve();
  const std::vector<std::vector<Dataset>> seqs = {{v, shifted(v, 1, 1000), shifted(v, 1, 2000)},
                                                  {v, shifted(v, 1, -1000)}};
  const ChangeStats s = change_frequency(seqs);
  CHECK(s.find("cbo")->changed == 3);
  CHECK(s.find("cbo")->total == 3);
  CHECK(s.find("cbo")->percent() == 100.0);
  CHECK(s.find("loc")->changed == 0);
  CHECK(s.find("nope") == nullptr);
  CHECK(s.to_csv().starts_with("attribute,changed,total,percent\nloc,0,3,0.00\ncbo,3,3,100.00\n"));
}

TEST_CASE("top_changed ranks the moved attribute first") {
  const Dataset v = fixtures::twelve();
  const Dataset w = shifted(v, 2, 50);
  CHECK(top_changed(v, w, 0.25) == std::vector<std::string>{"rfc"});
  const auto all = top_changed(v, w, 1.0);
  CHECK(all.size() == 4);
  CHECK(all[0] == "rfc");
  // Unmoved attributes tie at 0.5 and fall back to name order.
  CHECK(std::vector<std::string>(all.begin() + 1, all.end()) == std::vector<std::string>{"cbo", "dam", "loc"});
  CHECK_THROWS_AS(top_changed(v, w, 0.0), ConfigError);
  CHECK_THROWS_AS(top_changed(v, w, 1.5), ConfigError);
}

TEST_CASE("ceil arithmetic on the kept count") {
  const Dataset a = fixtures::random(5, 10, 20), b = fixtures::random(6, 10, 20);
  CHECK(top_changed(a, b, 0.25).size() == 5);
  CHECK(top_changed(a, b, 0.26).size() == 6);
  CHECK(top_changed(fixtures::random(1, 10, 3), fixtures::random(2, 10, 3), 0.25).size() == 1);
}

TEST_CASE("project") {
  const Dataset ds = fixtures::twelve();
  CHECK(project(ds, ds.attributes).rows == ds.rows);
  const std::vector<std::string> one = {"rfc"};
  const Dataset p = project(ds, one);
  CHECK(p.width() == 1);
  CHECK(p.size() == ds.size());
  CHECK(p.rows[3][0] == 80);
  CHECK(p.labels == ds.labels);
  CHECK(p.effort == ds.effort);
  const std::vector<std::string> bad = {"wmc"};
  CHECK_THROWS_AS(project(ds, bad), PreconditionError);
  for (const Dataset& f : fixtures::corpus()) CHECK(project(f, f.attributes).size() == f.size());
}

}
