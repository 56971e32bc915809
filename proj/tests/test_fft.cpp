#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "frugal/error.hpp"
#include "frugal/fft.hpp"
#include "oracle.hpp"

using namespace frugal;

namespace {

std::vector<std::size_t> all_rows(const Dataset& ds) {
  std::vector<std::size_t> out(ds.size());
  std::iota(out.begin(), out.end(), 0);
  return out;
}

Dataset one_column(std::vector<double> values) {
  std::vector<std::vector<double>> rows;
  std::vector<double> labels;
  for (std::size_t i = 0; i < values.size(); ++i) {
    rows.push_back({values[i]});
    labels.push_back(i % 2);
  }
  return fixtures::make({"x"}, rows, labels);
}

std::size_t line_count(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

FFTNode node(const std::string& attr, Range::Op op, double cut, bool cls, std::size_t column, std::size_t support = 0) {
  return {Range{attr, op, cut, column}, cls, support};
}

// The left-hand log4j tree, with "cob" read as cbo and "amc < 32.25" as <=.
const char* kLog4jTree =
    "if      cbo <= 4    then false     # 0\n"
    "else if rfc > 32    then true      # 1\n"
    "else if dam >  0    then true      # 1\n"
    "else if amc <= 32.25 then true     # 1\n"
    "else false                         # 0\n";

void check_same_as_oracle(const Dataset& ds, const FFTree& tree, const oracle::Tree& expected) {
  REQUIRE(tree.nodes.size() == expected.nodes.size());
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    CHECK(tree.nodes[i].range.column == expected.nodes[i].col);
    CHECK(tree.nodes[i].range.attribute == ds.attributes[expected.nodes[i].col]);
    CHECK((tree.nodes[i].range.op == Range::Op::kLessEqual) == expected.nodes[i].le);
    CHECK(tree.nodes[i].range.cut == expected.nodes[i].cut);
    CHECK(tree.nodes[i].exit_class == static_cast<bool>(expected.nodes[i].cls));
  }
  CHECK(tree.final_leaf.exit_class == static_cast<bool>(expected.leaf));
}

}  // namespace

TEST_SUITE("fft") {

TEST_CASE("exit policy encoding") {
  const ExitPolicy p = ExitPolicy::from_index(0b0111, 4);
  CHECK(p.bits == std::vector<bool>{false, true, true, true});
  CHECK(p.to_string() == "01110");
  CHECK(p.final_class() == false);
  CHECK(p.index() == 7);
  CHECK(ExitPolicy::parse("00001") == ExitPolicy::from_index(0, 4));
  CHECK(ExitPolicy::parse("01") == ExitPolicy::from_index(0, 1));
  CHECK_THROWS_AS(ExitPolicy::parse("00000"), ParseError);
  CHECK_THROWS_AS(ExitPolicy::parse("0"), ParseError);
  CHECK_THROWS_AS(ExitPolicy::parse("0x1"), ParseError);
  for (std::uint32_t i = 0; i < 16; ++i) {
    const ExitPolicy q = ExitPolicy::from_index(i, 4);
    CHECK(ExitPolicy::parse(q.to_string()) == q);
    CHECK(q.index() == i);
  }
}

TEST_CASE("discretize at the median") {
  const Dataset odd = one_column({1, 2, 3, 4, 5});
  auto r = discretize(odd, all_rows(odd), 0);
  REQUIRE(r.size() == 2);
  CHECK(r[0].display() == "x <= 3");
  CHECK(r[1].display() == "x > 3");

  const Dataset even = one_column({8, 2, 6, 4});
  r = discretize(even, all_rows(even), 0);
  CHECK(r[0].cut == oracle::median({8, 2, 6, 4}));
  CHECK(r[0].cut == 5.0);

  const Dataset flat = one_column({1, 1, 1, 1});
  r = discretize(flat, all_rows(flat), 0);
  CHECK(r[0].cut == 1.0);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < flat.size(); ++i) hits += r[1].matches(flat.row(i));
  CHECK(hits == 0);

  const Dataset gaps = one_column({kMissing, 3, kMissing, 1});
  r = discretize(gaps, all_rows(gaps), 0);
  CHECK(r[0].cut == 2.0);
  CHECK_FALSE(r[0].matches(kMissing));
  CHECK_FALSE(r[1].matches(kMissing));

  const Dataset none = one_column({kMissing, kMissing});
  CHECK(discretize(none, all_rows(none), 0).empty());
}

TEST_CASE("score_range") {
  const Dataset ds = fixtures::six();
  const auto rows = all_rows(ds);
  const auto d2h = ScoreFunction::dis2heaven();
  // a > 3 holds rows 3,4,5; labels 0,1,1. b <= 3.5 holds rows 1,3,4.
  const Range b_low{"b", Range::Op::kLessEqual, 3.5, 1};
  CHECK(score_range(ds, rows, b_low, true, d2h) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(score_range(ds, rows, b_low, true, d2h) ==
        oracle::d2h({0, 0, 1, 0, 1, 1}, {0, 1, 0, 1, 1, 0}));

  const Dataset sep = fixtures::make({"x"}, {{1}, {2}, {3}, {4}}, {0, 0, 1, 1});
  const Range high{"x", Range::Op::kGreater, 2.5, 0};
  const Range low{"x", Range::Op::kLessEqual, 2.5, 0};
  CHECK(score_range(sep, all_rows(sep), high, true, d2h) == 0.0);
  CHECK(score_range(sep, all_rows(sep), low, true, d2h) == 1.0);

  CHECK_THROWS_AS(score_range(ds, rows, b_low, true, ScoreFunction::popt()), UnsupportedScore);
  const Range nothing{"a", Range::Op::kGreater, 100, 0};
  CHECK_THROWS_AS(score_range(ds, rows, nothing, true, d2h), PreconditionError);
}

TEST_CASE("build_tree on separable data") {
  const Dataset sep = fixtures::make({"w", "x"}, {{5, 1}, {3, 2}, {4, 3}, {1, 4}}, {0, 0, 1, 1});
  const FFTree t = build_tree(sep, ExitPolicy::parse("10001"), ScoreFunction::dis2heaven());
  REQUIRE_FALSE(t.nodes.empty());
  CHECK(t.nodes[0].range.display() == "x > 2.5");
  CHECK(t.nodes[0].exit_class);
  CHECK(t.train_score == 0.0);
}

TEST_CASE("build_tree on single-class data") {
  const Dataset one = fixtures::make({"x"}, {{1}, {2}, {3}, {4}}, {1, 1, 1, 1});
  // Median cuts peel off half the rows per level; true exits at every level
  // cover them all.
  const FFTree t = build_tree(one, ExitPolicy::parse("11110"), ScoreFunction::dis2heaven());
  Confusion c;
  for (std::size_t i = 0; i < one.size(); ++i) c.add(true, predict(t, one.row(i)));
  CHECK(recall(c) == 1.0);
  CHECK(t.train_score == 0.0);
}

TEST_CASE("eight-row traces") {
  const Dataset ds = fixtures::eight();
  const auto d2h = ScoreFunction::dis2heaven();

  FFTree t = build_tree(ds, ExitPolicy::parse("10001"), d2h);
  std::ostringstream os;
  for (const auto& n : t.nodes) os << n.range.display() << ":" << n.exit_class << ":" << n.support << ";";
  CHECK(os.str() == "x > 4.5:1:4;x <= 2.5:0:2;x <= 3.5:0:1;x <= 4:0:1;");
  CHECK(t.final_leaf == FFTLeaf{true, 0});
  CHECK(t.train_score == 0.25);

  t = build_tree(ds, ExitPolicy::parse("01110"), d2h);
  os.str("");
  for (const auto& n : t.nodes) os << n.range.display() << ":" << n.exit_class << ":" << n.support << ";";
  CHECK(os.str() == "x <= 4.5:0:4;x > 6.5:1:2;x > 5.5:1:1;x <= 5:1:1;");
  CHECK(t.final_leaf == FFTLeaf{false, 0});
  CHECK(t.train_score == 0.25);

  CHECK(grow(ds, 1).best.policy_string() == "01");
  CHECK(grow(ds, 2).best.policy_string() == "001");
  CHECK(grow(ds, 3).best.policy_string() == "0101");
  CHECK(grow(ds, 4).best.policy_string() == "01010");
  CHECK(grow(ds, 4).best.train_score == 0.1767766952966369);
}

TEST_CASE("twelve-row grow picks the enumeration optimum") {
  const Dataset ds = fixtures::twelve();
  const GrowResult g = grow(ds, 4);
  CHECK(g.all.size() == 16);
  CHECK(g.best.policy_string() == "01101");
  CHECK(g.best.train_score == 0.0);
  CHECK(render(g.best) ==
        "if cbo <= 5.5 then false  # 0\n"
        "else if cbo > 10 then true  # 1\n"
        "else if cbo > 7 then true  # 1\n"
        "else if cbo > 6.5 then false  # 0\n"
        "else true  # 1\n");
  CHECK(grow(ds, 1).best.policy_string() == "01");
  CHECK(grow(ds, 1).best.train_score == 0.10101525445522107);
  CHECK(grow(ds, 1).all.size() == 2);
}

TEST_CASE("every policy matches the oracle node by node") {
  for (const Dataset& ds : fixtures::corpus()) {
    const oracle::Table table = fixtures::to_table(ds);
    for (int d = 1; d <= 3; ++d)
      for (std::uint32_t i = 0; i < (1u << d); ++i) {
        const ExitPolicy p = ExitPolicy::from_index(i, d);
        std::vector<int> bits(p.bits.begin(), p.bits.end());
        const oracle::Tree o = oracle::build(table, bits, false);
        const FFTree t = build_tree(ds, p, ScoreFunction::dis2heaven());
        CAPTURE(ds.name);
        CAPTURE(p.to_string());
        check_same_as_oracle(ds, t, o);
        CHECK(t.train_score == o.score);
      }
  }
}

TEST_CASE("popt trees match the oracle") {
  for (const Dataset& ds : fixtures::corpus()) {
    if (!ds.has_effort()) continue;
    const oracle::Table table = fixtures::to_table(ds);
    for (int d = 1; d <= 4; ++d) {
      const oracle::Best best = oracle::best_tree(table, d, true);
      const GrowResult g = grow(ds, d, ScoreFunction::popt());
      CAPTURE(ds.name);
      CAPTURE(d);
      CHECK(g.all.size() == best.trees);
      CHECK(g.best.train_score == best.score);
      CHECK(g.best.policy.index() == best.index);
    }
  }
}

TEST_CASE("tree invariants across the corpus") {
  for (const Dataset& ds : fixtures::corpus()) {
    for (const ScoreFunction& fn : {ScoreFunction::dis2heaven(), ScoreFunction::popt()}) {
      if (fn.needs_effort() && !ds.has_effort()) continue;
      const GrowResult g = grow(ds, 4, fn);
      REQUIRE(g.all.size() == 16);
      for (std::uint32_t i = 0; i < 16; ++i) {
        const FFTree& t = g.all[i];
        CHECK(t.policy.index() == i);
        CHECK(t.final_leaf.exit_class == !t.policy.bits.back());
        CHECK(t.nodes.size() <= 4);
        std::size_t total = t.final_leaf.support;
        for (const auto& n : t.nodes) total += n.support;
        CHECK(total == ds.size());
        // Each row exits exactly where the supports say.
        std::vector<std::size_t> seen(t.nodes.size() + 1, 0);
        for (std::size_t r = 0; r < ds.size(); ++r) ++seen[t.exit_index(ds.row(r))];
        for (std::size_t k = 0; k < t.nodes.size(); ++k) CHECK(seen[k] == t.nodes[k].support);
        CHECK(seen.back() == t.final_leaf.support);
        CHECK(line_count(render(t)) <= 5);
        CHECK_FALSE(fn.better(t.train_score, g.best.train_score));
      }
    }
  }
}

TEST_CASE("row order does not change the d2h tree") {
  std::mt19937_64 rng(3);
  for (const Dataset& ds : fixtures::corpus()) {
    std::vector<std::size_t> perm = all_rows(ds);
    std::shuffle(perm.begin(), perm.end(), rng);
    const FFTree a = grow(ds, 4).best;
    const FFTree b = grow(ds.subset(perm), 4).best;
    CHECK(render(a) == render(b));
    CHECK(a.train_score == b.train_score);
  }
}

TEST_CASE("truncation when rows run out or nothing is scoreable") {
  const Dataset flat = fixtures::make({"k"}, {{1}, {1}, {1}, {1}}, {0, 1, 0, 1});
  FFTree t = build_tree(flat, ExitPolicy::parse("11110"), ScoreFunction::dis2heaven());
  CHECK(t.nodes.size() == 1);
  CHECK(t.truncated());
  CHECK(t.final_leaf == FFTLeaf{false, 0});
  CHECK(t.policy_string() == "11110");

  const Dataset blank = fixtures::make({"m"}, {{kMissing}, {kMissing}, {kMissing}}, {0, 1, 0});
  t = build_tree(blank, ExitPolicy::parse("01"), ScoreFunction::dis2heaven());
  CHECK(t.nodes.empty());
  CHECK(t.final_leaf == FFTLeaf{true, 3});
  CHECK(render(t) == "else true  # 1\n");
  CHECK(tree_from_json(tree_to_json(t)).final_leaf == t.final_leaf);
}

TEST_CASE("preconditions") {
  const Dataset raw = parse_csv("a,bug\n1,0\n2,3\n", {});
  CHECK_THROWS_AS(grow(raw, 2), PreconditionError);
  const Dataset ds = fixtures::six();
  CHECK_THROWS_AS(grow(ds, 4, ScoreFunction::popt()), UnsupportedScore);
  CHECK_THROWS_AS(grow(ds, 0), PreconditionError);
  const Dataset single = fixtures::make({"a"}, {{1}}, {1});
  CHECK_THROWS_AS(grow(single, 2), PreconditionError);
}

TEST_CASE("predict with the parsed log4j tree") {
  const FFTree t = parse_tree(kLog4jTree);
  CHECK(t.attributes == std::vector<std::string>{"cbo", "rfc", "dam", "amc"});
  CHECK(t.policy_string() == "01110");
  const double nan = kMissing;
  const std::vector<double> low_cbo = {3, 0, 0, 0};
  const std::vector<double> busy = {10, 50, 0, 40};
  const std::vector<double> blank = {nan, nan, nan, nan};
  CHECK_FALSE(predict(t, low_cbo));
  CHECK(predict(t, busy));
  CHECK(t.exit_index(busy) == 1);
  CHECK(t.exit_index(blank) == 4);
  CHECK_FALSE(predict(t, blank));
}

TEST_CASE("render shapes and round trip") {
  const FFTree log4j = parse_tree(kLog4jTree);
  const std::string text = render(log4j);
  CHECK(line_count(text) == 5);
  CHECK(text.ends_with("else false  # 0\n"));
  CHECK(render(parse_tree(text)) == text);

  FFTree avoid;
  avoid.depth = 4;
  avoid.policy = ExitPolicy::parse("00001");
  avoid.attributes = {"dam", "noc", "wmc", "moa"};
  avoid.nodes = {node("dam", Range::Op::kGreater, 0, false, 0), node("noc", Range::Op::kGreater, 0, false, 1),
                 node("wmc", Range::Op::kGreater, 5, false, 2), node("moa", Range::Op::kGreater, 0, false, 3)};
  avoid.final_leaf = {true, 0};
  const std::string rendered = render(avoid);
  CHECK(rendered ==
        "if dam > 0 then false  # 0\n"
        "else if noc > 0 then false  # 0\n"
        "else if wmc > 5 then false  # 0\n"
        "else if moa > 0 then false  # 0\n"
        "else true  # 1\n");
  CHECK(render(parse_tree(rendered)) == rendered);

  for (const Dataset& ds : fixtures::corpus())
    for (const FFTree& t : grow(ds, 4).all) {
      const std::string once = render(t);
      CHECK(render(parse_tree(once)) == once);
    }
}

TEST_CASE("parse errors carry line numbers") {
  auto message = [](const std::string& text) {
    try {
      parse_tree(text);
    } catch (const ParseError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("if a <= 1 then false\nelse if b ~ 2 then true\nelse false\n").starts_with("line 2"));
  CHECK(message("if a <= 1 then false\nelse maybe\n").starts_with("line 2"));
  CHECK(message("if a <= x then false\nelse true\n").starts_with("line 1"));
  CHECK(message("if a <= 1 then false\n").starts_with("line 2"));
  CHECK(message("if a < 4 then true\nelse false\n").starts_with("line 1"));
  CHECK(message("else true\nelse false\n").starts_with("line 2"));
}

TEST_CASE("json round trip") {
  const GrowResult g = grow(fixtures::twelve(), 4);
  for (const FFTree& t : g.all) {
    const FFTree back = tree_from_json(tree_to_json(t));
    CHECK(back.nodes == t.nodes);
    CHECK(back.final_leaf == t.final_leaf);
    CHECK(back.policy == t.policy);
    CHECK(back.depth == t.depth);
    CHECK(back.train_score == t.train_score);
    CHECK(tree_to_json(back) == tree_to_json(t));
  }
  CHECK_THROWS_AS(tree_from_json("{"), ParseError);
  CHECK_THROWS_AS(tree_from_json("{\"depth\": 2}"), ParseError);
}

TEST_CASE("rebind maps columns by name") {
  const FFTree t = parse_tree(kLog4jTree);
  const FFTree r = rebind(t, {"amc", "dam", "rfc", "cbo", "noc"});
  CHECK(r.nodes[0].range.column == 3);
  CHECK(r.nodes[3].range.column == 0);
  CHECK_THROWS_AS(rebind(t, {"cbo"}), PreconditionError);
}

TEST_CASE("rank_for_popt six-row hand trace") {
  Dataset ds = fixtures::six();
  ds.effort = std::vector<double>{3, 1, 4, 1, 5, 9};
  FFTree t;
  t.depth = 2;
  t.policy = ExitPolicy::parse("101");
  t.attributes = ds.attributes;
  t.nodes = {node("a", Range::Op::kGreater, 4, true, 0), node("b", Range::Op::kLessEqual, 3, false, 1)};
  t.final_leaf = {true, 0};
  // Buckets: node 0 (true), final leaf (true), node 1 (false).
  CHECK(exit_priority(t, 0) > exit_priority(t, 2));
  CHECK(exit_priority(t, 2) > exit_priority(t, 1));
  CHECK(rank_for_popt(t, ds) == std::vector<std::size_t>{4, 5, 0, 2, 1, 3});
}

TEST_CASE("rank_for_popt buckets") {
  Dataset ds = fixtures::make({"x"}, {{1}, {2}, {3}}, {1, 0, 1}, {30, 10, 20});
  FFTree t;
  t.depth = 1;
  t.policy = ExitPolicy::parse("10");
  t.attributes = {"x"};
  t.nodes = {node("x", Range::Op::kLessEqual, 5, true, 0)};
  t.final_leaf = {false, 0};
  CHECK(rank_for_popt(t, ds) == std::vector<std::size_t>{1, 2, 0});

  t.nodes[0].range.cut = 1.5;
  CHECK(rank_for_popt(t, ds) == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("multi-class selection") {
  auto tree_with = [](bool cls, std::size_t support) {
    FFTree t;
    t.depth = 1;
    t.policy.bits = {cls};
    t.attributes = {"x"};
    t.nodes = {node("x", Range::Op::kLessEqual, 100, cls, 0, support)};
    t.final_leaf = {!cls, 0};
    return t;
  };
  const std::vector<double> row = {1};
  MultiClassFFT m;
  m.classes = {1, 2};
  m.trees = {tree_with(false, 50), tree_with(true, 3)};
  CHECK(predict_multi(m, row) == 2);
  m.trees = {tree_with(false, 10), tree_with(false, 4)};
  CHECK(predict_multi(m, row) == 1);
  m.trees = {tree_with(false, 4), tree_with(false, 10)};
  CHECK(predict_multi(m, row) == 2);
  m.classes = {7};
  m.trees = {tree_with(false, 1)};
  CHECK(predict_multi(m, row) == 7);

  Dataset raw = fixtures::make({"x"}, {{1}, {2}, {3}, {10}, {11}, {12}, {20}, {21}, {22}}, {0, 0, 0, 1, 1, 1, 2, 2, 2});
  raw.binary = false;
  const MultiClassFFT grown = grow_multi(raw, 2);
  CHECK(grown.classes == std::vector<double>{0, 1, 2});
  std::size_t right = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) right += predict_multi(grown, raw.row(i)) == raw.labels[i];
  CHECK(right >= 7);
}

}
