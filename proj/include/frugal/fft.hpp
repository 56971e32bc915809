#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "frugal/dataset.hpp"
#include "frugal/metrics.hpp"

namespace frugal {

// A single-attribute predicate `attribute <= cut` or `attribute > cut`.
// Missing values never match.
struct Range {
  enum class Op { kLessEqual, kGreater };

  std::string attribute;
  Op op = Op::kLessEqual;
  double cut = 0.0;
  // Column of `attribute` in the schema the range is bound to.
  std::size_t column = 0;

  bool matches(double value) const {
    if (is_missing(value)) return false;
    return op == Op::kLessEqual ? value <= cut : value > cut;
  }
  bool matches(std::span<const double> row) const { return matches(row[column]); }

  std::string display() const;  // "rfc > 32"
  bool operator==(const Range&) const = default;
};

std::string op_symbol(Range::Op op);
std::string format_number(double v);

// Per-level exit choice: true exits toward the target class.
struct ExitPolicy {
  std::vector<bool> bits;

  static ExitPolicy from_index(std::uint32_t index, int depth);
  // Parses the (d+1)-digit label; the last digit must oppose the one before.
  static ExitPolicy parse(const std::string& digits);

  int depth() const { return static_cast<int>(bits.size()); }
  std::uint32_t index() const;
  bool final_class() const { return !bits.back(); }
  // The (d+1)-digit label such as "01110".
  std::string to_string() const;
  bool operator==(const ExitPolicy&) const = default;
};

struct FFTNode {
  Range range;
  bool exit_class = false;
  std::size_t support = 0;
  bool operator==(const FFTNode&) const = default;
};

struct FFTLeaf {
  bool exit_class = false;
  std::size_t support = 0;
  bool operator==(const FFTLeaf&) const = default;
};

// A fast-and-frugal tree: a decision list of `nodes` followed by a default
// leaf. A tree whose rows ran out early holds fewer nodes than its depth.
struct FFTree {
  int depth = 0;
  ExitPolicy policy;
  std::vector<FFTNode> nodes;
  FFTLeaf final_leaf;
  double train_score = std::numeric_limits<double>::quiet_NaN();
  ScoreFunction score;
  // Schema the node columns index into.
  std::vector<std::string> attributes;

  bool truncated() const { return static_cast<int>(nodes.size()) < depth; }
  std::string policy_string() const { return policy.to_string(); }
  // Index of the first matching node, or nodes.size() for the final leaf.
  std::size_t exit_index(std::span<const double> row) const;
};

// Median split of `column` over the non-missing values of `rows`:
// {<= median, > median}. Empty when every value is missing.
std::vector<Range> discretize(const Dataset& ds, std::span<const std::size_t> rows,
                              std::size_t column);

// Scores the local classifier "exit_class if the range matches, else its
// negation" on `rows`, with the true class as target.
double score_range(const Dataset& ds, std::span<const std::size_t> rows, const Range& range,
                   bool exit_class, const ScoreFunction& fn);

FFTree build_tree(const Dataset& train, const ExitPolicy& policy, const ScoreFunction& fn);

struct GrowResult {
  FFTree best;
  std::vector<FFTree> all;  // indexed by policy index
};

// Builds all 2^depth trees and keeps the best one on the training data.
GrowResult grow(const Dataset& train, int depth = 4,
                const ScoreFunction& fn = ScoreFunction::dis2heaven());

bool predict(const FFTree& tree, std::span<const double> row);
std::vector<bool> predict_all(const FFTree& tree, const Dataset& ds);

// Inspection priority of a row's exit: true exits in tree order first, then
// false exits in reverse order. Larger means inspect earlier.
double exit_priority(const FFTree& tree, std::size_t exit_index);

// Row indices ordered for effort-aware inspection; ties by ascending effort.
std::vector<std::size_t> rank_for_popt(const FFTree& tree, const Dataset& ds);

// Applies `fn` to the tree's predictions on `ds`.
double score_tree(const FFTree& tree, const Dataset& ds, const ScoreFunction& fn);

// Remaps node columns onto a different schema. Throws PreconditionError when
// a referenced attribute is absent.
FFTree rebind(const FFTree& tree, const std::vector<std::string>& attributes);

// Table-style text: "if a <= 1 then false", "else if ...", "else true".
std::string render(const FFTree& tree);
// Inverse of render; supports and scores are not recovered. Columns bind to
// attributes in order of first appearance.
FFTree parse_tree(const std::string& text);

std::string tree_to_json(const FFTree& tree);
FFTree tree_from_json(const std::string& text);

// One-vs-rest trees over raw (multi-valued) labels.
struct MultiClassFFT {
  std::vector<double> classes;
  std::vector<FFTree> trees;
};

MultiClassFFT grow_multi(const Dataset& train, int depth = 4,
                         const ScoreFunction& fn = ScoreFunction::dis2heaven());
double predict_multi(const MultiClassFFT& model, std::span<const double> row);

}  // namespace frugal
