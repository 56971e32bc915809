#include "frugal/fft.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "frugal/error.hpp"
#include "json.hpp"

namespace frugal {

namespace {

using Json = nlohmann::json;

constexpr int kMaxDepth = 16;

void require_trainable(const Dataset& train, const ScoreFunction& fn) {
  if (!train.binary) throw PreconditionError(train.label_text() + ": labels must be binarized");
  if (train.size() < 2) throw PreconditionError(train.label_text() + ": need at least 2 training rows");
  if (train.width() < 1) throw PreconditionError(train.label_text() + ": need at least 1 attribute");
  if (fn.needs_effort() && !train.has_effort())
    throw UnsupportedScore("Popt needs an effort column; " + train.label_text() + " has none");
}

// Popt of rows inspected by descending priority.
double popt_of(const Dataset& ds, std::span<const std::size_t> rows,
               std::span<const double> priority) {
  std::vector<double> effort(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) effort[i] = (*ds.effort)[rows[i]];
  const std::vector<std::size_t> order = order_by_priority(priority, effort);
  std::vector<EffortRow> ranked;
  ranked.reserve(rows.size());
  for (std::size_t k : order) ranked.push_back({ds.labels[rows[k]], effort[k]});
  return popt(ranked).value;
}

struct Candidate {
  Range range;
  double score = 0.0;
  std::size_t consumed = 0;
};

// True when a should be preferred over b: better score, then fewer rows
// consumed, then attribute name, then <= before >.
bool prefer(const Candidate& a, const Candidate& b, const ScoreFunction& fn) {
  if (fn.better(a.score, b.score)) return true;
  if (fn.better(b.score, a.score)) return false;
  if (a.consumed != b.consumed) return a.consumed < b.consumed;
  if (a.range.attribute != b.range.attribute) return a.range.attribute < b.range.attribute;
  return a.range.op == Range::Op::kLessEqual && b.range.op == Range::Op::kGreater;
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

bool parse_class(const std::string& token, std::size_t line_no) {
  if (token == "true") return true;
  if (token == "false") return false;
  throw ParseError("line " + std::to_string(line_no) + ": expected true or false, got '" + token + "'");
}

Json node_json(const Range& r, bool cls, std::size_t support) {
  return Json{{"attribute", r.attribute},
              {"op", op_symbol(r.op)},
              {"cut", r.cut},
              {"class", cls},
              {"support", support}};
}

Range::Op parse_op(const std::string& token) {
  if (token == "<=") return Range::Op::kLessEqual;
  if (token == ">") return Range::Op::kGreater;
  throw ParseError("unknown comparison '" + token + "' (expected <= or >)");
}

}  // namespace

std::string op_symbol(Range::Op op) { return op == Range::Op::kLessEqual ? "<=" : ">"; }

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string Range::display() const { return attribute + " " + op_symbol(op) + " " + format_number(cut); }

ExitPolicy ExitPolicy::from_index(std::uint32_t index, int depth) {
  if (depth < 1 || depth > kMaxDepth) throw PreconditionError("depth must be in [1, 16]");
  if (index >= (1u << depth)) throw PreconditionError("policy index out of range");
  ExitPolicy p;
  p.bits.resize(depth);
  for (int i = 0; i < depth; ++i) p.bits[i] = (index >> (depth - 1 - i)) & 1u;
  return p;
}

ExitPolicy ExitPolicy::parse(const std::string& digits) {
  ExitPolicy p;
  for (char c : digits) {
    if (c != '0' && c != '1') throw ParseError("exit policy '" + digits + "' must be 0/1 digits");
    p.bits.push_back(c == '1');
  }
  if (p.bits.size() < 2 || p.bits.back() == p.bits[p.bits.size() - 2])
    throw ParseError("exit policy '" + digits + "': expected d+1 digits ending in the forced opposite");
  p.bits.pop_back();
  return p;
}

std::uint32_t ExitPolicy::index() const {
  std::uint32_t out = 0;
  for (bool b : bits) out = (out << 1) | (b ? 1u : 0u);
  return out;
}

std::string ExitPolicy::to_string() const {
  std::string s;
  for (bool b : bits) s.push_back(b ? '1' : '0');
  if (!bits.empty()) s.push_back(final_class() ? '1' : '0');
  return s;
}

std::size_t FFTree::exit_index(std::span<const double> row) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].range.matches(row)) return i;
  return nodes.size();
}

std::vector<Range> discretize(const Dataset& ds, std::span<const std::size_t> rows,
                              std::size_t column) {
  std::vector<double> values;
  values.reserve(rows.size());
  for (std::size_t r : rows) {
    const double v = ds.rows[r][column];
    if (!is_missing(v)) values.push_back(v);
  }
  if (values.empty()) return {};
  const std::size_t n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  double cut = *mid;
  if (n % 2 == 0) {
    const double lower = *std::max_element(values.begin(), mid);
    cut = (lower + cut) / 2.0;
  }
  const std::string& name = ds.attributes[column];
  return {Range{name, Range::Op::kLessEqual, cut, column}, Range{name, Range::Op::kGreater, cut, column}};
}

double score_range(const Dataset& ds, std::span<const std::size_t> rows, const Range& range,
                   bool exit_class, const ScoreFunction& fn) {
  if (fn.needs_effort() && !ds.has_effort())
    throw UnsupportedScore("Popt needs an effort column; " + ds.label_text() + " has none");
  std::vector<double> priority(rows.size());
  Confusion c;
  std::size_t selected = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const bool hit = range.matches(ds.rows[rows[i]]);
    selected += hit;
    const bool predicted = hit ? exit_class : !exit_class;
    c.add(ds.label(rows[i]), predicted);
    priority[i] = predicted ? 1.0 : 0.0;
  }
  if (selected == 0) throw PreconditionError("range " + range.display() + " selects no rows");
  if (fn.kind == ScoreKind::kDis2heaven) return dis2heaven(c);
  return popt_of(ds, rows, priority);
}

FFTree build_tree(const Dataset& train, const ExitPolicy& policy, const ScoreFunction& fn) {
  require_trainable(train, fn);
  if (policy.bits.empty()) throw PreconditionError("exit policy must have at least one level");

  FFTree tree;
  tree.depth = policy.depth();
  tree.policy = policy;
  tree.score = fn;
  tree.attributes = train.attributes;

  std::vector<std::size_t> remaining(train.size());
  std::iota(remaining.begin(), remaining.end(), 0);

  for (int level = 0; level < tree.depth && !remaining.empty(); ++level) {
    const bool exit_class = policy.bits[level];
    bool found = false;
    Candidate best;
    for (std::size_t col = 0; col < train.width(); ++col) {
      for (const Range& range : discretize(train, remaining, col)) {
        std::size_t consumed = 0;
        for (std::size_t r : remaining) consumed += range.matches(train.rows[r]);
        if (consumed == 0) continue;
        Candidate cand{range, score_range(train, remaining, range, exit_class, fn), consumed};
        if (!found || prefer(cand, best, fn)) {
          best = std::move(cand);
          found = true;
        }
      }
    }
    if (!found) break;

    std::vector<std::size_t> rest;
    rest.reserve(remaining.size() - best.consumed);
    for (std::size_t r : remaining)
      if (!best.range.matches(train.rows[r])) rest.push_back(r);
    tree.nodes.push_back({best.range, exit_class, best.consumed});
    remaining = std::move(rest);
  }

  tree.final_leaf = {policy.final_class(), remaining.size()};
  tree.train_score = score_tree(tree, train, fn);
  return tree;
}

GrowResult grow(const Dataset& train, int depth, const ScoreFunction& fn) {
  if (depth < 1 || depth > kMaxDepth) throw PreconditionError("depth must be in [1, 16]");
  require_trainable(train, fn);
  GrowResult out;
  const std::uint32_t count = 1u << depth;
  out.all.reserve(count);
  std::size_t best = 0;
  for (std::uint32_t i = 0; i < count; ++i) {
    out.all.push_back(build_tree(train, ExitPolicy::from_index(i, depth), fn));
    // Ties keep the earlier policy.
    if (i > 0 && fn.better(out.all[i].train_score, out.all[best].train_score)) best = i;
  }
  out.best = out.all[best];
  return out;
}

bool predict(const FFTree& tree, std::span<const double> row) {
  const std::size_t i = tree.exit_index(row);
  return i < tree.nodes.size() ? tree.nodes[i].exit_class : tree.final_leaf.exit_class;
}

std::vector<bool> predict_all(const FFTree& tree, const Dataset& ds) {
  std::vector<bool> out(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) out[i] = predict(tree, ds.rows[i]);
  return out;
}

double exit_priority(const FFTree& tree, std::size_t exit_index) {
  const std::size_t exits = tree.nodes.size() + 1;
  auto cls = [&](std::size_t i) {
    return i < tree.nodes.size() ? tree.nodes[i].exit_class : tree.final_leaf.exit_class;
  };
  // Bucket position: true exits in order, then false exits in reverse.
  std::size_t position = 0;
  for (std::size_t i = 0; i < exits; ++i) {
    if (cls(i)) {
      if (i == exit_index) return -static_cast<double>(position);
      ++position;
    }
  }
  for (std::size_t i = exits; i-- > 0;) {
    if (!cls(i)) {
      if (i == exit_index) return -static_cast<double>(position);
      ++position;
    }
  }
  throw PreconditionError("exit index out of range");
}

std::vector<std::size_t> rank_for_popt(const FFTree& tree, const Dataset& ds) {
  if (!ds.has_effort()) throw UnsupportedScore("Popt ranking needs an effort column");
  std::vector<double> priority(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) priority[i] = exit_priority(tree, tree.exit_index(ds.rows[i]));
  return order_by_priority(priority, *ds.effort);
}

double score_tree(const FFTree& tree, const Dataset& ds, const ScoreFunction& fn) {
  if (fn.kind == ScoreKind::kDis2heaven) {
    Confusion c;
    for (std::size_t i = 0; i < ds.size(); ++i) c.add(ds.label(i), predict(tree, ds.rows[i]));
    return dis2heaven(c);
  }
  if (!ds.has_effort()) throw UnsupportedScore("Popt needs an effort column; " + ds.label_text() + " has none");
  std::vector<EffortRow> ranked;
  ranked.reserve(ds.size());
  for (std::size_t i : rank_for_popt(tree, ds)) ranked.push_back({ds.labels[i], (*ds.effort)[i]});
  return popt(ranked).value;
}

FFTree rebind(const FFTree& tree, const std::vector<std::string>& attributes) {
  FFTree out = tree;
  out.attributes = attributes;
  for (FFTNode& node : out.nodes) {
    auto it = std::find(attributes.begin(), attributes.end(), node.range.attribute);
    if (it == attributes.end())
      throw PreconditionError("model attribute '" + node.range.attribute + "' is not in the data");
    node.range.column = static_cast<std::size_t>(it - attributes.begin());
  }
  return out;
}

std::string render(const FFTree& tree) {
  std::ostringstream os;
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const FFTNode& n = tree.nodes[i];
    os << (i == 0 ? "if " : "else if ") << n.range.display() << " then "
       << (n.exit_class ? "true" : "false") << "  # " << (n.exit_class ? 1 : 0) << '\n';
  }
  const bool leaf = tree.final_leaf.exit_class;
  os << "else " << (leaf ? "true" : "false") << "  # " << (leaf ? 1 : 0) << '\n';
  return os.str();
}

FFTree parse_tree(const std::string& text) {
  FFTree tree;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  bool done = false;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw.substr(0, raw.find('#'));
    line = trim(line);
    if (line.empty()) continue;
    if (done) throw ParseError("line " + std::to_string(line_no) + ": text after the final else");

    std::istringstream words(line);
    std::vector<std::string> tok;
    for (std::string w; words >> w;) tok.push_back(w);

    std::size_t at = 0;
    if (tree.nodes.empty() && tok[0] == "if") {
      at = 1;
    } else if (tok.size() >= 2 && tok[0] == "else" && tok[1] == "if" && !tree.nodes.empty()) {
      at = 2;
    } else if (tok.size() == 2 && tok[0] == "else") {
      tree.final_leaf = {parse_class(tok[1], line_no), 0};
      done = true;
      continue;
    } else {
      throw ParseError("line " + std::to_string(line_no) + ": expected 'if', 'else if' or 'else'");
    }
    if (tok.size() != at + 5 || tok[at + 3] != "then")
      throw ParseError("line " + std::to_string(line_no) + ": expected '<attribute> <op> <number> then <class>'");
    Range r;
    r.attribute = tok[at];
    try {
      r.op = parse_op(tok[at + 1]);
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    const std::string& num = tok[at + 2];
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), r.cut);
    if (ec != std::errc() || ptr != num.data() + num.size() || !std::isfinite(r.cut))
      throw ParseError("line " + std::to_string(line_no) + ": bad cut '" + num + "'");
    auto it = std::find(tree.attributes.begin(), tree.attributes.end(), r.attribute);
    if (it == tree.attributes.end()) {
      tree.attributes.push_back(r.attribute);
      it = tree.attributes.end() - 1;
    }
    r.column = static_cast<std::size_t>(it - tree.attributes.begin());
    tree.nodes.push_back({r, parse_class(tok[at + 4], line_no), 0});
  }
  if (!done) throw ParseError("line " + std::to_string(line_no + 1) + ": missing final 'else <class>' line");
  for (const FFTNode& n : tree.nodes) tree.policy.bits.push_back(n.exit_class);
  tree.depth = static_cast<int>(tree.nodes.size());
  return tree;
}

std::string tree_to_json(const FFTree& tree) {
  Json nodes = Json::array();
  for (const FFTNode& n : tree.nodes) nodes.push_back(node_json(n.range, n.exit_class, n.support));
  Json j{{"depth", tree.depth},
         {"policy", tree.policy_string()},
         {"truncated", tree.truncated()},
         {"levels_used", tree.nodes.size()},
         {"score", tree.score.name()},
         {"train_score", std::isnan(tree.train_score) ? Json(nullptr) : Json(tree.train_score)},
         {"attributes", tree.attributes},
         {"nodes", nodes},
         {"final_leaf", {{"class", tree.final_leaf.exit_class}, {"support", tree.final_leaf.support}}}};
  return j.dump(2) + "\n";
}

FFTree tree_from_json(const std::string& text) {
  try {
    const Json j = Json::parse(text);
    FFTree tree;
    tree.depth = j.at("depth").get<int>();
    const std::string policy = j.at("policy").get<std::string>();
    if (!policy.empty()) tree.policy = ExitPolicy::parse(policy);
    tree.score = ScoreFunction::parse(j.at("score").get<std::string>());
    if (!j.at("train_score").is_null()) tree.train_score = j.at("train_score").get<double>();
    tree.attributes = j.at("attributes").get<std::vector<std::string>>();
    for (const Json& n : j.at("nodes")) {
      Range r;
      r.attribute = n.at("attribute").get<std::string>();
      r.op = parse_op(n.at("op").get<std::string>());
      r.cut = n.at("cut").get<double>();
      tree.nodes.push_back({r, n.at("class").get<bool>(), n.at("support").get<std::size_t>()});
    }
    tree.final_leaf = {j.at("final_leaf").at("class").get<bool>(),
                       j.at("final_leaf").at("support").get<std::size_t>()};
    if (tree.policy.depth() != tree.depth)
      throw ParseError("model policy length does not match its depth");
    return rebind(tree, tree.attributes);
  } catch (const Json::exception& e) {
    throw ParseError(std::string("bad model JSON: ") + e.what());
  } catch (const PreconditionError& e) {
    throw ParseError(std::string("bad model JSON: ") + e.what());
  }
}

MultiClassFFT grow_multi(const Dataset& train, int depth, const ScoreFunction& fn) {
  if (train.size() == 0) throw PreconditionError(train.label_text() + ": empty training set");
  MultiClassFFT model;
  std::set<double> classes(train.labels.begin(), train.labels.end());
  model.classes.assign(classes.begin(), classes.end());
  for (double cls : model.classes) {
    Dataset one = train;
    for (double& l : one.labels) l = (l == cls) ? 1.0 : 0.0;
    one.binary = true;
    model.trees.push_back(grow(one, depth, fn).best);
  }
  return model;
}

double predict_multi(const MultiClassFFT& model, std::span<const double> row) {
  if (model.trees.empty()) throw PreconditionError("empty multi-class model");
  std::size_t best = 0;
  bool best_positive = false;
  std::size_t best_support = 0;
  for (std::size_t k = 0; k < model.trees.size(); ++k) {
    const FFTree& t = model.trees[k];
    const std::size_t i = t.exit_index(row);
    const bool positive = i < t.nodes.size() ? t.nodes[i].exit_class : t.final_leaf.exit_class;
    const std::size_t support = i < t.nodes.size() ? t.nodes[i].support : t.final_leaf.support;
    const bool wins = k == 0 || (positive && !best_positive) ||
                      (positive == best_positive && support > best_support);
    if (wins) {
      best = k;
      best_positive = positive;
      best_support = support;
    }
  }
  return model.classes[best];
}

}  // namespace frugal
