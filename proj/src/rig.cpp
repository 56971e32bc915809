#include "frugal/rig.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "frugal/baselines.hpp"
#include "frugal/error.hpp"
#include "frugal/operational.hpp"
#include "json.hpp"

namespace frugal {

namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

class FftModel : public Model {
 public:
  explicit FftModel(FFTree tree) : tree_(std::move(tree)) {}
  bool predict(std::span<const double> row) const override { return frugal::predict(tree_, row); }
  double priority(std::span<const double> row) const override {
    return exit_priority(tree_, tree_.exit_index(row));
  }
  const FFTree* tree() const override { return &tree_; }

 private:
  FFTree tree_;
};

class NbModel : public Model {
 public:
  explicit NbModel(NBModel m) : m_(std::move(m)) {}
  bool predict(std::span<const double> row) const override { return nb_predict(m_, row); }
  double priority(std::span<const double> row) const override { return nb_posterior(m_, row); }

 private:
  NBModel m_;
};

class LrModel : public Model {
 public:
  explicit LrModel(LogisticModel m) : m_(std::move(m)) {}
  bool predict(std::span<const double> row) const override { return lr_predict(m_, row); }
  double priority(std::span<const double> row) const override { return lr_probability(m_, row); }

 private:
  LogisticModel m_;
};

class ConstantModel : public Model {
 public:
  explicit ConstantModel(bool cls) : cls_(cls) {}
  bool predict(std::span<const double>) const override { return cls_; }
  double priority(std::span<const double>) const override { return 0.0; }

 private:
  bool cls_;
};

class FftLearner : public Learner {
 public:
  explicit FftLearner(int depth) : depth_(depth) {}
  std::string name() const override { return "fft"; }
  std::unique_ptr<Model> fit(const Dataset& train, const ScoreFunction& fn) const override {
    return std::make_unique<FftModel>(grow(train, depth_, fn).best);
  }

 private:
  int depth_;
};

class NbLearner : public Learner {
 public:
  std::string name() const override { return "nb"; }
  std::unique_ptr<Model> fit(const Dataset& train, const ScoreFunction&) const override {
    return std::make_unique<NbModel>(nb_train(train));
  }
};

class LrLearner : public Learner {
 public:
  explicit LrLearner(LogisticOptions o) : options_(o) {}
  std::string name() const override { return "lr"; }
  std::unique_ptr<Model> fit(const Dataset& train, const ScoreFunction&) const override {
    return std::make_unique<LrModel>(lr_train(train, options_));
  }

 private:
  LogisticOptions options_;
};

class ConstantLearner : public Learner {
 public:
  explicit ConstantLearner(bool cls) : cls_(cls) {}
  std::string name() const override { return cls_ ? "always-true" : "always-false"; }
  std::unique_ptr<Model> fit(const Dataset&, const ScoreFunction&) const override {
    return std::make_unique<ConstantModel>(cls_);
  }

 private:
  bool cls_;
};

// Re-raises `e` with `where` prepended, keeping its error category.
[[noreturn]] void rethrow_annotated(const std::string& where) {
  try {
    throw;
  } catch (const ParseError& e) {
    throw ParseError(where + ": " + e.what());
  } catch (const UnsupportedScore& e) {
    throw UnsupportedScore(where + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(where + ": " + e.what());
  } catch (const PreconditionError& e) {
    throw PreconditionError(where + ": " + e.what());
  }
}

std::string num(double v) { return format_number(v); }

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : ""; }

Json result_json(const EvalResult& r) {
  Json j;
  j["learner"] = r.learner;
  j["score"] = r.score.name();
  j["attribute_set"] = attribute_set_name(r.attribute_set);
  j["repeat"] = r.repeat;
  j["bin"] = r.bin;
  j["metric"] = r.metric;
  j["recall"] = r.recall;
  j["far"] = r.far;
  j["dis2heaven"] = r.dis2heaven;
  j["popt"] = r.popt ? Json(*r.popt) : Json(nullptr);
  j["popt_degenerate"] = r.popt_degenerate;
  j["recall_at_20"] = r.recall_at_20 ? Json(*r.recall_at_20) : Json(nullptr);
  j["confusion"] = {{"tp", r.confusion.tp}, {"fp", r.confusion.fp}, {"tn", r.confusion.tn}, {"fn", r.confusion.fn}};
  if (!r.policy.empty()) {
    j["policy"] = r.policy;
    j["truncated"] = r.truncated;
  }
  j["attributes"] = r.attributes;
  return j;
}

Json config_json(const RigConfig& c) {
  Json j;
  j["seed"] = c.seed;
  j["depth"] = c.depth;
  j["bins"] = c.bins;
  j["repeats"] = c.repeats;
  j["top_fraction"] = c.top_fraction;
  j["learners"] = c.learners;
  Json scores = Json::array();
  for (const ScoreFunction& s : c.scores) scores.push_back(s.name());
  j["scores"] = scores;
  Json sets = Json::array();
  for (AttributeSet s : c.attribute_sets) sets.push_back(attribute_set_name(s));
  j["attribute_sets"] = sets;
  Json tasks = Json::array();
  for (const Task& t : c.tasks) {
    Json tj;
    tj["name"] = t.name;
    tj["mode"] = t.mode == SplitKind::kVersionOrdered ? "versions" : "cv";
    tj["rule"] = t.rule;
    tj["files"] = t.files;
    Json versions = Json::array();
    for (const Dataset& d : t.versions) versions.push_back({{"version", d.version}, {"rows", d.size()}});
    tj["versions"] = versions;
    tasks.push_back(tj);
  }
  j["datasets"] = tasks;
  return j;
}

struct ScoreKey {
  std::string dataset;
  ScoreKind score;
  AttributeSet set;
  auto operator<=>(const ScoreKey&) const = default;
};

}  // namespace

std::unique_ptr<Learner> make_learner(const std::string& name, const LearnerOptions& options) {
  if (name == "fft") return std::make_unique<FftLearner>(options.depth);
  if (name == "nb") return std::make_unique<NbLearner>();
  if (name == "lr") return std::make_unique<LrLearner>(LogisticOptions{options.lr_epochs, options.lr_rate});
  if (name == "always-true") return std::make_unique<ConstantLearner>(true);
  if (name == "always-false") return std::make_unique<ConstantLearner>(false);
  throw ConfigError("unknown learner '" + name + "' (expected fft, nb, lr, always-true, always-false)");
}

std::string attribute_set_name(AttributeSet s) { return s == AttributeSet::kAll ? "all" : "top"; }

AttributeSet parse_attribute_set(const std::string& text) {
  if (text == "all" || text == "100%" || text == "100") return AttributeSet::kAll;
  if (text == "top" || text == "25%" || text == "top25" || text == "top-changed") return AttributeSet::kTopChanged;
  throw ConfigError("unknown attribute set '" + text + "' (expected all or top)");
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::kBetter: return "better";
    case Verdict::kWorse: return "worse";
    case Verdict::kTie: return "tie";
    case Verdict::kInconclusive: return "inconclusive";
  }
  return "inconclusive";
}

LearnerOptions RigConfig::learner_options() const {
  LearnerOptions o;
  o.depth = depth;
  return o;
}

EvalResult evaluate(const Model& model, const Dataset& test, const ScoreFunction& fn) {
  if (fn.needs_effort() && !test.has_effort())
    throw UnsupportedScore("Popt needs an effort column; " + test.label_text() + " has none");
  EvalResult r;
  r.score = fn;
  r.attributes = test.attributes;
  std::vector<double> priority(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    r.confusion.add(test.label(i), model.predict(test.rows[i]));
    priority[i] = model.priority(test.rows[i]);
  }
  r.recall = recall(r.confusion);
  r.far = far(r.confusion);
  r.dis2heaven = frugal::dis2heaven(r.recall, r.far);
  if (test.has_effort()) {
    std::vector<EffortRow> ranked;
    ranked.reserve(test.size());
    for (std::size_t i : order_by_priority(priority, *test.effort))
      ranked.push_back({test.labels[i], (*test.effort)[i]});
    const PoptResult p = frugal::popt(ranked);
    r.popt = p.value;
    r.popt_degenerate = p.degenerate;
    r.recall_at_20 = recall_at_effort(ranked, 0.2);
  }
  r.metric = fn.kind == ScoreKind::kDis2heaven ? r.dis2heaven : *r.popt;
  if (const FFTree* t = model.tree()) {
    r.policy = t->policy_string();
    r.truncated = t->truncated();
  }
  return r;
}

SplitPlan version_split(std::span<const Dataset> versions) {
  if (versions.size() < 2) throw PreconditionError("a version-ordered split needs at least 2 versions");
  SplitPlan plan;
  plan.kind = SplitKind::kVersionOrdered;
  std::size_t at = 0;
  for (std::size_t v = 0; v < versions.size(); ++v) {
    auto& dst = v + 1 < versions.size() ? plan.train : plan.test;
    for (std::size_t i = 0; i < versions[v].size(); ++i) dst.push_back(at++);
  }
  return plan;
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    // Unbiased draw from [0, i) by rejection.
    const std::uint64_t bound = i;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
      x = engine();
    } while (x >= limit);
    std::swap(p[i - 1], p[x % bound]);
  }
  return p;
}

std::vector<SplitPlan> cross_val(std::size_t rows, int bins, int repeats, std::uint64_t seed) {
  if (bins < 2) throw ConfigError("cross-validation needs at least 2 bins");
  if (repeats < 1) throw ConfigError("cross-validation needs at least 1 repeat");
  if (rows < static_cast<std::size_t>(bins))
    throw PreconditionError("cross-validation needs at least as many rows as bins (" +
                            std::to_string(rows) + " < " + std::to_string(bins) + ")");
  std::vector<SplitPlan> plans;
  const std::size_t nb = static_cast<std::size_t>(bins);
  for (int rep = 0; rep < repeats; ++rep) {
    const std::uint64_t rep_seed = seed + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(rep);
    const std::vector<std::size_t> order = seeded_permutation(rows, rep_seed);
    for (std::size_t b = 0; b < nb; ++b) {
      const std::size_t lo = b * rows / nb;
      const std::size_t hi = (b + 1) * rows / nb;
      SplitPlan plan;
      plan.kind = SplitKind::kCrossValidation;
      plan.repeat = rep;
      plan.bin = static_cast<int>(b);
      plan.seed = seed;
      for (std::size_t k = 0; k < rows; ++k) (k >= lo && k < hi ? plan.test : plan.train).push_back(order[k]);
      std::sort(plan.train.begin(), plan.train.end());
      std::sort(plan.test.begin(), plan.test.end());
      plans.push_back(std::move(plan));
    }
  }
  return plans;
}

RigConfig parse_rig_config(const std::string& json_text, const std::string& base_dir) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RigConfig c;
  try {
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("depth")) c.depth = j["depth"].get<int>();
    if (j.contains("bins")) c.bins = j["bins"].get<int>();
    if (j.contains("repeats")) c.repeats = j["repeats"].get<int>();
    if (j.contains("threads")) c.threads = j["threads"].get<int>();
    if (j.contains("top_fraction")) c.top_fraction = j["top_fraction"].get<double>();
    if (j.contains("learners")) c.learners = j["learners"].get<std::vector<std::string>>();
    if (j.contains("scores")) {
      c.scores.clear();
      for (const auto& s : j["scores"]) c.scores.push_back(ScoreFunction::parse(s.get<std::string>()));
    }
    if (j.contains("attribute_sets")) {
      c.attribute_sets.clear();
      for (const auto& s : j["attribute_sets"]) c.attribute_sets.push_back(parse_attribute_set(s.get<std::string>()));
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("bad config field: ") + e.what());
  }
  if (c.depth < 1 || c.depth > 16) throw ConfigError("depth must be in [1, 16]");
  if (!(c.top_fraction > 0.0 && c.top_fraction <= 1.0)) throw ConfigError("top_fraction must be in (0, 1]");
  if (c.threads < 1) throw ConfigError("threads must be >= 1");
  if (c.learners.empty()) throw ConfigError("config names no learners");
  for (const std::string& l : c.learners) make_learner(l);

  const Json defaults = j.value("defaults", Json::object());
  if (!j.contains("datasets") || !j["datasets"].is_array()) throw ConfigError("config needs a 'datasets' array");
  for (const Json& d : j["datasets"]) {
    try {
      Json merged = defaults;
      for (auto it = d.begin(); it != d.end(); ++it) merged[it.key()] = it.value();

      CsvOptions csv;
      csv.label_column = merged.value("label", std::string("bug"));
      if (merged.contains("effort") && !merged["effort"].is_null()) csv.effort_column = merged["effort"].get<std::string>();
      if (merged.contains("exclude")) csv.exclude = merged["exclude"].get<std::vector<std::string>>();
      if (merged.contains("effort_floor")) csv.effort_floor = merged["effort_floor"].get<double>();

      const std::string name = merged.at("name").get<std::string>();
      std::vector<std::string> files;
      SplitKind mode;
      if (merged.contains("versions")) {
        files = merged["versions"].get<std::vector<std::string>>();
        mode = SplitKind::kVersionOrdered;
      } else if (merged.contains("file")) {
        files = {merged["file"].get<std::string>()};
        mode = SplitKind::kCrossValidation;
      } else {
        throw ConfigError("dataset '" + name + "' needs 'versions' or 'file'");
      }
      if (merged.contains("mode")) {
        const std::string m = merged["mode"].get<std::string>();
        if (m == "cv") mode = SplitKind::kCrossValidation;
        else if (m == "versions") mode = SplitKind::kVersionOrdered;
        else throw ConfigError("dataset '" + name + "': unknown mode '" + m + "'");
      }
      if (mode == SplitKind::kVersionOrdered && files.size() < 2)
        throw ConfigError("dataset '" + name + "' needs at least 2 versions");
      if (mode == SplitKind::kCrossValidation && files.size() != 1)
        throw ConfigError("dataset '" + name + "': cross-validation takes exactly one file");

      std::vector<std::string> rules = {"bug"};
      if (merged.contains("rules")) rules = merged["rules"].get<std::vector<std::string>>();
      if (merged.contains("rule")) rules = {merged["rule"].get<std::string>()};

      std::vector<Dataset> raw;
      std::vector<std::string> resolved;
      for (const std::string& f : files) {
        const fs::path p = fs::path(f).is_absolute() ? fs::path(f) : fs::path(base_dir) / f;
        resolved.push_back(p.string());
        CsvOptions opts = csv;
        opts.name = name;
        const std::string stem = p.stem().string();
        const auto dash = stem.rfind('-');
        opts.version = dash == std::string::npos ? stem : stem.substr(dash + 1);
        raw.push_back(load_csv(p.string(), opts));
      }
      for (const std::string& rule_text : rules) {
        LabelRule rule;
        try {
          rule = LabelRule::parse(rule_text);
        } catch (const Error& e) {
          throw ConfigError(e.what());
        }
        Task t;
        t.name = rules.size() == 1 && rule.kind == LabelRule::Kind::kBugCount ? name : name + rule.to_string();
        t.mode = mode;
        t.files = files;
        t.rule = rule.to_string();
        for (const Dataset& r : raw) t.versions.push_back(binarize(r, rule));
        c.tasks.push_back(std::move(t));
      }
    } catch (const Json::exception& e) {
      throw ConfigError(std::string("bad dataset entry: ") + e.what());
    }
  }
  return c;
}

RigConfig load_rig_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_rig_config(buf.str(), fs::path(path).parent_path().string());
}

std::vector<std::string> operational_attributes(const Task& task, double fraction) {
  if (task.mode != SplitKind::kVersionOrdered)
    throw PreconditionError(task.name + ": the top-changed set needs versioned data");
  if (task.versions.size() < 3)
    throw PreconditionError(task.name + ": the top-changed set needs at least 2 training versions");
  const std::size_t n = task.versions.size();
  return top_changed(task.versions[n - 3], task.versions[n - 2], fraction);
}

RigOutput run(const RigConfig& config) {
  struct Prepared {
    Dataset pool;
    std::vector<SplitPlan> plans;
    std::optional<std::vector<std::string>> top;
    std::string top_error;
  };
  std::vector<Prepared> prepared;
  for (const Task& t : config.tasks) {
    if (t.versions.empty()) throw ConfigError(t.name + ": task has no data");
    Prepared p;
    if (t.mode == SplitKind::kVersionOrdered) {
      p.pool = merge(t.versions);
      p.plans = {version_split(t.versions)};
    } else {
      p.pool = t.versions.front();
      p.plans = cross_val(p.pool.size(), config.bins, config.repeats, config.seed);
    }
    p.pool.name = t.name;
    try {
      p.top = operational_attributes(t, config.top_fraction);
    } catch (const PreconditionError& e) {
      p.top_error = e.what();
    }
    prepared.push_back(std::move(p));
  }

  std::vector<std::unique_ptr<Learner>> learners;
  for (const std::string& name : config.learners) learners.push_back(make_learner(name, config.learner_options()));

  struct Unit {
    std::size_t task;
    AttributeSet set;
    ScoreFunction score;
    std::size_t learner;
    std::size_t plan;
  };
  RigOutput out;
  std::vector<Unit> units;
  for (std::size_t t = 0; t < config.tasks.size(); ++t) {
    for (AttributeSet set : config.attribute_sets) {
      if (set == AttributeSet::kTopChanged && !prepared[t].top) {
        out.skipped.push_back(config.tasks[t].name + "/" + attribute_set_name(set) + ": " + prepared[t].top_error);
        continue;
      }
      for (const ScoreFunction& score : config.scores)
        for (std::size_t l = 0; l < learners.size(); ++l)
          for (std::size_t p = 0; p < prepared[t].plans.size(); ++p) units.push_back({t, set, score, l, p});
    }
  }

  std::vector<EvalResult> results(units.size());
  std::vector<std::exception_ptr> errors(units.size());
  auto work = [&](std::size_t u) {
    const Unit& unit = units[u];
    const Prepared& prep = prepared[unit.task];
    const SplitPlan& plan = prep.plans[unit.plan];
    const Learner& learner = *learners[unit.learner];
    try {
      try {
        const auto start = std::chrono::steady_clock::now();
        Dataset train = prep.pool.subset(plan.train);
        Dataset test = prep.pool.subset(plan.test);
        if (unit.set == AttributeSet::kTopChanged) {
          train = project(train, *prep.top);
          test = project(test, *prep.top);
        }
        const auto model = learner.fit(train, unit.score);
        EvalResult r = evaluate(*model, test, unit.score);
        r.dataset = config.tasks[unit.task].name;
        r.learner = learner.name();
        r.attribute_set = unit.set;
        r.repeat = plan.repeat;
        r.bin = plan.bin;
        r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        results[u] = std::move(r);
      } catch (const Error&) {
        std::ostringstream where;
        where << "[dataset=" << config.tasks[unit.task].name << " learner=" << learner.name()
              << " score=" << unit.score.name() << " attributes=" << attribute_set_name(unit.set)
              << " repeat=" << plan.repeat << " bin=" << plan.bin << "]";
        rethrow_annotated(where.str());
      }
    } catch (...) {
      errors[u] = std::current_exception();
    }
  };

  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(config.threads), units.size());
  if (threads <= 1) {
    for (std::size_t u = 0; u < units.size(); ++u) work(u);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < threads; ++i)
      pool.emplace_back([&] {
        for (std::size_t u; (u = next.fetch_add(1)) < units.size();) work(u);
      });
  }
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
  out.results = std::move(results);
  return out;
}

PolicyHistogram policy_histogram(std::span<const EvalResult> results) {
  PolicyHistogram h;
  for (const EvalResult& r : results) {
    if (r.learner != "fft" || r.policy.empty()) continue;
    h.depth = std::max(h.depth, static_cast<int>(r.policy.size()) - 1);
    auto it = std::find_if(h.columns.begin(), h.columns.end(), [&](const PolicyHistogram::Column& c) {
      return c.score == r.score && c.attribute_set == r.attribute_set;
    });
    if (it == h.columns.end()) {
      h.columns.push_back({r.score, r.attribute_set, {}, 0});
      it = h.columns.end() - 1;
    }
    ++it->counts[r.policy];
    ++it->total;
  }
  return h;
}

std::vector<ComparisonCell> compare(std::span<const EvalResult> results, double alpha) {
  std::map<ScoreKey, std::map<std::string, std::vector<double>>> groups;
  std::vector<ScoreKey> order;
  for (const EvalResult& r : results) {
    ScoreKey key{r.dataset, r.score.kind, r.attribute_set};
    if (!groups.contains(key)) order.push_back(key);
    groups[key][r.learner].push_back(r.metric);
  }
  std::vector<ComparisonCell> cells;
  for (const ScoreKey& key : order) {
    const auto& streams = groups[key];
    auto fft = streams.find("fft");
    if (fft == streams.end()) continue;
    ComparisonCell cell;
    cell.dataset = key.dataset;
    cell.score = ScoreFunction{key.score};
    cell.attribute_set = key.set;
    bool undersized = streams.size() < 2;
    bool any_worse = false, all_better = true;
    for (const auto& [learner, values] : streams) {
      if (learner == "fft") continue;
      if (fft->second.size() < 3 || values.size() < 3) {
        undersized = true;
        continue;
      }
      const MannWhitney mw = mann_whitney(fft->second, values, alpha);
      cell.tests[learner] = mw;
      const double expected = static_cast<double>(fft->second.size()) * static_cast<double>(values.size()) / 2.0;
      const bool fft_higher = mw.u > expected;
      const bool fft_favoured = cell.score.lower_is_better() ? mw.u < expected : fft_higher;
      if (mw.different && fft_favoured) continue;
      all_better = false;
      if (mw.different && !fft_favoured) any_worse = true;
    }
    if (undersized) cell.verdict = Verdict::kInconclusive;
    else if (any_worse) cell.verdict = Verdict::kWorse;
    else if (all_better) cell.verdict = Verdict::kBetter;
    else cell.verdict = Verdict::kTie;
    cells.push_back(std::move(cell));
  }
  return cells;
}

std::vector<DeltaRow> attribute_deltas(std::span<const EvalResult> results) {
  struct Key {
    std::string dataset, learner;
    ScoreKind score;
    auto operator<=>(const Key&) const = default;
  };
  std::map<Key, std::vector<double>> all, top;
  std::vector<Key> order;
  for (const EvalResult& r : results) {
    Key k{r.dataset, r.learner, r.score.kind};
    if (!all.contains(k) && !top.contains(k)) order.push_back(k);
    (r.attribute_set == AttributeSet::kAll ? all : top)[k].push_back(r.metric);
  }
  std::vector<DeltaRow> rows;
  for (const Key& k : order) {
    if (!all.contains(k) || !top.contains(k)) continue;
    const double a = median(all[k]), t = median(top[k]);
    const ScoreFunction fn{k.score};
    rows.push_back({k.dataset, k.learner, fn, fn.lower_is_better() ? t - a : a - t});
  }
  return rows;
}

std::string results_csv(std::span<const EvalResult> results, const RigConfig& config) {
  std::ostringstream os;
  os << "dataset,learner,score,attribute_set,repeat,bin,metric,recall,far,dis2heaven,popt,"
        "popt_degenerate,recall_at_20,tp,fp,tn,fn,policy,truncated,n_attributes,depth,seed\n";
  for (const EvalResult& r : results) {
    os << r.dataset << ',' << r.learner << ',' << r.score.name() << ',' << attribute_set_name(r.attribute_set)
       << ',' << r.repeat << ',' << r.bin << ',' << num(r.metric) << ',' << num(r.recall) << ','
       << num(r.far) << ',' << num(r.dis2heaven) << ',' << opt_num(r.popt) << ','
       << (r.popt_degenerate ? 1 : 0) << ',' << opt_num(r.recall_at_20) << ',' << r.confusion.tp << ','
       << r.confusion.fp << ',' << r.confusion.tn << ',' << r.confusion.fn << ',' << r.policy << ','
       << (r.policy.empty() ? "" : (r.truncated ? "1" : "0")) << ',' << r.attributes.size() << ','
       << config.depth << ',' << config.seed << '\n';
  }
  return os.str();
}

std::string results_json(const RigOutput& output, const RigConfig& config) {
  Json j;
  j["config"] = config_json(config);
  Json datasets = Json::object();
  for (const EvalResult& r : output.results) {
    if (!datasets.contains(r.dataset)) datasets[r.dataset] = Json::array();
    datasets[r.dataset].push_back(result_json(r));
  }
  j["datasets"] = datasets;
  j["skipped"] = output.skipped;
  return j.dump(2) + "\n";
}

std::string histogram_csv(const PolicyHistogram& h) {
  std::ostringstream os;
  os << "policy";
  for (const auto& c : h.columns) os << ',' << c.score.name() << '/' << attribute_set_name(c.attribute_set);
  os << '\n';
  if (h.empty()) return os.str();
  for (std::uint32_t i = 0; i < (1u << h.depth); ++i) {
    const std::string label = ExitPolicy::from_index(i, h.depth).to_string();
    os << label;
    for (const auto& c : h.columns) {
      auto it = c.counts.find(label);
      os << ',' << (it == c.counts.end() ? 0 : it->second);
    }
    os << '\n';
  }
  os << "total";
  for (const auto& c : h.columns) os << ',' << c.total;
  os << '\n';
  return os.str();
}

std::string comparison_csv(std::span<const ComparisonCell> cells) {
  std::ostringstream os;
  os << "dataset,score,attribute_set,verdict,details\n";
  for (const ComparisonCell& c : cells) {
    os << c.dataset << ',' << c.score.name() << ',' << attribute_set_name(c.attribute_set) << ','
       << verdict_name(c.verdict) << ',';
    bool first = true;
    for (const auto& [learner, mw] : c.tests) {
      os << (first ? "" : ";") << learner << ":u=" << num(mw.u) << ":p=" << num(mw.p);
      first = false;
    }
    os << '\n';
  }
  return os.str();
}

std::string deltas_csv(std::span<const DeltaRow> rows) {
  std::ostringstream os;
  os << "dataset,learner,score,delta\n";
  for (const DeltaRow& r : rows) os << r.dataset << ',' << r.learner << ',' << r.score.name() << ',' << num(r.delta) << '\n';
  return os.str();
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ParseError("cannot write '" + tmp.string() + "'");
    out << contents;
    if (!out) throw ParseError("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

void write_reports(const RigOutput& output, const RigConfig& config, const std::string& dir) {
  fs::create_directories(dir);
  const fs::path d(dir);
  write_file_atomic((d / "results.csv").string(), results_csv(output.results, config));
  write_file_atomic((d / "results.json").string(), results_json(output, config));
  write_file_atomic((d / "policy_histogram.csv").string(), histogram_csv(policy_histogram(output.results)));
  write_file_atomic((d / "comparison.csv").string(), comparison_csv(compare(output.results)));
  const auto deltas = attribute_deltas(output.results);
  if (!deltas.empty()) write_file_atomic((d / "deltas.csv").string(), deltas_csv(deltas));

  std::ostringstream timing;
  timing << "dataset,learner,score,attribute_set,repeat,bin,wall_ms\n";
  for (const EvalResult& r : output.results)
    timing << r.dataset << ',' << r.learner << ',' << r.score.name() << ',' << attribute_set_name(r.attribute_set)
           << ',' << r.repeat << ',' << r.bin << ',' << num(r.wall_ms) << '\n';
  write_file_atomic((d / "timing.csv").string(), timing.str());
}

}  // namespace frugal
