// Batch command-line front end: fit / eval / rig / change-freq.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "frugal/dataset.hpp"
#include "frugal/error.hpp"
#include "frugal/fft.hpp"
#include "frugal/metrics.hpp"
#include "frugal/operational.hpp"
#include "frugal/rig.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using frugal::Dataset;
using Json = nlohmann::ordered_json;

namespace {

enum ExitCode { kOk = 0, kParse = 2, kPrecondition = 3, kUnsupported = 4, kConfig = 5 };

struct DataFlags {
  std::string label = "bug";
  std::string effort;
  std::string rule = "bug";
  std::vector<std::string> exclude = {"name", "version"};
  double effort_floor = 0.0;

  frugal::CsvOptions csv() const {
    frugal::CsvOptions o;
    o.label_column = label;
    if (!effort.empty()) o.effort_column = effort;
    o.exclude = exclude;
    if (effort_floor > 0.0) o.effort_floor = effort_floor;
    return o;
  }
};

void add_data_flags(CLI::App* cmd, DataFlags& f) {
  cmd->add_option("--label", f.label, "Label column")->capture_default_str();
  cmd->add_option("--effort", f.effort, "Effort (lines of code) column");
  cmd->add_option("--rule", f.rule, "Label rule: bug, <30, >365, ...")->capture_default_str();
  cmd->add_option("--exclude", f.exclude, "Identifier columns kept out of the attributes")->delimiter(',');
  cmd->add_option("--effort-floor", f.effort_floor, "Raise effort values <= 0 to this floor");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw frugal::ParseError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<Dataset> load_binary(const std::vector<std::string>& paths, const DataFlags& flags) {
  const frugal::LabelRule rule = frugal::LabelRule::parse(flags.rule);
  std::vector<Dataset> out;
  for (const std::string& p : paths) out.push_back(frugal::binarize(frugal::load_csv(p, flags.csv()), rule));
  return out;
}

std::string num(double v) { return frugal::format_number(v); }

// ---- fit ----------------------------------------------------------------

struct FitFlags {
  std::vector<std::string> train;
  DataFlags data;
  int depth = 4;
  std::string score = "d2h";
  double fraction = 1.0;
  std::uint64_t seed = 1;
  std::string format = "text";
  std::string out_dir = ".";
  std::string model;
  bool multiclass = false;
};

Json multiclass_json(const frugal::MultiClassFFT& m) {
  Json trees = Json::array();
  for (const frugal::FFTree& t : m.trees) trees.push_back(Json::parse(frugal::tree_to_json(t)));
  return Json{{"multiclass", true}, {"classes", m.classes}, {"trees", trees}};
}

int cmd_fit(const FitFlags& f) {
  if (f.depth < 1) throw frugal::ConfigError("--depth must be >= 1");
  if (!(f.fraction > 0.0 && f.fraction <= 1.0)) throw frugal::ConfigError("--top-changed must be in (0, 1]");
  const frugal::ScoreFunction fn = frugal::ScoreFunction::parse(f.score);

  std::vector<Dataset> versions;
  if (f.multiclass) {
    for (const std::string& p : f.train) versions.push_back(frugal::load_csv(p, f.data.csv()));
  } else {
    versions = load_binary(f.train, f.data);
  }
  Dataset train = frugal::merge(versions);
  if (f.fraction < 1.0) {
    if (versions.size() < 2)
      throw frugal::PreconditionError("--top-changed below 1 needs at least two training versions");
    const auto keep = frugal::top_changed(versions[versions.size() - 2], versions.back(), f.fraction);
    train = frugal::project(train, keep);
  }

  const std::string model_path = f.model.empty() ? (fs::path(f.out_dir) / "model.json").string() : f.model;
  if (!fs::path(model_path).parent_path().empty()) fs::create_directories(fs::path(model_path).parent_path());

  if (f.multiclass) {
    const frugal::MultiClassFFT m = frugal::grow_multi(train, f.depth, fn);
    const std::string json = multiclass_json(m).dump(2) + "\n";
    frugal::write_file_atomic(model_path, json);
    if (f.format == "json") {
      std::cout << json;
    } else {
      for (std::size_t i = 0; i < m.trees.size(); ++i)
        std::cout << "# class " << num(m.classes[i]) << '\n' << frugal::render(m.trees[i]);
    }
    return kOk;
  }

  const frugal::FFTree tree = frugal::grow(train, f.depth, fn).best;
  const std::string json = frugal::tree_to_json(tree);
  frugal::write_file_atomic(model_path, json);
  if (f.format == "json") {
    std::cout << json;
  } else {
    std::cout << frugal::render(tree);
  }
  return kOk;
}

// ---- eval ---------------------------------------------------------------

struct EvalFlags {
  std::string model;
  std::vector<std::string> test;
  DataFlags data;
  std::string score = "d2h";
  std::string format = "text";
};

int cmd_eval(const EvalFlags& f) {
  const frugal::ScoreFunction fn = frugal::ScoreFunction::parse(f.score);
  const std::string model_text = read_file(f.model);
  Json mj;
  try {
    mj = Json::parse(model_text);
  } catch (const Json::exception& e) {
    throw frugal::ParseError(std::string("bad model JSON: ") + e.what());
  }

  if (mj.value("multiclass", false)) {
    frugal::MultiClassFFT m;
    m.classes = mj.at("classes").get<std::vector<double>>();
    std::vector<Dataset> raw;
    for (const std::string& p : f.test) raw.push_back(frugal::load_csv(p, f.data.csv()));
    const Dataset test = frugal::merge(raw);
    for (const auto& t : mj.at("trees")) m.trees.push_back(frugal::rebind(frugal::tree_from_json(t.dump()), test.attributes));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < test.size(); ++i) correct += frugal::predict_multi(m, test.rows[i]) == test.labels[i];
    const double acc = test.size() ? static_cast<double>(correct) / static_cast<double>(test.size()) : 0.0;
    std::cout << "rows " << test.size() << "\naccuracy " << num(acc) << '\n';
    return kOk;
  }

  const frugal::FFTree stored = frugal::tree_from_json(model_text);
  const Dataset test = frugal::merge(load_binary(f.test, f.data));
  if (fn.needs_effort() && !test.has_effort())
    throw frugal::UnsupportedScore("--score popt needs --effort and an effort column in the test data");
  const frugal::FFTree tree = frugal::rebind(stored, test.attributes);

  class TreeModel : public frugal::Model {
   public:
    explicit TreeModel(const frugal::FFTree& t) : t_(t) {}
    bool predict(std::span<const double> row) const override { return frugal::predict(t_, row); }
    double priority(std::span<const double> row) const override { return frugal::exit_priority(t_, t_.exit_index(row)); }
    const frugal::FFTree* tree() const override { return &t_; }

   private:
    const frugal::FFTree& t_;
  };
  const frugal::EvalResult r = frugal::evaluate(TreeModel(tree), test, fn);

  if (f.format == "json") {
    Json j{{"rows", test.size()},
           {"policy", r.policy},
           {"confusion", {{"tp", r.confusion.tp}, {"fp", r.confusion.fp}, {"tn", r.confusion.tn}, {"fn", r.confusion.fn}}},
           {"recall", r.recall},
           {"far", r.far},
           {"dis2heaven", r.dis2heaven},
           {"popt", r.popt ? Json(*r.popt) : Json(nullptr)},
           {"recall_at_20", r.recall_at_20 ? Json(*r.recall_at_20) : Json(nullptr)},
           {"score", fn.name()},
           {"metric", r.metric}};
    std::cout << j.dump(2) << '\n';
  } else if (f.format == "csv") {
    std::cout << "rows,tp,fp,tn,fn,recall,far,dis2heaven,popt,recall_at_20\n"
              << test.size() << ',' << r.confusion.tp << ',' << r.confusion.fp << ',' << r.confusion.tn << ','
              << r.confusion.fn << ',' << num(r.recall) << ',' << num(r.far) << ',' << num(r.dis2heaven) << ','
              << (r.popt ? num(*r.popt) : "") << ',' << (r.recall_at_20 ? num(*r.recall_at_20) : "") << '\n';
  } else {
    std::cout << "rows " << test.size() << '\n'
              << "tp " << r.confusion.tp << " fp " << r.confusion.fp << " tn " << r.confusion.tn << " fn "
              << r.confusion.fn << '\n'
              << "recall " << num(r.recall) << '\n'
              << "far " << num(r.far) << '\n'
              << "dis2heaven " << num(r.dis2heaven) << '\n';
    if (r.popt) std::cout << "popt " << num(*r.popt) << (r.popt_degenerate ? " (degenerate)" : "") << '\n';
    if (r.recall_at_20) std::cout << "recall_at_20 " << num(*r.recall_at_20) << '\n';
  }
  return kOk;
}

// ---- rig ----------------------------------------------------------------

struct RigFlags {
  std::string config;
  std::string out_dir = "reports";
  int threads = 0;
  std::int64_t seed = -1;
};

int cmd_rig(const RigFlags& f) {
  frugal::RigConfig config = frugal::load_rig_config(f.config);
  if (f.threads > 0) config.threads = f.threads;
  if (f.seed >= 0) config.seed = static_cast<std::uint64_t>(f.seed);
  const frugal::RigOutput out = frugal::run(config);
  frugal::write_reports(out, config, f.out_dir);
  for (const std::string& s : out.skipped) std::cerr << "skipped: " << s << '\n';
  std::cout << out.results.size() << " results written to " << f.out_dir << '\n';
  return kOk;
}

// ---- change-freq --------------------------------------------------------

struct ChangeFlags {
  std::vector<std::string> versions;
  std::vector<std::string> projects;
  DataFlags data;
  double threshold = frugal::kSmallEffect;
  std::string out_dir;
};

int cmd_changefreq(const ChangeFlags& f) {
  std::vector<std::vector<std::string>> groups;
  if (!f.versions.empty()) groups.push_back(f.versions);
  for (const std::string& p : f.projects) {
    std::vector<std::string> files;
    std::stringstream ss(p);
    for (std::string item; std::getline(ss, item, ',');)
      if (!item.empty()) files.push_back(item);
    groups.push_back(files);
  }
  if (groups.empty()) throw frugal::ConfigError("change-freq needs version CSVs");
  std::vector<std::vector<Dataset>> sequences;
  for (const auto& files : groups) {
    std::vector<Dataset> seq;
    for (const std::string& file : files) seq.push_back(frugal::load_csv(file, f.data.csv()));
    sequences.push_back(std::move(seq));
  }
  const std::string csv = frugal::change_frequency(sequences, f.threshold).to_csv();
  if (f.out_dir.empty()) {
    std::cout << csv;
  } else {
    fs::create_directories(f.out_dir);
    frugal::write_file_atomic((fs::path(f.out_dir) / "change_freq.csv").string(), csv);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fast-and-frugal trees for software analytics"};
  app.require_subcommand(1);

  FitFlags fit;
  auto* fit_cmd = app.add_subcommand("fit", "Train an FFT and print it");
  fit_cmd->add_option("train", fit.train, "Training CSV(s), merged in order")->required();
  add_data_flags(fit_cmd, fit.data);
  fit_cmd->add_option("--depth", fit.depth, "Tree depth")->capture_default_str();
  fit_cmd->add_option("--score", fit.score, "d2h or popt")->capture_default_str();
  fit_cmd->add_option("--top-changed", fit.fraction, "Keep this fraction of most-changed attributes")->capture_default_str();
  fit_cmd->add_option("--seed", fit.seed, "Random seed")->capture_default_str();
  fit_cmd->add_option("--format", fit.format, "text or json")->check(CLI::IsMember({"text", "json", "csv"}));
  fit_cmd->add_option("--out-dir", fit.out_dir, "Directory for model.json")->capture_default_str();
  fit_cmd->add_option("--model", fit.model, "Model output path (overrides --out-dir)");
  fit_cmd->add_flag("--multiclass", fit.multiclass, "One-vs-rest trees over raw labels");

  EvalFlags ev;
  auto* eval_cmd = app.add_subcommand("eval", "Score a saved model on test data");
  eval_cmd->add_option("model", ev.model, "Model JSON")->required();
  eval_cmd->add_option("test", ev.test, "Test CSV(s)")->required();
  add_data_flags(eval_cmd, ev.data);
  eval_cmd->add_option("--score", ev.score, "d2h or popt")->capture_default_str();
  eval_cmd->add_option("--format", ev.format, "text, json or csv")->check(CLI::IsMember({"text", "json", "csv"}));

  RigFlags rig;
  auto* rig_cmd = app.add_subcommand("rig", "Run an experiment configuration");
  rig_cmd->add_option("config", rig.config, "Rig JSON config")->required();
  rig_cmd->add_option("--out-dir", rig.out_dir, "Report directory")->capture_default_str();
  rig_cmd->add_option("--threads", rig.threads, "Worker threads");
  rig_cmd->add_option("--seed", rig.seed, "Override the config seed");

  ChangeFlags ch;
  auto* ch_cmd = app.add_subcommand("change-freq", "Attribute change frequency across versions");
  ch_cmd->add_option("versions", ch.versions, "Ordered version CSVs of one project");
  ch_cmd->add_option("--project", ch.projects, "Comma-separated ordered version CSVs of another project");
  add_data_flags(ch_cmd, ch.data);
  ch_cmd->add_option("--threshold", ch.threshold, "Small-effect threshold on |a12 - 0.5|")->capture_default_str();
  ch_cmd->add_option("--out-dir", ch.out_dir, "Write change_freq.csv here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*fit_cmd) return cmd_fit(fit);
    if (*eval_cmd) return cmd_eval(ev);
    if (*rig_cmd) return cmd_rig(rig);
    if (*ch_cmd) return cmd_changefreq(ch);
  } catch (const frugal::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kParse;
  } catch (const frugal::UnsupportedScore& e) {
    std::cerr << "unsupported score: " << e.what() << '\n';
    return kUnsupported;
  } catch (const frugal::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const frugal::PreconditionError& e) {
    std::cerr << "precondition failed: " << e.what() << '\n';
    return kPrecondition;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kOk;
}
