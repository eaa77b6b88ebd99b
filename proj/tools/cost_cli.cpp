// cost: build COST-style datasets and score model responses against them.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cost/cost.hpp"

namespace {

namespace fs = std::filesystem;

struct Options {
  std::string gt;
  std::vector<std::string> preds;
  std::string task = "all";
  std::string lexicon;
  std::uint64_t seed = 0;
  std::string format = "table";
  unsigned jobs = 0;
  std::string report;

  // build
  std::string meta;
  std::string masks;
  std::string depth;
  std::string questions;
  std::string out;
  std::string log;
  bool with_prompt = false;
};

void require_exists(const std::string& path, const char* what) {
  if (!fs::exists(path)) throw cost::ConfigError(std::string(what) + " '" + path + "' does not exist");
}

cost::Lexicon lexicon_for(const Options& o) {
  if (!o.lexicon.empty()) require_exists(o.lexicon, "lexicon");
  return cost::load_lexicon(o.lexicon.empty() ? std::nullopt
                                              : std::optional<fs::path>(o.lexicon));
}

void write_json_file(const std::string& path, const nlohmann::ordered_json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw cost::ConfigError("cannot write '" + path + "'");
  f << j.dump(2) << '\n';
}

int run_build(const Options& o) {
  require_exists(o.meta, "panoptic metadata");
  require_exists(o.masks, "mask directory");
  if (!o.depth.empty()) require_exists(o.depth, "depth directory");
  if (!o.questions.empty()) require_exists(o.questions, "question buckets");

  const auto lex = lexicon_for(o);
  auto tasks = cost::select_tasks(o.task);
  const auto buckets =
      o.questions.empty() ? cost::QuestionBucket::builtin() : cost::QuestionBucket::load(o.questions);

  cost::BuildConfig cfg;
  cfg.meta = o.meta;
  cfg.masks = o.masks;
  if (!o.depth.empty()) cfg.depth = fs::path(o.depth);
  cfg.tasks = tasks;
  cfg.seed = o.seed;
  cfg.jobs = o.jobs;
  cfg.with_prompt = o.with_prompt;

  const auto images = cost::load_panoptic_meta(cfg.meta, lex);
  const auto result = cost::build_dataset(images, cfg, buckets, lex);

  if (o.out.empty() || o.out == "-") {
    cost::write_build_output(std::cout, result, cfg.with_prompt);
  } else {
    std::ofstream f(o.out, std::ios::binary);
    if (!f) throw cost::ConfigError("cannot write '" + o.out + "'");
    cost::write_build_output(f, result, cfg.with_prompt);
  }

  std::ofstream log_file;
  if (!o.log.empty()) log_file.open(o.log);
  std::ostream& log = o.log.empty() ? std::cerr : log_file;
  for (const auto& e : result.log)
    log << (e.hard_error ? "error" : "skip") << '\t' << e.image_id << '\t' << e.task << '\t'
        << e.reason << '\n';
  std::cerr << "built " << result.records.size() << " records from " << result.images
            << " images, " << result.log.size() << " skipped, " << result.hard_errors()
            << " errors\n";
  return result.hard_errors() == 0 ? 0 : 1;
}

int run_eval(const Options& o) {
  require_exists(o.gt, "ground truth");
  if (o.preds.size() != 1) throw cost::ConfigError("eval takes exactly one --pred");
  require_exists(o.preds.front(), "prediction file");
  const auto lex = lexicon_for(o);

  cost::EvalConfig cfg;
  cfg.gt = o.gt;
  cfg.pred = o.preds.front();
  cfg.tasks = cost::select_tasks(o.task);
  cfg.lexicon_name = o.lexicon.empty() ? "builtin" : o.lexicon;
  cfg.seed = o.seed;
  cfg.jobs = o.jobs;

  const auto gt = cost::read_dataset(cfg.gt);
  const auto preds = cost::read_predictions(cfg.pred);
  const auto result = cost::evaluate(gt, preds, cfg.tasks, lex, cfg.jobs);
  const auto report = cost::eval_report_json(result, cfg);

  if (!o.report.empty()) write_json_file(o.report, report);
  const auto format = *cost::parse_format(o.format);
  if (format == cost::ReportFormat::json) std::cout << report.dump(2) << '\n';
  else if (format == cost::ReportFormat::csv) cost::write_eval_csv(std::cout, result);
  else cost::write_eval_table(std::cout, result);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  return 0;
}

int run_stats(const Options& o) {
  require_exists(o.gt, "dataset");
  const auto dataset = cost::read_dataset(o.gt);
  const auto stats = cost::dataset_stats(dataset, cost::select_tasks(o.task));
  if (!o.report.empty()) write_json_file(o.report, cost::stats_json(stats));
  const auto format = *cost::parse_format(o.format);
  if (format == cost::ReportFormat::json) std::cout << cost::stats_json(stats).dump(2) << '\n';
  else if (format == cost::ReportFormat::csv) cost::write_stats_csv(std::cout, stats);
  else cost::write_stats_table(std::cout, stats);
  return 0;
}

int run_compare(const Options& o) {
  require_exists(o.gt, "ground truth");
  if (o.preds.size() < 2) throw cost::ConfigError("compare needs at least two --pred files");
  const auto lex = lexicon_for(o);
  const auto tasks = cost::select_tasks(o.task);
  const auto gt = cost::read_dataset(o.gt);
  std::vector<fs::path> paths(o.preds.begin(), o.preds.end());
  const auto rows = cost::compare_models(gt, paths, tasks, lex, o.jobs);
  const auto cols = cost::compare_columns(gt, tasks);

  if (!o.report.empty()) write_json_file(o.report, cost::compare_json(rows, cols));
  const auto format = *cost::parse_format(o.format);
  if (format == cost::ReportFormat::json) std::cout << cost::compare_json(rows, cols).dump(2) << '\n';
  else if (format == cost::ReportFormat::csv) cost::write_compare_csv(std::cout, rows, cols);
  else cost::write_compare_table(std::cout, rows, cols);

  bool failed = false;
  for (const auto& r : rows) {
    if (!r.result) {
      std::cerr << "error: " << r.model << ": " << r.failure << '\n';
      failed = true;
    }
  }
  return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Build COST-style object perception datasets and score model responses"};
  app.require_subcommand(1);
  Options o;

  const auto task_check = CLI::IsMember({"semantic", "instance", "panoptic", "depth", "all"});
  const auto format_check = CLI::IsMember({"table", "json", "csv"});

  auto* build = app.add_subcommand("build", "Build a question-answer dataset from panoptic masks");
  build->add_option("--meta", o.meta, "Panoptic metadata JSON")->required();
  build->add_option("--masks", o.masks, "Directory of panoptic mask PNGs")->required();
  build->add_option("--depth", o.depth, "Directory of 16-bit depth PNGs");
  build->add_option("--questions", o.questions, "Question bucket JSON (default: builtin)");
  build->add_option("--out", o.out, "Output JSON Lines file (default: stdout)");
  build->add_option("--log", o.log, "Write the skip/error log here (default: stderr)");
  build->add_flag("--with-prompt", o.with_prompt, "Add the evaluation prompt to each record");

  auto* eval = app.add_subcommand("eval", "Score one prediction file against a dataset");
  auto* stats = app.add_subcommand("stats", "Per-image total object count histogram");
  auto* compare = app.add_subcommand("compare", "Score several prediction files side by side");

  for (auto* sub : {build, eval, stats, compare}) {
    sub->add_option("--task", o.task, "semantic|instance|panoptic|depth|all")
        ->check(task_check)
        ->capture_default_str();
    sub->add_option("--lexicon", o.lexicon, "Lexicon file (default: builtin)");
    sub->add_option("--seed", o.seed, "Question sampling seed")->capture_default_str();
    sub->add_option("--jobs", o.jobs, "Worker threads (0 = all cores)")->capture_default_str();
  }
  build->get_option("--task")->default_str("panoptic");
  for (auto* sub : {eval, stats, compare}) {
    sub->add_option("--gt", o.gt, "Ground-truth dataset (JSON Lines)")->required();
    sub->add_option("--format", o.format, "table|json|csv")->check(format_check)->capture_default_str();
    sub->add_option("--report", o.report, "Also write the JSON report to this file");
  }
  eval->add_option("--pred", o.preds, "Prediction file (JSON Lines)")->required();
  compare->add_option("--pred", o.preds, "Prediction files, one per model")->required();

  CLI11_PARSE(app, argc, argv);
  if (build->parsed() && build->get_option("--task")->count() == 0) o.task = "panoptic";

  try {
    if (build->parsed()) return run_build(o);
    if (eval->parsed()) return run_eval(o);
    if (stats->parsed()) return run_stats(o);
    if (compare->parsed()) return run_compare(o);
  } catch (const cost::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: unexpected failure: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
