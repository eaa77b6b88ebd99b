#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "cost/harness.hpp"
#include "synthetic.hpp"

using cost::ObjectCountMap;
using cost::PredictionRecord;
using cost::QARecord;
using cost::TaskKind;

namespace fs = std::filesystem;

namespace {

const cost::Lexicon& lex() { return cost::Lexicon::builtin(); }

QARecord count_record(std::string id, TaskKind task, ObjectCountMap counts) {
  QARecord r;
  r.image_id = std::move(id);
  r.task = task;
  r.question = "What objects are in the image?";
  r.answer = cost::render_answer(counts, lex());
  r.gt_counts = std::move(counts);
  return r;
}

QARecord depth_record(std::string id, std::vector<std::string> labels) {
  QARecord r;
  r.image_id = std::move(id);
  r.task = TaskKind::depth;
  r.gt_order = cost::DepthOrder::from_labels(labels);
  r.answer = cost::render_depth_answer(r.gt_order);
  return r;
}

std::vector<PredictionRecord> echo(const std::vector<QARecord>& gt) {
  std::vector<PredictionRecord> out;
  for (const auto& r : gt) out.push_back({r.image_id, r.task, r.answer});
  return out;
}

struct BuildFixture {
  fs::path dir;
  cost::synth::SyntheticSet set;
  std::vector<cost::ImageMeta> images;
};

BuildFixture make_fixture(const std::string& name, int n, bool with_depth, unsigned seed = 3) {
  std::mt19937 rng(seed);
  std::vector<cost::synth::SyntheticImage> imgs;
  for (int i = 0; i < n; ++i)
    imgs.push_back(cost::synth::make_image(rng, "img" + std::to_string(i), 20, 14,
                                           cost::synth::uniform(rng, 1, 6), 4000));
  BuildFixture f;
  f.dir = cost::synth::scratch_dir(name);
  f.set = cost::synth::write_set(f.dir, imgs, with_depth);
  f.images = cost::load_panoptic_meta(f.set.meta, lex());
  return f;
}

std::string build_text(const BuildFixture& f, std::vector<TaskKind> tasks, unsigned jobs,
                       std::uint64_t seed = 0) {
  cost::BuildConfig cfg;
  cfg.meta = f.set.meta;
  cfg.masks = f.set.masks;
  cfg.depth = f.set.depth;
  cfg.tasks = std::move(tasks);
  cfg.seed = seed;
  cfg.jobs = jobs;
  std::ostringstream os;
  cost::write_build_output(os, cost::build_dataset(f.images, cfg, cost::QuestionBucket::builtin(), lex()), false);
  return os.str();
}

}  // namespace

TEST(Build, OneRecordPerImageAndTask) {
  auto f = make_fixture("build_card", 3, true);
  cost::BuildConfig cfg{f.set.meta, f.set.masks, f.set.depth, {TaskKind::panoptic}, 0, 1, false};
  auto r = cost::build_dataset(f.images, cfg, cost::QuestionBucket::builtin(), lex());
  EXPECT_EQ(r.records.size(), 3u);
  EXPECT_TRUE(r.log.empty());

  cfg.tasks = {TaskKind::depth, TaskKind::panoptic};
  r = cost::build_dataset(f.images, cfg, cost::QuestionBucket::builtin(), lex());
  ASSERT_EQ(r.records.size(), 6u);
  // Image order first, then canonical task order.
  EXPECT_EQ(r.records[0].image_id, "img0");
  EXPECT_EQ(r.records[0].task, TaskKind::panoptic);
  EXPECT_EQ(r.records[1].task, TaskKind::depth);
  fs::remove_all(f.dir);
}

TEST(Build, MissingDepthMapSkipsOnlyThatRecord) {
  auto f = make_fixture("build_skip", 2, true);
  fs::remove(f.set.depth / "img1.png");
  cost::BuildConfig cfg{f.set.meta, f.set.masks, f.set.depth, {TaskKind::panoptic, TaskKind::depth}, 0, 1, false};
  const auto r = cost::build_dataset(f.images, cfg, cost::QuestionBucket::builtin(), lex());
  EXPECT_EQ(r.records.size(), 3u);
  ASSERT_EQ(r.log.size(), 1u);
  EXPECT_EQ(r.log[0].image_id, "img1");
  EXPECT_EQ(r.log[0].task, "depth");
  EXPECT_EQ(r.hard_errors(), 0u);
  fs::remove_all(f.dir);
}

TEST(Build, MissingMaskIsHardError) {
  auto f = make_fixture("build_hard", 2, false);
  fs::remove(f.set.masks / "img0.png");
  cost::BuildConfig cfg{f.set.meta, f.set.masks, std::nullopt, {TaskKind::instance}, 0, 1, false};
  const auto r = cost::build_dataset(f.images, cfg, cost::QuestionBucket::builtin(), lex());
  EXPECT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.hard_errors(), 1u);
  fs::remove_all(f.dir);
}

TEST(Build, DeterministicAcrossRunsAndJobs) {
  auto f = make_fixture("build_det", 9, true);
  const std::vector<TaskKind> all(cost::kAllTasks.begin(), cost::kAllTasks.end());
  const auto a = build_text(f, all, 1, 17);
  EXPECT_EQ(a, build_text(f, all, 1, 17));
  EXPECT_EQ(a, build_text(f, all, 4, 17));
  EXPECT_NE(a, build_text(f, all, 1, 18));  // seed reaches the question sampler
  fs::remove_all(f.dir);
}

TEST(Build, OutputReadsBack) {
  auto f = make_fixture("build_rt", 4, true);
  const std::vector<TaskKind> all(cost::kAllTasks.begin(), cost::kAllTasks.end());
  const auto text = build_text(f, all, 2);
  const auto path = f.dir / "ds.jsonl";
  std::ofstream(path) << text;
  const auto back = cost::read_dataset(path);
  std::ostringstream os;
  cost::write_dataset(os, back);
  EXPECT_EQ(os.str(), text);
  fs::remove_all(f.dir);
}

TEST(Eval, IdentityIsPerfect) {
  const std::vector<QARecord> gt = {
      count_record("a", TaskKind::panoptic, {{"person", 2}, {"sky", 1}}),
      count_record("b", TaskKind::panoptic, {{"car", 3}}),
      depth_record("a", {"person", "person-2", "sky"}),
  };
  const auto r = cost::evaluate(gt, echo(gt), {cost::kAllTasks.begin(), cost::kAllTasks.end()}, lex(), 1);
  ASSERT_EQ(r.tasks.size(), 2u);
  EXPECT_EQ(*r.find(TaskKind::panoptic)->report->aggregate_cs, 100.0);
  EXPECT_EQ(*r.find(TaskKind::panoptic)->report->aggregate_hs, 0.0);
  EXPECT_EQ(*r.find(TaskKind::depth)->report->aggregate_ds, 0.0);
  EXPECT_TRUE(r.warnings.empty());
}

TEST(Eval, TwoImageFixture) {
  const std::vector<QARecord> gt = {
      count_record("img1", TaskKind::panoptic, {{"person", 2}, {"car", 1}}),
      count_record("img2", TaskKind::panoptic, {{"person", 2}, {"car", 1}}),
  };
  const std::vector<PredictionRecord> preds = {
      {"img1", TaskKind::panoptic, "The objects present in the image are: two people, car."},
      {"img2", TaskKind::panoptic, "The objects present in the image are: person, dog."},
  };
  const auto r = cost::evaluate(gt, preds, {TaskKind::panoptic}, lex(), 1);
  const auto& rep = *r.find(TaskKind::panoptic)->report;
  EXPECT_DOUBLE_EQ(*rep.aggregate_cs, 62.5);
  EXPECT_DOUBLE_EQ(*rep.aggregate_hs, 37.5);
}

TEST(Eval, EmptyResponseScoresZeroAndExcludesHs) {
  const std::vector<QARecord> gt = {count_record("img1", TaskKind::instance, {{"dog", 1}})};
  const auto r = cost::evaluate(gt, {{"img1", TaskKind::instance, ""}}, {TaskKind::instance}, lex(), 1);
  const auto& rep = *r.find(TaskKind::instance)->report;
  EXPECT_EQ(*rep.aggregate_cs, 0.0);
  EXPECT_FALSE(rep.aggregate_hs.has_value());
  EXPECT_EQ(rep.hs_excluded, (std::vector<std::string>{"img1"}));
}

TEST(Eval, ZeroOverlapIsError) {
  const std::vector<QARecord> gt = {count_record("img1", TaskKind::instance, {{"dog", 1}})};
  EXPECT_THROW(cost::evaluate(gt, {{"other", TaskKind::instance, "dog"}}, {TaskKind::instance}, lex()),
               cost::Error);
  EXPECT_THROW(cost::evaluate(gt, {{"img1", TaskKind::semantic, "dog"}}, {TaskKind::instance}, lex()),
               cost::Error);
}

TEST(Eval, DuplicateGroundTruthIsFormatError) {
  const std::vector<QARecord> gt = {count_record("x", TaskKind::instance, {{"dog", 1}}),
                                    count_record("x", TaskKind::instance, {{"cat", 1}})};
  EXPECT_THROW(cost::evaluate(gt, echo(gt), {TaskKind::instance}, lex()), cost::FormatError);
}

// Property: each prediction is scored, excluded or unmatched, exactly once.
TEST(Eval, EveryPredictionAccountedOnce) {
  std::mt19937 rng(71);
  const auto& pool = cost::synth::thing_nouns();
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<QARecord> gt;
    for (int i = 0; i < 12; ++i) {
      const auto task = cost::kAllTasks[static_cast<std::size_t>(cost::synth::uniform(rng, 0, 2))];
      gt.push_back(count_record("i" + std::to_string(i), task, cost::synth::random_count_map(rng, pool, 4, 5)));
    }
    std::vector<PredictionRecord> preds;
    for (int j = 0; j < 16; ++j) {
      const auto& g = gt[static_cast<std::size_t>(cost::synth::uniform(rng, 0, 11))];
      const int kind = cost::synth::uniform(rng, 0, 3);
      if (kind == 0) preds.push_back({g.image_id, g.task, ""});
      else if (kind == 1) preds.push_back({"ghost" + std::to_string(j), g.task, "cat"});
      else preds.push_back({g.image_id, g.task, cost::render_answer(cost::synth::random_count_map(rng, pool, 3, 4), lex())});
    }
    cost::EvalResult r;
    try {
      r = cost::evaluate(gt, preds, {cost::kAllTasks.begin(), cost::kAllTasks.end()}, lex(), 2);
    } catch (const cost::Error&) {
      continue;
    }
    EXPECT_EQ(r.scored + r.excluded + r.unmatched, r.predictions);
  }
}

TEST(Eval, ReportIsIndependentOfJobsAndAggregatesRecompute) {
  std::mt19937 rng(72);
  const auto& pool = cost::synth::thing_nouns();
  std::vector<QARecord> gt;
  std::vector<PredictionRecord> preds;
  for (int i = 0; i < 300; ++i) {
    gt.push_back(count_record("i" + std::to_string(i), TaskKind::panoptic,
                              cost::synth::random_count_map(rng, pool, 5, 6)));
    preds.push_back({gt.back().image_id, TaskKind::panoptic,
                     cost::render_answer(cost::synth::random_count_map(rng, pool, 5, 6), lex())});
  }
  std::shuffle(preds.begin(), preds.end(), rng);
  cost::EvalConfig cfg;
  cfg.tasks = {TaskKind::panoptic};
  const auto one = cost::eval_report_json(cost::evaluate(gt, preds, cfg.tasks, lex(), 1), cfg).dump();
  const auto four = cost::eval_report_json(cost::evaluate(gt, preds, cfg.tasks, lex(), 4), cfg).dump();
  EXPECT_EQ(one, four);

  const auto j = nlohmann::json::parse(one);
  double sum = 0;
  int n = 0;
  for (const auto& row : j["per_image"]["panoptic"])
    if (!row["cs"].is_null()) {
      sum += row["cs"].get<double>();
      ++n;
    }
  EXPECT_DOUBLE_EQ(j["aggregates"]["panoptic"]["cs"].get<double>(), sum / n);
  for (const char* section : {"config_echo", "per_image", "aggregates", "exclusions", "warnings"})
    EXPECT_TRUE(j.contains(section)) << section;
}

TEST(Stats, Histogram) {
  const std::vector<QARecord> two_threes = {
      count_record("a", TaskKind::instance, {{"person", 2}, {"car", 1}}),
      count_record("b", TaskKind::instance, {{"dog", 3}})};
  const auto s = cost::dataset_stats(two_threes, {TaskKind::instance});
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].histogram, (std::map<long long, std::size_t>{{3, 2}}));

  const std::vector<QARecord> tail = {count_record("a", TaskKind::panoptic, {{"car", 2}}),
                                      count_record("b", TaskKind::panoptic, {{"person", 30}})};
  const auto t = cost::dataset_stats(tail, {TaskKind::panoptic});
  EXPECT_EQ(t[0].max, 30);
  EXPECT_GT(t[0].histogram.upper_bound(25)->second, 0u);
  EXPECT_DOUBLE_EQ(t[0].mean, 16.0);

  std::ostringstream csv;
  cost::write_stats_csv(csv, t);
  EXPECT_EQ(csv.str(), "task,total_objects,images\npanoptic,2,1\npanoptic,30,1\n");
}

TEST(Stats, EmptyDatasetIsError) {
  EXPECT_THROW(cost::dataset_stats({}, {TaskKind::panoptic}), cost::Error);
}

TEST(Compare, RowsInInputOrderAndOracleDominates) {
  const auto dir = cost::synth::scratch_dir("compare");
  const std::vector<QARecord> gt = {
      count_record("a", TaskKind::panoptic, {{"person", 2}, {"car", 1}}),
      count_record("b", TaskKind::panoptic, {{"dog", 1}}),
      depth_record("a", {"person", "car"}),
  };
  auto write_preds = [&](const std::string& name, const std::vector<PredictionRecord>& preds) {
    const auto p = dir / name;
    std::ofstream out(p);
    for (const auto& r : preds) out << cost::to_jsonl_line(r) << '\n';
    return p;
  };
  std::vector<PredictionRecord> empty;
  for (const auto& r : gt) empty.push_back({r.image_id, r.task, ""});
  const auto oracle = write_preds("oracle.jsonl", echo(gt));
  const auto same = write_preds("oracle_copy.jsonl", echo(gt));
  const auto blank = write_preds("blank.jsonl", empty);
  const std::vector<TaskKind> all(cost::kAllTasks.begin(), cost::kAllTasks.end());
  const auto rows = cost::compare_models(gt, {oracle, same, blank}, all, lex(), 1);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].model, "oracle");
  EXPECT_EQ(rows[1].model, "oracle_copy");
  EXPECT_EQ(rows[2].model, "blank");

  const auto cols = cost::compare_columns(gt, all);
  ASSERT_EQ(cols.size(), 3u);
  for (const auto& [t, m] : cols) {
    EXPECT_EQ(cost::row_value(rows[0], t, m), cost::row_value(rows[1], t, m));
    const auto o = cost::row_value(rows[0], t, m);
    const auto b = cost::row_value(rows[2], t, m);
    ASSERT_TRUE(o.has_value());
    if (!b) continue;  // undefined for the blank model, nothing to dominate
    if (m == "cs") EXPECT_GT(*o, *b);
    else EXPECT_LT(*o, *b);
  }
  auto j = cost::compare_json(rows, cols);
  for (auto& row : j) {
    row.erase("model");
    row.erase("pred");
  }
  EXPECT_EQ(j[0], j[1]);
  fs::remove_all(dir);
}

TEST(Compare, UnreadableFileIsFailedRow) {
  const std::vector<QARecord> gt = {count_record("a", TaskKind::panoptic, {{"dog", 1}})};
  const auto dir = cost::synth::scratch_dir("compare_fail");
  std::ofstream(dir / "good.jsonl") << cost::to_jsonl_line(PredictionRecord{"a", TaskKind::panoptic, "a dog"}) << '\n';
  const auto rows = cost::compare_models(gt, {dir / "good.jsonl", dir / "absent.jsonl"}, {TaskKind::panoptic}, lex());
  EXPECT_TRUE(rows[0].result.has_value());
  EXPECT_FALSE(rows[1].result.has_value());
  EXPECT_FALSE(rows[1].failure.empty());
  EXPECT_EQ(cost::model_names({"x/m.jsonl", "y/m.jsonl"}), (std::vector<std::string>{"m", "m#2"}));
  fs::remove_all(dir);
}
