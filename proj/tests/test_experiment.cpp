#include <gtest/gtest.h>

#include <sstream>

#include "cli_pipeline.hpp"
#include "covr/experiment.hpp"

namespace covr {
namespace {

PipelineConfig small_config() {
  PipelineConfig cfg;
  cfg.data.n_queries = 20;
  cfg.data.n_docs = 160;
  cfg.heldout = 5;
  cfg.training.epochs = 5;
  return cfg;
}

TEST(Ablation, SingleConfigGridGivesOneRow) {
  auto rows = experiment_ablation(small_config(), {{"only", CoverageConfig{}, 0.1}});
  ASSERT_EQ(rows.size(), 1u);
  std::ostringstream out;
  write_ablation_table(rows, out);
  std::size_t lines = 0;
  for (char ch : out.str()) lines += ch == '\n';
  EXPECT_EQ(lines, 2u);  // header + row
  EXPECT_NE(out.str().find("only"), std::string::npos);
}

TEST(Ablation, DefaultGridShape) {
  auto grid = default_ablation_grid();
  ASSERT_EQ(grid.size(), 6u);
  EXPECT_EQ(grid[3].name, "reversed");
  std::vector<double> lambdas;
  for (const auto& v : grid) {
    if (v.name.rfind("lambda", 0) == 0 || v.name == "default") lambdas.push_back(v.lambda_cd);
  }
  EXPECT_EQ(lambdas, (std::vector<double>{0.1, 0.0, 0.25}));
}

TEST(Ablation, VariantsShareTheUntrainedBaseline) {
  auto rows = experiment_ablation(small_config(), {{"a", CoverageConfig{}, 0.1}, {"b", CoverageConfig::reversed(), 0.1}});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].base_cov, rows[1].base_cov);
  EXPECT_EQ(rows[0].base_alpha_ndcg, rows[1].base_alpha_ndcg);
}

TEST(FormatRange, Bounds) {
  EXPECT_EQ(format_range(CoverageRange::parse("0.5:1.0")), "[0.5, 1]");
  EXPECT_EQ(format_range(CoverageRange::parse("0.5:0.75)")), "[0.5, 0.75)");
  EXPECT_EQ(format_range(CoverageRange::parse(":0")), "(-inf, 0]");
}

TEST(Pipeline, WorkerCountDoesNotChangeResults) {
  auto cfg = small_config();
  auto one = run_coverage_pipeline(cfg);
  cfg.workers = 4;
  auto four = run_coverage_pipeline(cfg);
  EXPECT_EQ(one.encoder.params, four.encoder.params);
  EXPECT_EQ(one.batch_losses, four.batch_losses);
  EXPECT_EQ(one.trained.mean.coverage, four.trained.mean.coverage);
}

TEST(Pipeline, CliOutputsIdenticalAcrossRunsAndThreads) {
  auto a = testing::run_pipeline(testing::scratch_dir("det-a"), 3, 1);
  auto b = testing::run_pipeline(testing::scratch_dir("det-b"), 3, 1);
  auto c = testing::run_pipeline(testing::scratch_dir("det-c"), 3, 4);
  ASSERT_TRUE(a.count("eval.tsv"));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
}

}  // namespace
}  // namespace covr
