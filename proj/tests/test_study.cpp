#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "rtmix/config.hpp"
#include "rtmix/report.hpp"
#include "rtmix/study.hpp"

namespace fs = std::filesystem;

namespace {

rtmix::StudyConfig parse(const std::string& text) {
  std::istringstream in(text);
  return rtmix::parse_config(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("rtmix_test_" + name);
  fs::remove_all(dir);
  return dir;
}

rtmix::StudyConfig small_config(const std::string& preset, const fs::path& out) {
  rtmix::StudyConfig cfg;
  cfg.preset = preset;
  cfg.levels = {2, 4, 8};
  cfg.k = 4;
  cfg.output_dir = out;
  return cfg;
}

}  // namespace

TEST(Config, ParsesAllKeys) {
  const auto cfg = parse(
      "; comment\n[problem]\npreset = variable\ndomain = 0, 0, 2, 1\n"
      "[study]\nlevels = 4, 8\nk = 3\norder = 2.5\n"
      "[options]\nsuperclose = false\ndump_matrices = true\nsolver = iterative\nseed = 17\ntimings = true\n"
      "[output]\ndirectory = some/dir\n");
  EXPECT_EQ(cfg.preset, "variable");
  EXPECT_EQ(cfg.domain, (rtmix::Rectangle{0, 0, 2, 1}));
  EXPECT_EQ(cfg.levels, (std::vector<int>{4, 8}));
  EXPECT_EQ(cfg.k, 3);
  EXPECT_EQ(cfg.expansion_order, 2.5);
  EXPECT_FALSE(cfg.compute_superclose);
  EXPECT_TRUE(cfg.dump_matrices);
  EXPECT_EQ(cfg.solver, rtmix::SolverPath::iterative);
  EXPECT_EQ(cfg.seed, 17u);
  EXPECT_TRUE(cfg.record_timings);
  EXPECT_EQ(cfg.output_dir, fs::path("some/dir"));
  EXPECT_NO_THROW(cfg.validate());
}

TEST(Config, StrictParsing) {
  EXPECT_THROW(parse("[study]\nlevel = 4, 8\n"), rtmix::ConfigError);
  EXPECT_THROW(parse("[extras]\nfoo = 1\n"), rtmix::ConfigError);
  EXPECT_THROW(parse("toplevel = 1\n"), rtmix::ConfigError);
  EXPECT_THROW(parse("[study]\nk = four\n"), rtmix::ConfigError);
  EXPECT_THROW(parse("[study]\nk = 4x\n"), rtmix::ConfigError);
  EXPECT_THROW(parse("[options]\nsuperclose = yes\n"), rtmix::ConfigError);
  EXPECT_THROW(parse("[options]\nsolver = lanczos\n"), rtmix::ConfigError);
  EXPECT_THROW(parse("[options]\nseed = -3\n"), rtmix::ConfigError);
  EXPECT_THROW(parse("[study]\nk = 1\nk = 2\n"), rtmix::ConfigError);
}

TEST(Config, ValidationRejectsBadStudies) {
  auto cfg = parse("[study]\nlevels = 8, 24\n");
  EXPECT_THROW(cfg.validate(), rtmix::ConfigError);
  cfg = parse("[study]\nlevels = 8\n");
  EXPECT_THROW(cfg.validate(), rtmix::ConfigError);
  cfg = parse("[study]\nk = 0\n");
  EXPECT_THROW(cfg.validate(), rtmix::ConfigError);
  cfg = parse("[study]\norder = 0\n");
  EXPECT_THROW(cfg.validate(), rtmix::ConfigError);
  cfg = parse("[study]\nlevels = 1, 2\nk = 3\n");
  EXPECT_THROW(cfg.validate(), rtmix::ConfigError);
  cfg = parse("[problem]\npreset = helmholtz\n");
  EXPECT_THROW(cfg.validate(), rtmix::ConfigError);
  cfg = parse("[problem]\ndomain = 1, 0, 0, 1\n");
  EXPECT_THROW(cfg.validate(), rtmix::ConfigError);
}

TEST(Config, InvalidLevelsRejectedBeforeComputation) {
  auto cfg = small_config("laplace", scratch("bad_levels"));
  cfg.levels = {8, 24};
  EXPECT_THROW(rtmix::run_study(cfg), rtmix::ConfigError);
  EXPECT_FALSE(fs::exists(cfg.output_dir));
}

TEST(Reports, EmptyTable) {
  rtmix::StudyResult result;
  std::ostringstream csv;
  rtmix::write_csv(csv, result.table);
  EXPECT_EQ(csv.str(),
            "index,multiplicity,level_n,h,lambda_h,lambda_extrap,err_raw,err_extrap,order_raw,order_extrap,"
            "superclose,err_u,err_sigma\n");
  const auto json = nlohmann::json::parse(rtmix::study_to_json(result).dump());
  EXPECT_TRUE(json.at("table").at("entries").is_array());
  EXPECT_TRUE(json.at("table").at("entries").empty());
}

TEST(Reports, UnwritablePathNamed) {
  rtmix::StudyResult result;
  const fs::path blocker = scratch("blocker");
  { std::ofstream(blocker) << "file"; }
  try {
    rtmix::emit_reports(result, rtmix::ReportPaths::in(blocker / "sub"));
    FAIL() << "expected failure";
  } catch (const rtmix::Error& e) {
    EXPECT_NE(std::string(e.what()).find("sub"), std::string::npos);
  }
  fs::remove(blocker);
}

class SmallStudy : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { result_ = new rtmix::StudyResult(rtmix::run_study(small_config("laplace", "unused"))); }
  static void TearDownTestSuite() { delete result_; }
  static rtmix::StudyResult* result_;
};
rtmix::StudyResult* SmallStudy::result_ = nullptr;

TEST_F(SmallStudy, TableShape) {
  ASSERT_FALSE(result_->failed) << result_->error;
  EXPECT_EQ(result_->exit_code(), 0);
  const auto& table = result_->table;
  // At n = 8 the split 5 pi^2 pair is not yet resolved as a cluster.
  ASSERT_EQ(table.entries.size(), 4u);
  EXPECT_EQ(table.entries[1].multiplicity(), 1u);
  EXPECT_TRUE(table.entries[0].rows[0].superclose.has_value());
  EXPECT_FALSE(table.entries[1].rows[0].superclose.has_value());
  EXPECT_FALSE(table.entries[2].rows[0].superclose.has_value());
  EXPECT_TRUE(table.entries[3].rows[0].superclose.has_value());
  ASSERT_EQ(result_->levels.size(), 3u);
  EXPECT_EQ(result_->levels[2].num_triangles, 128);
}

TEST_F(SmallStudy, CsvFieldCountIsConstant) {
  std::ostringstream csv;
  rtmix::write_csv(csv, result_->table);
  std::istringstream in(csv.str());
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 12) << line;
    ++lines;
  }
  EXPECT_EQ(lines, 1u + 4u * 3u);
}

// Property: parse(emit(table)) reproduces every value at 12-digit precision.
TEST_F(SmallStudy, JsonRoundTrip) {
  const auto text = rtmix::table_to_json(result_->table).dump();
  const auto back = rtmix::table_from_json(nlohmann::json::parse(text));
  const auto& orig = result_->table;
  ASSERT_EQ(back.entries.size(), orig.entries.size());
  auto same = [](const auto& a, const auto& b) {
    ASSERT_EQ(a.has_value(), b.has_value());
    if (a) { EXPECT_EQ(*a, rtmix::round_report(*b)); }
  };
  auto same_order = [](const auto& a, const auto& b) {
    ASSERT_EQ(a.has_value(), b.has_value());
    if (!a) return;
    EXPECT_EQ(a->saturated, b->saturated);
    if (!a->saturated) { EXPECT_EQ(a->value, rtmix::round_report(b->value)); }
  };
  for (std::size_t e = 0; e < orig.entries.size(); ++e) {
    EXPECT_EQ(back.entries[e].members, orig.entries[e].members);
    EXPECT_EQ(back.entries[e].reference, rtmix::round_report(orig.entries[e].reference));
    EXPECT_EQ(back.entries[e].reference_kind, orig.entries[e].reference_kind);
    for (std::size_t l = 0; l < orig.entries[e].rows.size(); ++l) {
      const auto& r = back.entries[e].rows[l];
      const auto& o = orig.entries[e].rows[l];
      EXPECT_EQ(r.level_n, o.level_n);
      EXPECT_EQ(r.h, rtmix::round_report(o.h));
      EXPECT_EQ(r.lambda_h, rtmix::round_report(o.lambda_h));
      same(r.lambda_extrap, o.lambda_extrap);
      same(r.err_raw, o.err_raw);
      same(r.err_extrap, o.err_extrap);
      same_order(r.order_raw, o.order_raw);
      same_order(r.order_extrap, o.order_extrap);
      same(r.superclose, o.superclose);
      same(r.superclose_unweighted, o.superclose_unweighted);
      same(r.err_u, o.err_u);
      same(r.err_sigma, o.err_sigma);
    }
  }
  // Re-emitting the parsed table is a fixed point.
  EXPECT_EQ(rtmix::table_to_json(back).dump(), text);
}

TEST(Study, ShiftedColumnsEqualLaplacePlusFive) {
  const auto lap = rtmix::run_study(small_config("laplace", "unused"));
  const auto shf = rtmix::run_study(small_config("shifted", "unused"));
  ASSERT_EQ(lap.levels.size(), shf.levels.size());
  for (std::size_t l = 0; l < lap.levels.size(); ++l)
    for (std::size_t i = 0; i < lap.levels[l].eigenvalues.size(); ++i)
      EXPECT_NEAR(shf.levels[l].eigenvalues[i], lap.levels[l].eigenvalues[i] + 5.0,
                  1e-8 * shf.levels[l].eigenvalues[i]);
}

TEST(Study, DeterministicFilesAndMatrixDump) {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  auto cfg = small_config("variable", a);
  cfg.dump_matrices = true;
  cfg.solver = rtmix::SolverPath::iterative;
  rtmix::emit_reports(rtmix::run_study(cfg), rtmix::ReportPaths::in(a));
  cfg.output_dir = b;
  rtmix::emit_reports(rtmix::run_study(cfg), rtmix::ReportPaths::in(b));
  EXPECT_EQ(slurp(a / "convergence.csv"), slurp(b / "convergence.csv"));
  EXPECT_EQ(slurp(a / "report.json"), slurp(b / "report.json"));
  EXPECT_TRUE(fs::exists(a / "matrices" / "M_n4.txt"));
  EXPECT_TRUE(fs::exists(a / "matrices" / "mesh_n8.txt"));
  const auto json = nlohmann::json::parse(slurp(a / "report.json"));
  EXPECT_EQ(json.at("table").at("entries").at(0).at("reference_kind"), "self-referenced");
  EXPECT_FALSE(json.at("levels").at(0).contains("seconds"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Study, FailedStatusMarkedInReports) {
  rtmix::StudyResult result;
  result.failed = true;
  result.error = "level n=16: eigenpair 2 residual out of tolerance";
  rtmix::LevelReport level;
  level.n = 16;
  level.error = result.error;
  result.levels.push_back(level);
  EXPECT_EQ(result.exit_code(), 2);
  const auto json = rtmix::study_to_json(result);
  EXPECT_EQ(json.at("status"), "failed");
  EXPECT_EQ(json.at("error"), result.error);
  EXPECT_EQ(json.at("levels").at(0).at("status"), "failed");
}
