#include "arpen/error.hpp"
#include "arpen/io.hpp"
#include "arpen/simlab.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace arpen;
namespace fs = std::filesystem;

namespace {

class TempDir : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("arpen_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }
  static std::string slurp(const std::string& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  }

  fs::path dir_;
};

int cli(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  args.insert(args.begin(), "arpen");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

TEST(ParseCsv, MinimalFile) {
  std::istringstream in("y,x\n1,2\n3,4.5\n-1e-3,7\n");
  const auto d = parse_csv(in, "mem", "y");
  EXPECT_EQ(d.size(), 3);
  EXPECT_EQ(d.covariates(), 1);
  EXPECT_DOUBLE_EQ(d.y[2], -1e-3);
  EXPECT_DOUBLE_EQ(d.x(1, 0), 4.5);
  EXPECT_EQ(d.column_name(0), "x");
}

TEST(ParseCsv, SelectsAndOrdersCovariates) {
  std::istringstream in("a,y,b,c\r\n1,2,3,4\r\n5,6,7,8\r\n");
  const auto d = parse_csv(in, "mem", "y", {"c", "a"});
  EXPECT_EQ(d.column_names, (std::vector<std::string>{"c", "a"}));
  EXPECT_DOUBLE_EQ(d.x(1, 0), 8.0);
  EXPECT_DOUBLE_EQ(d.x(1, 1), 5.0);
}

TEST(ParseCsv, BlankCellNamesRowAndColumn) {
  std::istringstream in("y,x1,x2\n1,2,3\n4,,6\n");
  try {
    parse_csv(in, "data.csv", "y");
    FAIL();
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("x1"), std::string::npos) << msg;
  }
}

TEST(ParseCsv, Errors) {
  std::istringstream missing("y,x\n1,2\n");
  EXPECT_THROW(parse_csv(missing, "m", "y", {"z"}), DataError);
  std::istringstream bad("y,x\n1,abc\n");
  EXPECT_THROW(parse_csv(bad, "m", "y"), DataError);
  std::istringstream comma_decimal("y,x\n1,2;5\n");
  EXPECT_THROW(parse_csv(comma_decimal, "m", "y"), DataError);
  std::istringstream ragged("y,x\n1,2,3\n");
  EXPECT_THROW(parse_csv(ragged, "m", "y"), DataError);
  std::istringstream empty("");
  EXPECT_THROW(parse_csv(empty, "m", "y"), DataError);
  std::istringstream header_only("y,x\n");
  EXPECT_THROW(parse_csv(header_only, "m", "y"), DataError);
  EXPECT_THROW(ingest_csv("/nonexistent/file.csv", "y"), DataError);
}

TEST_F(TempDir, SimulatedDatasetRoundTripsBitwise) {
  SimCaseConfig c;
  c.nu = 3.0;
  const auto sim = generate_case(c, 7);
  const std::string p = path("sim.csv");
  write_dataset_csv(sim.data, p);
  const auto back = ingest_csv(p, "y");
  EXPECT_EQ(back.y, sim.data.y);
  EXPECT_EQ(back.x, sim.data.x);
  EXPECT_EQ(back.column_names, sim.data.column_names);
}

TEST_F(TempDir, AtomicWriteLeavesNoTemporary) {
  const std::string p = path("report.txt");
  write_file_atomic(p, "first\n");
  write_file_atomic(p, "second\n");
  EXPECT_EQ(slurp(p), "second\n");
  int files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir_)) ++files;
  EXPECT_EQ(files, 1);
}

TEST(Config, JsonOverlayAndValidation) {
  RunConfig c;
  apply_config_json(c, R"({"command":"tune","data":"d.csv","covariates":"a, b","family":"t","nu":3,
                           "penalty":"bridge","grid":{"lambda":{"from":0,"to":1,"step":0.5},"gamma":[0.5,1.0]},
                           "p_max":2,"format":"csv"})");
  EXPECT_EQ(c.command, Command::Tune);
  EXPECT_EQ(c.covariates, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(c.model.family.kind, Family::TFixed);
  EXPECT_DOUBLE_EQ(c.model.family.nu, 3.0);
  EXPECT_EQ(c.penalty.kind, PenaltyKind::Bridge);
  EXPECT_EQ(c.grid.lambda_grid.size(), 3u);
  EXPECT_EQ(c.output_format, ReportFormat::Csv);
  EXPECT_NO_THROW(c.validate());

  apply_config_json(c, R"({"family":"normal"})");
  EXPECT_EQ(c.model.family.kind, Family::Normal);

  RunConfig d;
  EXPECT_THROW(d.validate(), ConfigError);  // fit without data
  EXPECT_THROW(apply_config_json(d, "{not json"), ConfigError);
  EXPECT_THROW(apply_config_json(d, R"({"format":"xml"})"), ConfigError);
  EXPECT_THROW(apply_config_json(d, R"({"ar_order":"two"})"), ConfigError);
}

TEST(ExitCodes, Mapping) {
  EXPECT_EQ(exit_code(ErrorKind::Config), 2);
  EXPECT_EQ(exit_code(ErrorKind::Data), 3);
  EXPECT_EQ(exit_code(ErrorKind::Dimension), 3);
  EXPECT_EQ(exit_code(ErrorKind::Numerical), 4);
}

TEST_F(TempDir, CliFitReportsParametersAndSigns) {
  SimCaseConfig c;
  c.n = 120;
  auto sim = generate_case(c, 1);
  sim.data.column_names = {"LY", "LPRICE", "x3", "x4", "CDD", "x6", "x7", "HDD"};
  sim.data.response_name = "LKWH";
  write_dataset_csv(sim.data, path("elec.csv"));
  std::string out, err;
  const int code = cli({"fit", "--data", path("elec.csv"), "--response", "LKWH", "--ar-order", "1", "--family",
                        "t", "--nu", "10", "--penalty", "scad", "--lambda", "0.3", "--intercept", "--out",
                        path("fit.csv"), "--format", "csv"},
                       &out, &err);
  ASSERT_EQ(code, 0) << err;
  EXPECT_NE(out.find("== parameters =="), std::string::npos);
  EXPECT_NE(out.find("(intercept)"), std::string::npos);
  EXPECT_NE(out.find("LY: expected positive"), std::string::npos);
  EXPECT_NE(out.find("LPRICE: expected negative"), std::string::npos);
  const std::string file = slurp(path("fit.csv"));
  EXPECT_NE(file.find("# arpen "), std::string::npos);
  EXPECT_NE(file.find("Parameter,Estimate,SE,Lower,Upper,Note"), std::string::npos);
}

TEST_F(TempDir, CliExitCodes) {
  std::string err;
  EXPECT_EQ(cli({"fit"}, nullptr, &err), 2);
  EXPECT_NE(err.find("--data"), std::string::npos);
  EXPECT_EQ(cli({"bogus"}), 2);
  EXPECT_EQ(cli({"fit", "--data", path("missing.csv")}, nullptr, &err), 3);
  EXPECT_NE(err.find("missing.csv"), std::string::npos);
  EXPECT_EQ(cli({"fit", "--data", write("blank.csv", "y,x\n1,\n2,3\n")}), 3);
  EXPECT_EQ(cli({"fit", "--data", write("short.csv", "y,x\n1,2\n2,3\n3,1\n"), "--ar-order", "1"}), 3);
  EXPECT_EQ(cli({"fit", "--config", path("nope.json")}), 2);
  EXPECT_EQ(cli({"fit", "--data", write("ok.csv", "y,x\n1,2\n2,3\n3,1\n4,4\n"), "--penalty", "scad", "--alpha",
                 "1.5", "--lambda", "1"}),
            2);
  EXPECT_EQ(cli({"fit", "--family", "cauchy"}), 2);
  // Duplicate column makes the design singular.
  EXPECT_EQ(cli({"fit", "--data", write("sing.csv", "y,a,b\n1,1,2\n2,2,4\n3,3,6\n5,4,8\n6,5,10\n")}), 4);
}

TEST_F(TempDir, CliFlagsOverrideConfigFile) {
  write("run.json", R"({"command":"simulate","reps":2,"seed":5,"simulate":{"n":60},"p_max":1,
                        "grid":{"lambda":[0,0.5],"gamma":[1.0],"lambda2":[0]},"threads":1,
                        "intervals":false})");
  std::string a, b;
  ASSERT_EQ(cli({"simulate", "--config", path("run.json"), "--reps", "1"}, &a), 0);
  EXPECT_NE(a.find("1 of 1 replications completed"), std::string::npos) << a;
  EXPECT_NE(a.find("\"seed\":5"), std::string::npos);
  ASSERT_EQ(cli({"simulate", "--config", path("run.json"), "--seed", "6"}, &b), 0);
  EXPECT_NE(b.find("seed: 6"), std::string::npos);
}

TEST_F(TempDir, SimulateReportsAreByteIdentical) {
  write("run.json", R"({"reps":3,"simulate":{"n":80},"p_max":1,"grid":{"lambda":[0,0.5,1],"gamma":[0.5,1.0],
                        "lambda2":[0,1]}})");
  ASSERT_EQ(cli({"simulate", "--config", path("run.json"), "--out", path("a.txt"), "--threads", "1"}), 0);
  ASSERT_EQ(cli({"simulate", "--config", path("run.json"), "--out", path("b.txt"), "--threads", "2"}), 0);
  const std::string a = slurp(path("a.txt"));
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(path("b.txt")));
  EXPECT_NE(a.find("Cor.fit"), std::string::npos);
}

TEST_F(TempDir, TuneAndSelectOrderCommands) {
  SimCaseConfig c;
  c.n = 100;
  write_dataset_csv(generate_case(c, 2).data, path("d.csv"));
  std::string out, err;
  ASSERT_EQ(cli({"tune", "--data", path("d.csv"), "--ar-order", "1", "--penalty", "lasso"}, &out, &err), 0) << err;
  EXPECT_NE(out.find("== tuning grid =="), std::string::npos);
  EXPECT_NE(out.find("selected lasso"), std::string::npos);
  ASSERT_EQ(cli({"select-order", "--data", path("d.csv"), "--penalty", "none", "--p-max", "3"}, &out, &err), 0)
      << err;
  EXPECT_NE(out.find("== order selection =="), std::string::npos);
  EXPECT_NE(out.find("chosen AR order"), std::string::npos);
}

TEST(Render, CsvSectionsAreCommented) {
  Report r;
  r.header = {"arpen test"};
  ReportSection s;
  s.title = "demo";
  s.table.header = {"a", "b"};
  s.table.add({"1", "x,y"});
  s.notes = {"note"};
  r.sections.push_back(s);
  r.warnings = {"careful"};
  const std::string csv = render(r, ReportFormat::Csv);
  EXPECT_EQ(csv, "# arpen test\n\n# section: demo\na,b\n1,\"x,y\"\n# note\n\n# warning: careful\n");
}

}  // namespace
