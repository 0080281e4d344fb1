#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ssbm/cli.hpp"
#include "ssbm/ssbm.hpp"

namespace ssbm {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Run r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("ssbm_cli_" + std::string(info->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  static std::string fixture(const std::string& name) {
    return std::string(SSBM_FIXTURE_DIR) + "/" + name;
  }

  fs::path dir_;
};

void expect_manifest(const fs::path& dir, const std::string& command) {
  const auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(m.at("tool"), "ssbm");
  EXPECT_EQ(m.at("command"), command);
  EXPECT_EQ(m.at("version"), kVersion);
  EXPECT_TRUE(m.at("inputs").is_array());
  EXPECT_TRUE(m.at("config").is_object());
  EXPECT_TRUE(m.at("seed").is_number_unsigned());
  EXPECT_TRUE(m.at("argv").is_array());
  EXPECT_EQ(m.at("argv")[0], command);
  EXPECT_GE(m.at("wall_time_seconds").get<double>(), 0.0);
}

TEST_F(Cli, FitTwoCliquesWritesAllArtifacts) {
  const auto r = run({"fit", fixture("two_cliques.edges"), "--undirected", "-c", "2", "--out",
                      path("fit")});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const fs::path out = path("fit");
  expect_manifest(out, "fit");

  const auto params = nlohmann::json::parse(slurp(out / "params.json"));
  EXPECT_EQ(params.at("c"), 2);
  EXPECT_EQ(params.at("n"), 8);
  EXPECT_EQ(params.at("mode"), "undirected");
  EXPECT_EQ(params.at("theta").size(), 2u);
  EXPECT_EQ(params.at("theta")[0].size(), 8u);
  EXPECT_NO_THROW(params_from_json(params));

  const auto image = nlohmann::json::parse(slurp(out / "block_image.json"));
  EXPECT_EQ(image.at("outgoing").size(), 2u);
  EXPECT_EQ(image.at("incoming").size(), 2u);
  EXPECT_EQ(image.at("classification").at("advisory"), true);

  const auto csv = lines(slurp(out / "membership.csv"));
  ASSERT_EQ(csv.size(), 9u);
  EXPECT_EQ(csv[0].rfind("vertex,label_out,label_in", 0), 0u);
  std::map<std::string, std::string> label;
  for (std::size_t k = 1; k < csv.size(); ++k) {
    const auto comma = csv[k].find(',');
    label[csv[k].substr(0, comma)] = csv[k].substr(comma + 1, 1);
  }
  for (const char* v : {"a2", "a3", "a4"}) EXPECT_EQ(label[v], label["a1"]);
  for (const char* v : {"b2", "b3", "b4"}) EXPECT_EQ(label[v], label["b1"]);
  EXPECT_NE(label["a1"], label["b1"]);

  const auto labels = read_labels((out / "partition.labels").string());
  EXPECT_EQ(labels.names.size(), 8u);
}

TEST_F(Cli, FitSingleGroupSucceeds) {
  const auto r = run({"fit", fixture("two_cliques.edges"), "-c", "1", "--out", path("one")});
  EXPECT_EQ(r.code, cli::kOk) << r.err;
  const auto params = nlohmann::json::parse(slurp(fs::path(path("one")) / "params.json"));
  EXPECT_EQ(params.at("c"), 1);
}

TEST_F(Cli, ManifestArgvReproducesOutputs) {
  ASSERT_EQ(run({"fit", fixture("roundtrip.edges"), "-c", "2", "--restarts", "3", "--out",
                 path("first")})
                .code,
            cli::kOk);
  const auto m = nlohmann::json::parse(slurp(fs::path(path("first")) / "manifest.json"));
  auto argv = m.at("argv").get<std::vector<std::string>>();
  // Every default is materialized.
  for (const char* flag : {"--restarts", "--tol", "--max-iters", "--seed", "--init", "--threads"}) {
    EXPECT_NE(std::find(argv.begin(), argv.end(), flag), argv.end()) << flag;
  }
  argv.back() = path("second");
  ASSERT_EQ(run(argv).code, cli::kOk);
  for (const char* file : {"params.json", "membership.csv", "block_image.json", "partition.labels"}) {
    EXPECT_EQ(slurp(fs::path(path("first")) / file), slurp(fs::path(path("second")) / file))
        << file;
  }
}

TEST_F(Cli, SelectWritesTableAndBestFit) {
  const auto r = run({"select", fixture("two_cliques.edges"), "--undirected", "--min-groups", "1",
                      "--max-groups", "3", "--restarts", "2", "--out", path("sel")});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const fs::path out = path("sel");
  expect_manifest(out, "select");
  const auto csv = lines(slurp(out / "mdl.csv"));
  ASSERT_EQ(csv.size(), 4u);
  EXPECT_EQ(csv[0], "groups,data_length,param_length,total_length,log_likelihood,iterations,converged");
  const auto mdl = nlohmann::json::parse(slurp(out / "mdl.json"));
  const int best = mdl.at("best_groups");
  EXPECT_EQ(r.out, "best_groups " + std::to_string(best) + "\n");
  const auto params = nlohmann::json::parse(slurp(out / "params.json"));
  EXPECT_EQ(params.at("c"), best);
  EXPECT_TRUE(fs::exists(out / "membership.csv"));
  EXPECT_TRUE(fs::exists(out / "block_image.json"));
}

TEST_F(Cli, SelectOnPlantedBenchmarkWithSupportCoding) {
  ASSERT_EQ(run({"generate", "--p-in", "0.9", "--seed", "201", "--out", path("gen")}).code,
            cli::kOk);
  const auto r = run({"select", path("gen") + "/graph.edges", "--undirected", "--min-groups",
                      "2", "--max-groups", "6", "--restarts", "3", "--zero-entries", "skip",
                      "--coding-floor", "1e-6", "--out", path("sel")});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_EQ(r.out, "best_groups 4\n");
}

TEST_F(Cli, SelectRejectsInvertedRange) {
  const auto r = run({"select", fixture("two_cliques.edges"), "--min-groups", "3",
                      "--max-groups", "2"});
  EXPECT_EQ(r.code, cli::kUsage);
  EXPECT_FALSE(r.err.empty());
}

TEST_F(Cli, GenerateIsReproducible) {
  ASSERT_EQ(run({"generate", "--seed", "3", "--out", path("a")}).code, cli::kOk);
  ASSERT_EQ(run({"generate", "--seed", "3", "--out", path("b")}).code, cli::kOk);
  ASSERT_EQ(run({"generate", "--seed", "4", "--out", path("c")}).code, cli::kOk);
  EXPECT_EQ(slurp(path("a") + "/graph.edges"), slurp(path("b") + "/graph.edges"));
  EXPECT_NE(slurp(path("a") + "/graph.edges"), slurp(path("c") + "/graph.edges"));
  expect_manifest(path("a"), "generate");
  const auto g = read_edge_list(path("a") + "/graph.edges", false);
  const auto truth = read_labels(path("a") + "/truth.labels");
  EXPECT_EQ(truth.names.size(), g.vertex_count());
}

TEST_F(Cli, GenerateDefaultStatistics) {
  ASSERT_EQ(run({"generate", "--seed", "8", "--out", path("g")}).code, cli::kOk);
  const auto g = read_edge_list(path("g") + "/graph.edges", false);
  const auto stats = signed_degree_stats(g);
  double total = 0.0;
  for (const auto& s : stats) total += s.total;
  EXPECT_EQ(g.vertex_count(), 128u);
  EXPECT_NEAR(total / 128.0, 16.0, 2.0);
}

TEST_F(Cli, GenerateMixedRecordsDesign) {
  ASSERT_EQ(run({"generate", "--mode", "mixed", "--seed", "2", "--out", path("m")}).code,
            cli::kOk);
  const auto m = nlohmann::json::parse(slurp(path("m") + "/manifest.json"));
  EXPECT_EQ(m.at("config").at("design").at("rules").size(), 7u);
  EXPECT_TRUE(read_edge_list(path("m") + "/graph.edges", true).directed());
}

TEST_F(Cli, GenerateRejectsInvalidProbability) {
  EXPECT_EQ(run({"generate", "--p-in", "1.5", "--out", path("x")}).code, cli::kUsage);
  EXPECT_EQ(run({"generate", "--mode", "sideways"}).code, cli::kUsage);
  EXPECT_FALSE(fs::exists(path("x")));
}

TEST_F(Cli, EvalIdenticalAndPermutedLabels) {
  {
    std::ofstream a(path("a.labels")), b(path("b.labels"));
    a << "x 0\ny 0\nz 1\nw 1\n";
    b << "w 7\nz 7\ny 3\nx 3\n";
  }
  auto r = run({"eval", path("a.labels"), path("a.labels")});
  EXPECT_EQ(r.code, cli::kOk);
  EXPECT_EQ(r.out, "1\n");
  r = run({"eval", path("a.labels"), path("b.labels")});
  EXPECT_EQ(r.code, cli::kOk);
  EXPECT_EQ(r.out, "1\n");
}

TEST_F(Cli, EvalMismatchedVertexSetsIsDataError) {
  {
    std::ofstream a(path("a.labels")), b(path("b.labels"));
    a << "x 0\ny 1\n";
    b << "x 0\nq 1\n";
  }
  const auto r = run({"eval", path("a.labels"), path("b.labels")});
  EXPECT_EQ(r.code, cli::kData);
  EXPECT_NE(r.err.find("missing"), std::string::npos);
}

TEST_F(Cli, SweepSingleCellEqualsGenerateFitEval) {
  const auto s = run({"sweep", "--grid", "p_in=0.5;p_plus=0.25;p_minus=0.25", "--realizations",
                      "1", "--seed", "12", "--restarts", "3", "--out", path("sw")});
  ASSERT_EQ(s.code, cli::kOk) << s.err;
  const auto csv = lines(slurp(path("sw") + "/sweep.csv"));
  ASSERT_EQ(csv.size(), 2u);
  EXPECT_EQ(csv[0], "p_in,p_plus,p_minus,realizations,mean_nmi,std_nmi");
  expect_manifest(path("sw"), "sweep");

  ASSERT_EQ(run({"generate", "--p-in", "0.5", "--p-plus", "0.25", "--p-minus", "0.25", "--seed",
                 "12", "--out", path("gen")})
                .code,
            cli::kOk);
  ASSERT_EQ(run({"fit", path("gen") + "/graph.edges", "--undirected", "-c", "4", "--seed", "12",
                 "--restarts", "3", "--out", path("fit")})
                .code,
            cli::kOk);
  const auto e = run({"eval", path("gen") + "/truth.labels", path("fit") + "/partition.labels"});
  ASSERT_EQ(e.code, cli::kOk);
  const std::string nmi_text = e.out.substr(0, e.out.size() - 1);
  EXPECT_EQ(csv[1], "0.5,0.25,0.25,1," + nmi_text + ",0");
}

TEST_F(Cli, SweepTrendAcrossCohesion) {
  const auto s = run({"sweep", "--grid", "p_in=0.9,0.5,0.1", "--realizations", "10", "--seed",
                      "1", "--restarts", "3", "--out", path("sw")});
  ASSERT_EQ(s.code, cli::kOk) << s.err;
  const auto csv = lines(s.out);
  ASSERT_EQ(csv.size(), 4u);
  std::vector<double> means;
  for (std::size_t k = 1; k < csv.size(); ++k) {
    std::stringstream row(csv[k]);
    std::string field;
    for (int f = 0; f < 5; ++f) std::getline(row, field, ',');
    means.push_back(std::stod(field));
  }
  // Recovery stays near perfect and does not improve as cohesion drops.
  for (double m : means) EXPECT_GE(m, 0.95);
  EXPECT_GE(means[0] + 0.02, means[1]);
  EXPECT_GE(means[1] + 0.02, means[2]);
}

TEST_F(Cli, SweepRejectsMalformedGrid) {
  for (const char* grid : {"p_in", "p_in=", "p_in=0.5,x", "q=0.5", "p_in=0.5;p_in=0.6", "",
                           "p_in=2"}) {
    EXPECT_EQ(run({"sweep", "--grid", grid, "--out", path("bad")}).code, cli::kUsage) << grid;
  }
}

TEST_F(Cli, UnreadableGraphIsDataError) {
  const auto r = run({"fit", path("missing.edges"), "-c", "2", "--out", path("o")});
  EXPECT_EQ(r.code, cli::kData);
  EXPECT_NE(r.err.find("missing.edges"), std::string::npos);
}

TEST_F(Cli, MalformedGraphIsDataError) {
  {
    std::ofstream bad(path("bad.edges"));
    bad << "a b 1\na b\n";
  }
  const auto r = run({"fit", path("bad.edges"), "-c", "1", "--out", path("o")});
  EXPECT_EQ(r.code, cli::kData);
  EXPECT_NE(r.err.find("line 2"), std::string::npos);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, cli::kUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kUsage);
  EXPECT_EQ(run({"fit", fixture("two_cliques.edges")}).code, cli::kUsage);
  EXPECT_EQ(run({"fit", fixture("two_cliques.edges"), "-c", "0"}).code, cli::kUsage);
  EXPECT_EQ(run({"fit", fixture("two_cliques.edges"), "-c", "9", "--out", path("o")}).code,
            cli::kUsage);
  EXPECT_EQ(run({"fit", fixture("two_cliques.edges"), "-c", "2", "--tol", "-1"}).code,
            cli::kUsage);
  EXPECT_EQ(run({"--help"}).code, cli::kOk);
}

TEST_F(Cli, NonConvergenceIsReportedAndOptionallyFatal) {
  auto r = run({"fit", fixture("roundtrip.edges"), "-c", "3", "--init", "random", "--max-iters",
                "1", "--out", path("a")});
  EXPECT_EQ(r.code, cli::kOk);
  EXPECT_NE(r.err.find("warning"), std::string::npos);
  r = run({"fit", fixture("roundtrip.edges"), "-c", "3", "--init", "random", "--max-iters", "1",
           "--require-converged", "--out", path("b")});
  EXPECT_EQ(r.code, cli::kConvergence);
}

TEST_F(Cli, ThreadsFromEnvironment) {
  ::setenv("SSBM_THREADS", "2", 1);
  ASSERT_EQ(run({"fit", fixture("two_cliques.edges"), "-c", "2", "--out", path("t")}).code,
            cli::kOk);
  const auto m = nlohmann::json::parse(slurp(path("t") + "/manifest.json"));
  EXPECT_EQ(m.at("config").at("threads"), 2);
  ::setenv("SSBM_THREADS", "zero", 1);
  EXPECT_EQ(run({"fit", fixture("two_cliques.edges"), "-c", "2", "--out", path("u")}).code,
            cli::kUsage);
  ::unsetenv("SSBM_THREADS");
}

}  // namespace
}  // namespace ssbm
