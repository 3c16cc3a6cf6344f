#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"

#ifndef MMPNN_CLI
#error "MMPNN_CLI must name the command-line binary"
#endif

using namespace mmpnn;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string out, err;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("mmpnn_cli_" + std::to_string(::getpid()) + "_" + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string put(const std::string& name, const std::string& content) const {
    write_file(path(name), content);
    return path(name);
  }

  CliResult run(const std::string& args) const {
    const std::string out = path("stdout.txt"), err = path("stderr.txt");
    const std::string cmd = std::string("\"") + MMPNN_CLI + "\" " + args + " >\"" + out + "\" 2>\"" + err + "\"";
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_file(out);
    r.err = read_file(err);
    return r;
  }

 private:
  fs::path dir_;
};

Network pyramid_lmm(std::size_t width) {
  return Network({RealMatrix{{1}, {-1}}, MinPlusMatrix(width, 2, std::vector<double>(2 * width, 0.0)),
                  MaxPlusMatrix(1, width, std::vector<double>(width, 0.0))},
                 ShapeTag::TypeII);
}

std::string abs_csv(std::size_t n) {
  Dataset ds;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
    ds.inputs.push_back({x});
    ds.targets.push_back({std::fabs(x)});
  }
  return dataset_to_csv(ds);
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_F(Cli, ZeroEpochsRewritesCanonicalModel) {
  const Network net = pyramid_lmm(3);
  const auto model = put("in.json", serialize_model(net));
  const auto data = put("d.csv", abs_csv(5));
  const CliResult r = run("train --model " + model + " --data " + data + " --out " + path("out.json") + " --epochs 0");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_file(path("out.json")), serialize_model(net));
  EXPECT_EQ(lines(r.out), (std::vector<std::string>{"# generator=mt19937_64 seed=0", "epoch,loss"}));
}

TEST_F(Cli, TrainPrintsHistoryAndNormalizationEvents) {
  const auto model = put("in.json", serialize_model(pyramid_lmm(8)));
  const auto data = put("d.csv", abs_csv(16));
  const CliResult r = run("train --model " + model + " --data " + data + " --out " + path("out.json") +
                    " --epochs 4 --lr 0.05 --normalize-every 2 --init --seed 7");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 8u);
  EXPECT_EQ(ls[0], "# generator=mt19937_64 seed=7");
  EXPECT_EQ(ls[1], "epoch,loss");
  EXPECT_EQ(ls[3].substr(0, 2), "2,");
  EXPECT_EQ(ls[4], "# normalized epoch=2 outputs_unchanged=true");
  EXPECT_EQ(ls[6].substr(0, 2), "4,");
  EXPECT_EQ(ls[7], "# normalized epoch=4 outputs_unchanged=true");
  EXPECT_NO_THROW(load_model(path("out.json")));
}

TEST_F(Cli, SameSeedGivesIdenticalFiles) {
  const auto model = put("in.json", serialize_model(pyramid_lmm(8)));
  const auto data = put("d.csv", abs_csv(16));
  const std::string common = "train --model " + model + " --data " + data + " --epochs 10 --lr 0.05 --batch 4 --init --seed 3 --out ";
  const CliResult a = run(common + path("a.json"));
  const CliResult b = run(common + path("b.json"));
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(read_file(path("a.json")), read_file(path("b.json")));
  EXPECT_EQ(a.out, b.out);
}

TEST_F(Cli, MismatchedColumnsExitTwo) {
  const auto model = put("in.json", serialize_model(pyramid_lmm(2)));
  const auto data = put("d.csv", "x1,x2,y1\n1,2,3\n");
  const CliResult r = run("train --model " + model + " --data " + data + " --out " + path("o.json"));
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("error[ShapeMismatch]:", 0), 0u) << r.err;
  EXPECT_NE(r.err.find("d.csv"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("o.json")));
}

TEST_F(Cli, BadModelFileNamesLocation) {
  const auto model = put("bad.json", R"({"format_version": 1, "input_dim": 1, "output_dim": 1,
    "shape_tag": "Custom", "layers": [{"kind": "linear", "rows": 1, "cols": 1, "entries": ["x"]}]})");
  const auto data = put("d.csv", "x1\n1\n");
  const CliResult r = run("eval --model " + model + " --data " + data);
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("error[ParseError]:", 0), 0u) << r.err;
  EXPECT_NE(r.err.find("bad.json.layers[0].entries[0]"), std::string::npos) << r.err;
}

TEST_F(Cli, ApproxAbsoluteValue) {
  const auto table = put("t.csv", "x1,f\n-1,1\n-0.5,0.5\n0,0\n0.5,0.5\n1,1\n");
  const CliResult r = run("approx --target " + table + " --box -1:1 --delta 0.5 --lipschitz 1 --out " + path("m.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines(r.out), (std::vector<std::string>{"grid_points=5", "bound=1"}));
  const Network net = load_model(path("m.json"));
  EXPECT_EQ(net.layer(1).out_dim(), 5u);
  EXPECT_EQ(evaluate(net, Vector{-0.5})[0], 0.5);
  EXPECT_TRUE(r.err.empty()) << r.err;
}

TEST_F(Cli, ApproxWarnsWhenLipschitzLooksTooSmall) {
  const auto table = put("t.csv", "x1,f\n-1,2\n0,0\n1,2\n");
  const CliResult r = run("approx --target " + table + " --box -1:1 --delta 1 --lipschitz 1 --out " + path("m.json"));
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("warning"), std::string::npos);
}

TEST_F(Cli, ApproxMissingGridPointExitTwo) {
  const auto table = put("t.csv", "x1,f\n-1,1\n-0.5,0.5\n0.5,0.5\n1,1\n");
  const CliResult r = run("approx --target " + table + " --box -1:1 --delta 0.5 --lipschitz 1 --out " + path("m.json"));
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("error[MissingGridValue]:", 0), 0u) << r.err;
  EXPECT_NE(r.err.find("(0)"), std::string::npos) << r.err;
}

TEST_F(Cli, ApproxFiveDimensionsExitTwo) {
  const auto table = put("t.csv", "x1,x2,x3,x4,x5,f\n0,0,0,0,0,0\n");
  const CliResult r = run("approx --target " + table + " --box 0:1,0:1,0:1,0:1,0:1 --delta 1 --lipschitz 1 --out " +
                    path("m.json"));
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("error[InvalidConfig]:", 0), 0u) << r.err;
}

TEST_F(Cli, EvalIdentityHasZeroLoss) {
  const Network id({RealMatrix::identity(2)});
  const auto model = put("id.json", serialize_model(id));
  const auto data = put("d.csv", "x1,x2,y1,y2\n1,2,1,2\n");
  const CliResult r = run("eval --model " + model + " --data " + data);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines(r.out), (std::vector<std::string>{"y1,y2", "1,2", "# loss mse=0"}));
}

TEST_F(Cli, EvalCensusReportsMultiplies) {
  const auto table = put("t.csv", "x1,f\n-1,1\n0,0\n1,1\n");
  ASSERT_EQ(run("approx --target " + table + " --box -1:1 --delta 1 --lipschitz 1 --out " + path("m.json")).code, 0);
  const auto data = put("d.csv", "x1\n0.25\n");
  const CliResult r = run("eval --model " + path("m.json") + " --data " + data + " --census");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("# census layer=1 kind=minplus multiplies=0 "), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("# census total multiplies=2 nontrivial_multiplies=0 "), std::string::npos) << r.out;
}

TEST_F(Cli, NormalizeKeepsEvalOutputs) {
  tsupport::Rng rng(5);
  const Network net = tsupport::random_type_ii(rng, 2, 4, 2);
  const auto model = put("in.json", serialize_model(net));
  Dataset ds;
  for (int s = 0; s < 40; ++s) ds.inputs.push_back(rng.vector(2, -2, 2));
  ds.targets.assign(ds.inputs.size(), Vector{});
  const auto data = put("d.csv", dataset_to_csv(ds));
  const CliResult n = run("normalize --model " + model + " --data " + data + " --out " + path("n.json"));
  ASSERT_EQ(n.code, 0) << n.err;
  EXPECT_EQ(n.out, "samples=40\n");
  const CliResult before = run("eval --model " + model + " --data " + data);
  const CliResult after = run("eval --model " + path("n.json") + " --data " + data);
  ASSERT_EQ(before.code, 0);
  EXPECT_EQ(before.out, after.out);
}

TEST_F(Cli, CollapseSingleBlockAndBlowup) {
  const Network lmm = collapse(pyramid_lmm(1));
  const auto model = put("in.json", serialize_model(lmm));
  const CliResult r = run("collapse --model " + model + " --out " + path("c.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_file(path("c.json")), serialize_model(lmm));
  EXPECT_EQ(r.out, "minplus_rows=1 groups_per_output=1\n");

  tsupport::Rng rng(11);
  const auto big = put("big.json", serialize_model(tsupport::random_type_ii(rng, 2, 6, 3)));
  const CliResult b = run("collapse --model " + big + " --out " + path("b.json") + " --cap 2");
  EXPECT_EQ(b.code, 3);
  EXPECT_EQ(b.err.rfind("error[Blowup]:", 0), 0u) << b.err;

  const auto type_i = put("t1.json", serialize_model(Network({RealMatrix{{1}}, MaxPlusMatrix{{0}}})));
  EXPECT_EQ(run("collapse --model " + type_i + " --out " + path("x.json")).code, 2);
}

TEST_F(Cli, TranslateRelu) {
  const auto spec = put("s.json", R"({"weights": [[1]], "bias": [-0.5]})");
  const CliResult r = run("translate --kind relu --spec " + spec + " --out " + path("r.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  const Network net = load_model(path("r.json"));
  EXPECT_EQ(evaluate(net, Vector{2})[0], 1.5);
  EXPECT_EQ(run("translate --kind softmax --spec " + spec + " --out " + path("x.json")).code, 2);
}

TEST_F(Cli, UsageErrorsExitTwo) {
  const CliResult r = run("train --model nowhere.json");
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("error[ParseError]:", 0), 0u) << r.err;
  const CliResult missing = run("eval --model " + path("absent.json") + " --data " + path("absent.csv"));
  EXPECT_EQ(missing.code, 2);
  EXPECT_EQ(missing.err.rfind("error[", 0), 0u) << missing.err;
}
