// Copyright 2026 The rvvlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rvvlab/commands.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "golden.hpp"

namespace rvvlab::cli {
namespace {

namespace fs = std::filesystem;
using testing::expect_golden;
using testing::read_file;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           ("rvvlab_cli_" + std::string(info->name()) + "_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write(const std::string& name, const std::string& text) const {
    const std::string p = path(name);
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }

  void write_matrix_file(const std::string& name, const Matrix& m) const {
    std::ofstream os(path(name), std::ios::binary);
    write_matrix(os, m);
  }

  Context context(RunConfig config = {}) { return Context(std::move(config), out_, err_); }

  std::ostringstream out_, err_;
  fs::path dir_;
};

RunConfig with(std::initializer_list<std::pair<const char*, const char*>> keys) {
  RunConfig c;
  for (const auto& [k, v] : keys) c.set(k, v);
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// configuration

TEST(ConfigTest, DefaultsValidateAndRoundTrip) {
  const RunConfig c;
  EXPECT_NO_THROW(c.validate());
  std::istringstream in(format_config(c));
  EXPECT_EQ(format_config(parse_config(in)), format_config(c));
}

TEST(ConfigTest, ParsesKeysCommentsAndCacheLevels) {
  std::istringstream in(
      "# comment\n"
      "machine.vlen = 256\n"
      "kernel.mr = 16   # two lmul4 groups\n"
      "\n"
      "cache.levels = 4\n"
      "cache.l4.size = 134217728\n"
      "cache.l4.line = 64\n"
      "cache.l4.assoc = 16\n"
      "seed=7\n");
  const RunConfig c = parse_config(in);
  EXPECT_EQ(c.machine.vlen, 256u);
  EXPECT_EQ(c.kernel.vlen, 256u);
  EXPECT_EQ(c.kernel.mr, 16u);
  ASSERT_EQ(c.cache.levels.size(), 4u);
  EXPECT_EQ(c.cache.levels[3].name, "L4");
  EXPECT_EQ(c.cache.levels[3].size, 134217728u);
  EXPECT_EQ(c.seed, 7u);
}

TEST(ConfigTest, RejectsUnknownKeysAndInvalidValues) {
  const auto fails = [](const std::string& text, const std::string& needle) {
    std::istringstream in(text);
    try {
      parse_config(in);
      ADD_FAILURE() << "accepted: " << text;
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  fails("seed = 1\nfoo.bar = 1\n", "config line 2: foo.bar: unknown");
  fails("seed\n", "expected key = value");
  fails("seed = -1\n", "non-negative integer");
  fails("kernel.variant = lmul2\n", "lmul1 or lmul4");
  fails("cache.l4.size = 1\n", "set cache.levels first");
  fails("cache.l1.ways = 2\n", "unknown cache field");
  fails("cache.levels = 9\n", "1 to 8");
  // Cross-module invariants are checked at load.
  fails("machine.vlen = 100\n", "");
  fails("machine.vlen = 256\n", "mr=8 is not a multiple of vlmax=16");
  fails("kernel.sew = 32\n", "sew must be 64");
  fails("blocking.mc = 60\n", "multiple of mr");
  fails("cache.l1.size = 1000\n", "");
  fails("limits.max_instructions = 0\n", "positive");
  fails("lu.block = 0\n", "positive");
}

TEST(ConfigTest, SampleConfigLoads) {
  std::ifstream in(std::string(RVVLAB_TEST_DIR) + "/../samples/example.conf");
  ASSERT_TRUE(in);
  const RunConfig c = parse_config(in);
  EXPECT_EQ(c.machine.vlen, 256u);
  EXPECT_EQ(c.seed, 42u);
}

// ---------------------------------------------------------------------------
// transpile

TEST_F(CliTest, TranspileKernelFileReparses) {
  MicroKernelParams p;
  p.variant = KernelVariant::lmul1;
  const std::string in = write("k.s", ukernel_source(p));
  const std::string out = path("k.th.s");
  auto ctx = context();
  ASSERT_EQ(cmd_transpile(ctx, {in, out}), kExitOk) << err_.str();
  EXPECT_EQ(err_.str(), "");
  const auto back = parse_program(read_file(out), Dialect::rvv0_7);
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(*back.program, *transpile_program(gen_ukernel(p)).program);
}

TEST_F(CliTest, TranspileToStdout) {
  auto ctx = context();
  EXPECT_EQ(cmd_transpile(ctx, {write("b.s", "vsetvli t0, a0, e64, m1\nvle64.v v1, (a0)\n"), ""}),
            kExitOk);
  EXPECT_EQ(out_.str(), "th.vsetvli t0, a0, e64, m1\nth.vle.v v1, (a0)\n");
}

TEST_F(CliTest, TranspileDiagnosticsGoToStderr) {
  auto ctx = context();
  const std::string a = write("a.s", "vle64.v v1, (a0)\n");
  // No vsetvli reaches the load, so its SEW is unknown.
  EXPECT_EQ(cmd_transpile(ctx, {a, ""}), kExitUsage);
  EXPECT_EQ(out_.str(), "");
  EXPECT_NE(err_.str().find(a + ":1:"), std::string::npos) << err_.str();
}

TEST_F(CliTest, TranspileRejectsOldDialectInput) {
  auto ctx = context();
  EXPECT_EQ(cmd_transpile(ctx, {write("t.s", "th.vle.v v8, (a0)\n"), path("o.s")}), kExitUsage);
  EXPECT_NE(err_.str().find("wrong dialect"), std::string::npos) << err_.str();
  EXPECT_FALSE(fs::exists(path("o.s")));
}

TEST_F(CliTest, TranspileEmptyFile) {
  auto ctx = context();
  const std::string out = path("o.s");
  EXPECT_EQ(cmd_transpile(ctx, {write("e.s", ""), out}), kExitOk);
  ASSERT_TRUE(fs::exists(out));
  EXPECT_EQ(read_file(out), "");
  EXPECT_EQ(cmd_transpile(ctx, {path("missing.s"), out}), kExitUsage);
  EXPECT_NE(err_.str().find("cannot open"), std::string::npos);
}

TEST_F(CliTest, KernelCommand) {
  auto ctx = context();
  EXPECT_EQ(cmd_kernel(ctx, {KernelVariant::lmul4, Dialect::rvv1_0, ""}), kExitOk);
  MicroKernelParams p;
  EXPECT_EQ(out_.str(), ukernel_source(p));
  out_.str("");
  EXPECT_EQ(cmd_kernel(ctx, {KernelVariant::lmul4, Dialect::rvv0_7, ""}), kExitOk);
  EXPECT_EQ(out_.str(), print_program(*transpile_program(gen_ukernel(p)).program, Dialect::rvv0_7));
}

// ---------------------------------------------------------------------------
// gemm

TEST_F(CliTest, GemmLmul4Passes) {
  auto ctx = context();
  ASSERT_EQ(cmd_gemm(ctx, {64, 64, 64, "lmul4", {}, {}, {}, {}}), kExitOk) << err_.str();
  const auto j = ctx.report.json();
  ASSERT_EQ(j["gemm"].size(), 1u);
  EXPECT_LE(j["gemm"][0]["max_relative_error"].get<double>(), std::ldexp(1.0, -40));
  EXPECT_TRUE(j["gemm"][0]["passed"].get<bool>());
  EXPECT_TRUE(j["passed"].get<bool>());
}

TEST_F(CliTest, GemmBothVariantsReportFourfoldRatio) {
  auto ctx = context();
  ASSERT_EQ(cmd_gemm(ctx, {64, 64, 64, "both", {}, {}, {}, {}}), kExitOk) << err_.str();
  const auto j = ctx.report.json();
  const auto& counts = j["instruction_counts"];
  EXPECT_EQ(counts["vector_op_ratio"].get<double>(), 4.0);
  EXPECT_TRUE(counts["results_identical"].get<bool>());
  // Every count in the report is the one recorded for that variant's run.
  EXPECT_EQ(counts["lmul1"]["vector_ops"], j["gemm"][0]["stats"]["vector_ops"]);
  EXPECT_EQ(counts["lmul4"]["vector_ops"], j["gemm"][1]["stats"]["vector_ops"]);
  EXPECT_NE(out_.str().find("bit-identical"), std::string::npos);
  EXPECT_NE(out_.str().find("ratio 4.000x"), std::string::npos);
}

TEST_F(CliTest, GemmZeroDimensionIsAShapeError) {
  auto ctx = context();
  EXPECT_EQ(cmd_gemm(ctx, {0, 64, 64, "lmul4", {}, {}, {}, {}}), kExitUsage);
  EXPECT_NE(err_.str().find("shape error"), std::string::npos) << err_.str();
  EXPECT_EQ(cmd_gemm(ctx, {4, 4, 4, "lmul2", {}, {}, {}, {}}), kExitUsage);
}

TEST_F(CliTest, GemmWithMatrixFiles) {
  CounterRng rng(9);
  const Matrix a = random_matrix(13, 7, rng), b = random_matrix(7, 5, rng),
               c = random_matrix(13, 5, rng);
  write_matrix_file("a.bin", a);
  write_matrix_file("b.bin", b);
  write_matrix_file("c.bin", c);
  auto ctx = context();
  ASSERT_EQ(cmd_gemm(ctx, {1, 1, 1, "lmul1", path("a.bin"), path("b.bin"), path("c.bin"),
                           path("out.bin")}),
            kExitOk)
      << err_.str();
  std::ifstream in(path("out.bin"), std::ios::binary);
  EXPECT_TRUE(bit_identical(read_matrix(in), gemm_ref(a, b, c)));

  write_matrix_file("bad.bin", random_matrix(6, 5, rng));
  EXPECT_EQ(cmd_gemm(ctx, {1, 1, 1, "lmul1", path("a.bin"), path("bad.bin"), {}, {}}), kExitUsage);
  write("junk.bin", "not a matrix");
  EXPECT_EQ(cmd_gemm(ctx, {1, 1, 1, "lmul1", path("junk.bin"), {}, {}, {}}), kExitUsage);
  EXPECT_NE(err_.str().find("junk.bin"), std::string::npos);
}

TEST_F(CliTest, GemmBudgetExhaustionIsAFailure) {
  auto ctx = context(with({{"limits.max_instructions", "50"}}));
  EXPECT_EQ(cmd_gemm(ctx, {8, 4, 8, "lmul4", {}, {}, {}, {}}), kExitFailed);
  EXPECT_NE(err_.str().find("simulation fault"), std::string::npos) << err_.str();
}

TEST_F(CliTest, GemmVerificationFailureNamesTheWorstElement) {
  // NaN never compares within tolerance, so the check must fail and say where.
  Matrix a = Matrix::identity(8);
  a(5, 5) = std::nan("");
  write_matrix_file("a.bin", a);
  auto ctx = context();
  EXPECT_EQ(cmd_gemm(ctx, {1, 1, 1, "lmul4", path("a.bin"), {}, {}, {}}), kExitFailed);
  EXPECT_NE(out_.str().find("worst element C(5, "), std::string::npos) << out_.str();
  EXPECT_FALSE(ctx.report.passed());
}

// ---------------------------------------------------------------------------
// lu

TEST_F(CliTest, LuOrderOneHasZeroResidual) {
  auto ctx = context();
  ASSERT_EQ(cmd_lu(ctx, {1, {}, false}), kExitOk);
  EXPECT_EQ(ctx.report.json()["residuals"][0]["residual"].get<double>(), 0.0);
}

TEST_F(CliTest, LuOrder64Passes) {
  auto ctx = context();
  ASSERT_EQ(cmd_lu(ctx, {64, {}, false}), kExitOk) << err_.str();
  const auto r = ctx.report.json()["residuals"][0];
  EXPECT_LT(r["residual"].get<double>(), 16.0);
  EXPECT_EQ(r["gemm_calls"].get<std::uint64_t>(), 7u);
  EXPECT_GT(r["stats"]["vector_fma"].get<std::uint64_t>(), 0u);
}

TEST_F(CliTest, LuCorruptedSolveFails) {
  auto ctx = context();
  EXPECT_EQ(cmd_lu(ctx, {64, {}, true}), kExitFailed);
  EXPECT_GE(ctx.report.json()["residuals"][0]["residual"].get<double>(), 16.0);
  EXPECT_NE(out_.str().find("FAIL"), std::string::npos);
  EXPECT_FALSE(ctx.report.passed());
}

TEST_F(CliTest, LuErrors) {
  auto ctx = context();
  EXPECT_EQ(cmd_lu(ctx, {0, {}, false}), kExitUsage);
  write_matrix_file("s.bin", Matrix(3, 3, 1.0));
  EXPECT_EQ(cmd_lu(ctx, {0, path("s.bin"), false}), kExitFailed);
  EXPECT_NE(err_.str().find("singular"), std::string::npos) << err_.str();
  write_matrix_file("r.bin", Matrix(3, 2, 1.0));
  EXPECT_EQ(cmd_lu(ctx, {0, path("r.bin"), false}), kExitUsage);
}

// ---------------------------------------------------------------------------
// cachesim

TEST_F(CliTest, CachesimSingleLineTrace) {
  auto ctx = context();
  ASSERT_EQ(cmd_cachesim(ctx, {write("t", "L 0 64 V\n"), {}, 0, 0, 0, {}}), kExitOk);
  EXPECT_EQ(out_.str(),
            "# trace (1 trace events)\n"
            "level,accesses,hits,misses,miss_rate\n"
            "L1,1,0,1,1.000000\n"
            "L2,1,0,1,1.000000\n"
            "L3,1,0,1,1.000000\n");
}

TEST_F(CliTest, CachesimEmptyTrace) {
  auto ctx = context();
  ASSERT_EQ(cmd_cachesim(ctx, {write("t", ""), {}, 0, 0, 0, {}}), kExitOk);
  const auto j = ctx.report.json();
  for (const auto& l : j["miss_reports"]["trace"]["levels"]) {
    EXPECT_EQ(l["accesses"].get<std::uint64_t>(), 0u);
    EXPECT_EQ(l["miss_rate"].get<double>(), 0.0);
  }
}

TEST_F(CliTest, CachesimMalformedTraceNamesTheLine) {
  auto ctx = context();
  EXPECT_EQ(cmd_cachesim(ctx, {write("t", "L 0 64 V\nS 40 8 V\nL zz 8 X\n"), {}, 0, 0, 0, {}}),
            kExitUsage);
  EXPECT_NE(err_.str().find("line 3"), std::string::npos) << err_.str();
  EXPECT_EQ(cmd_cachesim(ctx, {path("nope"), {}, 0, 0, 0, {}}), kExitUsage);
  EXPECT_EQ(cmd_cachesim(ctx, {{}, "sideways", 4, 4, 4, {}}), kExitUsage);
}

TEST_F(CliTest, CachesimCompareAt128) {
  auto ctx = context();
  ASSERT_EQ(cmd_cachesim(ctx, {{}, "compare", 128, 128, 128, {}}), kExitOk) << err_.str();
  EXPECT_NE(out_.str().find("blocked < naive PASS"), std::string::npos) << out_.str();
  const auto j = ctx.report.json();
  EXPECT_TRUE(j["cache_verdict"]["blocked_lower"].get<bool>());
  EXPECT_EQ(j["cache_verdict"]["blocked_miss_rate"],
            j["miss_reports"]["blocked"]["levels"][0]["miss_rate"]);
}

TEST_F(CliTest, CachesimCompareFailsWhenEverythingFitsInL1) {
  // At 32^3 the naive loop's working set fits in L1.
  auto ctx = context();
  EXPECT_EQ(cmd_cachesim(ctx, {{}, "compare", 32, 32, 32, {}}), kExitFailed);
  EXPECT_NE(out_.str().find("blocked >= naive FAIL"), std::string::npos) << out_.str();
  EXPECT_FALSE(ctx.report.passed());
}

TEST_F(CliTest, CachesimGeneratedTraceRoundTrips) {
  auto ctx = context();
  ASSERT_EQ(cmd_cachesim(ctx, {{}, "blocked", 24, 12, 16, path("b.trace")}), kExitOk);
  const auto generated = ctx.report.json()["miss_reports"]["blocked"];
  ASSERT_EQ(cmd_cachesim(ctx, {path("b.trace"), {}, 0, 0, 0, {}}), kExitOk);
  EXPECT_EQ(ctx.report.json()["miss_reports"]["trace"], generated);

  ASSERT_EQ(cmd_cachesim(ctx, {{}, "naive", 3, 4, 5, path("n.trace")}), kExitOk);
  std::ifstream in(path("n.trace"));
  EXPECT_EQ(read_trace(in), naive_gemm_trace(3, 4, 5));
  EXPECT_EQ(cmd_cachesim(ctx, {{}, "naive", 0, 4, 5, {}}), kExitUsage);
}

// ---------------------------------------------------------------------------
// simulate

TEST_F(CliTest, SimulateDaxpySample) {
  const std::vector<double> x{1, 2, 3, 4, 5}, y{10, 20, 30, 40, 50};
  Memory image(0x10000, 80);
  image.store_doubles(0x10000, x);
  image.store_doubles(0x10028, y);
  write("img.bin", std::string(image.bytes.begin(), image.bytes.end()));

  SimulateArgs args;
  args.program = std::string(RVVLAB_TEST_DIR) + "/../samples/daxpy.s";
  args.memory = path("img.bin");
  args.set = {"a0=5", "a1=0x10000", "a2=65576", "fa0=2.5"};
  args.trace_out = path("t");
  args.stats_out = path("s");
  args.memory_out = path("m");
  auto ctx = context();
  ASSERT_EQ(cmd_simulate(ctx, args), kExitOk) << err_.str();

  const std::string mem = read_file(path("m"));
  ASSERT_EQ(mem.size(), 64u * 1024);
  Memory after(0x10000, mem.size());
  std::copy(mem.begin(), mem.end(), after.bytes.begin());
  const auto got = after.load_doubles(0x10028, 5);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(got[i], std::fma(2.5, x[i], y[i])) << i;

  std::ifstream trace(path("t"));
  const Trace t = read_trace(trace);
  ASSERT_EQ(t.size(), 9u);  // three strips of load, load, store at VLEN=128
  EXPECT_EQ(t.front(), (TraceEvent{AccessKind::load, 0x10000, 16, Origin::vector}));
  EXPECT_EQ(read_file(path("s")), format_stats(SimStats{6, 3, 3, 0, 3, 23, 80, 40}));
}

TEST_F(CliTest, SimulateErrors) {
  auto ctx = context();
  SimulateArgs args;
  args.program = write("p.s", "vsetvli t0, a0, e64, m1\nvle64.v v1, (a1)\n");
  args.set = {"a0=4", "a1=0x40"};
  EXPECT_EQ(cmd_simulate(ctx, args), kExitFailed);  // outside memory
  EXPECT_NE(err_.str().find("simulation fault"), std::string::npos) << err_.str();
  args.set = {"q7=1"};
  EXPECT_EQ(cmd_simulate(ctx, args), kExitUsage);
  args.set = {"fa0=one"};
  EXPECT_EQ(cmd_simulate(ctx, args), kExitUsage);
  args.set = {"a0"};
  EXPECT_EQ(cmd_simulate(ctx, args), kExitUsage);
  args.set = {};
  args.program = write("q.s", "vle64.v v1, (\n");
  EXPECT_EQ(cmd_simulate(ctx, args), kExitUsage);
  EXPECT_NE(err_.str().find("q.s:1:"), std::string::npos);
}

TEST_F(CliTest, SimulateOldDialect) {
  auto ctx = context();
  SimulateArgs args;
  args.program = write("p.s", "th.vsetvli t0, a0, e64, m2\nth.vle.v v2, (a1)\n");
  args.dialect = Dialect::rvv0_7;
  args.set = {"a0=3", "a1=0x10000"};
  ASSERT_EQ(cmd_simulate(ctx, args), kExitOk) << err_.str();
  EXPECT_EQ(ctx.report.json()["simulation"]["stats"]["bytes_loaded"].get<std::uint64_t>(), 24u);
}

// ---------------------------------------------------------------------------
// report

ReportArgs small_report() { return {24, 16, 128}; }

std::string run_report(const RunConfig& config, int& status) {
  std::ostringstream out, err;
  Context ctx(config, out, err);
  status = cmd_report(ctx, small_report());
  return ctx.report.json().dump(2) + "\n";
}

TEST(ReportTest, GoldenJson) {
  int status = -1;
  const std::string json = run_report(RunConfig{}, status);
  EXPECT_EQ(status, kExitOk);
  expect_golden("report_small.json", json);
}

TEST(ReportTest, DeterministicAndSeedSensitive) {
  int s1 = -1, s2 = -1, s3 = -1;
  RunConfig other;
  other.seed = 2;
  EXPECT_EQ(run_report(RunConfig{}, s1), run_report(RunConfig{}, s2));
  EXPECT_NE(run_report(RunConfig{}, s1), run_report(other, s3));
}

TEST(ReportTest, ReproducibleFromItsOwnMetadata) {
  RunConfig config = with({{"machine.vlen", "256"}, {"kernel.mr", "16"}, {"seed", "99"}});
  int status = -1;
  const auto json = nlohmann::ordered_json::parse(run_report(config, status));
  EXPECT_EQ(status, kExitOk);
  EXPECT_EQ(json["metadata"]["tool"], "rvvlab");
  EXPECT_EQ(json["metadata"]["version"], std::string(kToolVersion));
  std::string text;
  for (const auto& [k, v] : json["metadata"]["config"].items())
    text += k + " = " + v.get<std::string>() + "\n";
  std::istringstream in(text);
  const RunConfig echoed = parse_config(in);
  EXPECT_EQ(format_config(echoed), format_config(config));
  EXPECT_EQ(nlohmann::ordered_json::parse(run_report(echoed, status)), json);
}

TEST(ReportTest, WritesJsonFile) {
  const auto p = fs::temp_directory_path() / ("rvvlab_report_" + std::to_string(::getpid()));
  RunConfig config;
  Report r(config);
  r.verify(false);
  r.write(p.string());
  std::ifstream in(p);
  const auto j = nlohmann::ordered_json::parse(in);
  EXPECT_FALSE(j["passed"].get<bool>());
  fs::remove(p);
  EXPECT_THROW(r.write("/nonexistent-dir/x.json"), Error);
}

}  // namespace
}  // namespace rvvlab::cli
