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

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "rvvlab/commands.hpp"

namespace {

using namespace rvvlab;
using namespace rvvlab::cli;

std::optional<Dialect> dialect_from(const std::string& s) {
  if (s == "rvv1_0" || s == "1.0") return Dialect::rvv1_0;
  if (s == "rvv0_7" || s == "0.7") return Dialect::rvv0_7;
  return std::nullopt;
}

std::uint64_t parse_u64(const std::string& text, const char* what) {
  const auto v = rvvlab::detail::parse_int(text);
  if (!v || *v < 0) throw ConfigError(std::string(what) + ": expected a non-negative integer");
  return static_cast<std::uint64_t>(*v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rvvlab: RISC-V vector GEMM kernel laboratory"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, json_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> vlen;
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--seed", seed, "seed for generated data");
  app.add_option("--vlen", vlen, "vector register width in bits");
  app.add_option("--json", json_path, "write a JSON report here");

  TranspileArgs transpile;
  auto* t = app.add_subcommand("transpile", "translate RVV 1.0 assembly to RVV 0.7.1");
  t->add_option("input", transpile.input, "RVV 1.0 assembly file")->required();
  t->add_option("-o,--output", transpile.output, "output file (default stdout)");

  KernelArgs kernel;
  std::string kernel_variant, kernel_dialect = "rvv1_0";
  auto* kc = app.add_subcommand("kernel", "print the generated micro-kernel");
  kc->add_option("--variant", kernel_variant, "lmul1 or lmul4");
  kc->add_option("--dialect", kernel_dialect, "rvv1_0 or rvv0_7");
  kc->add_option("-o,--output", kernel.output, "output file (default stdout)");

  GemmArgs gemm;
  auto* g = app.add_subcommand("gemm", "blocked GEMM on the simulator, checked against a reference");
  g->add_option("-m", gemm.m, "rows of A and C")->capture_default_str();
  g->add_option("-n", gemm.n, "columns of B and C")->capture_default_str();
  g->add_option("-k", gemm.k, "columns of A, rows of B")->capture_default_str();
  g->add_option("--variant", gemm.variant, "lmul1, lmul4 or both");
  g->add_option("--a", gemm.a_path, "matrix file for A");
  g->add_option("--b", gemm.b_path, "matrix file for B");
  g->add_option("--c", gemm.c_path, "matrix file for C");
  g->add_option("--out", gemm.out_path, "write the result matrix here");

  LuArgs lu;
  auto* l = app.add_subcommand("lu", "blocked LU solve with the HPL residual check");
  l->add_option("-n", lu.n, "system order")->capture_default_str();
  l->add_option("--a", lu.a_path, "matrix file for A");
  l->add_flag("--corrupt-solve", lu.corrupt_solve, "perturb the solution before the check");

  CacheArgs cache;
  auto* c = app.add_subcommand("cachesim", "cache miss analysis of an access trace");
  c->add_option("--trace", cache.trace_path, "trace file");
  c->add_option("--generate", cache.generate, "blocked, naive or compare");
  c->add_option("-m", cache.m, "GEMM rows")->capture_default_str();
  c->add_option("-n", cache.n, "GEMM columns")->capture_default_str();
  c->add_option("-k", cache.k, "GEMM depth")->capture_default_str();
  c->add_option("--trace-out", cache.trace_out, "write the generated trace here");

  SimulateArgs sim;
  std::string sim_dialect = "rvv1_0", sim_base = "0x10000", sim_size = "0";
  auto* s = app.add_subcommand("simulate", "run an assembly program on the vector simulator");
  s->add_option("program", sim.program, "assembly file")->required();
  s->add_option("--dialect", sim_dialect, "rvv1_0 or rvv0_7");
  s->add_option("--memory", sim.memory, "raw memory image loaded at --base");
  s->add_option("--base", sim_base, "memory base address")->capture_default_str();
  s->add_option("--mem-size", sim_size, "memory size in bytes (default max(image, 64 KiB))");
  s->add_option("--set", sim.set, "initial register value, e.g. a0=0x10000 or fa0=1.5");
  s->add_option("--trace-out", sim.trace_out, "write the access trace here");
  s->add_option("--stats-out", sim.stats_out, "write key=value statistics here");
  s->add_option("--memory-out", sim.memory_out, "write the final memory image here");

  ReportArgs report;
  auto* r = app.add_subcommand("report", "GEMM, LU and cache checks in one run");
  r->add_option("--gemm-dim", report.gemm_dim, "GEMM size")->capture_default_str();
  r->add_option("--lu-n", report.lu_n, "LU order")->capture_default_str();
  r->add_option("--cache-dim", report.cache_dim, "cache comparison size")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  RunConfig config;
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ConfigError("cannot open '" + config_path + "'");
      config = parse_config(in);
    }
    if (seed) config.seed = *seed;
    if (vlen) config.set("machine.vlen", std::to_string(*vlen));
    if (!json_path.empty()) config.json_path = json_path;
    config.validate();
    if (*kc) {
      if (!kernel_variant.empty()) {
        kernel.variant = parse_variant(kernel_variant);
        if (!kernel.variant) throw ConfigError("--variant must be lmul1 or lmul4");
      }
      const auto d = dialect_from(kernel_dialect);
      if (!d) throw ConfigError("--dialect must be rvv1_0 or rvv0_7");
      kernel.dialect = *d;
    }
    if (*s) {
      const auto d = dialect_from(sim_dialect);
      if (!d) throw ConfigError("--dialect must be rvv1_0 or rvv0_7");
      sim.dialect = *d;
      sim.base = parse_u64(sim_base, "--base");
      sim.mem_size = parse_u64(sim_size, "--mem-size");
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  Context ctx(config, std::cout, std::cerr);
  int status = kExitUsage;
  if (*t) status = cmd_transpile(ctx, transpile);
  else if (*kc) status = cmd_kernel(ctx, kernel);
  else if (*g) status = cmd_gemm(ctx, gemm);
  else if (*l) status = cmd_lu(ctx, lu);
  else if (*c) status = cmd_cachesim(ctx, cache);
  else if (*s) status = cmd_simulate(ctx, sim);
  else if (*r) status = cmd_report(ctx, report);

  if (!config.json_path.empty()) {
    try {
      ctx.report.verify(status == kExitOk);
      ctx.report.write(config.json_path);
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitUsage;
    }
  }
  return status;
}
