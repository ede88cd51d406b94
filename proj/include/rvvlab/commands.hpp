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

// Subcommands of the rvvlab tool. Each writes human-readable text to `out`,
// diagnostics to `err`, records machine-readable results in the context's
// Report and returns the process exit status.

#pragma once

#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rvvlab/asm.hpp"
#include "rvvlab/cachesim.hpp"
#include "rvvlab/config.hpp"
#include "rvvlab/gemm.hpp"
#include "rvvlab/lu.hpp"
#include "rvvlab/report.hpp"
#include "rvvlab/transpile.hpp"
#include "rvvlab/vsim.hpp"

namespace rvvlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitUsage = 2;

/// Componentwise relative error bound for GEMM verification.
inline const double kGemmTolerance = std::ldexp(1.0, -40);
/// HPL scaled-residual pass threshold.
inline constexpr double kResidualThreshold = 16.0;

// Independent random streams per command, all derived from the one seed.
inline constexpr std::uint64_t kGemmStream = 1;
inline constexpr std::uint64_t kLuStream = 2;
inline constexpr std::uint64_t kCacheStream = 3;

struct Context {
  RunConfig config;
  std::ostream& out;
  std::ostream& err;
  Report report;

  Context(RunConfig c, std::ostream& o, std::ostream& e)
      : config(std::move(c)), out(o), err(e), report(config) {}
};

namespace detail {

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_text(const std::string& path, std::string_view text) {
  std::ofstream os(path, std::ios::binary);
  if (!os || !os.write(text.data(), static_cast<std::streamsize>(text.size())))
    throw Error("cannot write '" + path + "'");
}

inline Matrix load_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  try {
    return read_matrix(in);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

inline void save_matrix(const std::string& path, const Matrix& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write '" + path + "'");
  write_matrix(os, m);
}

inline std::string fixed(double v, int digits = 6) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

inline std::string sci(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(3) << v;
  return os.str();
}

inline const char* verdict(bool ok) { return ok ? "PASS" : "FAIL"; }

inline bool print_diagnostics(std::ostream& err, const std::string& file,
                              const std::vector<Diagnostic>& diagnostics) {
  for (const auto& d : diagnostics) err << format_diagnostic(file, d) << '\n';
  return has_errors(diagnostics);
}

inline MicroKernelParams with_variant(MicroKernelParams p, KernelVariant v) {
  p.variant = v;
  return p;
}

}  // namespace detail

/// Runs `body`, mapping library exceptions onto exit statuses.
template <typename Fn>
int guarded(Context& ctx, Fn&& body) {
  try {
    return body();
  } catch (const SimError& e) {
    ctx.err << "error: simulation fault: " << e.what() << '\n';
    return kExitFailed;
  } catch (const SingularMatrixError& e) {
    ctx.err << "error: " << e.what() << '\n';
    return kExitFailed;
  } catch (const ShapeError& e) {
    ctx.err << "error: shape error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    ctx.err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

// ---------------------------------------------------------------------------
// transpile

struct TranspileArgs {
  std::string input;
  std::string output;  // empty: stdout
};

inline int cmd_transpile(Context& ctx, const TranspileArgs& args) {
  return guarded(ctx, [&] {
    const std::string source = detail::read_text(args.input);
    const auto parsed = parse_program(source, Dialect::rvv1_0);
    if (detail::print_diagnostics(ctx.err, args.input, parsed.diagnostics)) return kExitUsage;
    const auto result = transpile_program(*parsed.program);
    if (detail::print_diagnostics(ctx.err, args.input, result.diagnostics)) return kExitUsage;
    const std::string text = print_program(*result.program, Dialect::rvv0_7);
    if (args.output.empty())
      ctx.out << text;
    else
      detail::write_text(args.output, text);
    return kExitOk;
  });
}

// ---------------------------------------------------------------------------
// kernel

struct KernelArgs {
  std::optional<KernelVariant> variant;  // default: kernel.variant
  Dialect dialect = Dialect::rvv1_0;
  std::string output;
};

inline int cmd_kernel(Context& ctx, const KernelArgs& args) {
  return guarded(ctx, [&] {
    const auto p = detail::with_variant(ctx.config.kernel,
                                        args.variant.value_or(ctx.config.kernel.variant));
    std::string text = ukernel_source(p);
    if (args.dialect == Dialect::rvv0_7) {
      const auto t = transpile_program(gen_ukernel(p));
      if (detail::print_diagnostics(ctx.err, "<kernel>", t.diagnostics)) return kExitFailed;
      text = print_program(*t.program, Dialect::rvv0_7);
    }
    if (args.output.empty())
      ctx.out << text;
    else
      detail::write_text(args.output, text);
    return kExitOk;
  });
}

// ---------------------------------------------------------------------------
// gemm

struct GemmArgs {
  std::size_t m = 64, n = 64, k = 64;
  /// "lmul1", "lmul4", "both"; empty: kernel.variant.
  std::string variant;
  std::string a_path, b_path, c_path, out_path;
};

inline int cmd_gemm(Context& ctx, const GemmArgs& args) {
  return guarded(ctx, [&] {
    const RunConfig& cfg = ctx.config;
    std::vector<KernelVariant> variants;
    if (args.variant.empty()) {
      variants = {cfg.kernel.variant};
    } else if (args.variant == "both") {
      variants = {KernelVariant::lmul1, KernelVariant::lmul4};
    } else if (auto v = parse_variant(args.variant)) {
      variants = {*v};
    } else {
      throw ConfigError("variant must be lmul1, lmul4 or both, got '" + args.variant + "'");
    }

    CounterRng rng(cfg.seed, kGemmStream);
    const Matrix a = args.a_path.empty() ? random_matrix(args.m, args.k, rng)
                                         : detail::load_matrix(args.a_path);
    const Matrix b = args.b_path.empty() ? random_matrix(a.cols, args.n, rng)
                                         : detail::load_matrix(args.b_path);
    const Matrix c = args.c_path.empty() ? random_matrix(a.rows, b.cols, rng)
                                         : detail::load_matrix(args.c_path);
    check_gemm_shapes(a, b, c);
    if (a.rows == 0 || a.cols == 0 || b.cols == 0)
      throw ShapeError("gemm needs positive dimensions, got m=" + std::to_string(a.rows) +
                       " n=" + std::to_string(b.cols) + " k=" + std::to_string(a.cols));
    const std::size_t m = a.rows, n = b.cols, k = a.cols;
    const Matrix want = gemm_ref(a, b, c);

    bool ok = true;
    std::vector<GemmResult> results;
    for (const auto v : variants) {
      GemmResult r = gemm_blocked(a, b, c, cfg.blocking, detail::with_variant(cfg.kernel, v),
                                  GemmOptions{false, cfg.limits});
      const RelativeError e = max_relative_error(r.c, want);
      const bool pass = e.max <= kGemmTolerance;
      ok = ok && pass;
      ctx.out << "gemm " << variant_name(v) << ' ' << m << 'x' << n << 'x' << k
              << ": max relative error " << detail::sci(e.max) << " (tolerance 2^-40) "
              << detail::verdict(pass) << '\n';
      if (!pass)
        ctx.out << "  worst element C(" << e.row << ", " << e.col << "): got "
                << std::setprecision(17) << r.c(e.row, e.col) << ", expected "
                << want(e.row, e.col) << '\n';
      ctx.out << "  micro-kernel calls " << r.ukernel_calls << ", vector instructions "
              << r.stats.vector_ops() << " (loads " << r.stats.vector_load << ", fmas "
              << r.stats.vector_fma << ", stores " << r.stats.vector_store << "), bytes loaded "
              << r.stats.bytes_loaded << ", stored " << r.stats.bytes_stored << '\n';
      ctx.report.add_gemm({{"variant", variant_name(v)},
                           {"m", m},
                           {"n", n},
                           {"k", k},
                           {"max_relative_error", e.max},
                           {"worst", {{"row", e.row}, {"col", e.col}}},
                           {"tolerance", kGemmTolerance},
                           {"passed", pass},
                           {"ukernel_calls", r.ukernel_calls},
                           {"stats", to_json(r.stats)}});
      results.push_back(std::move(r));
    }

    auto counts = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < variants.size(); ++i)
      counts[std::string(variant_name(variants[i]))] = to_json(results[i].stats);
    if (variants.size() == 2) {
      const auto& one = results[0];
      const auto& four = results[1];
      const bool identical = bit_identical(one.c, four.c);
      const bool same_traffic = one.stats.bytes_loaded == four.stats.bytes_loaded &&
                                one.stats.bytes_stored == four.stats.bytes_stored;
      const double ratio = static_cast<double>(one.stats.vector_ops()) /
                           static_cast<double>(four.stats.vector_ops());
      ok = ok && identical && same_traffic;
      ctx.out << "lmul1 vs lmul4: results " << (identical ? "bit-identical" : "DIFFER")
              << ", traffic " << (same_traffic ? "identical" : "DIFFERS")
              << ", vector instruction ratio " << detail::fixed(ratio, 3) << "x\n";
      counts["vector_op_ratio"] = ratio;
      counts["results_identical"] = identical;
      counts["traffic_identical"] = same_traffic;
    }
    ctx.report.set_instruction_counts(std::move(counts));
    ctx.report.verify(ok);
    if (!args.out_path.empty()) detail::save_matrix(args.out_path, results.back().c);
    return ok ? kExitOk : kExitFailed;
  });
}

// ---------------------------------------------------------------------------
// lu

struct LuArgs {
  std::size_t n = 64;
  std::string a_path;
  /// Fault injection: perturbs the computed solution before the check.
  bool corrupt_solve = false;
};

inline int cmd_lu(Context& ctx, const LuArgs& args) {
  return guarded(ctx, [&] {
    const RunConfig& cfg = ctx.config;
    CounterRng rng(cfg.seed, kLuStream);
    const Matrix a = args.a_path.empty() ? random_diag_dominant(args.n, rng)
                                         : detail::load_matrix(args.a_path);
    if (a.rows != a.cols) throw ShapeError("lu needs a square matrix");
    const std::size_t n = a.rows;
    if (n == 0) throw ShapeError("lu needs n >= 1");
    // Right-hand side A * ones, so the exact solution is known.
    std::vector<double> b(n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) b[i] += a(i, j);

    const LuFactors f = lu_factor(a, cfg.lu_block, cfg.blocking, cfg.kernel,
                                  GemmOptions{false, cfg.limits});
    std::vector<double> x = lu_solve(f, b);
    if (args.corrupt_solve) x[0] += 1e-3 * (1.0 + std::abs(x[0]));
    const double residual = hpl_residual(a, x, b);
    double forward = 0.0;
    for (double v : x) forward = std::max(forward, std::abs(v - 1.0));
    const bool pass = residual < kResidualThreshold;

    ctx.out << "lu n=" << n << " block=" << cfg.lu_block << ": scaled residual "
            << detail::sci(residual) << " (threshold 16) " << detail::verdict(pass) << '\n'
            << "  max |x - 1| " << detail::sci(forward) << ", trailing updates " << f.gemm_calls
            << ", vector instructions " << f.stats.vector_ops() << '\n';
    ctx.report.add_residual({{"n", n},
                             {"block", cfg.lu_block},
                             {"residual", residual},
                             {"threshold", kResidualThreshold},
                             {"passed", pass},
                             {"corrupted", args.corrupt_solve},
                             {"forward_error", forward},
                             {"gemm_calls", f.gemm_calls},
                             {"stats", to_json(f.stats)}});
    ctx.report.verify(pass);
    return pass ? kExitOk : kExitFailed;
  });
}

// ---------------------------------------------------------------------------
// cachesim

struct CacheArgs {
  std::string trace_path;
  /// "blocked", "naive" or "compare"; used when trace_path is empty.
  std::string generate;
  std::size_t m = 128, n = 128, k = 128;
  /// Writes the simulated trace (generate blocked/naive only).
  std::string trace_out;
};

/// Access trace of gemm_blocked on seeded random operands.
inline Trace blocked_gemm_trace(const RunConfig& cfg, std::size_t m, std::size_t n,
                                std::size_t k) {
  if (m == 0 || n == 0 || k == 0) throw ShapeError("blocked trace needs positive dims");
  CounterRng rng(cfg.seed, kCacheStream);
  const Matrix a = random_matrix(m, k, rng), b = random_matrix(k, n, rng),
               c = random_matrix(m, n, rng);
  return gemm_blocked(a, b, c, cfg.blocking, cfg.kernel, GemmOptions{true, cfg.limits}).trace;
}

inline void print_miss_report(Context& ctx, const std::string& name, const MissReport& r) {
  ctx.out << "# " << name << " (" << r.trace_events << " trace events)\n" << format_miss_csv(r);
  ctx.report.add_miss_report(name, r);
}

inline int cmd_cachesim(Context& ctx, const CacheArgs& args) {
  return guarded(ctx, [&] {
    const RunConfig& cfg = ctx.config;
    if (!args.trace_path.empty()) {
      if (!args.generate.empty()) throw ConfigError("give either a trace file or --generate");
      std::ifstream in(args.trace_path);
      if (!in) throw FormatError("cannot open '" + args.trace_path + "'");
      Trace trace;
      try {
        trace = read_trace(in);
      } catch (const FormatError& e) {
        throw FormatError(args.trace_path + ": " + e.what());
      }
      print_miss_report(ctx, "trace", simulate_trace(trace, cfg.cache));
      return kExitOk;
    }
    const auto dump = [&](const Trace& t) {
      if (args.trace_out.empty()) return;
      std::ofstream os(args.trace_out);
      if (!os) throw Error("cannot write '" + args.trace_out + "'");
      write_trace(os, t);
    };
    if (args.generate == "blocked") {
      const Trace t = blocked_gemm_trace(cfg, args.m, args.n, args.k);
      dump(t);
      print_miss_report(ctx, "blocked", simulate_trace(t, cfg.cache));
      return kExitOk;
    }
    if (args.generate == "naive") {
      const Trace t = naive_gemm_trace(args.m, args.n, args.k);
      dump(t);
      print_miss_report(ctx, "naive", simulate_trace(t, cfg.cache));
      return kExitOk;
    }
    if (args.generate == "compare") {
      const MissReport blocked =
          simulate_trace(blocked_gemm_trace(cfg, args.m, args.n, args.k), cfg.cache);
      const MissReport naive = simulate_trace(naive_gemm_trace(args.m, args.n, args.k), cfg.cache);
      print_miss_report(ctx, "blocked", blocked);
      print_miss_report(ctx, "naive", naive);
      const double rb = blocked.levels.front().miss_rate();
      const double rn = naive.levels.front().miss_rate();
      const bool ok = rb < rn;
      const std::string& l1 = cfg.cache.levels.front().name;
      ctx.out << l1 << " miss rate at " << args.m << 'x' << args.n << 'x' << args.k
              << ": blocked " << detail::fixed(rb) << ", naive " << detail::fixed(rn) << " -> "
              << (ok ? "blocked < naive" : "blocked >= naive") << ' ' << detail::verdict(ok)
              << '\n';
      ctx.report.set("cache_verdict", {{"level", l1},
                                       {"blocked_miss_rate", rb},
                                       {"naive_miss_rate", rn},
                                       {"blocked_lower", ok}});
      ctx.report.verify(ok);
      return ok ? kExitOk : kExitFailed;
    }
    throw ConfigError("cachesim needs a trace file or --generate blocked|naive|compare");
  });
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string program;
  Dialect dialect = Dialect::rvv1_0;
  std::string memory;  // raw image loaded at `base`
  std::uint64_t base = 0x10000;
  std::uint64_t mem_size = 0;  // 0: max(image size, 64 KiB)
  std::vector<std::string> set;  // "reg=value"
  std::string trace_out, stats_out, memory_out;
};

namespace detail {

inline void apply_register(MachineState& s, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("expected reg=value, got '" + assignment + "'");
  const std::string name = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  if (auto x = rvvlab::detail::parse_xreg(name)) {
    const auto v = rvvlab::detail::parse_int(value);
    if (!v) throw ConfigError("bad integer '" + value + "' for " + name);
    s.set_x(*x, static_cast<std::uint64_t>(*v));
    return;
  }
  if (auto f = rvvlab::detail::parse_freg(name)) {
    std::size_t used = 0;
    double d = 0.0;
    try {
      d = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size())
      throw ConfigError("bad floating-point value '" + value + "' for " + name);
    s.set_f64(*f, d);
    return;
  }
  throw ConfigError("unknown register '" + name + "'");
}

}  // namespace detail

inline int cmd_simulate(Context& ctx, const SimulateArgs& args) {
  return guarded(ctx, [&] {
    const RunConfig& cfg = ctx.config;
    const std::string source = detail::read_text(args.program);
    const auto parsed = parse_program(source, args.dialect);
    if (detail::print_diagnostics(ctx.err, args.program, parsed.diagnostics)) return kExitUsage;

    std::string image;
    if (!args.memory.empty()) image = detail::read_text(args.memory);
    const std::uint64_t size =
        args.mem_size != 0 ? args.mem_size : std::max<std::uint64_t>(image.size(), 64 * 1024);
    if (image.size() > size) throw ConfigError("memory image larger than --mem-size");
    MachineState state(cfg.machine, Memory(args.base, size));
    std::copy(image.begin(), image.end(), state.mem.bytes.begin());
    for (const auto& a : args.set) detail::apply_register(state, a);

    const RunResult r = run(*parsed.program, std::move(state), cfg.machine, cfg.limits);
    ctx.out << format_stats(r.stats);
    for (unsigned i = 1; i < 32; ++i)
      if (r.state.xregs[i] != 0)
        ctx.out << kXAbiNames[i] << " = 0x" << std::hex << r.state.xregs[i] << std::dec << '\n';
    if (!args.trace_out.empty()) {
      std::ofstream os(args.trace_out);
      if (!os) throw Error("cannot write '" + args.trace_out + "'");
      write_trace(os, r.trace);
    }
    if (!args.stats_out.empty()) detail::write_text(args.stats_out, format_stats(r.stats));
    if (!args.memory_out.empty())
      detail::write_text(args.memory_out,
                         std::string(r.state.mem.bytes.begin(), r.state.mem.bytes.end()));

    std::uint64_t loaded = 0, stored = 0;
    for (const auto& e : r.trace) (e.kind == AccessKind::load ? loaded : stored) += e.bytes;
    const bool consistent = loaded == r.stats.bytes_loaded && stored == r.stats.bytes_stored;
    ctx.report.set("simulation", {{"program", args.program},
                                  {"dialect", dialect_name(args.dialect)},
                                  {"trace_events", r.trace.size()},
                                  {"traffic_consistent", consistent},
                                  {"stats", to_json(r.stats)}});
    ctx.report.verify(consistent);
    return consistent ? kExitOk : kExitFailed;
  });
}

// ---------------------------------------------------------------------------
// report

struct ReportArgs {
  std::size_t gemm_dim = 64;
  std::size_t lu_n = 64;
  std::size_t cache_dim = 128;
};

/// GEMM with both variants, an LU solve and the cache comparison.
inline int cmd_report(Context& ctx, const ReportArgs& args) {
  const int g = cmd_gemm(ctx, {args.gemm_dim, args.gemm_dim, args.gemm_dim, "both", {}, {}, {}, {}});
  const int l = cmd_lu(ctx, {args.lu_n, {}, false});
  CacheArgs cache;
  cache.generate = "compare";
  cache.m = cache.n = cache.k = args.cache_dim;
  const int c = cmd_cachesim(ctx, cache);
  const int worst = std::max({g, l, c});
  ctx.out << "report: " << (worst == kExitOk ? "all checks passed" : "some checks failed")
          << '\n';
  return worst;
}

}  // namespace rvvlab::cli
