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

// Generators for the BLIS-style DGEMM micro-kernel in two register layouts.
//
// Both kernels compute C[mr x nr] += A_panel * B_panel as k rank-1 updates.
// With VLEN=128 and SEW=64 one register holds two doubles, so an mr=8 column
// of A occupies four registers:
//
//   lmul1  per k step: 4 x vle64.v (one per register), then for each of the
//          nr columns 4 x vfmacc.vf into single-register accumulators.
//   lmul4  per k step: 1 x vle64.v into a 4-register group, then 1 x
//          vfmacc.vf per column into 4-register accumulator groups.
//
// Register layout: A column at v4.., accumulators for column j at
// acc_base + j * (mr / vlmax) * lmul. Elements see the same fused
// multiply-add chain in the same order in both layouts.

#pragma once

#include <cstdint>
#include <sstream>
#include <string>

#include "rvvlab/asm.hpp"
#include "rvvlab/isa.hpp"
#include "rvvlab/vsim.hpp"

namespace rvvlab {

enum class KernelVariant : std::uint8_t { lmul1, lmul4 };

inline unsigned variant_lmul(KernelVariant v) {
  return v == KernelVariant::lmul1 ? 1 : 4;
}

inline std::string_view variant_name(KernelVariant v) {
  return v == KernelVariant::lmul1 ? "lmul1" : "lmul4";
}

inline std::optional<KernelVariant> parse_variant(std::string_view s) {
  if (s == "lmul1") return KernelVariant::lmul1;
  if (s == "lmul4") return KernelVariant::lmul4;
  return std::nullopt;
}

struct MicroKernelParams {
  unsigned mr = 8;
  unsigned nr = 4;
  unsigned sew = 64;
  KernelVariant variant = KernelVariant::lmul4;
  unsigned vlen = 128;

  unsigned lmul() const { return variant_lmul(variant); }
  /// Elements moved by one vector instruction.
  std::uint64_t group_elems() const { return vlmax(vlen, sew, lmul()); }
  /// Vector instructions per A column (loads) and per C column (FMAs).
  unsigned groups_per_column() const {
    return static_cast<unsigned>(mr / group_elems());
  }
  unsigned a_base() const { return lmul() <= 4 ? 4 : 8; }
  unsigned acc_base() const {
    const unsigned end = a_base() + groups_per_column() * lmul();
    return (end + lmul() - 1) / lmul() * lmul();
  }
  unsigned acc_reg(unsigned column, unsigned group) const {
    return acc_base() + (column * groups_per_column() + group) * lmul();
  }

  void validate() const {
    if (sew != 64) throw ConfigError("micro-kernels are FP64: sew must be 64");
    MachineConfig{vlen}.validate();
    if (mr == 0 || nr == 0) throw ConfigError("mr and nr must be positive");
    const auto elems = group_elems();
    if (mr % elems != 0)
      throw ConfigError("mr=" + std::to_string(mr) + " is not a multiple of vlmax=" +
                        std::to_string(elems) + " for " +
                        std::string(variant_name(variant)) + " at VLEN=" +
                        std::to_string(vlen));
    if (acc_reg(nr, 0) > 32)
      throw ConfigError("mr=" + std::to_string(mr) + ", nr=" + std::to_string(nr) +
                        " needs more than 32 vector registers");
    if (nr > 32) throw ConfigError("nr exceeds the FP register file");
    if (std::uint64_t{mr} * 8 > 2047 || std::uint64_t{nr} * 8 > 2047)
      throw ConfigError("panel strides exceed the 12-bit immediate range");
  }

  friend bool operator==(const MicroKernelParams&, const MicroKernelParams&) = default;
};

struct BlockingParams {
  std::size_t mc = 64;
  std::size_t kc = 64;
  std::size_t nc = 128;

  void validate(const MicroKernelParams& p) const {
    if (mc == 0 || kc == 0 || nc == 0)
      throw ConfigError("blocking sizes must be positive");
    if (mc % p.mr != 0)
      throw ConfigError("mc=" + std::to_string(mc) + " is not a multiple of mr=" +
                        std::to_string(p.mr));
    if (nc % p.nr != 0)
      throw ConfigError("nc=" + std::to_string(nc) + " is not a multiple of nr=" +
                        std::to_string(p.nr));
  }

  friend bool operator==(const BlockingParams&, const BlockingParams&) = default;
};

/// Commented RVV 1.0 assembly for the micro-kernel.
inline std::string ukernel_source(const MicroKernelParams& p) {
  p.validate();
  const unsigned lmul = p.lmul();
  const unsigned groups = p.groups_per_column();
  const std::uint64_t step = p.group_elems() * 8;
  std::ostringstream os;
  os << "# DGEMM micro-kernel, variant " << variant_name(p.variant) << ": C[" << p.mr
     << " x " << p.nr << "] += A_panel * B_panel\n"
     << "# VLEN=" << p.vlen << " SEW=" << p.sew << " LMUL=" << lmul << " mr=" << p.mr
     << " nr=" << p.nr << "\n"
     << "#\n"
     << "# a0  k, number of rank-1 updates (may be 0)\n"
     << "# a1  packed A panel: " << p.mr << " doubles per k step, column after column\n"
     << "# a2  packed B panel: " << p.nr << " doubles per k step, row after row\n"
     << "# a3  C tile, column-major\n"
     << "# a4  byte stride between consecutive C tile columns\n"
     << "# clobbers t0-t2, f0-f" << p.nr - 1 << ", v" << p.a_base() << "-v"
     << p.acc_reg(p.nr, 0) - 1 << "; a0-a2 are consumed\n\n";

  const auto v = [](unsigned n) { return "v" + std::to_string(n); };
  os << "    vsetvli t0, zero, e64, m" << lmul << ", ta, ma\n";

  const auto tile_pass = [&](std::string_view op) {
    os << "    addi t1, a3, 0\n";
    for (unsigned j = 0; j < p.nr; ++j) {
      os << "    addi t2, t1, 0\n";
      for (unsigned g = 0; g < groups; ++g) {
        if (g != 0) os << "    addi t2, t2, " << step << "\n";
        os << "    " << op << ' ' << v(p.acc_reg(j, g)) << ", (t2)\n";
      }
      os << "    add t1, t1, a4\n";
    }
  };

  os << "    # load the C tile into the accumulators\n";
  tile_pass("vle64.v");
  os << "    beqz a0, .Lstore\n"
     << ".Lloop:\n"
     << "    # column of A\n";
  for (unsigned g = 0; g < groups; ++g)
    os << "    vle64.v " << v(p.a_base() + g * lmul) << ", (a1)\n"
       << "    addi a1, a1, " << step << "\n";
  os << "    # row of B\n";
  for (unsigned j = 0; j < p.nr; ++j)
    os << "    fld f" << j << ", " << j * 8 << "(a2)\n";
  os << "    addi a2, a2, " << p.nr * 8 << "\n"
     << "    # rank-1 update\n";
  for (unsigned j = 0; j < p.nr; ++j)
    for (unsigned g = 0; g < groups; ++g)
      os << "    vfmacc.vf " << v(p.acc_reg(j, g)) << ", f" << j << ", "
         << v(p.a_base() + g * lmul) << "\n";
  os << "    addi a0, a0, -1\n"
     << "    bnez a0, .Lloop\n"
     << ".Lstore:\n";
  tile_pass("vse64.v");
  return os.str();
}

inline Program gen_ukernel(const MicroKernelParams& p) {
  auto parsed = parse_program(ukernel_source(p), Dialect::rvv1_0);
  if (!parsed.ok())
    throw Error("generated micro-kernel failed to parse: " +
                format_diagnostic("<ukernel>", parsed.diagnostics.front()));
  return std::move(*parsed.program);
}

struct VectorOpCounts {
  std::uint64_t loads = 0;
  std::uint64_t fmas = 0;
  friend bool operator==(const VectorOpCounts&, const VectorOpCounts&) = default;
};

/// Vector loads and FMAs issued by the k rank-1 updates of one kernel call.
inline VectorOpCounts count_ukernel_vector_ops(const MicroKernelParams& p,
                                               std::uint64_t k) {
  p.validate();
  if (k < 1) throw ConfigError("k must be at least 1");
  const std::uint64_t groups = p.groups_per_column();
  return {k * groups, k * p.nr * groups};
}

/// Full SimStats of one kernel call with depth k (k may be 0), including the
/// C tile load/store and the loop control.
inline SimStats predict_ukernel_stats(const MicroKernelParams& p, std::uint64_t k) {
  p.validate();
  const std::uint64_t q = p.groups_per_column();
  const std::uint64_t nr = p.nr;
  SimStats s;
  s.vsetvl = 1;
  s.vector_load = nr * q + k * q;
  s.vector_store = nr * q;
  s.vector_fma = k * nr * q;
  // tile passes: 1 + nr * (1 + (q - 1) + 1) each, beqz, then per k step
  // q pointer bumps + nr fld + addi a2 + addi a0 + bnez.
  s.scalar = 2 * (1 + nr * (q + 1)) + 1 + k * (q + nr + 3);
  s.bytes_loaded = (nr * p.mr + k * (p.mr + nr)) * 8;
  s.bytes_stored = nr * p.mr * 8;
  return s;
}

/// Arguments of one micro-kernel call in the simulated address space.
struct UkernelArgs {
  std::uint64_t k = 0;
  std::uint64_t a_panel = 0;
  std::uint64_t b_panel = 0;
  std::uint64_t c_tile = 0;
  std::uint64_t c_col_stride = 0;
};

inline void set_ukernel_args(MachineState& s, const UkernelArgs& args) {
  s.set_x(reg::a0, args.k);
  s.set_x(reg::a1, args.a_panel);
  s.set_x(reg::a2, args.b_panel);
  s.set_x(reg::a3, args.c_tile);
  s.set_x(reg::a4, args.c_col_stride);
  s.pc = 0;
}

}  // namespace rvvlab
