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

// One-way rewriter from RVV 1.0 assembly to the RVV 0.7.1 / XTheadVector
// dialect. The rewrite is a 1:1 instruction mapping:
//
//   * every vector mnemonic gains the "th." prefix,
//   * width-suffixed unit-stride loads/stores (vle64.v, vse32.v, ...) become
//     the SEW-implicit th.vle.v / th.vse.v, which is only sound when the SEW
//     in effect equals the width the 1.0 mnemonic spelled out,
//   * vsetvli loses its ta/tu/ma/mu policy flags.
//
// Scalar instructions pass through untouched.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rvvlab/asm.hpp"
#include "rvvlab/isa.hpp"

namespace rvvlab {

enum class OperandRewrite : std::uint8_t {
  none,
  drop_vtype_policy,  // vsetvli: ta/tu/ma/mu do not exist in 0.7.1
  elide_width,        // vleN.v/vseN.v: width comes from vtype.sew
};

struct MnemonicMapEntry {
  std::string_view target;
  OperandRewrite rewrite;
  /// Element width spelled by the 1.0 mnemonic, 0 if none.
  unsigned width;
};

using MnemonicMap = std::map<std::string_view, MnemonicMapEntry>;

/// The RVV 1.0 -> 0.7.1 mnemonic table. Amend here to target a different
/// 0.7.1 spelling.
inline const MnemonicMap& mnemonic_map() {
  static const MnemonicMap map{
      {"vsetvli", {"th.vsetvli", OperandRewrite::drop_vtype_policy, 0}},
      {"vle32.v", {"th.vle.v", OperandRewrite::elide_width, 32}},
      {"vle64.v", {"th.vle.v", OperandRewrite::elide_width, 64}},
      {"vse32.v", {"th.vse.v", OperandRewrite::elide_width, 32}},
      {"vse64.v", {"th.vse.v", OperandRewrite::elide_width, 64}},
      {"vfmacc.vf", {"th.vfmacc.vf", OperandRewrite::none, 0}},
      {"vfmul.vf", {"th.vfmul.vf", OperandRewrite::none, 0}},
      {"vfadd.vv", {"th.vfadd.vv", OperandRewrite::none, 0}},
      {"vmv.v.i", {"th.vmv.v.i", OperandRewrite::none, 0}},
  };
  return map;
}

class TranspileError : public Error {
 public:
  TranspileError(std::string message, int line = 0)
      : Error(std::move(message)), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Rewrites a single instruction. The SEW-consistency requirement of the
/// width elision needs control-flow context and is checked by
/// transpile_program, not here.
inline Instruction transpile_instruction(const Instruction& instr) {
  if (instr.dialect == Dialect::common) return instr;
  if (instr.dialect != Dialect::rvv1_0)
    throw TranspileError("input is already in dialect " +
                             std::string(dialect_name(instr.dialect)) + ": '" +
                             format_instruction(instr) + "'",
                         instr.line);
  const auto& map = mnemonic_map();
  const auto it = map.find(instr.mnemonic());
  if (it == map.end())
    throw TranspileError(
        "untranslatable instruction '" + format_instruction(instr) + "'",
        instr.line);
  const OpInfo* target = find_op(it->second.target);
  if (target == nullptr || target->arity == 0)
    throw TranspileError("mnemonic map target '" +
                         std::string(it->second.target) + "' is not supported");

  Instruction out = instr;
  out.op = target->op;
  out.dialect = Dialect::rvv0_7;
  if (it->second.rewrite == OperandRewrite::drop_vtype_policy) {
    if (instr.operand<XReg>(0).n == 0 && instr.operand<XReg>(1).n == 0)
      // 1.0 keeps vl for "vsetvli x0, x0"; 0.7.1 sets vl = VLMAX.
      throw TranspileError("untranslatable instruction '" +
                               format_instruction(instr) +
                               "': the x0, x0 form changes meaning in RVV 0.7.1",
                           instr.line);
    auto& spec = std::get<VTypeSpec>(out.operands.back());
    spec.tail = Policy::unspecified;
    spec.mask = Policy::unspecified;
  }
  return out;
}

struct TranspileResult {
  std::optional<Program> program;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return program.has_value(); }
};

namespace detail {

// Forward dataflow lattice for the SEW in effect at each instruction.
inline constexpr int kSewUnset = 0;      // no vsetvli on some path
inline constexpr int kSewConflict = -1;  // paths disagree

inline int join_sew(int a, int b) { return a == b ? a : kSewConflict; }

inline std::vector<std::size_t> successors(const Program& p, std::size_t i) {
  const auto& instr = p.instructions[i];
  std::vector<std::size_t> out;
  const bool is_branch = !instr.operands.empty() &&
                         std::holds_alternative<LabelRef>(instr.operands.back());
  if (is_branch) out.push_back(std::get<LabelRef>(instr.operands.back()).target);
  if (instr.op != Opcode::j) out.push_back(i + 1);
  return out;
}

/// SEW reaching each instruction along every path; index size() is the exit.
inline std::vector<int> reaching_sew(const Program& p) {
  const std::size_t n = p.size();
  std::vector<std::optional<int>> in(n + 1);
  if (n == 0) return {kSewUnset};
  in[0] = kSewUnset;
  std::vector<std::size_t> work{0};
  while (!work.empty()) {
    const std::size_t i = work.back();
    work.pop_back();
    if (i >= n) continue;
    int out = *in[i];
    if (p.instructions[i].op == Opcode::vsetvli)
      out = static_cast<int>(
          std::get<VTypeSpec>(p.instructions[i].operands.back()).sew);
    for (std::size_t s : successors(p, i)) {
      const int joined = in[s] ? join_sew(*in[s], out) : out;
      if (!in[s] || *in[s] != joined) {
        in[s] = joined;
        work.push_back(s);
      }
    }
  }
  std::vector<int> result(n + 1, kSewUnset);
  for (std::size_t i = 0; i <= n; ++i)
    if (in[i]) result[i] = *in[i];
  return result;
}

}  // namespace detail

/// Rewrites a whole RVV 1.0 program. Every failure is collected; the result
/// carries either the translated program or the full diagnostic list.
inline TranspileResult transpile_program(const Program& program) {
  TranspileResult result;
  const auto sew_in = detail::reaching_sew(program);
  Program out;
  out.labels = program.labels;
  out.instructions.reserve(program.size());
  for (std::size_t i = 0; i < program.size(); ++i) {
    const auto& instr = program.instructions[i];
    try {
      out.instructions.push_back(transpile_instruction(instr));
    } catch (const TranspileError& e) {
      result.diagnostics.push_back({instr.line, 1, e.what(), Severity::error});
      continue;
    }
    if (instr.dialect != Dialect::rvv1_0) continue;
    const auto entry = mnemonic_map().find(instr.mnemonic());
    if (entry->second.rewrite != OperandRewrite::elide_width) continue;
    const int sew = sew_in[i];
    if (sew != static_cast<int>(entry->second.width)) {
      std::string have = sew == detail::kSewUnset
                             ? "no vsetvli on some path"
                             : sew == detail::kSewConflict
                                   ? "conflicting SEW on different paths"
                                   : "SEW=" + std::to_string(sew);
      result.diagnostics.push_back(
          {instr.line, 1,
           "'" + format_instruction(instr) + "' needs SEW=" +
               std::to_string(entry->second.width) +
               " in effect to drop the width suffix, but found " + have,
           Severity::error});
    }
  }
  if (result.diagnostics.empty()) result.program = std::move(out);
  return result;
}

}  // namespace rvvlab
