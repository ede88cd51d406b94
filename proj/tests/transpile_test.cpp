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

#include "rvvlab/transpile.hpp"

#include <gtest/gtest.h>

#include "program_gen.hpp"
#include "rvvlab/asm.hpp"
#include "rvvlab/vsim.hpp"

namespace rvvlab {
namespace {

Instruction one(std::string_view src, Dialect d = Dialect::rvv1_0) {
  auto r = parse_program(src, d);
  EXPECT_TRUE(r.ok()) << src;
  if (!r.ok() || r.program->size() != 1) return {};
  return r.program->instructions[0];
}

std::string translated(std::string_view src) {
  return format_instruction(transpile_instruction(one(src)));
}

TEST(TranspileInstructionTest, Examples) {
  EXPECT_EQ(translated("vfmacc.vf v8, f0, v4"), "th.vfmacc.vf v8, f0, v4");
  EXPECT_EQ(translated("vle64.v v4, (a1)"), "th.vle.v v4, (a1)");
  EXPECT_EQ(translated("vsetvli t0, a0, e64, m4, ta, ma"), "th.vsetvli t0, a0, e64, m4");
  EXPECT_EQ(translated("addi a0, a0, 8"), "addi a0, a0, 8");
}

TEST(TranspileInstructionTest, OutputMatchesTheOldDialectParse) {
  for (std::string_view src : {"vfmacc.vf v8, f0, v4", "vle64.v v4, (a1)", "vse32.v v2, (s2)",
                               "vsetvli t0, a0, e32, m2, tu, mu", "vfmul.vf v1, v2, f3",
                               "vfadd.vv v1, v2, v3", "vmv.v.i v8, -3", "fld f0, 8(a2)"}) {
    const Instruction out = transpile_instruction(one(src));
    const Instruction reparsed = one(format_instruction(out), Dialect::rvv0_7);
    EXPECT_EQ(out, reparsed) << src;
  }
}

TEST(TranspileInstructionTest, RejectsOldDialectInput) {
  EXPECT_THROW(transpile_instruction(one("th.vfmacc.vf v8, f0, v4", Dialect::rvv0_7)),
               TranspileError);
}

TEST(TranspileInstructionTest, RejectsVsetvliKeepVlForm) {
  try {
    transpile_instruction(one("vsetvli x0, x0, e64, m1"));
    FAIL() << "expected TranspileError";
  } catch (const TranspileError& e) {
    EXPECT_NE(std::string(e.what()).find("untranslatable instruction"), std::string::npos);
  }
  EXPECT_NO_THROW(transpile_instruction(one("vsetvli t0, x0, e64, m1")));
  EXPECT_NO_THROW(transpile_instruction(one("vsetvli x0, a0, e64, m1")));
}

TEST(MnemonicMapTest, TotalOverTheNewDialectVectorSubset) {
  for (const auto& info : op_table()) {
    if (info.dialect != Dialect::rvv1_0 || info.arity == 0) continue;
    const auto it = mnemonic_map().find(info.mnemonic);
    ASSERT_NE(it, mnemonic_map().end()) << info.mnemonic;
    EXPECT_TRUE(it->second.target.starts_with("th.")) << it->second.target;
    const OpInfo* target = find_op(it->second.target);
    ASSERT_NE(target, nullptr) << it->second.target;
    EXPECT_EQ(target->dialect, Dialect::rvv0_7);
    EXPECT_GT(target->arity, 0u);
  }
  for (const auto& [from, entry] : mnemonic_map()) {
    const OpInfo* source = find_op(from);
    ASSERT_NE(source, nullptr) << from;
    EXPECT_EQ(source->dialect, Dialect::rvv1_0);
  }
}

TEST(TranspileProgramTest, EmptyProgram) {
  const auto r = transpile_program(Program{});
  ASSERT_TRUE(r.ok());
  EXPECT_TRUE(r.program->empty());
}

TEST(TranspileProgramTest, PreservesStructure) {
  const auto p = parse_program(
      "vsetvli t0, a0, e64, m4, ta, ma\n"
      ".Lk:\n"
      "vle64.v v4, (a1)\n"
      "addi a0, a0, -1\n"
      "bnez a0, .Lk\n",
      Dialect::rvv1_0);
  ASSERT_TRUE(p.ok());
  const auto r = transpile_program(*p.program);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.program->size(), p.program->size());
  EXPECT_EQ(r.program->labels, p.program->labels);
  EXPECT_EQ(print_program(*r.program, Dialect::rvv0_7),
            "th.vsetvli t0, a0, e64, m4\n"
            ".Lk:\n"
            "th.vle.v v4, (a1)\n"
            "addi a0, a0, -1\n"
            "bnez a0, .Lk\n");
}

TEST(TranspileProgramTest, WidthMustMatchTheSewInEffect) {
  auto check = [](std::string_view src, std::size_t errors) {
    const auto p = parse_program(src, Dialect::rvv1_0);
    ASSERT_TRUE(p.ok()) << src;
    const auto r = transpile_program(*p.program);
    EXPECT_EQ(r.diagnostics.size(), errors) << src;
    EXPECT_EQ(r.ok(), errors == 0);
  };
  check("vsetvli t0, a0, e32, m1\nvle64.v v4, (a1)\n", 1);
  check("vle64.v v4, (a1)\n", 1);
  check("vsetvli t0, a0, e64, m1\nvle64.v v4, (a1)\nvse64.v v4, (a2)\n", 0);
  // Paths that disagree about SEW at a join.
  check(
      "vsetvli t0, a0, e64, m1\n"
      "beqz a5, .Lj\n"
      "vsetvli t0, a0, e32, m1\n"
      ".Lj:\n"
      "vle64.v v4, (a1)\n",
      1);
  // A loop that switches SEW before jumping back.
  check(
      "vsetvli t0, a0, e64, m1\n"
      ".Ll:\n"
      "vle64.v v4, (a1)\n"
      "vsetvli t0, a0, e32, m1\n"
      "bnez a5, .Ll\n",
      1);
  // Unreachable code has no SEW in effect.
  check("vsetvli t0, a0, e64, m1\nj .Le\nvse64.v v4, (a1)\n.Le:\n", 1);
}

TEST(TranspileProgramTest, AggregatesEveryFailure) {
  const auto p = parse_program(
      "vle64.v v4, (a1)\n"
      "vsetvli x0, x0, e64, m1\n"
      "vse32.v v4, (a1)\n",
      Dialect::rvv1_0);
  ASSERT_TRUE(p.ok());
  const auto r = transpile_program(*p.program);
  EXPECT_FALSE(r.ok());
  ASSERT_EQ(r.diagnostics.size(), 3u);
  EXPECT_EQ(r.diagnostics[0].line, 1);
  EXPECT_EQ(r.diagnostics[1].line, 2);
  EXPECT_EQ(r.diagnostics[2].line, 3);
}

TEST(TranspileProgramTest, RejectsOldDialectPrograms) {
  const auto p = parse_program("th.vfmacc.vf v8, f0, v4\n", Dialect::rvv0_7);
  ASSERT_TRUE(p.ok());
  const auto r = transpile_program(*p.program);
  EXPECT_FALSE(r.ok());
  EXPECT_NE(r.diagnostics.at(0).message.find("rvv0_7"), std::string::npos);
}

TEST(TranspileProgramTest, SemanticPreservationOnRandomPrograms) {
  testing::ProgramGenerator gen(23);
  const MachineConfig config{};
  for (int i = 0; i < 200; ++i) {
    const auto c = gen.next(6 + i % 50);
    const auto p = parse_program(c.source, Dialect::rvv1_0);
    ASSERT_TRUE(p.ok()) << c.source;
    const auto t = transpile_program(*p.program);
    ASSERT_TRUE(t.ok()) << c.source << "\n" << t.diagnostics.at(0).message;

    const std::string text = print_program(*t.program, Dialect::rvv0_7);
    const auto reparsed = parse_program(text, Dialect::rvv0_7);
    ASSERT_TRUE(reparsed.ok()) << text;
    EXPECT_EQ(*reparsed.program, *t.program);
    EXPECT_EQ(t.program->size(), p.program->size());
    EXPECT_EQ(t.program->labels, p.program->labels);
    for (const auto& in : t.program->instructions)
      EXPECT_EQ(in.mnemonic().starts_with("th."), in.is_vector()) << in.mnemonic();

    const auto a = run(*p.program, c.initial, config);
    const auto b = run(*t.program, c.initial, config);
    EXPECT_EQ(a.state.mem.bytes, b.state.mem.bytes) << c.source;
    EXPECT_EQ(a.state.vregs, b.state.vregs);
    EXPECT_EQ(a.state.xregs, b.state.xregs);
    EXPECT_EQ(a.state.fregs, b.state.fregs);
    EXPECT_EQ(a.trace, b.trace);
    EXPECT_EQ(a.stats, b.stats);
  }
}

}  // namespace
}  // namespace rvvlab
