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

// Random generator of valid, terminating, fault-free RVV 1.0 programs plus a
// matching initial machine state. Test-only.

#pragma once

#include <string>

#include "rvvlab/isa.hpp"
#include "rvvlab/rng.hpp"

namespace rvvlab::testing {

struct GeneratedCase {
  std::string source;
  MachineState initial;
};

class ProgramGenerator {
 public:
  static constexpr std::uint64_t kMemBase = 0x8000;
  static constexpr std::uint64_t kMemSize = 4096;

  ProgramGenerator(std::uint64_t seed, unsigned vlen = 128)
      : rng_(seed, 0x9e0), vlen_(vlen) {}

  GeneratedCase next(std::size_t length = 24) {
    src_.clear();
    labels_ = 0;
    vsetvli();
    while (count_ < length) {
      const auto pick = rng_.below(10);
      if (pick == 0) {
        vsetvli();
      } else if (pick == 1) {
        loop();
      } else if (pick == 2) {
        skip();
      } else {
        body_instruction();
      }
    }
    count_ = 0;
    return {src_, initial_state()};
  }

 private:
  std::string xname(unsigned n) {
    if (rng_.below(4) == 0) return "x" + std::to_string(n);
    return std::string(kXAbiNames[n]);
  }
  std::string mnemonic(std::string m) {
    if (rng_.below(6) == 0)
      for (auto& c : m) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return m;
  }
  std::string vreg() {
    const unsigned groups = 32 / lmul_;
    return "v" + std::to_string(static_cast<unsigned>(rng_.below(groups)) * lmul_);
  }
  std::string freg() { return "f" + std::to_string(rng_.below(12)); }
  // Scratch integer registers the program may clobber freely.
  unsigned scratch() {
    static constexpr unsigned kRegs[] = {5, 6, 7, 14, 15, 16, 17};
    return kRegs[rng_.below(std::size(kRegs))];
  }
  unsigned pointer() { return 18 + static_cast<unsigned>(rng_.below(3)); }  // s2..s4

  void emit(const std::string& line) {
    src_ += (rng_.below(3) == 0 ? "\t" : "    ") + line + "\n";
    ++count_;
  }

  void vsetvli() {
    sew_ = rng_.below(2) == 0 ? 32 : 64;
    lmul_ = 1u << rng_.below(4);
    const unsigned rd = rng_.below(4) == 0 ? 0 : 5 + static_cast<unsigned>(rng_.below(2));
    // rs1 = x0 with rd = x0 is left out: its meaning differs between dialects.
    const unsigned rs1 = rng_.below(4) == 0 && rd != 0 ? 0 : 10 + static_cast<unsigned>(rng_.below(4));
    std::string line = mnemonic("vsetvli") + " " + xname(rd) + ", " + xname(rs1) + ", e" +
                       std::to_string(sew_) + ", m" + std::to_string(lmul_);
    switch (rng_.below(4)) {
      case 0: line += ", ta, ma"; break;
      case 1: line += ", tu, mu"; break;
      case 2: line += ", ta"; break;
      default: break;
    }
    emit(line);
  }

  void body_instruction() {
    const std::string w = std::to_string(sew_);
    switch (rng_.below(12)) {
      case 0:
        emit(mnemonic("vle" + w + ".v") + " " + vreg() + ", (" + xname(pointer()) + ")");
        break;
      case 1:
        emit(mnemonic("vse" + w + ".v") + " " + vreg() + ", 0(" + xname(pointer()) + ")");
        break;
      case 2:
      case 3:
        emit(mnemonic("vfmacc.vf") + " " + vreg() + ", " + freg() + ", " + vreg());
        break;
      case 4:
        emit(mnemonic("vfmul.vf") + " " + vreg() + ", " + vreg() + ", " + freg());
        break;
      case 5:
        emit(mnemonic("vfadd.vv") + " " + vreg() + ", " + vreg() + ", " + vreg());
        break;
      case 6:
        emit(mnemonic("vmv.v.i") + " " + vreg() + ", " + std::to_string(rng_.range(-16, 15)));
        break;
      case 7:
        emit("addi " + xname(scratch()) + ", " + xname(scratch()) + ", " +
             std::to_string(rng_.range(-2048, 2047)));
        break;
      case 8: {
        static constexpr const char* kOps[] = {"add", "mul"};
        emit(std::string(kOps[rng_.below(2)]) + " " + xname(scratch()) + ", " +
             xname(scratch()) + ", " + xname(scratch()));
        break;
      }
      case 9:
        emit("slli " + xname(scratch()) + ", " + xname(scratch()) + ", " +
             std::to_string(rng_.below(64)));
        break;
      case 10: {
        const std::string mem = std::to_string(8 * rng_.below(120)) + "(" + xname(pointer()) + ")";
        if (rng_.below(2) == 0)
          emit((rng_.below(2) == 0 ? "ld " : "sd ") + xname(scratch()) + ", " + mem);
        else
          emit((rng_.below(2) == 0 ? "fld " : "fsd ") + freg() + ", " + mem);
        break;
      }
      default:
        emit("fld " + freg() + ", " + std::to_string(8 * rng_.below(120)) + "(" +
             xname(pointer()) + ")");
        break;
    }
  }

  void loop() {
    const std::string label = ".Lloop" + std::to_string(labels_++);
    emit("addi t3, zero, " + std::to_string(1 + rng_.below(4)));
    src_ += label + ":\n";
    const auto n = 1 + rng_.below(4);
    for (std::uint64_t i = 0; i < n; ++i) body_instruction();
    emit("addi t3, t3, -1");
    emit("bnez t3, " + label);
  }

  void skip() {
    const std::string label = "skip_" + std::to_string(labels_++);
    static constexpr const char* kTwo[] = {"beq", "bne", "blt", "bge"};
    static constexpr const char* kOne[] = {"beqz", "bnez", "bltz", "bgez"};
    switch (rng_.below(3)) {
      case 0:
        emit(std::string(kTwo[rng_.below(4)]) + " " + xname(scratch()) + ", " +
             xname(scratch()) + ", " + label);
        break;
      case 1:
        emit(std::string(kOne[rng_.below(4)]) + " " + xname(scratch()) + ", " + label);
        break;
      default:
        // Whatever follows an unconditional jump would be dead code.
        emit("j " + label);
        src_ += label + ":\n";
        return;
    }
    const auto n = 1 + rng_.below(3);
    for (std::uint64_t i = 0; i < n; ++i) body_instruction();
    src_ += label + ":";
    src_ += rng_.below(2) == 0 ? "\n" : "   # join\n";
  }

  MachineState initial_state() {
    MachineState s(MachineConfig{vlen_}, Memory(kMemBase, kMemSize));
    for (auto& b : s.mem.bytes) b = static_cast<std::uint8_t>(rng_());
    for (auto& b : s.vregs) b = static_cast<std::uint8_t>(rng_());
    for (unsigned i = 1; i < 32; ++i) s.xregs[i] = rng_.below(64);
    s.xregs[18] = kMemBase;
    s.xregs[19] = kMemBase + 1024;
    s.xregs[20] = kMemBase + 2048;
    for (unsigned i = 0; i < 8; ++i) s.set_f64(FReg{i}, rng_.uniform(-4.0, 4.0));
    for (unsigned i = 8; i < 12; ++i)
      s.set_f32(FReg{i}, static_cast<float>(rng_.uniform(-4.0, 4.0)));
    return s;
  }

  CounterRng rng_;
  unsigned vlen_;
  std::string src_;
  std::size_t count_ = 0;
  unsigned labels_ = 0;
  unsigned sew_ = 64;
  unsigned lmul_ = 1;
};

}  // namespace rvvlab::testing
