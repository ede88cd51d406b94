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

// Data model for the supported RISC-V scalar + vector subset: vector
// configuration, instructions, programs and the architectural state the
// simulator mutates. Both vector dialects (ratified RVV 1.0 and the
// XTheadVector flavour of RVV 0.7.1) share one opcode space; an instruction
// carries its dialect tag and the mnemonic is derived from (opcode, dialect).

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rvvlab/error.hpp"

namespace rvvlab {

enum class Dialect : std::uint8_t { common, rvv1_0, rvv0_7 };

inline std::string_view dialect_name(Dialect d) {
  switch (d) {
    case Dialect::common:
      return "common";
    case Dialect::rvv1_0:
      return "rvv1_0";
    case Dialect::rvv0_7:
      return "rvv0_7";
  }
  return "?";
}

inline std::optional<Dialect> parse_dialect(std::string_view s) {
  if (s == "rvv1_0" || s == "rvv1.0" || s == "1.0") return Dialect::rvv1_0;
  if (s == "rvv0_7" || s == "rvv0.7" || s == "0.7" || s == "theadvector" ||
      s == "xtheadvector")
    return Dialect::rvv0_7;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Vector configuration.

struct VType {
  unsigned sew = 64;
  unsigned lmul = 1;
  std::uint64_t vl = 0;

  friend bool operator==(const VType&, const VType&) = default;
};

struct MachineConfig {
  unsigned vlen = 128;
  unsigned freg_count = 32;
  unsigned vreg_count = 32;
  unsigned xreg_count = 32;

  unsigned vlenb() const { return vlen / 8; }

  void validate() const {
    if (vlen < 64 || !std::has_single_bit(vlen))
      throw ConfigError("vlen must be a power of two >= 64, got " +
                        std::to_string(vlen));
    if (freg_count != 32 || vreg_count != 32 || xreg_count != 32)
      throw ConfigError("register file sizes are fixed at 32");
  }

  friend bool operator==(const MachineConfig&, const MachineConfig&) = default;
};

inline bool valid_sew(unsigned sew) { return sew == 32 || sew == 64; }

inline bool valid_lmul(unsigned lmul) {
  return lmul == 1 || lmul == 2 || lmul == 4 || lmul == 8;
}

/// Elements held by one register group: vlen * lmul / sew.
inline std::uint64_t vlmax(unsigned vlen, unsigned sew, unsigned lmul) {
  if (!valid_sew(sew))
    throw ConfigError("unsupported SEW " + std::to_string(sew) +
                      " (expected 32 or 64)");
  if (!valid_lmul(lmul))
    throw ConfigError("unsupported LMUL " + std::to_string(lmul) +
                      " (expected 1, 2, 4 or 8)");
  if (vlen == 0 || vlen % sew != 0)
    throw ConfigError("SEW " + std::to_string(sew) + " does not divide VLEN " +
                      std::to_string(vlen));
  return std::uint64_t{vlen} * lmul / sew;
}

struct GroupViolation {
  unsigned reg;
  unsigned lmul;
  std::string message() const {
    return "register group v" + std::to_string(reg) +
           " is not aligned to LMUL=" + std::to_string(lmul);
  }
  friend bool operator==(const GroupViolation&, const GroupViolation&) = default;
};

/// A register group under LMUL=g must start at a multiple of g.
inline std::optional<GroupViolation> validate_group(unsigned reg,
                                                    unsigned lmul) {
  if (lmul == 0 || reg % lmul != 0) return GroupViolation{reg, lmul};
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Opcodes and their per-dialect mnemonics.

enum class Opcode : std::uint8_t {
  addi,
  add,
  mul,
  slli,
  ld,
  sd,
  fld,
  fsd,
  beq,
  bne,
  blt,
  bge,
  beqz,
  bnez,
  bltz,
  bgez,
  j,
  vsetvli,
  vle32_v,
  vle64_v,
  vse32_v,
  vse64_v,
  vle_v,  // SEW-implicit, 0.7.1 only
  vse_v,  // SEW-implicit, 0.7.1 only
  vfmacc_vf,
  vfmul_vf,
  vfadd_vv,
  vmv_v_i,
};

enum class OperandKind : std::uint8_t { vreg, xreg, freg, imm, mem, vtype, label };

enum class Category : std::uint8_t {
  scalar,
  vsetvl,
  vector_load,
  vector_store,
  vector_fma,
  vector_other,
};

struct OpInfo {
  Opcode op;
  std::string_view mnemonic;
  Dialect dialect;
  Category category;
  std::uint8_t arity;
  std::array<OperandKind, 3> signature;
};

namespace detail {

using K = OperandKind;
using C = Category;
using D = Dialect;

inline constexpr std::array<OpInfo, 39> kOpTable{{
    {Opcode::addi, "addi", D::common, C::scalar, 3, {K::xreg, K::xreg, K::imm}},
    {Opcode::add, "add", D::common, C::scalar, 3, {K::xreg, K::xreg, K::xreg}},
    {Opcode::mul, "mul", D::common, C::scalar, 3, {K::xreg, K::xreg, K::xreg}},
    {Opcode::slli, "slli", D::common, C::scalar, 3, {K::xreg, K::xreg, K::imm}},
    {Opcode::ld, "ld", D::common, C::scalar, 2, {K::xreg, K::mem}},
    {Opcode::sd, "sd", D::common, C::scalar, 2, {K::xreg, K::mem}},
    {Opcode::fld, "fld", D::common, C::scalar, 2, {K::freg, K::mem}},
    {Opcode::fsd, "fsd", D::common, C::scalar, 2, {K::freg, K::mem}},
    {Opcode::beq, "beq", D::common, C::scalar, 3, {K::xreg, K::xreg, K::label}},
    {Opcode::bne, "bne", D::common, C::scalar, 3, {K::xreg, K::xreg, K::label}},
    {Opcode::blt, "blt", D::common, C::scalar, 3, {K::xreg, K::xreg, K::label}},
    {Opcode::bge, "bge", D::common, C::scalar, 3, {K::xreg, K::xreg, K::label}},
    {Opcode::beqz, "beqz", D::common, C::scalar, 2, {K::xreg, K::label}},
    {Opcode::bnez, "bnez", D::common, C::scalar, 2, {K::xreg, K::label}},
    {Opcode::bltz, "bltz", D::common, C::scalar, 2, {K::xreg, K::label}},
    {Opcode::bgez, "bgez", D::common, C::scalar, 2, {K::xreg, K::label}},
    {Opcode::j, "j", D::common, C::scalar, 1, {K::label}},
    // RVV 1.0
    {Opcode::vsetvli, "vsetvli", D::rvv1_0, C::vsetvl, 3, {K::xreg, K::xreg, K::vtype}},
    {Opcode::vle32_v, "vle32.v", D::rvv1_0, C::vector_load, 2, {K::vreg, K::mem}},
    {Opcode::vle64_v, "vle64.v", D::rvv1_0, C::vector_load, 2, {K::vreg, K::mem}},
    {Opcode::vse32_v, "vse32.v", D::rvv1_0, C::vector_store, 2, {K::vreg, K::mem}},
    {Opcode::vse64_v, "vse64.v", D::rvv1_0, C::vector_store, 2, {K::vreg, K::mem}},
    {Opcode::vfmacc_vf, "vfmacc.vf", D::rvv1_0, C::vector_fma, 3, {K::vreg, K::freg, K::vreg}},
    {Opcode::vfmul_vf, "vfmul.vf", D::rvv1_0, C::vector_other, 3, {K::vreg, K::vreg, K::freg}},
    {Opcode::vfadd_vv, "vfadd.vv", D::rvv1_0, C::vector_other, 3, {K::vreg, K::vreg, K::vreg}},
    {Opcode::vmv_v_i, "vmv.v.i", D::rvv1_0, C::vector_other, 2, {K::vreg, K::imm}},
    // RVV 0.7.1 (XTheadVector spelling)
    {Opcode::vsetvli, "th.vsetvli", D::rvv0_7, C::vsetvl, 3, {K::xreg, K::xreg, K::vtype}},
    {Opcode::vle_v, "th.vle.v", D::rvv0_7, C::vector_load, 2, {K::vreg, K::mem}},
    {Opcode::vse_v, "th.vse.v", D::rvv0_7, C::vector_store, 2, {K::vreg, K::mem}},
    {Opcode::vfmacc_vf, "th.vfmacc.vf", D::rvv0_7, C::vector_fma, 3, {K::vreg, K::freg, K::vreg}},
    {Opcode::vfmul_vf, "th.vfmul.vf", D::rvv0_7, C::vector_other, 3, {K::vreg, K::vreg, K::freg}},
    {Opcode::vfadd_vv, "th.vfadd.vv", D::rvv0_7, C::vector_other, 3, {K::vreg, K::vreg, K::vreg}},
    {Opcode::vmv_v_i, "th.vmv.v.i", D::rvv0_7, C::vector_other, 2, {K::vreg, K::imm}},
    // Width-suffixed 0.7.1 forms exist in the draft ISA but are outside the
    // supported subset; listed so the parser can give a precise diagnostic.
    {Opcode::vle32_v, "th.vle32.v", D::rvv0_7, C::vector_load, 0, {}},
    {Opcode::vle64_v, "th.vle64.v", D::rvv0_7, C::vector_load, 0, {}},
    {Opcode::vse32_v, "th.vse32.v", D::rvv0_7, C::vector_store, 0, {}},
    {Opcode::vse64_v, "th.vse64.v", D::rvv0_7, C::vector_store, 0, {}},
    {Opcode::vle_v, "vle.v", D::rvv1_0, C::vector_load, 0, {}},
    {Opcode::vse_v, "vse.v", D::rvv1_0, C::vector_store, 0, {}},
}};

}  // namespace detail

/// Every supported (opcode, dialect) pairing. Entries with arity 0 are
/// recognised spellings that the subset deliberately does not accept.
inline std::span<const OpInfo> op_table() { return detail::kOpTable; }

inline const OpInfo* find_op(std::string_view mnemonic) {
  for (const auto& info : detail::kOpTable)
    if (info.mnemonic == mnemonic) return &info;
  return nullptr;
}

inline const OpInfo* find_op(Opcode op, Dialect dialect) {
  for (const auto& info : detail::kOpTable)
    if (info.op == op && info.dialect == dialect && info.arity != 0)
      return &info;
  return nullptr;
}

inline bool is_vector_category(Category c) { return c != Category::scalar; }

// ---------------------------------------------------------------------------
// Operands.

struct VReg {
  unsigned n = 0;
  friend bool operator==(const VReg&, const VReg&) = default;
};
struct XReg {
  unsigned n = 0;
  friend bool operator==(const XReg&, const XReg&) = default;
};
struct FReg {
  unsigned n = 0;
  friend bool operator==(const FReg&, const FReg&) = default;
};
struct Imm {
  std::int64_t value = 0;
  friend bool operator==(const Imm&, const Imm&) = default;
};
struct Mem {
  XReg base;
  std::int64_t offset = 0;
  friend bool operator==(const Mem&, const Mem&) = default;
};

enum class Policy : std::uint8_t { unspecified, agnostic, undisturbed };

struct VTypeSpec {
  unsigned sew = 64;
  unsigned lmul = 1;
  Policy tail = Policy::unspecified;
  Policy mask = Policy::unspecified;
  friend bool operator==(const VTypeSpec&, const VTypeSpec&) = default;
};

struct LabelRef {
  std::string name;
  std::size_t target = 0;
  friend bool operator==(const LabelRef&, const LabelRef&) = default;
};

using Operand = std::variant<VReg, XReg, FReg, Imm, Mem, VTypeSpec, LabelRef>;

inline constexpr std::array<std::string_view, 32> kXAbiNames{
    "zero", "ra", "sp", "gp", "tp",  "t0",  "t1", "t2", "s0", "s1", "a0",
    "a1",   "a2", "a3", "a4", "a5",  "a6",  "a7", "s2", "s3", "s4", "s5",
    "s6",   "s7", "s8", "s9", "s10", "s11", "t3", "t4", "t5", "t6"};

inline constexpr std::array<std::string_view, 32> kFAbiNames{
    "ft0", "ft1", "ft2",  "ft3",  "ft4", "ft5", "ft6",  "ft7",
    "fs0", "fs1", "fa0",  "fa1",  "fa2", "fa3", "fa4",  "fa5",
    "fa6", "fa7", "fs2",  "fs3",  "fs4", "fs5", "fs6",  "fs7",
    "fs8", "fs9", "fs10", "fs11", "ft8", "ft9", "ft10", "ft11"};

// Named x registers used by the micro-kernel calling convention and tests.
namespace reg {
inline constexpr XReg zero{0}, ra{1}, sp{2}, t0{5}, t1{6}, t2{7}, s0{8},
    s1{9}, a0{10}, a1{11}, a2{12}, a3{13}, a4{14}, a5{15}, a6{16}, a7{17},
    s2{18}, s3{19}, t3{28}, t4{29}, t5{30}, t6{31};
}  // namespace reg

inline std::string format_operand(const Operand& operand) {
  struct Visitor {
    std::string operator()(const VReg& r) const {
      return "v" + std::to_string(r.n);
    }
    std::string operator()(const XReg& r) const {
      return std::string(kXAbiNames.at(r.n));
    }
    std::string operator()(const FReg& r) const {
      return "f" + std::to_string(r.n);
    }
    std::string operator()(const Imm& i) const {
      return std::to_string(i.value);
    }
    std::string operator()(const Mem& m) const {
      return std::to_string(m.offset) + "(" +
             std::string(kXAbiNames.at(m.base.n)) + ")";
    }
    std::string operator()(const VTypeSpec& v) const {
      std::string s = "e" + std::to_string(v.sew) + ", m" + std::to_string(v.lmul);
      if (v.tail != Policy::unspecified)
        s += v.tail == Policy::agnostic ? ", ta" : ", tu";
      if (v.mask != Policy::unspecified)
        s += v.mask == Policy::agnostic ? ", ma" : ", mu";
      return s;
    }
    std::string operator()(const LabelRef& l) const { return l.name; }
  };
  return std::visit(Visitor{}, operand);
}

// ---------------------------------------------------------------------------
// Instructions and programs.

struct Instruction {
  Opcode op = Opcode::addi;
  Dialect dialect = Dialect::common;
  std::vector<Operand> operands;
  /// 1-based source line, 0 for synthesized instructions. Not part of the
  /// instruction's identity.
  int line = 0;

  const OpInfo& info() const {
    const OpInfo* i = find_op(op, dialect);
    if (i == nullptr) throw Error("opcode has no mnemonic in this dialect");
    return *i;
  }
  std::string_view mnemonic() const { return info().mnemonic; }
  Category category() const { return info().category; }
  bool is_vector() const { return is_vector_category(category()); }

  template <typename T>
  const T& operand(std::size_t i) const {
    return std::get<T>(operands.at(i));
  }

  friend bool operator==(const Instruction& a, const Instruction& b) {
    return a.op == b.op && a.dialect == b.dialect && a.operands == b.operands;
  }
};

/// Single-line assembly text of an instruction, without indentation.
inline std::string format_instruction(const Instruction& instr) {
  std::string s(instr.mnemonic());
  const bool vector_mem = instr.is_vector();
  for (std::size_t i = 0; i < instr.operands.size(); ++i) {
    s += i == 0 ? " " : ", ";
    const auto& operand = instr.operands[i];
    if (vector_mem && std::holds_alternative<Mem>(operand))
      s += "(" + std::string(kXAbiNames.at(std::get<Mem>(operand).base.n)) + ")";
    else
      s += format_operand(operand);
  }
  return s;
}

struct Program {
  std::vector<Instruction> instructions;
  std::map<std::string, std::size_t> labels;

  std::size_t size() const { return instructions.size(); }
  bool empty() const { return instructions.empty(); }

  friend bool operator==(const Program&, const Program&) = default;
};

// ---------------------------------------------------------------------------
// Architectural state.

/// Flat byte-addressable memory covering [base, base + bytes.size()).
struct Memory {
  std::uint64_t base = 0;
  std::vector<std::uint8_t> bytes;

  Memory() = default;
  Memory(std::uint64_t base_address, std::size_t size)
      : base(base_address), bytes(size, 0) {}

  std::uint64_t end() const { return base + bytes.size(); }

  bool contains(std::uint64_t address, std::uint64_t length) const {
    return address >= base && length <= bytes.size() &&
           address - base <= bytes.size() - length;
  }

  std::uint8_t* at(std::uint64_t address, std::uint64_t length) {
    if (!contains(address, length)) throw RangeError("address out of image");
    return bytes.data() + (address - base);
  }
  const std::uint8_t* at(std::uint64_t address, std::uint64_t length) const {
    if (!contains(address, length)) throw RangeError("address out of image");
    return bytes.data() + (address - base);
  }

  template <typename T>
  T load(std::uint64_t address) const {
    T value;
    std::memcpy(&value, at(address, sizeof(T)), sizeof(T));
    return value;
  }
  template <typename T>
  void store(std::uint64_t address, T value) {
    std::memcpy(at(address, sizeof(T)), &value, sizeof(T));
  }

  void store_doubles(std::uint64_t address, std::span<const double> values) {
    if (values.empty()) return;
    std::memcpy(at(address, values.size_bytes()), values.data(),
                values.size_bytes());
  }
  std::vector<double> load_doubles(std::uint64_t address,
                                   std::size_t count) const {
    std::vector<double> out(count);
    if (count != 0)
      std::memcpy(out.data(), at(address, count * sizeof(double)),
                  count * sizeof(double));
    return out;
  }

  friend bool operator==(const Memory&, const Memory&) = default;
};

struct MachineState {
  VType vtype;
  /// 32 registers of vlen bits, back to back; a register group is a
  /// contiguous byte range.
  std::vector<std::uint8_t> vregs;
  std::array<std::uint64_t, 32> xregs{};
  /// Raw 64-bit patterns; single-precision values are NaN-boxed.
  std::array<std::uint64_t, 32> fregs{};
  Memory mem;
  std::size_t pc = 0;

  MachineState() = default;
  explicit MachineState(const MachineConfig& config, Memory memory = {})
      : vregs(std::size_t{config.vreg_count} * config.vlenb(), 0),
        mem(std::move(memory)) {
    config.validate();
  }

  std::size_t vlenb() const { return vregs.size() / 32; }

  void set_x(XReg r, std::uint64_t value) {
    if (r.n != 0) xregs.at(r.n) = value;
  }
  std::uint64_t x(XReg r) const { return xregs.at(r.n); }

  void set_f64(FReg r, double value) {
    fregs.at(r.n) = std::bit_cast<std::uint64_t>(value);
  }
  double f64(FReg r) const { return std::bit_cast<double>(fregs.at(r.n)); }
  void set_f32(FReg r, float value) {
    fregs.at(r.n) =
        0xFFFF'FFFF'0000'0000ull | std::bit_cast<std::uint32_t>(value);
  }
  /// NaN-boxing check: a value that is not a valid boxed single reads as the
  /// canonical quiet NaN.
  float f32(FReg r) const {
    const std::uint64_t bits = fregs.at(r.n);
    if ((bits >> 32) != 0xFFFF'FFFFull) return std::bit_cast<float>(0x7FC0'0000u);
    return std::bit_cast<float>(static_cast<std::uint32_t>(bits));
  }

  template <typename T>
  T velem(unsigned reg, std::size_t index) const {
    T value;
    std::memcpy(&value, vregs.data() + reg * vlenb() + index * sizeof(T),
                sizeof(T));
    return value;
  }
  template <typename T>
  void set_velem(unsigned reg, std::size_t index, T value) {
    std::memcpy(vregs.data() + reg * vlenb() + index * sizeof(T), &value,
                sizeof(T));
  }

  friend bool operator==(const MachineState&, const MachineState&) = default;
};

}  // namespace rvvlab
