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

// Functional interpreter for both vector dialects.
//
// Execution model: unmasked, tail-undisturbed, IEEE-754 binary64/binary32 in
// the host's default round-to-nearest-even mode with a single rounding for
// vfmacc. Every executed instruction is counted by category. A scalar access
// is reported as one TraceEvent; a vector access is reported as one event per
// register of the group it transfers, each at most VLEN/8 bytes, in ascending
// address order. Zero-length accesses are not reported.

#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rvvlab/isa.hpp"

namespace rvvlab {

struct SimStats {
  std::uint64_t vector_load = 0;
  std::uint64_t vector_store = 0;
  std::uint64_t vector_fma = 0;
  std::uint64_t vector_other = 0;
  std::uint64_t vsetvl = 0;
  std::uint64_t scalar = 0;
  std::uint64_t bytes_loaded = 0;
  std::uint64_t bytes_stored = 0;

  std::uint64_t total_dynamic() const {
    return vector_load + vector_store + vector_fma + vector_other + vsetvl +
           scalar;
  }
  /// Vector data-path instructions (loads, stores, arithmetic); vsetvl is
  /// configuration and is counted separately.
  std::uint64_t vector_ops() const {
    return vector_load + vector_store + vector_fma + vector_other;
  }

  void count(Category c) {
    switch (c) {
      case Category::scalar: ++scalar; break;
      case Category::vsetvl: ++vsetvl; break;
      case Category::vector_load: ++vector_load; break;
      case Category::vector_store: ++vector_store; break;
      case Category::vector_fma: ++vector_fma; break;
      case Category::vector_other: ++vector_other; break;
    }
  }

  SimStats& operator+=(const SimStats& o) {
    vector_load += o.vector_load;
    vector_store += o.vector_store;
    vector_fma += o.vector_fma;
    vector_other += o.vector_other;
    vsetvl += o.vsetvl;
    scalar += o.scalar;
    bytes_loaded += o.bytes_loaded;
    bytes_stored += o.bytes_stored;
    return *this;
  }
  friend SimStats operator-(SimStats a, const SimStats& b) {
    a.vector_load -= b.vector_load;
    a.vector_store -= b.vector_store;
    a.vector_fma -= b.vector_fma;
    a.vector_other -= b.vector_other;
    a.vsetvl -= b.vsetvl;
    a.scalar -= b.scalar;
    a.bytes_loaded -= b.bytes_loaded;
    a.bytes_stored -= b.bytes_stored;
    return a;
  }
  friend bool operator==(const SimStats&, const SimStats&) = default;
};

/// Flat key=value rendering, one counter per line.
inline std::string format_stats(const SimStats& s) {
  std::ostringstream os;
  os << "vector_load=" << s.vector_load << '\n'
     << "vector_store=" << s.vector_store << '\n'
     << "vector_fma=" << s.vector_fma << '\n'
     << "vector_other=" << s.vector_other << '\n'
     << "vsetvl=" << s.vsetvl << '\n'
     << "scalar=" << s.scalar << '\n'
     << "total_dynamic=" << s.total_dynamic() << '\n'
     << "bytes_loaded=" << s.bytes_loaded << '\n'
     << "bytes_stored=" << s.bytes_stored << '\n';
  return os.str();
}

enum class AccessKind : std::uint8_t { load, store };
enum class Origin : std::uint8_t { vector, scalar };

struct TraceEvent {
  AccessKind kind = AccessKind::load;
  std::uint64_t address = 0;
  std::uint64_t bytes = 0;
  Origin origin = Origin::scalar;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

using Trace = std::vector<TraceEvent>;

struct RunLimits {
  std::uint64_t max_instructions = 100'000'000;
};

enum class Fault : std::uint8_t {
  group_violation,
  memory_fault,
  unsupported_instruction,
  width_mismatch,
  timeout,
  bad_state,
};

inline std::string_view fault_name(Fault f) {
  switch (f) {
    case Fault::group_violation: return "group violation";
    case Fault::memory_fault: return "memory fault";
    case Fault::unsupported_instruction: return "unsupported instruction";
    case Fault::width_mismatch: return "element width mismatch";
    case Fault::timeout: return "instruction budget exhausted";
    case Fault::bad_state: return "invalid machine state";
  }
  return "fault";
}

/// A simulation fault. run() attaches the faulting pc, the instruction text
/// and the statistics accumulated before the fault.
class SimError : public Error {
 public:
  SimError(Fault fault, std::string detail, std::uint64_t address = 0)
      : Error(std::string(fault_name(fault)) + ": " + detail),
        fault_(fault),
        detail_(std::move(detail)),
        address_(address) {}

  Fault fault() const { return fault_; }
  std::uint64_t address() const { return address_; }
  std::optional<std::size_t> pc() const { return pc_; }
  const std::string& instruction() const { return instruction_; }
  const SimStats& partial_stats() const { return partial_; }

  const char* what() const noexcept override {
    return context_.empty() ? Error::what() : context_.c_str();
  }

  void attach(std::size_t pc, std::string instruction, const SimStats& partial) {
    pc_ = pc;
    instruction_ = std::move(instruction);
    partial_ = partial;
    context_ = std::string(Error::what()) + " at pc " + std::to_string(pc) +
               (instruction_.empty() ? "" : " ('" + instruction_ + "')");
  }

 private:
  Fault fault_;
  std::string detail_;
  std::uint64_t address_;
  std::optional<std::size_t> pc_;
  std::string instruction_;
  SimStats partial_;
  std::string context_;
};

struct StepOutcome {
  Trace events;
  SimStats delta;
};

namespace detail {

inline Category category_of(Opcode op) {
  switch (op) {
    case Opcode::vsetvli:
      return Category::vsetvl;
    case Opcode::vle32_v:
    case Opcode::vle64_v:
    case Opcode::vle_v:
      return Category::vector_load;
    case Opcode::vse32_v:
    case Opcode::vse64_v:
    case Opcode::vse_v:
      return Category::vector_store;
    case Opcode::vfmacc_vf:
      return Category::vector_fma;
    case Opcode::vfmul_vf:
    case Opcode::vfadd_vv:
    case Opcode::vmv_v_i:
      return Category::vector_other;
    default:
      return Category::scalar;
  }
}

inline void check_group(const MachineState& s, VReg r) {
  if (auto v = validate_group(r.n, s.vtype.lmul))
    throw SimError(Fault::group_violation, v->message());
}

inline std::uint64_t effective_address(const MachineState& s, const Mem& m) {
  return s.x(m.base) + static_cast<std::uint64_t>(m.offset);
}

inline void check_access(const MachineState& s, std::uint64_t address,
                         std::uint64_t bytes) {
  if (!s.mem.contains(address, bytes)) {
    std::ostringstream os;
    os << "access of " << bytes << " bytes at 0x" << std::hex << address
       << " outside memory image [0x" << s.mem.base << ", 0x" << s.mem.end()
       << ")";
    throw SimError(Fault::memory_fault, os.str(), address);
  }
}

inline bool branch_taken(const MachineState& s, const Instruction& in) {
  if (in.op == Opcode::j) return true;
  const auto lhs = static_cast<std::int64_t>(s.x(in.operand<XReg>(0)));
  const auto rhs = [&] {
    return static_cast<std::int64_t>(s.x(in.operand<XReg>(1)));
  };
  switch (in.op) {
    case Opcode::beq: return lhs == rhs();
    case Opcode::bne: return lhs != rhs();
    case Opcode::blt: return lhs < rhs();
    case Opcode::bge: return lhs >= rhs();
    case Opcode::beqz: return lhs == 0;
    case Opcode::bnez: return lhs != 0;
    case Opcode::bltz: return lhs < 0;
    case Opcode::bgez: return lhs >= 0;
    default: return false;
  }
}

template <typename Float, typename Fn>
void vector_binary(MachineState& s, unsigned vd, Fn&& fn) {
  for (std::uint64_t i = 0; i < s.vtype.vl; ++i)
    s.set_velem<Float>(vd, i, fn(i));
}

}  // namespace detail

/// Executes one instruction in place and advances (or redirects) the pc.
inline StepOutcome step(MachineState& s, const Instruction& in,
                        const MachineConfig& config) {
  if (s.vregs.size() != std::size_t{32} * config.vlenb())
    throw SimError(Fault::bad_state, "vector register file does not match VLEN " +
                                         std::to_string(config.vlen));
  StepOutcome out;
  const Category category = detail::category_of(in.op);
  if (in.dialect == Dialect::common && is_vector_category(category))
    throw SimError(Fault::unsupported_instruction, "vector opcode without dialect");
  if (in.dialect != Dialect::common && !is_vector_category(category))
    throw SimError(Fault::unsupported_instruction, "scalar opcode tagged with a vector dialect");
  out.delta.count(category);
  std::size_t next_pc = s.pc + 1;
  const unsigned sew = s.vtype.sew;

  auto vector_access = [&](AccessKind kind, unsigned eew) {
    const VReg vr = in.operand<VReg>(0);
    detail::check_group(s, vr);
    if (eew != sew)
      throw SimError(Fault::width_mismatch,
                     "EEW " + std::to_string(eew) + " with SEW " + std::to_string(sew));
    const std::uint64_t bytes = s.vtype.vl * sew / 8;
    if (bytes == 0) return;
    const std::uint64_t address = detail::effective_address(s, in.operand<Mem>(1));
    detail::check_access(s, address, bytes);
    std::uint8_t* reg = s.vregs.data() + std::size_t{vr.n} * s.vlenb();
    if (kind == AccessKind::load) {
      std::memcpy(reg, s.mem.at(address, bytes), bytes);
      out.delta.bytes_loaded += bytes;
    } else {
      std::memcpy(s.mem.at(address, bytes), reg, bytes);
      out.delta.bytes_stored += bytes;
    }
    for (std::uint64_t offset = 0; offset < bytes; offset += s.vlenb())
      out.events.push_back(TraceEvent{kind, address + offset,
                                      std::min<std::uint64_t>(s.vlenb(), bytes - offset),
                                      Origin::vector});
  };
  auto scalar_access = [&](AccessKind kind) -> std::uint64_t {
    const std::uint64_t address = detail::effective_address(s, in.operand<Mem>(1));
    detail::check_access(s, address, 8);
    out.events.push_back(TraceEvent{kind, address, 8, Origin::scalar});
    if (kind == AccessKind::load) {
      out.delta.bytes_loaded += 8;
      return s.mem.load<std::uint64_t>(address);
    }
    out.delta.bytes_stored += 8;
    return address;
  };

  switch (in.op) {
    case Opcode::addi:
      s.set_x(in.operand<XReg>(0), s.x(in.operand<XReg>(1)) +
                                       static_cast<std::uint64_t>(in.operand<Imm>(2).value));
      break;
    case Opcode::add:
      s.set_x(in.operand<XReg>(0), s.x(in.operand<XReg>(1)) + s.x(in.operand<XReg>(2)));
      break;
    case Opcode::mul:
      s.set_x(in.operand<XReg>(0), s.x(in.operand<XReg>(1)) * s.x(in.operand<XReg>(2)));
      break;
    case Opcode::slli:
      s.set_x(in.operand<XReg>(0), s.x(in.operand<XReg>(1))
                                       << (in.operand<Imm>(2).value & 63));
      break;
    case Opcode::ld:
      s.set_x(in.operand<XReg>(0), scalar_access(AccessKind::load));
      break;
    case Opcode::fld:
      s.fregs.at(in.operand<FReg>(0).n) = scalar_access(AccessKind::load);
      break;
    case Opcode::sd: {
      const auto address = scalar_access(AccessKind::store);
      s.mem.store<std::uint64_t>(address, s.x(in.operand<XReg>(0)));
      break;
    }
    case Opcode::fsd: {
      const auto address = scalar_access(AccessKind::store);
      s.mem.store<std::uint64_t>(address, s.fregs.at(in.operand<FReg>(0).n));
      break;
    }
    case Opcode::beq:
    case Opcode::bne:
    case Opcode::blt:
    case Opcode::bge:
    case Opcode::beqz:
    case Opcode::bnez:
    case Opcode::bltz:
    case Opcode::bgez:
    case Opcode::j:
      if (detail::branch_taken(s, in))
        next_pc = std::get<LabelRef>(in.operands.back()).target;
      break;

    case Opcode::vsetvli: {
      const XReg rd = in.operand<XReg>(0);
      const XReg rs1 = in.operand<XReg>(1);
      const auto& spec = std::get<VTypeSpec>(in.operands.back());
      std::uint64_t max = 0;
      try {
        max = vlmax(config.vlen, spec.sew, spec.lmul);
      } catch (const ConfigError& e) {
        throw SimError(Fault::unsupported_instruction, e.what());
      }
      std::uint64_t avl;
      if (rs1.n != 0)
        avl = s.x(rs1);
      else if (rd.n != 0 || in.dialect == Dialect::rvv0_7)
        avl = max;
      else
        avl = s.vtype.vl;  // RVV 1.0: vsetvli x0, x0 keeps vl
      s.vtype = VType{spec.sew, spec.lmul, std::min(avl, max)};
      s.set_x(rd, s.vtype.vl);
      break;
    }
    case Opcode::vle32_v:
      vector_access(AccessKind::load, 32);
      break;
    case Opcode::vle64_v:
      vector_access(AccessKind::load, 64);
      break;
    case Opcode::vle_v:
      vector_access(AccessKind::load, sew);
      break;
    case Opcode::vse32_v:
      vector_access(AccessKind::store, 32);
      break;
    case Opcode::vse64_v:
      vector_access(AccessKind::store, 64);
      break;
    case Opcode::vse_v:
      vector_access(AccessKind::store, sew);
      break;

    case Opcode::vfmacc_vf: {
      const VReg vd = in.operand<VReg>(0);
      const FReg fs = in.operand<FReg>(1);
      const VReg vs = in.operand<VReg>(2);
      detail::check_group(s, vd);
      detail::check_group(s, vs);
      if (sew == 64) {
        const double f = s.f64(fs);
        detail::vector_binary<double>(s, vd.n, [&](std::uint64_t i) {
          return std::fma(f, s.velem<double>(vs.n, i), s.velem<double>(vd.n, i));
        });
      } else {
        const float f = s.f32(fs);
        detail::vector_binary<float>(s, vd.n, [&](std::uint64_t i) {
          return std::fma(f, s.velem<float>(vs.n, i), s.velem<float>(vd.n, i));
        });
      }
      break;
    }
    case Opcode::vfmul_vf: {
      const VReg vd = in.operand<VReg>(0);
      const VReg vs = in.operand<VReg>(1);
      const FReg fs = in.operand<FReg>(2);
      detail::check_group(s, vd);
      detail::check_group(s, vs);
      if (sew == 64) {
        const double f = s.f64(fs);
        detail::vector_binary<double>(
            s, vd.n, [&](std::uint64_t i) { return s.velem<double>(vs.n, i) * f; });
      } else {
        const float f = s.f32(fs);
        detail::vector_binary<float>(
            s, vd.n, [&](std::uint64_t i) { return s.velem<float>(vs.n, i) * f; });
      }
      break;
    }
    case Opcode::vfadd_vv: {
      const VReg vd = in.operand<VReg>(0);
      const VReg vs2 = in.operand<VReg>(1);
      const VReg vs1 = in.operand<VReg>(2);
      detail::check_group(s, vd);
      detail::check_group(s, vs2);
      detail::check_group(s, vs1);
      if (sew == 64)
        detail::vector_binary<double>(s, vd.n, [&](std::uint64_t i) {
          return s.velem<double>(vs2.n, i) + s.velem<double>(vs1.n, i);
        });
      else
        detail::vector_binary<float>(s, vd.n, [&](std::uint64_t i) {
          return s.velem<float>(vs2.n, i) + s.velem<float>(vs1.n, i);
        });
      break;
    }
    case Opcode::vmv_v_i: {
      const VReg vd = in.operand<VReg>(0);
      detail::check_group(s, vd);
      const std::int64_t imm = in.operand<Imm>(1).value;
      if (sew == 64)
        detail::vector_binary<std::int64_t>(s, vd.n, [&](std::uint64_t) { return imm; });
      else
        detail::vector_binary<std::int32_t>(
            s, vd.n, [&](std::uint64_t) { return static_cast<std::int32_t>(imm); });
      break;
    }
  }
  s.pc = next_pc;
  return out;
}

struct RunOptions {
  bool record_trace = true;
};

struct RunResult {
  MachineState state;
  SimStats stats;
  Trace trace;
};

namespace detail {

inline std::string describe(const Instruction& in) {
  try {
    return format_instruction(in);
  } catch (const Error&) {
    return "<opcode " + std::to_string(static_cast<unsigned>(in.op)) + ">";
  }
}

}  // namespace detail

/// Executes from initial.pc until the pc leaves the program.
inline RunResult run(const Program& program, MachineState initial,
                     const MachineConfig& config, const RunLimits& limits = {},
                     const RunOptions& options = {}) {
  config.validate();
  if (limits.max_instructions == 0)
    throw ConfigError("max_instructions must be positive");
  RunResult r{std::move(initial), {}, {}};
  if (r.state.pc > program.size())
    throw SimError(Fault::bad_state, "pc " + std::to_string(r.state.pc) +
                                         " beyond program end");
  std::uint64_t executed = 0;
  while (r.state.pc < program.size()) {
    const std::size_t pc = r.state.pc;
    const Instruction& instr = program.instructions[pc];
    if (executed >= limits.max_instructions) {
      SimError e(Fault::timeout, std::to_string(limits.max_instructions) +
                                     " instructions executed");
      e.attach(pc, detail::describe(instr), r.stats);
      throw e;
    }
    try {
      StepOutcome o = step(r.state, instr, config);
      r.stats += o.delta;
      if (options.record_trace) r.trace.insert(r.trace.end(), o.events.begin(), o.events.end());
    } catch (SimError& e) {
      e.attach(pc, detail::describe(instr), r.stats);
      throw;
    }
    ++executed;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Trace utilities.

inline void write_trace(std::ostream& os, const Trace& trace) {
  const auto flags = os.flags();
  for (const auto& e : trace)
    os << (e.kind == AccessKind::load ? 'L' : 'S') << ' ' << std::hex
       << e.address << std::dec << ' ' << e.bytes << ' '
       << (e.origin == Origin::vector ? 'V' : 'X') << '\n';
  os.flags(flags);
}

/// Parses "L|S <hex address> <bytes> <V|X>" lines. Blank lines and '#'
/// comments are skipped; anything else malformed throws FormatError naming
/// the line.
inline Trace read_trace(std::istream& is) {
  Trace trace;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::string kind, address, bytes, origin, extra;
    if (!(fields >> kind)) continue;
    const auto fail = [&](const std::string& why) {
      throw FormatError("trace line " + std::to_string(line_no) + ": " + why);
    };
    if (!(fields >> address >> bytes >> origin) || (fields >> extra))
      fail("expected 'L|S <hex address> <bytes> <V|X>'");
    TraceEvent e;
    if (kind == "L") e.kind = AccessKind::load;
    else if (kind == "S") e.kind = AccessKind::store;
    else fail("access kind must be L or S, got '" + kind + "'");
    if (origin == "V") e.origin = Origin::vector;
    else if (origin == "X") e.origin = Origin::scalar;
    else fail("origin must be V or X, got '" + origin + "'");
    std::string_view hex = address;
    if (hex.size() > 2 && (hex.substr(0, 2) == "0x" || hex.substr(0, 2) == "0X"))
      hex.remove_prefix(2);
    auto [p, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), e.address, 16);
    if (ec != std::errc{} || p != hex.data() + hex.size() || hex.empty())
      fail("bad hex address '" + address + "'");
    auto [q, ec2] = std::from_chars(bytes.data(), bytes.data() + bytes.size(), e.bytes);
    if (ec2 != std::errc{} || q != bytes.data() + bytes.size() || e.bytes == 0)
      fail("byte count must be a positive integer, got '" + bytes + "'");
    trace.push_back(e);
  }
  return trace;
}

}  // namespace rvvlab
