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

// Assembly front end: line-oriented lexer/parser and the matching printer.
//
// Grammar, one statement per line:
//   line      := [label ':']* [statement] ['#' comment]
//   statement := mnemonic [operand (',' operand)*] | directive
//   directive := '.' word ...        (ignored with a warning)
// Mnemonics, registers and vtype fields are case-insensitive; labels are not.

#pragma once

#include <cctype>
#include <charconv>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rvvlab/isa.hpp"

namespace rvvlab {

enum class Severity : std::uint8_t { error, warning };

struct Diagnostic {
  int line = 0;
  int column = 0;
  std::string message;
  Severity severity = Severity::error;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

inline std::string format_diagnostic(std::string_view file,
                                     const Diagnostic& d) {
  std::ostringstream os;
  os << file << ':' << d.line << ':' << d.column << ": "
     << (d.severity == Severity::error ? "error" : "warning") << ": "
     << d.message;
  return os.str();
}

inline bool has_errors(const std::vector<Diagnostic>& diagnostics) {
  for (const auto& d : diagnostics)
    if (d.severity == Severity::error) return true;
  return false;
}

/// Either a program (possibly with warnings) or at least one error.
struct ParseResult {
  std::optional<Program> program;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return program.has_value(); }
};

namespace detail {

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline bool is_label_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '.' ||
         c == '$';
}
inline bool is_label_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' ||
         c == '$';
}

inline bool is_identifier(std::string_view s) {
  if (s.empty() || !is_label_start(s.front())) return false;
  for (char c : s)
    if (!is_label_char(c)) return false;
  return true;
}

inline std::optional<unsigned> parse_indexed(std::string_view s, char prefix) {
  if (s.size() < 2 || s.front() != prefix) return std::nullopt;
  unsigned n = 0;
  auto [p, ec] = std::from_chars(s.data() + 1, s.data() + s.size(), n);
  if (ec != std::errc{} || p != s.data() + s.size() || n > 31) return std::nullopt;
  // reject "v01"
  if (s.size() > 2 && s[1] == '0') return std::nullopt;
  return n;
}

inline std::optional<XReg> parse_xreg(std::string_view text) {
  const std::string s = lower(text);
  if (auto n = parse_indexed(s, 'x')) return XReg{*n};
  if (s == "fp") return XReg{8};
  for (unsigned i = 0; i < kXAbiNames.size(); ++i)
    if (kXAbiNames[i] == s) return XReg{i};
  return std::nullopt;
}

inline std::optional<FReg> parse_freg(std::string_view text) {
  const std::string s = lower(text);
  if (auto n = parse_indexed(s, 'f')) return FReg{*n};
  for (unsigned i = 0; i < kFAbiNames.size(); ++i)
    if (kFAbiNames[i] == s) return FReg{i};
  return std::nullopt;
}

inline std::optional<VReg> parse_vreg(std::string_view text) {
  const std::string s = lower(text);
  if (auto n = parse_indexed(s, 'v')) return VReg{*n};
  return std::nullopt;
}

inline std::optional<std::int64_t> parse_int(std::string_view text) {
  std::string s = lower(text);
  bool negative = false;
  std::string_view v = s;
  if (!v.empty() && (v.front() == '-' || v.front() == '+')) {
    negative = v.front() == '-';
    v.remove_prefix(1);
  }
  int base = 10;
  if (v.size() > 2 && v.substr(0, 2) == "0x") {
    base = 16;
    v.remove_prefix(2);
  }
  if (v.empty()) return std::nullopt;
  std::uint64_t magnitude = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), magnitude, base);
  if (ec != std::errc{} || p != v.data() + v.size()) return std::nullopt;
  if (magnitude > (std::uint64_t{1} << 63)) return std::nullopt;
  if (!negative && magnitude == (std::uint64_t{1} << 63)) return std::nullopt;
  const auto value = static_cast<std::int64_t>(magnitude);
  return negative ? -value : value;
}

struct Field {
  std::string_view text;
  int column;  // 1-based
};

inline Field trim(std::string_view s, int column) {
  std::size_t b = 0;
  while (b < s.size() && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  std::size_t e = s.size();
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return {s.substr(b, e - b), column + static_cast<int>(b)};
}

struct ImmRange {
  std::int64_t lo;
  std::int64_t hi;
};

inline ImmRange imm_range(Opcode op) {
  switch (op) {
    case Opcode::slli:
      return {0, 63};
    case Opcode::vmv_v_i:
      return {-16, 15};
    default:
      return {-2048, 2047};
  }
}

class Parser {
 public:
  Parser(std::string_view source, Dialect dialect)
      : source_(source), dialect_(dialect) {}

  ParseResult parse() {
    int line_no = 0;
    std::size_t start = 0;
    while (start <= source_.size()) {
      std::size_t end = source_.find('\n', start);
      if (end == std::string_view::npos) end = source_.size();
      ++line_no;
      std::string_view line = source_.substr(start, end - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      parse_line(line, line_no);
      if (end == source_.size()) break;
      start = end + 1;
    }
    resolve_labels();
    ParseResult result;
    result.diagnostics = std::move(diagnostics_);
    if (!has_errors(result.diagnostics)) result.program = std::move(program_);
    return result;
  }

 private:
  struct PendingLabel {
    std::size_t instr;
    std::size_t operand;
    int line;
    int column;
  };

  void error(int line, int column, std::string message) {
    diagnostics_.push_back({line, column, std::move(message), Severity::error});
  }
  void warning(int line, int column, std::string message) {
    diagnostics_.push_back({line, column, std::move(message), Severity::warning});
  }

  void parse_line(std::string_view line, int line_no) {
    if (auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    Field rest = trim(line, 1);

    // Leading labels.
    while (!rest.text.empty()) {
      std::size_t i = 0;
      if (!is_label_start(rest.text[0])) break;
      while (i < rest.text.size() && is_label_char(rest.text[i])) ++i;
      if (i >= rest.text.size() || rest.text[i] != ':') break;
      define_label(std::string(rest.text.substr(0, i)), line_no, rest.column);
      rest = trim(rest.text.substr(i + 1), rest.column + static_cast<int>(i) + 1);
    }
    if (rest.text.empty()) return;

    if (rest.text.front() == '.') {
      const auto word = rest.text.substr(0, rest.text.find_first_of(" \t"));
      warning(line_no, rest.column,
              "directive '" + std::string(word) + "' ignored");
      return;
    }

    const std::size_t mn_end = std::min(rest.text.find_first_of(" \t"), rest.text.size());
    const std::string mnemonic = lower(rest.text.substr(0, mn_end));
    const int mn_col = rest.column;
    const OpInfo* info = find_op(mnemonic);
    if (info == nullptr) {
      error(line_no, mn_col, "unknown mnemonic '" + mnemonic + "'");
      return;
    }
    if (info->dialect != Dialect::common && info->dialect != dialect_) {
      error(line_no, mn_col,
            "mnemonic '" + mnemonic + "' not in dialect " +
                std::string(dialect_name(dialect_)) + " (wrong dialect)");
      return;
    }
    if (info->arity == 0) {
      error(line_no, mn_col,
            "mnemonic '" + mnemonic + "' is outside the supported subset");
      return;
    }

    std::vector<Field> fields;
    if (mn_end < rest.text.size()) {
      std::string_view ops = rest.text.substr(mn_end);
      int col = rest.column + static_cast<int>(mn_end);
      std::size_t pos = 0;
      while (true) {
        std::size_t comma = ops.find(',', pos);
        std::string_view piece =
            ops.substr(pos, comma == std::string_view::npos ? std::string_view::npos
                                                            : comma - pos);
        fields.push_back(trim(piece, col + static_cast<int>(pos)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
      }
    }

    Instruction instr;
    instr.op = info->op;
    instr.dialect = info->dialect;
    instr.line = line_no;

    // vsetvli takes its vtype as the comma-separated tail of the operand list.
    const bool has_vtype = info->signature[info->arity - 1] == OperandKind::vtype;
    const std::size_t fixed = has_vtype ? info->arity - 1u : info->arity;
    if (fields.size() < fixed + (has_vtype ? 1 : 0) ||
        (!has_vtype && fields.size() != info->arity)) {
      error(line_no, mn_col,
            "'" + mnemonic + "' expects " + std::to_string(info->arity) +
                " operands, got " + std::to_string(fields.size()));
      return;
    }
    for (std::size_t i = 0; i < fixed; ++i) {
      auto operand = parse_operand(*info, i, fields[i], line_no);
      if (!operand) return;
      instr.operands.push_back(std::move(*operand));
    }
    if (has_vtype) {
      auto spec = parse_vtype(std::span(fields).subspan(fixed), line_no);
      if (!spec) return;
      instr.operands.emplace_back(*spec);
    }
    program_.instructions.push_back(std::move(instr));
  }

  void define_label(std::string name, int line_no, int column) {
    if (program_.labels.contains(name)) {
      error(line_no, column, "duplicate label '" + name + "'");
      return;
    }
    program_.labels.emplace(std::move(name), program_.instructions.size());
  }

  std::optional<Operand> parse_operand(const OpInfo& info, std::size_t index,
                                       const Field& f, int line_no) {
    const auto bad = [&](const std::string& what) -> std::optional<Operand> {
      error(line_no, f.column,
            "malformed operand '" + std::string(f.text) + "': expected " + what);
      return std::nullopt;
    };
    if (f.text.empty()) return bad("an operand");
    switch (info.signature[index]) {
      case OperandKind::vreg:
        if (auto r = parse_vreg(f.text)) return Operand{*r};
        return bad("a vector register");
      case OperandKind::xreg:
        if (auto r = parse_xreg(f.text)) return Operand{*r};
        return bad("an integer register");
      case OperandKind::freg:
        if (auto r = parse_freg(f.text)) return Operand{*r};
        return bad("a floating-point register");
      case OperandKind::imm: {
        auto v = parse_int(f.text);
        if (!v) return bad("an integer immediate");
        const auto range = imm_range(info.op);
        if (*v < range.lo || *v > range.hi)
          return bad("an immediate in [" + std::to_string(range.lo) + ", " +
                     std::to_string(range.hi) + "]");
        return Operand{Imm{*v}};
      }
      case OperandKind::mem: {
        const auto open = f.text.find('(');
        if (open == std::string_view::npos || f.text.back() != ')')
          return bad("a memory operand 'offset(reg)' or '(reg)'");
        std::int64_t offset = 0;
        const auto off_text = trim(f.text.substr(0, open), 0).text;
        if (!off_text.empty()) {
          auto v = parse_int(off_text);
          if (!v || *v < -2048 || *v > 2047)
            return bad("a 12-bit signed offset");
          offset = *v;
        }
        const auto base_text =
            trim(f.text.substr(open + 1, f.text.size() - open - 2), 0).text;
        auto base = parse_xreg(base_text);
        if (!base) return bad("an integer base register");
        if (is_vector_category(info.category) && offset != 0)
          return bad("'(reg)' without offset for a vector memory access");
        return Operand{Mem{*base, offset}};
      }
      case OperandKind::label: {
        if (!is_identifier(f.text)) return bad("a label");
        pending_.push_back({program_.instructions.size(), index, line_no, f.column});
        return Operand{LabelRef{std::string(f.text), 0}};
      }
      case OperandKind::vtype:
        break;
    }
    return bad("an operand");
  }

  std::optional<VTypeSpec> parse_vtype(std::span<const Field> fields,
                                       int line_no) {
    VTypeSpec spec;
    const auto bad = [&](const Field& f, const std::string& msg) {
      error(line_no, f.column, msg);
      return std::nullopt;
    };
    if (fields.size() < 2) {
      error(line_no, fields.empty() ? 1 : fields.front().column,
            "vtype needs an element width and an LMUL, e.g. 'e64, m4'");
      return std::nullopt;
    }
    const std::string sew = lower(fields[0].text);
    if (sew.size() < 2 || sew[0] != 'e')
      return bad(fields[0], "malformed vtype field '" + sew + "': expected e32 or e64");
    auto sew_value = parse_int(sew.substr(1));
    if (!sew_value || !valid_sew(static_cast<unsigned>(*sew_value)))
      return bad(fields[0], "unsupported SEW '" + sew + "' (expected e32 or e64)");
    spec.sew = static_cast<unsigned>(*sew_value);

    const std::string lmul = lower(fields[1].text);
    if (lmul.size() >= 2 && lmul.substr(0, 2) == "mf")
      return bad(fields[1], "fractional LMUL '" + lmul + "' is not supported");
    if (lmul.size() < 2 || lmul[0] != 'm')
      return bad(fields[1], "malformed vtype field '" + lmul + "': expected m1, m2, m4 or m8");
    auto lmul_value = parse_int(lmul.substr(1));
    if (!lmul_value || !valid_lmul(static_cast<unsigned>(*lmul_value)))
      return bad(fields[1], "unsupported LMUL '" + lmul + "' (expected m1, m2, m4 or m8)");
    spec.lmul = static_cast<unsigned>(*lmul_value);

    for (std::size_t i = 2; i < fields.size(); ++i) {
      const std::string flag = lower(fields[i].text);
      if (dialect_ == Dialect::rvv0_7)
        return bad(fields[i], "vtype policy flag '" + flag +
                                  "' does not exist in RVV 0.7.1");
      if ((flag == "ta" || flag == "tu") && spec.tail == Policy::unspecified &&
          spec.mask == Policy::unspecified) {
        spec.tail = flag == "ta" ? Policy::agnostic : Policy::undisturbed;
      } else if ((flag == "ma" || flag == "mu") &&
                 spec.mask == Policy::unspecified) {
        spec.mask = flag == "ma" ? Policy::agnostic : Policy::undisturbed;
      } else {
        return bad(fields[i], "unexpected vtype field '" + flag + "'");
      }
    }
    return spec;
  }

  void resolve_labels() {
    for (const auto& p : pending_) {
      if (p.instr >= program_.instructions.size()) continue;
      auto& ref = std::get<LabelRef>(program_.instructions[p.instr].operands[p.operand]);
      auto it = program_.labels.find(ref.name);
      if (it == program_.labels.end()) {
        error(p.line, p.column, "unresolved label '" + ref.name + "'");
        continue;
      }
      ref.target = it->second;
    }
  }

  std::string_view source_;
  Dialect dialect_;
  Program program_;
  std::vector<Diagnostic> diagnostics_;
  std::vector<PendingLabel> pending_;
};

}  // namespace detail

inline ParseResult parse_program(std::string_view source, Dialect dialect) {
  if (dialect == Dialect::common)
    throw ConfigError("parse dialect must be rvv1_0 or rvv0_7");
  return detail::Parser(source, dialect).parse();
}

/// Prints one instruction or label per line. Throws if an instruction does
/// not belong to `dialect` or the common scalar subset.
inline std::string print_program(const Program& program, Dialect dialect) {
  std::multimap<std::size_t, std::string_view> labels_at;
  for (const auto& [name, index] : program.labels) labels_at.emplace(index, name);

  std::string out;
  const auto emit_labels = [&](std::size_t index) {
    auto [b, e] = labels_at.equal_range(index);
    for (auto it = b; it != e; ++it) {
      out += it->second;
      out += ":\n";
    }
  };
  for (std::size_t i = 0; i < program.instructions.size(); ++i) {
    const auto& instr = program.instructions[i];
    if (instr.dialect != Dialect::common && instr.dialect != dialect)
      throw Error("instruction '" + format_instruction(instr) +
                  "' is not in dialect " + std::string(dialect_name(dialect)));
    emit_labels(i);
    out += format_instruction(instr);
    out += '\n';
  }
  emit_labels(program.instructions.size());
  return out;
}

}  // namespace rvvlab
