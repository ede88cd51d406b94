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

// Column-major matrices, BLIS packing and the blocked GEMM whose micro-tiles
// run on the simulator.
//
// Loop nest (BLIS five-loop order):
//
//   for jc in [0, n) step nc          B block  kc x nc  -> packed B
//     for pc in [0, k) step kc
//       pack B[pc:pc+kc, jc:jc+nc]
//       for ic in [0, m) step mc      A block  mc x kc  -> packed A
//         pack A[ic:ic+mc, pc:pc+kc]
//         for jr in [0, nc) step nr
//           for ir in [0, mc) step mr
//             micro-kernel on C[ic+ir, jc+jr]
//
// Edge tiles go through a zero-padded mr x nr scratch tile so the single
// micro-kernel handles every shape.

#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "rvvlab/error.hpp"
#include "rvvlab/kernels.hpp"
#include "rvvlab/rng.hpp"
#include "rvvlab/vsim.hpp"

namespace rvvlab {

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // column-major

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[j * rows + i]; }
  double operator()(std::size_t i, std::size_t j) const { return data[j * rows + i]; }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

/// Entries uniform in [-1, 1).
inline Matrix random_matrix(std::size_t rows, std::size_t cols, CounterRng& rng) {
  Matrix m(rows, cols);
  for (auto& x : m.data) x = rng.uniform(-1.0, 1.0);
  return m;
}

/// Bitwise equality: -0.0 != 0.0 and NaN payloads count.
inline bool bit_identical(const Matrix& a, const Matrix& b) {
  return a.rows == b.rows && a.cols == b.cols &&
         (a.data.empty() ||
          std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(double)) == 0);
}

struct RelativeError {
  double max = 0.0;
  std::size_t row = 0;
  std::size_t col = 0;
};

/// Componentwise |got - want| / |want| (absolute error where want == 0).
inline RelativeError max_relative_error(const Matrix& got, const Matrix& want) {
  if (got.rows != want.rows || got.cols != want.cols)
    throw ShapeError("matrices differ in shape");
  RelativeError worst;
  for (std::size_t j = 0; j < got.cols; ++j)
    for (std::size_t i = 0; i < got.rows; ++i) {
      const double w = want(i, j);
      const double diff = std::abs(got(i, j) - w);
      double e = w == 0.0 ? diff : diff / std::abs(w);
      if (std::isnan(e)) e = INFINITY;
      if (e > worst.max) worst = {e, i, j};
    }
  return worst;
}

// ---------------------------------------------------------------------------
// Matrix files: two little-endian uint64 dims (rows, cols), then rows*cols
// little-endian binary64 values in column-major order.

inline void write_matrix(std::ostream& os, const Matrix& m) {
  static_assert(std::endian::native == std::endian::little);
  const std::uint64_t dims[2] = {m.rows, m.cols};
  os.write(reinterpret_cast<const char*>(dims), sizeof dims);
  os.write(reinterpret_cast<const char*>(m.data.data()),
           static_cast<std::streamsize>(m.data.size() * sizeof(double)));
  if (!os) throw FormatError("failed to write matrix");
}

inline Matrix read_matrix(std::istream& is) {
  std::uint64_t dims[2];
  if (!is.read(reinterpret_cast<char*>(dims), sizeof dims))
    throw FormatError("matrix file shorter than its 16-byte header");
  if (dims[0] != 0 && dims[1] > (std::uint64_t{1} << 40) / dims[0])
    throw FormatError("matrix dimensions too large");
  Matrix m(dims[0], dims[1]);
  const auto bytes = static_cast<std::streamsize>(m.data.size() * sizeof(double));
  if (!is.read(reinterpret_cast<char*>(m.data.data()), bytes))
    throw FormatError("matrix payload truncated: expected " +
                      std::to_string(m.data.size()) + " values");
  if (is.peek() != std::char_traits<char>::eof())
    throw FormatError("trailing bytes after matrix payload");
  return m;
}

// ---------------------------------------------------------------------------
// Packing.

struct BlockRange {
  std::size_t row = 0;
  std::size_t col = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

enum class PanelSource : std::uint8_t { a, b };

struct PackedPanel {
  PanelSource source = PanelSource::a;
  /// mr for A panels, nr for B panels.
  std::size_t micro = 0;
  /// k extent of every micro-panel.
  std::size_t depth = 0;
  std::size_t micro_panels = 0;
  std::vector<double> data;

  std::size_t panel_offset(std::size_t p) const { return p * depth * micro; }
};

inline void check_block(const Matrix& m, const BlockRange& b) {
  if (b.row > m.rows || b.rows > m.rows - b.row || b.col > m.cols ||
      b.cols > m.cols - b.col)
    throw RangeError("block [" + std::to_string(b.row) + "+" + std::to_string(b.rows) +
                     ", " + std::to_string(b.col) + "+" + std::to_string(b.cols) +
                     "] outside " + std::to_string(m.rows) + "x" +
                     std::to_string(m.cols) + " matrix");
}

/// A block -> mr-row micro-panels; each stores mr elements per k contiguously.
/// Rows past the block edge are zero.
inline PackedPanel pack_a(const Matrix& a, const BlockRange& block, std::size_t mr) {
  check_block(a, block);
  if (mr == 0) throw ConfigError("mr must be positive");
  PackedPanel p{PanelSource::a, mr, block.cols, (block.rows + mr - 1) / mr, {}};
  p.data.assign(p.micro_panels * mr * p.depth, 0.0);
  for (std::size_t q = 0; q < p.micro_panels; ++q)
    for (std::size_t k = 0; k < p.depth; ++k)
      for (std::size_t i = 0; i < mr && q * mr + i < block.rows; ++i)
        p.data[p.panel_offset(q) + k * mr + i] = a(block.row + q * mr + i, block.col + k);
  return p;
}

/// B block -> nr-column micro-panels; each stores nr elements per k
/// contiguously. Columns past the block edge are zero.
inline PackedPanel pack_b(const Matrix& b, const BlockRange& block, std::size_t nr) {
  check_block(b, block);
  if (nr == 0) throw ConfigError("nr must be positive");
  PackedPanel p{PanelSource::b, nr, block.rows, (block.cols + nr - 1) / nr, {}};
  p.data.assign(p.micro_panels * nr * p.depth, 0.0);
  for (std::size_t q = 0; q < p.micro_panels; ++q)
    for (std::size_t k = 0; k < p.depth; ++k)
      for (std::size_t j = 0; j < nr && q * nr + j < block.cols; ++j)
        p.data[p.panel_offset(q) + k * nr + j] = b(block.row + k, block.col + q * nr + j);
  return p;
}

/// Inverse of pack_a / pack_b restricted to the rows x cols block.
inline Matrix unpack(const PackedPanel& p, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      if (p.source == PanelSource::a)
        m(i, j) = p.data[p.panel_offset(i / p.micro) + j * p.micro + i % p.micro];
      else
        m(i, j) = p.data[p.panel_offset(j / p.micro) + i * p.micro + j % p.micro];
    }
  return m;
}

// ---------------------------------------------------------------------------
// Reference and blocked GEMM.

inline void check_gemm_shapes(const Matrix& a, const Matrix& b, const Matrix& c) {
  if (a.cols != b.rows || a.rows != c.rows || b.cols != c.cols)
    throw ShapeError("gemm shapes do not agree: A " + std::to_string(a.rows) + "x" +
                     std::to_string(a.cols) + ", B " + std::to_string(b.rows) + "x" +
                     std::to_string(b.cols) + ", C " + std::to_string(c.rows) + "x" +
                     std::to_string(c.cols));
}

/// C + A*B by an i-j-k triple loop, one fused multiply-add per product.
inline Matrix gemm_ref(const Matrix& a, const Matrix& b, Matrix c) {
  check_gemm_shapes(a, b, c);
  for (std::size_t i = 0; i < c.rows; ++i)
    for (std::size_t j = 0; j < c.cols; ++j) {
      double acc = c(i, j);
      for (std::size_t p = 0; p < a.cols; ++p) acc = std::fma(a(i, p), b(p, j), acc);
      c(i, j) = acc;
    }
  return c;
}

/// Where each operand lives in the simulated address space. A, B and C
/// depend only on (m, n, k), so other traces over the same matrices can
/// share the layout.
struct GemmAddressMap {
  static constexpr std::uint64_t kBase = 0x1000'0000;
  static constexpr std::uint64_t kAlign = 4096;

  std::uint64_t a = 0, b = 0, c = 0, a_pack = 0, b_pack = 0, edge = 0, end = 0;

  static std::uint64_t align(std::uint64_t x) { return (x + kAlign - 1) / kAlign * kAlign; }

  static GemmAddressMap operands(std::size_t m, std::size_t n, std::size_t k) {
    GemmAddressMap map;
    map.a = kBase;
    map.b = align(map.a + m * k * 8);
    map.c = align(map.b + k * n * 8);
    map.a_pack = map.b_pack = map.edge = map.end = align(map.c + m * n * 8);
    return map;
  }

  static GemmAddressMap make(std::size_t m, std::size_t n, std::size_t k,
                             const BlockingParams& blk, const MicroKernelParams& p) {
    GemmAddressMap map = operands(m, n, k);
    const auto round_up = [](std::size_t x, std::size_t to) { return (x + to - 1) / to * to; };
    const std::size_t kb = std::min(blk.kc, k);
    map.b_pack = map.a_pack + align(round_up(std::min(blk.mc, m), p.mr) * kb * 8);
    map.edge = map.b_pack + align(round_up(std::min(blk.nc, n), p.nr) * kb * 8);
    map.end = map.edge + align(std::uint64_t{p.mr} * p.nr * 8);
    return map;
  }

  std::uint64_t element(std::uint64_t base, std::size_t rows, std::size_t i,
                        std::size_t j) const {
    return base + (j * rows + i) * 8;
  }
};

struct GemmOptions {
  bool record_trace = true;
  RunLimits limits{};
};

struct GemmResult {
  Matrix c;
  SimStats stats;
  /// Every memory access in program order: packing copies, micro-kernel
  /// accesses and edge-tile copies.
  Trace trace;
  std::uint64_t ukernel_calls = 0;
};

/// C + A*B through the five-loop BLIS nest with every micro-tile computed by
/// simulating the generated micro-kernel.
inline GemmResult gemm_blocked(const Matrix& a, const Matrix& b, const Matrix& c,
                               const BlockingParams& blocking,
                               const MicroKernelParams& params,
                               const GemmOptions& options = {}) {
  check_gemm_shapes(a, b, c);
  params.validate();
  blocking.validate(params);
  const std::size_t m = c.rows, n = c.cols, k = a.cols;
  GemmResult result;
  if (m == 0 || n == 0 || k == 0) {
    result.c = c;
    return result;
  }
  const Program kernel = gen_ukernel(params);
  const MachineConfig config{params.vlen};
  const auto map = GemmAddressMap::make(m, n, k, blocking, params);
  MachineState state(config, Memory(map.a, map.end - map.a));
  state.mem.store_doubles(map.a, a.data);
  state.mem.store_doubles(map.b, b.data);
  state.mem.store_doubles(map.c, c.data);
  const RunOptions run_options{options.record_trace};
  const std::size_t mr = params.mr, nr = params.nr;

  const auto emit = [&](AccessKind kind, std::uint64_t address) {
    if (options.record_trace) result.trace.push_back({kind, address, 8, Origin::scalar});
  };
  // Packing copies, traced as scalar element moves; padding is written too.
  const auto copy_panel = [&](const PackedPanel& panel, std::uint64_t src_base,
                              std::size_t src_rows, const BlockRange& block,
                              std::uint64_t dst) {
    for (std::size_t q = 0; q < panel.micro_panels; ++q)
      for (std::size_t d = 0; d < panel.depth; ++d)
        for (std::size_t e = 0; e < panel.micro; ++e) {
          const bool is_a = panel.source == PanelSource::a;
          const std::size_t i = is_a ? block.row + q * panel.micro + e : block.row + d;
          const std::size_t j = is_a ? block.col + d : block.col + q * panel.micro + e;
          const bool inside = is_a ? q * panel.micro + e < block.rows
                                   : q * panel.micro + e < block.cols;
          if (inside) emit(AccessKind::load, map.element(src_base, src_rows, i, j));
          emit(AccessKind::store, dst + (panel.panel_offset(q) + d * panel.micro + e) * 8);
        }
    state.mem.store_doubles(dst, panel.data);
  };

  for (std::size_t jc = 0; jc < n; jc += blocking.nc) {
    const std::size_t nb = std::min(blocking.nc, n - jc);
    for (std::size_t pc = 0; pc < k; pc += blocking.kc) {
      const std::size_t kb = std::min(blocking.kc, k - pc);
      const BlockRange bblock{pc, jc, kb, nb};
      copy_panel(pack_b(b, bblock, nr), map.b, k, bblock, map.b_pack);
      for (std::size_t ic = 0; ic < m; ic += blocking.mc) {
        const std::size_t mb = std::min(blocking.mc, m - ic);
        const BlockRange ablock{ic, pc, mb, kb};
        copy_panel(pack_a(a, ablock, mr), map.a, m, ablock, map.a_pack);
        for (std::size_t jr = 0; jr < nb; jr += nr) {
          for (std::size_t ir = 0; ir < mb; ir += mr) {
            const std::size_t rows = std::min(mr, mb - ir);
            const std::size_t cols = std::min(nr, nb - jr);
            const std::size_t ci = ic + ir, cj = jc + jr;
            const bool edge = rows != mr || cols != nr;
            UkernelArgs args{kb, map.a_pack + (ir / mr) * mr * kb * 8,
                             map.b_pack + (jr / nr) * nr * kb * 8,
                             map.element(map.c, m, ci, cj), m * 8};
            if (edge) {
              args.c_tile = map.edge;
              args.c_col_stride = mr * 8;
              std::vector<double> tile(mr * nr, 0.0);
              for (std::size_t j = 0; j < cols; ++j)
                for (std::size_t i = 0; i < rows; ++i) {
                  const auto src = map.element(map.c, m, ci + i, cj + j);
                  emit(AccessKind::load, src);
                  emit(AccessKind::store, map.edge + (j * mr + i) * 8);
                  tile[j * mr + i] = state.mem.load<double>(src);
                }
              state.mem.store_doubles(map.edge, tile);
            }
            set_ukernel_args(state, args);
            RunResult r = run(kernel, std::move(state), config, options.limits, run_options);
            state = std::move(r.state);
            result.stats += r.stats;
            result.trace.insert(result.trace.end(), r.trace.begin(), r.trace.end());
            ++result.ukernel_calls;
            if (edge) {
              for (std::size_t j = 0; j < cols; ++j)
                for (std::size_t i = 0; i < rows; ++i) {
                  const auto dst = map.element(map.c, m, ci + i, cj + j);
                  const auto src = map.edge + (j * mr + i) * 8;
                  emit(AccessKind::load, src);
                  emit(AccessKind::store, dst);
                  state.mem.store<double>(dst, state.mem.load<double>(src));
                }
            }
          }
        }
      }
    }
  }
  result.c = Matrix(m, n);
  result.c.data = state.mem.load_doubles(map.c, m * n);
  return result;
}

}  // namespace rvvlab
