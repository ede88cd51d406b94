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

// Trace-driven multi-level data-cache model.
//
// Each trace event is split into the L1 lines it touches; every line access
// probes L1, and a miss at level i becomes exactly one access at level i+1
// (a demand fill; stores write-allocate, so a store miss fills like a load).
// Lines are filled into every level on the miss path. Sets use true LRU.
// Write-back: stores dirty the L1 line; a dirty victim is written back into
// the next level that holds the line. Write-backs are tallied separately and
// are not demand accesses, so accesses(i+1) == misses(i) always holds.

#pragma once

#include <bit>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rvvlab/gemm.hpp"
#include "rvvlab/vsim.hpp"

namespace rvvlab {

struct CacheLevelConfig {
  std::string name;
  std::uint64_t size = 0;
  std::uint64_t line = 64;
  std::uint64_t assoc = 1;

  std::uint64_t sets() const { return size / (line * assoc); }

  friend bool operator==(const CacheLevelConfig&, const CacheLevelConfig&) = default;
};

struct CacheConfig {
  std::vector<CacheLevelConfig> levels;

  /// L1 64 KiB / L2 1 MiB / L3 64 MiB, 64-byte lines, 8/16/16-way.
  static CacheConfig sg2042() {
    return CacheConfig{{{"L1", 64 * 1024, 64, 8},
                        {"L2", 1024 * 1024, 64, 16},
                        {"L3", 64 * 1024 * 1024, 64, 16}}};
  }

  void validate() const {
    if (levels.empty()) throw ConfigError("cache hierarchy needs at least one level");
    for (std::size_t i = 0; i < levels.size(); ++i) {
      const auto& l = levels[i];
      const std::string where = "cache level " + (l.name.empty() ? std::to_string(i + 1) : l.name);
      if (l.line == 0 || !std::has_single_bit(l.line))
        throw ConfigError(where + ": line size must be a power of two");
      if (l.assoc == 0) throw ConfigError(where + ": associativity must be positive");
      if (l.size == 0 || l.size % (l.line * l.assoc) != 0)
        throw ConfigError(where + ": size must be a positive multiple of line * associativity");
      if (i > 0 && l.size <= levels[i - 1].size)
        throw ConfigError(where + ": levels must strictly increase in size");
    }
  }

  friend bool operator==(const CacheConfig&, const CacheConfig&) = default;
};

struct LevelReport {
  std::string name;
  std::uint64_t accesses = 0;
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t writebacks = 0;

  double miss_rate() const {
    return accesses == 0 ? 0.0 : static_cast<double>(misses) / static_cast<double>(accesses);
  }
  friend bool operator==(const LevelReport&, const LevelReport&) = default;
};

struct MissReport {
  std::vector<LevelReport> levels;
  std::uint64_t trace_events = 0;

  friend bool operator==(const MissReport&, const MissReport&) = default;
};

inline std::string format_miss_csv(const MissReport& r) {
  std::ostringstream os;
  os << "level,accesses,hits,misses,miss_rate\n";
  for (const auto& l : r.levels)
    os << l.name << ',' << l.accesses << ',' << l.hits << ',' << l.misses << ','
       << std::fixed << std::setprecision(6) << l.miss_rate() << '\n';
  return os.str();
}

namespace detail {

class CacheLevel {
 public:
  explicit CacheLevel(const CacheLevelConfig& c)
      : line_shift_(static_cast<unsigned>(std::countr_zero(c.line))),
        assoc_(c.assoc),
        sets_(c.sets()),
        slot_(c.sets(), kNone) {}

  struct Probe {
    bool hit;
    bool evicted_dirty;
    std::uint64_t victim_line;
  };

  std::uint64_t line_of(std::uint64_t address) const { return address >> line_shift_; }

  bool contains(std::uint64_t line) const { return find(line) != nullptr; }

  void mark_dirty(std::uint64_t line) {
    if (Way* w = find(line)) w->dirty = true;
  }

  /// Looks up `line`; on a miss installs it, evicting the LRU way.
  Probe access(std::uint64_t line, bool write) {
    ++clock_;
    Way* ways = set_of(line, true);
    for (std::uint64_t i = 0; i < assoc_; ++i)
      if (ways[i].valid && ways[i].line == line) {
        ways[i].stamp = clock_;
        ways[i].dirty |= write;
        return {true, false, 0};
      }
    Way* victim = ways;
    for (std::uint64_t i = 0; i < assoc_; ++i) {
      if (!ways[i].valid) {
        victim = ways + i;
        break;
      }
      if (ways[i].stamp < victim->stamp) victim = ways + i;
    }
    Probe p{false, victim->valid && victim->dirty, victim->line};
    *victim = Way{line, clock_, true, write};
    return p;
  }

 private:
  struct Way {
    std::uint64_t line = 0;
    std::uint64_t stamp = 0;
    bool valid = false;
    bool dirty = false;
  };
  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

  // Sets are materialised on first touch; large levels stay cheap for short
  // traces.
  Way* set_of(std::uint64_t line, bool create) {
    const std::uint64_t index = line % sets_;
    if (slot_[index] == kNone) {
      if (!create) return nullptr;
      slot_[index] = static_cast<std::uint32_t>(pool_.size() / assoc_);
      pool_.resize(pool_.size() + assoc_);
    }
    return pool_.data() + std::uint64_t{slot_[index]} * assoc_;
  }
  const Way* find(std::uint64_t line) const {
    const std::uint64_t index = line % sets_;
    if (slot_[index] == kNone) return nullptr;
    const Way* ways = pool_.data() + std::uint64_t{slot_[index]} * assoc_;
    for (std::uint64_t i = 0; i < assoc_; ++i)
      if (ways[i].valid && ways[i].line == line) return ways + i;
    return nullptr;
  }
  Way* find(std::uint64_t line) {
    return const_cast<Way*>(static_cast<const CacheLevel*>(this)->find(line));
  }

  unsigned line_shift_;
  std::uint64_t assoc_;
  std::uint64_t sets_;
  std::vector<std::uint32_t> slot_;
  std::vector<Way> pool_;
  std::uint64_t clock_ = 0;
};

}  // namespace detail

/// Incremental form of simulate_trace.
class CacheHierarchy {
 public:
  explicit CacheHierarchy(CacheConfig config) : config_(std::move(config)) {
    config_.validate();
    for (const auto& l : config_.levels) {
      levels_.emplace_back(l);
      report_.levels.push_back({l.name, 0, 0, 0, 0});
    }
  }

  void access(const TraceEvent& e) {
    ++report_.trace_events;
    if (e.bytes == 0) return;
    const auto& l1 = levels_.front();
    const std::uint64_t first = l1.line_of(e.address);
    const std::uint64_t last = l1.line_of(e.address + (e.bytes - 1));
    const std::uint64_t line_bytes = config_.levels.front().line;
    for (std::uint64_t line = first; line <= last; ++line)
      access_level(0, line * line_bytes, e.kind == AccessKind::store);
  }

  void access(const Trace& trace) {
    for (const auto& e : trace) access(e);
  }

  const MissReport& report() const { return report_; }

 private:
  void access_level(std::size_t i, std::uint64_t address, bool write) {
    auto& level = levels_[i];
    auto& tally = report_.levels[i];
    ++tally.accesses;
    const std::uint64_t line = level.line_of(address);
    // Peek first so the fill from below happens before this level's victim
    // is chosen, mirroring a miss that waits on the next level.
    if (level.contains(line)) {
      ++tally.hits;
      level.access(line, write);
      return;
    }
    ++tally.misses;
    if (i + 1 < levels_.size()) access_level(i + 1, address, false);
    const auto probe = level.access(line, write);
    if (probe.evicted_dirty) {
      ++tally.writebacks;
      const std::uint64_t victim_address = probe.victim_line << std::countr_zero(config_.levels[i].line);
      for (std::size_t j = i + 1; j < levels_.size(); ++j) {
        const std::uint64_t l = levels_[j].line_of(victim_address);
        if (levels_[j].contains(l)) {
          levels_[j].mark_dirty(l);
          break;
        }
      }
    }
  }

  CacheConfig config_;
  std::vector<detail::CacheLevel> levels_;
  MissReport report_;
};

inline MissReport simulate_trace(const Trace& trace, const CacheConfig& config) {
  CacheHierarchy h(config);
  h.access(trace);
  return h.report();
}

/// Accesses of an unblocked column-major i-j-k GEMM with C(i,j) held in a
/// register across the k loop: load C, then load A(i,p) and B(p,j) per p,
/// then store C. Operands sit at the same addresses gemm_blocked uses.
inline Trace naive_gemm_trace(std::size_t m, std::size_t n, std::size_t k) {
  if (m == 0 || n == 0 || k == 0) throw ShapeError("naive_gemm_trace needs positive dims");
  const auto map = GemmAddressMap::operands(m, n, k);
  Trace t;
  t.reserve(m * n * (2 * k + 2));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      t.push_back({AccessKind::load, map.element(map.c, m, i, j), 8, Origin::scalar});
      for (std::size_t p = 0; p < k; ++p) {
        t.push_back({AccessKind::load, map.element(map.a, m, i, p), 8, Origin::scalar});
        t.push_back({AccessKind::load, map.element(map.b, k, p, j), 8, Origin::scalar});
      }
      t.push_back({AccessKind::store, map.element(map.c, m, i, j), 8, Origin::scalar});
    }
  return t;
}

}  // namespace rvvlab
