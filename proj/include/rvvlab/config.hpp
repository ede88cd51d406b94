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

// Run configuration: flat "key = value" text with dotted section prefixes.
//
//   machine.vlen             vector register width in bits
//   kernel.mr, kernel.nr     micro-tile shape
//   kernel.sew               element width (64)
//   kernel.variant           lmul1 | lmul4
//   blocking.mc/kc/nc        cache blocking
//   cache.levels             number of cache levels (1-8)
//   cache.lN.name/size/line/assoc
//   limits.max_instructions  per-simulation dynamic instruction budget
//   lu.block                 LU panel width
//   seed                     64-bit seed for all generated data
//   output.json              JSON report path (empty: none)

#pragma once

#include <charconv>
#include <istream>
#include <string>
#include <utility>
#include <vector>

#include "rvvlab/cachesim.hpp"
#include "rvvlab/kernels.hpp"

namespace rvvlab {

struct RunConfig {
  MachineConfig machine{};
  MicroKernelParams kernel{};
  BlockingParams blocking{};
  CacheConfig cache = CacheConfig::sg2042();
  RunLimits limits{};
  std::size_t lu_block = 8;
  std::uint64_t seed = 1;
  std::string json_path;

  static constexpr std::size_t kMaxCacheLevels = 8;

  /// Checks every cross-module invariant. Throws ConfigError.
  void validate() const {
    machine.validate();
    if (kernel.vlen != machine.vlen)
      throw ConfigError("kernel VLEN does not match machine.vlen");
    kernel.validate();
    blocking.validate(kernel);
    cache.validate();
    if (limits.max_instructions == 0)
      throw ConfigError("limits.max_instructions must be positive");
    if (lu_block == 0) throw ConfigError("lu.block must be positive");
  }

  /// Applies one key. Throws ConfigError for unknown keys or bad values.
  void set(std::string_view key, std::string_view value) {
    const auto fail = [&](const std::string& why) -> void {
      throw ConfigError(std::string(key) + ": " + why);
    };
    const auto number = [&]() -> std::uint64_t {
      std::uint64_t v = 0;
      const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc{} || p != value.data() + value.size() || value.empty())
        fail("expected a non-negative integer, got '" + std::string(value) + "'");
      return v;
    };
    const auto small = [&]() -> unsigned {
      const auto v = number();
      if (v > 1u << 20) fail("value out of range");
      return static_cast<unsigned>(v);
    };

    if (key == "machine.vlen") {
      machine.vlen = kernel.vlen = small();
    } else if (key == "kernel.mr") {
      kernel.mr = small();
    } else if (key == "kernel.nr") {
      kernel.nr = small();
    } else if (key == "kernel.sew") {
      kernel.sew = small();
    } else if (key == "kernel.variant") {
      const auto v = parse_variant(value);
      if (!v) fail("expected lmul1 or lmul4, got '" + std::string(value) + "'");
      kernel.variant = *v;
    } else if (key == "blocking.mc") {
      blocking.mc = number();
    } else if (key == "blocking.kc") {
      blocking.kc = number();
    } else if (key == "blocking.nc") {
      blocking.nc = number();
    } else if (key == "cache.levels") {
      const auto n = number();
      if (n == 0 || n > kMaxCacheLevels) fail("expected 1 to 8 levels");
      const auto old = cache.levels.size();
      cache.levels.resize(n);
      for (std::size_t i = old; i < n; ++i) cache.levels[i].name = "L" + std::to_string(i + 1);
    } else if (key.starts_with("cache.l")) {
      const auto rest = key.substr(7);
      const auto dot = rest.find('.');
      std::size_t index = 0;
      const auto [p, ec] = std::from_chars(rest.data(), rest.data() + dot, index);
      if (dot == std::string_view::npos || ec != std::errc{} || p != rest.data() + dot ||
          index == 0 || index > cache.levels.size())
        fail("unknown key (cache levels are cache.l1 .. cache.l" +
             std::to_string(cache.levels.size()) + "; set cache.levels first)");
      auto& level = cache.levels[index - 1];
      const auto field = rest.substr(dot + 1);
      if (field == "name") {
        if (value.empty()) fail("name must not be empty");
        level.name = std::string(value);
      } else if (field == "size") {
        level.size = number();
      } else if (field == "line") {
        level.line = number();
      } else if (field == "assoc") {
        level.assoc = number();
      } else {
        fail("unknown cache field '" + std::string(field) + "'");
      }
    } else if (key == "limits.max_instructions") {
      limits.max_instructions = number();
    } else if (key == "lu.block") {
      lu_block = number();
    } else if (key == "seed") {
      seed = number();
    } else if (key == "output.json") {
      json_path = std::string(value);
    } else {
      fail("unknown configuration key");
    }
  }

  /// Every effective setting, in file order, as accepted by set().
  std::vector<std::pair<std::string, std::string>> entries() const {
    std::vector<std::pair<std::string, std::string>> e{
        {"machine.vlen", std::to_string(machine.vlen)},
        {"kernel.mr", std::to_string(kernel.mr)},
        {"kernel.nr", std::to_string(kernel.nr)},
        {"kernel.sew", std::to_string(kernel.sew)},
        {"kernel.variant", std::string(variant_name(kernel.variant))},
        {"blocking.mc", std::to_string(blocking.mc)},
        {"blocking.kc", std::to_string(blocking.kc)},
        {"blocking.nc", std::to_string(blocking.nc)},
        {"cache.levels", std::to_string(cache.levels.size())},
    };
    for (std::size_t i = 0; i < cache.levels.size(); ++i) {
      const std::string p = "cache.l" + std::to_string(i + 1) + ".";
      const auto& l = cache.levels[i];
      e.emplace_back(p + "name", l.name);
      e.emplace_back(p + "size", std::to_string(l.size));
      e.emplace_back(p + "line", std::to_string(l.line));
      e.emplace_back(p + "assoc", std::to_string(l.assoc));
    }
    e.emplace_back("limits.max_instructions", std::to_string(limits.max_instructions));
    e.emplace_back("lu.block", std::to_string(lu_block));
    e.emplace_back("seed", std::to_string(seed));
    e.emplace_back("output.json", json_path);
    return e;
  }
};

inline std::string format_config(const RunConfig& c) {
  std::string out;
  for (const auto& [k, v] : c.entries()) out += k + " = " + v + "\n";
  return out;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Applies "key = value" lines on top of `base`; '#' starts a comment. The
/// result is validated. Errors name the line.
inline RunConfig parse_config(std::istream& in, RunConfig base = {}) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos)
      view = view.substr(0, hash);
    view = detail::trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    try {
      base.set(detail::trim(view.substr(0, eq)), detail::trim(view.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  base.validate();
  return base;
}

}  // namespace rvvlab
