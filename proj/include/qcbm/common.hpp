// Copyright 2026 The QCBM Search Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
/**
 * @file
 * Error types, seeded random numbers and bitstring helpers shared by every
 * qcbm module.
 *
 * Bit convention (global): bit i of a basis index is qubit (wire) i. Text
 * bitstrings print the highest wire first, so wire 0 is the rightmost
 * character and the string read as a binary number equals the basis index.
 */
#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qcbm {

/// Malformed user input: bad files, missing columns, out-of-range values.
class InputError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Missing or inconsistent configuration (credentials, endpoints, flags).
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// splitmix64 finalizer, used to derive independent child seeds.
[[nodiscard]] constexpr std::uint64_t mixSeed(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30U)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27U)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31U);
}

[[nodiscard]] constexpr std::uint64_t deriveSeed(std::uint64_t seed,
                                                 std::uint64_t a,
                                                 std::uint64_t b = 0,
                                                 std::uint64_t c = 0) noexcept {
    return mixSeed(mixSeed(mixSeed(mixSeed(seed) ^ a) ^ b) ^ c);
}

/**
 * Portable seeded generator.
 *
 * Wraps std::mt19937_64 (whose output sequence is fixed by the standard) and
 * converts raw words to doubles and bounded integers explicitly, so streams
 * are identical across standard library implementations. The <random>
 * distribution classes are avoided because their algorithms are
 * implementation-defined.
 */
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11U) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer on [0, n), rejection sampled (no modulo bias).
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) {
            throw std::invalid_argument("Rng::below: empty range");
        }
        const std::uint64_t limit =
            std::numeric_limits<std::uint64_t>::max() -
            std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t r = engine_();
        while (r >= limit) {
            r = engine_();
        }
        return r % n;
    }

    std::uint64_t next() { return engine_(); }

  private:
    std::mt19937_64 engine_;
};

using BasisIndex = std::uint64_t;

/// Basis index -> text bitstring of the given width (wire 0 rightmost).
[[nodiscard]] inline std::string toBitstring(BasisIndex index, std::size_t width) {
    std::string s(width, '0');
    for (std::size_t i = 0; i < width; ++i) {
        if ((index >> i) & 1U) {
            s[width - 1 - i] = '1';
        }
    }
    return s;
}

/// Text bitstring -> basis index. Throws InputError on non-binary chars.
[[nodiscard]] inline BasisIndex fromBitstring(std::string_view bits) {
    if (bits.size() > 63) {
        throw InputError("bitstring wider than 63 bits");
    }
    BasisIndex index = 0;
    for (char c : bits) {
        if (c != '0' && c != '1') {
            throw InputError("bitstring contains non-binary character: " + std::string(bits));
        }
        index = (index << 1U) | static_cast<BasisIndex>(c == '1');
    }
    return index;
}

} // namespace qcbm
