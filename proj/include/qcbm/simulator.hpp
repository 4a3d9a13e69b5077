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
 * Dense statevector simulation, Born-rule distributions and seeded shot
 * sampling.
 *
 * Gate conventions (global phases fixed here, they matter for the unitarity
 * tests but cancel in probabilities):
 *   rx(t) = exp(-i t X / 2), ry(t) = exp(-i t Y / 2), rz(t) = exp(-i t Z / 2)
 *   sx    = exp(i pi/4) exp(-i pi X / 4) = 1/2 [[1+i, 1-i], [1-i, 1+i]]
 *   h     = 1/sqrt2 [[1, 1], [1, -1]]
 *   cz    = diag(1, 1, 1, -1)
 *   cx    = control on the first listed qubit, target on the second
 */
#pragma once

#include "circuit.hpp"
#include "common.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qcbm {

using Complex = std::complex<double>;

inline constexpr std::size_t kDefaultQubitCeiling = 20;

struct Statevector {
    std::size_t numQubits = 0;
    std::vector<Complex> amplitudes;

    [[nodiscard]] double norm2() const {
        double s = 0.0;
        for (const auto &a : amplitudes) {
            s += std::norm(a);
        }
        return s;
    }
};

/// 2x2 gate matrix, row-major: [[m00, m01], [m10, m11]].
using Mat2 = std::array<Complex, 4>;

[[nodiscard]] inline Mat2 singleQubitMatrix(GateKind kind, double angle) {
    const double c = std::cos(angle / 2);
    const double s = std::sin(angle / 2);
    const Complex i{0.0, 1.0};
    switch (kind) {
    case GateKind::RX: return {c, -i * s, -i * s, c};
    case GateKind::RY: return {c, -s, s, c};
    case GateKind::RZ: return {std::polar(1.0, -angle / 2), 0.0, 0.0, std::polar(1.0, angle / 2)};
    case GateKind::X: return {0.0, 1.0, 1.0, 0.0};
    case GateKind::SX: return {Complex{0.5, 0.5}, Complex{0.5, -0.5}, Complex{0.5, -0.5}, Complex{0.5, 0.5}};
    case GateKind::H: {
        const double r = 1.0 / std::sqrt(2.0);
        return {r, r, r, -r};
    }
    default: break;
    }
    throw std::invalid_argument("singleQubitMatrix: not a single-qubit gate");
}

/// In-place stride update of the amplitude pairs differing in bit `wire`.
inline void applyMatrix(std::vector<Complex> &amps, std::size_t wire, const Mat2 &m) {
    const std::size_t stride = std::size_t{1} << wire;
    const std::size_t n = amps.size();
    for (std::size_t base = 0; base < n; base += 2 * stride) {
        for (std::size_t i = base; i < base + stride; ++i) {
            const Complex a0 = amps[i];
            const Complex a1 = amps[i + stride];
            amps[i] = m[0] * a0 + m[1] * a1;
            amps[i + stride] = m[2] * a0 + m[3] * a1;
        }
    }
}

inline void applyGate(std::vector<Complex> &amps, const BoundGate &g) {
    const std::size_t n = amps.size();
    switch (g.kind) {
    case GateKind::RZ: {
        const Complex lo = std::polar(1.0, -g.angle / 2);
        const Complex hi = std::polar(1.0, g.angle / 2);
        const std::size_t bit = std::size_t{1} << g.qubits[0];
        for (std::size_t i = 0; i < n; ++i) {
            amps[i] *= (i & bit) ? hi : lo;
        }
        return;
    }
    case GateKind::X: {
        const std::size_t stride = std::size_t{1} << g.qubits[0];
        for (std::size_t base = 0; base < n; base += 2 * stride) {
            for (std::size_t i = base; i < base + stride; ++i) {
                std::swap(amps[i], amps[i + stride]);
            }
        }
        return;
    }
    case GateKind::CZ: {
        const std::size_t mask = (std::size_t{1} << g.qubits[0]) | (std::size_t{1} << g.qubits[1]);
        for (std::size_t i = 0; i < n; ++i) {
            if ((i & mask) == mask) {
                amps[i] = -amps[i];
            }
        }
        return;
    }
    case GateKind::CX: {
        const std::size_t control = std::size_t{1} << g.qubits[0];
        const std::size_t target = std::size_t{1} << g.qubits[1];
        for (std::size_t i = 0; i < n; ++i) {
            if ((i & control) && !(i & target)) {
                std::swap(amps[i], amps[i | target]);
            }
        }
        return;
    }
    case GateKind::Unknown: throw std::invalid_argument("applyGate: unknown gate");
    default: applyMatrix(amps, g.qubits[0], singleQubitMatrix(g.kind, g.angle));
    }
}

/// U(theta)|0...0>.
[[nodiscard]] inline Statevector run(const BoundCircuit &bound,
                                     std::size_t qubitCeiling = kDefaultQubitCeiling) {
    if (bound.numQubits > qubitCeiling) {
        throw std::invalid_argument("run: " + std::to_string(bound.numQubits) +
                                    " qubits exceeds simulator ceiling of " +
                                    std::to_string(qubitCeiling));
    }
    Statevector sv{bound.numQubits, std::vector<Complex>(std::size_t{1} << bound.numQubits)};
    sv.amplitudes[0] = 1.0;
    for (const auto &g : bound.gates) {
        for (std::size_t k = 0; k < gateArity(g.kind); ++k) {
            if (g.qubits[k] >= bound.numQubits) {
                throw std::invalid_argument("run: gate qubit out of range");
            }
        }
        applyGate(sv.amplitudes, g);
    }
    return sv;
}

// ---------------------------------------------------------------------------
// Distributions

enum class DistributionKind { Exact, Empirical };

/**
 * Probability mass over n-bit basis indices, stored sparsely and sorted by
 * index. Empirical distributions carry their shot count and every mass is an
 * integer multiple of 1/shots.
 */
class Distribution {
  public:
    using Entry = std::pair<BasisIndex, double>;

    Distribution() = default;

    /// Exact distribution from an index -> mass map.
    static Distribution exact(std::size_t n, const std::map<BasisIndex, double> &mass) {
        Distribution d(n, DistributionKind::Exact, 0);
        for (const auto &[idx, p] : mass) {
            d.checkIndex(idx);
            if (p > 0.0) {
                d.entries_.emplace_back(idx, p);
            } else if (p < 0.0) {
                throw std::invalid_argument("Distribution: negative probability");
            }
        }
        d.checkNormalized();
        return d;
    }

    /// Exact distribution from a dense 2^n vector; entries below `cutoff` are dropped.
    static Distribution fromDense(std::size_t n, const std::vector<double> &probs,
                                  double cutoff = 1e-15) {
        if (probs.size() != (std::size_t{1} << n)) {
            throw std::invalid_argument("Distribution: dense vector has wrong length");
        }
        Distribution d(n, DistributionKind::Exact, 0);
        for (std::size_t i = 0; i < probs.size(); ++i) {
            if (probs[i] < 0.0) {
                throw std::invalid_argument("Distribution: negative probability");
            }
            if (probs[i] >= cutoff && probs[i] > 0.0) {
                d.entries_.emplace_back(i, probs[i]);
            }
        }
        d.checkNormalized();
        return d;
    }

    /// Empirical distribution from shot counts (counts must sum to shots).
    static Distribution fromCounts(std::size_t n, const std::map<BasisIndex, std::uint64_t> &counts) {
        std::uint64_t shots = 0;
        for (const auto &[idx, c] : counts) {
            shots += c;
        }
        if (shots == 0) {
            throw std::invalid_argument("Distribution: no shots");
        }
        Distribution d(n, DistributionKind::Empirical, shots);
        for (const auto &[idx, c] : counts) {
            d.checkIndex(idx);
            if (c > 0) {
                d.entries_.emplace_back(idx, static_cast<double>(c) / static_cast<double>(shots));
            }
        }
        return d;
    }

    [[nodiscard]] std::size_t width() const { return n_; }
    [[nodiscard]] DistributionKind kind() const { return kind_; }
    [[nodiscard]] std::uint64_t shots() const { return shots_; }
    [[nodiscard]] const std::vector<Entry> &entries() const { return entries_; }
    [[nodiscard]] std::size_t supportSize() const { return entries_.size(); }

    [[nodiscard]] double mass(BasisIndex idx) const {
        auto it = std::lower_bound(entries_.begin(), entries_.end(), idx,
                                   [](const Entry &e, BasisIndex i) { return e.first < i; });
        return (it != entries_.end() && it->first == idx) ? it->second : 0.0;
    }

    [[nodiscard]] double mass(std::string_view bits) const {
        if (bits.size() != n_) {
            throw std::invalid_argument("Distribution: bitstring width mismatch");
        }
        return mass(fromBitstring(bits));
    }

    [[nodiscard]] std::vector<double> toDense() const {
        std::vector<double> out(std::size_t{1} << n_, 0.0);
        for (const auto &[idx, p] : entries_) {
            out[idx] = p;
        }
        return out;
    }

    [[nodiscard]] double total() const {
        double s = 0.0;
        for (const auto &e : entries_) {
            s += e.second;
        }
        return s;
    }

    friend bool operator==(const Distribution &, const Distribution &) = default;

  private:
    Distribution(std::size_t n, DistributionKind kind, std::uint64_t shots)
        : n_(n), kind_(kind), shots_(shots) {
        if (n > 63) {
            throw std::invalid_argument("Distribution: width above 63 bits");
        }
    }

    void checkIndex(BasisIndex idx) const {
        if (n_ < 64 && (idx >> n_) != 0) {
            throw std::invalid_argument("Distribution: index wider than distribution");
        }
    }

    void checkNormalized() const {
        if (std::abs(total() - 1.0) > 1e-9) {
            throw std::invalid_argument("Distribution: masses sum to " + std::to_string(total()));
        }
    }

    std::size_t n_ = 0;
    DistributionKind kind_ = DistributionKind::Exact;
    std::uint64_t shots_ = 0;
    std::vector<Entry> entries_;
};

[[nodiscard]] inline std::vector<double> probabilities(const Statevector &sv) {
    std::vector<double> p(sv.amplitudes.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = std::norm(sv.amplitudes[i]);
    }
    return p;
}

[[nodiscard]] inline Distribution exactDistribution(const BoundCircuit &bound,
                                                    std::size_t qubitCeiling = kDefaultQubitCeiling) {
    return Distribution::fromDense(bound.numQubits, probabilities(run(bound, qubitCeiling)));
}

/**
 * Multinomial draw of `shots` outcomes from a dense mass vector by inverse-CDF
 * lookup on Rng::uniform01. The vector need not be normalized.
 */
[[nodiscard]] inline Distribution multinomialSample(std::size_t n, const std::vector<double> &probs,
                                                    std::uint64_t shots, std::uint64_t seed) {
    if (shots == 0) {
        throw std::invalid_argument("sample: shots must be positive");
    }
    std::vector<double> cumulative(probs.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += std::max(probs[i], 0.0);
        cumulative[i] = acc;
    }
    if (!(acc > 0.0)) {
        throw std::invalid_argument("sample: distribution has no mass");
    }
    // Last nonzero bin absorbs u * acc rounding up to acc.
    std::size_t lastNonzero = probs.size() - 1;
    while (lastNonzero > 0 && !(probs[lastNonzero] > 0.0)) {
        --lastNonzero;
    }
    Rng rng(seed);
    std::map<BasisIndex, std::uint64_t> counts;
    for (std::uint64_t s = 0; s < shots; ++s) {
        const double u = rng.uniform01() * acc;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        std::size_t idx = static_cast<std::size_t>(it - cumulative.begin());
        idx = std::min(idx, lastNonzero);
        ++counts[idx];
    }
    return Distribution::fromCounts(n, counts);
}

/// Seeded shot sampling of the Born distribution; deterministic in (bound, shots, seed).
[[nodiscard]] inline Distribution sample(const BoundCircuit &bound, std::uint64_t shots,
                                         std::uint64_t seed,
                                         std::size_t qubitCeiling = kDefaultQubitCeiling) {
    if (shots == 0) {
        throw std::invalid_argument("sample: shots must be positive");
    }
    return multinomialSample(bound.numQubits, probabilities(run(bound, qubitCeiling)), shots, seed);
}

/// Rows of "bitstring,probability" with a header line.
[[nodiscard]] inline std::string distributionCsv(const Distribution &d) {
    std::string out = "bitstring,probability\n";
    char buf[64];
    for (const auto &[idx, p] : d.entries()) {
        std::snprintf(buf, sizeof buf, "%.17g", p);
        out += toBitstring(idx, d.width()) + "," + buf + "\n";
    }
    return out;
}

} // namespace qcbm
