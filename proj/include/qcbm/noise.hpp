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
 * Readout-noise emulation, tensored measurement-error mitigation and
 * post-selection.
 *
 * Each wire i has a column-stochastic confusion matrix
 *     M_i = [[1 - e01, e10],
 *            [e01,     1 - e10]]       M_i[observed][prepared]
 * and the register-level map is their tensor product, applied one wire at a
 * time to the 2^n mass vector.
 */
#pragma once

#include "circuit.hpp"
#include "common.hpp"
#include "metrics.hpp"
#include "simulator.hpp"

#include <array>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace qcbm {

class ReadoutModel {
  public:
    using Matrix = std::array<double, 4>; ///< row-major 2x2

    ReadoutModel() = default;

    explicit ReadoutModel(const std::vector<ReadoutError> &errors) {
        for (const auto &e : errors) {
            if (!(e.p01 >= 0.0 && e.p01 <= 1.0 && e.p10 >= 0.0 && e.p10 <= 1.0)) {
                throw std::invalid_argument("readout error outside [0, 1]");
            }
            perQubit_.push_back({1.0 - e.p01, e.p10, e.p01, 1.0 - e.p10});
            errors_.push_back(e);
        }
    }

    static ReadoutModel identity(std::size_t n) { return ReadoutModel(std::vector<ReadoutError>(n)); }

    static ReadoutModel uniform(std::size_t n, double e) {
        return ReadoutModel(std::vector<ReadoutError>(n, ReadoutError{e, e}));
    }

    /// Errors of the physical qubits a circuit's wires are pinned to.
    static ReadoutModel forCircuit(const HardwareProfile &profile, const Circuit &c) {
        std::vector<ReadoutError> errors;
        for (std::size_t q : c.physicalQubits()) {
            if (q >= profile.readoutError.size()) {
                throw InputError("circuit uses qubit " + std::to_string(q) + " missing from the profile");
            }
            errors.push_back(profile.readoutError[q]);
        }
        return ReadoutModel(errors);
    }

    [[nodiscard]] std::size_t width() const { return perQubit_.size(); }
    [[nodiscard]] const std::vector<Matrix> &matrices() const { return perQubit_; }
    [[nodiscard]] const std::vector<ReadoutError> &errors() const { return errors_; }

  private:
    std::vector<Matrix> perQubit_;
    std::vector<ReadoutError> errors_;
};

/// In place: vec <- (M_{n-1} (x) ... (x) M_0) vec, one 2x2 factor per bit.
inline void applyTensored(std::vector<double> &vec, const std::vector<ReadoutModel::Matrix> &factors) {
    for (std::size_t wire = 0; wire < factors.size(); ++wire) {
        const auto &m = factors[wire];
        const std::size_t stride = std::size_t{1} << wire;
        for (std::size_t base = 0; base < vec.size(); base += 2 * stride) {
            for (std::size_t i = base; i < base + stride; ++i) {
                const double a0 = vec[i];
                const double a1 = vec[i + stride];
                vec[i] = m[0] * a0 + m[1] * a1;
                vec[i + stride] = m[2] * a0 + m[3] * a1;
            }
        }
    }
}

/// Expected observed mass vector before any shot sampling.
[[nodiscard]] inline std::vector<double> noisyMass(const Distribution &d, const ReadoutModel &m) {
    if (d.width() != m.width()) {
        throw std::invalid_argument("readout model width does not match distribution");
    }
    auto vec = d.toDense();
    applyTensored(vec, m.matrices());
    return vec;
}

/// Readout channel followed by a seeded multinomial draw of `shots`.
[[nodiscard]] inline Distribution applyReadoutNoise(const Distribution &d, const ReadoutModel &m,
                                                    std::uint64_t shots, std::uint64_t seed) {
    return multinomialSample(d.width(), noisyMass(d, m), shots, seed);
}

/**
 * Tensored inverse of the confusion map, then negative entries clipped to 0
 * and the result renormalized.
 */
[[nodiscard]] inline Distribution mitigate(const Distribution &noisy, const ReadoutModel &m) {
    if (noisy.width() != m.width()) {
        throw std::invalid_argument("readout model width does not match distribution");
    }
    std::vector<ReadoutModel::Matrix> inverses;
    for (std::size_t i = 0; i < m.width(); ++i) {
        const auto &a = m.matrices()[i];
        const double det = a[0] * a[3] - a[1] * a[2];
        if (std::abs(det) < 1e-12) {
            throw InputError("confusion matrix of wire " + std::to_string(i) + " is singular");
        }
        inverses.push_back({a[3] / det, -a[1] / det, -a[2] / det, a[0] / det});
    }
    auto vec = noisy.toDense();
    applyTensored(vec, inverses);
    double total = 0.0;
    for (double &v : vec) {
        v = std::max(v, 0.0);
        total += v;
    }
    if (!(total > 0.0)) {
        throw InputError("mitigation removed all probability mass");
    }
    for (double &v : vec) {
        v /= total;
    }
    return Distribution::fromDense(noisy.width(), vec, 0.0);
}

struct PostSelection {
    Distribution distribution;
    double retainedFraction = 0.0;
};

/// Restrict to `validSet` and renormalize.
[[nodiscard]] inline PostSelection postSelect(const Distribution &d, const std::set<BasisIndex> &validSet) {
    if (validSet.empty()) {
        throw InputError("post-selection set is empty");
    }
    std::map<BasisIndex, double> kept;
    double retained = 0.0;
    for (const auto &[idx, p] : d.entries()) {
        if (validSet.count(idx) != 0) {
            kept[idx] = p;
            retained += p;
        }
    }
    if (!(retained > 0.0)) {
        throw InputError("post-selection keeps no probability mass");
    }
    for (auto &[idx, p] : kept) {
        p /= retained;
    }
    return {Distribution::exact(d.width(), kept), retained};
}

[[nodiscard]] inline std::set<BasisIndex> supportOf(const Distribution &d) {
    std::set<BasisIndex> out;
    for (const auto &e : d.entries()) {
        out.insert(e.first);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Repeated noisy evaluation

struct MeanStd {
    double mean = 0.0;
    double std = 0.0; ///< sample standard deviation (n - 1)
};

[[nodiscard]] inline MeanStd meanStd(const std::vector<double> &xs) {
    MeanStd r;
    if (xs.empty()) {
        return r;
    }
    for (double x : xs) {
        r.mean += x;
    }
    r.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) {
            ss += (x - r.mean) * (x - r.mean);
        }
        r.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return r;
}

struct NoisyEvalConfig {
    std::size_t repeats = 10;
    std::uint64_t shots = 10000;
    std::uint64_t seed = 0;
    KlConfig kl{};
};

struct NoisyTrial {
    double klRaw = 0.0;
    double klEm = 0.0;
    double klPost = 0.0;
    double retainedFraction = 0.0;
};

struct NoisyEvalReport {
    double klNoiseless = 0.0; ///< exact model vs data
    std::vector<NoisyTrial> trials;
    MeanStd klRaw, klEm, klPost, retained;
    Distribution lastNoisy; ///< raw noisy draw of the final repetition
    Distribution lastMitigated;
};

/**
 * Emulated device runs: per repetition, draw `shots` readouts through the
 * noise channel (seed derived from cfg.seed and the repetition), then score
 * the raw draw, its mitigation, and its post-selection onto `validSet`.
 */
[[nodiscard]] inline NoisyEvalReport evaluateNoisy(const Distribution &model, const Distribution &data,
                                                   const ReadoutModel &readout, const std::set<BasisIndex> &validSet,
                                                   const NoisyEvalConfig &cfg) {
    if (cfg.repeats == 0) {
        throw InputError("noisy evaluation needs at least one repetition");
    }
    NoisyEvalReport report;
    report.klNoiseless = reverseKl(model, data, cfg.kl);
    const auto expected = noisyMass(model, readout);
    std::vector<double> raw, em, post, kept;
    for (std::size_t r = 0; r < cfg.repeats; ++r) {
        const Distribution noisy = multinomialSample(model.width(), expected, cfg.shots, deriveSeed(cfg.seed, r));
        const Distribution mitigated = mitigate(noisy, readout);
        const PostSelection selected = postSelect(noisy, validSet);
        NoisyTrial t{reverseKl(noisy, data, cfg.kl), reverseKl(mitigated, data, cfg.kl),
                     reverseKl(selected.distribution, data, cfg.kl), selected.retainedFraction};
        report.trials.push_back(t);
        raw.push_back(t.klRaw);
        em.push_back(t.klEm);
        post.push_back(t.klPost);
        kept.push_back(t.retainedFraction);
        if (r + 1 == cfg.repeats) {
            report.lastNoisy = noisy;
            report.lastMitigated = mitigated;
        }
    }
    report.klRaw = meanStd(raw);
    report.klEm = meanStd(em);
    report.klPost = meanStd(post);
    report.retained = meanStd(kept);
    return report;
}

} // namespace qcbm
