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
 * Gaussian kernels over bitstrings, the MMD loss and reverse KL divergence.
 *
 * Every kernel representation is a feature vector over a bit layout:
 *   feature-vector  the dataset's per-feature integer levels
 *   scalar-integer  one feature spanning the whole register
 *   binary-vector   one 1-bit feature per wire
 * so k(x, y) = exp(-|v(x) - v(y)|^2 / (2 sigma^2)) factorizes into a product
 * of per-feature terms, which are tabulated once per bandwidth.
 */
#pragma once

#include "common.hpp"
#include "simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qcbm {

enum class KernelRepresentation { FeatureVector, ScalarInteger, BinaryVector };

[[nodiscard]] inline std::string_view representationName(KernelRepresentation r) {
    switch (r) {
    case KernelRepresentation::FeatureVector: return "feature-vector";
    case KernelRepresentation::ScalarInteger: return "scalar-integer";
    case KernelRepresentation::BinaryVector: return "binary-vector";
    }
    return "?";
}

[[nodiscard]] inline KernelRepresentation representationFromName(std::string_view s) {
    for (auto r : {KernelRepresentation::FeatureVector, KernelRepresentation::ScalarInteger,
                   KernelRepresentation::BinaryVector}) {
        if (representationName(r) == s) {
            return r;
        }
    }
    throw InputError("unknown kernel representation '" + std::string(s) + "'");
}

/// One bandwidth is a plain Gaussian; several form a uniform-weight mixture.
struct KernelSpec {
    std::vector<double> sigmas{3.0};
    KernelRepresentation representation = KernelRepresentation::FeatureVector;

    [[nodiscard]] bool isMixture() const { return sigmas.size() > 1; }
};

using FeatureLayout = std::vector<std::size_t>;

/// A KernelSpec prepared for a fixed register width and feature layout.
class Kernel {
  public:
    Kernel(const KernelSpec &spec, std::size_t width, const FeatureLayout &layout = {})
        : width_(width), spec_(spec) {
        if (spec.sigmas.empty()) {
            throw std::invalid_argument("kernel: no bandwidths");
        }
        for (double s : spec.sigmas) {
            if (!(s > 0.0) || !std::isfinite(s)) {
                throw std::invalid_argument("kernel: bandwidths must be positive");
            }
        }
        if (width == 0 || width > 30) {
            throw std::invalid_argument("kernel: register width must be in [1, 30]");
        }
        switch (spec.representation) {
        case KernelRepresentation::FeatureVector:
            if (layout.empty()) {
                throw std::invalid_argument("kernel: feature-vector representation needs a layout");
            }
            bits_ = layout;
            break;
        case KernelRepresentation::ScalarInteger: bits_ = {width}; break;
        case KernelRepresentation::BinaryVector: bits_.assign(width, 1); break;
        }
        if (std::accumulate(bits_.begin(), bits_.end(), std::size_t{0}) != width) {
            throw std::invalid_argument("kernel: feature layout does not cover the register width");
        }
        std::size_t offset = 0;
        for (std::size_t b : bits_) {
            if (b == 0) {
                throw std::invalid_argument("kernel: zero-width feature");
            }
            shifts_.push_back(width - offset - b);
            offset += b;
        }
        for (double sigma : spec.sigmas) {
            std::vector<std::vector<double>> perFeature;
            for (std::size_t b : bits_) {
                std::vector<double> table(std::size_t{1} << b);
                for (std::size_t d = 0; d < table.size(); ++d) {
                    const double dd = static_cast<double>(d);
                    table[d] = std::exp(-dd * dd / (2.0 * sigma * sigma));
                }
                perFeature.push_back(std::move(table));
            }
            tables_.push_back(std::move(perFeature));
        }
    }

    [[nodiscard]] std::size_t width() const { return width_; }
    [[nodiscard]] const KernelSpec &spec() const { return spec_; }
    [[nodiscard]] const FeatureLayout &featureBits() const { return bits_; }

    [[nodiscard]] std::uint64_t featureValue(BasisIndex x, std::size_t f) const {
        return (x >> shifts_[f]) & ((std::uint64_t{1} << bits_[f]) - 1);
    }

    [[nodiscard]] double operator()(BasisIndex x, BasisIndex y) const {
        double sum = 0.0;
        for (const auto &perFeature : tables_) {
            double k = 1.0;
            for (std::size_t f = 0; f < bits_.size(); ++f) {
                const std::uint64_t a = featureValue(x, f);
                const std::uint64_t b = featureValue(y, f);
                k *= perFeature[f][a > b ? a - b : b - a];
            }
            sum += k;
        }
        return tables_.size() == 1 ? sum : sum / static_cast<double>(tables_.size());
    }

    /**
     * Dense K w over all 2^width basis states, applied one feature axis at a
     * time (K is the tensor product of the per-feature Gram matrices).
     */
    [[nodiscard]] std::vector<double> apply(const std::vector<double> &w) const {
        const std::size_t dim = std::size_t{1} << width_;
        if (w.size() != dim) {
            throw std::invalid_argument("kernel apply: vector length mismatch");
        }
        std::vector<double> result(dim, 0.0);
        std::vector<double> cur;
        std::vector<double> next(dim);
        for (const auto &perFeature : tables_) {
            cur = w;
            for (std::size_t f = 0; f < bits_.size(); ++f) {
                const std::size_t size = std::size_t{1} << bits_[f];
                const std::size_t inner = std::size_t{1} << shifts_[f];
                const std::size_t outer = dim / (size * inner);
                const auto &table = perFeature[f];
                for (std::size_t o = 0; o < outer; ++o) {
                    for (std::size_t i = 0; i < inner; ++i) {
                        const std::size_t base = o * size * inner + i;
                        for (std::size_t a = 0; a < size; ++a) {
                            double acc = 0.0;
                            for (std::size_t b = 0; b < size; ++b) {
                                acc += table[a > b ? a - b : b - a] * cur[base + b * inner];
                            }
                            next[base + a * inner] = acc;
                        }
                    }
                }
                std::swap(cur, next);
            }
            for (std::size_t i = 0; i < dim; ++i) {
                result[i] += cur[i];
            }
        }
        if (tables_.size() > 1) {
            for (double &r : result) {
                r /= static_cast<double>(tables_.size());
            }
        }
        return result;
    }

  private:
    std::size_t width_;
    KernelSpec spec_;
    FeatureLayout bits_;
    std::vector<std::size_t> shifts_;
    std::vector<std::vector<std::vector<double>>> tables_; // [sigma][feature][distance]
};

/// Kernel value between two text bitstrings of equal width.
[[nodiscard]] inline double kernel(std::string_view x, std::string_view y, const KernelSpec &spec,
                                   const FeatureLayout &layout = {}) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("kernel: bitstring width mismatch");
    }
    return Kernel(spec, x.size(), layout)(fromBitstring(x), fromBitstring(y));
}

/// Neumaier-compensated running sum.
class CompensatedSum {
  public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            c_ += (sum_ - t) + x;
        } else {
            c_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    [[nodiscard]] double value() const { return sum_ + c_; }

  private:
    double sum_ = 0.0;
    double c_ = 0.0;
};

/**
 * Biased (V-statistic) MMD between two distributions:
 *   E_{x,x'~p} k + E_{y,y'~q} k - 2 E_{x~p,y~q} k.
 * Evaluated as w^T K w with w = p - q on the sorted union of supports, which
 * is the same quantity, exactly symmetric in (p, q) and exactly 0 for p == q.
 */
[[nodiscard]] inline double mmd(const Distribution &p, const Distribution &q, const Kernel &k) {
    if (p.width() != q.width() || p.width() != k.width()) {
        throw std::invalid_argument("mmd: width mismatch");
    }
    std::vector<std::pair<BasisIndex, double>> w;
    const auto &pe = p.entries();
    const auto &qe = q.entries();
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < pe.size() || j < qe.size()) {
        if (j == qe.size() || (i < pe.size() && pe[i].first < qe[j].first)) {
            w.emplace_back(pe[i].first, pe[i].second);
            ++i;
        } else if (i == pe.size() || qe[j].first < pe[i].first) {
            w.emplace_back(qe[j].first, -qe[j].second);
            ++j;
        } else {
            const double d = pe[i].second - qe[j].second;
            if (d != 0.0) {
                w.emplace_back(pe[i].first, d);
            }
            ++i;
            ++j;
        }
    }
    CompensatedSum total;
    for (std::size_t a = 0; a < w.size(); ++a) {
        double row = 0.0;
        for (std::size_t b = a + 1; b < w.size(); ++b) {
            row += w[b].second * k(w[a].first, w[b].first);
        }
        total.add(w[a].second * w[a].second * k(w[a].first, w[a].first));
        total.add(2.0 * w[a].second * row);
    }
    return std::max(0.0, total.value());
}

[[nodiscard]] inline double mmd(const Distribution &p, const Distribution &q, const KernelSpec &spec,
                                const FeatureLayout &layout = {}) {
    return mmd(p, q, Kernel(spec, p.width(), layout));
}

struct KlConfig {
    double epsilon = 1e-9; ///< smoothing mass added to every reference bin
};

/**
 * Reverse KL divergence D(Q || P) = sum_{Q(x) > 0} Q(x) ln(Q(x) / P~(x)),
 * where P~ = (P + eps) / (1 + eps 2^n) is the smoothed reference. With
 * eps = 0 a model bin outside P's support gives +infinity.
 */
[[nodiscard]] inline double reverseKl(const Distribution &model, const Distribution &data,
                                      const KlConfig &cfg = {}) {
    if (model.width() != data.width()) {
        throw std::invalid_argument("reverseKl: width mismatch");
    }
    if (cfg.epsilon < 0.0) {
        throw std::invalid_argument("reverseKl: epsilon must be nonnegative");
    }
    const double norm = 1.0 + cfg.epsilon * std::ldexp(1.0, static_cast<int>(model.width()));
    CompensatedSum total;
    for (const auto &[idx, qx] : model.entries()) {
        const double px = (data.mass(idx) + cfg.epsilon) / norm;
        if (px <= 0.0) {
            return std::numeric_limits<double>::infinity();
        }
        total.add(qx * std::log(qx / px));
    }
    return std::max(0.0, total.value());
}

} // namespace qcbm
