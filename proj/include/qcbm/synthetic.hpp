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
 * Seeded synthetic targets for demos and tests: a two-feature bimodal
 * mixture of rounded Gaussians, clamped to the feature range.
 */
#pragma once

#include "common.hpp"
#include "encoding.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

namespace qcbm {

struct BimodalSpec {
    std::size_t featureBits = 4;
    std::size_t features = 2;
    std::vector<double> centers{4.0, 11.0}; ///< one center per mode, shared by all features
    double sigma = 1.5;
};

/// Standard normal draw (Box-Muller), spelled out so streams match across standard libraries.
[[nodiscard]] inline double standardNormal(Rng &rng) {
    const double u1 = rng.uniform01();
    const double u2 = rng.uniform01();
    return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// `n` samples; each picks a mode uniformly and jitters every feature around its center.
[[nodiscard]] inline EncodedDataset bimodalDataset(std::size_t n, std::uint64_t seed, const BimodalSpec &spec = {}) {
    if (spec.centers.empty() || spec.features == 0 || spec.featureBits == 0) {
        throw InputError("bimodal spec needs at least one center, feature and bit");
    }
    const double top = static_cast<double>((std::uint64_t{1} << spec.featureBits) - 1);
    EncodedDataset ds;
    for (std::size_t f = 0; f < spec.features; ++f) {
        ds.features.push_back({"x" + std::to_string(f), spec.featureBits, 0.0, top});
    }
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const double center = spec.centers[rng.below(spec.centers.size())];
        std::string bits;
        for (std::size_t f = 0; f < spec.features; ++f) {
            const double v = std::clamp(std::round(center + spec.sigma * standardNormal(rng)), 0.0, top);
            bits += toBitstring(static_cast<BasisIndex>(v), spec.featureBits);
        }
        ds.samples.push_back(std::move(bits));
    }
    ds.sourceRows = n;
    return ds;
}

} // namespace qcbm
