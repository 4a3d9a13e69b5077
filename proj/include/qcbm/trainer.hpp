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
 * MMD training of circuit parameters: parameter-shift gradients and Adam.
 *
 * For a rotation angle theta_j the Born distribution satisfies
 * dp/dtheta_j = (p(theta_j + pi/2) - p(theta_j - pi/2)) / 2, which turns the
 * MMD derivative into
 *   grad_j = (p+ - p-)^T K (p - data).
 * The vector K (p - data) is shared by every parameter, so one step costs
 * 2P + 1 circuit simulations and a single kernel application.
 */
#pragma once

#include "circuit.hpp"
#include "common.hpp"
#include "encoding.hpp"
#include "metrics.hpp"
#include "simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qcbm {

enum class EvalMode { Exact, Sampled };

[[nodiscard]] inline std::string_view evalModeName(EvalMode m) {
    return m == EvalMode::Exact ? "exact" : "sampled";
}

[[nodiscard]] inline EvalMode evalModeFromName(std::string_view s) {
    if (s == "exact") {
        return EvalMode::Exact;
    }
    if (s == "sampled") {
        return EvalMode::Sampled;
    }
    throw InputError("unknown evaluation mode '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Adam

struct AdamConfig {
    double learningRate = 0.1;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t t = 0;

    explicit AdamState(std::size_t dim = 0) : m(dim, 0.0), v(dim, 0.0) {}
};

/// One bias-corrected Adam update of `params` in place.
inline void adamStep(AdamState &state, std::vector<double> &params, const std::vector<double> &grads,
                     const AdamConfig &cfg) {
    if (grads.size() != params.size() || state.m.size() != params.size() ||
        state.v.size() != params.size()) {
        throw std::invalid_argument("adamStep: dimension mismatch");
    }
    ++state.t;
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
        const double mHat = state.m[i] / c1;
        const double vHat = state.v[i] / c2;
        params[i] -= cfg.learningRate * mHat / (std::sqrt(vHat) + cfg.eps);
    }
}

// ---------------------------------------------------------------------------
// Gradient

struct GradientResult {
    std::vector<double> grad;   ///< in circuit.paramNames() order
    std::size_t simulations = 0; ///< circuit evaluations performed
};

namespace detail {

/// Parameter index of each gate (or npos); rejects shift-rule-incompatible gates.
inline std::vector<std::size_t> parameterSlots(const Circuit &c) {
    std::vector<std::size_t> slots(c.gates().size(), std::string::npos);
    for (std::size_t i = 0; i < c.gates().size(); ++i) {
        const Gate &g = c.gates()[i];
        if (!g.param) {
            continue;
        }
        if (!isRotation(g.kind)) {
            throw InputError("gate " + std::to_string(i) + " ('" + g.name +
                             "') is parameterized but not a rotation; the shift rule does not apply");
        }
        const auto &names = c.paramNames();
        slots[i] = static_cast<std::size_t>(std::find(names.begin(), names.end(), *g.param) - names.begin());
    }
    return slots;
}

inline std::vector<double> modelProbabilities(const BoundCircuit &bound, EvalMode mode, std::uint64_t shots,
                                              std::uint64_t seed) {
    if (mode == EvalMode::Exact) {
        return probabilities(run(bound));
    }
    return sample(bound, shots, seed).toDense();
}

} // namespace detail

/**
 * Parameter-shift MMD gradient against `data` (typically a mini-batch's
 * empirical distribution). In sampled mode every one of the 2P + 1 circuits
 * gets its own seed derived from (seed, gate, sign), so the result does not
 * depend on evaluation order.
 */
[[nodiscard]] inline GradientResult mmdGradient(const Circuit &circuit, const std::vector<double> &theta,
                                                const Distribution &data, const Kernel &kernel,
                                                EvalMode mode = EvalMode::Exact, std::uint64_t shots = 10000,
                                                std::uint64_t seed = 0) {
    if (data.width() != circuit.numQubits() || kernel.width() != circuit.numQubits()) {
        throw InputError("mmdGradient: circuit, data and kernel widths differ");
    }
    const auto slots = detail::parameterSlots(circuit);
    BoundCircuit bound = bindParameters(circuit, toParamValues(circuit, theta));

    GradientResult out{std::vector<double>(theta.size(), 0.0), 0};
    std::vector<double> residual = detail::modelProbabilities(bound, mode, shots, deriveSeed(seed, 0));
    ++out.simulations;
    for (const auto &[idx, d] : data.entries()) {
        residual[idx] -= d;
    }
    const std::vector<double> weights = kernel.apply(residual);

    auto weighted = [&](std::uint64_t tag) {
        const auto p = detail::modelProbabilities(bound, mode, shots, deriveSeed(seed, tag));
        ++out.simulations;
        double s = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            s += p[i] * weights[i];
        }
        return s;
    };
    constexpr double shift = std::numbers::pi / 2;
    for (std::size_t g = 0; g < slots.size(); ++g) {
        if (slots[g] == std::string::npos) {
            continue;
        }
        const double original = bound.gates[g].angle;
        bound.gates[g].angle = original + shift;
        const double plus = weighted(2 * g + 1);
        bound.gates[g].angle = original - shift;
        const double minus = weighted(2 * g + 2);
        bound.gates[g].angle = original;
        out.grad[slots[g]] += plus - minus;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
    std::size_t epochs = 30;
    double learningRate = 0.1;
    std::size_t batchSize = 1000; ///< clamped to the dataset size
    std::uint64_t shots = 10000;
    EvalMode mode = EvalMode::Exact;
    std::uint64_t seed = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adamEps = 1e-8;
    KernelSpec kernel{};
    KlConfig kl{};
    /// Mini-batch steps per epoch; 0 means one pass, ceil(N / batchSize).
    std::size_t stepsPerEpoch = 0;
    /// Initial angles are uniform on (-initScale, initScale).
    double initScale = 0.1;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double mmd = 0.0;
    double kl = 0.0;
    double wallSeconds = 0.0;
};

struct TrainResult {
    ParamValues finalParams;
    std::vector<double> lossHistory; ///< full-dataset MMD after each epoch
    std::vector<double> klHistory;   ///< reverse KL after each epoch
    std::vector<double> epochWallSeconds;
    double wallTime = 0.0;
    std::size_t gradientSteps = 0;
    std::size_t simulations = 0;
};

[[nodiscard]] inline Kernel makeKernel(const TrainConfig &cfg, const EncodedDataset &ds) {
    return Kernel(cfg.kernel, ds.width(), ds.layout());
}

/// Model distribution used for reporting: exact, or `shots` samples with a fixed seed.
[[nodiscard]] inline Distribution evaluateModel(const Circuit &circuit, const std::vector<double> &theta,
                                                EvalMode mode, std::uint64_t shots, std::uint64_t seed) {
    const auto bound = bindParameters(circuit, toParamValues(circuit, theta));
    if (mode == EvalMode::Exact) {
        return exactDistribution(bound);
    }
    return sample(bound, shots, seed);
}

[[nodiscard]] inline std::vector<double> initialParameters(const Circuit &circuit, const TrainConfig &cfg) {
    Rng rng(deriveSeed(cfg.seed, 0x1a17));
    std::vector<double> theta(circuit.paramNames().size());
    for (double &t : theta) {
        t = rng.uniform(-cfg.initScale, cfg.initScale);
    }
    return theta;
}

using EpochCallback = std::function<void(const EpochRecord &)>;

/**
 * Adam on the parameter-shift gradient. Each epoch shuffles the samples
 * (seeded) and walks mini-batches; the recorded loss is always against the
 * full dataset. `initial` overrides the random initialization for any
 * parameter it names.
 */
[[nodiscard]] inline TrainResult train(const Circuit &circuit, const EncodedDataset &dataset,
                                       const TrainConfig &cfg, const ParamValues &initial = {},
                                       const EpochCallback &onEpoch = {}) {
    if (circuit.numQubits() != dataset.width()) {
        throw InputError("train: circuit has " + std::to_string(circuit.numQubits()) +
                         " qubits but dataset samples are " + std::to_string(dataset.width()) + " bits");
    }
    for (const auto &g : circuit.gates()) {
        if (g.kind == GateKind::Unknown) {
            throw InputError("train: circuit contains unknown gate '" + g.name + "'");
        }
    }
    (void)detail::parameterSlots(circuit);
    if (cfg.epochs == 0 || cfg.batchSize == 0 || !(cfg.learningRate > 0.0) || cfg.shots == 0) {
        throw InputError("train: epochs, batch size, learning rate and shots must be positive");
    }
    if (dataset.samples.empty()) {
        throw InputError("train: empty dataset");
    }

    const auto start = std::chrono::steady_clock::now();
    const Kernel kernel = makeKernel(cfg, dataset);
    const Distribution full = dataDistribution(dataset);
    const std::size_t n = dataset.samples.size();
    const std::size_t batch = std::min(cfg.batchSize, n);
    const std::size_t steps = cfg.stepsPerEpoch > 0 ? cfg.stepsPerEpoch : (n + batch - 1) / batch;

    std::vector<double> theta = initialParameters(circuit, cfg);
    for (std::size_t i = 0; i < theta.size(); ++i) {
        if (auto it = initial.find(circuit.paramNames()[i]); it != initial.end()) {
            theta[i] = it->second;
        }
    }
    AdamState adam(theta.size());
    const AdamConfig adamCfg{cfg.learningRate, cfg.beta1, cfg.beta2, cfg.adamEps};
    Rng shuffler(deriveSeed(cfg.seed, 0x5417));
    const std::uint64_t evalSeed = deriveSeed(cfg.seed, 0xe7a1);

    TrainResult result;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::size_t cursor = n; // forces a shuffle before the first batch
    std::vector<std::string> batchSamples;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t s = 0; s < steps && !theta.empty(); ++s) {
            batchSamples.clear();
            while (batchSamples.size() < batch) {
                if (cursor == n) {
                    for (std::size_t i = n - 1; i > 0; --i) {
                        std::swap(order[i], order[shuffler.below(i + 1)]);
                    }
                    cursor = 0;
                }
                batchSamples.push_back(dataset.samples[order[cursor++]]);
            }
            const Distribution batchDist = empiricalDistribution(dataset.width(), batchSamples);
            const auto g = mmdGradient(circuit, theta, batchDist, kernel, cfg.mode, cfg.shots,
                                       deriveSeed(cfg.seed, 0x96ad, result.gradientSteps));
            adamStep(adam, theta, g.grad, adamCfg);
            result.simulations += g.simulations;
            ++result.gradientSteps;
        }
        const Distribution model = evaluateModel(circuit, theta, cfg.mode, cfg.shots, evalSeed);
        const EpochRecord rec{epoch + 1, mmd(model, full, kernel), reverseKl(model, full, cfg.kl),
                              std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()};
        result.lossHistory.push_back(rec.mmd);
        result.klHistory.push_back(rec.kl);
        result.epochWallSeconds.push_back(rec.wallSeconds);
        if (onEpoch) {
            onEpoch(rec);
        }
    }
    result.finalParams = toParamValues(circuit, theta);
    result.wallTime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

// ---------------------------------------------------------------------------
// Files

/// "epoch,mmd,kl" log. Timings are left out so reruns are byte-identical.
[[nodiscard]] inline std::string lossCsv(const TrainResult &r) {
    std::string out = "epoch,mmd,kl\n";
    char buf[128];
    for (std::size_t i = 0; i < r.lossHistory.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", i + 1, r.lossHistory[i], r.klHistory[i]);
        out += buf;
    }
    return out;
}

/// One "name value" line per parameter, values with %.17g.
[[nodiscard]] inline std::string serializeParams(const ParamValues &values) {
    std::string out;
    for (const auto &[name, v] : values) {
        out += name + " " + formatReal(v) + "\n";
    }
    return out;
}

[[nodiscard]] inline ParamValues parseParams(std::istream &in) {
    ParamValues out;
    std::string line;
    std::size_t lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') {
            continue;
        }
        std::istringstream ls(t);
        std::string name;
        std::string value;
        std::string extra;
        ls >> name >> value;
        auto v = detail::parseNumber(value);
        if (name.empty() || !v || (ls >> extra)) {
            throw InputError("params file line " + std::to_string(lineNo) + ": expected '<name> <value>'");
        }
        if (!out.emplace(name, *v).second) {
            throw InputError("params file: duplicate parameter '" + name + "'");
        }
    }
    return out;
}

[[nodiscard]] inline ParamValues loadParams(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open params file: " + path);
    }
    return parseParams(in);
}

} // namespace qcbm
