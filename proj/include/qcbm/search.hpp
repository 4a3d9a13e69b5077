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
 * Hardware-aware architecture search: prompt construction, the proposer
 * interface with a deterministic mock, and the round loop
 *   prompt -> propose -> parseDsl -> validate -> train -> score -> feedback.
 */
#pragma once

#include "circuit.hpp"
#include "common.hpp"
#include "dsl.hpp"
#include "encoding.hpp"
#include "io.hpp"
#include "metrics.hpp"
#include "trainer.hpp"

#include "json.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace qcbm {

inline constexpr std::string_view kPromptTemplateVersion = "v1";

struct RoundRecord {
    std::size_t round = 0;    ///< 1-based
    std::size_t attempts = 0; ///< proposals made in this round
    std::optional<Circuit> circuit;
    std::optional<std::string> rejection; ///< parse / shape / transport problem of the final attempt
    ValidityReport validity;
    std::size_t depth = 0;
    std::optional<double> kl; ///< present iff valid()
    std::optional<double> mmdFinal;
    ParamValues params;
    bool accepted = false;

    [[nodiscard]] bool valid() const { return circuit.has_value() && !rejection && validity.valid(); }
};

/// Metric formatting shared by prompts, tables and tests.
[[nodiscard]] inline std::string formatMetric(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Prompts

namespace detail {

inline double meanReadout(const ReadoutError &e) { return 0.5 * (e.p01 + e.p10); }

/// Qubits sorted by mean readout error, ties by index.
inline std::vector<std::size_t> qubitsByReadoutError(const HardwareProfile &profile) {
    std::vector<std::size_t> order(profile.numQubits);
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return meanReadout(profile.readoutError[a]) < meanReadout(profile.readoutError[b]);
    });
    return order;
}

inline std::string hardwareSection(const HardwareProfile &profile) {
    std::ostringstream out;
    out << "Target hardware\n";
    out << "- physical qubits: " << profile.numQubits << " (indices 0.." << profile.numQubits - 1 << ")\n";
    out << "- basis gates:";
    for (const auto &g : profile.basisGates) {
        out << " " << g;
    }
    out << "\n- coupling map (undirected, " << profile.couplingMap.size() << " pairs):";
    for (const auto &[a, b] : profile.couplingMap) {
        out << " [" << a << "," << b << "]";
    }
    out << "\n- qubits ranked by readout error, lowest first (qubit: p(1|0), p(0|1)):\n";
    for (std::size_t q : qubitsByReadoutError(profile)) {
        const auto &e = profile.readoutError[q];
        char buf[96];
        std::snprintf(buf, sizeof buf, "  %zu: %.4f, %.4f\n", q, e.p01, e.p10);
        out << buf;
    }
    if (!profile.gateError.empty()) {
        out << "- gate error rates:";
        for (const auto &[g, e] : profile.gateError) {
            char buf[64];
            std::snprintf(buf, sizeof buf, " %s=%.2e", g.c_str(), e);
            out << buf;
        }
        out << "\n";
    }
    return out.str();
}

inline std::string formatSection() {
    std::string out = "Output format\n";
    out += kDslGrammar;
    out += "\nWork through these steps before answering: (1) choose the qubits, (2) lay out rotation and "
           "entangling layers that respect the coupling map, (3) count the depth against the budget, "
           "(4) check every gate is a basis gate. Then reply with the JSON circuit document only, with no "
           "prose before or after it.\n";
    return out;
}

} // namespace detail

[[nodiscard]] inline std::string buildInitialPrompt(const HardwareProfile &profile, std::size_t nQubits,
                                                    std::size_t maxDepth) {
    std::ostringstream out;
    out << "[qcbm prompt " << kPromptTemplateVersion << ": initial]\n";
    out << "Design the ansatz of a quantum circuit Born machine. It will be trained with an MMD loss to model "
           "a distribution over "
        << nQubits << "-bit strings; measuring its " << nQubits << " qubits yields one sample.\n\n";
    out << detail::hardwareSection(profile) << "\n";
    out << "Constraints\n";
    out << "- Use exactly " << nQubits << " physical qubits. Prefer the qubits with the lowest readout error, "
           "chosen so that entangling gates act only on coupled pairs.\n";
    out << "- Use only the basis gates listed; the circuit runs as written, without transpilation.\n";
    out << "- Maximum depth: " << maxDepth
        << " (depth = longest chain of gates sharing a qubit; every gate counts 1).\n\n";
    out << detail::formatSection();
    return out.str();
}

[[nodiscard]] inline std::string buildFeedbackPrompt(const std::vector<RoundRecord> &history,
                                                     const HardwareProfile &profile, std::size_t nQubits,
                                                     std::size_t maxDepth) {
    if (history.empty()) {
        throw std::invalid_argument("buildFeedbackPrompt: empty history");
    }
    const RoundRecord &last = history.back();
    std::ostringstream out;
    out << "[qcbm prompt " << kPromptTemplateVersion << ": feedback]\n";
    out << "You are refining the ansatz of a quantum circuit Born machine trained with an MMD loss. Lower "
           "reverse KL divergence (model || data) is better.\n\n";
    out << detail::hardwareSection(profile) << "\n";
    out << "Results so far (chronological)\n";
    out << "round | valid | depth | kl\n";
    for (const auto &r : history) {
        out << r.round << " | " << (r.valid() ? "true" : "false") << " | " << r.depth << " | "
            << (r.kl ? formatMetric(*r.kl) : std::string("-")) << "\n";
    }
    out << "\nMost recent circuit (round " << last.round << "):\n";
    if (last.circuit) {
        out << serializeDsl(*last.circuit);
    } else {
        out << "(no circuit could be read from the response)\n";
    }
    if (!last.valid()) {
        out << "\nThat circuit was rejected:\n";
        if (last.rejection) {
            out << *last.rejection;
            if (last.rejection->back() != '\n') {
                out << '\n';
            }
        }
        out << last.validity.describe();
    }
    out << "\nInstructions\n";
    out << "- Reducing the KL divergence takes priority over keeping the circuit shallow, but the depth must "
           "not exceed "
        << maxDepth << ".\n";
    out << "- Keep exactly " << nQubits << " measured qubits.\n";
    out << "- Decide whether to prune the current circuit (remove layers) or append new layers, then output "
           "the revised circuit.\n\n";
    out << detail::formatSection();
    return out.str();
}

/// Re-prompt after an unusable answer, with its diagnostics embedded.
[[nodiscard]] inline std::string buildRetryPrompt(const std::string &basePrompt, const std::string &diagnostics) {
    std::string out = basePrompt;
    out += "\nYour previous answer could not be used:\n";
    out += diagnostics;
    if (!diagnostics.empty() && diagnostics.back() != '\n') {
        out += '\n';
    }
    out += "Return a corrected circuit document.\n";
    return out;
}

// ---------------------------------------------------------------------------
// Proposers

struct ProposalContext {
    std::size_t round = 1;   ///< 1-based
    std::size_t attempt = 0; ///< 0 for the first proposal of a round
    const HardwareProfile *profile = nullptr;
    std::size_t numQubits = 0;
    std::size_t maxDepth = 0;
    const std::vector<RoundRecord> *history = nullptr;
    std::uint64_t seed = 0;
};

class Proposer {
  public:
    virtual ~Proposer() = default;
    /// Raw text answer to `prompt`; may throw on transport failure.
    virtual std::string propose(const std::string &prompt, const ProposalContext &ctx) = 0;
    [[nodiscard]] virtual std::string name() const = 0;
};

/**
 * Deterministic stand-in for the LLM. It ignores the prompt text and reads
 * the structured history instead:
 *  - round 1 emits one block (two rotation layers plus an entangling tree)
 *    and a closing rotation pair, on a connected set of low-error qubits;
 *  - afterwards it prunes the last block when the previous circuit used more
 *    than 90% of the depth budget, and otherwise appends a block (whether
 *    the last KL worsened or improved).
 * The seed picks which mixing axis each block starts with.
 */
class MockProposer : public Proposer {
  public:
    std::string propose(const std::string & /*prompt*/, const ProposalContext &ctx) override {
        if (ctx.profile == nullptr) {
            throw std::invalid_argument("MockProposer: context lacks a profile");
        }
        return serializeDsl(build(*ctx.profile, ctx.numQubits, blocksFor(ctx), ctx.seed));
    }

    [[nodiscard]] std::string name() const override { return "mock"; }

    /// Block count the mock will use for this context.
    [[nodiscard]] static std::size_t blocksFor(const ProposalContext &ctx) {
        std::size_t blocks = 1;
        if (ctx.history == nullptr) {
            return blocks;
        }
        // Replay the rule over the history so the count depends only on it.
        for (const auto &r : *ctx.history) {
            if (static_cast<double>(r.depth) > 0.9 * static_cast<double>(ctx.maxDepth)) {
                blocks = blocks > 1 ? blocks - 1 : 1;
            } else {
                ++blocks;
            }
        }
        return blocks;
    }

    /// Connected set of `n` qubits grown greedily from the lowest-error qubit.
    [[nodiscard]] static std::vector<std::size_t> chooseQubits(const HardwareProfile &profile, std::size_t n) {
        if (n > profile.numQubits) {
            throw InputError("profile has " + std::to_string(profile.numQubits) + " qubits, need " +
                             std::to_string(n));
        }
        const auto ranked = detail::qubitsByReadoutError(profile);
        std::vector<std::size_t> rank(profile.numQubits);
        for (std::size_t i = 0; i < ranked.size(); ++i) {
            rank[ranked[i]] = i;
        }
        for (std::size_t seedQubit : ranked) {
            std::vector<std::size_t> chosen{seedQubit};
            std::set<std::size_t> in{seedQubit};
            while (chosen.size() < n) {
                std::optional<std::size_t> best;
                for (const auto &[a, b] : profile.couplingMap) {
                    for (auto [u, v] : {std::pair{a, b}, std::pair{b, a}}) {
                        if (in.count(u) && !in.count(v) && (!best || rank[v] < rank[*best])) {
                            best = v;
                        }
                    }
                }
                if (!best) {
                    break;
                }
                chosen.push_back(*best);
                in.insert(*best);
            }
            if (chosen.size() == n) {
                return chosen;
            }
        }
        return {ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n)};
    }

    [[nodiscard]] static Circuit build(const HardwareProfile &profile, std::size_t n, std::size_t blocks,
                                       std::uint64_t seed) {
        const auto qubits = chooseQubits(profile, n);
        // Mixing axes (rx, ry) cycle by seed and block; rz, when available,
        // always follows as the phase layer.
        std::vector<GateKind> mixers;
        for (GateKind k : {GateKind::RX, GateKind::RY}) {
            if (profile.basisGates.count(std::string(gateName(k)))) {
                mixers.push_back(k);
            }
        }
        const bool hasRz = profile.basisGates.count("rz") > 0;
        if (mixers.empty()) {
            mixers.push_back(hasRz ? GateKind::RZ : GateKind::RY);
        }
        std::optional<GateKind> entangler;
        if (profile.basisGates.count("cz")) {
            entangler = GateKind::CZ;
        } else if (profile.basisGates.count("cx")) {
            entangler = GateKind::CX;
        }

        // Spanning tree over the chosen qubits (BFS in wire order), packed into
        // conflict-free layers.
        std::vector<std::pair<std::size_t, std::size_t>> tree;
        {
            std::set<std::size_t> reached{0};
            std::deque<std::size_t> queue{0};
            while (!queue.empty()) {
                const std::size_t u = queue.front();
                queue.pop_front();
                for (std::size_t v = 0; v < n; ++v) {
                    if (!reached.count(v) && profile.coupled(qubits[u], qubits[v])) {
                        reached.insert(v);
                        queue.push_back(v);
                        tree.emplace_back(u, v);
                    }
                }
            }
        }
        std::vector<std::pair<std::size_t, std::size_t>> scheduled;
        {
            std::vector<bool> placed(tree.size(), false);
            std::size_t remaining = tree.size();
            while (remaining > 0) {
                std::set<std::size_t> busy;
                for (std::size_t e = 0; e < tree.size(); ++e) {
                    if (!placed[e] && !busy.count(tree[e].first) && !busy.count(tree[e].second)) {
                        placed[e] = true;
                        --remaining;
                        busy.insert(tree[e].first);
                        busy.insert(tree[e].second);
                        scheduled.push_back(tree[e]);
                    }
                }
            }
        }

        std::vector<Gate> gates;
        std::size_t nextParam = 0;
        auto rotationLayer = [&](GateKind k) {
            for (std::size_t w = 0; w < n; ++w) {
                gates.push_back(Gate::make(k, {w}, "p" + std::to_string(nextParam++)));
            }
        };
        const std::size_t offset = static_cast<std::size_t>(seed % mixers.size());
        for (std::size_t b = 0; b <= blocks; ++b) {
            const GateKind mixer = mixers[(offset + b) % mixers.size()];
            rotationLayer(mixer);
            rotationLayer(hasRz && mixer != GateKind::RZ ? GateKind::RZ : mixers[(offset + b + 1) % mixers.size()]);
            if (b < blocks && entangler) {
                for (const auto &[u, v] : scheduled) {
                    gates.push_back(Gate::make(*entangler, {u, v}));
                }
            }
        }
        return Circuit(n, std::move(gates), qubits);
    }
};

// ---------------------------------------------------------------------------
// Search loop

struct SearchConfig {
    std::size_t rounds = 10;
    std::size_t maxDepth = 0;        ///< 0 keeps the profile's budget
    std::size_t retriesPerRound = 3; ///< re-prompts after an unusable answer
    TrainConfig train{};
    bool warmStart = false; ///< reuse trained angles of same-named parameters
    std::uint64_t seed = 0;
};

struct SearchResult {
    std::vector<RoundRecord> rounds;
    std::optional<std::size_t> best; ///< index into rounds

    [[nodiscard]] const RoundRecord *bestRound() const { return best ? &rounds[*best] : nullptr; }
};

/// Minimal KL, then smaller depth, then earlier round.
[[nodiscard]] inline std::optional<std::size_t> selectBest(const std::vector<RoundRecord> &rounds) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < rounds.size(); ++i) {
        const auto &r = rounds[i];
        if (!r.accepted || !r.kl) {
            continue;
        }
        if (!best) {
            best = i;
            continue;
        }
        const auto &b = rounds[*best];
        if (*r.kl < *b.kl || (*r.kl == *b.kl && r.depth < b.depth)) {
            best = i;
        }
    }
    return best;
}

[[nodiscard]] inline nlohmann::ordered_json roundMetricsJson(const RoundRecord &r) {
    nlohmann::ordered_json j;
    j["round"] = r.round;
    j["kl"] = r.kl ? nlohmann::ordered_json(*r.kl) : nlohmann::ordered_json(nullptr);
    j["mmd_final"] = r.mmdFinal ? nlohmann::ordered_json(*r.mmdFinal) : nlohmann::ordered_json(nullptr);
    j["depth"] = r.depth;
    j["valid"] = r.valid();
    j["accepted"] = r.accepted;
    j["attempts"] = r.attempts;
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    for (const auto &[name, v] : r.params) {
        params[name] = v;
    }
    j["params"] = params;
    auto violations = nlohmann::ordered_json::array();
    for (const auto &v : r.validity.violations) {
        nlohmann::ordered_json vj;
        vj["kind"] = violationName(v.kind);
        vj["gate"] = v.gateIndex ? nlohmann::ordered_json(*v.gateIndex) : nlohmann::ordered_json(nullptr);
        vj["message"] = v.message;
        violations.push_back(vj);
    }
    j["violations"] = violations;
    j["rejection"] = r.rejection ? nlohmann::ordered_json(*r.rejection) : nlohmann::ordered_json(nullptr);
    return j;
}

[[nodiscard]] inline std::string summaryTable(const std::vector<RoundRecord> &rounds) {
    std::string out = "round,depth,valid,kl\n";
    for (const auto &r : rounds) {
        out += std::to_string(r.round) + "," + std::to_string(r.depth) + "," + (r.valid() ? "true" : "false") +
               "," + (r.kl ? formatMetric(*r.kl) : std::string("")) + "\n";
    }
    return out;
}

/**
 * Runs the search. With a non-empty `runDir`, every prompt and response is
 * persisted as round_<k>/{prompt.txt, response.txt, circuit.json,
 * metrics.json} (earlier attempts as prompt.<j>.txt / response.<j>.txt),
 * plus summary.csv and a copy of the best round under best/.
 */
[[nodiscard]] inline SearchResult runSearch(const SearchConfig &cfg, const HardwareProfile &profile,
                                            const EncodedDataset &dataset, Proposer &proposer,
                                            const std::filesystem::path &runDir = {}) {
    namespace fs = std::filesystem;
    if (cfg.rounds == 0) {
        throw InputError("search: rounds must be at least 1");
    }
    const std::size_t width = dataset.width();
    if (width > profile.numQubits) {
        throw InputError("search: dataset needs " + std::to_string(width) + " qubits but the profile has " +
                         std::to_string(profile.numQubits));
    }
    HardwareProfile effective = profile;
    if (cfg.maxDepth > 0) {
        effective.maxDepth = cfg.maxDepth;
    }
    const std::size_t budget = effective.maxDepth;
    const bool persist = !runDir.empty();

    SearchResult result;
    ParamValues carried;
    for (std::size_t round = 1; round <= cfg.rounds; ++round) {
        const fs::path roundDir = runDir / ("round_" + std::to_string(round));
        const std::string basePrompt = result.rounds.empty() ? buildInitialPrompt(effective, width, budget)
                                                             : buildFeedbackPrompt(result.rounds, effective, width, budget);
        RoundRecord rec;
        rec.round = round;
        std::string prompt = basePrompt;
        for (std::size_t attempt = 0; attempt <= cfg.retriesPerRound; ++attempt) {
            if (persist && attempt > 0) {
                // Keep the previous attempt under numbered names.
                fs::rename(roundDir / "prompt.txt", roundDir / ("prompt." + std::to_string(attempt) + ".txt"));
                fs::rename(roundDir / "response.txt", roundDir / ("response." + std::to_string(attempt) + ".txt"));
            }
            ProposalContext ctx{round, attempt, &effective, width, budget, &result.rounds,
                                deriveSeed(cfg.seed, round, attempt)};
            rec = RoundRecord{};
            rec.round = round;
            rec.attempts = attempt + 1;
            std::string response;
            try {
                response = proposer.propose(prompt, ctx);
            } catch (const std::exception &e) {
                rec.rejection = std::string("proposer error: ") + e.what();
            }
            if (persist) {
                writeFileAtomic(roundDir / "prompt.txt", prompt);
                writeFileAtomic(roundDir / "response.txt", response);
            }
            if (!rec.rejection) {
                const DslParseResult parsed = parseDsl(response);
                if (!parsed.ok()) {
                    rec.rejection = parsed.describe();
                } else {
                    rec.circuit = *parsed.circuit;
                    rec.depth = depth(*rec.circuit);
                    rec.validity = validate(*rec.circuit, effective);
                    if (rec.circuit->numQubits() != width) {
                        rec.rejection = "circuit measures " + std::to_string(rec.circuit->numQubits()) +
                                        " qubits but samples have " + std::to_string(width) + " bits\n";
                    }
                }
            }
            if (rec.valid()) {
                break;
            }
            prompt = buildRetryPrompt(basePrompt, rec.rejection.value_or("") + rec.validity.describe());
        }

        if (rec.valid()) {
            TrainConfig tc = cfg.train;
            tc.seed = deriveSeed(cfg.train.seed, round);
            const TrainResult tr = train(*rec.circuit, dataset, tc, cfg.warmStart ? carried : ParamValues{});
            rec.params = tr.finalParams;
            rec.mmdFinal = tr.lossHistory.back();
            rec.kl = tr.klHistory.back(); // final-epoch evaluation against the full dataset
            rec.accepted = true;
            if (cfg.warmStart) {
                carried = tr.finalParams;
            }
        }
        if (persist) {
            if (rec.circuit) {
                writeFileAtomic(roundDir / "circuit.json", serializeDsl(*rec.circuit));
            }
            writeFileAtomic(roundDir / "metrics.json", roundMetricsJson(rec).dump(2) + "\n");
            if (rec.accepted) {
                writeFileAtomic(roundDir / "params.txt", serializeParams(rec.params));
            }
        }
        result.rounds.push_back(std::move(rec));
    }
    result.best = selectBest(result.rounds);

    if (persist) {
        writeFileAtomic(runDir / "summary.csv", summaryTable(result.rounds));
        if (const RoundRecord *best = result.bestRound()) {
            const fs::path bestDir = runDir / "best";
            const fs::path src = runDir / ("round_" + std::to_string(best->round));
            for (const char *f : {"circuit.json", "metrics.json", "params.txt"}) {
                writeFileAtomic(bestDir / f, readFile((src / f).string()));
            }
            writeFileAtomic(bestDir / "round.txt", std::to_string(best->round) + "\n");
        }
    }
    return result;
}

} // namespace qcbm
