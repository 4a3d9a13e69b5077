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
 * Circuit intermediate representation, hardware profiles, validity checks,
 * depth and the TwoLocal baseline builder.
 *
 * A Circuit acts on `numQubits` logical wires. Each wire is pinned to a
 * physical device qubit through `physicalQubits()`; validation against a
 * HardwareProfile always happens on the physical indices. Wire k is also
 * measured into bit k of the output basis index.
 */
#pragma once

#include "common.hpp"

#include "json.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qcbm {

enum class GateKind { RX, RY, RZ, X, SX, H, CZ, CX, Unknown };

inline constexpr std::array<GateKind, 8> kKnownGates{GateKind::RX, GateKind::RY, GateKind::RZ,
                                                     GateKind::X,  GateKind::SX, GateKind::H,
                                                     GateKind::CZ, GateKind::CX};

[[nodiscard]] inline std::string_view gateName(GateKind kind) {
    switch (kind) {
    case GateKind::RX: return "rx";
    case GateKind::RY: return "ry";
    case GateKind::RZ: return "rz";
    case GateKind::X: return "x";
    case GateKind::SX: return "sx";
    case GateKind::H: return "h";
    case GateKind::CZ: return "cz";
    case GateKind::CX: return "cx";
    case GateKind::Unknown: break;
    }
    return "unknown";
}

[[nodiscard]] inline GateKind gateKindFromName(std::string_view name) {
    for (GateKind k : kKnownGates) {
        if (gateName(k) == name) {
            return k;
        }
    }
    return GateKind::Unknown;
}

[[nodiscard]] constexpr bool isRotation(GateKind k) {
    return k == GateKind::RX || k == GateKind::RY || k == GateKind::RZ;
}

[[nodiscard]] constexpr std::size_t gateArity(GateKind k) {
    return (k == GateKind::CZ || k == GateKind::CX) ? 2 : 1;
}

struct Gate {
    GateKind kind = GateKind::Unknown;
    std::string name; ///< as written; equals gateName(kind) for known gates
    std::vector<std::size_t> qubits;
    std::optional<std::string> param;

    static Gate make(GateKind kind, std::vector<std::size_t> qubits,
                     std::optional<std::string> param = std::nullopt) {
        return Gate{kind, std::string(gateName(kind)), std::move(qubits), std::move(param)};
    }

    friend bool operator==(const Gate &, const Gate &) = default;
};

/**
 * Immutable ordered gate list. The constructor enforces the structural
 * invariants (index range, distinct qubits, arity and parameter presence for
 * known gates) and derives paramNames in first-appearance order.
 */
class Circuit {
  public:
    Circuit() = default;

    explicit Circuit(std::size_t numQubits, std::vector<Gate> gates = {},
                     std::vector<std::size_t> physicalQubits = {})
        : numQubits_(numQubits), gates_(std::move(gates)), physical_(std::move(physicalQubits)) {
        if (physical_.empty()) {
            physical_.resize(numQubits_);
            for (std::size_t i = 0; i < numQubits_; ++i) {
                physical_[i] = i;
            }
        }
        if (physical_.size() != numQubits_) {
            throw std::invalid_argument("physical layout size does not match qubit count");
        }
        if (std::set<std::size_t>(physical_.begin(), physical_.end()).size() != physical_.size()) {
            throw std::invalid_argument("physical layout repeats a qubit");
        }
        std::set<std::string> seen;
        for (std::size_t i = 0; i < gates_.size(); ++i) {
            const Gate &g = gates_[i];
            const std::string where = "gate " + std::to_string(i) + " (" + g.name + ")";
            if (g.qubits.empty()) {
                throw std::invalid_argument(where + ": no qubits");
            }
            for (std::size_t q : g.qubits) {
                if (q >= numQubits_) {
                    throw std::invalid_argument(where + ": qubit index out of range");
                }
            }
            if (std::set<std::size_t>(g.qubits.begin(), g.qubits.end()).size() != g.qubits.size()) {
                throw std::invalid_argument(where + ": repeated qubit");
            }
            if (g.kind != GateKind::Unknown) {
                if (g.qubits.size() != gateArity(g.kind)) {
                    throw std::invalid_argument(where + ": wrong number of qubits");
                }
                if (isRotation(g.kind) != g.param.has_value()) {
                    throw std::invalid_argument(where + (isRotation(g.kind)
                                                             ? ": rotation requires a parameter"
                                                             : ": parameter not allowed"));
                }
            }
            if (g.param) {
                if (g.param->empty()) {
                    throw std::invalid_argument(where + ": empty parameter name");
                }
                if (seen.insert(*g.param).second) {
                    paramNames_.push_back(*g.param);
                }
            }
        }
    }

    [[nodiscard]] std::size_t numQubits() const { return numQubits_; }
    [[nodiscard]] const std::vector<Gate> &gates() const { return gates_; }
    [[nodiscard]] const std::vector<std::string> &paramNames() const { return paramNames_; }
    [[nodiscard]] const std::vector<std::size_t> &physicalQubits() const { return physical_; }

    [[nodiscard]] Circuit withGate(Gate g) const {
        auto gates = gates_;
        gates.push_back(std::move(g));
        return Circuit(numQubits_, std::move(gates), physical_);
    }

    friend bool operator==(const Circuit &a, const Circuit &b) {
        return a.numQubits_ == b.numQubits_ && a.gates_ == b.gates_ && a.physical_ == b.physical_;
    }

  private:
    std::size_t numQubits_ = 0;
    std::vector<Gate> gates_;
    std::vector<std::size_t> physical_;
    std::vector<std::string> paramNames_;
};

/// Gates of `a` followed by gates of `b`; layouts must agree.
[[nodiscard]] inline Circuit concat(const Circuit &a, const Circuit &b) {
    if (a.numQubits() != b.numQubits() || a.physicalQubits() != b.physicalQubits()) {
        throw std::invalid_argument("concat: circuits act on different registers");
    }
    auto gates = a.gates();
    gates.insert(gates.end(), b.gates().begin(), b.gates().end());
    return Circuit(a.numQubits(), std::move(gates), a.physicalQubits());
}

/// Longest chain of gates that pairwise share a qubit. Every gate counts 1.
[[nodiscard]] inline std::size_t depth(const Circuit &c) {
    std::vector<std::size_t> level(c.numQubits(), 0);
    std::size_t best = 0;
    for (const Gate &g : c.gates()) {
        std::size_t d = 0;
        for (std::size_t q : g.qubits) {
            d = std::max(d, level[q]);
        }
        ++d;
        for (std::size_t q : g.qubits) {
            level[q] = d;
        }
        best = std::max(best, d);
    }
    return best;
}

// ---------------------------------------------------------------------------
// Hardware profiles

using QubitPair = std::pair<std::size_t, std::size_t>;

[[nodiscard]] inline QubitPair normalizedPair(std::size_t a, std::size_t b) {
    return a < b ? QubitPair{a, b} : QubitPair{b, a};
}

struct ReadoutError {
    double p01 = 0.0; ///< P(read 1 | prepared 0)
    double p10 = 0.0; ///< P(read 0 | prepared 1)
    friend bool operator==(const ReadoutError &, const ReadoutError &) = default;
};

struct HardwareProfile {
    std::size_t numQubits = 0;
    std::set<std::string> basisGates;
    std::set<QubitPair> couplingMap; ///< undirected, stored as (min, max)
    std::vector<ReadoutError> readoutError;
    std::map<std::string, double> gateError;
    std::size_t maxDepth = 1;

    [[nodiscard]] bool coupled(std::size_t a, std::size_t b) const {
        return couplingMap.count(normalizedPair(a, b)) != 0;
    }

    friend bool operator==(const HardwareProfile &, const HardwareProfile &) = default;
};

/// Throws InputError when the profile breaks its invariants.
inline void checkProfile(const HardwareProfile &p) {
    if (p.numQubits == 0) {
        throw InputError("profile: num_qubits must be positive");
    }
    if (p.maxDepth == 0) {
        throw InputError("profile: max_depth must be positive");
    }
    for (const auto &[a, b] : p.couplingMap) {
        if (a == b) {
            throw InputError("profile: coupling map contains self-loop on qubit " + std::to_string(a));
        }
        if (a >= p.numQubits || b >= p.numQubits) {
            throw InputError("profile: coupling pair (" + std::to_string(a) + ", " +
                             std::to_string(b) + ") references a missing qubit");
        }
    }
    if (p.readoutError.size() != p.numQubits) {
        throw InputError("profile: readout_error must have one entry per qubit");
    }
    auto inUnit = [](double x) { return x >= 0.0 && x <= 1.0; };
    for (const auto &e : p.readoutError) {
        if (!inUnit(e.p01) || !inUnit(e.p10)) {
            throw InputError("profile: readout error outside [0, 1]");
        }
    }
    for (const auto &[name, e] : p.gateError) {
        if (!inUnit(e)) {
            throw InputError("profile: gate error for '" + name + "' outside [0, 1]");
        }
    }
}

[[nodiscard]] inline nlohmann::ordered_json profileToJson(const HardwareProfile &p) {
    nlohmann::ordered_json j;
    j["num_qubits"] = p.numQubits;
    j["basis_gates"] = std::vector<std::string>(p.basisGates.begin(), p.basisGates.end());
    auto coupling = nlohmann::ordered_json::array();
    for (const auto &[a, b] : p.couplingMap) {
        coupling.push_back({a, b});
    }
    j["coupling_map"] = coupling;
    auto readout = nlohmann::ordered_json::array();
    for (const auto &e : p.readoutError) {
        readout.push_back({e.p01, e.p10});
    }
    j["readout_error"] = readout;
    j["gate_error"] = nlohmann::ordered_json::object();
    for (const auto &[name, e] : p.gateError) {
        j["gate_error"][name] = e;
    }
    j["max_depth"] = p.maxDepth;
    return j;
}

[[nodiscard]] inline HardwareProfile profileFromJson(const nlohmann::json &j) {
    HardwareProfile p;
    try {
        p.numQubits = j.at("num_qubits").get<std::size_t>();
        for (const auto &g : j.at("basis_gates")) {
            p.basisGates.insert(g.get<std::string>());
        }
        for (const auto &pair : j.at("coupling_map")) {
            if (!pair.is_array() || pair.size() != 2) {
                throw InputError("profile: coupling_map entries must be [a, b] pairs");
            }
            p.couplingMap.insert(normalizedPair(pair[0].get<std::size_t>(), pair[1].get<std::size_t>()));
        }
        for (const auto &e : j.at("readout_error")) {
            if (!e.is_array() || e.size() != 2) {
                throw InputError("profile: readout_error entries must be [p01, p10] pairs");
            }
            p.readoutError.push_back({e[0].get<double>(), e[1].get<double>()});
        }
        if (j.contains("gate_error")) {
            for (const auto &[name, e] : j.at("gate_error").items()) {
                p.gateError[name] = e.get<double>();
            }
        }
        p.maxDepth = j.at("max_depth").get<std::size_t>();
    } catch (const nlohmann::json::exception &e) {
        throw InputError(std::string("profile: ") + e.what());
    }
    checkProfile(p);
    return p;
}

[[nodiscard]] inline HardwareProfile loadProfile(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open profile file: " + path);
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error &e) {
        throw InputError("profile " + path + ": " + e.what());
    }
    return profileFromJson(j);
}

/// Linear chain 0-1-...-(n-1) with uniform readout error, rx/rz/sx/x/cz basis.
[[nodiscard]] inline HardwareProfile linearProfile(std::size_t n, double readoutErr = 0.02,
                                                   std::size_t maxDepth = 100) {
    HardwareProfile p;
    p.numQubits = n;
    p.basisGates = {"cz", "rx", "rz", "sx", "x"};
    for (std::size_t i = 0; i + 1 < n; ++i) {
        p.couplingMap.insert({i, i + 1});
    }
    p.readoutError.assign(n, ReadoutError{readoutErr, readoutErr});
    p.gateError = {{"cz", 3e-3}, {"rx", 3e-4}, {"rz", 0.0}, {"sx", 3e-4}, {"x", 3e-4}};
    p.maxDepth = maxDepth;
    return p;
}

/// linearProfile plus the closing edge (n-1, 0).
[[nodiscard]] inline HardwareProfile ringProfile(std::size_t n, double readoutErr = 0.02,
                                                 std::size_t maxDepth = 100) {
    HardwareProfile p = linearProfile(n, readoutErr, maxDepth);
    if (n > 2) {
        p.couplingMap.insert(normalizedPair(n - 1, 0));
    }
    return p;
}

// ---------------------------------------------------------------------------
// Validation

enum class ViolationKind { UnknownGate, NotInBasis, UncoupledPair, BadQubitIndex, DepthExceeded };

[[nodiscard]] inline std::string_view violationName(ViolationKind k) {
    switch (k) {
    case ViolationKind::UnknownGate: return "unknown-gate";
    case ViolationKind::NotInBasis: return "not-in-basis";
    case ViolationKind::UncoupledPair: return "uncoupled-pair";
    case ViolationKind::BadQubitIndex: return "bad-qubit-index";
    case ViolationKind::DepthExceeded: return "depth-exceeded";
    }
    return "?";
}

struct Violation {
    std::optional<std::size_t> gateIndex; ///< absent for whole-circuit violations
    ViolationKind kind{};
    std::string message;
    friend bool operator==(const Violation &, const Violation &) = default;
};

struct ValidityReport {
    std::vector<Violation> violations;
    [[nodiscard]] bool valid() const { return violations.empty(); }

    [[nodiscard]] std::string describe() const {
        std::ostringstream out;
        for (const auto &v : violations) {
            out << "- [" << violationName(v.kind) << "]";
            if (v.gateIndex) {
                out << " gate " << *v.gateIndex;
            }
            out << ": " << v.message << '\n';
        }
        return out.str();
    }
};

/// Reports every violation of the profile, never just the first.
[[nodiscard]] inline ValidityReport validate(const Circuit &c, const HardwareProfile &profile) {
    ValidityReport report;
    const auto &layout = c.physicalQubits();
    for (std::size_t i = 0; i < c.gates().size(); ++i) {
        const Gate &g = c.gates()[i];
        if (g.kind == GateKind::Unknown) {
            report.violations.push_back({i, ViolationKind::UnknownGate, "unknown gate '" + g.name + "'"});
        } else if (profile.basisGates.count(g.name) == 0) {
            report.violations.push_back(
                {i, ViolationKind::NotInBasis, "gate '" + g.name + "' is not a basis gate"});
        }
        bool indicesOk = true;
        for (std::size_t q : g.qubits) {
            if (layout[q] >= profile.numQubits) {
                indicesOk = false;
                report.violations.push_back({i, ViolationKind::BadQubitIndex,
                                             "qubit " + std::to_string(layout[q]) +
                                                 " does not exist on a " +
                                                 std::to_string(profile.numQubits) + "-qubit device"});
            }
        }
        if (indicesOk && g.qubits.size() == 2 && g.kind != GateKind::Unknown) {
            const std::size_t a = layout[g.qubits[0]];
            const std::size_t b = layout[g.qubits[1]];
            if (!profile.coupled(a, b)) {
                report.violations.push_back({i, ViolationKind::UncoupledPair,
                                             "qubits (" + std::to_string(a) + ", " + std::to_string(b) +
                                                 ") are not coupled"});
            }
        }
    }
    const std::size_t d = depth(c);
    if (d > profile.maxDepth) {
        report.violations.push_back({std::nullopt, ViolationKind::DepthExceeded,
                                     "depth " + std::to_string(d) + " exceeds budget " +
                                         std::to_string(profile.maxDepth)});
    }
    return report;
}

// ---------------------------------------------------------------------------
// Baseline

/**
 * TwoLocal ansatz: `reps` blocks of [RX layer, RZ layer, CZ ring], then a
 * final RX+RZ layer. Ring pairs are (i, i+1 mod n) for every i, emitted as
 * even i first, then odd i, then the wrap pair (n-1, 0). Parameters are named
 * theta_0 .. theta_{2n(reps+1)-1} in gate order.
 */
[[nodiscard]] inline Circuit buildTwoLocal(std::size_t numQubits, std::size_t reps) {
    if (numQubits < 2) {
        throw std::invalid_argument("buildTwoLocal: ring entanglement needs at least 2 qubits");
    }
    if (reps == 0) {
        throw std::invalid_argument("buildTwoLocal: reps must be positive");
    }
    std::vector<Gate> gates;
    std::size_t next = 0;
    auto rotationLayer = [&](GateKind k) {
        for (std::size_t q = 0; q < numQubits; ++q) {
            gates.push_back(Gate::make(k, {q}, "theta_" + std::to_string(next++)));
        }
    };
    const std::size_t last = numQubits - 1;
    for (std::size_t r = 0; r < reps; ++r) {
        rotationLayer(GateKind::RX);
        rotationLayer(GateKind::RZ);
        for (std::size_t parity = 0; parity < 2; ++parity) {
            for (std::size_t i = parity; i < last; i += 2) {
                gates.push_back(Gate::make(GateKind::CZ, {i, i + 1}));
            }
        }
        gates.push_back(Gate::make(GateKind::CZ, {last, 0}));
    }
    rotationLayer(GateKind::RX);
    rotationLayer(GateKind::RZ);
    return Circuit(numQubits, std::move(gates));
}

// ---------------------------------------------------------------------------
// Parameter binding

using ParamValues = std::map<std::string, double>;

struct BoundGate {
    GateKind kind{};
    std::array<std::size_t, 2> qubits{}; ///< second entry unused for 1-qubit gates
    double angle = 0.0;
    friend bool operator==(const BoundGate &, const BoundGate &) = default;
};

struct BoundCircuit {
    std::size_t numQubits = 0;
    std::vector<BoundGate> gates;
    friend bool operator==(const BoundCircuit &, const BoundCircuit &) = default;
};

/// Substitutes angles (radians). `values` must name exactly paramNames().
[[nodiscard]] inline BoundCircuit bindParameters(const Circuit &c, const ParamValues &values) {
    for (const auto &name : c.paramNames()) {
        if (values.count(name) == 0) {
            throw InputError("missing value for parameter '" + name + "'");
        }
    }
    if (values.size() != c.paramNames().size()) {
        const std::set<std::string> known(c.paramNames().begin(), c.paramNames().end());
        for (const auto &[name, v] : values) {
            if (known.count(name) == 0) {
                throw InputError("value given for unknown parameter '" + name + "'");
            }
        }
    }
    BoundCircuit out{c.numQubits(), {}};
    out.gates.reserve(c.gates().size());
    for (const Gate &g : c.gates()) {
        if (g.kind == GateKind::Unknown) {
            throw InputError("cannot bind unknown gate '" + g.name + "'");
        }
        BoundGate b{g.kind, {g.qubits[0], g.qubits.size() > 1 ? g.qubits[1] : 0}, 0.0};
        if (g.param) {
            b.angle = values.at(*g.param);
        }
        out.gates.push_back(b);
    }
    return out;
}

/// Values in paramNames() order -> name map.
[[nodiscard]] inline ParamValues toParamValues(const Circuit &c, const std::vector<double> &theta) {
    if (theta.size() != c.paramNames().size()) {
        throw std::invalid_argument("parameter vector size does not match circuit");
    }
    ParamValues out;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        out[c.paramNames()[i]] = theta[i];
    }
    return out;
}

} // namespace qcbm
