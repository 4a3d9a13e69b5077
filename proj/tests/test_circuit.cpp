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
#include "oracles.hpp"
#include "qcbm/circuit.hpp"
#include "qcbm/dsl.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <numbers>

using namespace qcbm;
using K = GateKind;

namespace {

const std::vector<GateKind> kAllKinds{K::RX, K::RY, K::RZ, K::X, K::SX, K::H, K::CZ, K::CX};

bool hasKind(const ValidityReport &r, ViolationKind k) {
    return std::any_of(r.violations.begin(), r.violations.end(), [&](const Violation &v) { return v.kind == k; });
}

} // namespace

TEST_CASE("Circuit rejects structurally broken gates") {
    CHECK_THROWS_AS(Circuit(2, {Gate::make(K::RX, {2}, "a")}), std::invalid_argument);
    CHECK_THROWS_AS(Circuit(2, {Gate::make(K::CZ, {1, 1})}), std::invalid_argument);
    CHECK_THROWS_AS(Circuit(2, {Gate::make(K::CZ, {0})}), std::invalid_argument);
    CHECK_THROWS_AS(Circuit(2, {Gate::make(K::RX, {0})}), std::invalid_argument);
    CHECK_THROWS_AS(Circuit(2, {Gate::make(K::H, {0}, "a")}), std::invalid_argument);
    CHECK_THROWS_AS(Circuit(2, {}, {0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(Circuit(2, {}, {0}), std::invalid_argument);
}

TEST_CASE("paramNames follow first appearance and deduplicate") {
    const Circuit c(2, {Gate::make(K::RY, {0}, "b"), Gate::make(K::RX, {1}, "a"), Gate::make(K::RZ, {0}, "b"),
                        Gate::make(K::CZ, {0, 1}), Gate::make(K::RX, {0}, "c")});
    CHECK(c.paramNames() == std::vector<std::string>{"b", "a", "c"});
}

TEST_CASE("unknown gate names are kept for validate to report") {
    const Gate g{K::Unknown, "ccx", {0, 1}, std::nullopt};
    const Circuit c(3, {g});
    const auto report = validate(c, linearProfile(3));
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0].kind == ViolationKind::UnknownGate);
    CHECK(report.violations[0].gateIndex == 0);
}

TEST_CASE("validate: empty circuit is valid everywhere") {
    CHECK(validate(Circuit(3), linearProfile(3)).valid());
    CHECK(validate(Circuit(0), linearProfile(1)).valid());
}

TEST_CASE("validate: cz on an uncoupled pair") {
    const Circuit c(6, {Gate::make(K::CZ, {0, 5})});
    const auto r = validate(c, linearProfile(6));
    REQUIRE(r.violations.size() == 1);
    CHECK(r.violations[0].kind == ViolationKind::UncoupledPair);
    CHECK(!r.valid());
    CHECK(r.describe().find("uncoupled-pair") != std::string::npos);
}

TEST_CASE("validate reports every problem, not just the first") {
    HardwareProfile p = linearProfile(4);
    p.maxDepth = 2;
    const Circuit c(4, {Gate::make(K::H, {0}), Gate::make(K::CZ, {0, 2}), Gate::make(K::RY, {3}, "t"),
                        Gate::make(K::CX, {1, 2}), Gate::make(K::X, {0})});
    const auto r = validate(c, p);
    CHECK(hasKind(r, ViolationKind::NotInBasis));
    CHECK(hasKind(r, ViolationKind::UncoupledPair));
    CHECK(hasKind(r, ViolationKind::DepthExceeded));
    // h, ry, cx are outside the basis; cz(0,2) uncoupled; depth 3 > 2
    CHECK(r.violations.size() == 5);
}

TEST_CASE("validate flags physical indices beyond the device") {
    const Circuit c(2, {Gate::make(K::CZ, {0, 1})}, {3, 7});
    const auto r = validate(c, linearProfile(5));
    CHECK(hasKind(r, ViolationKind::BadQubitIndex));
    CHECK(!hasKind(r, ViolationKind::UncoupledPair));
}

TEST_CASE("validate uses the physical layout for coupling") {
    const Circuit onChain(2, {Gate::make(K::CZ, {0, 1})}, {4, 5});
    const Circuit offChain(2, {Gate::make(K::CZ, {0, 1})}, {2, 5});
    CHECK(validate(onChain, linearProfile(6)).valid());
    CHECK(hasKind(validate(offChain, linearProfile(6)), ViolationKind::UncoupledPair));
}

TEST_CASE("validate agrees with a per-gate re-check on random 12-qubit circuits") {
    Rng rng(2024);
    const auto profile = linearProfile(12, 0.02, 25);
    int valid = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const std::vector<GateKind> kinds = trial % 2 ? std::vector<GateKind>{K::RX, K::RZ, K::SX, K::CZ}
                                                      : kAllKinds;
        const auto c = oracle::randomCircuit(rng, 12, 1 + rng.below(60), kinds);
        const bool expected = oracle::hardwareValid(c, profile);
        REQUIRE(validate(c, profile).valid() == expected);
        valid += expected ? 1 : 0;
    }
    CHECK(valid > 0);
}

TEST_CASE("validate is monotone under appending gates") {
    Rng rng(9);
    const auto profile = linearProfile(5, 0.02, 12);
    for (int trial = 0; trial < 200; ++trial) {
        auto c = oracle::randomCircuit(rng, 5, rng.below(20), kAllKinds);
        const auto before = validate(c, profile).violations;
        const auto extra = oracle::randomCircuit(rng, 5, 1, kAllKinds).gates()[0];
        Gate renamed = extra;
        if (renamed.param) {
            renamed.param = "fresh";
        }
        const auto after = validate(c.withGate(renamed), profile).violations;
        for (const auto &v : before) {
            REQUIRE(std::find(after.begin(), after.end(), v) != after.end());
        }
    }
}

TEST_CASE("depth examples") {
    CHECK(depth(Circuit(3)) == 0);
    const Circuit c(2, {Gate::make(K::RX, {0}, "a"), Gate::make(K::RX, {1}, "b"), Gate::make(K::CZ, {0, 1})});
    CHECK(depth(c) == 2);
    const Circuit chain(3, {Gate::make(K::CZ, {0, 1}), Gate::make(K::CZ, {1, 2}), Gate::make(K::H, {0})});
    CHECK(depth(chain) == 2);
}

TEST_CASE("depth equals the longest path of the explicit gate DAG") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const auto c = oracle::randomCircuit(rng, 6, 50, kAllKinds);
        REQUIRE(depth(c) == oracle::dagDepth(c));
    }
}

TEST_CASE("depth is invariant under commuting disjoint neighbours") {
    Rng rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        const auto c = oracle::randomCircuit(rng, 5, 30, kAllKinds);
        auto gates = c.gates();
        // Swap adjacent gates on disjoint qubits: still a topological order of the same DAG.
        for (std::size_t i = 0; i + 1 < gates.size(); ++i) {
            bool disjoint = true;
            for (auto a : gates[i].qubits)
                for (auto b : gates[i + 1].qubits)
                    disjoint = disjoint && a != b;
            if (disjoint && rng.below(2) == 0) {
                std::swap(gates[i], gates[i + 1]);
            }
        }
        REQUIRE(depth(Circuit(5, gates)) == depth(c));
    }
}

TEST_CASE("depth of a concatenation is subadditive") {
    Rng rng(13);
    for (int trial = 0; trial < 200; ++trial) {
        const auto a = oracle::randomCircuit(rng, 4, rng.below(25), {K::H, K::X, K::CZ, K::CX});
        const auto b = oracle::randomCircuit(rng, 4, rng.below(25), {K::H, K::SX, K::CZ});
        const auto ab = concat(a, b);
        REQUIRE(ab.gates().size() == a.gates().size() + b.gates().size());
        REQUIRE(depth(ab) <= depth(a) + depth(b));
        REQUIRE(depth(ab) >= std::max(depth(a), depth(b)));
    }
    CHECK_THROWS_AS(concat(Circuit(2), Circuit(3)), std::invalid_argument);
}

TEST_CASE("TwoLocal shape") {
    const auto small = buildTwoLocal(2, 1);
    CHECK(small.paramNames().size() == 8);
    CHECK(small.gates().size() == 10);

    const auto big = buildTwoLocal(12, 18);
    CHECK(big.paramNames().size() == 456);
    CHECK(depth(big) >= 74);
    CHECK(depth(big) <= 92);

    for (std::size_t n = 2; n <= 9; ++n) {
        for (std::size_t reps = 1; reps <= 4; ++reps) {
            const auto c = buildTwoLocal(n, reps);
            REQUIRE(c.paramNames().size() == 2 * n * (reps + 1));
            std::size_t cz = 0;
            for (const auto &g : c.gates()) {
                cz += g.kind == K::CZ ? 1 : 0;
            }
            REQUIRE(cz == reps * (n == 2 ? 2 : n));
        }
    }
    CHECK_THROWS_AS(buildTwoLocal(1, 3), std::invalid_argument);
    CHECK_THROWS_AS(buildTwoLocal(3, 0), std::invalid_argument);
}

TEST_CASE("TwoLocal passes validation on any profile with its basis and ring") {
    for (std::size_t n = 3; n <= 12; ++n) {
        HardwareProfile p = ringProfile(n, 0.02, 1000);
        p.basisGates = {"rx", "rz", "cz"};
        REQUIRE(validate(buildTwoLocal(n, 3), p).valid());
        // The chain alone lacks the wrap pair.
        REQUIRE(!validate(buildTwoLocal(n, 3), linearProfile(n, 0.02, 1000)).valid());
    }
}

TEST_CASE("bindParameters") {
    const Circuit plain(2, {Gate::make(K::H, {0}), Gate::make(K::CX, {0, 1})});
    const auto bound = bindParameters(plain, {});
    REQUIRE(bound.gates.size() == 2);
    CHECK(bound.gates[0].kind == K::H);
    CHECK(bound.gates[1].qubits == std::array<std::size_t, 2>{0, 1});

    const Circuit rx(1, {Gate::make(K::RX, {0}, "theta")});
    CHECK(bindParameters(rx, {{"theta", std::numbers::pi}}).gates[0].angle == std::numbers::pi);
    CHECK_THROWS_AS(bindParameters(rx, {}), InputError);
    CHECK_THROWS_AS(bindParameters(rx, {{"theta", 1.0}, {"phi", 2.0}}), InputError);

    const Circuit unknown(1, {Gate{K::Unknown, "u3", {0}, std::nullopt}});
    CHECK_THROWS_AS(bindParameters(unknown, {}), InputError);
}

TEST_CASE("TwoLocal with bound values round-trips through the circuit document") {
    const auto c = buildTwoLocal(4, 2);
    const auto parsed = parseDsl(serializeDsl(c));
    REQUIRE(parsed.ok());
    CHECK(*parsed.circuit == c);
    Rng rng(5);
    std::vector<double> theta(c.paramNames().size());
    for (double &t : theta) {
        t = rng.uniform(-3, 3);
    }
    CHECK(bindParameters(*parsed.circuit, toParamValues(c, theta)) == bindParameters(c, toParamValues(c, theta)));
}

TEST_CASE("profile JSON round trip and validation") {
    HardwareProfile p = ringProfile(5, 0.03, 40);
    p.readoutError[2] = {0.01, 0.05};
    const auto back = profileFromJson(nlohmann::json::parse(profileToJson(p).dump()));
    CHECK(back == p);

    auto j = nlohmann::json::parse(profileToJson(p).dump());
    j["coupling_map"].push_back({2, 2});
    CHECK_THROWS_AS(profileFromJson(j), InputError);

    j = nlohmann::json::parse(profileToJson(p).dump());
    j["coupling_map"].push_back({1, 9});
    CHECK_THROWS_AS(profileFromJson(j), InputError);

    j = nlohmann::json::parse(profileToJson(p).dump());
    j["readout_error"][0] = {0.5, 1.5};
    CHECK_THROWS_AS(profileFromJson(j), InputError);

    j = nlohmann::json::parse(profileToJson(p).dump());
    j["gate_error"]["cz"] = -0.1;
    CHECK_THROWS_AS(profileFromJson(j), InputError);

    j = nlohmann::json::parse(profileToJson(p).dump());
    j.erase("max_depth");
    CHECK_THROWS_AS(profileFromJson(j), InputError);

    j = nlohmann::json::parse(profileToJson(p).dump());
    j["readout_error"].erase(0);
    CHECK_THROWS_AS(profileFromJson(j), InputError);
}

TEST_CASE("coupling pairs are undirected") {
    auto j = profileToJson(linearProfile(3));
    j["coupling_map"] = {{1, 0}, {2, 1}};
    const auto p = profileFromJson(nlohmann::json::parse(j.dump()));
    CHECK(p.coupled(0, 1));
    CHECK(p.coupled(1, 0));
    CHECK(p.coupled(2, 1));
    CHECK(!p.coupled(0, 2));
}
