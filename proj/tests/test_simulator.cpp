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
#include "qcbm/simulator.hpp"

#include <catch_amalgamated.hpp>

#include <numbers>

using namespace qcbm;
using K = GateKind;
using Catch::Matchers::WithinAbs;

namespace {

const std::vector<GateKind> kAllKinds{K::RX, K::RY, K::RZ, K::X, K::SX, K::H, K::CZ, K::CX};

BoundCircuit randomBound(Rng &rng, std::size_t n, std::size_t gates) {
    const auto c = oracle::randomCircuit(rng, n, gates, kAllKinds);
    ParamValues v;
    for (const auto &name : c.paramNames()) {
        v[name] = rng.uniform(-std::numbers::pi, std::numbers::pi);
    }
    return bindParameters(c, v);
}

double linf(const std::vector<Complex> &a, const std::vector<oracle::C> &b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

BoundGate inverseOf(const BoundGate &g) {
    BoundGate inv = g;
    switch (g.kind) {
    case K::RX:
    case K::RY:
    case K::RZ: inv.angle = -g.angle; break;
    default: break;
    }
    return inv;
}

} // namespace

TEST_CASE("empty circuit leaves |0...0>") {
    const auto sv = run(BoundCircuit{3, {}});
    REQUIRE(sv.amplitudes.size() == 8);
    CHECK(sv.amplitudes[0] == Complex(1.0));
    for (std::size_t i = 1; i < 8; ++i) {
        CHECK(sv.amplitudes[i] == Complex(0.0));
    }
}

TEST_CASE("x on wire 0 sets bit 0") {
    const auto sv = run(BoundCircuit{2, {{K::X, {0, 0}, 0.0}}});
    CHECK(std::abs(sv.amplitudes[1] - Complex(1.0)) < 1e-15);
    const auto d = exactDistribution(BoundCircuit{2, {{K::X, {0, 0}, 0.0}}});
    CHECK(d.mass("01") == 1.0);
}

TEST_CASE("cx controls on its first qubit") {
    const BoundCircuit bc{2, {{K::X, {1, 0}, 0.0}, {K::CX, {1, 0}, 0.0}}};
    CHECK(exactDistribution(bc).mass("11") == 1.0);
    const BoundCircuit idle{2, {{K::X, {1, 0}, 0.0}, {K::CX, {0, 1}, 0.0}}};
    CHECK(exactDistribution(idle).mass("10") == 1.0);
}

TEST_CASE("single-qubit gate matrices match the textbook forms") {
    Rng rng(1);
    for (K k : {K::RX, K::RY, K::RZ, K::X, K::SX, K::H}) {
        for (int i = 0; i < 5; ++i) {
            const double t = rng.uniform(-4, 4);
            const auto m = singleQubitMatrix(k, t);
            const auto ref = oracle::oneQubit(k, t);
            for (std::size_t r = 0; r < 2; ++r)
                for (std::size_t c = 0; c < 2; ++c)
                    REQUIRE(std::abs(m[r * 2 + c] - ref(r, c)) < 1e-15);
        }
    }
    // sx squared is x
    const auto sx = oracle::oneQubit(K::SX, 0);
    const auto x = oracle::matmul(sx, sx);
    CHECK(std::abs(x(0, 1) - 1.0) < 1e-15);
    CHECK(std::abs(x(0, 0)) < 1e-15);
}

TEST_CASE("random circuits match the dense matrix-product oracle") {
    Rng rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng.below(6);
        const auto bc = randomBound(rng, n, 1 + rng.below(30));
        const auto sv = run(bc);
        REQUIRE(linf(sv.amplitudes, oracle::simulate(bc)) < 1e-10);
    }
}

TEST_CASE("norm is preserved after every gate") {
    Rng rng(78);
    for (int trial = 0; trial < 50; ++trial) {
        const auto bc = randomBound(rng, 6, 40);
        std::vector<Complex> amps(64, 0.0);
        amps[0] = 1.0;
        for (const auto &g : bc.gates) {
            applyGate(amps, g);
            double s = 0.0;
            for (const auto &a : amps)
                s += std::norm(a);
            REQUIRE_THAT(s, WithinAbs(1.0, 1e-10));
        }
    }
}

TEST_CASE("gate followed by its inverse restores the state") {
    Rng rng(79);
    for (int trial = 0; trial < 50; ++trial) {
        const auto bc = randomBound(rng, 5, 20);
        const auto before = run(bc).amplitudes;
        for (const auto &g : randomBound(rng, 5, 10).gates) {
            auto amps = before;
            applyGate(amps, g);
            if (g.kind == K::SX) {
                // sx^-1 = sx^3
                applyGate(amps, g);
                applyGate(amps, g);
                applyGate(amps, g);
            } else {
                applyGate(amps, inverseOf(g));
            }
            for (std::size_t i = 0; i < amps.size(); ++i)
                REQUIRE(std::abs(amps[i] - before[i]) < 1e-10);
        }
    }
}

TEST_CASE("run enforces the qubit ceiling") {
    CHECK_THROWS_AS(run(BoundCircuit{21, {}}), std::invalid_argument);
    CHECK_THROWS_AS(run(BoundCircuit{4, {}}, 3), std::invalid_argument);
    CHECK_NOTHROW(run(BoundCircuit{4, {}}, 4));
    CHECK_THROWS_AS(run(BoundCircuit{2, {{K::X, {2, 0}, 0.0}}}), std::invalid_argument);
}

TEST_CASE("exactDistribution examples") {
    const auto h = exactDistribution(BoundCircuit{1, {{K::H, {0, 0}, 0.0}}});
    CHECK_THAT(h.mass("0"), WithinAbs(0.5, 1e-12));
    CHECK_THAT(h.mass("1"), WithinAbs(0.5, 1e-12));
    const auto rx = exactDistribution(BoundCircuit{1, {{K::RX, {0, 0}, std::numbers::pi / 2}}});
    CHECK_THAT(rx.mass("0"), WithinAbs(0.5, 1e-12));
    CHECK(h.kind() == DistributionKind::Exact);
}

TEST_CASE("exactDistribution is |amplitude|^2 and sums to 1") {
    Rng rng(80);
    for (int trial = 0; trial < 50; ++trial) {
        const auto bc = randomBound(rng, 5, 25);
        const auto sv = run(bc);
        const auto d = exactDistribution(bc);
        REQUIRE_THAT(d.total(), WithinAbs(1.0, 1e-9));
        for (std::size_t i = 0; i < sv.amplitudes.size(); ++i) {
            const double p = std::norm(sv.amplitudes[i]);
            REQUIRE_THAT(d.mass(i), WithinAbs(p < 1e-15 ? 0.0 : p, 1e-15));
        }
    }
}

TEST_CASE("sampling a deterministic circuit gives a point mass") {
    const BoundCircuit bc{3, {{K::X, {0, 0}, 0.0}, {K::X, {2, 0}, 0.0}}};
    const auto d = sample(bc, 137, 5);
    REQUIRE(d.supportSize() == 1);
    CHECK(d.mass("101") == 1.0);
    CHECK(d.kind() == DistributionKind::Empirical);
    CHECK(d.shots() == 137);
}

TEST_CASE("Hadamard sampling concentrates at 1/2") {
    const BoundCircuit bc{1, {{K::H, {0, 0}, 0.0}}};
    const auto d = sample(bc, 1000000, 2024);
    CHECK(d.mass("0") >= 0.497);
    CHECK(d.mass("0") <= 0.503);
}

TEST_CASE("sampling is reproducible and quantized to 1/shots") {
    Rng rng(81);
    const auto bc = randomBound(rng, 4, 20);
    const auto a = sample(bc, 999, 17);
    const auto b = sample(bc, 999, 17);
    CHECK(a == b);
    CHECK(!(a == sample(bc, 999, 18)));
    for (const auto &[idx, p] : a.entries()) {
        const double k = p * 999.0;
        REQUIRE_THAT(k, WithinAbs(std::round(k), 1e-9));
    }
    CHECK_THROWS_AS(sample(bc, 0, 1), std::invalid_argument);
}

TEST_CASE("sampling error shrinks like 1/sqrt(shots)") {
    Rng rng(82);
    const auto bc = randomBound(rng, 4, 25);
    const auto exact = exactDistribution(bc).toDense();
    auto meanL1 = [&](std::uint64_t shots) {
        double total = 0.0;
        for (std::uint64_t s = 0; s < 20; ++s) {
            const auto d = sample(bc, shots, deriveSeed(9, shots, s)).toDense();
            for (std::size_t i = 0; i < d.size(); ++i)
                total += std::abs(d[i] - exact[i]);
        }
        return total / 20.0;
    };
    const double small = meanL1(1000);
    const double large = meanL1(100000);
    // Ratio should be about 10; allow generous slack.
    CHECK(small / large > 5.0);
    CHECK(small / large < 20.0);
}

TEST_CASE("Distribution invariants") {
    CHECK_THROWS_AS(Distribution::exact(2, {{0, 0.5}, {1, 0.4}}), std::invalid_argument);
    CHECK_THROWS_AS(Distribution::exact(2, {{0, 1.5}, {1, -0.5}}), std::invalid_argument);
    CHECK_THROWS_AS(Distribution::exact(2, {{4, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(Distribution::fromCounts(2, {}), std::invalid_argument);
    const auto d = Distribution::fromCounts(2, {{3, 3}, {0, 1}});
    CHECK(d.mass("11") == 0.75);
    CHECK(d.shots() == 4);
    CHECK(d.entries().front().first == 0);
    CHECK_THROWS_AS(d.mass("1"), std::invalid_argument);
}

TEST_CASE("distribution CSV lists bitstrings with probabilities") {
    const auto d = Distribution::exact(2, {{0, 0.25}, {3, 0.75}});
    const auto csv = distributionCsv(d);
    CHECK(csv.rfind("bitstring,probability\n", 0) == 0);
    CHECK(csv.find("00,0.25") != std::string::npos);
    CHECK(csv.find("11,0.75") != std::string::npos);
}
