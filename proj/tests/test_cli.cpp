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
#include "qcbm/cli.hpp"
#include "qcbm/synthetic.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <sstream>

using namespace qcbm;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out, err;
};

Run run(const std::vector<std::string> &args, const CliEnv &env = {}) {
    std::ostringstream out, err;
    Run r;
    r.code = runCli(args, out, err, env);
    r.out = out.str();
    r.err = err.str();
    return r;
}

const CliEnv kNoCredentials{[](const char *) -> const char * { return nullptr; }};

/// Scratch directory holding a 6-bit toy dataset and the sample profiles.
struct Workspace {
    fs::path root;
    std::string dataset, profile, csv;

    explicit Workspace(const std::string &name) : root(fs::temp_directory_path() / ("qcbm_cli_" + name)) {
        fs::remove_all(root);
        fs::create_directories(root);
        dataset = (root / "toy.dataset").string();
        writeFileAtomic(dataset, serializeDataset(bimodalDataset(300, 5, BimodalSpec{3, 2, {1, 6}, 0.8})));
        profile = std::string(QCBM_SAMPLES_DIR) + "/profiles/linear6.json";
        csv = std::string(QCBM_TEST_DATA) + "/golden_rates.csv";
    }
    ~Workspace() { fs::remove_all(root); }
    Workspace(const Workspace &) = delete;
    Workspace &operator=(const Workspace &) = delete;

    [[nodiscard]] std::string path(const std::string &rel) const { return (root / rel).string(); }
};

std::map<std::string, std::string> snapshot(const fs::path &dir, bool withManifests = false) {
    std::map<std::string, std::string> out;
    for (const auto &e : fs::recursive_directory_iterator(dir)) {
        const auto name = e.path().filename().string();
        if (e.is_regular_file() && (withManifests || name.find("manifest") == std::string::npos)) {
            out[fs::relative(e.path(), dir).string()] = readFile(e.path().string());
        }
    }
    return out;
}

std::vector<std::vector<std::string>> readCsv(const std::string &text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        for (std::string c; std::getline(ls, c, ',');)
            cells.push_back(c);
        rows.push_back(cells);
    }
    return rows;
}

std::vector<std::string> trainArgs(const Workspace &w, const std::string &outDir) {
    return {"train", "--baseline", "two-local", "--reps", "2", "--dataset", w.dataset, "--epochs", "4",
            "--batch-size", "150", "--seed", "3", "--out-dir", outDir};
}

} // namespace

TEST_CASE("help, version and usage errors") {
    CHECK(run({"--help"}).code == kExitOk);
    const auto v = run({"--version"});
    CHECK(v.code == kExitOk);
    CHECK(v.out.find(kToolVersion) != std::string::npos);
    CHECK(run(std::vector<std::string>{}).code == kExitInput);
    CHECK(run({"frobnicate"}).code == kExitInput);
    CHECK(run({"profile", "--qubits", "many", "--out", "/tmp/x"}).code == kExitInput);
    CHECK(run({"search", "--proposer", "oracle"}).code == kExitInput);
}

TEST_CASE("encode: width, determinism and manifest") {
    Workspace w("encode");
    const auto a = run({"encode", "--csv", w.csv, "--columns", "jgb_2y,jgb_5y,jgb_10y", "--bits", "4", "--out",
                        w.path("a.dataset")});
    REQUIRE(a.code == kExitOk);
    const auto ds = loadDataset(w.path("a.dataset"));
    CHECK(ds.width() == 12);
    CHECK(readFile(w.path("a.dataset")) == readFile(std::string(QCBM_TEST_DATA) + "/golden_rates.dataset"));
    const auto m = nlohmann::json::parse(readFile(w.path("a.dataset.manifest.json")));
    CHECK(m["command"] == "encode");
    CHECK(m["tool"] == "qcbm");
    CHECK(m["inputs"].contains(w.csv));
    CHECK(m["outputs"].size() == 1);

    REQUIRE(run({"rerun", w.path("a.dataset.manifest.json"), "--out", w.path("b.dataset")}).code == kExitOk);
    CHECK(readFile(w.path("a.dataset")) == readFile(w.path("b.dataset")));
}

TEST_CASE("encode: missing column exits 2 and writes nothing") {
    Workspace w("encode_missing");
    const auto r = run({"encode", "--csv", w.csv, "--columns", "jgb_2y,jgb_30y", "--out", w.path("x.dataset")});
    CHECK(r.code == kExitInput);
    CHECK(r.err.find("jgb_30y") != std::string::npos);
    CHECK_FALSE(fs::exists(w.path("x.dataset")));
    CHECK_FALSE(fs::exists(w.path("x.dataset.manifest.json")));
    CHECK(run({"encode", "--csv", w.path("nope.csv"), "--columns", "a", "--out", w.path("y")}).code == kExitInput);
}

TEST_CASE("profile command writes a loadable profile") {
    Workspace w("profile");
    REQUIRE(run({"profile", "--topology", "ring", "--qubits", "5", "--readout-error", "0.03", "--max-depth", "44",
                 "--out", w.path("ring5.json")})
                .code == kExitOk);
    CHECK(loadProfile(w.path("ring5.json")) == ringProfile(5, 0.03, 44));
}

TEST_CASE("train: baseline outputs and reproducibility") {
    Workspace w("train");
    const auto r = run(trainArgs(w, w.path("a")));
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.find("epoch 4") != std::string::npos);
    const auto loss = readCsv(readFile(w.path("a/loss.csv")));
    REQUIRE(loss.size() == 5);
    CHECK(loss[0] == std::vector<std::string>{"epoch", "mmd", "kl"});
    const auto metrics = nlohmann::json::parse(readFile(w.path("a/metrics.json")));
    for (const auto *k : {"kl", "mmd_final", "depth", "valid", "params"}) {
        CHECK(metrics.contains(k));
    }
    CHECK(metrics.size() == 5);
    CHECK(metrics["mmd_final"].get<double>() == std::stod(loss[4][1]));
    CHECK(metrics["valid"].is_null()); // no profile given
    const auto circuit = parseDsl(readFile(w.path("a/circuit.json")));
    REQUIRE(circuit.ok());
    CHECK(*circuit.circuit == buildTwoLocal(6, 2));
    CHECK(metrics["params"].size() == circuit.circuit->paramNames().size());
    const auto manifest = nlohmann::json::parse(readFile(w.path("a/manifest.json")));
    CHECK(manifest["seed"] == 3);
    CHECK(manifest["config"]["train"]["epochs"] == 4);
    CHECK(manifest["timing"]["epoch_wall_seconds"].size() == 4);

    REQUIRE(run(trainArgs(w, w.path("b"))).code == kExitOk);
    CHECK(snapshot(w.path("a")) == snapshot(w.path("b")));
    REQUIRE(run({"rerun", w.path("a/manifest.json"), "--out", w.path("c")}).code == kExitOk);
    CHECK(snapshot(w.path("a")) == snapshot(w.path("c")));

    auto other = trainArgs(w, w.path("d"));
    other[12] = "4"; // --seed
    REQUIRE(run(other).code == kExitOk);
    CHECK(readFile(w.path("a/loss.csv")) != readFile(w.path("d/loss.csv")));
}

TEST_CASE("train: circuit files and profile checks") {
    Workspace w("train_circuit");
    writeFileAtomic(w.path("bad.json"), "{\"qubits\": [0, 1], \"gates\": [], \"params\": [\"ghost\"]}");
    auto r = run({"train", "--circuit", w.path("bad.json"), "--dataset", w.dataset, "--out-dir", w.path("o")});
    CHECK(r.code == kExitInput);
    CHECK(r.err.find("never used") != std::string::npos);
    CHECK_FALSE(fs::exists(w.path("o")));

    // Uses the (0, 5) pair, which linear6 does not couple.
    std::vector<Gate> gates;
    for (std::size_t q = 0; q < 6; ++q) {
        gates.push_back(Gate::make(GateKind::RX, {q}, "a" + std::to_string(q)));
    }
    gates.push_back(Gate::make(GateKind::CZ, {0, 5}));
    writeFileAtomic(w.path("uncoupled.json"), serializeDsl(Circuit(6, gates)));
    r = run({"train", "--circuit", w.path("uncoupled.json"), "--dataset", w.dataset, "--profile", w.profile,
             "--epochs", "1", "--out-dir", w.path("u")});
    CHECK(r.code == kExitOk);
    CHECK(r.err.find("uncoupled-pair") != std::string::npos);
    CHECK(nlohmann::json::parse(readFile(w.path("u/metrics.json")))["valid"] == false);

    CHECK(run({"train", "--dataset", w.dataset, "--out-dir", w.path("n")}).code == kExitInput);
    CHECK(run({"train", "--baseline", "ladder", "--dataset", w.dataset, "--out-dir", w.path("n")}).code ==
          kExitInput);
    CHECK(run({"train", "--baseline", "two-local", "--dataset", w.dataset, "--epochs", "0", "--out-dir",
               w.path("n")})
              .code == kExitInput);
}

TEST_CASE("config file supplies defaults that flags override") {
    Workspace w("config");
    writeFileAtomic(w.path("run.toml"), "[train]\nepochs = 2\nlr = 0.05\nbatch-size = 100\nseed = 8\n");
    auto r = run({"--config", w.path("run.toml"), "train", "--baseline", "two-local", "--dataset", w.dataset,
                  "--out-dir", w.path("a")});
    REQUIRE(r.code == kExitOk);
    auto m = nlohmann::json::parse(readFile(w.path("a/manifest.json")));
    CHECK(m["config"]["train"]["epochs"] == 2);
    CHECK(m["config"]["train"]["lr"] == 0.05);
    CHECK(m["seed"] == 8);

    r = run({"--config", w.path("run.toml"), "train", "--baseline", "two-local", "--dataset", w.dataset, "--epochs",
             "3", "--out-dir", w.path("b")});
    REQUIRE(r.code == kExitOk);
    m = nlohmann::json::parse(readFile(w.path("b/manifest.json")));
    CHECK(m["config"]["train"]["epochs"] == 3);
    CHECK(m["config"]["train"]["batch_size"] == 100);
    CHECK(readCsv(readFile(w.path("b/loss.csv"))).size() == 4);

    CHECK(run({"--config", w.path("missing.toml"), "profile", "--out", w.path("p.json")}).code == kExitInput);
}

TEST_CASE("search: mock run directory, summary and best copy") {
    Workspace w("search");
    const std::vector<std::string> args{"search", "--profile", w.profile, "--dataset", w.dataset, "--proposer",
                                        "mock", "--rounds", "3", "--epochs", "3", "--batch-size", "150",
                                        "--seed", "2", "--out-dir", w.path("run")};
    const auto r = run(args);
    REQUIRE(r.code == kExitOk);
    for (int k = 1; k <= 3; ++k) {
        for (const auto *f : {"prompt.txt", "response.txt", "circuit.json", "metrics.json"}) {
            CHECK(fs::exists(w.path("run/round_" + std::to_string(k) + "/" + f)));
        }
    }
    CHECK_FALSE(fs::exists(w.path("run/round_4")));
    const auto summary = readCsv(readFile(w.path("run/summary.csv")));
    REQUIRE(summary.size() == 4);
    CHECK(summary[0] == std::vector<std::string>{"round", "depth", "valid", "kl"});
    CHECK(r.out.find(readFile(w.path("run/summary.csv"))) != std::string::npos);

    // best/ is the minimal-KL round according to the per-round metrics.
    double bestKl = 1e300;
    int bestRound = 0;
    for (int k = 1; k <= 3; ++k) {
        const auto m = nlohmann::json::parse(readFile(w.path("run/round_" + std::to_string(k) + "/metrics.json")));
        if (m["valid"].get<bool>() && m["kl"].get<double>() < bestKl) {
            bestKl = m["kl"].get<double>();
            bestRound = k;
        }
    }
    CHECK(readFile(w.path("run/best/round.txt")) == std::to_string(bestRound) + "\n");
    const auto src = "run/round_" + std::to_string(bestRound) + "/";
    CHECK(readFile(w.path("run/best/circuit.json")) == readFile(w.path(src + "circuit.json")));
    CHECK(readFile(w.path("run/best/params.txt")) == readFile(w.path(src + "params.txt")));

    REQUIRE(run({"rerun", w.path("run/manifest.json"), "--out", w.path("again")}).code == kExitOk);
    CHECK(snapshot(w.path("run")) == snapshot(w.path("again")));
}

TEST_CASE("search: exhausted budget exits 4") {
    Workspace w("search_exhausted");
    const auto r = run({"search", "--profile", w.profile, "--dataset", w.dataset, "--rounds", "2", "--retries", "0",
                        "--max-depth", "3", "--out-dir", w.path("run")});
    CHECK(r.code == kExitSearchExhausted);
    CHECK(r.out.find("search exhausted") != std::string::npos);
    CHECK(fs::exists(w.path("run/summary.csv")));
    CHECK_FALSE(fs::exists(w.path("run/best")));
}

TEST_CASE("search: llm proposer without credentials exits 3 before any request") {
    Workspace w("search_llm");
    const auto r = run({"search", "--profile", w.profile, "--dataset", w.dataset, "--proposer", "llm", "--out-dir",
                        w.path("run")},
                       kNoCredentials);
    CHECK(r.code == kExitConfig);
    CHECK(r.err.find(kEnvApiKey) != std::string::npos);
    CHECK_FALSE(fs::exists(w.path("run/llm_log.jsonl")));
    CHECK_FALSE(fs::exists(w.path("run/round_1")));
}

TEST_CASE("search: dataset wider than the profile exits 2") {
    Workspace w("search_wide");
    REQUIRE(run({"profile", "--qubits", "4", "--out", w.path("p4.json")}).code == kExitOk);
    CHECK(run({"search", "--profile", w.path("p4.json"), "--dataset", w.dataset, "--out-dir", w.path("run")}).code ==
          kExitInput);
}

TEST_CASE("eval-noisy: metrics and histogram artifacts") {
    Workspace w("eval");
    REQUIRE(run(trainArgs(w, w.path("t"))).code == kExitOk);
    const std::vector<std::string> base{"eval-noisy", "--circuit", w.path("t/circuit.json"), "--params",
                                        w.path("t/params.txt"), "--dataset", w.dataset, "--profile", w.profile};
    auto args = base;
    for (const auto *a : {"--em", "--post-select", "--repeats", "5", "--shots", "5000", "--seed", "1", "--out-dir"}) {
        args.emplace_back(a);
    }
    args.push_back(w.path("e"));
    const auto r = run(args);
    REQUIRE(r.code == kExitOk);
    const auto metrics = readCsv(readFile(w.path("e/metrics.csv")));
    REQUIRE(metrics.size() == 8);
    CHECK(metrics[0] ==
          std::vector<std::string>{"trial", "kl_noiseless", "kl_raw", "kl_em", "kl_post", "retained_fraction"});
    CHECK(metrics[6][0] == "mean");
    CHECK(metrics[7][0] == "std");
    double rawSum = 0.0;
    for (int i = 1; i <= 5; ++i)
        rawSum += std::stod(metrics[i][2]);
    CHECK_THAT(std::stod(metrics[6][2]), Catch::Matchers::WithinAbs(rawSum / 5, 1e-12));

    const auto hist = readCsv(readFile(w.path("e/histogram.csv")));
    REQUIRE(hist[0] ==
            std::vector<std::string>{"bitstring", "data", "model", "noisy", "mitigated", "post_selected"});
    for (std::size_t c = 1; c < hist[0].size(); ++c) {
        double s = 0.0;
        for (std::size_t i = 1; i < hist.size(); ++i)
            s += std::stod(hist[i][c]);
        CHECK_THAT(s, Catch::Matchers::WithinAbs(1.0, 1e-6));
    }
    CHECK(hist[1][0].size() == 6);
    const auto svg = readFile(w.path("e/histogram.svg"));
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(r.out.find("kl_em") != std::string::npos);

    REQUIRE(run({"rerun", w.path("e/manifest.json"), "--out", w.path("e2")}).code == kExitOk);
    CHECK(snapshot(w.path("e")) == snapshot(w.path("e2")));

    // Without the optional flags the extra columns disappear.
    args = base;
    args.insert(args.end(), {"--repeats", "2", "--out-dir", w.path("plain")});
    REQUIRE(run(args).code == kExitOk);
    CHECK(readCsv(readFile(w.path("plain/metrics.csv")))[0] ==
          std::vector<std::string>{"trial", "kl_noiseless", "kl_raw"});
}

TEST_CASE("eval-noisy: zero readout error reproduces the noiseless KL") {
    Workspace w("eval_identity");
    REQUIRE(run(trainArgs(w, w.path("t"))).code == kExitOk);
    const auto r = run({"eval-noisy", "--circuit", w.path("t/circuit.json"), "--params", w.path("t/params.txt"),
                        "--dataset", w.dataset, "--profile", w.profile, "--readout-error", "0", "--repeats", "3",
                        "--shots", "200000", "--out-dir", w.path("e")});
    REQUIRE(r.code == kExitOk);
    const auto metrics = readCsv(readFile(w.path("e/metrics.csv")));
    const double noiseless = std::stod(metrics[4][1]);
    const double raw = std::stod(metrics[4][2]);
    CHECK(std::abs(raw - noiseless) < 0.02 + 0.02 * noiseless);
}

TEST_CASE("eval-noisy: mitigation lowers mean KL in at least 90% of seeds") {
    // The ordering is a property of trained models; an untrained one can gain
    // from noise that spreads its mass onto the data support.
    Workspace w("eval_em");
    auto args = trainArgs(w, w.path("t"));
    args[8] = "30"; // --epochs
    REQUIRE(run(args).code == kExitOk);
    int better = 0;
    for (int seed = 0; seed < 10; ++seed) {
        const auto dir = w.path("e" + std::to_string(seed));
        REQUIRE(run({"eval-noisy", "--circuit", w.path("t/circuit.json"), "--params", w.path("t/params.txt"),
                     "--dataset", w.dataset, "--profile", w.profile, "--em", "--readout-error", "0.05", "--repeats",
                     "3", "--shots", "20000", "--seed", std::to_string(seed), "--out-dir", dir})
                    .code == kExitOk);
        const auto metrics = readCsv(readFile(dir + "/metrics.csv"));
        better += std::stod(metrics[4][3]) <= std::stod(metrics[4][2]) ? 1 : 0;
    }
    CHECK(better >= 9);
}

TEST_CASE("eval-noisy: width mismatch exits 2 without outputs") {
    Workspace w("eval_mismatch");
    writeFileAtomic(w.path("c.json"), serializeDsl(Circuit(2, {Gate::make(GateKind::RX, {0}, "a")})));
    writeFileAtomic(w.path("p.txt"), "a 0.5\n");
    const auto r = run({"eval-noisy", "--circuit", w.path("c.json"), "--params", w.path("p.txt"), "--dataset",
                        w.dataset, "--profile", w.profile, "--out-dir", w.path("e")});
    CHECK(r.code == kExitInput);
    CHECK(r.err.find("6 bits") != std::string::npos);
    CHECK_FALSE(fs::exists(w.path("e")));
}

TEST_CASE("rerun refuses non-manifests") {
    Workspace w("rerun");
    writeFileAtomic(w.path("m.json"), "{\"argv\": []}");
    CHECK(run({"rerun", w.path("m.json")}).code == kExitInput);
    writeFileAtomic(w.path("r.json"), "{\"argv\": [\"rerun\", \"x\"]}");
    CHECK(run({"rerun", w.path("r.json")}).code == kExitInput);
}
