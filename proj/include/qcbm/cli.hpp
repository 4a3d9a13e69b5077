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
 * Command-line front end. `runCli` is the whole program minus `main`, so
 * tests can drive it in-process.
 *
 * Exit codes: 0 success, 2 input error, 3 configuration or credential
 * error, 4 search exhausted (no round produced a usable circuit).
 */
#pragma once

#include "circuit.hpp"
#include "common.hpp"
#include "dsl.hpp"
#include "encoding.hpp"
#include "io.hpp"
#include "llm_client.hpp"
#include "metrics.hpp"
#include "noise.hpp"
#include "search.hpp"
#include "simulator.hpp"
#include "trainer.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace qcbm {

inline constexpr const char *kToolVersion = "0.1.0";

enum ExitCode : int { kExitOk = 0, kExitInput = 2, kExitConfig = 3, kExitSearchExhausted = 4 };

struct CliEnv {
    std::function<const char *(const char *)> getenv = ::getenv;
};

namespace cli {

using ojson = nlohmann::ordered_json;

/// Collects what a command read and wrote, then writes manifest.json.
class Manifest {
  public:
    Manifest(std::string command, std::vector<std::string> argv, std::string outputFlag)
        : command_(std::move(command)), argv_(std::move(argv)), outputFlag_(std::move(outputFlag)),
          started_(detail::utcTimestamp()) {}

    void input(const std::string &path) { inputs_[path] = fnv1a64Hex(readFile(path)); }
    void output(const std::string &name, std::string_view content) { outputs_[name] = fnv1a64Hex(content); }
    ojson &config() { return config_; }
    void seed(std::uint64_t s) { seed_ = s; }

    /// Wall-clock measurements; kept out of the reproducible outputs.
    ojson &timing() { return timing_; }

    [[nodiscard]] std::string render() const {
        ojson j;
        j["tool"] = "qcbm";
        j["version"] = kToolVersion;
        j["command"] = command_;
        j["argv"] = argv_;
        j["output_flag"] = outputFlag_;
        j["config"] = config_;
        j["seed"] = seed_;
        j["inputs"] = inputs_;
        j["outputs"] = outputs_;
        if (!timing_.empty()) {
            j["timing"] = timing_;
        }
        j["started_at"] = started_;
        j["finished_at"] = detail::utcTimestamp();
        return j.dump(2) + "\n";
    }

  private:
    std::string command_;
    std::vector<std::string> argv_;
    std::string outputFlag_;
    std::string started_;
    ojson config_ = ojson::object();
    ojson inputs_ = ojson::object();
    ojson outputs_ = ojson::object();
    ojson timing_ = ojson::object();
    std::uint64_t seed_ = 0;
};

struct TrainOptions {
    std::size_t epochs = 30;
    double lr = 0.1;
    std::size_t batch = 1000;
    std::uint64_t shots = 10000;
    std::string mode = "exact";
    std::uint64_t seed = 0;
    std::vector<double> sigmas{3.0};
    std::string kernel = "feature-vector";
    double klEpsilon = 1e-9;
    std::size_t stepsPerEpoch = 0;
    double initScale = 0.1;

    void attach(CLI::App &app) {
        app.add_option("--epochs", epochs, "training epochs (full passes over the data)")->capture_default_str();
        app.add_option("--lr", lr, "Adam learning rate")->capture_default_str();
        app.add_option("--batch-size", batch, "mini-batch size")->capture_default_str();
        app.add_option("--shots", shots, "shots per simulation in sampled mode")->capture_default_str();
        app.add_option("--mode", mode, "exact | sampled")
            ->check(CLI::IsMember({"exact", "sampled"}))
            ->capture_default_str();
        app.add_option("--seed", seed, "random seed")->capture_default_str();
        app.add_option("--sigma", sigmas, "Gaussian kernel bandwidth(s); several give a mixture")
            ->capture_default_str();
        app.add_option("--kernel", kernel, "feature-vector | scalar-integer | binary-vector")
            ->check(CLI::IsMember({"feature-vector", "scalar-integer", "binary-vector"}))
            ->capture_default_str();
        app.add_option("--kl-epsilon", klEpsilon, "smoothing of the data distribution in KL")->capture_default_str();
        app.add_option("--steps-per-epoch", stepsPerEpoch, "mini-batch steps per epoch (0: one pass)")
            ->capture_default_str();
        app.add_option("--init-scale", initScale, "initial angles uniform in (-s, s)")->capture_default_str();
    }

    [[nodiscard]] TrainConfig toConfig() const {
        TrainConfig c;
        c.epochs = epochs;
        c.learningRate = lr;
        c.batchSize = batch;
        c.shots = shots;
        c.mode = evalModeFromName(mode);
        c.seed = seed;
        c.kernel.sigmas = sigmas;
        c.kernel.representation = representationFromName(kernel);
        c.kl.epsilon = klEpsilon;
        c.stepsPerEpoch = stepsPerEpoch;
        c.initScale = initScale;
        return c;
    }

    [[nodiscard]] ojson toJson() const {
        ojson j;
        j["epochs"] = epochs;
        j["lr"] = lr;
        j["batch_size"] = batch;
        j["shots"] = shots;
        j["mode"] = mode;
        j["seed"] = seed;
        j["sigma"] = sigmas;
        j["kernel"] = kernel;
        j["kl_epsilon"] = klEpsilon;
        j["steps_per_epoch"] = stepsPerEpoch;
        j["init_scale"] = initScale;
        return j;
    }
};

[[nodiscard]] inline Circuit loadCircuit(const std::string &path, std::ostream &err) {
    const DslParseResult parsed = parseDsl(readFile(path));
    for (const auto &d : parsed.diagnostics) {
        if (d.severity == DslDiagnostic::Severity::Warning) {
            err << path << ": " << d.format() << "\n";
        }
    }
    if (!parsed.ok()) {
        throw InputError(path + ":\n" + parsed.describe());
    }
    return *parsed.circuit;
}

[[nodiscard]] inline std::set<BasisIndex> loadBitstringSet(const std::string &path, std::size_t width) {
    std::istringstream in(readFile(path));
    std::set<BasisIndex> out;
    std::string line;
    while (std::getline(in, line)) {
        const std::string s = detail::trim(line);
        if (s.empty() || s[0] == '#') {
            continue;
        }
        if (s.size() != width) {
            throw InputError("valid-set entry '" + s + "' is not " + std::to_string(width) + " bits");
        }
        out.insert(fromBitstring(s));
    }
    if (out.empty()) {
        throw InputError("valid-set file is empty: " + path);
    }
    return out;
}

inline std::string metricsJson(std::optional<double> kl, std::optional<double> mmdFinal, std::size_t depth,
                               std::optional<bool> valid, const ParamValues &params) {
    ojson j;
    j["kl"] = kl ? ojson(*kl) : ojson(nullptr);
    j["mmd_final"] = mmdFinal ? ojson(*mmdFinal) : ojson(nullptr);
    j["depth"] = depth;
    j["valid"] = valid ? ojson(*valid) : ojson(nullptr);
    ojson p = ojson::object();
    for (const auto &[k, v] : params) {
        p[k] = v;
    }
    j["params"] = p;
    return j.dump(2) + "\n";
}

/// Writes a file, records its hash, and remembers it for the manifest.
inline void emit(Manifest &m, const std::filesystem::path &path, const std::string &content) {
    writeFileAtomic(path, content);
    m.output(path.filename().string(), content);
}

// ---------------------------------------------------------------------------
// Commands

struct EncodeArgs {
    std::string csv, out;
    std::vector<std::string> columns;
    std::size_t bits = 4;
    bool differencing = true;
};

inline int cmdEncode(const EncodeArgs &a, Manifest &m, std::ostream &out) {
    std::vector<ColumnSpec> cols;
    for (const auto &c : a.columns) {
        cols.push_back({c, a.bits});
    }
    m.input(a.csv);
    const EncodedDataset ds = ingestCsv(a.csv, cols, a.differencing);
    const std::string text = serializeDataset(ds);
    m.config()["columns"] = a.columns;
    m.config()["bits"] = a.bits;
    m.config()["differencing"] = a.differencing;
    emit(m, a.out, text);
    writeFileAtomic(a.out + ".manifest.json", m.render());
    out << "encoded " << ds.samples.size() << " samples of " << ds.width() << " bits (" << ds.sourceRows
        << " source rows) -> " << a.out << "\n";
    return kExitOk;
}

struct TrainArgs {
    std::string circuit, baseline, dataset, profile, outDir;
    std::size_t reps = 1;
    TrainOptions train;
};

inline int cmdTrain(const TrainArgs &a, Manifest &m, std::ostream &out, std::ostream &err) {
    namespace fs = std::filesystem;
    m.input(a.dataset);
    const EncodedDataset ds = loadDataset(a.dataset);
    Circuit circuit = [&] {
        if (!a.circuit.empty()) {
            m.input(a.circuit);
            return loadCircuit(a.circuit, err);
        }
        if (a.baseline != "two-local") {
            throw InputError("unknown baseline '" + a.baseline + "' (expected two-local)");
        }
        try {
            return buildTwoLocal(ds.width(), a.reps);
        } catch (const std::invalid_argument &e) {
            throw InputError(e.what());
        }
    }();
    std::optional<bool> valid;
    if (!a.profile.empty()) {
        m.input(a.profile);
        const ValidityReport report = validate(circuit, loadProfile(a.profile));
        valid = report.valid();
        if (!report.valid()) {
            err << "warning: circuit violates the profile:\n" << report.describe();
        }
    }
    const TrainConfig cfg = a.train.toConfig();
    m.config()["train"] = a.train.toJson();
    m.config()["circuit"] = a.circuit.empty() ? ojson(nullptr) : ojson(a.circuit);
    m.config()["baseline"] = a.circuit.empty() ? ojson(a.baseline) : ojson(nullptr);
    m.config()["reps"] = a.reps;
    m.seed(cfg.seed);

    out << "training " << circuit.paramNames().size() << " parameters, depth " << depth(circuit) << ", "
        << circuit.numQubits() << " qubits, " << ds.samples.size() << " samples\n";
    const TrainResult r = train(circuit, ds, cfg, {}, [&](const EpochRecord &e) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "epoch %zu  mmd %.6f  kl %.6f  %.1fs\n", e.epoch, e.mmd, e.kl, e.wallSeconds);
        out << buf << std::flush;
    });
    const fs::path dir(a.outDir);
    emit(m, dir / "circuit.json", serializeDsl(circuit));
    emit(m, dir / "params.txt", serializeParams(r.finalParams));
    emit(m, dir / "loss.csv", lossCsv(r));
    m.timing()["epoch_wall_seconds"] = r.epochWallSeconds;
    m.timing()["wall_seconds"] = r.wallTime;
    emit(m, dir / "metrics.json",
         metricsJson(r.klHistory.back(), r.lossHistory.back(), depth(circuit), valid, r.finalParams));
    writeFileAtomic(dir / "manifest.json", m.render());
    return kExitOk;
}

struct SearchArgs {
    std::string profile, dataset, proposer = "mock", outDir;
    std::size_t rounds = 10, maxDepth = 0, retries = 3;
    bool warmStart = false;
    int llmTimeout = 120, llmRetries = 2;
    TrainOptions train;
};

inline int cmdSearch(const SearchArgs &a, Manifest &m, const CliEnv &env, std::ostream &out) {
    namespace fs = std::filesystem;
    std::unique_ptr<Proposer> proposer;
    if (a.proposer == "llm") {
        LlmConfig lc = LlmConfig::fromEnv(env.getenv); // fail fast, before any network traffic
        lc.timeoutSeconds = a.llmTimeout;
        lc.maxRetries = a.llmRetries;
        lc.logPath = fs::path(a.outDir) / "llm_log.jsonl";
        m.config()["llm_model"] = lc.model;
        m.config()["llm_endpoint"] = lc.endpoint;
        proposer = std::make_unique<LlmProposer>(lc);
    } else {
        proposer = std::make_unique<MockProposer>();
    }
    m.input(a.profile);
    m.input(a.dataset);
    const HardwareProfile profile = loadProfile(a.profile);
    const EncodedDataset ds = loadDataset(a.dataset);

    SearchConfig cfg;
    cfg.rounds = a.rounds;
    cfg.maxDepth = a.maxDepth;
    cfg.retriesPerRound = a.retries;
    cfg.train = a.train.toConfig();
    cfg.warmStart = a.warmStart;
    cfg.seed = a.train.seed; // one seed drives proposer and training
    m.config()["proposer"] = a.proposer;
    m.config()["rounds"] = a.rounds;
    m.config()["max_depth"] = a.maxDepth > 0 ? a.maxDepth : profile.maxDepth;
    m.config()["retries"] = a.retries;
    m.config()["warm_start"] = a.warmStart;
    m.config()["train"] = a.train.toJson();
    m.seed(a.train.seed);

    const SearchResult res = runSearch(cfg, profile, ds, *proposer, a.outDir);
    const std::string summary = summaryTable(res.rounds);
    m.output("summary.csv", summary);
    out << summary;
    const RoundRecord *best = res.bestRound();
    if (best != nullptr) {
        out << "best round " << best->round << ": kl " << formatMetric(*best->kl) << ", depth " << best->depth
            << "\n";
    } else {
        out << "search exhausted: no round produced a usable circuit\n";
    }
    writeFileAtomic(fs::path(a.outDir) / "manifest.json", m.render());
    return best != nullptr ? kExitOk : kExitSearchExhausted;
}

struct EvalNoisyArgs {
    std::string circuit, params, dataset, profile, validSet, outDir;
    bool em = false, postSelect = false;
    std::size_t repeats = 10;
    std::uint64_t shots = 10000, seed = 0;
    std::optional<double> readoutError;
    double klEpsilon = 1e-9;
};

inline int cmdEvalNoisy(const EvalNoisyArgs &a, Manifest &m, std::ostream &out, std::ostream &err) {
    namespace fs = std::filesystem;
    for (const auto *p : {&a.circuit, &a.params, &a.dataset, &a.profile}) {
        m.input(*p);
    }
    const Circuit circuit = loadCircuit(a.circuit, err);
    const ParamValues params = loadParams(a.params);
    const EncodedDataset ds = loadDataset(a.dataset);
    const HardwareProfile profile = loadProfile(a.profile);
    if (circuit.numQubits() != ds.width()) {
        throw InputError("circuit has " + std::to_string(circuit.numQubits()) + " qubits but samples have " +
                         std::to_string(ds.width()) + " bits");
    }
    const ReadoutModel readout = a.readoutError ? ReadoutModel::uniform(circuit.numQubits(), *a.readoutError)
                                                : ReadoutModel::forCircuit(profile, circuit);
    const Distribution model = exactDistribution(bindParameters(circuit, params));
    const Distribution data = dataDistribution(ds);
    std::set<BasisIndex> validSet;
    if (!a.validSet.empty()) {
        m.input(a.validSet);
        validSet = loadBitstringSet(a.validSet, ds.width());
    } else {
        validSet = supportOf(data);
    }

    NoisyEvalConfig cfg;
    cfg.repeats = a.repeats;
    cfg.shots = a.shots;
    cfg.seed = a.seed;
    cfg.kl.epsilon = a.klEpsilon;
    const NoisyEvalReport rep = evaluateNoisy(model, data, readout, validSet, cfg);

    m.config()["em"] = a.em;
    m.config()["post_select"] = a.postSelect;
    m.config()["repeats"] = a.repeats;
    m.config()["shots"] = a.shots;
    m.config()["readout_error"] = a.readoutError ? ojson(*a.readoutError) : ojson("profile");
    m.config()["valid_set"] = a.validSet.empty() ? ojson("data-support") : ojson(a.validSet);
    m.config()["kl_epsilon"] = a.klEpsilon;
    m.seed(a.seed);

    // One row per repetition, then mean and std rows.
    std::string csv = "trial,kl_noiseless,kl_raw";
    if (a.em) {
        csv += ",kl_em";
    }
    if (a.postSelect) {
        csv += ",kl_post,retained_fraction";
    }
    csv += "\n";
    auto row = [&](const std::string &label, double noiseless, double raw, double em, double post, double kept) {
        csv += label + "," + formatReal(noiseless) + "," + formatReal(raw);
        if (a.em) {
            csv += "," + formatReal(em);
        }
        if (a.postSelect) {
            csv += "," + formatReal(post) + "," + formatReal(kept);
        }
        csv += "\n";
    };
    for (std::size_t i = 0; i < rep.trials.size(); ++i) {
        const auto &t = rep.trials[i];
        row(std::to_string(i + 1), rep.klNoiseless, t.klRaw, t.klEm, t.klPost, t.retainedFraction);
    }
    row("mean", rep.klNoiseless, rep.klRaw.mean, rep.klEm.mean, rep.klPost.mean, rep.retained.mean);
    row("std", 0.0, rep.klRaw.std, rep.klEm.std, rep.klPost.std, rep.retained.std);

    // Histogram over the union of supports.
    std::vector<std::pair<std::string, const Distribution *>> series{
        {"data", &data}, {"model", &model}, {"noisy", &rep.lastNoisy}};
    if (a.em) {
        series.emplace_back("mitigated", &rep.lastMitigated);
    }
    std::optional<Distribution> selected;
    if (a.postSelect) {
        selected = postSelect(rep.lastNoisy, validSet).distribution;
        series.emplace_back("post_selected", &*selected);
    }
    std::set<BasisIndex> bins;
    for (const auto &[name, d] : series) {
        for (const auto &[idx, p] : d->entries()) {
            bins.insert(idx);
        }
    }
    std::string hist = "bitstring";
    for (const auto &[name, d] : series) {
        hist += "," + name;
    }
    hist += "\n";
    std::vector<std::string> labels;
    static const char *colors[] = {"#4c72b0", "#dd8452", "#c44e52", "#55a868", "#8172b3"};
    std::vector<HistogramSeries> svgSeries;
    for (std::size_t s = 0; s < series.size(); ++s) {
        svgSeries.push_back({series[s].first, colors[s % 5], {}});
    }
    for (BasisIndex b : bins) {
        labels.push_back(toBitstring(b, ds.width()));
        hist += labels.back();
        for (std::size_t s = 0; s < series.size(); ++s) {
            const double p = series[s].second->mass(b);
            hist += "," + formatReal(p);
            svgSeries[s].values.push_back(p);
        }
        hist += "\n";
    }

    const fs::path dir(a.outDir);
    emit(m, dir / "metrics.csv", csv);
    emit(m, dir / "histogram.csv", hist);
    emit(m, dir / "histogram.svg", svgHistogram("Data vs. model distribution", labels, svgSeries));
    writeFileAtomic(dir / "manifest.json", m.render());

    char buf[256];
    std::snprintf(buf, sizeof buf, "kl_noiseless %.6f\nkl_raw %.6f +- %.6f\n", rep.klNoiseless, rep.klRaw.mean,
                  rep.klRaw.std);
    out << buf;
    if (a.em) {
        std::snprintf(buf, sizeof buf, "kl_em %.6f +- %.6f\n", rep.klEm.mean, rep.klEm.std);
        out << buf;
    }
    if (a.postSelect) {
        std::snprintf(buf, sizeof buf, "kl_post %.6f +- %.6f (retained %.4f)\n", rep.klPost.mean, rep.klPost.std,
                      rep.retained.mean);
        out << buf;
    }
    return kExitOk;
}

struct ProfileArgs {
    std::string topology = "linear", out;
    std::size_t qubits = 12, maxDepth = 100;
    double readoutError = 0.02;
};

inline int cmdProfile(const ProfileArgs &a, Manifest &m, std::ostream &out) {
    const HardwareProfile p = a.topology == "ring" ? ringProfile(a.qubits, a.readoutError, a.maxDepth)
                                                   : linearProfile(a.qubits, a.readoutError, a.maxDepth);
    m.config()["topology"] = a.topology;
    m.config()["qubits"] = a.qubits;
    m.config()["readout_error"] = a.readoutError;
    m.config()["max_depth"] = a.maxDepth;
    emit(m, a.out, profileToJson(p).dump(2) + "\n");
    writeFileAtomic(a.out + ".manifest.json", m.render());
    out << "wrote " << a.topology << " profile with " << a.qubits << " qubits -> " << a.out << "\n";
    return kExitOk;
}

/// Manifest argv with every occurrence of `flag` replaced by `flag value`.
[[nodiscard]] inline std::vector<std::string> withOutput(const std::vector<std::string> &argv,
                                                         const std::string &flag, const std::string &value) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < argv.size(); ++i) {
        if (argv[i] == flag) {
            ++i;
            continue;
        }
        if (argv[i].rfind(flag + "=", 0) == 0) {
            continue;
        }
        out.push_back(argv[i]);
    }
    out.push_back(flag);
    out.push_back(value);
    return out;
}

} // namespace cli

inline int runCli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err,
                  const CliEnv &env = {});

namespace cli {

inline int cmdRerun(const std::string &manifestPath, const std::string &outOverride, std::ostream &out,
                    std::ostream &err, const CliEnv &env) {
    nlohmann::json j = nlohmann::json::parse(readFile(manifestPath), nullptr, false);
    if (j.is_discarded() || !j.contains("argv") || !j["argv"].is_array() || j["argv"].empty()) {
        throw InputError("not a run manifest: " + manifestPath);
    }
    std::vector<std::string> argv = j["argv"].get<std::vector<std::string>>();
    if (argv.front() == "rerun") {
        throw InputError("manifest records a rerun; point at the original manifest");
    }
    if (!outOverride.empty()) {
        argv = withOutput(argv, j.value("output_flag", std::string("--out-dir")), outOverride);
    }
    return runCli(argv, out, err, env);
}

} // namespace cli

/**
 * Parses `args` (without the program name) and runs one subcommand.
 * Flags override values from `--config` (TOML/INI), which override defaults.
 */
inline int runCli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err, const CliEnv &env) {
    CLI::App app{"Hardware-aware quantum circuit Born machine toolkit", "qcbm"};
    app.set_version_flag("--version", kToolVersion);
    app.set_config("--config", "", "TOML or INI file with option defaults");
    app.require_subcommand(1);

    cli::EncodeArgs enc;
    auto *encode = app.add_subcommand("encode", "Discretize CSV columns into a binary dataset file");
    encode->add_option("--csv", enc.csv, "input CSV with a header row")->required()->check(CLI::ExistingFile);
    encode->add_option("--columns", enc.columns, "columns to encode, in order")->required()->delimiter(',');
    encode->add_option("--bits", enc.bits, "bits per feature")->capture_default_str();
    encode->add_flag("--differencing,!--no-differencing", enc.differencing,
                     "encode day-over-day differences (default) or raw levels");
    encode->add_option("--out", enc.out, "dataset file to write")->required();

    cli::TrainArgs tr;
    auto *trainCmd = app.add_subcommand("train", "Train a circuit (or the TwoLocal baseline) with MMD loss");
    auto *circuitOpt = trainCmd->add_option("--circuit", tr.circuit, "circuit DSL file")->check(CLI::ExistingFile);
    auto *baselineOpt = trainCmd->add_option("--baseline", tr.baseline, "built-in ansatz: two-local");
    circuitOpt->excludes(baselineOpt);
    trainCmd->add_option("--reps", tr.reps, "TwoLocal repetitions")->capture_default_str();
    trainCmd->add_option("--dataset", tr.dataset, "dataset file")->required()->check(CLI::ExistingFile);
    trainCmd->add_option("--profile", tr.profile, "hardware profile to validate against")
        ->check(CLI::ExistingFile);
    trainCmd->add_option("--out-dir", tr.outDir, "output directory")->required();
    tr.train.attach(*trainCmd);

    cli::SearchArgs se;
    auto *searchCmd = app.add_subcommand("search", "Iterative hardware-aware ansatz search");
    searchCmd->add_option("--profile", se.profile, "hardware profile JSON")->required()->check(CLI::ExistingFile);
    searchCmd->add_option("--dataset", se.dataset, "dataset file")->required()->check(CLI::ExistingFile);
    searchCmd->add_option("--proposer", se.proposer, "llm | mock")
        ->check(CLI::IsMember({"llm", "mock"}))
        ->capture_default_str();
    searchCmd->add_option("--rounds", se.rounds, "search rounds")->capture_default_str();
    searchCmd->add_option("--max-depth", se.maxDepth, "depth budget (0: profile's max_depth)")
        ->capture_default_str();
    searchCmd->add_option("--retries", se.retries, "re-prompts per round after unusable output")
        ->capture_default_str();
    searchCmd->add_flag("--warm-start", se.warmStart, "reuse trained angles of same-named parameters");
    searchCmd->add_option("--llm-timeout", se.llmTimeout, "LLM request timeout in seconds")->capture_default_str();
    searchCmd->add_option("--llm-retries", se.llmRetries, "LLM transport retries")->capture_default_str();
    searchCmd->add_option("--out-dir", se.outDir, "run directory")->required();
    se.train.attach(*searchCmd);

    cli::EvalNoisyArgs ev;
    auto *evalCmd = app.add_subcommand("eval-noisy", "Score a trained circuit under emulated readout noise");
    evalCmd->add_option("--circuit", ev.circuit, "circuit DSL file")->required()->check(CLI::ExistingFile);
    evalCmd->add_option("--params", ev.params, "trained parameter file")->required()->check(CLI::ExistingFile);
    evalCmd->add_option("--dataset", ev.dataset, "dataset file")->required()->check(CLI::ExistingFile);
    evalCmd->add_option("--profile", ev.profile, "hardware profile with readout errors")
        ->required()
        ->check(CLI::ExistingFile);
    evalCmd->add_flag("--em", ev.em, "report tensored measurement-error mitigation");
    evalCmd->add_flag("--post-select", ev.postSelect, "report post-selection onto valid bitstrings");
    evalCmd->add_option("--valid-set", ev.validSet, "file of valid bitstrings (default: data support)")
        ->check(CLI::ExistingFile);
    evalCmd->add_option("--repeats", ev.repeats, "seeded repetitions")->capture_default_str();
    evalCmd->add_option("--shots", ev.shots, "shots per repetition")->capture_default_str();
    evalCmd->add_option("--seed", ev.seed, "random seed")->capture_default_str();
    evalCmd->add_option("--readout-error", ev.readoutError, "override: uniform e01 = e10 on every qubit")
        ->check(CLI::Range(0.0, 0.5));
    evalCmd->add_option("--kl-epsilon", ev.klEpsilon, "smoothing of the data distribution in KL")
        ->capture_default_str();
    evalCmd->add_option("--out-dir", ev.outDir, "output directory")->required();

    cli::ProfileArgs pr;
    auto *profileCmd = app.add_subcommand("profile", "Write a synthetic hardware profile");
    profileCmd->add_option("--topology", pr.topology, "linear | ring")
        ->check(CLI::IsMember({"linear", "ring"}))
        ->capture_default_str();
    profileCmd->add_option("--qubits", pr.qubits, "number of qubits")->capture_default_str();
    profileCmd->add_option("--readout-error", pr.readoutError, "e01 = e10 on every qubit")
        ->check(CLI::Range(0.0, 0.5))
        ->capture_default_str();
    profileCmd->add_option("--max-depth", pr.maxDepth, "depth budget")->capture_default_str();
    profileCmd->add_option("--out", pr.out, "profile JSON to write")->required();

    std::string manifestPath, rerunOut;
    auto *rerunCmd = app.add_subcommand("rerun", "Re-execute the command recorded in a manifest");
    rerunCmd->add_option("manifest", manifestPath, "manifest.json of an earlier run")
        ->required()
        ->check(CLI::ExistingFile);
    rerunCmd->add_option("--out", rerunOut, "write outputs here instead of the recorded location");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (encode->parsed()) {
            cli::Manifest m("encode", args, "--out");
            return cli::cmdEncode(enc, m, out);
        }
        if (trainCmd->parsed()) {
            if (tr.circuit.empty() && tr.baseline.empty()) {
                throw InputError("train needs --circuit or --baseline two-local");
            }
            cli::Manifest m("train", args, "--out-dir");
            return cli::cmdTrain(tr, m, out, err);
        }
        if (searchCmd->parsed()) {
            cli::Manifest m("search", args, "--out-dir");
            return cli::cmdSearch(se, m, env, out);
        }
        if (evalCmd->parsed()) {
            cli::Manifest m("eval-noisy", args, "--out-dir");
            return cli::cmdEvalNoisy(ev, m, out, err);
        }
        if (profileCmd->parsed()) {
            cli::Manifest m("profile", args, "--out");
            return cli::cmdProfile(pr, m, out);
        }
        if (rerunCmd->parsed()) {
            return cli::cmdRerun(manifestPath, rerunOut, out, err, env);
        }
    } catch (const ConfigError &e) {
        err << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const InputError &e) {
        err << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::invalid_argument &e) {
        err << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const nlohmann::json::exception &e) {
        err << "input error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}

} // namespace qcbm
