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
 * Circuit DSL: the JSON document exchanged with proposers.
 *
 *   {
 *     "qubits": [3, 4, 5],                       physical qubits, in wire order
 *     "gates": [
 *       {"name": "rx", "qubits": [3], "param": "a0"},
 *       {"name": "cz", "qubits": [3, 4]}
 *     ],
 *     "params": ["a0"]                           every parameter, exactly once
 *   }
 *
 * Wire k of the resulting Circuit is physical qubit qubits[k] and is measured
 * into bit k. Gate names outside the closed set are reported as warnings and
 * kept, so validate() can flag them as unknown-gate; everything else that
 * breaks the schema is an error and yields no circuit.
 */
#pragma once

#include "circuit.hpp"
#include "json_reader.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace qcbm {

struct DslDiagnostic {
    enum class Severity { Error, Warning };
    Severity severity = Severity::Error;
    json::SourcePos pos;
    std::string path; ///< JSON pointer of the offending value, "" for the document
    std::string message;

    [[nodiscard]] std::string format() const {
        std::ostringstream out;
        out << (severity == Severity::Error ? "error" : "warning") << " at byte " << pos.offset << " (line "
            << pos.line << ", column " << pos.column << ")";
        if (!path.empty()) {
            out << " " << path;
        }
        out << ": " << message;
        return out.str();
    }
};

struct DslParseResult {
    std::optional<Circuit> circuit;
    std::vector<DslDiagnostic> diagnostics;

    [[nodiscard]] bool ok() const { return circuit.has_value(); }

    [[nodiscard]] std::vector<DslDiagnostic> errors() const {
        std::vector<DslDiagnostic> out;
        for (const auto &d : diagnostics) {
            if (d.severity == DslDiagnostic::Severity::Error) {
                out.push_back(d);
            }
        }
        return out;
    }

    [[nodiscard]] std::string describe() const {
        std::string out;
        for (const auto &d : diagnostics) {
            out += d.format() + "\n";
        }
        return out;
    }
};

namespace detail {

class DslChecker {
  public:
    explicit DslChecker(std::string_view text) : text_(text) {}

    DslParseResult check(const json::Value &doc) {
        DslParseResult result;
        buildCircuit(doc, result);
        result.diagnostics = std::move(diags_);
        if (std::any_of(result.diagnostics.begin(), result.diagnostics.end(),
                        [](const DslDiagnostic &d) { return d.severity == DslDiagnostic::Severity::Error; })) {
            result.circuit.reset();
        }
        return result;
    }

  private:
    void report(std::size_t offset, std::string path, std::string message,
                DslDiagnostic::Severity sev = DslDiagnostic::Severity::Error) {
        diags_.push_back({sev, json::positionAt(text_, offset), std::move(path), std::move(message)});
    }

    bool expectType(const json::Value &v, json::Type t, const std::string &path) {
        if (v.type != t) {
            report(v.offset, path,
                   "expected " + std::string(json::typeName(t)) + ", found " + std::string(json::typeName(v.type)));
            return false;
        }
        return true;
    }

    std::optional<std::size_t> index(const json::Value &v, const std::string &path) {
        if (!expectType(v, json::Type::Number, path)) {
            return std::nullopt;
        }
        if (!(v.number >= 0.0) || v.number > 1e6 || std::floor(v.number) != v.number ||
            v.text.find_first_of(".eE") != std::string::npos) {
            report(v.offset, path, "qubit index must be a nonnegative integer, found " + v.text);
            return std::nullopt;
        }
        return static_cast<std::size_t>(v.number);
    }

    void checkKeys(const json::Value &obj, const std::string &path, std::initializer_list<std::string_view> allowed,
                   std::initializer_list<std::string_view> required) {
        for (const auto &[key, offset] : obj.keys) {
            if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
                report(offset, path + "/" + key, "unknown field \"" + key + "\"");
            }
        }
        for (auto key : required) {
            if (obj.find(key) == nullptr) {
                report(obj.offset, path, "missing required field \"" + std::string(key) + "\"");
            }
        }
    }

    void buildCircuit(const json::Value &doc, DslParseResult &result) {
        if (!expectType(doc, json::Type::Object, "")) {
            return;
        }
        checkKeys(doc, "", {"qubits", "gates", "params"}, {"qubits", "gates", "params"});

        // Declared physical qubits -> wire index.
        std::map<std::size_t, std::size_t> wireOf;
        std::vector<std::size_t> layout;
        if (const auto *qs = doc.find("qubits"); qs && expectType(*qs, json::Type::Array, "/qubits")) {
            if (qs->items.empty()) {
                report(qs->offset, "/qubits", "at least one qubit must be declared");
            }
            for (std::size_t i = 0; i < qs->items.size(); ++i) {
                const std::string path = "/qubits/" + std::to_string(i);
                if (auto q = index(qs->items[i], path)) {
                    if (!wireOf.emplace(*q, layout.size()).second) {
                        report(qs->items[i].offset, path, "qubit " + std::to_string(*q) + " declared twice");
                    } else {
                        layout.push_back(*q);
                    }
                }
            }
        }

        std::set<std::string> declared;
        if (const auto *ps = doc.find("params"); ps && expectType(*ps, json::Type::Array, "/params")) {
            for (std::size_t i = 0; i < ps->items.size(); ++i) {
                const auto &p = ps->items[i];
                const std::string path = "/params/" + std::to_string(i);
                if (!expectType(p, json::Type::String, path)) {
                    continue;
                }
                if (p.text.empty()) {
                    report(p.offset, path, "parameter name must not be empty");
                } else if (!declared.insert(p.text).second) {
                    report(p.offset, path, "parameter \"" + p.text + "\" declared twice");
                } else {
                    declaredAt_[p.text] = {p.offset, path};
                }
            }
        }

        std::vector<Gate> gates;
        std::set<std::string> used;
        const auto *gs = doc.find("gates");
        if (gs && expectType(*gs, json::Type::Array, "/gates")) {
            for (std::size_t i = 0; i < gs->items.size(); ++i) {
                if (auto g = buildGate(gs->items[i], "/gates/" + std::to_string(i), wireOf, declared)) {
                    if (g->param) {
                        used.insert(*g->param);
                    }
                    gates.push_back(std::move(*g));
                }
            }
        }
        for (const auto &[name, where] : declaredAt_) {
            if (used.count(name) == 0) {
                report(where.first, where.second, "parameter \"" + name + "\" is declared but never used");
            }
        }
        if (errorCount() == 0) {
            try {
                result.circuit = Circuit(layout.size(), std::move(gates), layout);
            } catch (const std::invalid_argument &e) {
                report(doc.offset, "", e.what());
            }
        }
    }

    std::optional<Gate> buildGate(const json::Value &v, const std::string &path,
                                  const std::map<std::size_t, std::size_t> &wireOf,
                                  const std::set<std::string> &declared) {
        if (!expectType(v, json::Type::Object, path)) {
            return std::nullopt;
        }
        const std::size_t before = errorCount();
        checkKeys(v, path, {"name", "qubits", "param"}, {"name", "qubits"});
        Gate g;
        const auto *name = v.find("name");
        if (name && expectType(*name, json::Type::String, path + "/name")) {
            g.name = name->text;
            g.kind = gateKindFromName(g.name);
            if (g.kind == GateKind::Unknown) {
                report(name->offset, path + "/name", "unknown gate \"" + g.name + "\"",
                       DslDiagnostic::Severity::Warning);
            }
        }
        if (const auto *qs = v.find("qubits"); qs && expectType(*qs, json::Type::Array, path + "/qubits")) {
            std::set<std::size_t> seen;
            for (std::size_t k = 0; k < qs->items.size(); ++k) {
                const std::string qpath = path + "/qubits/" + std::to_string(k);
                auto q = index(qs->items[k], qpath);
                if (!q) {
                    continue;
                }
                auto it = wireOf.find(*q);
                if (it == wireOf.end()) {
                    report(qs->items[k].offset, qpath, "qubit " + std::to_string(*q) + " is not declared in \"qubits\"");
                } else if (!seen.insert(*q).second) {
                    report(qs->items[k].offset, qpath, "qubit " + std::to_string(*q) + " repeated within one gate");
                } else {
                    g.qubits.push_back(it->second);
                }
            }
            if (qs->items.empty()) {
                report(qs->offset, path + "/qubits", "gate acts on no qubits");
            } else if (g.kind != GateKind::Unknown && qs->items.size() != gateArity(g.kind)) {
                report(qs->offset, path + "/qubits",
                       "gate \"" + g.name + "\" takes " + std::to_string(gateArity(g.kind)) + " qubit(s), found " +
                           std::to_string(qs->items.size()));
            }
        }
        const auto *param = v.find("param");
        if (param && expectType(*param, json::Type::String, path + "/param")) {
            if (declared.count(param->text) == 0) {
                report(param->offset, path + "/param", "parameter \"" + param->text + "\" is not declared in \"params\"");
            } else {
                g.param = param->text;
            }
        }
        if (g.kind != GateKind::Unknown && name) {
            if (isRotation(g.kind) && !param) {
                report(v.offset, path, "rotation \"" + g.name + "\" requires a \"param\"");
            } else if (!isRotation(g.kind) && param) {
                report(param->offset, path + "/param", "gate \"" + g.name + "\" does not take a parameter");
            }
        }
        if (errorCount() != before) {
            return std::nullopt;
        }
        return g;
    }

    std::size_t errorCount() const {
        return static_cast<std::size_t>(std::count_if(diags_.begin(), diags_.end(), [](const DslDiagnostic &d) {
            return d.severity == DslDiagnostic::Severity::Error;
        }));
    }

    std::string_view text_;
    std::vector<DslDiagnostic> diags_;
    std::map<std::string, std::pair<std::size_t, std::string>> declaredAt_;
};

} // namespace detail

/// Upper bound on candidate '{' positions tried when lifting a document out of prose.
inline constexpr std::size_t kMaxDslCandidates = 32;

/**
 * Tolerant extraction plus strict parse. Scans the text for '{', parses a JSON
 * value at each candidate, and takes the first object carrying "gates" (or
 * both "qubits" and "params") as the document. Code fences and prose around it are thereby
 * ignored. If no candidate parses, the earliest syntax error is reported.
 */
[[nodiscard]] inline DslParseResult parseDsl(std::string_view text) {
    std::optional<DslDiagnostic> firstSyntax;
    std::size_t tried = 0;
    std::size_t from = 0;
    while (tried < kMaxDslCandidates) {
        const std::size_t start = text.find('{', from);
        if (start == std::string_view::npos) {
            break;
        }
        ++tried;
        const auto outcome = json::parseValueAt(text, start);
        if (!outcome.value) {
            if (!firstSyntax) {
                firstSyntax = DslDiagnostic{DslDiagnostic::Severity::Error,
                                            json::positionAt(text, outcome.error->offset), "",
                                            "malformed JSON: " + outcome.error->message};
            }
            from = start + 1;
            continue;
        }
        const json::Value &doc = *outcome.value;
        if (doc.find("gates") != nullptr || (doc.find("qubits") != nullptr && doc.find("params") != nullptr)) {
            return detail::DslChecker(text).check(doc);
        }
        from = outcome.end; // nested objects of a non-DSL value are not candidates
    }
    DslParseResult result;
    if (firstSyntax) {
        result.diagnostics.push_back(*firstSyntax);
    } else {
        result.diagnostics.push_back({DslDiagnostic::Severity::Error, json::positionAt(text, text.size()), "",
                                      "no circuit document found (expected a JSON object with \"qubits\", "
                                      "\"gates\" and \"params\")"});
    }
    return result;
}

/// Canonical text form; parseDsl(serializeDsl(c)) reproduces c.
[[nodiscard]] inline std::string serializeDsl(const Circuit &c) {
    auto quote = [](const std::string &s) { return nlohmann::json(s).dump(); };
    std::string out = "{\n  \"qubits\": [";
    for (std::size_t i = 0; i < c.physicalQubits().size(); ++i) {
        out += (i ? ", " : "") + std::to_string(c.physicalQubits()[i]);
    }
    out += "],\n  \"gates\": [";
    for (std::size_t i = 0; i < c.gates().size(); ++i) {
        const Gate &g = c.gates()[i];
        out += i ? ",\n    " : "\n    ";
        out += "{\"name\": " + quote(g.name) + ", \"qubits\": [";
        for (std::size_t k = 0; k < g.qubits.size(); ++k) {
            out += (k ? ", " : "") + std::to_string(c.physicalQubits()[g.qubits[k]]);
        }
        out += "]";
        if (g.param) {
            out += ", \"param\": " + quote(*g.param);
        }
        out += "}";
    }
    out += c.gates().empty() ? "],\n" : "\n  ],\n";
    out += "  \"params\": [";
    for (std::size_t i = 0; i < c.paramNames().size(); ++i) {
        out += (i ? ", " : "") + quote(c.paramNames()[i]);
    }
    out += "]\n}\n";
    return out;
}

/// Grammar text embedded in prompts and docs.
inline constexpr std::string_view kDslGrammar =
    R"(Circuit document (JSON, no comments):
{
  "qubits": [<int>, ...],            // physical qubits used, in measurement order; bit k of the sample is qubits[k]
  "gates": [
    {"name": <gate>, "qubits": [<int>, ...], "param": <string>}, ...
  ],
  "params": [<string>, ...]          // every parameter name, each declared exactly once and used at least once
}
<gate> is one of: rx, ry, rz (one qubit, "param" required), x, sx, h (one qubit, no "param"),
cz, cx (two qubits, no "param"; cx controls on the first qubit).
Every gate qubit must appear in "qubits". Unknown fields are rejected.)";

} // namespace qcbm
