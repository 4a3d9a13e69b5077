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
 * Uniform fixed-width quantization of multi-feature series into concatenated
 * bitstrings, the inverse mapping, CSV ingestion and the dataset file.
 *
 * A feature with n bits maps x in [min, max] to the level
 *     floor((2^n - 1)(x - min) / (max - min))
 * written MSB-first. Features are concatenated left to right in column order,
 * so feature 0 occupies the leftmost characters (the highest wires).
 */
#pragma once

#include "common.hpp"
#include "simulator.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace qcbm {

struct FeatureSpec {
    std::string name;
    std::size_t bits = 1;
    double min = 0.0;
    double max = 1.0;

    [[nodiscard]] std::uint64_t levels() const { return (std::uint64_t{1} << bits) - 1; }
    [[nodiscard]] bool degenerate() const { return !(max > min); }
    friend bool operator==(const FeatureSpec &, const FeatureSpec &) = default;
};

inline void checkFeature(const FeatureSpec &spec) {
    if (spec.bits == 0 || spec.bits > 32) {
        throw InputError("feature '" + spec.name + "': bits must be in [1, 32]");
    }
    if (!std::isfinite(spec.min) || !std::isfinite(spec.max) || spec.max < spec.min) {
        throw InputError("feature '" + spec.name + "': need finite min <= max");
    }
}

/// Inverse mapping of a level; a degenerate feature decodes to min.
[[nodiscard]] inline double decodeLevel(std::uint64_t level, const FeatureSpec &spec) {
    if (spec.degenerate()) {
        return spec.min;
    }
    return spec.min + static_cast<double>(level) * (spec.max - spec.min) /
                          static_cast<double>(spec.levels());
}

/**
 * Quantization level of x. The floor is taken on the scaled ratio, then
 * nudged up by one if the next level decodes to x within rounding noise of
 * the range, so encode and decode agree on grid points. Degenerate features encode
 * to level 0.
 */
[[nodiscard]] inline std::uint64_t encodeLevel(double x, const FeatureSpec &spec) {
    if (!(x >= spec.min && x <= spec.max)) {
        throw InputError("value " + std::to_string(x) + " outside [" + std::to_string(spec.min) +
                         ", " + std::to_string(spec.max) + "] for feature '" + spec.name + "'");
    }
    if (spec.degenerate()) {
        return 0;
    }
    const double ratio = (x - spec.min) / (spec.max - spec.min);
    auto level = static_cast<std::uint64_t>(std::floor(ratio * static_cast<double>(spec.levels())));
    level = std::min(level, spec.levels());
    const double slack = 1e-12 * (spec.max - spec.min);
    if (level < spec.levels() && decodeLevel(level + 1, spec) <= x + slack) {
        ++level;
    }
    return level;
}

[[nodiscard]] inline std::string levelToBits(std::uint64_t level, std::size_t bits) {
    return toBitstring(level, bits);
}

[[nodiscard]] inline std::string encodeValue(double x, const FeatureSpec &spec) {
    return levelToBits(encodeLevel(x, spec), spec.bits);
}

[[nodiscard]] inline double decodeValue(std::string_view b, const FeatureSpec &spec) {
    if (b.size() != spec.bits) {
        throw InputError("bitstring width " + std::to_string(b.size()) + " does not match feature '" +
                         spec.name + "' (" + std::to_string(spec.bits) + " bits)");
    }
    return decodeLevel(fromBitstring(b), spec);
}

struct EncodedDataset {
    std::vector<FeatureSpec> features;
    std::vector<std::string> samples;
    std::size_t sourceRows = 0;
    bool differencing = true;

    [[nodiscard]] std::size_t width() const {
        std::size_t w = 0;
        for (const auto &f : features) {
            w += f.bits;
        }
        return w;
    }

    /// Bits per feature, in column order.
    [[nodiscard]] std::vector<std::size_t> layout() const {
        std::vector<std::size_t> out;
        for (const auto &f : features) {
            out.push_back(f.bits);
        }
        return out;
    }

    /// Decoded real values of one sample, one per feature.
    [[nodiscard]] std::vector<double> decodeSample(std::string_view sample) const {
        std::vector<double> out;
        std::size_t offset = 0;
        for (const auto &f : features) {
            out.push_back(decodeValue(sample.substr(offset, f.bits), f));
            offset += f.bits;
        }
        return out;
    }

    friend bool operator==(const EncodedDataset &, const EncodedDataset &) = default;
};

/// Empirical distribution of a set of samples (all of equal width).
[[nodiscard]] inline Distribution empiricalDistribution(std::size_t width,
                                                        const std::vector<std::string> &samples) {
    std::map<BasisIndex, std::uint64_t> counts;
    for (const auto &s : samples) {
        if (s.size() != width) {
            throw InputError("sample '" + s + "' does not have width " + std::to_string(width));
        }
        ++counts[fromBitstring(s)];
    }
    return Distribution::fromCounts(width, counts);
}

[[nodiscard]] inline Distribution dataDistribution(const EncodedDataset &ds) {
    return empiricalDistribution(ds.width(), ds.samples);
}

// ---------------------------------------------------------------------------
// CSV ingestion

struct ColumnSpec {
    std::string name;
    std::size_t bits = 4;
};

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) {
        ++b;
    }
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) {
        --e;
    }
    return std::string(s.substr(b, e - b));
}

/// Splits one CSV record; handles double-quoted fields with "" escapes.
inline std::vector<std::string> splitCsvLine(std::string_view line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(trim(cur));
    return fields;
}

inline std::optional<double> parseNumber(const std::string &s) {
    if (s.empty()) {
        return std::nullopt;
    }
    char *end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

} // namespace detail

/**
 * Reads a header-row CSV, keeps the requested numeric columns, drops rows
 * where any requested cell is empty or non-numeric, optionally first-
 * differences each column, then computes per-column min/max and encodes.
 * Non-requested columns (the date column included) are ignored.
 */
[[nodiscard]] inline EncodedDataset ingestCsv(std::istream &in, const std::vector<ColumnSpec> &columns,
                                              bool differencing) {
    if (columns.empty()) {
        throw InputError("no columns requested");
    }
    std::string line;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (!detail::trim(line).empty()) {
            header = detail::splitCsvLine(line);
            break;
        }
    }
    if (header.empty()) {
        throw InputError("CSV has no header row");
    }
    if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) {
        header[0] = header[0].substr(3);
    }
    std::vector<std::size_t> colIndex;
    for (const auto &c : columns) {
        auto it = std::find(header.begin(), header.end(), c.name);
        if (it == header.end()) {
            throw InputError("CSV is missing column '" + c.name + "'");
        }
        if (c.bits == 0 || c.bits > 32) {
            throw InputError("column '" + c.name + "': bits must be in [1, 32]");
        }
        colIndex.push_back(static_cast<std::size_t>(it - header.begin()));
    }

    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (detail::trim(line).empty()) {
            continue;
        }
        const auto fields = detail::splitCsvLine(line);
        std::vector<double> row;
        bool complete = true;
        for (std::size_t idx : colIndex) {
            std::optional<double> v = idx < fields.size() ? detail::parseNumber(fields[idx]) : std::nullopt;
            if (!v) {
                complete = false;
                break;
            }
            row.push_back(*v);
        }
        if (complete) {
            rows.push_back(std::move(row));
        }
    }

    EncodedDataset ds;
    ds.differencing = differencing;
    ds.sourceRows = rows.size();
    if (differencing) {
        if (rows.size() < 2) {
            throw InputError("differencing needs at least 2 complete rows, found " +
                             std::to_string(rows.size()));
        }
        std::vector<std::vector<double>> diffs;
        for (std::size_t r = 1; r < rows.size(); ++r) {
            std::vector<double> d(rows[r].size());
            for (std::size_t c = 0; c < d.size(); ++c) {
                d[c] = rows[r][c] - rows[r - 1][c];
            }
            diffs.push_back(std::move(d));
        }
        rows = std::move(diffs);
    } else if (rows.empty()) {
        throw InputError("CSV has no complete rows");
    }

    for (std::size_t c = 0; c < columns.size(); ++c) {
        FeatureSpec f{columns[c].name, columns[c].bits, rows[0][c], rows[0][c]};
        for (const auto &row : rows) {
            f.min = std::min(f.min, row[c]);
            f.max = std::max(f.max, row[c]);
        }
        ds.features.push_back(f);
    }
    ds.samples.reserve(rows.size());
    for (const auto &row : rows) {
        std::string s;
        for (std::size_t c = 0; c < columns.size(); ++c) {
            s += encodeValue(row[c], ds.features[c]);
        }
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

[[nodiscard]] inline EncodedDataset ingestCsv(const std::string &path, const std::vector<ColumnSpec> &columns,
                                              bool differencing) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open CSV file: " + path);
    }
    return ingestCsv(in, columns, differencing);
}

// ---------------------------------------------------------------------------
// Dataset file
//
//   # qcbm-dataset 1
//   # differencing <0|1>
//   # source_rows <count>
//   # feature <bits> <min> <max> <name>      (one per feature, column order)
//   <bitstring>                             (one per sample)
//
// Reals are written with %.17g so a reload is bit-exact.

[[nodiscard]] inline std::string formatReal(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

[[nodiscard]] inline std::string serializeDataset(const EncodedDataset &ds) {
    std::string out = "# qcbm-dataset 1\n";
    out += "# differencing " + std::string(ds.differencing ? "1" : "0") + "\n";
    out += "# source_rows " + std::to_string(ds.sourceRows) + "\n";
    for (const auto &f : ds.features) {
        out += "# feature " + std::to_string(f.bits) + " " + formatReal(f.min) + " " +
               formatReal(f.max) + " " + f.name + "\n";
    }
    for (const auto &s : ds.samples) {
        out += s;
        out += '\n';
    }
    return out;
}

[[nodiscard]] inline EncodedDataset parseDataset(std::istream &in) {
    EncodedDataset ds;
    std::string line;
    if (!std::getline(in, line) || detail::trim(line) != "# qcbm-dataset 1") {
        throw InputError("dataset file: missing '# qcbm-dataset 1' header");
    }
    bool sawDifferencing = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        if (line[0] == '#') {
            std::istringstream hs(line.substr(1));
            std::string key;
            hs >> key;
            if (key == "differencing") {
                int v = -1;
                hs >> v;
                if (v != 0 && v != 1) {
                    throw InputError("dataset file: bad differencing flag");
                }
                ds.differencing = v == 1;
                sawDifferencing = true;
            } else if (key == "source_rows") {
                hs >> ds.sourceRows;
            } else if (key == "feature") {
                FeatureSpec f;
                std::string minText;
                std::string maxText;
                if (!(hs >> f.bits >> minText >> maxText)) {
                    throw InputError("dataset file: malformed feature line: " + line);
                }
                auto mn = detail::parseNumber(minText);
                auto mx = detail::parseNumber(maxText);
                if (!mn || !mx) {
                    throw InputError("dataset file: malformed feature bounds: " + line);
                }
                f.min = *mn;
                f.max = *mx;
                std::getline(hs, f.name);
                f.name = detail::trim(f.name);
                checkFeature(f);
                ds.features.push_back(f);
            } else {
                throw InputError("dataset file: unknown header key '" + key + "'");
            }
            continue;
        }
        ds.samples.push_back(detail::trim(line));
    }
    if (!sawDifferencing || ds.features.empty()) {
        throw InputError("dataset file: header lacks differencing flag or features");
    }
    const std::size_t w = ds.width();
    for (const auto &s : ds.samples) {
        if (s.size() != w || s.find_first_not_of("01") != std::string::npos) {
            throw InputError("dataset file: sample '" + s + "' is not a " + std::to_string(w) +
                             "-bit string");
        }
    }
    if (ds.samples.empty()) {
        throw InputError("dataset file: no samples");
    }
    return ds;
}

[[nodiscard]] inline EncodedDataset loadDataset(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open dataset file: " + path);
    }
    return parseDataset(in);
}

} // namespace qcbm
