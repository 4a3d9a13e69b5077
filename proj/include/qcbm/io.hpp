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
 * File helpers: atomic writes, content hashing and SVG histograms.
 */
#pragma once

#include "common.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <unistd.h>

namespace qcbm {

[[nodiscard]] inline std::string readFile(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open file: " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/**
 * Writes to a sibling temporary file and renames it over `path`, so readers
 * never observe a partial file. Parent directories are created.
 */
inline void writeFileAtomic(const std::filesystem::path &path, std::string_view content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw InputError("cannot write file: " + tmp.string());
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw InputError("write failed: " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw InputError("cannot move " + tmp.string() + " into place: " + ec.message());
    }
}

/// 64-bit FNV-1a, printed as 16 hex digits.
[[nodiscard]] inline std::string fnv1a64Hex(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

struct HistogramSeries {
    std::string label;
    std::string color;
    std::vector<double> values; ///< one per bin
};

/**
 * Grouped bar chart of several series over shared bins. Bins are labelled
 * along the x axis when there are few enough to read.
 */
[[nodiscard]] inline std::string svgHistogram(const std::string &title, const std::vector<std::string> &bins,
                                              const std::vector<HistogramSeries> &series) {
    const double width = 960;
    const double height = 420;
    const double left = 60;
    const double right = 20;
    const double top = 40;
    const double bottom = 70;
    double maxValue = 0.0;
    for (const auto &s : series) {
        for (double v : s.values) {
            maxValue = std::max(maxValue, v);
        }
    }
    if (!(maxValue > 0.0)) {
        maxValue = 1.0;
    }
    const double plotW = width - left - right;
    const double plotH = height - top - bottom;
    const double groupW = bins.empty() ? plotW : plotW / static_cast<double>(bins.size());
    const double barW = series.empty() ? groupW : groupW * 0.85 / static_cast<double>(series.size());

    std::ostringstream svg;
    svg.setf(std::ios::fixed);
    svg.precision(2);
    svg << R"(<svg xmlns="http://www.w3.org/2000/svg" width=")" << width << R"(" height=")" << height
        << R"(" font-family="sans-serif" font-size="11">)" << '\n';
    svg << R"(<rect width="100%" height="100%" fill="white"/>)" << '\n';
    svg << R"(<text x=")" << width / 2 << R"(" y="22" text-anchor="middle" font-size="14">)" << title
        << "</text>\n";
    svg << R"(<line x1=")" << left << R"(" y1=")" << top + plotH << R"(" x2=")" << left + plotW << R"(" y2=")"
        << top + plotH << R"(" stroke="black"/>)" << '\n';
    svg << R"(<line x1=")" << left << R"(" y1=")" << top << R"(" x2=")" << left << R"(" y2=")" << top + plotH
        << R"(" stroke="black"/>)" << '\n';
    for (int tick = 0; tick <= 4; ++tick) {
        const double v = maxValue * tick / 4.0;
        const double y = top + plotH - plotH * tick / 4.0;
        svg << R"(<text x=")" << left - 6 << R"(" y=")" << y + 4 << R"(" text-anchor="end">)";
        svg.precision(3);
        svg << v;
        svg.precision(2);
        svg << "</text>\n";
    }
    for (std::size_t s = 0; s < series.size(); ++s) {
        for (std::size_t b = 0; b < series[s].values.size() && b < bins.size(); ++b) {
            const double h = plotH * series[s].values[b] / maxValue;
            const double x = left + groupW * static_cast<double>(b) + groupW * 0.075 + barW * static_cast<double>(s);
            svg << R"(<rect x=")" << x << R"(" y=")" << top + plotH - h << R"(" width=")" << barW
                << R"(" height=")" << h << R"(" fill=")" << series[s].color << R"("/>)" << '\n';
        }
        const double lx = left + 10 + 160 * static_cast<double>(s);
        svg << R"(<rect x=")" << lx << R"(" y=")" << height - 22 << R"(" width="12" height="12" fill=")"
            << series[s].color << R"("/>)" << '\n';
        svg << R"(<text x=")" << lx + 16 << R"(" y=")" << height - 12 << R"(">)" << series[s].label
            << "</text>\n";
    }
    if (bins.size() <= 64) {
        for (std::size_t b = 0; b < bins.size(); ++b) {
            const double x = left + groupW * (static_cast<double>(b) + 0.5);
            svg << R"(<text x=")" << x << R"(" y=")" << top + plotH + 12 << R"(" text-anchor="end" transform="rotate(-60 )"
                << x << " " << top + plotH + 12 << R"x()" font-size="9">)x" << bins[b] << "</text>\n";
        }
    }
    svg << "</svg>\n";
    return svg.str();
}

} // namespace qcbm
