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
// Writes a seeded two-regime weather table (with a few gaps) as CSV.
// Usage: make_weather_csv [rows] [seed] > weather.csv

#include "qcbm/synthetic.hpp"

#include <cstdio>
#include <cstdlib>

int main(int argc, char **argv) {
    const std::size_t rows = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 500;
    const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 11;
    qcbm::Rng rng(seed);
    std::printf("day,temperature,humidity,wind\n");
    for (std::size_t d = 0; d < rows; ++d) {
        const bool humid = rng.uniform01() < 0.4;
        const double temperature = (humid ? 27.0 : 14.0) + 3.0 * qcbm::standardNormal(rng);
        const double humidity = (humid ? 82.0 : 48.0) + 6.0 * qcbm::standardNormal(rng);
        const double wind = 4.0 + 1.5 * qcbm::standardNormal(rng);
        if (rng.below(50) == 0) {
            std::printf("%zu,%.1f,,%.1f\n", d + 1, temperature, wind);
        } else {
            std::printf("%zu,%.1f,%.1f,%.1f\n", d + 1, temperature, humidity, wind);
        }
    }
    return 0;
}
