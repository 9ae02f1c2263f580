/*
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    https://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/
#include <deltaedge/text.hpp>
#include <deltaedge/types.hpp>

#include <array>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace deltaedge {

std::string_view to_string(Pattern pattern) {
    switch (pattern) {
        case Pattern::P0: return "P0";
        case Pattern::P1: return "P1";
        case Pattern::P2: return "P2";
    }
    return "?";
}

Pattern parse_pattern(std::string_view text) {
    if (text == "P0") return Pattern::P0;
    if (text == "P1") return Pattern::P1;
    if (text == "P2") return Pattern::P2;
    throw ConfigError("unknown pattern '" + std::string(text) + "'");
}

}// namespace deltaedge

namespace deltaedge::text {

std::string format_double(double value) {
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    if (std::isnan(value)) return "nan";
    std::array<char, 64> buffer{};
    const auto result = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
    return {buffer.data(), result.ptr};
}

double parse_double(std::string_view field) {
    if (field == "inf") return HUGE_VAL;
    if (field == "-inf") return -HUGE_VAL;
    double value = 0.0;
    const auto* end = field.data() + field.size();
    const auto result = std::from_chars(field.data(), end, value);
    if (result.ec != std::errc{} || result.ptr != end) {
        throw std::invalid_argument("not a number: '" + std::string(field) + "'");
    }
    return value;
}

long long parse_int(std::string_view field) {
    long long value = 0;
    const auto* end = field.data() + field.size();
    const auto result = std::from_chars(field.data(), end, value);
    if (result.ec != std::errc{} || result.ptr != end) {
        throw std::invalid_argument("not an integer: '" + std::string(field) + "'");
    }
    return value;
}

std::vector<std::string_view> split(std::string_view line, char separator) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(separator, start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

}// namespace deltaedge::text
