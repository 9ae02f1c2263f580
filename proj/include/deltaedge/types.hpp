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
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace deltaedge {

using Label = std::int32_t;
using FeatureVector = std::vector<double>;

/// Predicted label used when no model exists yet (cold start). Always scored as a miss.
inline constexpr Label kAbstain = -1;

/// One sample of a stream: features, ground-truth category and the global stream index.
struct LabeledPoint {
    FeatureVector features;
    Label label = 0;
    std::uint64_t iteration = 0;

    friend bool operator==(const LabeledPoint&, const LabeledPoint&) = default;
};

enum class Pattern { P0, P1, P2 };

std::string_view to_string(Pattern pattern);
Pattern parse_pattern(std::string_view text);

/// Raised for configuration values that violate a documented precondition.
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

}// namespace deltaedge
