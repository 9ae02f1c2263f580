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

#include <deltaedge/transpiler.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace deltaedge::testsupport {

struct ParsedSource {
    fogml::DecisionProgram program;
    /// `//node = k` comment values in source order.
    std::vector<std::uint32_t> comment_ids;
};

/// Reads `int predict(float* x){ ... }` back into a program; throws std::runtime_error on anything else.
ParsedSource parse_c_source(const std::string& text);

/// The 13-node tree of the original embedded example, leaves returning their own node id.
fogml::DecisionProgram reference_program();

}// namespace deltaedge::testsupport
