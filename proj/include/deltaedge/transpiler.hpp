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

#include <deltaedge/model.hpp>
#include <deltaedge/types.hpp>

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

/**
 * Lowering of trained decision trees to a small decision-program IR and from there to a C function
 * `int predict(float* x)` for microcontroller firmware.
 */
namespace deltaedge::fogml {

struct DecisionProgram {
    /// `features[feature] <= threshold` continues at `left`, otherwise at `right`.
    struct Internal {
        std::uint32_t feature = 0;
        double threshold = 0.0;
        std::uint32_t left = 0;
        std::uint32_t right = 0;
        friend bool operator==(const Internal&, const Internal&) = default;
    };
    struct Leaf {
        Label label = 0;
        friend bool operator==(const Leaf&, const Leaf&) = default;
    };
    using Node = std::variant<Internal, Leaf>;

    std::vector<Node> nodes;
    std::uint32_t root = 0;

    /// Throws ProgramError unless the nodes form one tree rooted at `root` that covers every node.
    void validate() const;

    std::size_t internal_count() const;
    std::size_t leaf_count() const;

    friend bool operator==(const DecisionProgram&, const DecisionProgram&) = default;
};

class ProgramError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// interpret() met a test on a feature the input does not have.
class FeatureIndexError : public ProgramError {
  public:
    FeatureIndexError(std::uint32_t node, std::uint32_t feature, std::size_t dimension);
    std::uint32_t node() const { return node_; }
    std::uint32_t feature() const { return feature_; }
    std::size_t dimension() const { return dimension_; }

  private:
    std::uint32_t node_;
    std::uint32_t feature_;
    std::size_t dimension_;
};

struct EmittedSource {
    std::string text;
    std::string language_tag = "c";
    std::string entry_symbol = "predict";
    std::size_t size_bytes = 0;
};

/// One IR node per tree node, same preorder ids. Rejects non-tree models.
DecisionProgram lower_tree(const learn::ModelSnapshot& model);
DecisionProgram lower_tree(const learn::DecisionTree& tree);

Label interpret(const DecisionProgram& program, std::span<const double> features);

/// Nested if/else mirroring the program; each test line ends with `//node = <id>`. Thresholds use the
/// shortest decimal form that round-trips to the same double.
EmittedSource emit_c(const DecisionProgram& program);

struct SizeReport {
    std::size_t model_bytes = 0;
    std::size_t source_bytes = 0;
};

SizeReport report_sizes(const learn::ModelSnapshot& model, const DecisionProgram& program, const EmittedSource& source);

/// `{ "model_bytes": n, "source_bytes": m }`
std::string to_json(const SizeReport& report);

}// namespace deltaedge::fogml
