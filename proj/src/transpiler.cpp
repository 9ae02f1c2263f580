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
#include <deltaedge/transpiler.hpp>

#include <cmath>
#include <optional>
#include <sstream>

namespace deltaedge::fogml {

FeatureIndexError::FeatureIndexError(std::uint32_t node, std::uint32_t feature, std::size_t dimension)
    : ProgramError("node " + std::to_string(node) + " tests feature " + std::to_string(feature)
                   + " but the input has " + std::to_string(dimension) + " features"),
      node_(node), feature_(feature), dimension_(dimension) {}

void DecisionProgram::validate() const {
    if (nodes.empty()) throw ProgramError("program has no nodes");
    if (root >= nodes.size()) throw ProgramError("root " + std::to_string(root) + " out of range");
    std::vector<bool> seen(nodes.size(), false);
    std::vector<std::uint32_t> stack{root};
    std::size_t visited = 0;
    while (!stack.empty()) {
        const std::uint32_t id = stack.back();
        stack.pop_back();
        if (id >= nodes.size()) throw ProgramError("child id " + std::to_string(id) + " out of range");
        if (seen[id]) throw ProgramError("node " + std::to_string(id) + " is reached twice (cycle or shared child)");
        seen[id] = true;
        ++visited;
        if (const auto* test = std::get_if<Internal>(&nodes[id])) {
            if (!std::isfinite(test->threshold)) throw ProgramError("node " + std::to_string(id) + " has a non-finite threshold");
            stack.push_back(test->right);
            stack.push_back(test->left);
        } else if (std::get<Leaf>(nodes[id]).label < 0) {
            throw ProgramError("leaf " + std::to_string(id) + " has a negative label");
        }
    }
    if (visited != nodes.size()) throw ProgramError("program has unreachable nodes");
}

std::size_t DecisionProgram::internal_count() const {
    std::size_t n = 0;
    for (const auto& node : nodes) n += std::holds_alternative<Internal>(node) ? 1 : 0;
    return n;
}

std::size_t DecisionProgram::leaf_count() const { return nodes.size() - internal_count(); }

DecisionProgram lower_tree(const learn::DecisionTree& tree) {
    DecisionProgram program;
    program.nodes.reserve(tree.nodes().size());
    for (const auto& node : tree.nodes()) {
        if (node.is_leaf()) {
            program.nodes.emplace_back(DecisionProgram::Leaf{node.label});
        } else {
            program.nodes.emplace_back(DecisionProgram::Internal{static_cast<std::uint32_t>(node.feature),
                                                                 node.threshold, node.left, node.right});
        }
    }
    program.root = 0;
    return program;
}

DecisionProgram lower_tree(const learn::ModelSnapshot& model) {
    const auto* tree = std::get_if<learn::DecisionTree>(&model.parameters);
    if (tree == nullptr) {
        throw ProgramError("cannot lower a " + std::string(learn::to_string(model.kind())) + " model to a decision program");
    }
    return lower_tree(*tree);
}

Label interpret(const DecisionProgram& program, std::span<const double> features) {
    std::uint32_t id = program.root;
    // a well-formed program reaches a leaf in at most nodes.size() steps
    for (std::size_t steps = 0; steps <= program.nodes.size(); ++steps) {
        if (id >= program.nodes.size()) throw ProgramError("jump to node " + std::to_string(id) + " out of range");
        const auto& node = program.nodes[id];
        if (const auto* leaf = std::get_if<DecisionProgram::Leaf>(&node)) return leaf->label;
        const auto& test = std::get<DecisionProgram::Internal>(node);
        if (test.feature >= features.size()) throw FeatureIndexError(id, test.feature, features.size());
        id = features[test.feature] <= test.threshold ? test.left : test.right;
    }
    throw ProgramError("program does not terminate");
}

namespace {

constexpr std::size_t kCommentColumn = 48;

class CEmitter {
  public:
    explicit CEmitter(const DecisionProgram& program) : program_(program) {}

    std::string run() {
        out_ << "int predict(float* x){\n";
        node(program_.root, 1);
        out_ << "}\n";
        return out_.str();
    }

  private:
    void line(std::size_t depth, const std::string& code, std::optional<std::uint32_t> node_id = std::nullopt) {
        std::string text = std::string(2 * depth, ' ') + code;
        if (node_id) {
            text += std::string(text.size() < kCommentColumn ? kCommentColumn - text.size() : 1, ' ');
            text += "//node = " + std::to_string(*node_id);
        }
        out_ << text << '\n';
    }

    void node(std::uint32_t id, std::size_t depth) {
        const auto& n = program_.nodes[id];
        if (const auto* leaf = std::get_if<DecisionProgram::Leaf>(&n)) {
            line(depth, "return " + std::to_string(leaf->label) + ";");
            return;
        }
        const auto& test = std::get<DecisionProgram::Internal>(n);
        line(depth, "if (x[" + std::to_string(test.feature) + "] <= " + text::format_double(test.threshold) + ") {", id);
        node(test.left, depth + 1);
        line(depth, "} else {");
        node(test.right, depth + 1);
        line(depth, "}");
    }

    const DecisionProgram& program_;
    std::ostringstream out_;
};

}// namespace

EmittedSource emit_c(const DecisionProgram& program) {
    program.validate();
    EmittedSource source;
    source.text = CEmitter(program).run();
    source.size_bytes = source.text.size();
    return source;
}

SizeReport report_sizes(const learn::ModelSnapshot& model, const DecisionProgram& program, const EmittedSource& source) {
    const auto* tree = std::get_if<learn::DecisionTree>(&model.parameters);
    if (tree == nullptr || tree->nodes().size() != program.nodes.size()) {
        throw ProgramError("model and program do not come from the same tree");
    }
    if (source.size_bytes != source.text.size()) throw ProgramError("emitted source size is stale");
    return SizeReport{learn::serialize(model).size(), source.size_bytes};
}

std::string to_json(const SizeReport& report) {
    return "{ \"model_bytes\": " + std::to_string(report.model_bytes) + ", \"source_bytes\": "
           + std::to_string(report.source_bytes) + " }\n";
}

}// namespace deltaedge::fogml
