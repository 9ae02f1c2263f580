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
#include <deltaedge/model.hpp>
#include <deltaedge/random.hpp>
#include <deltaedge/transpiler.hpp>

#include "support/c_parse_back.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace deltaedge;
using namespace deltaedge::fogml;

namespace {

learn::ModelSnapshot random_tree_model(Rng& rng, std::size_t n, std::size_t dims, int classes) {
    learn::MovingFrame frame(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        FeatureVector x(dims);
        for (double& v : x) v = rng.uniform(-5, 5);
        frame.push({x, static_cast<Label>(rng.below(static_cast<std::uint64_t>(classes))), i});
    }
    return learn::fit(learn::LearnerKind::decision_tree, frame);
}

std::size_t count_of(const std::string& text, const std::string& token) {
    std::size_t n = 0;
    for (auto pos = text.find(token); pos != std::string::npos; pos = text.find(token, pos + 1)) ++n;
    return n;
}

}// namespace

TEST(Lowering, SingleLeaf) {
    learn::MovingFrame frame(2);
    frame.push({{1.0}, 3, 0});
    const auto program = lower_tree(learn::fit(learn::LearnerKind::decision_tree, frame));
    ASSERT_EQ(program.nodes.size(), 1U);
    EXPECT_EQ(std::get<DecisionProgram::Leaf>(program.nodes[0]).label, 3);
    const auto source = emit_c(program);
    EXPECT_EQ(source.text, "int predict(float* x){\n  return 3;\n}\n");
    EXPECT_EQ(source.language_tag, "c");
    EXPECT_EQ(source.entry_symbol, "predict");
}

TEST(Lowering, RejectsNaiveBayes) {
    learn::MovingFrame frame(2);
    frame.push({{1.0}, 0, 0});
    frame.push({{2.0}, 1, 1});
    EXPECT_THROW(lower_tree(learn::fit(learn::LearnerKind::gaussian_nb, frame)), ProgramError);
}

TEST(Lowering, CopiesStructureExactly) {
    Rng rng(1);
    const auto model = random_tree_model(rng, 120, 3, 4);
    const auto& tree = std::get<learn::DecisionTree>(model.parameters);
    const auto program = lower_tree(model);
    ASSERT_EQ(program.nodes.size(), tree.nodes().size());
    for (std::size_t i = 0; i < program.nodes.size(); ++i) {
        const auto& n = tree.nodes()[i];
        if (n.is_leaf()) {
            EXPECT_EQ(std::get<DecisionProgram::Leaf>(program.nodes[i]).label, n.label);
        } else {
            const auto& t = std::get<DecisionProgram::Internal>(program.nodes[i]);
            EXPECT_EQ(t.feature, static_cast<std::uint32_t>(n.feature));
            EXPECT_EQ(t.threshold, n.threshold);
            EXPECT_EQ(t.left, n.left);
            EXPECT_EQ(t.right, n.right);
        }
    }
}

TEST(ReferenceProgram, ShapeAndWalk) {
    const auto program = testsupport::reference_program();
    EXPECT_NO_THROW(program.validate());
    EXPECT_EQ(program.nodes.size(), 13U);
    EXPECT_EQ(program.internal_count(), 6U);
    EXPECT_EQ(program.leaf_count(), 7U);
    EXPECT_EQ(interpret(program, std::vector<double>{5.0, 0.0}), 12);
    EXPECT_EQ(interpret(program, std::vector<double>{-1.0, -1.66271317005}), 3);
    EXPECT_EQ(interpret(program, std::vector<double>{3.88166737556, -1.66271317005}), 8);
}

TEST(ReferenceProgram, EmittedLayout) {
    const auto source = emit_c(testsupport::reference_program());
    EXPECT_EQ(count_of(source.text, "if ("), 6U);
    EXPECT_EQ(count_of(source.text, "return "), 7U);
    EXPECT_EQ(source.size_bytes, source.text.size());
    const std::string first = source.text.substr(source.text.find('\n') + 1);
    EXPECT_EQ(first.substr(0, first.find('\n')), "  if (x[0] <= 3.88166737556) {                  //node = 0");
    EXPECT_NE(source.text.find("\n        if (x[1] <= 4.3416762352) {"), std::string::npos);
    const auto parsed = testsupport::parse_c_source(source.text);
    EXPECT_EQ(parsed.program, testsupport::reference_program());
    EXPECT_EQ(parsed.comment_ids, (std::vector<std::uint32_t>{0, 1, 2, 4, 7, 9}));
}

TEST(Interpret, LeafOnlyAndFeatureErrors) {
    DecisionProgram leaf;
    leaf.nodes = {DecisionProgram::Leaf{4}};
    EXPECT_EQ(interpret(leaf, std::vector<double>{}), 4);
    const auto program = testsupport::reference_program();
    try {
        interpret(program, std::vector<double>{0.0});
        FAIL();
    } catch (const FeatureIndexError& e) {
        EXPECT_EQ(e.node(), 7U);
        EXPECT_EQ(e.feature(), 1U);
        EXPECT_EQ(e.dimension(), 1U);
    }
}

TEST(Validate, RejectsMalformedPrograms) {
    DecisionProgram empty;
    EXPECT_THROW(empty.validate(), ProgramError);
    DecisionProgram cycle;
    cycle.nodes = {DecisionProgram::Internal{0, 0.0, 0, 1}, DecisionProgram::Leaf{0}};
    EXPECT_THROW(cycle.validate(), ProgramError);
    EXPECT_THROW(emit_c(cycle), ProgramError);
    DecisionProgram orphan;
    orphan.nodes = {DecisionProgram::Leaf{0}, DecisionProgram::Leaf{1}};
    EXPECT_THROW(orphan.validate(), ProgramError);
    DecisionProgram out_of_range;
    out_of_range.nodes = {DecisionProgram::Internal{0, 0.0, 1, 5}, DecisionProgram::Leaf{0}};
    EXPECT_THROW(out_of_range.validate(), ProgramError);
    DecisionProgram nan_threshold;
    nan_threshold.nodes = {DecisionProgram::Internal{0, std::nan(""), 1, 2}, DecisionProgram::Leaf{0}, DecisionProgram::Leaf{1}};
    EXPECT_THROW(nan_threshold.validate(), ProgramError);
}

TEST(Equivalence, TreeIrAndParsedSourceAgreeIncludingBoundaries) {
    Rng rng(77);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t dims = 2 + rng.below(3);
        const auto model = random_tree_model(rng, 50 + rng.below(250), dims, 2 + static_cast<int>(rng.below(6)));
        const auto program = lower_tree(model);
        const auto parsed = testsupport::parse_c_source(emit_c(program).text);
        ASSERT_EQ(parsed.program, program);
        std::vector<double> thresholds;
        for (const auto& n : program.nodes) {
            if (const auto* t = std::get_if<DecisionProgram::Internal>(&n)) thresholds.push_back(t->threshold);
        }
        for (int i = 0; i < 2000; ++i) {
            FeatureVector x(dims);
            for (double& v : x) {
                const auto pick = rng.below(4);
                if (pick == 0 && !thresholds.empty()) v = thresholds[rng.below(thresholds.size())];
                else if (pick == 1 && !thresholds.empty()) v = std::nextafter(thresholds[rng.below(thresholds.size())], INFINITY);
                else v = rng.uniform(-6, 6);
            }
            const Label expected = learn::predict(model, x);
            ASSERT_EQ(interpret(program, x), expected);
            ASSERT_EQ(interpret(parsed.program, x), expected);
        }
    }
}

TEST(Emission, DeterministicAndPreorderComments) {
    Rng rng(5);
    const auto program = lower_tree(random_tree_model(rng, 200, 2, 5));
    const auto a = emit_c(program);
    const auto b = emit_c(program);
    EXPECT_EQ(a.text, b.text);
    const auto parsed = testsupport::parse_c_source(a.text);
    std::vector<std::uint32_t> internal_ids;
    for (std::uint32_t i = 0; i < program.nodes.size(); ++i) {
        if (std::holds_alternative<DecisionProgram::Internal>(program.nodes[i])) internal_ids.push_back(i);
    }
    EXPECT_EQ(parsed.comment_ids, internal_ids);
}

TEST(Sizes, ReportAndGrowth) {
    learn::MovingFrame leaf_frame(1);
    leaf_frame.push({{0.0, 0.0}, 1, 0});
    const auto leaf_model = learn::fit(learn::LearnerKind::decision_tree, leaf_frame);
    const auto leaf_program = lower_tree(leaf_model);
    const auto leaf_report = report_sizes(leaf_model, leaf_program, emit_c(leaf_program));
    EXPECT_LT(leaf_report.source_bytes, 100U);
    EXPECT_GT(leaf_report.model_bytes, 0U);
    EXPECT_EQ(to_json(leaf_report), "{ \"model_bytes\": " + std::to_string(leaf_report.model_bytes)
                                        + ", \"source_bytes\": " + std::to_string(leaf_report.source_bytes) + " }\n");

    // growing trees: a staircase of n distinct classes along one axis
    SizeReport previous{0, 0};
    for (std::size_t n = 1; n <= 10; ++n) {
        learn::MovingFrame frame(n);
        for (std::size_t i = 0; i < n; ++i) frame.push({{static_cast<double>(i), 0.0}, static_cast<Label>(i), i});
        const auto model = learn::fit(learn::LearnerKind::decision_tree, frame);
        const auto program = lower_tree(model);
        ASSERT_EQ(program.nodes.size(), 2 * n - 1);
        const auto report = report_sizes(model, program, emit_c(program));
        EXPECT_GT(report.model_bytes, previous.model_bytes);
        EXPECT_GT(report.source_bytes, previous.source_bytes);
        previous = report;
    }
}

TEST(Sizes, MismatchedArtifactsRejected) {
    Rng rng(2);
    const auto a = random_tree_model(rng, 100, 2, 4);
    learn::MovingFrame frame(1);
    frame.push({{0.0, 0.0}, 1, 0});
    const auto b = learn::fit(learn::LearnerKind::decision_tree, frame);
    const auto pa = lower_tree(a);
    EXPECT_THROW(report_sizes(b, pa, emit_c(pa)), ProgramError);
}
