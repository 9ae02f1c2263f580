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

#include <deltaedge/types.hpp>

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace deltaedge::learn {

/// Feature vector width differs from what the model was trained on.
class DimensionError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Row-major copy of a training window.
struct TrainingSet {
    std::size_t n_features = 0;
    std::vector<double> x;
    std::vector<Label> y;

    template <typename Range>
    static TrainingSet from(const Range& points) {
        TrainingSet set;
        for (const LabeledPoint& point : points) set.add(point);
        return set;
    }

    void add(const LabeledPoint& point);
    std::size_t size() const { return y.size(); }
    double at(std::size_t row, std::size_t feature) const { return x[row * n_features + feature]; }
};

struct TreeParams {
    std::size_t max_depth = 10;
    std::size_t min_samples_leaf = 1;
};

/**
 * CART classifier with Gini impurity.
 *
 * Candidate thresholds are midpoints between consecutive distinct feature values; `x[f] <= threshold`
 * goes left. Among equally good splits the lowest feature index wins, then the lowest threshold. Split
 * scores are compared exactly in integer arithmetic, so ties are real ties. Nodes are numbered in preorder.
 */
class DecisionTree {
  public:
    struct Node {
        /// -1 for leaves.
        std::int32_t feature = -1;
        double threshold = 0.0;
        std::uint32_t left = 0;
        std::uint32_t right = 0;
        Label label = 0;

        bool is_leaf() const { return feature < 0; }
        friend bool operator==(const Node&, const Node&) = default;
    };

    /// Validates the node array: preorder numbering, children in range, every node reachable once.
    DecisionTree(std::vector<Node> nodes, std::size_t n_features);

    static DecisionTree fit(const TrainingSet& data, const TreeParams& params = {});

    Label predict(const FeatureVector& features) const;

    const std::vector<Node>& nodes() const { return nodes_; }
    std::size_t n_features() const { return n_features_; }
    std::size_t depth() const;

    /// Indented text listing, one line per node: `node=0 test node: go to node 1 if X[:, 0] <= 3.881 else to node 12.`
    std::string dump() const;

    friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

  private:
    std::vector<Node> nodes_;
    std::size_t n_features_;
};

/// Gaussian naive Bayes; class variances are smoothed by 1e-9 times the largest per-feature variance.
class GaussianNB {
  public:
    static constexpr double kVarSmoothing = 1e-9;

    struct ClassStats {
        Label label = 0;
        std::uint64_t count = 0;
        double prior = 0.0;
        std::vector<double> mean;
        std::vector<double> variance;

        friend bool operator==(const ClassStats&, const ClassStats&) = default;
    };

    /// Classes must be sorted by label, non-empty, and have positive priors and variances.
    GaussianNB(std::vector<ClassStats> classes, std::size_t n_features, double epsilon);

    static GaussianNB fit(const TrainingSet& data);

    /// log prior + sum of log Gaussian densities for one class.
    double log_joint(std::size_t class_index, const FeatureVector& features) const;
    /// argmax of log_joint; ties go to the lowest label.
    Label predict(const FeatureVector& features) const;

    const std::vector<ClassStats>& classes() const { return classes_; }
    std::size_t n_features() const { return n_features_; }
    double epsilon() const { return epsilon_; }

    friend bool operator==(const GaussianNB&, const GaussianNB&) = default;

  private:
    std::vector<ClassStats> classes_;
    std::size_t n_features_;
    double epsilon_;
};

}// namespace deltaedge::learn
