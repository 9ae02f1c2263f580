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
#include <deltaedge/learners.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>

namespace deltaedge::learn {

void TrainingSet::add(const LabeledPoint& point) {
    if (point.features.empty()) throw DimensionError("training point has no features");
    if (y.empty()) {
        n_features = point.features.size();
    } else if (point.features.size() != n_features) {
        throw DimensionError("training point has " + std::to_string(point.features.size()) + " features, expected "
                             + std::to_string(n_features));
    }
    x.insert(x.end(), point.features.begin(), point.features.end());
    y.push_back(point.label);
}

// ---------------------------------------------------------------------------------------------------------
// Decision tree

DecisionTree::DecisionTree(std::vector<Node> nodes, std::size_t n_features)
    : nodes_(std::move(nodes)), n_features_(n_features) {
    if (nodes_.empty()) throw std::invalid_argument("decision tree has no nodes");
    if (n_features_ == 0) throw std::invalid_argument("decision tree has zero features");
    // Preorder walk: the k-th visited node must carry id k.
    std::size_t expected = 0;
    std::vector<std::size_t> stack{0};
    while (!stack.empty()) {
        const std::size_t id = stack.back();
        stack.pop_back();
        if (id != expected) {
            throw std::invalid_argument("decision tree node " + std::to_string(id) + " is not in preorder position "
                                        + std::to_string(expected));
        }
        ++expected;
        const Node& node = nodes_[id];
        if (node.is_leaf()) {
            if (node.label < 0) throw std::invalid_argument("decision tree leaf with negative label");
            continue;
        }
        if (static_cast<std::size_t>(node.feature) >= n_features_) {
            throw std::invalid_argument("decision tree node " + std::to_string(id) + " tests feature "
                                        + std::to_string(node.feature) + " of " + std::to_string(n_features_));
        }
        if (node.left >= nodes_.size() || node.right >= nodes_.size()) {
            throw std::invalid_argument("decision tree node " + std::to_string(id) + " has a child out of range");
        }
        stack.push_back(node.right);
        stack.push_back(node.left);
        if (expected + stack.size() > nodes_.size()) throw std::invalid_argument("decision tree is not a tree");
    }
    if (expected != nodes_.size()) throw std::invalid_argument("decision tree has unreachable nodes");
}

namespace {

__extension__ using Wide = unsigned __int128;

class TreeBuilder {
  public:
    TreeBuilder(const TrainingSet& data, const TreeParams& params) : data_(data), params_(params) {
        std::map<Label, std::size_t> index;
        for (const Label label : data.y) index.emplace(label, 0);
        for (auto& [label, dense] : index) {
            dense = labels_.size();
            labels_.push_back(label);
        }
        class_of_.reserve(data.y.size());
        for (const Label label : data.y) class_of_.push_back(index.at(label));
    }

    std::vector<DecisionTree::Node> build() {
        std::vector<std::uint32_t> rows(data_.size());
        std::iota(rows.begin(), rows.end(), 0U);
        grow(rows, 0);
        return std::move(nodes_);
    }

  private:
    struct Split {
        std::size_t feature = 0;
        double threshold = 0.0;
        // score = (sum_left / n_left) + (sum_right / n_right), kept as a fraction
        Wide numerator = 0;
        Wide denominator = 1;
        bool found = false;
    };

    std::uint32_t grow(std::vector<std::uint32_t>& rows, std::size_t depth) {
        const auto id = static_cast<std::uint32_t>(nodes_.size());
        nodes_.emplace_back();

        std::vector<std::size_t> counts(labels_.size(), 0);
        for (const auto row : rows) ++counts[class_of_[row]];
        // max_element returns the first maximum, i.e. the lowest label on ties
        const auto majority = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
        nodes_[id].label = labels_[majority];

        const bool pure = counts[majority] == rows.size();
        if (pure || depth >= params_.max_depth || rows.size() < 2 * params_.min_samples_leaf) return id;

        const Split split = best_split(rows, counts);
        if (!split.found) return id;

        std::vector<std::uint32_t> left;
        std::vector<std::uint32_t> right;
        for (const auto row : rows) {
            (data_.at(row, split.feature) <= split.threshold ? left : right).push_back(row);
        }
        rows.clear();
        rows.shrink_to_fit();

        nodes_[id].feature = static_cast<std::int32_t>(split.feature);
        nodes_[id].threshold = split.threshold;
        nodes_[id].label = 0;
        const auto left_id = grow(left, depth + 1);
        const auto right_id = grow(right, depth + 1);
        nodes_[id].left = left_id;
        nodes_[id].right = right_id;
        return id;
    }

    Split best_split(const std::vector<std::uint32_t>& rows, const std::vector<std::size_t>& counts) const {
        Split best;
        const std::size_t n = rows.size();
        std::vector<std::uint32_t> order(rows);
        std::vector<std::size_t> left_counts(labels_.size());
        std::vector<std::size_t> right_counts(labels_.size());

        for (std::size_t feature = 0; feature < data_.n_features; ++feature) {
            std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
                return data_.at(a, feature) < data_.at(b, feature);
            });
            std::fill(left_counts.begin(), left_counts.end(), 0);
            right_counts = counts;
            Wide left_sq = 0;
            Wide right_sq = 0;
            for (const auto c : right_counts) right_sq += static_cast<Wide>(c) * c;

            for (std::size_t i = 0; i + 1 < n; ++i) {
                const std::size_t cls = class_of_[order[i]];
                left_sq += 2 * static_cast<Wide>(left_counts[cls]) + 1;
                ++left_counts[cls];
                right_sq -= 2 * static_cast<Wide>(right_counts[cls]) - 1;
                --right_counts[cls];

                const double lo = data_.at(order[i], feature);
                const double hi = data_.at(order[i + 1], feature);
                if (!(lo < hi)) continue;
                const std::size_t n_left = i + 1;
                const std::size_t n_right = n - n_left;
                if (n_left < params_.min_samples_leaf || n_right < params_.min_samples_leaf) continue;

                const Wide numerator = left_sq * n_right + right_sq * n_left;
                const Wide denominator = static_cast<Wide>(n_left) * n_right;
                if (!best.found || numerator * best.denominator > best.numerator * denominator) {
                    best.found = true;
                    best.feature = feature;
                    best.threshold = midpoint(lo, hi);
                    best.numerator = numerator;
                    best.denominator = denominator;
                }
            }
        }
        return best;
    }

    // Guarantees lo <= t < hi so the split separates the two values.
    static double midpoint(double lo, double hi) {
        double t = lo / 2.0 + hi / 2.0;
        if (!(t >= lo) || !(t < hi)) t = lo;
        return t;
    }

    const TrainingSet& data_;
    const TreeParams& params_;
    std::vector<Label> labels_;
    std::vector<std::size_t> class_of_;
    std::vector<DecisionTree::Node> nodes_;
};

}// namespace

DecisionTree DecisionTree::fit(const TrainingSet& data, const TreeParams& params) {
    if (data.size() == 0) throw std::invalid_argument("decision tree: empty training set");
    if (params.min_samples_leaf == 0) throw ConfigError("decision tree: min_samples_leaf must be >= 1");
    return DecisionTree(TreeBuilder(data, params).build(), data.n_features);
}

Label DecisionTree::predict(const FeatureVector& features) const {
    if (features.size() != n_features_) {
        throw DimensionError("decision tree expects " + std::to_string(n_features_) + " features, got "
                             + std::to_string(features.size()));
    }
    std::size_t id = 0;
    while (!nodes_[id].is_leaf()) {
        const Node& node = nodes_[id];
        id = features[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
    }
    return nodes_[id].label;
}

std::size_t DecisionTree::depth() const {
    std::size_t deepest = 0;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
        const auto [id, d] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, d);
        if (!nodes_[id].is_leaf()) {
            stack.emplace_back(nodes_[id].left, d + 1);
            stack.emplace_back(nodes_[id].right, d + 1);
        }
    }
    return deepest;
}

std::string DecisionTree::dump() const {
    std::ostringstream out;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
        const auto [id, d] = stack.back();
        stack.pop_back();
        out << std::string(4 * d, ' ') << "node=" << id;
        const Node& node = nodes_[id];
        if (node.is_leaf()) {
            out << " leaf node.\n";
            continue;
        }
        // thresholds are cut (not rounded) to three decimals in the listing
        char threshold[64];
        std::snprintf(threshold, sizeof threshold, "%.3f", std::trunc(node.threshold * 1000.0) / 1000.0);
        out << " test node: go to node " << node.left << " if X[:, " << node.feature << "] <= " << threshold
            << " else to node " << node.right << ".\n";
        stack.emplace_back(node.right, d + 1);
        stack.emplace_back(node.left, d + 1);
    }
    return out.str();
}

// ---------------------------------------------------------------------------------------------------------
// Gaussian naive Bayes

GaussianNB::GaussianNB(std::vector<ClassStats> classes, std::size_t n_features, double epsilon)
    : classes_(std::move(classes)), n_features_(n_features), epsilon_(epsilon) {
    if (classes_.empty()) throw std::invalid_argument("gaussian nb has no classes");
    if (n_features_ == 0) throw std::invalid_argument("gaussian nb has zero features");
    for (std::size_t c = 0; c < classes_.size(); ++c) {
        const auto& stats = classes_[c];
        if (c > 0 && !(classes_[c - 1].label < stats.label)) {
            throw std::invalid_argument("gaussian nb classes must be sorted by label");
        }
        if (stats.mean.size() != n_features_ || stats.variance.size() != n_features_) {
            throw std::invalid_argument("gaussian nb class " + std::to_string(stats.label) + " has wrong width");
        }
        if (!(stats.prior > 0.0) || !(stats.prior <= 1.0)) {
            throw std::invalid_argument("gaussian nb prior out of (0,1]");
        }
        for (const double v : stats.variance) {
            if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("gaussian nb variance must be positive");
        }
    }
}

GaussianNB GaussianNB::fit(const TrainingSet& data) {
    if (data.size() == 0) throw std::invalid_argument("gaussian nb: empty training set");
    const std::size_t n = data.size();
    const std::size_t d = data.n_features;

    // population variance of every feature over the whole window sets the smoothing floor
    double max_variance = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += data.at(i, j);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) var += (data.at(i, j) - mean) * (data.at(i, j) - mean);
        max_variance = std::max(max_variance, var / static_cast<double>(n));
    }
    double epsilon = kVarSmoothing * max_variance;
    if (!(epsilon > 0.0)) epsilon = kVarSmoothing;// every point identical

    std::map<Label, std::vector<std::size_t>> rows_of;
    for (std::size_t i = 0; i < n; ++i) rows_of[data.y[i]].push_back(i);

    std::vector<ClassStats> classes;
    for (const auto& [label, rows] : rows_of) {
        ClassStats stats;
        stats.label = label;
        stats.count = rows.size();
        stats.prior = static_cast<double>(rows.size()) / static_cast<double>(n);
        stats.mean.assign(d, 0.0);
        stats.variance.assign(d, 0.0);
        for (const auto i : rows) {
            for (std::size_t j = 0; j < d; ++j) stats.mean[j] += data.at(i, j);
        }
        for (auto& m : stats.mean) m /= static_cast<double>(rows.size());
        for (const auto i : rows) {
            for (std::size_t j = 0; j < d; ++j) {
                const double diff = data.at(i, j) - stats.mean[j];
                stats.variance[j] += diff * diff;
            }
        }
        for (auto& v : stats.variance) v = v / static_cast<double>(rows.size()) + epsilon;
        classes.push_back(std::move(stats));
    }
    return GaussianNB(std::move(classes), d, epsilon);
}

double GaussianNB::log_joint(std::size_t class_index, const FeatureVector& features) const {
    const auto& stats = classes_.at(class_index);
    double total = std::log(stats.prior);
    for (std::size_t j = 0; j < n_features_; ++j) {
        const double var = stats.variance[j];
        const double diff = features[j] - stats.mean[j];
        total += -0.5 * std::log(2.0 * std::numbers::pi * var) - diff * diff / (2.0 * var);
    }
    return total;
}

Label GaussianNB::predict(const FeatureVector& features) const {
    if (features.size() != n_features_) {
        throw DimensionError("gaussian nb expects " + std::to_string(n_features_) + " features, got "
                             + std::to_string(features.size()));
    }
    std::size_t best = 0;
    double best_score = log_joint(0, features);
    for (std::size_t c = 1; c < classes_.size(); ++c) {
        const double score = log_joint(c, features);
        if (score > best_score) {
            best_score = score;
            best = c;
        }
    }
    return classes_[best].label;
}

}// namespace deltaedge::learn
