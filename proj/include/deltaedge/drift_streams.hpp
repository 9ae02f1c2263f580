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
#include <iosfwd>
#include <numbers>
#include <optional>
#include <vector>

/**
 * Synthetic labeled streams with concept drift, and the two ways of dealing a stream out to edge sites.
 *
 * Circles: categories are clusters whose centers sit on a circle and rotate at constant angular speed,
 * one increment per emitted point. RandomTree: two random labeling trees over uniform features take
 * turns labeling the stream.
 */
namespace deltaedge::streams {

struct CirclesConfig {
    std::size_t n_categories = 7;
    std::size_t points_per_category = 500;
    /// Radians per emitted point.
    double angular_increment = std::numbers::pi / (720.0 * 3.0);
    /// Noise samples farther than this from the center are redrawn.
    double cluster_radius = 0.5;
    double cluster_center_radius = 1.0;
    double noise_std = 0.1;
    std::uint64_t seed = 0;

    void validate() const;
    /// n_categories * points_per_category.
    std::size_t default_length() const { return n_categories * points_per_category; }
    /// Initial angle of a category's center; centers are equally spaced.
    double initial_angle(Label category) const;
};

std::vector<LabeledPoint> generate_circles(const CirclesConfig& config, std::size_t n_iterations);

struct RandomTreeConfig {
    std::size_t n_features = 2;
    std::size_t n_categories = 7;
    std::size_t max_depth = 5;
    /// Nodes shallower than this are never leaves.
    std::size_t first_leaf_level = 3;
    double leaf_fraction = 0.15;
    std::uint64_t seed_a = 1;
    std::uint64_t seed_b = 2;
    std::size_t alternation_period = 50;

    void validate() const;
};

/// Random labeling concept. Nodes are stored in preorder; node 0 is the root.
struct LabelingTree {
    struct Node {
        /// -1 marks a leaf.
        int feature = -1;
        double threshold = 0.0;
        std::size_t left = 0;
        std::size_t right = 0;
        Label label = 0;
    };
    std::vector<Node> nodes;

    Label classify(const FeatureVector& features) const;
    std::size_t depth() const;
};

LabelingTree build_labeling_tree(const RandomTreeConfig& config, std::uint64_t seed);

/// Index 0 = tree built from seed_a, index 1 = from seed_b.
std::size_t active_tree(const RandomTreeConfig& config, std::uint64_t iteration);

std::vector<LabeledPoint> generate_random_tree_stream(const RandomTreeConfig& config, std::size_t n_iterations);

/**
 * Per-site streams. Every site classifies every point it is dealt; with a missing category assigned, the
 * site never adds points of that category to its training data (nor forwards them for training).
 */
struct SiteStreams {
    std::vector<std::vector<LabeledPoint>> per_site;
    std::optional<std::vector<Label>> missing_category;

    std::size_t n_sites() const { return per_site.size(); }
    bool trains_on(std::size_t site, const LabeledPoint& point) const;
    /// The points of one site that may enter training.
    std::vector<LabeledPoint> training_points(std::size_t site) const;
    std::size_t total_points() const;
};

/// Deals each category round-robin over the sites, preserving stream order within a site.
SiteStreams divide_equal(const std::vector<LabeledPoint>& stream, std::size_t n_sites);

enum class WithoutOneMode {
    /// Same dealing as divide_equal; site i still classifies category assignment[i] but never trains on it.
    blind,
    /// Points of category assignment[i] are never dealt to site i; they go round-robin to the other sites.
    exclude,
};

SiteStreams divide_without_one(const std::vector<LabeledPoint>& stream, std::size_t n_sites,
                               const std::vector<Label>& assignment, WithoutOneMode mode = WithoutOneMode::blind);

/// site i -> category i mod n_categories.
std::vector<Label> default_assignment(std::size_t n_sites, std::size_t n_categories);

/// CSV with header `iteration,label,f0,f1,...`.
void write_stream_csv(std::ostream& out, const std::vector<LabeledPoint>& stream);
std::vector<LabeledPoint> read_stream_csv(std::istream& in);

}// namespace deltaedge::streams
