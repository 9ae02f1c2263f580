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
#include <deltaedge/drift_streams.hpp>
#include <deltaedge/random.hpp>
#include <deltaedge/text.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>

namespace deltaedge::streams {

void CirclesConfig::validate() const {
    if (n_categories < 2) throw ConfigError("circles: n_categories must be >= 2");
    if (points_per_category < 1) throw ConfigError("circles: points_per_category must be >= 1");
    if (!(angular_increment > 0.0) || !std::isfinite(angular_increment)) {
        throw ConfigError("circles: angular_increment must be positive");
    }
    if (!(cluster_radius > 0.0)) throw ConfigError("circles: cluster_radius must be positive");
    if (!(cluster_center_radius > 0.0)) throw ConfigError("circles: cluster_center_radius must be positive");
    if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) throw ConfigError("circles: noise_std must be >= 0");
}

double CirclesConfig::initial_angle(Label category) const {
    return 2.0 * std::numbers::pi * static_cast<double>(category) / static_cast<double>(n_categories);
}

std::vector<LabeledPoint> generate_circles(const CirclesConfig& config, std::size_t n_iterations) {
    config.validate();
    if (n_iterations < 1) throw ConfigError("circles: n_iterations must be >= 1");

    Rng rng(config.seed);
    std::vector<LabeledPoint> stream;
    stream.reserve(n_iterations);
    for (std::size_t k = 0; k < n_iterations; ++k) {
        const auto category = static_cast<Label>(k % config.n_categories);
        const double angle = config.initial_angle(category) + static_cast<double>(k) * config.angular_increment;
        double dx = 0.0;
        double dy = 0.0;
        if (config.noise_std > 0.0) {
            do {
                dx = config.noise_std * rng.normal();
                dy = config.noise_std * rng.normal();
            } while (std::hypot(dx, dy) > config.cluster_radius);
        }
        stream.push_back(LabeledPoint{
            {config.cluster_center_radius * std::cos(angle) + dx, config.cluster_center_radius * std::sin(angle) + dy},
            category,
            k});
    }
    return stream;
}

void RandomTreeConfig::validate() const {
    if (n_features < 1) throw ConfigError("random_tree: n_features must be >= 1");
    if (n_categories < 2) throw ConfigError("random_tree: n_categories must be >= 2");
    if (max_depth < 1) throw ConfigError("random_tree: max_depth must be >= 1");
    if (alternation_period < 1) throw ConfigError("random_tree: alternation_period must be >= 1");
    if (seed_a == seed_b) throw ConfigError("random_tree: seed_a and seed_b must differ");
    if (!(leaf_fraction >= 0.0 && leaf_fraction <= 1.0)) throw ConfigError("random_tree: leaf_fraction must be in [0,1]");
}

Label LabelingTree::classify(const FeatureVector& features) const {
    std::size_t id = 0;
    while (nodes[id].feature >= 0) {
        const auto& node = nodes[id];
        id = features[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
    }
    return nodes[id].label;
}

std::size_t LabelingTree::depth() const {
    std::size_t deepest = 0;
    std::vector<std::pair<std::size_t, std::size_t>> todo{{0, 0}};
    while (!todo.empty()) {
        const auto [id, d] = todo.back();
        todo.pop_back();
        deepest = std::max(deepest, d);
        if (nodes[id].feature >= 0) {
            todo.emplace_back(nodes[id].left, d + 1);
            todo.emplace_back(nodes[id].right, d + 1);
        }
    }
    return deepest;
}

namespace {

// Thresholds are drawn inside the interval the path has left open for that feature, so every split
// cuts a non-empty region.
std::size_t grow(LabelingTree& tree, Rng& rng, const RandomTreeConfig& config, std::size_t depth,
                 std::vector<double>& lo, std::vector<double>& hi) {
    const std::size_t id = tree.nodes.size();
    tree.nodes.emplace_back();
    const bool leaf = depth >= config.max_depth
        || (depth >= config.first_leaf_level && rng.uniform() < config.leaf_fraction);
    if (leaf) {
        tree.nodes[id].label = static_cast<Label>(rng.below(config.n_categories));
        return id;
    }
    const auto feature = static_cast<std::size_t>(rng.below(config.n_features));
    const double threshold = rng.uniform(lo[feature], hi[feature]);
    tree.nodes[id].feature = static_cast<int>(feature);
    tree.nodes[id].threshold = threshold;

    const double saved_hi = hi[feature];
    hi[feature] = threshold;
    const std::size_t left = grow(tree, rng, config, depth + 1, lo, hi);
    hi[feature] = saved_hi;

    const double saved_lo = lo[feature];
    lo[feature] = threshold;
    const std::size_t right = grow(tree, rng, config, depth + 1, lo, hi);
    lo[feature] = saved_lo;

    tree.nodes[id].left = left;
    tree.nodes[id].right = right;
    return id;
}

}// namespace

LabelingTree build_labeling_tree(const RandomTreeConfig& config, std::uint64_t seed) {
    config.validate();
    Rng rng(seed);
    LabelingTree tree;
    std::vector<double> lo(config.n_features, 0.0);
    std::vector<double> hi(config.n_features, 1.0);
    grow(tree, rng, config, 0, lo, hi);
    return tree;
}

std::size_t active_tree(const RandomTreeConfig& config, std::uint64_t iteration) {
    return (iteration / config.alternation_period) % 2;
}

std::vector<LabeledPoint> generate_random_tree_stream(const RandomTreeConfig& config, std::size_t n_iterations) {
    config.validate();
    if (n_iterations < 1) throw ConfigError("random_tree: n_iterations must be >= 1");

    const LabelingTree trees[2] = {build_labeling_tree(config, config.seed_a),
                                   build_labeling_tree(config, config.seed_b)};
    Rng rng(config.seed_a * 0x9E3779B97F4A7C15ULL ^ (config.seed_b + 0x632BE59BD9B4E019ULL));

    std::vector<LabeledPoint> stream;
    stream.reserve(n_iterations);
    for (std::size_t k = 0; k < n_iterations; ++k) {
        FeatureVector features(config.n_features);
        for (auto& value : features) value = rng.uniform();
        const Label label = trees[active_tree(config, k)].classify(features);
        stream.push_back(LabeledPoint{std::move(features), label, k});
    }
    return stream;
}

bool SiteStreams::trains_on(std::size_t site, const LabeledPoint& point) const {
    return !missing_category || (*missing_category)[site] != point.label;
}

std::vector<LabeledPoint> SiteStreams::training_points(std::size_t site) const {
    std::vector<LabeledPoint> out;
    for (const auto& point : per_site.at(site)) {
        if (trains_on(site, point)) out.push_back(point);
    }
    return out;
}

std::size_t SiteStreams::total_points() const {
    std::size_t total = 0;
    for (const auto& site : per_site) total += site.size();
    return total;
}

SiteStreams divide_equal(const std::vector<LabeledPoint>& stream, std::size_t n_sites) {
    if (n_sites < 1) throw ConfigError("divide: n_sites must be >= 1");
    SiteStreams out;
    out.per_site.resize(n_sites);
    std::map<Label, std::size_t> dealt;
    for (const auto& point : stream) {
        auto& count = dealt[point.label];
        out.per_site[count % n_sites].push_back(point);
        ++count;
    }
    return out;
}

SiteStreams divide_without_one(const std::vector<LabeledPoint>& stream, std::size_t n_sites,
                               const std::vector<Label>& assignment, WithoutOneMode mode) {
    if (n_sites < 2) throw ConfigError("divide_without_one: n_sites must be >= 2");
    if (assignment.size() != n_sites) {
        throw ConfigError("divide_without_one: assignment must cover all " + std::to_string(n_sites) + " sites");
    }
    std::set<Label> present;
    for (const auto& point : stream) present.insert(point.label);
    std::map<Label, std::size_t> blind_sites;
    for (const Label category : assignment) {
        if (!present.contains(category)) {
            throw ConfigError("divide_without_one: assigned category " + std::to_string(category)
                              + " does not occur in the stream");
        }
        ++blind_sites[category];
    }
    for (const auto& [category, count] : blind_sites) {
        if (count == n_sites) {
            throw ConfigError("divide_without_one: category " + std::to_string(category)
                              + " would be missing at every site");
        }
    }
    if (mode == WithoutOneMode::blind) {
        auto out = divide_equal(stream, n_sites);
        out.missing_category = assignment;
        return out;
    }
    SiteStreams out;
    out.per_site.resize(n_sites);
    out.missing_category = assignment;
    std::map<Label, std::vector<std::size_t>> receivers;
    std::map<Label, std::size_t> dealt;
    for (const auto& point : stream) {
        auto [it, fresh] = receivers.try_emplace(point.label);
        if (fresh) {
            for (std::size_t i = 0; i < n_sites; ++i) {
                if (assignment[i] != point.label) it->second.push_back(i);
            }
        }
        auto& count = dealt[point.label];
        out.per_site[it->second[count % it->second.size()]].push_back(point);
        ++count;
    }
    return out;
}

std::vector<Label> default_assignment(std::size_t n_sites, std::size_t n_categories) {
    std::vector<Label> out(n_sites);
    for (std::size_t i = 0; i < n_sites; ++i) out[i] = static_cast<Label>(i % n_categories);
    return out;
}

void write_stream_csv(std::ostream& out, const std::vector<LabeledPoint>& stream) {
    const std::size_t dims = stream.empty() ? 0 : stream.front().features.size();
    out << "iteration,label";
    for (std::size_t j = 0; j < dims; ++j) out << ",f" << j;
    out << '\n';
    for (const auto& point : stream) {
        out << point.iteration << ',' << point.label;
        for (const double value : point.features) out << ',' << text::format_double(value);
        out << '\n';
    }
}

std::vector<LabeledPoint> read_stream_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) return {};
    const auto header = text::split(line, ',');
    if (header.size() < 3 || header[0] != "iteration" || header[1] != "label") {
        throw std::runtime_error("stream csv: bad header '" + line + "'");
    }
    const std::size_t dims = header.size() - 2;
    std::vector<LabeledPoint> stream;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = text::split(line, ',');
        if (fields.size() != dims + 2) {
            throw std::runtime_error("stream csv: line " + std::to_string(line_no) + " has "
                                     + std::to_string(fields.size()) + " fields, expected "
                                     + std::to_string(dims + 2));
        }
        try {
            LabeledPoint point;
            point.iteration = static_cast<std::uint64_t>(text::parse_int(fields[0]));
            point.label = static_cast<Label>(text::parse_int(fields[1]));
            point.features.reserve(dims);
            for (std::size_t j = 0; j < dims; ++j) point.features.push_back(text::parse_double(fields[j + 2]));
            stream.push_back(std::move(point));
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error("stream csv: line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return stream;
}

}// namespace deltaedge::streams
