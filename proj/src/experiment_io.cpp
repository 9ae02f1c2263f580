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
#include <deltaedge/harness.hpp>

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace deltaedge::harness {

namespace {

using Json = nlohmann::json;

// expansion order for matrix cells; later keys vary fastest
const std::vector<std::string> kMatrixKeys{"dataset",       "division", "pattern", "learner",   "frame_capacity",
                                           "push_interval", "medium",   "n_sites", "batch_size"};

template <typename T>
T get(const Json& value, const std::string& key) {
    try {
        return value.get<T>();
    } catch (const Json::exception&) {
        throw ConfigError("field '" + key + "' has the wrong type");
    }
}

std::size_t count(const Json& value, const std::string& key) {
    if (!value.is_number_unsigned()) throw ConfigError("field '" + key + "' must be a non-negative integer");
    return value.get<std::size_t>();
}

double real(const Json& value, const std::string& key) {
    if (!value.is_number()) throw ConfigError("field '" + key + "' must be a number");
    return value.get<double>();
}

void check_keys(const Json& object, const std::string& where, const std::set<std::string>& allowed) {
    if (!object.is_object()) throw ConfigError("'" + where + "' must be an object");
    for (const auto& [key, value] : object.items()) {
        if (!allowed.contains(key)) throw ConfigError("unknown field '" + key + "' in " + where);
    }
}

void apply_circles(streams::CirclesConfig& c, const Json& j) {
    check_keys(j, "circles", {"n_categories", "points_per_category", "angular_increment", "cluster_radius",
                              "cluster_center_radius", "noise_std", "seed"});
    for (const auto& [key, v] : j.items()) {
        if (key == "n_categories") c.n_categories = count(v, key);
        else if (key == "points_per_category") c.points_per_category = count(v, key);
        else if (key == "angular_increment") c.angular_increment = real(v, key);
        else if (key == "cluster_radius") c.cluster_radius = real(v, key);
        else if (key == "cluster_center_radius") c.cluster_center_radius = real(v, key);
        else if (key == "noise_std") c.noise_std = real(v, key);
        else if (key == "seed") c.seed = count(v, key);
    }
}

void apply_random_tree(streams::RandomTreeConfig& c, const Json& j) {
    check_keys(j, "random_tree", {"n_features", "n_categories", "max_depth", "first_leaf_level", "leaf_fraction",
                                  "seed_a", "seed_b", "alternation_period"});
    for (const auto& [key, v] : j.items()) {
        if (key == "n_features") c.n_features = count(v, key);
        else if (key == "n_categories") c.n_categories = count(v, key);
        else if (key == "max_depth") c.max_depth = count(v, key);
        else if (key == "first_leaf_level") c.first_leaf_level = count(v, key);
        else if (key == "leaf_fraction") c.leaf_fraction = real(v, key);
        else if (key == "seed_a") c.seed_a = count(v, key);
        else if (key == "seed_b") c.seed_b = count(v, key);
        else if (key == "alternation_period") c.alternation_period = count(v, key);
    }
}

void apply_fields(ScenarioConfig& s, const Json& j) {
    check_keys(j, "scenario", {"name", "dataset", "division", "pattern", "learner", "n_sites", "frame_capacity",
                               "push_interval", "batch_size", "report_predictions", "medium", "seeds", "n_iterations",
                               "drift_per_round", "sample_period_ms", "score_window", "circles", "random_tree", "tree",
                               "compute"});
    for (const auto& [key, v] : j.items()) {
        if (key == "name") s.name = get<std::string>(v, key);
        else if (key == "dataset") s.dataset = parse_dataset(get<std::string>(v, key));
        else if (key == "division") s.division = parse_division(get<std::string>(v, key));
        else if (key == "pattern") s.pattern = parse_pattern(get<std::string>(v, key));
        else if (key == "learner") s.learner = learn::parse_learner_kind(get<std::string>(v, key));
        else if (key == "n_sites") s.n_sites = count(v, key);
        else if (key == "frame_capacity") s.frame_capacity = count(v, key);
        else if (key == "push_interval") s.push_interval = count(v, key);
        else if (key == "batch_size") s.batch_size = count(v, key);
        else if (key == "report_predictions") s.report_predictions = get<bool>(v, key);
        else if (key == "medium") s.medium = get<std::string>(v, key);
        else if (key == "n_iterations") s.n_iterations = count(v, key);
        else if (key == "drift_per_round") s.drift_per_round = get<bool>(v, key);
        else if (key == "sample_period_ms") s.sample_period_ms = real(v, key);
        else if (key == "score_window") s.score_window = count(v, key);
        else if (key == "circles") apply_circles(s.circles, v);
        else if (key == "random_tree") apply_random_tree(s.random_tree, v);
        else if (key == "seeds") {
            if (!v.is_array()) throw ConfigError("field 'seeds' must be a list");
            s.seeds.clear();
            for (const auto& seed : v) s.seeds.push_back(count(seed, "seeds"));
        } else if (key == "tree") {
            check_keys(v, "tree", {"max_depth", "min_samples_leaf"});
            if (v.contains("max_depth")) s.learner_options.tree.max_depth = count(v["max_depth"], "tree.max_depth");
            if (v.contains("min_samples_leaf")) {
                s.learner_options.tree.min_samples_leaf = count(v["min_samples_leaf"], "tree.min_samples_leaf");
            }
        } else if (key == "compute") {
            check_keys(v, "compute", {"edge_ms", "cloud_ms"});
            if (v.contains("edge_ms")) s.compute.edge_ms = real(v["edge_ms"], "compute.edge_ms");
            if (v.contains("cloud_ms")) s.compute.cloud_ms = real(v["cloud_ms"], "compute.cloud_ms");
        }
    }
}

void expand(const ScenarioConfig& defaults, const Json& grid, std::vector<ScenarioConfig>& out) {
    if (!grid.is_object()) throw ConfigError("matrix entries must be objects");
    for (const auto& [key, values] : grid.items()) {
        if (std::find(kMatrixKeys.begin(), kMatrixKeys.end(), key) == kMatrixKeys.end()) {
            throw ConfigError("field '" + key + "' cannot vary in a matrix");
        }
        if (!values.is_array() || values.empty()) throw ConfigError("matrix field '" + key + "' needs a non-empty list");
    }
    std::vector<std::string> keys;
    for (const auto& key : kMatrixKeys) {
        if (grid.contains(key)) keys.push_back(key);
    }
    std::vector<std::size_t> index(keys.size(), 0);
    while (true) {
        ScenarioConfig cell = defaults;
        Json patch = Json::object();
        for (std::size_t k = 0; k < keys.size(); ++k) patch[keys[k]] = grid[keys[k]][index[k]];
        apply_fields(cell, patch);
        cell.validate();
        out.push_back(std::move(cell));
        std::size_t k = keys.size();
        while (k > 0) {
            --k;
            if (++index[k] < grid[keys[k]].size()) break;
            index[k] = 0;
            if (k == 0) return;
        }
        if (keys.empty()) return;
    }
}

}// namespace

std::vector<ScenarioConfig> parse_experiment(const std::string& json_text) {
    Json root;
    try {
        root = Json::parse(json_text);
    } catch (const Json::parse_error& e) {
        throw ConfigError(std::string("experiment document: ") + e.what());
    }
    check_keys(root, "experiment document", {"defaults", "matrix", "scenarios"});

    ScenarioConfig defaults;
    if (root.contains("defaults")) apply_fields(defaults, root["defaults"]);

    std::vector<ScenarioConfig> out;
    if (root.contains("matrix")) {
        const Json& matrix = root["matrix"];
        if (matrix.is_array()) {
            for (const auto& grid : matrix) expand(defaults, grid, out);
        } else {
            expand(defaults, matrix, out);
        }
    }
    if (root.contains("scenarios")) {
        if (!root["scenarios"].is_array()) throw ConfigError("'scenarios' must be a list");
        for (const auto& entry : root["scenarios"]) {
            ScenarioConfig scenario = defaults;
            apply_fields(scenario, entry);
            scenario.validate();
            out.push_back(std::move(scenario));
        }
    }
    std::set<std::string> names;
    for (const auto& s : out) {
        if (!names.insert(s.display_name()).second) throw ConfigError("duplicate scenario name '" + s.display_name() + "'");
    }
    return out;
}

std::vector<ScenarioConfig> load_experiment(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open experiment document '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_experiment(buffer.str());
}

}// namespace deltaedge::harness
