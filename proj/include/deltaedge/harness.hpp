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

#include <deltaedge/drift_streams.hpp>
#include <deltaedge/model.hpp>
#include <deltaedge/netsim.hpp>
#include <deltaedge/pattern_engine.hpp>
#include <deltaedge/types.hpp>

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace deltaedge::harness {

enum class Dataset { circles, random_tree };
/// without_one_excluded deals the missing category only to the other sites (see streams::WithoutOneMode).
enum class Division { equal, without_one, without_one_excluded };

std::string_view to_string(Dataset dataset);
std::string_view to_string(Division division);
Dataset parse_dataset(std::string_view text);
Division parse_division(std::string_view text);

struct ScenarioConfig {
    /// Derived from the key fields when left empty.
    std::string name;
    Dataset dataset = Dataset::circles;
    streams::CirclesConfig circles;
    streams::RandomTreeConfig random_tree;
    std::size_t n_sites = 5;
    Division division = Division::equal;
    Pattern pattern = Pattern::P1;
    learn::LearnerKind learner = learn::LearnerKind::decision_tree;
    learn::LearnerOptions learner_options;
    std::size_t frame_capacity = 150;
    std::size_t push_interval = 150;
    std::size_t batch_size = 1;
    bool report_predictions = false;
    std::string medium = "instantaneous";
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    /// Length of the whole stream before it is dealt to the sites.
    std::size_t n_iterations = 3500;
    /// Circles rotation counts system rounds: the per-point increment is divided by n_sites.
    bool drift_per_round = true;
    double sample_period_ms = 1000.0;
    net::ComputeCosts compute;
    std::size_t score_window = learn::ScoreTracker::kDefaultWindow;

    void validate() const;
    std::string display_name() const;
};

/// Stream generation for one seed; seed s shifts the generator seeds deterministically.
streams::SiteStreams build_streams(const ScenarioConfig& config, std::uint64_t seed);
patterns::EngineConfig engine_config(const ScenarioConfig& config, const std::vector<net::MediumProfile>& profiles);

struct OffsetScores {
    std::array<double, 3> mean{};
    std::array<std::size_t, 3> count{};
};

/**
 * Scores by position after each model change at a site: offsets [0, w), [w, 2w), [2w, 3w) from the
 * activation step. Pooled over sites and spans. A span shorter than 3w contributes to the windows it reaches.
 */
OffsetScores p0_offset_report(const patterns::PatternRun& run, std::size_t window = 50);

struct ResultRow {
    std::string name;
    Dataset dataset = Dataset::circles;
    Division division = Division::equal;
    Pattern pattern = Pattern::P1;
    learn::LearnerKind learner = learn::LearnerKind::decision_tree;
    std::size_t frame_capacity = 0;
    std::size_t push_interval = 0;
    std::string medium;
    std::size_t n_sites = 0;
    std::size_t n_iterations = 0;
    std::size_t n_seeds = 0;
    double mean_score = 0.0;
    double mean_model_size = 0.0;
    double mean_latency_ms = 0.0;
    /// Mean encoded size per message kind; 0 when the kind was never sent.
    double mean_s_bytes = 0.0;
    double mean_d_bytes = 0.0;
    double mean_m_bytes = 0.0;
    std::optional<std::array<double, 3>> offset_scores;
    /// "ok" or the error that stopped the scenario.
    std::string status = "ok";

    bool ok() const { return status == "ok"; }
};

struct SeedSummary {
    double mean_score = 0.0;
    double mean_model_size = 0.0;
    double mean_latency_ms = 0.0;
    std::array<double, 3> mean_message_bytes{};
    std::optional<OffsetScores> offsets;
};

SeedSummary summarize(const patterns::PatternRun& run, std::size_t offset_window = 50);

using LogSink = std::function<void(const ScenarioConfig&, std::uint64_t seed, const patterns::PatternRun&)>;

struct MatrixOptions {
    std::vector<net::MediumProfile> profiles = net::default_profiles();
    /// Worker threads for the seeds of one scenario; 0 picks the hardware concurrency.
    std::size_t threads = 0;
    /// Called once per (scenario, seed), in config order then seed order.
    LogSink log_sink;
};

std::vector<ResultRow> run_matrix(const std::vector<ScenarioConfig>& configs, const MatrixOptions& options = {});

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_results_csv(std::istream& in);

enum class Verdict { pass, fail, not_evaluable };
std::string_view to_string(Verdict verdict);

struct TrendResult {
    std::string id;
    std::string claim;
    Verdict verdict = Verdict::not_evaluable;
    std::string detail;
};

struct TrendOptions {
    learn::LearnerKind learner = learn::LearnerKind::decision_tree;
    /// T1 lower bound on the gap and T2 bound on its magnitude.
    double margin = 0.05;
    /// One-sided slack for the ordering claims T3 and T5.
    double ordering_slack = 0.02;
    double offset_gap = 0.03;
    double offset_flat = 0.05;
};

std::vector<TrendResult> trend_checks(const std::vector<ResultRow>& rows, const TrendOptions& options = {});
std::string verdicts_to_json(const std::vector<TrendResult>& results);

/**
 * Feasibility of every (app class, pattern, medium) with message sizes measured in the results: S and D
 * from P2 rows, M from P0 rows. Missing kinds fall back to 0 bytes.
 */
net::Recommendation emit_recommendation_table(const std::vector<ResultRow>& rows,
                                              const std::vector<net::AppClass>& app_classes,
                                              const std::vector<net::MediumProfile>& profiles,
                                              const net::ComputeCosts& compute = {});
net::MessageSizes measured_sizes(const std::vector<ResultRow>& rows);

/**
 * Experiment document (JSON):
 *
 *     { "defaults":  { <scenario fields> },
 *       "matrix":    { "<field>": [values, ...], ... }  or a list of such objects,
 *       "scenarios": [ { <scenario fields> }, ... ] }
 *
 * Matrix cells expand in the fixed field order dataset, division, pattern, learner, frame_capacity,
 * push_interval, medium, n_sites, batch_size; later fields vary fastest. Cells come before explicit scenarios.
 *
 * Scenario fields: name, dataset, division, pattern, learner, n_sites, frame_capacity, push_interval,
 * batch_size, report_predictions, medium, seeds, n_iterations, drift_per_round, sample_period_ms,
 * score_window, circles {n_categories, points_per_category, angular_increment, cluster_radius,
 * cluster_center_radius, noise_std, seed}, random_tree {n_features, n_categories, max_depth,
 * first_leaf_level, leaf_fraction, seed_a, seed_b, alternation_period}, tree {max_depth, min_samples_leaf},
 * compute {edge_ms, cloud_ms}.
 */
std::vector<ScenarioConfig> parse_experiment(const std::string& json_text);
std::vector<ScenarioConfig> load_experiment(const std::string& path);

}// namespace deltaedge::harness
