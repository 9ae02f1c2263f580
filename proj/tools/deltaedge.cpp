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
#include <deltaedge/harness.hpp>
#include <deltaedge/model.hpp>
#include <deltaedge/netsim.hpp>
#include <deltaedge/pattern_engine.hpp>
#include <deltaedge/transpiler.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>

namespace fs = std::filesystem;
using namespace deltaedge;

namespace {

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    return out;
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
    return in;
}

struct Profiles {
    std::vector<net::MediumProfile> media = net::default_profiles();
    std::vector<net::AppClass> app_classes = net::builtin_app_classes();
};

Profiles load_profiles(const std::string& path) {
    Profiles profiles;
    if (path.empty()) return profiles;
    auto doc = net::load_profile_document(path);
    if (!doc.media.empty()) profiles.media = std::move(doc.media);
    if (!doc.app_classes.empty()) profiles.app_classes = std::move(doc.app_classes);
    return profiles;
}

struct RunArgs {
    std::string config;
    std::string out_dir = "out";
    std::string profiles;
    std::optional<std::uint64_t> seed;
    std::size_t threads = 0;
    bool quiet = false;
};

int cmd_run(const RunArgs& args) {
    auto scenarios = harness::load_experiment(args.config);
    if (args.seed) {
        for (auto& s : scenarios) s.seeds = {*args.seed};
    }
    const fs::path out_dir(args.out_dir);
    fs::create_directories(out_dir / "logs");

    harness::MatrixOptions options;
    options.profiles = load_profiles(args.profiles).media;
    options.threads = args.threads;
    options.log_sink = [&](const harness::ScenarioConfig& config, std::uint64_t seed, const patterns::PatternRun& run) {
        auto out = open_out(out_dir / "logs" / (config.display_name() + "__seed" + std::to_string(seed) + ".csv"));
        patterns::write_step_log_csv(out, run.log);
    };

    std::vector<harness::ResultRow> rows;
    for (const auto& scenario : scenarios) {
        auto row = harness::run_matrix({scenario}, options).front();
        if (!args.quiet) {
            std::cerr << row.name << ": " << (row.ok() ? "score " + std::to_string(row.mean_score) : row.status) << '\n';
        }
        rows.push_back(std::move(row));
    }
    auto out = open_out(out_dir / "results.csv");
    harness::write_results_csv(out, rows);
    std::size_t failed = 0;
    for (const auto& row : rows) failed += row.ok() ? 0 : 1;
    return failed == 0 ? 0 : 2;
}

struct TranspileArgs {
    std::string model;
    std::string out;
    std::string report;
    bool dump = false;
};

int cmd_transpile(const TranspileArgs& args) {
    auto in = open_in(args.model);
    const Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto model = learn::deserialize(bytes);
    const auto program = fogml::lower_tree(model);
    const auto source = fogml::emit_c(program);
    if (args.out.empty()) {
        std::cout << source.text;
    } else {
        open_out(args.out) << source.text;
    }
    const std::string report = fogml::to_json(fogml::report_sizes(model, program, source));
    if (!args.report.empty()) open_out(args.report) << report;
    else if (!args.out.empty()) std::cout << report;
    if (args.dump) std::cerr << std::get<learn::DecisionTree>(model.parameters).dump();
    return 0;
}

struct RecommendArgs {
    std::string profiles;
    std::string results;
    std::string out;
    std::int64_t s_bytes = -1;
    std::int64_t d_bytes = -1;
    std::int64_t m_bytes = -1;
    double edge_ms = 1.0;
    double cloud_ms = 1.0;
};

int cmd_recommend(const RecommendArgs& args) {
    const Profiles profiles = load_profiles(args.profiles);
    net::MessageSizes sizes;
    if (!args.results.empty()) {
        auto in = open_in(args.results);
        sizes = harness::measured_sizes(harness::read_results_csv(in));
    } else {
        // one two-feature point up, one label down
        sizes.s_bytes = static_cast<std::int64_t>(
            patterns::encode_payload(patterns::SensorPayload{{{LabeledPoint{{0.0, 0.0}, 0, 0}, true}}}).size());
        sizes.d_bytes = static_cast<std::int64_t>(patterns::encode_payload(patterns::DecisionPayload{0}).size());
    }
    if (args.s_bytes >= 0) sizes.s_bytes = args.s_bytes;
    if (args.d_bytes >= 0) sizes.d_bytes = args.d_bytes;
    if (args.m_bytes >= 0) sizes.m_bytes = args.m_bytes;
    const auto table = net::recommend({Pattern::P0, Pattern::P1, Pattern::P2}, profiles.media, profiles.app_classes,
                                      sizes, net::ComputeCosts{args.edge_ms, args.cloud_ms});
    if (args.out.empty()) {
        net::write_recommendation_csv(std::cout, table);
    } else {
        auto out = open_out(args.out);
        net::write_recommendation_csv(out, table);
    }
    return 0;
}

struct TrendArgs {
    std::string results;
    std::string out;
    std::string learner = "decision_tree";
    double margin = 0.05;
    bool strict = false;
};

int cmd_check_trends(const TrendArgs& args) {
    auto in = open_in(args.results);
    harness::TrendOptions options;
    options.learner = learn::parse_learner_kind(args.learner);
    options.margin = args.margin;
    const auto verdicts = harness::trend_checks(harness::read_results_csv(in), options);
    const std::string json = harness::verdicts_to_json(verdicts);
    if (args.out.empty()) std::cout << json;
    else open_out(args.out) << json;
    if (!args.strict) return 0;
    for (const auto& v : verdicts) {
        if (v.verdict != harness::Verdict::pass) return 3;
    }
    return 0;
}

struct GenerateArgs {
    std::string dataset = "circles";
    std::size_t n = 3500;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_generate(const GenerateArgs& args) {
    std::vector<LabeledPoint> stream;
    if (harness::parse_dataset(args.dataset) == harness::Dataset::circles) {
        streams::CirclesConfig config;
        config.seed = args.seed;
        stream = streams::generate_circles(config, args.n);
    } else {
        streams::RandomTreeConfig config;
        config.seed_a += args.seed * 0x10000;
        config.seed_b += args.seed * 0x10000;
        stream = streams::generate_random_tree_stream(config, args.n);
    }
    if (args.out.empty()) {
        streams::write_stream_csv(std::cout, stream);
    } else {
        auto out = open_out(args.out);
        streams::write_stream_csv(out, stream);
    }
    return 0;
}

struct FitArgs {
    std::string stream;
    std::string learner = "decision_tree";
    std::size_t frame = 150;
    std::string out;
};

int cmd_fit(const FitArgs& args) {
    auto in = open_in(args.stream);
    const auto stream = streams::read_stream_csv(in);
    learn::MovingFrame frame(args.frame);
    for (const auto& point : stream) frame.push(point);
    const auto model = learn::fit(learn::parse_learner_kind(args.learner), frame);
    const Bytes bytes = learn::serialize(model);
    auto out = open_out(args.out);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    std::cout << "model_bytes " << bytes.size() << '\n';
    return 0;
}

}// namespace

int main(int argc, char** argv) {
    CLI::App app{"deltaedge: edge/cloud learning pattern simulator"};
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "run a scenario matrix and write results.csv plus step logs");
    run_cmd->add_option("--config", run.config, "experiment JSON document")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--out-dir", run.out_dir, "output directory");
    run_cmd->add_option("--seed", run.seed, "run every scenario with this single seed");
    run_cmd->add_option("--profiles", run.profiles, "medium profile JSON")->check(CLI::ExistingFile);
    run_cmd->add_option("--threads", run.threads, "worker threads per scenario (0 = all cores)");
    run_cmd->add_flag("--quiet", run.quiet, "no progress on stderr");

    TranspileArgs transpile;
    auto* transpile_cmd = app.add_subcommand("transpile", "serialized tree model to C source and size report");
    transpile_cmd->add_option("--model", transpile.model, "serialized model file")->required()->check(CLI::ExistingFile);
    transpile_cmd->add_option("--out", transpile.out, ".c output (stdout when omitted)");
    transpile_cmd->add_option("--report", transpile.report, "size report JSON output");
    transpile_cmd->add_flag("--dump", transpile.dump, "print the tree listing on stderr");

    RecommendArgs recommend;
    auto* recommend_cmd = app.add_subcommand("recommend", "feasibility of each pattern and medium per app class");
    recommend_cmd->add_option("--profiles", recommend.profiles, "medium profile JSON")->check(CLI::ExistingFile);
    recommend_cmd->add_option("--results", recommend.results, "results.csv for measured message sizes")
        ->check(CLI::ExistingFile);
    recommend_cmd->add_option("--out", recommend.out, "CSV output (stdout when omitted)");
    recommend_cmd->add_option("--s-bytes", recommend.s_bytes, "override S message size");
    recommend_cmd->add_option("--d-bytes", recommend.d_bytes, "override D message size");
    recommend_cmd->add_option("--m-bytes", recommend.m_bytes, "override M message size");
    recommend_cmd->add_option("--edge-ms", recommend.edge_ms, "edge compute cost");
    recommend_cmd->add_option("--cloud-ms", recommend.cloud_ms, "cloud compute cost");

    TrendArgs trends;
    auto* trends_cmd = app.add_subcommand("check-trends", "qualitative trend verdicts from results.csv");
    trends_cmd->add_option("--results", trends.results, "results.csv")->required()->check(CLI::ExistingFile);
    trends_cmd->add_option("--out", trends.out, "verdict JSON output (stdout when omitted)");
    trends_cmd->add_option("--learner", trends.learner, "learner whose rows are checked");
    trends_cmd->add_option("--margin", trends.margin, "score margin for T1 and T2");
    trends_cmd->add_flag("--strict", trends.strict, "exit 3 unless every verdict passes");

    GenerateArgs generate;
    auto* generate_cmd = app.add_subcommand("generate", "write a drift stream as CSV");
    generate_cmd->add_option("--dataset", generate.dataset, "circles or random_tree");
    generate_cmd->add_option("-n,--iterations", generate.n, "stream length");
    generate_cmd->add_option("--seed", generate.seed, "generator seed offset");
    generate_cmd->add_option("--out", generate.out, "CSV output (stdout when omitted)");

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "train on the last frame of a stream CSV and write the model");
    fit_cmd->add_option("--stream", fit.stream, "stream CSV")->required()->check(CLI::ExistingFile);
    fit_cmd->add_option("--learner", fit.learner, "decision_tree or gaussian_nb");
    fit_cmd->add_option("--frame", fit.frame, "frame capacity");
    fit_cmd->add_option("--out", fit.out, "model output")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) return cmd_run(run);
        if (*transpile_cmd) return cmd_transpile(transpile);
        if (*recommend_cmd) return cmd_recommend(recommend);
        if (*trends_cmd) return cmd_check_trends(trends);
        if (*generate_cmd) return cmd_generate(generate);
        if (*fit_cmd) return cmd_fit(fit);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
