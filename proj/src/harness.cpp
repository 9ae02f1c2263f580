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
#include <deltaedge/text.hpp>

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <thread>

namespace deltaedge::harness {

std::string_view to_string(Dataset dataset) { return dataset == Dataset::circles ? "circles" : "random_tree"; }
std::string_view to_string(Division division) {
    switch (division) {
        case Division::equal: return "equal";
        case Division::without_one: return "without_one";
        case Division::without_one_excluded: return "without_one_excluded";
    }
    return "?";
}

Dataset parse_dataset(std::string_view text) {
    if (text == "circles") return Dataset::circles;
    if (text == "random_tree") return Dataset::random_tree;
    throw ConfigError("unknown dataset '" + std::string(text) + "'");
}

Division parse_division(std::string_view text) {
    if (text == "equal") return Division::equal;
    if (text == "without_one") return Division::without_one;
    if (text == "without_one_excluded") return Division::without_one_excluded;
    throw ConfigError("unknown division '" + std::string(text) + "'");
}

void ScenarioConfig::validate() const {
    if (name.find_first_of(",\n\"/\\") != std::string::npos) throw ConfigError("scenario name '" + name + "' has reserved characters");
    if (n_sites == 0) throw ConfigError("n_sites must be > 0");
    if (seeds.empty()) throw ConfigError("seeds must not be empty");
    if (n_iterations == 0) throw ConfigError("n_iterations must be > 0");
    if (dataset == Dataset::circles) circles.validate();
    else random_tree.validate();
    patterns::EngineConfig probe;
    probe.frame_capacity = frame_capacity;
    probe.push_interval = push_interval;
    probe.batch_size = batch_size;
    probe.sample_period_ms = sample_period_ms;
    probe.compute = compute;
    probe.score_window = score_window;
    probe.validate();
}

std::string ScenarioConfig::display_name() const {
    if (!name.empty()) return name;
    std::string out = std::string(to_string(dataset)) + "_" + std::string(to_string(division)) + "_"
                      + std::string(deltaedge::to_string(pattern)) + "_" + std::string(learn::to_string(learner))
                      + "_f" + std::to_string(frame_capacity);
    if (pattern == Pattern::P0) out += "_p" + std::to_string(push_interval);
    if (pattern == Pattern::P0 && batch_size != 1) out += "_b" + std::to_string(batch_size);
    if (medium != "instantaneous") out += "_" + medium;
    return out;
}

streams::SiteStreams build_streams(const ScenarioConfig& config, std::uint64_t seed) {
    config.validate();
    std::vector<LabeledPoint> stream;
    std::size_t n_categories = 0;
    if (config.dataset == Dataset::circles) {
        streams::CirclesConfig circles = config.circles;
        circles.seed += seed;
        if (config.drift_per_round) circles.angular_increment /= static_cast<double>(config.n_sites);
        stream = streams::generate_circles(circles, config.n_iterations);
        n_categories = circles.n_categories;
    } else {
        streams::RandomTreeConfig tree = config.random_tree;
        tree.seed_a += seed * 0x10000;
        tree.seed_b += seed * 0x10000;
        stream = streams::generate_random_tree_stream(tree, config.n_iterations);
        n_categories = tree.n_categories;
    }
    if (config.division == Division::equal) return streams::divide_equal(stream, config.n_sites);
    const auto mode = config.division == Division::without_one ? streams::WithoutOneMode::blind
                                                                : streams::WithoutOneMode::exclude;
    return streams::divide_without_one(stream, config.n_sites, streams::default_assignment(config.n_sites, n_categories),
                                       mode);
}

patterns::EngineConfig engine_config(const ScenarioConfig& config, const std::vector<net::MediumProfile>& profiles) {
    patterns::EngineConfig engine;
    engine.pattern = config.pattern;
    engine.learner = config.learner;
    engine.learner_options = config.learner_options;
    engine.frame_capacity = config.frame_capacity;
    engine.push_interval = config.push_interval;
    engine.batch_size = config.batch_size;
    engine.report_predictions = config.report_predictions;
    engine.medium = net::find_profile(profiles, config.medium);
    engine.compute = config.compute;
    engine.sample_period_ms = config.sample_period_ms;
    engine.score_window = config.score_window;
    return engine;
}

namespace {

struct OffsetAccumulator {
    std::array<double, 3> hits{};
    std::array<std::size_t, 3> count{};

    void add(const patterns::PatternRun& run, std::size_t window) {
        std::vector<std::uint64_t> version(run.sites.size(), 0);
        std::vector<std::size_t> offset(run.sites.size(), 0);
        for (const auto& step : run.log) {
            if (step.model_version == 0) continue;
            if (step.model_version != version[step.site]) {
                version[step.site] = step.model_version;
                offset[step.site] = 0;
            }
            const std::size_t w = offset[step.site]++ / window;
            if (w < 3) {
                hits[w] += step.correct() ? 1.0 : 0.0;
                ++count[w];
            }
        }
    }

    OffsetScores scores() const {
        OffsetScores out;
        for (std::size_t w = 0; w < 3; ++w) {
            out.count[w] = count[w];
            out.mean[w] = count[w] == 0 ? std::numeric_limits<double>::quiet_NaN() : hits[w] / static_cast<double>(count[w]);
        }
        return out;
    }
};

}// namespace

OffsetScores p0_offset_report(const patterns::PatternRun& run, std::size_t window) {
    if (run.pattern != Pattern::P0) throw ConfigError("offset report needs a P0 run, got " + std::string(to_string(run.pattern)));
    if (window == 0) throw ConfigError("offset window must be > 0");
    OffsetAccumulator acc;
    acc.add(run, window);
    return acc.scores();
}

SeedSummary summarize(const patterns::PatternRun& run, std::size_t offset_window) {
    SeedSummary out;
    std::size_t with_model = 0;
    for (const auto& step : run.log) {
        out.mean_score += step.correct() ? 1.0 : 0.0;
        out.mean_latency_ms += step.latency_ms;
        if (step.model_size > 0) {
            out.mean_model_size += static_cast<double>(step.model_size);
            ++with_model;
        }
    }
    if (!run.log.empty()) {
        out.mean_score /= static_cast<double>(run.log.size());
        out.mean_latency_ms /= static_cast<double>(run.log.size());
    }
    if (with_model > 0) out.mean_model_size /= static_cast<double>(with_model);
    const std::array kinds{patterns::MessageKind::S, patterns::MessageKind::D, patterns::MessageKind::M};
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        const auto sent = run.messages.sent_of(kinds[i]);
        out.mean_message_bytes[i] = sent == 0 ? 0.0 : static_cast<double>(run.messages.bytes_of(kinds[i])) / static_cast<double>(sent);
    }
    if (run.pattern == Pattern::P0) out.offsets = p0_offset_report(run, offset_window);
    return out;
}

namespace {

ResultRow key_row(const ScenarioConfig& config) {
    ResultRow row;
    row.name = config.display_name();
    row.dataset = config.dataset;
    row.division = config.division;
    row.pattern = config.pattern;
    row.learner = config.learner;
    row.frame_capacity = config.frame_capacity;
    row.push_interval = config.pattern == Pattern::P0 ? config.push_interval : 0;
    row.medium = config.medium;
    row.n_sites = config.n_sites;
    row.n_iterations = config.n_iterations;
    return row;
}

std::string one_line(std::string text) {
    std::replace_if(text.begin(), text.end(), [](char c) { return c == ',' || c == '\n' || c == '\r'; }, ';');
    return text;
}

ResultRow run_scenario(const ScenarioConfig& config, const MatrixOptions& options) {
    ResultRow row = key_row(config);
    try {
        config.validate();
        const patterns::EngineConfig engine = engine_config(config, options.profiles);
        const std::size_t n = config.seeds.size();
        std::vector<std::optional<patterns::PatternRun>> runs(n);
        std::vector<std::string> errors(n);
        std::atomic<std::size_t> next{0};
        const auto worker = [&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    runs[i] = patterns::run_pattern(engine, build_streams(config, config.seeds[i]));
                } catch (const std::exception& e) {
                    errors[i] = e.what();
                }
            }
        };
        std::size_t threads = options.threads == 0 ? std::max(1U, std::thread::hardware_concurrency()) : options.threads;
        threads = std::min(threads, n);
        if (threads <= 1) {
            worker();
        } else {
            std::vector<std::jthread> pool;
            for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!errors[i].empty()) throw std::runtime_error("seed " + std::to_string(config.seeds[i]) + ": " + errors[i]);
        }

        OffsetAccumulator offsets;
        for (std::size_t i = 0; i < n; ++i) {
            const SeedSummary summary = summarize(*runs[i]);
            row.mean_score += summary.mean_score;
            row.mean_model_size += summary.mean_model_size;
            row.mean_latency_ms += summary.mean_latency_ms;
            row.mean_s_bytes += summary.mean_message_bytes[0];
            row.mean_d_bytes += summary.mean_message_bytes[1];
            row.mean_m_bytes += summary.mean_message_bytes[2];
            if (config.pattern == Pattern::P0) offsets.add(*runs[i], 50);
            if (options.log_sink) options.log_sink(config, config.seeds[i], *runs[i]);
            runs[i].reset();
        }
        const double k = static_cast<double>(n);
        row.mean_score /= k;
        row.mean_model_size /= k;
        row.mean_latency_ms /= k;
        row.mean_s_bytes /= k;
        row.mean_d_bytes /= k;
        row.mean_m_bytes /= k;
        if (config.pattern == Pattern::P0) row.offset_scores = offsets.scores().mean;
        row.n_seeds = n;
    } catch (const std::exception& e) {
        ResultRow failed = key_row(config);
        failed.status = one_line(std::string("error: ") + e.what());
        return failed;
    }
    return row;
}

}// namespace

std::vector<ResultRow> run_matrix(const std::vector<ScenarioConfig>& configs, const MatrixOptions& options) {
    std::vector<ResultRow> rows;
    rows.reserve(configs.size());
    for (const auto& config : configs) rows.push_back(run_scenario(config, options));
    return rows;
}

namespace {

constexpr std::string_view kResultsHeader =
    "name,dataset,division,pattern,learner,frame_capacity,push_interval,medium,n_sites,n_iterations,n_seeds,"
    "mean_score,mean_model_size,mean_latency_ms,mean_s_bytes,mean_d_bytes,mean_m_bytes,offset_w1,offset_w2,"
    "offset_w3,status";

}// namespace

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
    using text::format_double;
    out << kResultsHeader << '\n';
    for (const auto& r : rows) {
        out << r.name << ',' << to_string(r.dataset) << ',' << to_string(r.division) << ',' << to_string(r.pattern)
            << ',' << learn::to_string(r.learner) << ',' << r.frame_capacity << ',' << r.push_interval << ','
            << r.medium << ',' << r.n_sites << ',' << r.n_iterations << ',' << r.n_seeds << ','
            << format_double(r.mean_score) << ',' << format_double(r.mean_model_size) << ','
            << format_double(r.mean_latency_ms) << ',' << format_double(r.mean_s_bytes) << ','
            << format_double(r.mean_d_bytes) << ',' << format_double(r.mean_m_bytes);
        for (std::size_t w = 0; w < 3; ++w) {
            out << ',';
            if (r.offset_scores) out << format_double((*r.offset_scores)[w]);
        }
        out << ',' << one_line(r.status) << '\n';
    }
}

std::vector<ResultRow> read_results_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kResultsHeader) throw std::runtime_error("results csv: bad header");
    std::vector<ResultRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = text::split(line, ',');
        if (f.size() != 21) {
            throw std::runtime_error("results csv: line " + std::to_string(line_no) + " has " + std::to_string(f.size())
                                     + " fields, expected 21");
        }
        try {
            const auto count = [](std::string_view s) { return static_cast<std::size_t>(text::parse_int(s)); };
            ResultRow r;
            r.name = f[0];
            r.dataset = parse_dataset(f[1]);
            r.division = parse_division(f[2]);
            r.pattern = parse_pattern(f[3]);
            r.learner = learn::parse_learner_kind(f[4]);
            r.frame_capacity = count(f[5]);
            r.push_interval = count(f[6]);
            r.medium = f[7];
            r.n_sites = count(f[8]);
            r.n_iterations = count(f[9]);
            r.n_seeds = count(f[10]);
            r.mean_score = text::parse_double(f[11]);
            r.mean_model_size = text::parse_double(f[12]);
            r.mean_latency_ms = text::parse_double(f[13]);
            r.mean_s_bytes = text::parse_double(f[14]);
            r.mean_d_bytes = text::parse_double(f[15]);
            r.mean_m_bytes = text::parse_double(f[16]);
            if (!f[17].empty()) {
                r.offset_scores = std::array{text::parse_double(f[17]), text::parse_double(f[18]), text::parse_double(f[19])};
            }
            r.status = f[20];
            rows.push_back(std::move(r));
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error("results csv: line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return rows;
}

std::string_view to_string(Verdict verdict) {
    switch (verdict) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::not_evaluable: return "not_evaluable";
    }
    return "?";
}

namespace {

class Grid {
  public:
    Grid(const std::vector<ResultRow>& rows, learn::LearnerKind learner) : rows_(rows), learner_(learner) {}

    const ResultRow* find(Dataset dataset, Division division, Pattern pattern, std::size_t frame,
                          std::size_t push_interval = 150) const {
        for (const auto& r : rows_) {
            if (!r.ok() || r.learner != learner_ || r.dataset != dataset || r.division != division || r.pattern != pattern
                || r.frame_capacity != frame) {
                continue;
            }
            if (pattern == Pattern::P0 && (r.push_interval != push_interval || !r.offset_scores)) continue;
            return &r;
        }
        return nullptr;
    }

  private:
    const std::vector<ResultRow>& rows_;
    learn::LearnerKind learner_;
};

std::string fmt(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.4f", value);
    return buffer;
}

TrendResult missing(std::string id, std::string claim, const std::string& what) {
    return TrendResult{std::move(id), std::move(claim), Verdict::not_evaluable, "no result row for " + what};
}

Verdict verdict_of(bool ok) { return ok ? Verdict::pass : Verdict::fail; }

}// namespace

std::vector<TrendResult> trend_checks(const std::vector<ResultRow>& rows, const TrendOptions& o) {
    const Grid grid(rows, o.learner);
    std::vector<TrendResult> out;
    const auto C = Dataset::circles;
    const auto RT = Dataset::random_tree;
    const auto EQ = Division::equal;
    const auto WO = Division::without_one;

    {
        const std::string claim = "P1 circles frame 150: equal minus without_one > " + fmt(o.margin);
        const auto* eq = grid.find(C, EQ, Pattern::P1, 150);
        const auto* wo = grid.find(C, WO, Pattern::P1, 150);
        if (eq == nullptr || wo == nullptr) {
            out.push_back(missing("T1", claim, "circles P1 frame 150 in both divisions"));
        } else {
            const double gap = eq->mean_score - wo->mean_score;
            out.push_back({"T1", claim, verdict_of(gap > o.margin),
                           "equal " + fmt(eq->mean_score) + " without_one " + fmt(wo->mean_score) + " gap " + fmt(gap)});
        }
    }
    {
        const std::string claim = "P2 circles frame 150: |equal minus without_one| < " + fmt(o.margin);
        const auto* eq = grid.find(C, EQ, Pattern::P2, 150);
        const auto* wo = grid.find(C, WO, Pattern::P2, 150);
        if (eq == nullptr || wo == nullptr) {
            out.push_back(missing("T2", claim, "circles P2 frame 150 in both divisions"));
        } else {
            const double gap = eq->mean_score - wo->mean_score;
            out.push_back({"T2", claim, verdict_of(std::abs(gap) < o.margin),
                           "equal " + fmt(eq->mean_score) + " without_one " + fmt(wo->mean_score) + " gap " + fmt(gap)});
        }
    }
    {
        const std::string claim = "P1 circles equal: frame 150 >= frames 50 and 300 (slack " + fmt(o.ordering_slack) + ")";
        const auto* f50 = grid.find(C, EQ, Pattern::P1, 50);
        const auto* f150 = grid.find(C, EQ, Pattern::P1, 150);
        const auto* f300 = grid.find(C, EQ, Pattern::P1, 300);
        if (f50 == nullptr || f150 == nullptr || f300 == nullptr) {
            out.push_back(missing("T3", claim, "circles P1 equal frames 50, 150 and 300"));
        } else {
            const bool ok = f150->mean_score - f50->mean_score >= -o.ordering_slack
                            && f150->mean_score - f300->mean_score >= -o.ordering_slack;
            out.push_back({"T3", claim, verdict_of(ok),
                           "f50 " + fmt(f50->mean_score) + " f150 " + fmt(f150->mean_score) + " f300 "
                               + fmt(f300->mean_score)});
        }
    }
    {
        const std::string claim = "P0 circles push 150: offset window 1 minus window 3 > " + fmt(o.offset_gap);
        const auto* p0 = grid.find(C, EQ, Pattern::P0, 150);
        if (p0 == nullptr) {
            out.push_back(missing("T4_circles", claim, "circles P0 equal frame 150 push 150"));
        } else {
            const auto& w = *p0->offset_scores;
            const double gap = w[0] - w[2];
            out.push_back({"T4_circles", claim, verdict_of(gap > o.offset_gap),
                           "w1 " + fmt(w[0]) + " w2 " + fmt(w[1]) + " w3 " + fmt(w[2]) + " gap " + fmt(gap)});
        }
    }
    {
        const std::string claim = "P0 random_tree push 150: |offset window 1 minus window 3| < " + fmt(o.offset_flat);
        const auto* p0 = grid.find(RT, EQ, Pattern::P0, 150);
        if (p0 == nullptr) {
            out.push_back(missing("T4_random_tree", claim, "random_tree P0 equal frame 150 push 150"));
        } else {
            const auto& w = *p0->offset_scores;
            const double gap = w[0] - w[2];
            out.push_back({"T4_random_tree", claim, verdict_of(std::abs(gap) < o.offset_flat),
                           "w1 " + fmt(w[0]) + " w2 " + fmt(w[1]) + " w3 " + fmt(w[2]) + " gap " + fmt(gap)});
        }
    }
    {
        const std::string claim = "circles without_one frame 150: P2 >= P0 >= P1 (slack " + fmt(o.ordering_slack) + ")";
        const auto* p0 = grid.find(C, WO, Pattern::P0, 150);
        const auto* p1 = grid.find(C, WO, Pattern::P1, 150);
        const auto* p2 = grid.find(C, WO, Pattern::P2, 150);
        if (p0 == nullptr || p1 == nullptr || p2 == nullptr) {
            out.push_back(missing("T5", claim, "circles without_one frame 150 for P0, P1 and P2"));
        } else {
            const bool ok = p2->mean_score - p0->mean_score >= -o.ordering_slack
                            && p0->mean_score - p1->mean_score >= -o.ordering_slack;
            out.push_back({"T5", claim, verdict_of(ok),
                           "P2 " + fmt(p2->mean_score) + " P0 " + fmt(p0->mean_score) + " P1 " + fmt(p1->mean_score)});
        }
    }
    return out;
}

std::string verdicts_to_json(const std::vector<TrendResult>& results) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const auto& r : results) {
        doc.push_back({{"id", r.id}, {"claim", r.claim}, {"verdict", std::string(to_string(r.verdict))}, {"detail", r.detail}});
    }
    return nlohmann::ordered_json{{"verdicts", doc}}.dump(2) + "\n";
}

net::MessageSizes measured_sizes(const std::vector<ResultRow>& rows) {
    const auto mean_of = [&rows](Pattern pattern, double ResultRow::*field) {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& r : rows) {
            if (!r.ok() || r.pattern != pattern || r.*field <= 0.0) continue;
            sum += r.*field;
            ++n;
        }
        return n == 0 ? 0.0 : sum / static_cast<double>(n);
    };
    const auto bytes = [](double mean) { return static_cast<std::int64_t>(std::ceil(mean)); };
    return net::MessageSizes{bytes(mean_of(Pattern::P2, &ResultRow::mean_s_bytes)),
                             bytes(mean_of(Pattern::P2, &ResultRow::mean_d_bytes)),
                             bytes(mean_of(Pattern::P0, &ResultRow::mean_m_bytes))};
}

net::Recommendation emit_recommendation_table(const std::vector<ResultRow>& rows,
                                              const std::vector<net::AppClass>& app_classes,
                                              const std::vector<net::MediumProfile>& profiles,
                                              const net::ComputeCosts& compute) {
    return net::recommend({Pattern::P0, Pattern::P1, Pattern::P2}, profiles, app_classes, measured_sizes(rows), compute);
}

}// namespace deltaedge::harness
