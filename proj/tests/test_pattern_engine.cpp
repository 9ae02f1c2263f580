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
#include <deltaedge/pattern_engine.hpp>

#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>

using namespace deltaedge;
using namespace deltaedge::patterns;

namespace {

streams::SiteStreams circles_sites(std::size_t n_points, std::size_t n_sites, std::uint64_t seed = 0) {
    streams::CirclesConfig config;
    config.seed = seed;
    config.angular_increment /= static_cast<double>(n_sites);
    return streams::divide_equal(streams::generate_circles(config, n_points), n_sites);
}

EngineConfig config_for(Pattern pattern, std::size_t frame = 30) {
    EngineConfig c;
    c.pattern = pattern;
    c.frame_capacity = frame;
    return c;
}

std::vector<Label> predictions(const PatternRun& run) {
    std::vector<Label> out;
    for (const auto& r : run.log) out.push_back(r.predicted);
    return out;
}

}// namespace

TEST(Payload, EncodingSizesAndRoundTrip) {
    const SensorRecord record{LabeledPoint{{1.5, -2.0}, 3, 42}, false};
    const Payload s = SensorPayload{{record}};
    EXPECT_EQ(encode_payload(s).size(), 4U + 8 + 4 + 1 + 4 + 16);
    EXPECT_EQ(decode_payload(MessageKind::S, encode_payload(s)), s);

    const Payload sd = SensorDecisionPayload{{record, record}, {1, kAbstain}};
    EXPECT_EQ(decode_payload(MessageKind::SD, encode_payload(sd)), sd);

    const Payload d = DecisionPayload{6};
    EXPECT_EQ(encode_payload(d).size(), 4U);
    EXPECT_EQ(decode_payload(MessageKind::D, encode_payload(d)), d);

    const Payload m = ModelPayload{Bytes{1, 2, 3}};
    EXPECT_EQ(decode_payload(MessageKind::M, encode_payload(m)), m);

    const Message message = make_message(s, 0, kCloudNode, 0.0);
    EXPECT_EQ(message.kind(), MessageKind::S);
    EXPECT_EQ(message.size, encode_payload(s).size());
}

TEST(Payload, MalformedInputRejected) {
    const Bytes bytes = encode_payload(SensorPayload{{SensorRecord{LabeledPoint{{1.0}, 0, 0}, true}}});
    for (std::size_t cut = 0; cut < bytes.size(); ++cut) {
        EXPECT_THROW(decode_payload(MessageKind::S, std::span(bytes).first(cut)), DecodeError) << cut;
    }
    Bytes trailing = bytes;
    trailing.push_back(0);
    EXPECT_THROW(decode_payload(MessageKind::S, trailing), DecodeError);
    Bytes bad_flag = bytes;
    bad_flag[4 + 8 + 4] = 2;
    EXPECT_THROW(decode_payload(MessageKind::S, bad_flag), DecodeError);
    EXPECT_THROW(encode_payload(SensorDecisionPayload{{}, {1}}), std::invalid_argument);
}

TEST(Engine, ConfigValidation) {
    EngineConfig c;
    c.frame_capacity = 0;
    EXPECT_THROW(Engine(c, 1), ConfigError);
    c = {};
    c.push_interval = 0;
    EXPECT_THROW(Engine(c, 1), ConfigError);
    c = {};
    c.sample_period_ms = 0;
    EXPECT_THROW(Engine(c, 1), ConfigError);
    EXPECT_THROW(Engine(EngineConfig{}, 0), ConfigError);
}

TEST(Engine, WrongStepForPatternRejected) {
    Engine engine(config_for(Pattern::P0), 1);
    EXPECT_THROW(engine.step_p1(0, 0, {{0.0}, 0, 0}, true), std::logic_error);
    EXPECT_THROW(engine.step_p2(0, 0, {{0.0}, 0, 0}, true), std::logic_error);
}

TEST(Engine, RepeatedRoundRejected) {
    Engine engine(config_for(Pattern::P1), 1);
    engine.step(0, 3, {{0.0}, 0, 0}, true);
    EXPECT_THROW(engine.step(0, 3, {{0.0}, 0, 1}, true), std::logic_error);
}

TEST(P1, NoCommunicationAndConservation) {
    const auto sites = circles_sites(700, 5);
    const auto run = run_pattern(config_for(Pattern::P1), sites);
    EXPECT_EQ(run.log.size(), sites.total_points());
    for (const auto& r : run.log) {
        EXPECT_EQ(r.bytes_up, 0U);
        EXPECT_EQ(r.bytes_down, 0U);
        EXPECT_EQ(r.latency_ms, 1.0);
    }
    for (std::size_t k = 0; k < run.messages.sent.size(); ++k) EXPECT_EQ(run.messages.sent[k], 0U);
    EXPECT_FALSE(run.cloud);
}

TEST(P1, MatchesReferenceTestThenTrainLoop) {
    const auto sites = circles_sites(600, 3, 4);
    const auto run = run_pattern(config_for(Pattern::P1, 25), sites);
    for (std::size_t s = 0; s < 3; ++s) {
        learn::MovingFrame frame(25);
        std::optional<learn::ModelSnapshot> model;
        learn::ScoreTracker tracker;
        std::vector<double> expected;
        for (const auto& p : sites.per_site[s]) {
            const Label guess = model ? learn::predict(*model, p.features) : kAbstain;
            tracker.update(guess, p.label);
            expected.push_back(tracker.average());
            frame.push(p);
            model = learn::fit(learn::LearnerKind::decision_tree, frame);
        }
        std::vector<double> actual;
        for (const auto& r : run.log) {
            if (r.site == s) actual.push_back(r.score_avg);
        }
        EXPECT_EQ(actual, expected);
    }
}

TEST(P1, ColdStartAbstainsOnce) {
    const auto run = run_pattern(config_for(Pattern::P1), circles_sites(50, 5));
    for (const auto& r : run.log) {
        EXPECT_EQ(r.predicted == kAbstain, r.round == 0);
        EXPECT_EQ(r.model_size == 0, r.round == 0);
    }
}

TEST(Equivalence, SingleSiteP1MatchesP2UnderZeroLatency) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto sites = circles_sites(800, 1, seed);
        const auto p1 = run_pattern(config_for(Pattern::P1, 40), sites);
        const auto p2 = run_pattern(config_for(Pattern::P2, 40), sites);
        EXPECT_EQ(predictions(p1), predictions(p2));
    }
}

TEST(Equivalence, P0WithPushEveryRoundLagsP1ByOneModel) {
    const auto sites = circles_sites(400, 1, 2);
    auto p0_config = config_for(Pattern::P0, 30);
    p0_config.push_interval = 1;
    const auto p0 = run_pattern(p0_config, sites);
    const auto& points = sites.per_site[0];
    for (std::size_t r = 0; r < points.size(); ++r) {
        // model used at round r was trained on points [0, r-2]
        if (r < 2) {
            EXPECT_EQ(p0.log[r].predicted, kAbstain) << r;
            continue;
        }
        learn::MovingFrame frame(30);
        for (std::size_t k = 0; k + 1 < r; ++k) frame.push(points[k]);
        const auto model = learn::fit(learn::LearnerKind::decision_tree, frame);
        ASSERT_EQ(p0.log[r].predicted, learn::predict(model, points[r].features)) << r;
    }
    // and the same predicting models appear in P1 exactly one round earlier
    const auto p1 = run_pattern(config_for(Pattern::P1, 30), sites);
    for (std::size_t r = 2; r < points.size(); ++r) EXPECT_EQ(p0.log[r].model_size, p1.log[r - 1].model_size);
}

TEST(P0, ModelChangesOnlyAtPushes) {
    const auto sites = circles_sites(3500, 5);
    auto config = config_for(Pattern::P0, 150);
    config.push_interval = 150;
    const auto run = run_pattern(config, sites);
    std::vector<std::uint64_t> version(5, 0);
    std::set<std::uint64_t> activation_rounds;
    for (const auto& r : run.log) {
        if (r.model_version != version[r.site]) {
            activation_rounds.insert(r.round);
            version[r.site] = r.model_version;
        }
    }
    // warm-up: cloud frame of 150 fills after 30 rounds of 5 sites, pushed at round 30, active at 31
    EXPECT_EQ(activation_rounds, (std::set<std::uint64_t>{31, 151, 301, 451, 601}));
    EXPECT_EQ(run.cloud->pushes, 5U);
    EXPECT_EQ(run.messages.sent_of(MessageKind::M), 25U);
    EXPECT_EQ(run.messages.received_of(MessageKind::M), 25U);
}

TEST(P0, PushBytesEqualSerializedModelSize) {
    const auto sites = circles_sites(1000, 2);
    auto config = config_for(Pattern::P0, 60);
    config.push_interval = 100;
    const auto run = run_pattern(config, sites);
    std::map<std::size_t, std::vector<const StepRecord*>> by_site;
    for (const auto& r : run.log) by_site[r.site].push_back(&r);
    for (const auto& [site, steps] : by_site) {
        for (std::size_t i = 0; i + 1 < steps.size(); ++i) {
            if (steps[i]->bytes_down > 0) {
                EXPECT_EQ(steps[i]->bytes_down, steps[i + 1]->model_size);
            }
        }
    }
    EXPECT_EQ(run.messages.sent_of(MessageKind::D), 0U);
}

TEST(P0, UplinkIsOneSMessagePerTrainedPoint) {
    const auto sites = circles_sites(500, 5);
    const auto run = run_pattern(config_for(Pattern::P0), sites);
    EXPECT_EQ(run.messages.sent_of(MessageKind::S), 500U);
    EXPECT_EQ(run.messages.received_of(MessageKind::S), 500U);
    for (const auto& r : run.log) EXPECT_EQ(r.bytes_up, 37U);
}

TEST(P0, BatchingFlushesRemainder) {
    const auto sites = circles_sites(23, 1);
    auto config = config_for(Pattern::P0);
    config.batch_size = 5;
    const auto run = run_pattern(config, sites);
    EXPECT_EQ(run.messages.sent_of(MessageKind::S), 5U);
    EXPECT_EQ(run.cloud->global_frame.size(), 23U);
}

TEST(P0, ReportPredictionsUsesSD) {
    auto config = config_for(Pattern::P0);
    config.report_predictions = true;
    const auto run = run_pattern(config, circles_sites(50, 2));
    EXPECT_EQ(run.messages.sent_of(MessageKind::S), 0U);
    EXPECT_EQ(run.messages.sent_of(MessageKind::SD), 50U);
    EXPECT_EQ(run.log.front().bytes_up, 41U);
}

TEST(P0, BlindPointsAreNotSent) {
    const auto stream = streams::generate_circles(streams::CirclesConfig{}, 700);
    const auto sites = streams::divide_without_one(stream, 5, streams::default_assignment(5, 7));
    const auto run = run_pattern(config_for(Pattern::P0), sites);
    std::size_t trainable = 0;
    for (std::size_t s = 0; s < 5; ++s) {
        for (const auto& p : sites.per_site[s]) trainable += sites.trains_on(s, p) ? 1 : 0;
    }
    EXPECT_LT(trainable, 700U);
    EXPECT_EQ(run.messages.sent_of(MessageKind::S), trainable);
}

TEST(P0, SlowMediumDelaysActivation) {
    auto config = config_for(Pattern::P0, 10);
    config.push_interval = 50;
    config.medium = net::MediumProfile{"slow", 300.0, 1200.0, 40.0, 0.0, 0.0, 45.0};
    const auto run = run_pattern(config, circles_sites(200, 1));
    // warm-up push at round 10 takes > 1545 ms, so the model is first used at round 12
    for (const auto& r : run.log) {
        if (r.round <= 11) {
            EXPECT_EQ(r.predicted, kAbstain) << r.round;
        }
        if (r.round == 12) {
            EXPECT_NE(r.predicted, kAbstain);
        }
        EXPECT_EQ(r.latency_ms, 1.0);
    }
}

TEST(P2, LatencyAndBytesFollowTheMedium) {
    const auto sites = circles_sites(100, 2);
    auto config = config_for(Pattern::P2);
    const auto ideal = run_pattern(config, sites);
    for (const auto& r : ideal.log) {
        EXPECT_EQ(r.latency_ms, 1.0);
        EXPECT_EQ(r.bytes_up, 37U);
        EXPECT_EQ(r.bytes_down, 4U);
    }
    config.medium = net::default_profiles()[1];
    const auto wifi = run_pattern(config, sites);
    const double expected = net::transaction_time(config.medium, 37) + 1.0 + net::transaction_time(config.medium, 4);
    for (const auto& r : wifi.log) EXPECT_NEAR(r.latency_ms, expected, 1e-9);
    EXPECT_EQ(predictions(ideal), predictions(wifi));
}

TEST(P2, MessageConservation) {
    const auto run = run_pattern(config_for(Pattern::P2), circles_sites(300, 3));
    EXPECT_EQ(run.messages.sent_of(MessageKind::S), 300U);
    EXPECT_EQ(run.messages.received_of(MessageKind::S), 300U);
    EXPECT_EQ(run.messages.sent_of(MessageKind::D), 300U);
    EXPECT_EQ(run.messages.sent_of(MessageKind::M), 0U);
    for (const auto& site : run.sites) EXPECT_FALSE(site.current_model);
}

TEST(P2, BlindPointsStillClassifiedButNotTrained) {
    const auto stream = streams::generate_circles(streams::CirclesConfig{}, 350);
    const auto sites = streams::divide_without_one(stream, 5, streams::default_assignment(5, 7));
    const auto run = run_pattern(config_for(Pattern::P2, 1000), sites);
    EXPECT_EQ(run.log.size(), 350U);
    EXPECT_EQ(run.cloud->global_frame.size(), 350U - 50U);
    std::size_t trained = 0;
    for (const auto& r : run.log) trained += r.trained ? 1 : 0;
    EXPECT_EQ(trained, 300U);
}

TEST(RunPattern, ClocksStrictlyIncreasePerSite) {
    for (const auto pattern : {Pattern::P0, Pattern::P1, Pattern::P2}) {
        const auto run = run_pattern(config_for(pattern), circles_sites(500, 5));
        std::map<std::size_t, double> last;
        for (const auto& r : run.log) {
            if (last.contains(r.site)) {
                EXPECT_GT(r.time_ms, last[r.site]);
            }
            last[r.site] = r.time_ms;
        }
        EXPECT_EQ(last.size(), 5U);
    }
}

TEST(RunPattern, MergeOrderIsRoundThenSite) {
    const auto run = run_pattern(config_for(Pattern::P2), circles_sites(60, 4));
    for (std::size_t i = 1; i < run.log.size(); ++i) {
        const auto& a = run.log[i - 1];
        const auto& b = run.log[i];
        EXPECT_TRUE(a.round < b.round || (a.round == b.round && a.site < b.site));
    }
}

TEST(RunPattern, EmptyStreamsGiveEmptyLog) {
    streams::SiteStreams empty;
    empty.per_site.resize(3);
    EXPECT_TRUE(run_pattern(config_for(Pattern::P2), empty).log.empty());
}

TEST(RunPattern, MismatchedDimensionsRejected) {
    streams::SiteStreams sites;
    sites.per_site = {{{{1.0, 2.0}, 0, 0}}, {{{1.0}, 0, 1}}};
    EXPECT_THROW(run_pattern(config_for(Pattern::P1), sites), learn::DimensionError);
}

TEST(RunPattern, Deterministic) {
    const auto sites = circles_sites(700, 5, 3);
    for (const auto pattern : {Pattern::P0, Pattern::P1, Pattern::P2}) {
        std::ostringstream a, b;
        write_step_log_csv(a, run_pattern(config_for(pattern), sites).log);
        write_step_log_csv(b, run_pattern(config_for(pattern), sites).log);
        EXPECT_EQ(a.str(), b.str());
    }
}

TEST(StepLog, CsvRoundTrip) {
    const auto run = run_pattern(config_for(Pattern::P2), circles_sites(100, 2));
    std::stringstream buffer;
    write_step_log_csv(buffer, run.log);
    const std::string text = buffer.str();
    EXPECT_EQ(text.substr(0, text.find('\n')),
              "pattern,site,iteration,predicted,actual,score_avg,latency_ms,bytes_up,bytes_down,model_size");
    const auto back = read_step_log_csv(buffer);
    ASSERT_EQ(back.size(), run.log.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        EXPECT_EQ(back[i].site, run.log[i].site);
        EXPECT_EQ(back[i].round, run.log[i].round);
        EXPECT_EQ(back[i].predicted, run.log[i].predicted);
        EXPECT_EQ(back[i].score_avg, run.log[i].score_avg);
        EXPECT_EQ(back[i].latency_ms, run.log[i].latency_ms);
        EXPECT_EQ(back[i].model_size, run.log[i].model_size);
    }
    std::stringstream bad("pattern,site\n");
    EXPECT_THROW(read_step_log_csv(bad), std::runtime_error);
}
