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
#include <deltaedge/netsim.hpp>
#include <deltaedge/random.hpp>

#include <gtest/gtest.h>

#include <limits>
#include <sstream>

using namespace deltaedge;
using namespace deltaedge::net;

namespace {

const MediumProfile& by_name(const std::string& name) {
    static const auto profiles = default_profiles();
    return find_profile(profiles, name);
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}// namespace

TEST(Transaction, ZeroPayloadIsFixedCost) {
    for (const auto& p : default_profiles()) {
        EXPECT_EQ(transaction_time(p, 0), p.setup_ms + p.first_hop_rtt_ms + p.core_rtt_ms);
        EXPECT_EQ(transaction_energy(p, 0), p.energy_setup_mj);
    }
}

TEST(Transaction, HandArithmetic) {
    const MediumProfile p{"custom", 0.0, 100.0, 100.0, 0.0, 0.0, 0.0};
    EXPECT_DOUBLE_EQ(transaction_time(p, 1250), 200.0);
    const auto report = transaction(p, 1250);
    EXPECT_DOUBLE_EQ(report.time_ms, 200.0);
    EXPECT_EQ(report.bytes, 1250U);
    EXPECT_EQ(report.profile, "custom");
}

TEST(Transaction, NegativePayloadRejected) {
    EXPECT_THROW(transaction_time(by_name("wifi"), -1), std::invalid_argument);
    EXPECT_THROW(transaction_energy(by_name("wifi"), -1), std::invalid_argument);
}

TEST(Transaction, TwoGExceedsOneSecond) {
    for (std::int64_t bytes = 64; bytes <= 65536; bytes *= 2) EXPECT_GT(transaction_time(by_name("2g"), bytes), 1000.0);
}

TEST(Transaction, EnergyIsLinear) {
    for (const auto& p : default_profiles()) {
        for (std::int64_t b : {1, 100, 5000}) {
            EXPECT_NEAR(transaction_energy(p, 2 * b) - transaction_energy(p, b), static_cast<double>(b) * p.energy_per_byte_mj,
                        1e-9);
        }
    }
}

TEST(Transaction, EnergyOrderFollowsPerByteCost) {
    const auto profiles = default_profiles();
    for (std::size_t i = 0; i + 1 < profiles.size(); ++i) {
        const auto& a = profiles[i];
        const auto& b = profiles[i + 1];
        ASSERT_LT(a.energy_per_byte_mj, b.energy_per_byte_mj);
        EXPECT_LT(transaction_energy(a, 4096), transaction_energy(b, 4096));
        EXPECT_EQ(transaction_energy(a, 4096), a.energy_setup_mj + 4096 * a.energy_per_byte_mj);
    }
}

TEST(Transaction, Additivity) {
    for (const auto& p : default_profiles()) {
        for (std::int64_t a : {0, 10, 999}) {
            for (std::int64_t b : {1, 77, 4096}) {
                EXPECT_NEAR(transaction_time(p, a) + transfer_time(p, b),
                            transaction_time(p, a + b), 1e-9);
                EXPECT_NEAR(transaction_time(p, a) + transaction_time(p, b),
                            transaction_time(p, a + b) + p.setup_ms + p.first_hop_rtt_ms + p.core_rtt_ms, 1e-9);
            }
        }
    }
}

TEST(Transaction, DefaultMediaOrdered) {
    for (std::int64_t bytes = 0; bytes <= (1 << 20); bytes += 4093) {
        EXPECT_LT(transaction_time(by_name("ethernet"), bytes), transaction_time(by_name("wifi"), bytes));
        EXPECT_LT(transaction_time(by_name("wifi"), bytes), transaction_time(by_name("3g"), bytes));
        EXPECT_LT(transaction_time(by_name("3g"), bytes), transaction_time(by_name("2g"), bytes));
    }
}

TEST(Transaction, CoreRttWithinClosestRegionBounds) {
    for (const auto& p : default_profiles()) {
        EXPECT_GE(p.core_rtt_ms, 45.0);
        EXPECT_LE(p.core_rtt_ms, 350.0);
    }
}

TEST(PatternLatency, EdgePatternsIgnoreTheMedium) {
    const MessageSizes sizes{37, 4, 1200};
    const ComputeCosts compute{1.5, 2.5};
    for (const auto& p : default_profiles()) {
        EXPECT_EQ(pattern_latency(Pattern::P1, p, sizes, compute), 1.5);
        EXPECT_EQ(pattern_latency(Pattern::P0, p, sizes, compute), 1.5);
    }
}

TEST(PatternLatency, P2OverInstantaneousIsCloudCost) {
    EXPECT_EQ(pattern_latency(Pattern::P2, MediumProfile::instantaneous(), {37, 4, 0}, {1.0, 3.0}), 3.0);
}

TEST(PatternLatency, P2OverTwoGExceedsTwoSeconds) {
    EXPECT_GT(pattern_latency(Pattern::P2, by_name("2g"), {1, 1, 0}, {}), 2000.0);
    EXPECT_EQ(pattern_latency(Pattern::P2, by_name("wifi"), {37, 4, 0}, {1.0, 1.0}),
              transaction_time(by_name("wifi"), 37) + 1.0 + transaction_time(by_name("wifi"), 4));
}

TEST(PatternLatency, NegativeSizesRejected) {
    EXPECT_THROW(pattern_latency(Pattern::P2, by_name("wifi"), {-1, 0, 0}, {}), std::invalid_argument);
}

TEST(Recommend, RowCountIsCrossProduct) {
    const auto r = recommend({Pattern::P0, Pattern::P1, Pattern::P2}, default_profiles(), builtin_app_classes(), {37, 4, 900}, {});
    EXPECT_EQ(r.rows.size(), 3U * 4U * 2U);
}

TEST(Recommend, MotionControlP2ExcludesTwoG) {
    const auto r = recommend({Pattern::P2}, default_profiles(), builtin_app_classes(), {37, 4, 0}, {});
    const auto media = r.feasible_media("motion_control", Pattern::P2);
    EXPECT_EQ(std::count(media.begin(), media.end(), "2g"), 0);
}

TEST(Recommend, ProcessAutomationEdgePatternsAllowEveryMedium) {
    const auto r = recommend({Pattern::P0, Pattern::P1}, default_profiles(), builtin_app_classes(), {37, 4, 900}, {});
    EXPECT_EQ(r.feasible_media("process_automation", Pattern::P0).size(), 4U);
    EXPECT_EQ(r.feasible_media("process_automation", Pattern::P1).size(), 4U);
}

TEST(Recommend, InfiniteBudgetAcceptsEverything) {
    const auto r = recommend({Pattern::P0, Pattern::P1, Pattern::P2}, default_profiles(), {AppClass{"any", kInf}},
                             {1000, 1000, 1000}, {});
    for (const auto& row : r.rows) EXPECT_TRUE(row.feasible);
}

TEST(Recommend, EmptyInputsRejected) {
    EXPECT_THROW(recommend({}, default_profiles(), builtin_app_classes(), {}, {}), ConfigError);
    EXPECT_THROW(recommend({Pattern::P1}, {}, builtin_app_classes(), {}, {}), ConfigError);
    EXPECT_THROW(recommend({Pattern::P1}, default_profiles(), {}, {}, {}), ConfigError);
}

TEST(Recommend, FeasibilityIsMonotone) {
    Rng rng(101);
    for (int trial = 0; trial < 1000; ++trial) {
        MediumProfile slow{"slow", rng.uniform(0, 300), rng.uniform(0, 1500), rng.uniform(1, 100000), 0, 0, rng.uniform(0, 200)};
        MediumProfile fast = slow;
        fast.name = "fast";
        fast.first_hop_rtt_ms *= rng.uniform();
        fast.setup_ms *= rng.uniform();
        fast.core_rtt_ms *= rng.uniform();
        fast.throughput_kbps *= 1.0 + rng.uniform(0, 10);
        const MessageSizes sizes{static_cast<std::int64_t>(rng.below(5000)), static_cast<std::int64_t>(rng.below(100)), 0};
        const AppClass app{"a", rng.uniform(1, 5000)};
        const auto r = recommend({Pattern::P2}, {slow, fast}, {app}, sizes, {rng.uniform(0, 5), rng.uniform(0, 5)});
        if (r.rows[0].feasible) {
            ASSERT_TRUE(r.rows[1].feasible) << trial;
        }
        ASSERT_LE(r.rows[1].latency_ms, r.rows[0].latency_ms);
    }
}

TEST(Profiles, ValidationRejectsBadFields) {
    MediumProfile p = by_name("wifi");
    p.throughput_kbps = 0;
    EXPECT_THROW(p.validate(), ConfigError);
    p = by_name("wifi");
    p.setup_ms = -1;
    EXPECT_THROW(p.validate(), ConfigError);
    p = by_name("wifi");
    p.core_rtt_ms = kInf;
    EXPECT_THROW(p.validate(), ConfigError);
    EXPECT_THROW((AppClass{"x", 0.0}.validate()), ConfigError);
    EXPECT_NO_THROW(MediumProfile::instantaneous().validate());
    EXPECT_THROW(find_profile(default_profiles(), "5g"), ConfigError);
}

TEST(Profiles, DocumentRoundTrip) {
    ProfileDocument doc{default_profiles(), builtin_app_classes()};
    doc.media.push_back(MediumProfile::instantaneous());
    doc.app_classes.push_back({"relaxed", kInf});
    const auto back = parse_profile_document(to_json(doc));
    ASSERT_EQ(back.media.size(), doc.media.size());
    for (std::size_t i = 0; i < doc.media.size(); ++i) {
        EXPECT_EQ(back.media[i].name, doc.media[i].name);
        EXPECT_EQ(back.media[i].throughput_kbps, doc.media[i].throughput_kbps);
        EXPECT_EQ(back.media[i].setup_ms, doc.media[i].setup_ms);
        EXPECT_EQ(back.media[i].energy_per_byte_mj, doc.media[i].energy_per_byte_mj);
    }
    ASSERT_EQ(back.app_classes.size(), 3U);
    EXPECT_EQ(back.app_classes[2].max_latency_ms, kInf);
}

TEST(Profiles, DocumentErrors) {
    EXPECT_THROW(parse_profile_document("{"), ConfigError);
    EXPECT_THROW(parse_profile_document("[]"), ConfigError);
    EXPECT_THROW(parse_profile_document(R"({"media":{"m":{"setup_ms":1,"throughput_kbps":1}}})"), ConfigError);
    EXPECT_THROW(parse_profile_document(R"({"media":{"m":{"first_hop_rtt_ms":"x","setup_ms":1,"throughput_kbps":1}}})"),
                 ConfigError);
}

TEST(Recommend, CsvHeader) {
    std::ostringstream out;
    write_recommendation_csv(out, recommend({Pattern::P1}, {by_name("wifi")}, {AppClass{"a", 10}}, {}, {}));
    EXPECT_EQ(out.str(), "app_class,pattern,medium,latency_ms,feasible\na,P1,wifi,1,true\n");
}
