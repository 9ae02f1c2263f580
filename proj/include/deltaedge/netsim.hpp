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

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

/**
 * Backhaul transaction model.
 *
 * A transaction is connection set-up/teardown, a linear data transfer, and the round trips to the first hop
 * and across the core network to the cloud:
 *
 *     time   = setup_ms + payload_bytes * 8 / throughput_kbps + first_hop_rtt_ms + core_rtt_ms
 *     energy = energy_setup_mj + payload_bytes * energy_per_byte_mj
 *
 * (bits divided by kbit/s gives milliseconds.)
 */
namespace deltaedge::net {

struct MediumProfile {
    std::string name;
    double first_hop_rtt_ms = 0.0;
    double setup_ms = 0.0;
    /// May be +inf for an ideal medium.
    double throughput_kbps = 1.0;
    double energy_setup_mj = 0.0;
    double energy_per_byte_mj = 0.0;
    double core_rtt_ms = 0.0;

    void validate() const;

    /// Zero set-up, zero round trips, infinite throughput, zero energy.
    static MediumProfile instantaneous();
};

struct AppClass {
    std::string name;
    /// +inf means any latency is acceptable.
    double max_latency_ms = 0.0;

    void validate() const;
};

struct TransactionReport {
    double time_ms = 0.0;
    double energy_mj = 0.0;
    std::uint64_t bytes = 0;
    std::string profile;
};

double transfer_time(const MediumProfile& profile, std::int64_t payload_bytes);
double transaction_time(const MediumProfile& profile, std::int64_t payload_bytes);
double transaction_energy(const MediumProfile& profile, std::int64_t payload_bytes);
TransactionReport transaction(const MediumProfile& profile, std::int64_t payload_bytes);

struct MessageSizes {
    std::int64_t s_bytes = 0;
    std::int64_t d_bytes = 0;
    std::int64_t m_bytes = 0;
};

struct ComputeCosts {
    double edge_ms = 1.0;
    double cloud_ms = 1.0;
};

/// Prediction latency seen at the edge. Model pushes in P0 run in the background and are not counted.
double pattern_latency(Pattern pattern, const MediumProfile& profile, const MessageSizes& sizes,
                       const ComputeCosts& compute);

struct FeasibilityRow {
    std::string app_class;
    Pattern pattern = Pattern::P0;
    std::string medium;
    double latency_ms = 0.0;
    bool feasible = false;
};

struct Recommendation {
    /// Ordered app class, then pattern, then medium, following the input orders.
    std::vector<FeasibilityRow> rows;

    std::vector<std::string> feasible_media(const std::string& app_class, Pattern pattern) const;
};

Recommendation recommend(const std::vector<Pattern>& patterns, const std::vector<MediumProfile>& profiles,
                         const std::vector<AppClass>& app_classes, const MessageSizes& sizes,
                         const ComputeCosts& compute);

/// ethernet, wifi, 3g, 2g.
std::vector<MediumProfile> default_profiles();
/// motion_control (10 ms) and process_automation (100 ms).
std::vector<AppClass> builtin_app_classes();

const MediumProfile& find_profile(const std::vector<MediumProfile>& profiles, const std::string& name);

/**
 * Profile document (JSON):
 *
 *     { "media": { "<name>": { "first_hop_rtt_ms": .., "setup_ms": .., "throughput_kbps": ..,
 *                              "energy_setup_mj": .., "energy_per_byte_mj": .., "core_rtt_ms": .. }, ... },
 *       "app_classes": { "<name>": { "max_latency_ms": .. }, ... } }
 *
 * Both sections are optional. Media keep document order. "inf" is accepted for throughput and latency.
 */
struct ProfileDocument {
    std::vector<MediumProfile> media;
    std::vector<AppClass> app_classes;
};

ProfileDocument parse_profile_document(const std::string& json_text);
ProfileDocument load_profile_document(const std::string& path);
std::string to_json(const ProfileDocument& document);

/// CSV `app_class,pattern,medium,latency_ms,feasible`.
void write_recommendation_csv(std::ostream& out, const Recommendation& recommendation);

}// namespace deltaedge::net
