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
#include <deltaedge/text.hpp>

#include <cmath>
#include <limits>
#include <ostream>

namespace deltaedge::net {

namespace {

void require_non_negative_finite(double value, const std::string& profile, const char* field) {
    if (!std::isfinite(value) || value < 0.0) {
        throw ConfigError("medium '" + profile + "': " + field + " must be finite and >= 0");
    }
}

void require_payload(std::int64_t payload_bytes) {
    if (payload_bytes < 0) throw std::invalid_argument("negative payload: " + std::to_string(payload_bytes));
}

}// namespace

void MediumProfile::validate() const {
    require_non_negative_finite(first_hop_rtt_ms, name, "first_hop_rtt_ms");
    require_non_negative_finite(setup_ms, name, "setup_ms");
    require_non_negative_finite(energy_setup_mj, name, "energy_setup_mj");
    require_non_negative_finite(energy_per_byte_mj, name, "energy_per_byte_mj");
    require_non_negative_finite(core_rtt_ms, name, "core_rtt_ms");
    if (!(throughput_kbps > 0.0)) throw ConfigError("medium '" + name + "': throughput_kbps must be > 0");
}

MediumProfile MediumProfile::instantaneous() {
    return MediumProfile{"instantaneous", 0.0, 0.0, std::numeric_limits<double>::infinity(), 0.0, 0.0, 0.0};
}

void AppClass::validate() const {
    if (!(max_latency_ms > 0.0)) throw ConfigError("app class '" + name + "': max_latency_ms must be > 0");
}

double transfer_time(const MediumProfile& profile, std::int64_t payload_bytes) {
    require_payload(payload_bytes);
    if (payload_bytes == 0) return 0.0;
    return static_cast<double>(payload_bytes) * 8.0 / profile.throughput_kbps;
}

double transaction_time(const MediumProfile& profile, std::int64_t payload_bytes) {
    return profile.setup_ms + transfer_time(profile, payload_bytes) + profile.first_hop_rtt_ms + profile.core_rtt_ms;
}

double transaction_energy(const MediumProfile& profile, std::int64_t payload_bytes) {
    require_payload(payload_bytes);
    return profile.energy_setup_mj + static_cast<double>(payload_bytes) * profile.energy_per_byte_mj;
}

TransactionReport transaction(const MediumProfile& profile, std::int64_t payload_bytes) {
    return TransactionReport{transaction_time(profile, payload_bytes), transaction_energy(profile, payload_bytes),
                             static_cast<std::uint64_t>(payload_bytes), profile.name};
}

double pattern_latency(Pattern pattern, const MediumProfile& profile, const MessageSizes& sizes,
                       const ComputeCosts& compute) {
    require_payload(sizes.s_bytes);
    require_payload(sizes.d_bytes);
    require_payload(sizes.m_bytes);
    switch (pattern) {
        case Pattern::P0:
        case Pattern::P1: return compute.edge_ms;
        case Pattern::P2:
            return transaction_time(profile, sizes.s_bytes) + compute.cloud_ms + transaction_time(profile, sizes.d_bytes);
    }
    throw std::invalid_argument("unknown pattern " + std::to_string(static_cast<int>(pattern)));
}

std::vector<std::string> Recommendation::feasible_media(const std::string& app_class, Pattern pattern) const {
    std::vector<std::string> media;
    for (const auto& row : rows) {
        if (row.app_class == app_class && row.pattern == pattern && row.feasible) media.push_back(row.medium);
    }
    return media;
}

Recommendation recommend(const std::vector<Pattern>& patterns, const std::vector<MediumProfile>& profiles,
                         const std::vector<AppClass>& app_classes, const MessageSizes& sizes,
                         const ComputeCosts& compute) {
    if (patterns.empty() || profiles.empty() || app_classes.empty()) {
        throw ConfigError("recommend needs at least one pattern, medium and app class");
    }
    Recommendation out;
    out.rows.reserve(patterns.size() * profiles.size() * app_classes.size());
    for (const auto& app : app_classes) {
        for (const Pattern pattern : patterns) {
            for (const auto& profile : profiles) {
                const double latency = pattern_latency(pattern, profile, sizes, compute);
                out.rows.push_back(FeasibilityRow{app.name, pattern, profile.name, latency,
                                                  latency <= app.max_latency_ms});
            }
        }
    }
    return out;
}

std::vector<MediumProfile> default_profiles() {
    // Core RTT is the closest-region cloud figure; radio media carry the larger set-up costs.
    return {
        MediumProfile{"ethernet", 0.5, 1.0, 100000.0, 0.5, 0.00002, 45.0},
        MediumProfile{"wifi", 3.0, 15.0, 20000.0, 8.0, 0.0005, 45.0},
        MediumProfile{"3g", 60.0, 350.0, 1000.0, 350.0, 0.01, 45.0},
        MediumProfile{"2g", 300.0, 1200.0, 40.0, 1500.0, 0.15, 45.0},
    };
}

std::vector<AppClass> builtin_app_classes() {
    return {AppClass{"motion_control", 10.0}, AppClass{"process_automation", 100.0}};
}

const MediumProfile& find_profile(const std::vector<MediumProfile>& profiles, const std::string& name) {
    for (const auto& profile : profiles) {
        if (profile.name == name) return profile;
    }
    if (name == "instantaneous") {
        static const MediumProfile ideal = MediumProfile::instantaneous();
        return ideal;
    }
    throw ConfigError("unknown medium '" + name + "'");
}

void write_recommendation_csv(std::ostream& out, const Recommendation& recommendation) {
    out << "app_class,pattern,medium,latency_ms,feasible\n";
    for (const auto& row : recommendation.rows) {
        out << row.app_class << ',' << to_string(row.pattern) << ',' << row.medium << ','
            << text::format_double(row.latency_ms) << ',' << (row.feasible ? "true" : "false") << '\n';
    }
}

}// namespace deltaedge::net
