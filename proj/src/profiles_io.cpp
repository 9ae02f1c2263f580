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

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace deltaedge::net {

namespace {

using Json = nlohmann::ordered_json;

double number_field(const Json& section, const std::string& owner, const char* key, bool required = true,
                    double fallback = 0.0) {
    if (!section.contains(key)) {
        if (required) throw ConfigError("'" + owner + "' is missing '" + key + "'");
        return fallback;
    }
    const Json& value = section.at(key);
    if (value.is_number()) return value.get<double>();
    if (value.is_string() && value.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    throw ConfigError("'" + owner + "." + key + "' must be a number or \"inf\"");
}

Json number_value(double value) {
    if (std::isinf(value) && value > 0) return "inf";
    return value;
}

}// namespace

ProfileDocument parse_profile_document(const std::string& json_text) {
    Json root;
    try {
        root = Json::parse(json_text);
    } catch (const Json::parse_error& e) {
        throw ConfigError(std::string("profile document: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("profile document must be a JSON object");

    ProfileDocument document;
    if (root.contains("media")) {
        for (const auto& [name, section] : root.at("media").items()) {
            if (!section.is_object()) throw ConfigError("medium '" + name + "' must be an object");
            MediumProfile profile;
            profile.name = name;
            profile.first_hop_rtt_ms = number_field(section, name, "first_hop_rtt_ms");
            profile.setup_ms = number_field(section, name, "setup_ms");
            profile.throughput_kbps = number_field(section, name, "throughput_kbps");
            profile.energy_setup_mj = number_field(section, name, "energy_setup_mj", false);
            profile.energy_per_byte_mj = number_field(section, name, "energy_per_byte_mj", false);
            profile.core_rtt_ms = number_field(section, name, "core_rtt_ms", false);
            profile.validate();
            document.media.push_back(std::move(profile));
        }
    }
    if (root.contains("app_classes")) {
        for (const auto& [name, section] : root.at("app_classes").items()) {
            AppClass app{name, number_field(section, name, "max_latency_ms")};
            app.validate();
            document.app_classes.push_back(std::move(app));
        }
    }
    return document;
}

ProfileDocument load_profile_document(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open profile document '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_profile_document(buffer.str());
}

std::string to_json(const ProfileDocument& document) {
    Json root = Json::object();
    Json media = Json::object();
    for (const auto& profile : document.media) {
        media[profile.name] = Json{{"first_hop_rtt_ms", profile.first_hop_rtt_ms},
                                   {"setup_ms", profile.setup_ms},
                                   {"throughput_kbps", number_value(profile.throughput_kbps)},
                                   {"energy_setup_mj", profile.energy_setup_mj},
                                   {"energy_per_byte_mj", profile.energy_per_byte_mj},
                                   {"core_rtt_ms", profile.core_rtt_ms}};
    }
    Json apps = Json::object();
    for (const auto& app : document.app_classes) apps[app.name] = Json{{"max_latency_ms", number_value(app.max_latency_ms)}};
    root["media"] = std::move(media);
    root["app_classes"] = std::move(apps);
    return root.dump(2) + "\n";
}

}// namespace deltaedge::net
