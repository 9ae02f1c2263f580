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
#include <deltaedge/moving_frame.hpp>
#include <deltaedge/netsim.hpp>
#include <deltaedge/types.hpp>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <variant>
#include <vector>

/**
 * Runs P0, P1 or P2 over a set of edge sites and one cloud.
 *
 * Sites advance in lockstep rounds: in round r every site handles the r-th point of its stream, in site id
 * order. Each point is first classified with whatever model the pattern gives that site (test), then offered
 * for training (train):
 *
 *   P0  site predicts with the last model pushed by the cloud; points go up as S messages; every
 *       push_interval rounds (and once, early, when the cloud frame first fills) the cloud sends its model
 *       down as M. A push taken at the start of round r is active from the first site step strictly
 *       after its delivery time; when several have arrived the newest wins.
 *   P1  site predicts with and retrains its own model; nothing is sent.
 *   P2  site sends S, the cloud predicts with the global model and answers with D; the cloud retrains.
 *
 * With a missing category assigned to a site, points of that category are still classified there but never
 * enter any training frame.
 */
namespace deltaedge::patterns {

enum class MessageKind : std::uint8_t { S = 1, SD = 2, M = 3, D = 4 };

std::string_view to_string(MessageKind kind);

using NodeId = std::uint32_t;
inline constexpr NodeId kCloudNode = 0xFFFF'FFFFU;

struct SensorRecord {
    LabeledPoint point;
    /// False when the sending site must not contribute this point to training.
    bool train = true;
    friend bool operator==(const SensorRecord&, const SensorRecord&) = default;
};

struct SensorPayload {
    std::vector<SensorRecord> records;
    friend bool operator==(const SensorPayload&, const SensorPayload&) = default;
};
struct SensorDecisionPayload {
    std::vector<SensorRecord> records;
    std::vector<Label> predictions;
    friend bool operator==(const SensorDecisionPayload&, const SensorDecisionPayload&) = default;
};
struct ModelPayload {
    Bytes model;
    friend bool operator==(const ModelPayload&, const ModelPayload&) = default;
};
struct DecisionPayload {
    Label prediction = kAbstain;
    friend bool operator==(const DecisionPayload&, const DecisionPayload&) = default;
};

using Payload = std::variant<SensorPayload, SensorDecisionPayload, ModelPayload, DecisionPayload>;

/// The kind follows from the payload type, so the two cannot disagree.
struct Message {
    Payload payload;
    NodeId src = 0;
    NodeId dst = 0;
    double sent_at_ms = 0.0;
    std::size_t size = 0;

    MessageKind kind() const;
};

/**
 * Payload encodings (little-endian):
 *   S   u32 n | n x (u64 iteration, i32 label, u8 train, u32 dim, f64 x dim)
 *   SD  S layout followed by n x i32 prediction
 *   M   serialized model bytes
 *   D   i32 prediction
 */
Bytes encode_payload(const Payload& payload);
Payload decode_payload(MessageKind kind, std::span<const std::uint8_t> bytes);

Message make_message(Payload payload, NodeId src, NodeId dst, double sent_at_ms);

struct EngineConfig {
    Pattern pattern = Pattern::P1;
    learn::LearnerKind learner = learn::LearnerKind::decision_tree;
    learn::LearnerOptions learner_options;
    std::size_t frame_capacity = 150;
    /// Rounds between P0 model pushes.
    std::size_t push_interval = 150;
    /// Points per P0 uplink message.
    std::size_t batch_size = 1;
    /// P0 uplink carries the edge prediction alongside the sensor data (S+D instead of S).
    bool report_predictions = false;
    net::MediumProfile medium = net::MediumProfile::instantaneous();
    net::ComputeCosts compute;
    /// Time between two consecutive points at one site.
    double sample_period_ms = 1000.0;
    std::size_t score_window = learn::ScoreTracker::kDefaultWindow;

    void validate() const;
};

struct StepRecord {
    Pattern pattern = Pattern::P1;
    std::size_t site = 0;
    /// Position of the point in its site stream.
    std::uint64_t round = 0;
    std::uint64_t stream_iteration = 0;
    Label predicted = kAbstain;
    Label actual = 0;
    double score_avg = 0.0;
    double latency_ms = 0.0;
    std::uint64_t bytes_up = 0;
    std::uint64_t bytes_down = 0;
    /// Size of the model that made the prediction; 0 when abstaining.
    std::size_t model_size = 0;
    /// Changes exactly when the predicting model changes; 0 before the first model.
    std::uint64_t model_version = 0;
    double time_ms = 0.0;
    bool trained = false;

    bool correct() const { return predicted != kAbstain && predicted == actual; }
};

struct PendingModel {
    learn::ModelSnapshot model;
    std::uint64_t version = 0;
    double delivered_at_ms = 0.0;
    std::size_t bytes = 0;
};

struct SiteState {
    std::size_t site_id = 0;
    std::optional<learn::MovingFrame> local_frame;
    std::optional<learn::ModelSnapshot> current_model;
    std::uint64_t model_version = 0;
    learn::ScoreTracker tracker;
    double clock_ms = -1.0;
    /// Pushes still in flight, in send order.
    std::vector<PendingModel> pending_models;
    std::vector<SensorRecord> outbox;
    std::vector<Label> outbox_predictions;
    /// Model-push bytes sent to this site and not yet charged to one of its steps.
    std::uint64_t unbilled_down = 0;
};

struct CloudState {
    learn::MovingFrame global_frame;
    std::optional<learn::ModelSnapshot> global_model;
    /// Set when the frame changed after global_model was trained.
    bool stale = false;
    std::uint64_t model_version = 0;
    std::size_t push_interval = 150;
    std::uint64_t pushes = 0;
};

struct MessageStats {
    std::array<std::uint64_t, 5> sent{};
    std::array<std::uint64_t, 5> received{};
    std::array<std::uint64_t, 5> bytes{};

    std::uint64_t sent_of(MessageKind kind) const { return sent[static_cast<std::size_t>(kind)]; }
    std::uint64_t received_of(MessageKind kind) const { return received[static_cast<std::size_t>(kind)]; }
    std::uint64_t bytes_of(MessageKind kind) const { return bytes[static_cast<std::size_t>(kind)]; }
};

struct PatternRun {
    Pattern pattern = Pattern::P1;
    std::vector<SiteState> sites;
    std::optional<CloudState> cloud;
    net::MediumProfile medium;
    std::vector<StepRecord> log;
    MessageStats messages;
};

/// Drives one PatternRun. Steps can be issued one by one; run_pattern() is the usual entry point.
class Engine {
  public:
    Engine(EngineConfig config, std::size_t n_sites);

    /// Model pushes due at the start of a round (P0 only; a no-op otherwise).
    void begin_round(std::uint64_t round);

    StepRecord step(std::size_t site, std::uint64_t round, const LabeledPoint& point, bool train);
    StepRecord step_p0(std::size_t site, std::uint64_t round, const LabeledPoint& point, bool train);
    StepRecord step_p1(std::size_t site, std::uint64_t round, const LabeledPoint& point, bool train);
    StepRecord step_p2(std::size_t site, std::uint64_t round, const LabeledPoint& point, bool train);

    /// Sends any partially filled P0 uplink batches.
    void finish();

    const EngineConfig& config() const { return config_; }
    const PatternRun& run() const { return run_; }
    PatternRun take_run() { return std::move(run_); }

  private:
    double advance_clock(SiteState& site, std::uint64_t round);
    void send(const Message& message);
    void deliver_to_cloud(const Message& message);
    void flush_outbox(SiteState& site, double now_ms);
    const learn::ModelSnapshot& cloud_model();
    void push_models(std::uint64_t round);
    StepRecord base_record(const SiteState& site, std::uint64_t round, const LabeledPoint& point) const;

    EngineConfig config_;
    PatternRun run_;
};

/// Runs every site stream to completion. Rejects streams whose feature widths differ.
PatternRun run_pattern(const EngineConfig& config, const streams::SiteStreams& site_streams);

/// CSV `pattern,site,iteration,predicted,actual,score_avg,latency_ms,bytes_up,bytes_down,model_size`;
/// `iteration` is the round.
void write_step_log_csv(std::ostream& out, const std::vector<StepRecord>& log);
std::vector<StepRecord> read_step_log_csv(std::istream& in);

}// namespace deltaedge::patterns
