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
#include <deltaedge/pattern_engine.hpp>
#include <deltaedge/text.hpp>

#include <cmath>
#include <istream>
#include <ostream>

namespace deltaedge::patterns {

std::string_view to_string(MessageKind kind) {
    switch (kind) {
        case MessageKind::S: return "S";
        case MessageKind::SD: return "SD";
        case MessageKind::M: return "M";
        case MessageKind::D: return "D";
    }
    return "?";
}

MessageKind Message::kind() const {
    switch (payload.index()) {
        case 0: return MessageKind::S;
        case 1: return MessageKind::SD;
        case 2: return MessageKind::M;
        default: return MessageKind::D;
    }
}

namespace {

void encode_records(ByteWriter& out, const std::vector<SensorRecord>& records) {
    out.u32(static_cast<std::uint32_t>(records.size()));
    for (const auto& record : records) {
        out.u64(record.point.iteration);
        out.i32(record.point.label);
        out.u8(record.train ? 1 : 0);
        out.u32(static_cast<std::uint32_t>(record.point.features.size()));
        for (const double x : record.point.features) out.f64(x);
    }
}

std::vector<SensorRecord> decode_records(ByteReader& in) {
    const std::uint32_t n = in.u32();
    // smallest record is 17 bytes
    if (n > in.remaining() / 17) in.fail("record count " + std::to_string(n) + " exceeds payload");
    std::vector<SensorRecord> records(n);
    for (auto& record : records) {
        record.point.iteration = in.u64();
        record.point.label = in.i32();
        const std::uint8_t train = in.u8();
        if (train > 1) in.fail("bad train flag");
        record.train = train == 1;
        const std::uint32_t dim = in.u32();
        if (dim > in.remaining() / 8) in.fail("feature count " + std::to_string(dim) + " exceeds payload");
        record.point.features.resize(dim);
        for (double& x : record.point.features) x = in.f64();
    }
    return records;
}

}// namespace

Bytes encode_payload(const Payload& payload) {
    ByteWriter out;
    if (const auto* s = std::get_if<SensorPayload>(&payload)) {
        encode_records(out, s->records);
    } else if (const auto* sd = std::get_if<SensorDecisionPayload>(&payload)) {
        if (sd->predictions.size() != sd->records.size()) {
            throw std::invalid_argument("S+D payload needs one prediction per record");
        }
        encode_records(out, sd->records);
        for (const Label p : sd->predictions) out.i32(p);
    } else if (const auto* m = std::get_if<ModelPayload>(&payload)) {
        out.bytes(m->model);
    } else {
        out.i32(std::get<DecisionPayload>(payload).prediction);
    }
    return out.take();
}

Payload decode_payload(MessageKind kind, std::span<const std::uint8_t> bytes) {
    ByteReader in(bytes);
    Payload payload;
    switch (kind) {
        case MessageKind::S: payload = SensorPayload{decode_records(in)}; break;
        case MessageKind::SD: {
            SensorDecisionPayload sd{decode_records(in), {}};
            sd.predictions.resize(sd.records.size());
            for (Label& p : sd.predictions) p = in.i32();
            payload = std::move(sd);
            break;
        }
        case MessageKind::M: payload = ModelPayload{Bytes(bytes.begin(), bytes.end())}; return payload;
        case MessageKind::D: payload = DecisionPayload{in.i32()}; break;
        default: throw DecodeError("unknown message kind " + std::to_string(static_cast<int>(kind)), 0);
    }
    if (in.remaining() != 0) in.fail("trailing bytes after payload");
    return payload;
}

Message make_message(Payload payload, NodeId src, NodeId dst, double sent_at_ms) {
    Message message{std::move(payload), src, dst, sent_at_ms, 0};
    message.size = encode_payload(message.payload).size();
    return message;
}

void EngineConfig::validate() const {
    if (frame_capacity == 0) throw ConfigError("frame_capacity must be > 0");
    if (push_interval == 0) throw ConfigError("push_interval must be > 0");
    if (batch_size == 0) throw ConfigError("batch_size must be > 0");
    if (score_window == 0) throw ConfigError("score_window must be > 0");
    if (!std::isfinite(sample_period_ms) || sample_period_ms <= 0.0) {
        throw ConfigError("sample_period_ms must be finite and > 0");
    }
    if (!std::isfinite(compute.edge_ms) || compute.edge_ms < 0.0 || !std::isfinite(compute.cloud_ms)
        || compute.cloud_ms < 0.0) {
        throw ConfigError("compute costs must be finite and >= 0");
    }
    medium.validate();
}

Engine::Engine(EngineConfig config, std::size_t n_sites) : config_(std::move(config)) {
    config_.validate();
    if (n_sites == 0) throw ConfigError("at least one site is required");
    run_.pattern = config_.pattern;
    run_.medium = config_.medium;
    run_.sites.reserve(n_sites);
    for (std::size_t i = 0; i < n_sites; ++i) {
        SiteState site{i, std::nullopt, std::nullopt, 0, learn::ScoreTracker(config_.score_window), -1.0,
                       {}, {}, {}, 0};
        if (config_.pattern == Pattern::P1) site.local_frame.emplace(config_.frame_capacity);
        run_.sites.push_back(std::move(site));
    }
    if (config_.pattern != Pattern::P1) {
        run_.cloud.emplace(CloudState{learn::MovingFrame(config_.frame_capacity), std::nullopt, false, 0,
                                      config_.push_interval, 0});
    }
}

double Engine::advance_clock(SiteState& site, std::uint64_t round) {
    const double now = static_cast<double>(round) * config_.sample_period_ms;
    if (now <= site.clock_ms) {
        throw std::logic_error("site " + std::to_string(site.site_id) + " stepped twice in round "
                               + std::to_string(round));
    }
    site.clock_ms = now;
    return now;
}

void Engine::send(const Message& message) {
    const auto k = static_cast<std::size_t>(message.kind());
    ++run_.messages.sent[k];
    run_.messages.bytes[k] += message.size;
}

void Engine::deliver_to_cloud(const Message& message) {
    ++run_.messages.received[static_cast<std::size_t>(message.kind())];
    auto& cloud = *run_.cloud;
    const auto absorb = [&cloud](const std::vector<SensorRecord>& records) {
        for (const auto& record : records) {
            if (!record.train) continue;
            cloud.global_frame.push(record.point);
            cloud.stale = true;
        }
    };
    if (const auto* s = std::get_if<SensorPayload>(&message.payload)) absorb(s->records);
    if (const auto* sd = std::get_if<SensorDecisionPayload>(&message.payload)) absorb(sd->records);
}

const learn::ModelSnapshot& Engine::cloud_model() {
    auto& cloud = *run_.cloud;
    if (cloud.stale) {
        cloud.global_model = learn::fit(config_.learner, cloud.global_frame, config_.learner_options);
        cloud.stale = false;
        ++cloud.model_version;
    }
    return *cloud.global_model;
}

void Engine::flush_outbox(SiteState& site, double now_ms) {
    if (site.outbox.empty()) return;
    Payload payload;
    if (config_.report_predictions) {
        payload = SensorDecisionPayload{std::move(site.outbox), std::move(site.outbox_predictions)};
    } else {
        payload = SensorPayload{std::move(site.outbox)};
    }
    site.outbox.clear();
    site.outbox_predictions.clear();
    const Message message = make_message(std::move(payload), static_cast<NodeId>(site.site_id), kCloudNode, now_ms);
    send(message);
    deliver_to_cloud(message);
}

void Engine::push_models(std::uint64_t round) {
    auto& cloud = *run_.cloud;
    const learn::ModelSnapshot& model = cloud_model();
    const Bytes encoded = learn::serialize(model);
    const double sent_at = static_cast<double>(round) * config_.sample_period_ms;
    const double delivered_at = sent_at + net::transaction_time(config_.medium, static_cast<std::int64_t>(encoded.size()));
    ++cloud.pushes;
    for (auto& site : run_.sites) {
        Message message = make_message(ModelPayload{encoded}, kCloudNode, static_cast<NodeId>(site.site_id), sent_at);
        send(message);
        site.unbilled_down += message.size;
        site.pending_models.push_back(PendingModel{model, cloud.model_version, delivered_at, message.size});
    }
}

void Engine::begin_round(std::uint64_t round) {
    if (config_.pattern != Pattern::P0) return;
    const auto& cloud = *run_.cloud;
    if (cloud.global_frame.empty()) return;
    const bool scheduled = round > 0 && round % config_.push_interval == 0;
    // first model goes out as soon as the cloud frame is full
    const bool warm_up = cloud.pushes == 0 && cloud.global_frame.full();
    if (scheduled || warm_up) push_models(round);
}

StepRecord Engine::base_record(const SiteState& site, std::uint64_t round, const LabeledPoint& point) const {
    StepRecord record;
    record.pattern = config_.pattern;
    record.site = site.site_id;
    record.round = round;
    record.stream_iteration = point.iteration;
    record.actual = point.label;
    record.time_ms = site.clock_ms;
    return record;
}

StepRecord Engine::step(std::size_t site, std::uint64_t round, const LabeledPoint& point, bool train) {
    switch (config_.pattern) {
        case Pattern::P0: return step_p0(site, round, point, train);
        case Pattern::P1: return step_p1(site, round, point, train);
        case Pattern::P2: return step_p2(site, round, point, train);
    }
    throw std::logic_error("unknown pattern");
}

StepRecord Engine::step_p0(std::size_t site_id, std::uint64_t round, const LabeledPoint& point, bool train) {
    if (config_.pattern != Pattern::P0) throw std::logic_error("step_p0 on a " + std::string(to_string(config_.pattern)) + " engine");
    SiteState& site = run_.sites.at(site_id);
    const double now = advance_clock(site, round);

    // every arrived push counts as received; the newest one wins
    auto& pending = site.pending_models;
    for (auto it = pending.begin(); it != pending.end();) {
        if (!(it->delivered_at_ms < now)) {
            ++it;
            continue;
        }
        ++run_.messages.received[static_cast<std::size_t>(MessageKind::M)];
        if (!site.current_model || it->version > site.model_version) {
            site.current_model = std::move(it->model);
            site.model_version = it->version;
        }
        it = pending.erase(it);
    }

    StepRecord record = base_record(site, round, point);
    if (site.current_model) {
        record.predicted = learn::predict(*site.current_model, point.features);
        record.model_size = site.current_model->serialized_size;
        record.model_version = site.model_version;
    }
    site.tracker.update(record.predicted, record.actual);
    record.score_avg = site.tracker.average();
    record.latency_ms = config_.compute.edge_ms;
    record.bytes_down = site.unbilled_down;
    site.unbilled_down = 0;

    if (train) {
        site.outbox.push_back(SensorRecord{point, true});
        site.outbox_predictions.push_back(record.predicted);
        if (site.outbox.size() >= config_.batch_size) {
            const auto before = run_.messages.bytes;
            flush_outbox(site, now);
            for (std::size_t k = 0; k < before.size(); ++k) record.bytes_up += run_.messages.bytes[k] - before[k];
        }
        record.trained = true;
    }
    run_.log.push_back(record);
    return record;
}

StepRecord Engine::step_p1(std::size_t site_id, std::uint64_t round, const LabeledPoint& point, bool train) {
    if (config_.pattern != Pattern::P1) throw std::logic_error("step_p1 on a " + std::string(to_string(config_.pattern)) + " engine");
    SiteState& site = run_.sites.at(site_id);
    advance_clock(site, round);

    StepRecord record = base_record(site, round, point);
    if (site.current_model) {
        record.predicted = learn::predict(*site.current_model, point.features);
        record.model_size = site.current_model->serialized_size;
        record.model_version = site.model_version;
    }
    site.tracker.update(record.predicted, record.actual);
    record.score_avg = site.tracker.average();
    record.latency_ms = config_.compute.edge_ms;

    if (train) {
        site.local_frame->push(point);
        site.current_model = learn::fit(config_.learner, *site.local_frame, config_.learner_options);
        ++site.model_version;
        record.trained = true;
    }
    run_.log.push_back(record);
    return record;
}

StepRecord Engine::step_p2(std::size_t site_id, std::uint64_t round, const LabeledPoint& point, bool train) {
    if (config_.pattern != Pattern::P2) throw std::logic_error("step_p2 on a " + std::string(to_string(config_.pattern)) + " engine");
    SiteState& site = run_.sites.at(site_id);
    const double now = advance_clock(site, round);
    auto& cloud = *run_.cloud;

    StepRecord record = base_record(site, round, point);
    const Message up = make_message(SensorPayload{{SensorRecord{point, train}}}, static_cast<NodeId>(site_id),
                                    kCloudNode, now);
    send(up);
    ++run_.messages.received[static_cast<std::size_t>(MessageKind::S)];

    // test with the model trained before this point arrived, then train
    Label decision = kAbstain;
    if (!cloud.global_frame.empty()) {
        const learn::ModelSnapshot& model = cloud_model();
        decision = learn::predict(model, point.features);
        record.model_size = model.serialized_size;
        record.model_version = cloud.model_version;
    }
    if (train) {
        cloud.global_frame.push(point);
        cloud.stale = true;
        record.trained = true;
    }

    const double reply_at = now + net::transaction_time(config_.medium, static_cast<std::int64_t>(up.size))
                            + config_.compute.cloud_ms;
    const Message down = make_message(DecisionPayload{decision}, kCloudNode, static_cast<NodeId>(site_id), reply_at);
    send(down);
    ++run_.messages.received[static_cast<std::size_t>(MessageKind::D)];

    record.predicted = decision;
    site.tracker.update(record.predicted, record.actual);
    record.score_avg = site.tracker.average();
    record.bytes_up = up.size;
    record.bytes_down = down.size;
    record.latency_ms = reply_at - now + net::transaction_time(config_.medium, static_cast<std::int64_t>(down.size));
    run_.log.push_back(record);
    return record;
}

void Engine::finish() {
    if (config_.pattern != Pattern::P0) return;
    for (auto& site : run_.sites) flush_outbox(site, site.clock_ms);
}

PatternRun run_pattern(const EngineConfig& config, const streams::SiteStreams& site_streams) {
    std::optional<std::size_t> dims;
    std::size_t rounds = 0;
    for (std::size_t s = 0; s < site_streams.n_sites(); ++s) {
        for (const auto& point : site_streams.per_site[s]) {
            if (!dims) dims = point.features.size();
            if (point.features.size() != *dims) {
                throw learn::DimensionError("site " + std::to_string(s) + " point " + std::to_string(point.iteration)
                                            + " has " + std::to_string(point.features.size()) + " features, expected "
                                            + std::to_string(*dims));
            }
        }
        rounds = std::max(rounds, site_streams.per_site[s].size());
    }

    Engine engine(config, site_streams.n_sites());
    for (std::size_t r = 0; r < rounds; ++r) {
        engine.begin_round(r);
        for (std::size_t s = 0; s < site_streams.n_sites(); ++s) {
            const auto& stream = site_streams.per_site[s];
            if (r >= stream.size()) continue;
            engine.step(s, r, stream[r], site_streams.trains_on(s, stream[r]));
        }
    }
    engine.finish();
    return engine.take_run();
}

void write_step_log_csv(std::ostream& out, const std::vector<StepRecord>& log) {
    out << "pattern,site,iteration,predicted,actual,score_avg,latency_ms,bytes_up,bytes_down,model_size\n";
    for (const auto& r : log) {
        out << to_string(r.pattern) << ',' << r.site << ',' << r.round << ',' << r.predicted << ',' << r.actual << ','
            << text::format_double(r.score_avg) << ',' << text::format_double(r.latency_ms) << ',' << r.bytes_up
            << ',' << r.bytes_down << ',' << r.model_size << '\n';
    }
}

std::vector<StepRecord> read_step_log_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) return {};
    if (line != "pattern,site,iteration,predicted,actual,score_avg,latency_ms,bytes_up,bytes_down,model_size") {
        throw std::runtime_error("step log: bad header '" + line + "'");
    }
    std::vector<StepRecord> log;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = text::split(line, ',');
        if (f.size() != 10) throw std::runtime_error("step log: line " + std::to_string(line_no) + " has "
                                                     + std::to_string(f.size()) + " fields, expected 10");
        try {
            StepRecord r;
            r.pattern = parse_pattern(f[0]);
            r.site = static_cast<std::size_t>(text::parse_int(f[1]));
            r.round = static_cast<std::uint64_t>(text::parse_int(f[2]));
            r.predicted = static_cast<Label>(text::parse_int(f[3]));
            r.actual = static_cast<Label>(text::parse_int(f[4]));
            r.score_avg = text::parse_double(f[5]);
            r.latency_ms = text::parse_double(f[6]);
            r.bytes_up = static_cast<std::uint64_t>(text::parse_int(f[7]));
            r.bytes_down = static_cast<std::uint64_t>(text::parse_int(f[8]));
            r.model_size = static_cast<std::size_t>(text::parse_int(f[9]));
            log.push_back(r);
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error("step log: line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return log;
}

}// namespace deltaedge::patterns
