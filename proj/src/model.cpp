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
#include <deltaedge/model.hpp>

#include <limits>
#include <string>

namespace deltaedge::learn {

std::string_view to_string(LearnerKind kind) {
    switch (kind) {
        case LearnerKind::decision_tree: return "decision_tree";
        case LearnerKind::gaussian_nb: return "gaussian_nb";
    }
    return "?";
}

LearnerKind parse_learner_kind(std::string_view text) {
    if (text == "decision_tree") return LearnerKind::decision_tree;
    if (text == "gaussian_nb") return LearnerKind::gaussian_nb;
    throw ConfigError("unknown learner '" + std::string(text) + "'");
}

LearnerKind ModelSnapshot::kind() const {
    return std::holds_alternative<DecisionTree>(parameters) ? LearnerKind::decision_tree : LearnerKind::gaussian_nb;
}

std::size_t ModelSnapshot::n_features() const {
    return std::visit([](const auto& model) { return model.n_features(); }, parameters);
}

namespace {

void encode_payload(ByteWriter& out, const DecisionTree& tree) {
    out.u32(static_cast<std::uint32_t>(tree.n_features()));
    out.u32(static_cast<std::uint32_t>(tree.nodes().size()));
    for (const auto& node : tree.nodes()) {
        if (node.is_leaf()) {
            out.u8(0);
            out.i32(node.label);
        } else {
            out.u8(1);
            out.u32(static_cast<std::uint32_t>(node.feature));
            out.f64(node.threshold);
            out.u32(node.left);
            out.u32(node.right);
        }
    }
}

void encode_payload(ByteWriter& out, const GaussianNB& nb) {
    out.u32(static_cast<std::uint32_t>(nb.n_features()));
    out.u32(static_cast<std::uint32_t>(nb.classes().size()));
    out.f64(nb.epsilon());
    for (const auto& stats : nb.classes()) {
        out.i32(stats.label);
        out.u64(stats.count);
        out.f64(stats.prior);
        for (const double m : stats.mean) out.f64(m);
        for (const double v : stats.variance) out.f64(v);
    }
}

Bytes encode(const std::variant<DecisionTree, GaussianNB>& parameters, std::uint64_t trained_at) {
    ByteWriter payload;
    std::visit([&](const auto& model) { encode_payload(payload, model); }, parameters);

    ByteWriter out;
    out.u8(kModelFormatVersion);
    out.u8(static_cast<std::uint8_t>(std::holds_alternative<DecisionTree>(parameters) ? LearnerKind::decision_tree
                                                                                       : LearnerKind::gaussian_nb));
    out.u64(trained_at);
    out.u32(static_cast<std::uint32_t>(payload.size()));
    out.bytes(payload.buffer());
    return out.take();
}

constexpr std::size_t kHeaderBytes = 1 + 1 + 8 + 4;

// Size of encode() without building the buffer; serialize() cross-checks the two.
std::size_t encoded_size(const std::variant<DecisionTree, GaussianNB>& parameters) {
    if (const auto* tree = std::get_if<DecisionTree>(&parameters)) {
        std::size_t size = kHeaderBytes + 4 + 4;
        for (const auto& node : tree->nodes()) size += node.is_leaf() ? 1 + 4 : 1 + 4 + 8 + 4 + 4;
        return size;
    }
    const auto& nb = std::get<GaussianNB>(parameters);
    return kHeaderBytes + 4 + 4 + 8 + nb.classes().size() * (4 + 8 + 8 + 16 * nb.n_features());
}

// Sanity cap so a corrupt count cannot trigger a huge allocation before the truncation check fires.
std::uint32_t bounded_count(ByteReader& in, std::size_t min_bytes_each, const char* what) {
    const std::size_t at = in.offset();
    const std::uint32_t n = in.u32();
    if (min_bytes_each > 0 && n > in.remaining() / min_bytes_each) {
        throw DecodeError(std::string("implausible ") + what + " count " + std::to_string(n), at);
    }
    return n;
}

DecisionTree decode_tree(ByteReader& in) {
    const std::size_t start = in.offset();
    const std::uint32_t n_features = in.u32();
    const std::uint32_t n_nodes = bounded_count(in, 5, "node");
    std::vector<DecisionTree::Node> nodes;
    nodes.reserve(n_nodes);
    for (std::uint32_t i = 0; i < n_nodes; ++i) {
        DecisionTree::Node node;
        const std::size_t at = in.offset();
        const std::uint8_t tag = in.u8();
        if (tag == 0) {
            node.label = in.i32();
        } else if (tag == 1) {
            const std::uint32_t feature = in.u32();
            if (feature > static_cast<std::uint32_t>(std::numeric_limits<std::int32_t>::max())) {
                throw DecodeError("feature index out of range", at);
            }
            node.feature = static_cast<std::int32_t>(feature);
            node.threshold = in.f64();
            node.left = in.u32();
            node.right = in.u32();
        } else {
            throw DecodeError("unknown node tag " + std::to_string(tag), at);
        }
        nodes.push_back(node);
    }
    try {
        return DecisionTree(std::move(nodes), n_features);
    } catch (const std::invalid_argument& e) {
        throw DecodeError(std::string("invalid tree: ") + e.what(), start);
    }
}

GaussianNB decode_nb(ByteReader& in) {
    const std::size_t start = in.offset();
    const std::uint32_t n_features = in.u32();
    const std::uint32_t n_classes = bounded_count(in, 20, "class");
    const double epsilon = in.f64();
    std::vector<GaussianNB::ClassStats> classes(n_classes);
    for (auto& stats : classes) {
        stats.label = in.i32();
        stats.count = in.u64();
        stats.prior = in.f64();
        if (n_features > in.remaining() / 16) throw DecodeError("truncated class parameters", in.offset());
        stats.mean.resize(n_features);
        stats.variance.resize(n_features);
        for (auto& m : stats.mean) m = in.f64();
        for (auto& v : stats.variance) v = in.f64();
    }
    try {
        return GaussianNB(std::move(classes), n_features, epsilon);
    } catch (const std::invalid_argument& e) {
        throw DecodeError(std::string("invalid gaussian nb: ") + e.what(), start);
    }
}

}// namespace

ModelSnapshot make_snapshot(std::variant<DecisionTree, GaussianNB> parameters, std::uint64_t trained_at) {
    const std::size_t size = encoded_size(parameters);
    return ModelSnapshot{std::move(parameters), trained_at, size};
}

ModelSnapshot fit(LearnerKind kind, const MovingFrame& frame, const LearnerOptions& options) {
    if (frame.empty()) throw NoModelError("cannot fit on an empty moving frame");
    const auto data = TrainingSet::from(frame);
    const std::uint64_t trained_at = frame.newest().iteration;
    switch (kind) {
        case LearnerKind::decision_tree: return make_snapshot(DecisionTree::fit(data, options.tree), trained_at);
        case LearnerKind::gaussian_nb: return make_snapshot(GaussianNB::fit(data), trained_at);
    }
    throw ConfigError("unknown learner kind");
}

ModelSnapshot partial_fit(const ModelSnapshot& model, MovingFrame& frame, LabeledPoint point,
                          const LearnerOptions& options) {
    frame.push(std::move(point));
    return fit(model.kind(), frame, options);
}

Label predict(const ModelSnapshot& model, const FeatureVector& features) {
    return std::visit([&](const auto& m) { return m.predict(features); }, model.parameters);
}

Bytes serialize(const ModelSnapshot& model) {
    Bytes bytes = encode(model.parameters, model.trained_at);
    if (bytes.size() != model.serialized_size) {
        throw std::logic_error("model snapshot records " + std::to_string(model.serialized_size)
                               + " bytes but encodes to " + std::to_string(bytes.size()));
    }
    return bytes;
}

ModelSnapshot deserialize(std::span<const std::uint8_t> bytes) {
    ByteReader in(bytes);
    if (bytes.empty()) in.fail("empty model payload");
    const std::uint8_t version = in.u8();
    if (version != kModelFormatVersion) {
        throw DecodeError("unsupported model format version " + std::to_string(version), 0);
    }
    const std::size_t kind_at = in.offset();
    const std::uint8_t kind = in.u8();
    const std::uint64_t trained_at = in.u64();
    const std::uint32_t length = in.u32();
    if (length != in.remaining()) {
        in.fail("payload length " + std::to_string(length) + " does not match remaining "
                + std::to_string(in.remaining()) + " bytes");
    }
    auto finish = [&](auto parameters) {
        if (in.remaining() != 0) in.fail("trailing bytes after model payload");
        return make_snapshot(std::move(parameters), trained_at);
    };
    switch (kind) {
        case static_cast<std::uint8_t>(LearnerKind::decision_tree): return finish(decode_tree(in));
        case static_cast<std::uint8_t>(LearnerKind::gaussian_nb): return finish(decode_nb(in));
        default: throw DecodeError("unknown learner kind " + std::to_string(kind), kind_at);
    }
}

}// namespace deltaedge::learn
