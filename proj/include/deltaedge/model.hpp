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

#include <deltaedge/bytes.hpp>
#include <deltaedge/learners.hpp>
#include <deltaedge/moving_frame.hpp>

#include <cstdint>
#include <stdexcept>
#include <string_view>
#include <variant>

/**
 * The machine learning block: fit, partial_fit and predict over a moving frame, plus the binary model
 * format carried by model-push messages.
 *
 * Wire format (little-endian):
 *   u8 version (=1) | u8 kind | u64 trained_at | u32 payload_length | payload
 * decision tree payload:
 *   u32 n_features | u32 n_nodes | per node: u8 tag (0 leaf, 1 test),
 *   leaf: i32 label; test: u32 feature, f64 threshold, u32 left, u32 right
 * gaussian nb payload:
 *   u32 n_features | u32 n_classes | f64 epsilon |
 *   per class: i32 label, u64 count, f64 prior, f64 mean[n_features], f64 variance[n_features]
 */
namespace deltaedge::learn {

enum class LearnerKind : std::uint8_t { decision_tree = 1, gaussian_nb = 2 };

std::string_view to_string(LearnerKind kind);
LearnerKind parse_learner_kind(std::string_view text);

/// fit was asked to train on nothing.
class NoModelError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct LearnerOptions {
    TreeParams tree;
};

struct ModelSnapshot {
    std::variant<DecisionTree, GaussianNB> parameters;
    /// Stream iteration of the newest training point.
    std::uint64_t trained_at = 0;
    std::size_t serialized_size = 0;

    LearnerKind kind() const;
    std::size_t n_features() const;
};

inline constexpr std::uint8_t kModelFormatVersion = 1;

/// Wraps trained parameters and records their encoded size.
ModelSnapshot make_snapshot(std::variant<DecisionTree, GaussianNB> parameters, std::uint64_t trained_at);

ModelSnapshot fit(LearnerKind kind, const MovingFrame& frame, const LearnerOptions& options = {});

/// Pushes the point into the frame (evicting the oldest when full) and retrains from scratch.
ModelSnapshot partial_fit(const ModelSnapshot& model, MovingFrame& frame, LabeledPoint point,
                          const LearnerOptions& options = {});

Label predict(const ModelSnapshot& model, const FeatureVector& features);

Bytes serialize(const ModelSnapshot& model);
ModelSnapshot deserialize(std::span<const std::uint8_t> bytes);

}// namespace deltaedge::learn
