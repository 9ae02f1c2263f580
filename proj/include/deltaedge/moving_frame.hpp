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

#include <cstddef>
#include <deque>
#include <optional>

namespace deltaedge::learn {

/// Bounded FIFO training window; inserting into a full frame drops the oldest point.
class MovingFrame {
  public:
    explicit MovingFrame(std::size_t capacity);

    /// Returns the evicted point, if any.
    std::optional<LabeledPoint> push(LabeledPoint point);

    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return buffer_.size(); }
    bool empty() const { return buffer_.empty(); }
    bool full() const { return buffer_.size() == capacity_; }

    const LabeledPoint& oldest() const { return buffer_.front(); }
    const LabeledPoint& newest() const { return buffer_.back(); }

    auto begin() const { return buffer_.begin(); }
    auto end() const { return buffer_.end(); }

    friend bool operator==(const MovingFrame&, const MovingFrame&) = default;

  private:
    std::size_t capacity_;
    std::deque<LabeledPoint> buffer_;
};

/// Prequential accuracy over the most recent outcomes (1 = correct, 0 = miss).
class ScoreTracker {
  public:
    static constexpr std::size_t kDefaultWindow = 50;

    explicit ScoreTracker(std::size_t window = kDefaultWindow);

    void record(bool correct);
    void update(Label predicted, Label actual) { record(predicted == actual && predicted != kAbstain); }

    /// Mean of the window contents; 0 before the first outcome.
    double average() const;
    std::size_t window() const { return window_; }
    std::size_t count() const { return outcomes_.size(); }

  private:
    std::size_t window_;
    std::deque<bool> outcomes_;
    std::size_t hits_ = 0;
};

ScoreTracker score_update(ScoreTracker tracker, Label predicted, Label actual);

}// namespace deltaedge::learn
