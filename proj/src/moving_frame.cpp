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
#include <deltaedge/moving_frame.hpp>

namespace deltaedge::learn {

MovingFrame::MovingFrame(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("moving frame capacity must be >= 1");
}

std::optional<LabeledPoint> MovingFrame::push(LabeledPoint point) {
    std::optional<LabeledPoint> evicted;
    if (buffer_.size() == capacity_) {
        evicted = std::move(buffer_.front());
        buffer_.pop_front();
    }
    buffer_.push_back(std::move(point));
    return evicted;
}

ScoreTracker::ScoreTracker(std::size_t window) : window_(window) {
    if (window == 0) throw ConfigError("score window must be >= 1");
}

void ScoreTracker::record(bool correct) {
    if (outcomes_.size() == window_) {
        hits_ -= outcomes_.front() ? 1 : 0;
        outcomes_.pop_front();
    }
    outcomes_.push_back(correct);
    hits_ += correct ? 1 : 0;
}

double ScoreTracker::average() const {
    if (outcomes_.empty()) return 0.0;
    return static_cast<double>(hits_) / static_cast<double>(outcomes_.size());
}

ScoreTracker score_update(ScoreTracker tracker, Label predicted, Label actual) {
    tracker.update(predicted, actual);
    return tracker;
}

}// namespace deltaedge::learn
