#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "l3guard/message.hpp"

namespace l3guard {

inline constexpr int kMinWindow = 1;
inline constexpr int kMaxWindow = 10;

/// The newest message, its w-1 stream predecessors, and the previous message
/// of the same UE.
struct DetectionWindow {
    MessageView latest;
    std::vector<MessageView> context; // oldest first
    std::optional<MessageView> ue_previous;
    int window_size = 1;

    friend bool operator==(const DetectionWindow&, const DetectionWindow&) = default;
};

/// Throws ConfigError unless 1 <= w <= 10.
void check_window_size(int w);

/// Direct construction from a random-access stream.
DetectionWindow window_for(std::span<const MessageView> stream, std::size_t i, int w);

// Incremental form used by the detectors: one push per newly polled message,
// one window out, no lookahead.
class WindowStreamer {
public:
    explicit WindowStreamer(int window_size);

    DetectionWindow push(const MessageView& message);

    /// Window for message without adding it to the history.
    DetectionWindow peek(const MessageView& message) const;
    /// Adds message to the history that later windows are built from.
    void accept(const MessageView& message);

    int window_size() const { return window_size_; }

private:
    int window_size_;
    std::deque<MessageView> recent_;
    std::unordered_map<std::uint32_t, MessageView> last_by_ue_;
};

std::vector<DetectionWindow> stream_windows(std::span<const MessageView> stream, int w);

} // namespace l3guard
