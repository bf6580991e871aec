#include "l3guard/window.hpp"

#include "l3guard/errors.hpp"

namespace l3guard {

void check_window_size(int w)
{
    if (w < kMinWindow || w > kMaxWindow)
        throw ConfigError("window size " + std::to_string(w) + " outside [1, 10]");
}

DetectionWindow window_for(std::span<const MessageView> stream, std::size_t i, int w)
{
    check_window_size(w);
    if (i >= stream.size())
        throw ConfigError("window index " + std::to_string(i) + " past end of stream");
    DetectionWindow win;
    win.window_size = w;
    win.latest = stream[i];
    const std::size_t first = i >= static_cast<std::size_t>(w - 1) ? i - (w - 1) : 0;
    win.context.assign(stream.begin() + first, stream.begin() + i);
    for (std::size_t j = i; j-- > 0;) {
        if (stream[j].ue_id == stream[i].ue_id) {
            win.ue_previous = stream[j];
            break;
        }
    }
    return win;
}

WindowStreamer::WindowStreamer(int window_size) : window_size_(window_size)
{
    check_window_size(window_size);
}

DetectionWindow WindowStreamer::push(const MessageView& message)
{
    auto win = peek(message);
    accept(message);
    return win;
}

DetectionWindow WindowStreamer::peek(const MessageView& message) const
{
    DetectionWindow win;
    win.window_size = window_size_;
    win.latest = message;
    win.context.assign(recent_.begin(), recent_.end());
    if (auto it = last_by_ue_.find(message.ue_id); it != last_by_ue_.end())
        win.ue_previous = it->second;
    return win;
}

void WindowStreamer::accept(const MessageView& message)
{
    last_by_ue_.insert_or_assign(message.ue_id, message);
    if (window_size_ > 1) {
        recent_.push_back(message);
        if (recent_.size() > static_cast<std::size_t>(window_size_ - 1))
            recent_.pop_front();
    }
}

std::vector<DetectionWindow> stream_windows(std::span<const MessageView> stream, int w)
{
    WindowStreamer streamer(w);
    std::vector<DetectionWindow> out;
    out.reserve(stream.size());
    for (const auto& m : stream)
        out.push_back(streamer.push(m));
    return out;
}

} // namespace l3guard
