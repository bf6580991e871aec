#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace l3guard {

enum class Protocol { RRC, NAS };
enum class Label { Normal, BlindDoS };

std::string_view to_string(Protocol p);
std::string_view to_string(Label l);
Protocol parse_protocol(std::string_view s);
Label parse_label(std::string_view s);

using Param = std::pair<std::string, std::string>;

/// 32-bit TMSI; text form is exactly 8 lowercase hex digits.
struct Tmsi {
    std::uint32_t value = 0;

    std::string hex() const;
    static Tmsi parse(std::string_view hex);

    friend bool operator==(Tmsi, Tmsi) = default;
    friend auto operator<=>(Tmsi, Tmsi) = default;
};

/// One RRC or NAS message record as stored in the dataset and the SDL.
struct Layer3Message {
    std::uint64_t seq = 0;
    std::uint32_t ue_id = 0;
    Protocol protocol = Protocol::RRC;
    std::string name; // UTF-8; may hold non-ASCII codepoints after manipulation
    Tmsi tmsi;
    std::uint16_t rnti = 0;
    std::vector<Param> params;
    Label label = Label::Normal;
    bool manipulated = false;

    friend bool operator==(const Layer3Message&, const Layer3Message&) = default;
};

/// What a detector is allowed to see: a message without ground truth.
struct MessageView {
    std::uint64_t seq = 0;
    std::uint32_t ue_id = 0;
    Protocol protocol = Protocol::RRC;
    std::string name;
    Tmsi tmsi;
    std::uint16_t rnti = 0;
    std::vector<Param> params;

    friend bool operator==(const MessageView&, const MessageView&) = default;
};

MessageView view_of(const Layer3Message& m);
std::vector<MessageView> views_of(std::span<const Layer3Message> messages);

struct CatalogEntry {
    Protocol protocol;
    std::string_view name;
};

/// Benign message types in canonical per-UE attach order. The first entry is
/// the session-initial RRCSetupRequest.
std::span<const CatalogEntry> message_catalog();
bool in_catalog(std::string_view name);

/// One benign session for a UE; seq is left at 0 for dataset assembly.
std::vector<Layer3Message> canonical_session(std::uint32_t ue_id, Tmsi tmsi, std::uint16_t rnti);

nlohmann::ordered_json to_json(const Layer3Message& m);
nlohmann::ordered_json to_json(const MessageView& v);
Layer3Message message_from_json(const nlohmann::json& j);

/// Checks seq == 0..N-1 and per-field invariants; throws ValidationError.
void validate_dataset(std::span<const Layer3Message> messages);

// Dataset file: a '#' header comment, then one JSON object per line. Non-ASCII
// codepoints are written unescaped.
inline constexpr std::string_view kDatasetHeader = "# l3guard dataset v1";

void write_dataset(std::span<const Layer3Message> messages, const std::filesystem::path& path);
std::string serialize_dataset(std::span<const Layer3Message> messages);
std::vector<Layer3Message> read_dataset(const std::filesystem::path& path);
std::vector<Layer3Message> parse_dataset(std::string_view text);

} // namespace l3guard
