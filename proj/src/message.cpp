#include "l3guard/message.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "l3guard/errors.hpp"
#include "l3guard/utf8.hpp"

namespace l3guard {

namespace {

constexpr std::array<CatalogEntry, 12> kCatalog{{
    {Protocol::RRC, "RRCSetupRequest"},
    {Protocol::RRC, "RRCSetup"},
    {Protocol::RRC, "RRCSetupComplete"},
    {Protocol::NAS, "RegistrationRequest"},
    {Protocol::NAS, "AuthenticationRequest"},
    {Protocol::NAS, "AuthenticationResponse"},
    {Protocol::RRC, "SecurityModeCommand"},
    {Protocol::RRC, "SecurityModeComplete"},
    {Protocol::NAS, "RegistrationAccept"},
    {Protocol::RRC, "RRCReconfiguration"},
    {Protocol::RRC, "RRCReconfigurationComplete"},
    {Protocol::RRC, "RRCRelease"},
}};

} // namespace

std::string_view to_string(Protocol p) { return p == Protocol::RRC ? "RRC" : "NAS"; }
std::string_view to_string(Label l) { return l == Label::Normal ? "Normal" : "BlindDoS"; }

Protocol parse_protocol(std::string_view s)
{
    if (s == "RRC")
        return Protocol::RRC;
    if (s == "NAS")
        return Protocol::NAS;
    throw ValidationError("unknown protocol '" + std::string(s) + "'");
}

Label parse_label(std::string_view s)
{
    if (s == "Normal")
        return Label::Normal;
    if (s == "BlindDoS")
        return Label::BlindDoS;
    throw ValidationError("unknown label '" + std::string(s) + "'");
}

std::string Tmsi::hex() const
{
    char buf[9];
    std::snprintf(buf, sizeof buf, "%08x", value);
    return buf;
}

Tmsi Tmsi::parse(std::string_view hex)
{
    if (hex.size() != 8)
        throw ValidationError("tmsi must be 8 hex digits, got '" + std::string(hex) + "'");
    for (char c : hex)
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f')))
            throw ValidationError("tmsi must be lowercase hex, got '" + std::string(hex) + "'");
    Tmsi t;
    std::from_chars(hex.data(), hex.data() + hex.size(), t.value, 16);
    return t;
}

MessageView view_of(const Layer3Message& m)
{
    return {m.seq, m.ue_id, m.protocol, m.name, m.tmsi, m.rnti, m.params};
}

std::vector<MessageView> views_of(std::span<const Layer3Message> messages)
{
    std::vector<MessageView> out;
    out.reserve(messages.size());
    for (const auto& m : messages)
        out.push_back(view_of(m));
    return out;
}

std::span<const CatalogEntry> message_catalog() { return kCatalog; }

bool in_catalog(std::string_view name)
{
    for (const auto& e : kCatalog)
        if (e.name == name)
            return true;
    return false;
}

std::vector<Layer3Message> canonical_session(std::uint32_t ue_id, Tmsi tmsi, std::uint16_t rnti)
{
    std::vector<Layer3Message> session;
    session.reserve(kCatalog.size());
    for (const auto& e : kCatalog) {
        Layer3Message m;
        m.ue_id = ue_id;
        m.protocol = e.protocol;
        m.name = std::string(e.name);
        m.tmsi = tmsi;
        m.rnti = rnti;
        session.push_back(std::move(m));
    }
    return session;
}

namespace {

nlohmann::ordered_json params_json(const std::vector<Param>& params)
{
    auto arr = nlohmann::ordered_json::array();
    for (const auto& [k, v] : params)
        arr.push_back({k, v});
    return arr;
}

} // namespace

nlohmann::ordered_json to_json(const MessageView& v)
{
    nlohmann::ordered_json j;
    j["seq"] = v.seq;
    j["ue_id"] = v.ue_id;
    j["protocol"] = to_string(v.protocol);
    j["name"] = v.name;
    j["tmsi"] = v.tmsi.hex();
    j["rnti"] = v.rnti;
    j["params"] = params_json(v.params);
    return j;
}

nlohmann::ordered_json to_json(const Layer3Message& m)
{
    auto j = to_json(view_of(m));
    j["label"] = to_string(m.label);
    j["manipulated"] = m.manipulated;
    return j;
}

Layer3Message message_from_json(const nlohmann::json& j)
{
    Layer3Message m;
    try {
        m.seq = j.at("seq").get<std::uint64_t>();
        m.ue_id = j.at("ue_id").get<std::uint32_t>();
        m.protocol = parse_protocol(j.at("protocol").get<std::string>());
        m.name = j.at("name").get<std::string>();
        m.tmsi = Tmsi::parse(j.at("tmsi").get<std::string>());
        const auto rnti = j.at("rnti").get<std::int64_t>();
        if (rnti < 0 || rnti > 65535)
            throw ValidationError("rnti out of range: " + std::to_string(rnti));
        m.rnti = static_cast<std::uint16_t>(rnti);
        if (j.contains("params"))
            for (const auto& p : j.at("params"))
                m.params.emplace_back(p.at(0).get<std::string>(), p.at(1).get<std::string>());
        m.label = parse_label(j.at("label").get<std::string>());
        m.manipulated = j.at("manipulated").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(e.what());
    }
    return m;
}

void validate_dataset(std::span<const Layer3Message> messages)
{
    for (std::size_t i = 0; i < messages.size(); ++i) {
        if (messages[i].seq != i)
            throw ValidationError("seq " + std::to_string(messages[i].seq) + " at position "
                                  + std::to_string(i) + " (expected " + std::to_string(i) + ")");
    }
}

std::string serialize_dataset(std::span<const Layer3Message> messages)
{
    std::string out(kDatasetHeader);
    out.push_back('\n');
    for (const auto& m : messages) {
        out += to_json(m).dump();
        out.push_back('\n');
    }
    return out;
}

void write_dataset(std::span<const Layer3Message> messages, const std::filesystem::path& path)
{
    validate_dataset(messages);
    const auto text = serialize_dataset(messages);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out)
        throw IoError("write failed: " + path.string());
}

std::vector<Layer3Message> parse_dataset(std::string_view text)
{
    std::vector<Layer3Message> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos)
            end = text.size();
        auto line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        if (line.empty() || line.front() == '#')
            continue;
        try {
            out.push_back(message_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(line_no, e.what());
        } catch (const ValidationError& e) {
            throw ParseError(line_no, e.what());
        }
    }
    std::unordered_set<std::uint64_t> seen;
    for (const auto& m : out)
        if (!seen.insert(m.seq).second)
            throw ValidationError("duplicate seq " + std::to_string(m.seq));
    validate_dataset(out);
    return out;
}

std::vector<Layer3Message> read_dataset(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_dataset(ss.str());
}

} // namespace l3guard
