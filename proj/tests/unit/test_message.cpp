#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <regex>

#include "l3guard/errors.hpp"
#include "l3guard/forge.hpp"
#include "l3guard/message.hpp"
#include "l3guard/utf8.hpp"

using namespace l3guard;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name)
{
    auto dir = fs::temp_directory_path() / "l3guard_test_message";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

} // namespace

TEST_CASE("catalog starts with RRCSetupRequest and is ASCII")
{
    const auto cat = message_catalog();
    REQUIRE(cat.size() == 12);
    CHECK(cat.front().name == "RRCSetupRequest");
    CHECK(cat.front().protocol == Protocol::RRC);
    for (const auto& e : cat)
        CHECK(utf8::is_ascii(e.name));
}

TEST_CASE("canonical_session")
{
    const auto s = canonical_session(0, Tmsi{1}, 17);
    REQUIRE(s.size() == message_catalog().size());
    CHECK(s.front().name == "RRCSetupRequest");
    CHECK(s.front().protocol == Protocol::RRC);
    for (const auto& m : s) {
        CHECK(m.label == Label::Normal);
        CHECK_FALSE(m.manipulated);
        CHECK(m.tmsi.hex() == "00000001");
        CHECK(m.rnti == 17);
    }
    for (const auto& m : canonical_session(3, Tmsi{0xdeadbeef}, 9))
        CHECK(m.ue_id == 3);
}

TEST_CASE("tmsi text form")
{
    CHECK(Tmsi{0xAB}.hex() == "000000ab");
    CHECK(Tmsi::parse("0a0b0c0d").value == 0x0a0b0c0du);
    CHECK_THROWS_AS(Tmsi::parse("0A0B0C0D"), ValidationError);
    CHECK_THROWS_AS(Tmsi::parse("123"), ValidationError);
}

TEST_CASE("dataset round trip keeps every field")
{
    const auto messages = forge_dataset(ForgeConfig{}).messages;
    REQUIRE(messages.size() == 1016);
    const auto path = temp_file("roundtrip.jsonl");
    write_dataset(messages, path);
    const auto back = read_dataset(path);
    REQUIRE(back.size() == messages.size());
    for (std::size_t i = 0; i < messages.size(); ++i)
        CHECK(back[i] == messages[i]);
}

TEST_CASE("hypoglyphs are written unescaped and survive byte-exact")
{
    auto session = canonical_session(0, Tmsi{1}, 1);
    session[1].seq = 1;
    session.resize(2);
    session[0].name = "RR\xD0\xA1SetupRequest"; // U+0421
    session[0].manipulated = true;
    session[0].params = {{"cause", "mo-Signalling"}};
    const auto path = temp_file("cyrillic.jsonl");
    write_dataset(session, path);
    const auto raw = slurp(path);
    CHECK(raw.find("RR\xD0\xA1SetupRequest") != std::string::npos);
    CHECK(raw.find("\\u") == std::string::npos);
    const auto back = read_dataset(path);
    CHECK(back[0].name == session[0].name);
    CHECK(utf8::decode(back[0].name)[2] == U'С');
    CHECK(back == session);
}

TEST_CASE("empty dataset is only the header")
{
    const auto path = temp_file("empty.jsonl");
    write_dataset({}, path);
    CHECK(slurp(path) == std::string(kDatasetHeader) + "\n");
    CHECK(read_dataset(path).empty());
}

TEST_CASE("parse errors name the line")
{
    const std::string text = std::string(kDatasetHeader) + "\n"
                             + R"({"seq":0,"ue_id":0,"protocol":"RRC","name":"RRCSetup","tmsi":"00000001","rnti":1,"params":[],"label":"Normal","manipulated":false})"
                             + "\n{not json\n";
    try {
        parse_dataset(text);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }

    const std::string bad_tmsi = R"({"seq":0,"ue_id":0,"protocol":"RRC","name":"x","tmsi":"XYZ","rnti":1,"params":[],"label":"Normal","manipulated":false})";
    CHECK_THROWS_AS(parse_dataset(bad_tmsi), ParseError);
    const std::string bad_rnti = R"({"seq":0,"ue_id":0,"protocol":"RRC","name":"x","tmsi":"00000001","rnti":70000,"params":[],"label":"Normal","manipulated":false})";
    CHECK_THROWS_AS(parse_dataset(bad_rnti), ParseError);
}

TEST_CASE("duplicate or gapped seq is rejected")
{
    auto s = canonical_session(0, Tmsi{1}, 1);
    for (std::size_t i = 0; i < s.size(); ++i)
        s[i].seq = i;
    s[3].seq = 2;
    CHECK_THROWS_AS(parse_dataset(serialize_dataset(s)), ValidationError);
    s[3].seq = 40;
    CHECK_THROWS_AS(parse_dataset(serialize_dataset(s)), ValidationError);
    CHECK_THROWS_AS(write_dataset(s, temp_file("gap.jsonl")), ValidationError);
}

TEST_CASE("detector views carry no ground truth")
{
    auto m = forge_dataset(ForgeConfig{}).messages.at(5);
    m.label = Label::BlindDoS;
    m.manipulated = true;
    const auto text = to_json(view_of(m)).dump();
    CHECK(text.find("label") == std::string::npos);
    CHECK(text.find("manipulated") == std::string::npos);
    CHECK(text.find("BlindDoS") == std::string::npos);
    CHECK(to_json(m).dump().find("label") != std::string::npos);
}

TEST_CASE("utf8 decode/encode is lossless even for invalid bytes")
{
    const std::string samples[] = {"", "abc", "RR\xD0\xA1S", "\xF0\x9F\x98\x80", "\xFF\xFE", "a\xC3", "\xE0\x80\x80",
                                   "\xED\xA0\x80"};
    for (const auto& s : samples)
        CHECK(utf8::encode(utf8::decode(s)) == s);
    CHECK(utf8::length("RR\xD0\xA1S") == 4);
    CHECK(utf8::describe_codepoints("C\xD0\xA1") == "U+0043 U+0421");
}
