#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "l3guard/errors.hpp"
#include "l3guard/hypoglyph.hpp"
#include "l3guard/message.hpp"
#include "l3guard/rng.hpp"
#include "l3guard/utf8.hpp"

using namespace l3guard;

TEST_CASE("built-in map is exactly C, e, q")
{
    const auto m = SubstitutionMap::builtin_default();
    const std::map<char32_t, char32_t> expected{{0x43, 0x421}, {0x65, 0x435}, {0x71, 0x55B}};
    CHECK(m.pairs() == expected);
}

TEST_CASE("apply on RRCSetupRequest replaces every C, e and q")
{
    const auto out = apply_hypoglyphs("RRCSetupRequest", SubstitutionMap::builtin_default());
    const std::u32string expected = U"RRСSеtupRе՛uеst";
    CHECK(utf8::decode(out) == expected);
    CHECK(out != "RRCSetupRequest");
    CHECK(utf8::length(out) == 15);
    CHECK(skeleton(out) == "RRCSetupRequest");
    CHECK(contains_hypoglyph(out));
}

TEST_CASE("apply edge cases")
{
    CHECK(apply_hypoglyphs("RRCSetupRequest", SubstitutionMap{}) == "RRCSetupRequest");
    CHECK(apply_hypoglyphs("zzz", SubstitutionMap::builtin_default()) == "zzz");
    CHECK(apply_hypoglyphs("", SubstitutionMap::builtin_default()).empty());
    // invalid bytes pass through untouched
    CHECK(apply_hypoglyphs("e\xFF", SubstitutionMap::builtin_default()) == "\xD0\xB5\xFF");
}

TEST_CASE("skeleton and contains_hypoglyph")
{
    CHECK(skeleton("RRCSetupRequest") == "RRCSetupRequest");
    CHECK(skeleton("\xD0\xA1") == "C"); // U+0421
    CHECK_FALSE(contains_hypoglyph("RRCSetupRequest"));
    CHECK_FALSE(contains_hypoglyph(""));
    CHECK_FALSE(contains_hypoglyph("caf\xC3\xA9")); // é is not in the table
    const auto once = skeleton("\xD0\xA1\xD0\xB5");
    CHECK(skeleton(once) == once);
}

TEST_CASE("substitution map invariants are enforced")
{
    SubstitutionMap m;
    CHECK_THROWS_AS(m.add(U'C', U'C'), ConfigError);
    CHECK_THROWS_AS(m.add(0x421, U'C'), ConfigError);
    CHECK_THROWS_AS(m.add(U'C', 0x435), ConfigError); // Cyrillic e is not a C look-alike
    CHECK_THROWS_AS(m.add(U'z', 0x430), ConfigError);
    m.add(U'a', 0x430);
    CHECK(m.size() == 1);
}

TEST_CASE("extended table map keeps the evasion property on catalog names")
{
    const auto full = SubstitutionMap::from_table(ConfusableTable::builtin());
    CHECK(full.size() == 12);
    for (const auto& e : message_catalog()) {
        const std::string name(e.name);
        const auto out = apply_hypoglyphs(name, full);
        CHECK(out != name);
        CHECK(skeleton(out) == name);
        CHECK(utf8::length(out) == name.size());
    }
}

TEST_CASE("property: random strings over catalog characters")
{
    Rng rng(99);
    const auto map = SubstitutionMap::builtin_default();
    std::string alphabet;
    for (const auto& e : message_catalog())
        alphabet += e.name;
    for (int trial = 0; trial < 500; ++trial) {
        std::string s;
        const auto len = rng.below(30);
        for (std::uint64_t i = 0; i < len; ++i)
            s.push_back(alphabet[rng.below(alphabet.size())]);
        const auto out = apply_hypoglyphs(s, map);
        const bool has_source = s.find_first_of("Ceq") != std::string::npos;
        CHECK((out != s) == has_source);
        CHECK(utf8::length(out) == s.size());
        CHECK(skeleton(out) == skeleton(s));
        CHECK(contains_hypoglyph(out) == has_source);
    }
}

TEST_CASE("confusable table file")
{
    const auto t = ConfusableTable::parse("# ascii lookalike\n0043 0421\nU+0065 U+0435 # cyrillic e\n\n");
    CHECK(t.entries().size() == 2);
    CHECK(t.representative(0x421) == U'C');
    const auto m = SubstitutionMap::from_table(t);
    CHECK(apply_hypoglyphs("Ce", m) == "\xD0\xA1\xD0\xB5");

    CHECK_THROWS_AS(ConfusableTable::parse("0043\n"), ParseError);
    CHECK_THROWS_AS(ConfusableTable::parse("0043 zz\n"), ParseError);
    CHECK_THROWS_AS(ConfusableTable::parse("0421 0043\n"), ParseError);

    const auto path = std::filesystem::temp_directory_path() / "l3guard_table.txt";
    {
        std::ofstream out(path);
        out << "0071 055B\n";
    }
    CHECK(ConfusableTable::load(path).representative(0x55B) == U'q');
    CHECK_THROWS_AS(ConfusableTable::load(path.string() + ".missing"), IoError);
}
