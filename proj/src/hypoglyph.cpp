#include "l3guard/hypoglyph.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "l3guard/errors.hpp"
#include "l3guard/utf8.hpp"

namespace l3guard {

const ConfusableTable& ConfusableTable::builtin()
{
    static const ConfusableTable table = [] {
        ConfusableTable t;
        t.add(U'a', 0x0430);
        t.add(U'c', 0x0441);
        t.add(U'e', 0x0435);
        t.add(U'o', 0x043E);
        t.add(U'p', 0x0440);
        t.add(U'x', 0x0445);
        t.add(U'y', 0x0443);
        t.add(U'C', 0x0421);
        t.add(U'E', 0x0415);
        t.add(U'O', 0x041E);
        t.add(U'P', 0x0420);
        t.add(U'q', 0x055B);
        return t;
    }();
    return table;
}

void ConfusableTable::add(char32_t ascii, char32_t lookalike)
{
    if (ascii >= 0x80)
        throw ConfigError("confusable representative must be ASCII");
    if (lookalike < 0x80)
        throw ConfigError("look-alike codepoint must be non-ASCII");
    to_ascii_[lookalike] = ascii;
}

char32_t ConfusableTable::representative(char32_t cp) const
{
    auto it = to_ascii_.find(cp);
    return it == to_ascii_.end() ? cp : it->second;
}

ConfusableTable ConfusableTable::parse(std::string_view text)
{
    ConfusableTable t;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::istringstream fields(line);
        std::string a, b, extra;
        if (!(fields >> a))
            continue;
        if (!(fields >> b) || (fields >> extra))
            throw ParseError(line_no, "expected two hex codepoints");
        auto hex = [&](const std::string& s) {
            std::string_view v = s;
            if (v.starts_with("U+") || v.starts_with("u+"))
                v.remove_prefix(2);
            std::uint32_t cp = 0;
            auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), cp, 16);
            if (ec != std::errc{} || ptr != v.data() + v.size() || cp > 0x10FFFF)
                throw ParseError(line_no, "bad codepoint '" + s + "'");
            return static_cast<char32_t>(cp);
        };
        try {
            t.add(hex(a), hex(b));
        } catch (const ConfigError& e) {
            throw ParseError(line_no, e.what());
        }
    }
    return t;
}

ConfusableTable ConfusableTable::load(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

SubstitutionMap SubstitutionMap::builtin_default()
{
    SubstitutionMap m;
    m.add(0x0043, 0x0421);
    m.add(0x0065, 0x0435);
    m.add(0x0071, 0x055B);
    return m;
}

SubstitutionMap SubstitutionMap::from_table(const ConfusableTable& table)
{
    SubstitutionMap m;
    for (const auto& [lookalike, ascii] : table.entries())
        if (!m.pairs_.contains(ascii))
            m.add(ascii, lookalike, table);
    return m;
}

void SubstitutionMap::add(char32_t src, char32_t dst, const ConfusableTable& table)
{
    if (src == dst)
        throw ConfigError("substitution source equals replacement");
    if (src >= 0x80)
        throw ConfigError("substitution source must be ASCII");
    if (dst < 0x80)
        throw ConfigError("substitution replacement must be non-ASCII");
    if (table.representative(dst) != src)
        throw ConfigError("replacement is not a look-alike of its source in the confusable table");
    pairs_[src] = dst;
}

std::string apply_hypoglyphs(std::string_view text, const SubstitutionMap& map)
{
    if (map.empty())
        return std::string(text);
    auto cps = utf8::decode(text);
    for (auto& cp : cps)
        if (auto it = map.pairs().find(cp); it != map.pairs().end())
            cp = it->second;
    return utf8::encode(cps);
}

std::string skeleton(std::string_view text, const ConfusableTable& table)
{
    auto cps = utf8::decode(text);
    for (auto& cp : cps)
        cp = table.representative(cp);
    return utf8::encode(cps);
}

bool contains_hypoglyph(std::string_view text, const ConfusableTable& table)
{
    if (utf8::is_ascii(text))
        return false;
    for (char32_t cp : utf8::decode(text))
        if (table.is_lookalike(cp))
            return true;
    return false;
}

} // namespace l3guard
