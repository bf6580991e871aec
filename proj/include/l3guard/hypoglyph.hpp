#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace l3guard {

/// Look-alike codepoints and the ASCII character each one imitates.
class ConfusableTable {
public:
    /// Latin/Cyrillic look-alikes for a c e o p x y C E O P, plus U+055B for q.
    static const ConfusableTable& builtin();

    /// Two hex codepoints per line: "<ascii> <look-alike>", '#' starts a comment.
    static ConfusableTable load(const std::filesystem::path& path);
    static ConfusableTable parse(std::string_view text);

    void add(char32_t ascii, char32_t lookalike);

    /// ASCII representative for cp, or cp itself when cp is not in the table.
    char32_t representative(char32_t cp) const;
    bool is_lookalike(char32_t cp) const { return to_ascii_.contains(cp); }
    const std::map<char32_t, char32_t>& entries() const { return to_ascii_; }

private:
    std::map<char32_t, char32_t> to_ascii_;
};

/// Source codepoint -> replacement. Every pair is ASCII -> non-ASCII look-alike.
class SubstitutionMap {
public:
    SubstitutionMap() = default;

    /// {U+0043 -> U+0421, U+0065 -> U+0435, U+0071 -> U+055B}
    static SubstitutionMap builtin_default();
    /// First look-alike in the table for every ASCII character it covers.
    static SubstitutionMap from_table(const ConfusableTable& table);

    /// Throws ConfigError when the pair breaks the map invariants w.r.t. table.
    void add(char32_t src, char32_t dst, const ConfusableTable& table = ConfusableTable::builtin());

    bool empty() const { return pairs_.empty(); }
    std::size_t size() const { return pairs_.size(); }
    const std::map<char32_t, char32_t>& pairs() const { return pairs_; }

    friend bool operator==(const SubstitutionMap&, const SubstitutionMap&) = default;

private:
    std::map<char32_t, char32_t> pairs_;
};

/// Replaces every occurrence of each mapped source codepoint.
std::string apply_hypoglyphs(std::string_view text, const SubstitutionMap& map);

std::string skeleton(std::string_view text, const ConfusableTable& table = ConfusableTable::builtin());

bool contains_hypoglyph(std::string_view text,
                        const ConfusableTable& table = ConfusableTable::builtin());

} // namespace l3guard
