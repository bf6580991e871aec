#include "l3guard/utf8.hpp"

#include <cstdio>

namespace l3guard::utf8 {

namespace {

constexpr char32_t kEscapeBase = 0xDC00;

bool is_escaped_byte(char32_t cp) { return cp >= 0xDC80 && cp <= 0xDCFF; }

} // namespace

std::u32string decode(std::string_view bytes)
{
    std::u32string out;
    out.reserve(bytes.size());
    std::size_t i = 0;
    while (i < bytes.size()) {
        const auto b0 = static_cast<unsigned char>(bytes[i]);
        std::size_t need = 0;
        char32_t cp = 0;
        char32_t min = 0;
        if (b0 < 0x80) {
            out.push_back(b0);
            ++i;
            continue;
        } else if ((b0 & 0xE0) == 0xC0) {
            need = 1, cp = b0 & 0x1F, min = 0x80;
        } else if ((b0 & 0xF0) == 0xE0) {
            need = 2, cp = b0 & 0x0F, min = 0x800;
        } else if ((b0 & 0xF8) == 0xF0) {
            need = 3, cp = b0 & 0x07, min = 0x10000;
        } else {
            out.push_back(kEscapeBase + b0);
            ++i;
            continue;
        }
        bool ok = i + need < bytes.size();
        for (std::size_t k = 1; ok && k <= need; ++k) {
            const auto bk = static_cast<unsigned char>(bytes[i + k]);
            if ((bk & 0xC0) != 0x80) {
                ok = false;
            } else {
                cp = (cp << 6) | (bk & 0x3F);
            }
        }
        if (ok && (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)))
            ok = false;
        if (!ok) {
            out.push_back(kEscapeBase + b0);
            ++i;
            continue;
        }
        out.push_back(cp);
        i += need + 1;
    }
    return out;
}

std::string encode(std::u32string_view codepoints)
{
    std::string out;
    out.reserve(codepoints.size());
    for (char32_t cp : codepoints) {
        if (is_escaped_byte(cp)) {
            out.push_back(static_cast<char>(cp - kEscapeBase));
        } else if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        }
    }
    return out;
}

std::size_t length(std::string_view bytes) { return decode(bytes).size(); }

bool is_ascii(std::string_view bytes)
{
    for (char c : bytes)
        if (static_cast<unsigned char>(c) >= 0x80)
            return false;
    return true;
}

std::string describe_codepoints(std::string_view bytes)
{
    std::string out;
    char buf[16];
    for (char32_t cp : decode(bytes)) {
        if (!out.empty())
            out.push_back(' ');
        std::snprintf(buf, sizeof buf, "U+%04X", static_cast<unsigned>(cp));
        out += buf;
    }
    return out;
}

} // namespace l3guard::utf8
