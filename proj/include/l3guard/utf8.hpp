#pragma once

#include <string>
#include <string_view>

namespace l3guard::utf8 {

// Bytes that do not form valid UTF-8 decode to U+DC80..U+DCFF (one per byte)
// and encode back to the original byte, so decode/encode is lossless.
std::u32string decode(std::string_view bytes);
std::string encode(std::u32string_view codepoints);

std::size_t length(std::string_view bytes);
bool is_ascii(std::string_view bytes);

/// "U+0421 U+0435" style rendering, used in error messages.
std::string describe_codepoints(std::string_view bytes);

} // namespace l3guard::utf8
