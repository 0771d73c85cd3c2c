#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace newsfuse::utf8 {

// Offsets throughout the project count Unicode code points, not bytes.
std::size_t length(std::string_view text);

// Terminal columns: code points minus combining diacritics (U+0300..U+036F).
std::size_t display_width(std::string_view text);

// Byte offset of every code point boundary; size() == length(text) + 1.
std::vector<std::size_t> boundaries(std::string_view text);

// Code points [start, end) of text. Throws if the range is out of bounds.
std::string substr(std::string_view text, std::size_t start, std::size_t end);

}  // namespace newsfuse::utf8
