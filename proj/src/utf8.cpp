#include "newsfuse/utf8.hpp"

#include "newsfuse/types.hpp"

namespace newsfuse::utf8 {

namespace {

bool is_continuation(unsigned char byte) { return (byte & 0xC0u) == 0x80u; }

}  // namespace

std::size_t length(std::string_view text) {
  std::size_t count = 0;
  for (unsigned char byte : text) {
    if (!is_continuation(byte)) ++count;
  }
  return count;
}

std::size_t display_width(std::string_view text) {
  std::size_t width = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto byte = static_cast<unsigned char>(text[i]);
    if (is_continuation(byte)) continue;
    // U+0300..U+036F encode as CC 80..CD AF.
    const bool combining = i + 1 < text.size() &&
                           (byte == 0xCC || (byte == 0xCD && static_cast<unsigned char>(text[i + 1]) <= 0xAF));
    if (!combining) ++width;
  }
  return width;
}

std::vector<std::size_t> boundaries(std::string_view text) {
  std::vector<std::size_t> offsets;
  offsets.reserve(text.size() + 1);
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!is_continuation(static_cast<unsigned char>(text[i]))) offsets.push_back(i);
  }
  offsets.push_back(text.size());
  return offsets;
}

std::string substr(std::string_view text, std::size_t start, std::size_t end) {
  const auto offsets = boundaries(text);
  if (start > end || end + 1 > offsets.size()) {
    throw Error("code point range [" + std::to_string(start) + "," + std::to_string(end) +
                ") outside text of length " + std::to_string(offsets.size() - 1));
  }
  return std::string(text.substr(offsets[start], offsets[end] - offsets[start]));
}

}  // namespace newsfuse::utf8
