// UTF-8 helpers. Character-level logic in the toolkit works on Unicode
// scalar values, never on bytes.
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace postag::text {

/// Decodes UTF-8 into scalar values. Invalid sequences throw std::invalid_argument.
std::vector<char32_t> decode(std::string_view utf8);

std::string encode(char32_t cp);
std::string encode(const std::vector<char32_t>& cps);

std::size_t length(std::string_view utf8);

std::string to_lower(std::string_view utf8);

bool is_upper(char32_t cp);
bool is_letter(char32_t cp);
bool is_digit(char32_t cp);

}  // namespace postag::text
