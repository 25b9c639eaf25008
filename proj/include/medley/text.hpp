// Unicode helpers used wherever strings are compared across sources.
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace medley::text {

/// XML whitespace: space, tab, CR, LF.
bool is_xml_space(char c) noexcept;
std::string_view trim(std::string_view s) noexcept;

/// Unicode NFC of UTF-8 input. Invalid UTF-8 sequences are replaced with U+FFFD.
std::string nfc(std::string_view s);

/// Value comparison form: NFC after trimming leading/trailing XML whitespace.
std::string normalize_value(std::string_view s);

/// Locale-independent Unicode lowercase mapping, NFC-normalized.
std::string lower_case(std::string_view s);

/// Identity form for keys: lower_case(normalize_value(s)).
std::string fold_key(std::string_view s);

bool is_identifier(std::string_view s) noexcept;

std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace medley::text
