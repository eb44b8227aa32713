#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>

namespace mgpmia {

// Flat `key = value` text records. Blank lines and lines starting with '#'
// are ignored; whitespace around keys and values is trimmed.
using KeyValues = std::map<std::string, std::string, std::less<>>;

KeyValues parse_key_values(std::istream& in, const std::string& source_name);
KeyValues read_key_values(const std::filesystem::path& path);
void write_key_values(std::ostream& out, const KeyValues& values);

// Shortest decimal text that round-trips the double.
std::string format_double(double value);

double kv_double(const KeyValues& kv, std::string_view key);
long long kv_int(const KeyValues& kv, std::string_view key);
const std::string& kv_string(const KeyValues& kv, std::string_view key);

}  // namespace mgpmia
