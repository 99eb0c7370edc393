#pragma once

// Flat key=value text used for run manifests, config files and graph dumps.
// One entry per line, '#' starts a comment line, keys are unique.

#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace specnet {

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using KeyValues = std::map<std::string, std::string>;

/// Throws ParseError naming the offending line on malformed input.
KeyValues read_key_values(std::istream& is);
KeyValues read_key_values_file(const std::string& path);
void write_key_values(std::ostream& os, const KeyValues& kv);

/// 17 significant digits; parses back to the identical double.
std::string format_double(double v);
double parse_double(std::string_view s);
long long parse_int(std::string_view s);

std::string join_doubles(std::span<const double> v, char sep = ',');
std::vector<double> split_doubles(std::string_view s, char sep = ',');
std::vector<std::string> split(std::string_view s, char sep);
std::string trim(std::string_view s);

} // namespace specnet
