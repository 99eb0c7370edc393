#include "specnet/kv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

namespace specnet {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(s.substr(start));
            break;
        }
        out.emplace_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

KeyValues read_key_values(std::istream& is)
{
    KeyValues kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ParseError("line " + std::to_string(lineno) + ": expected key=value, got '" + t + "'");
        }
        std::string key = trim(std::string_view(t).substr(0, eq));
        if (kv.contains(key)) throw ParseError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        kv.emplace(std::move(key), trim(std::string_view(t).substr(eq + 1)));
    }
    return kv;
}

KeyValues read_key_values_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    try {
        return read_key_values(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void write_key_values(std::ostream& os, const KeyValues& kv)
{
    for (const auto& [k, v] : kv) os << k << '=' << v << '\n';
}

std::string format_double(double v)
{
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
    return std::string(buf.data(), res.ptr);
}

double parse_double(std::string_view s)
{
    const std::string t = trim(s);
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
        // from_chars rejects "inf"/"nan" spellings with a sign prefix; handle the ones we write.
        if (t == "inf" || t == "+inf") return INFINITY;
        if (t == "-inf") return -INFINITY;
        throw ParseError("not a number: '" + t + "'");
    }
    return v;
}

long long parse_int(std::string_view s)
{
    const std::string t = trim(s);
    long long v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) throw ParseError("not an integer: '" + t + "'");
    return v;
}

std::string join_doubles(std::span<const double> v, char sep)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += sep;
        out += format_double(v[i]);
    }
    return out;
}

std::vector<double> split_doubles(std::string_view s, char sep)
{
    std::vector<double> out;
    if (trim(s).empty()) return out;
    for (const auto& piece : split(s, sep)) out.push_back(parse_double(piece));
    return out;
}

} // namespace specnet
