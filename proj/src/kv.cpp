#include "tinlab/kv.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "tinlab/errors.hpp"

namespace tinlab {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

KeyValueDoc KeyValueDoc::parse(const std::string& text)
{
    KeyValueDoc doc;
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#')
            continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw FormatError("line " + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw FormatError("line " + std::to_string(lineno) + ": empty key");
        if (doc.entries_.count(key))
            throw FormatError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        doc.entries_.emplace(std::move(key), std::move(value));
    }
    return doc;
}

KeyValueDoc KeyValueDoc::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw FormatError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse(ss.str());
    } catch (const FormatError& e) {
        throw FormatError(path + ": " + e.what());
    }
}

std::optional<std::string> KeyValueDoc::get(const std::string& key) const
{
    auto it = entries_.find(key);
    if (it == entries_.end())
        return std::nullopt;
    return it->second;
}

std::string KeyValueDoc::get_string(const std::string& key, const std::string& fallback) const
{
    return get(key).value_or(fallback);
}

double KeyValueDoc::get_double(const std::string& key, double fallback) const
{
    auto v = get(key);
    if (!v)
        return fallback;
    char* end = nullptr;
    errno = 0;
    const double d = std::strtod(v->c_str(), &end);
    if (v->empty() || end != v->c_str() + v->size() || errno == ERANGE)
        throw ConfigError("key '" + key + "': expected a number, got '" + *v + "'");
    return d;
}

std::int64_t KeyValueDoc::get_int(const std::string& key, std::int64_t fallback) const
{
    auto v = get(key);
    if (!v)
        return fallback;
    char* end = nullptr;
    errno = 0;
    const long long i = std::strtoll(v->c_str(), &end, 10);
    if (v->empty() || end != v->c_str() + v->size() || errno == ERANGE)
        throw ConfigError("key '" + key + "': expected an integer, got '" + *v + "'");
    return i;
}

std::size_t KeyValueDoc::get_size(const std::string& key, std::size_t fallback) const
{
    if (!has(key))
        return fallback;
    const auto i = get_int(key, 0);
    if (i < 0)
        throw ConfigError("key '" + key + "': expected a nonnegative integer");
    return static_cast<std::size_t>(i);
}

bool KeyValueDoc::get_bool(const std::string& key, bool fallback) const
{
    auto v = get(key);
    if (!v)
        return fallback;
    if (*v == "true" || *v == "1" || *v == "yes")
        return true;
    if (*v == "false" || *v == "0" || *v == "no")
        return false;
    throw ConfigError("key '" + key + "': expected a boolean, got '" + *v + "'");
}

void KeyValueDoc::reject_unknown(const std::set<std::string>& allowed) const
{
    for (const auto& [key, value] : entries_) {
        if (allowed.count(key))
            continue;
        bool matched = false;
        for (const auto& a : allowed)
            if (!a.empty() && a.back() == '*' && key.compare(0, a.size() - 1, a, 0, a.size() - 1) == 0)
                matched = true;
        if (!matched)
            throw ConfigError("unknown key '" + key + "'");
    }
}

std::string KeyValueDoc::to_string() const
{
    std::ostringstream os;
    for (const auto& [key, value] : entries_)
        os << key << " = " << value << "\n";
    return os.str();
}

std::string format_double(double v)
{
    char buf[40];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

} // namespace tinlab
