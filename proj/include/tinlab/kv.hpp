#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>

namespace tinlab {

// Flat `key = value` document. Blank lines and lines starting with '#' are
// ignored; keys are unique; surrounding whitespace is trimmed.
class KeyValueDoc {
public:
    static KeyValueDoc parse(const std::string& text);
    static KeyValueDoc load(const std::string& path);

    void set(const std::string& key, std::string value) { entries_[key] = std::move(value); }
    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    void erase(const std::string& key) { entries_.erase(key); }
    const std::map<std::string, std::string>& entries() const { return entries_; }

    std::optional<std::string> get(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    std::size_t get_size(const std::string& key, std::size_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    // Throws ConfigError naming the first key not in `allowed`. A trailing
    // '*' in an allowed entry matches any key with that prefix.
    void reject_unknown(const std::set<std::string>& allowed) const;

    std::string to_string() const;

private:
    std::map<std::string, std::string> entries_;
};

// Shortest text that parses back to the same double.
std::string format_double(double v);

} // namespace tinlab
