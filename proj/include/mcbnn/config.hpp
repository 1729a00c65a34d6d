#pragma once

#include <map>
#include <string>
#include <vector>

namespace mcbnn {

// Flat "key = value" configuration with [section] headers. Comments start
// with '#'. Lookups use "section.key".
class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text);

    bool has(const std::string& dotted_key) const;
    std::string get(const std::string& dotted_key) const;
    std::string get_or(const std::string& dotted_key, const std::string& fallback) const;
    double get_double(const std::string& dotted_key, double fallback) const;
    long long get_int(const std::string& dotted_key, long long fallback) const;
    bool get_bool(const std::string& dotted_key, bool fallback) const;

    void set(const std::string& dotted_key, const std::string& value);
    const std::map<std::string, std::string>& entries() const { return kv_; }
    std::vector<std::pair<std::string, std::string>> section(const std::string& name) const;

private:
    std::map<std::string, std::string> kv_;
};

} // namespace mcbnn
