#include "mcbnn/config.hpp"
#include "mcbnn/common.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace mcbnn {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

Config Config::parse_string(const std::string& text) {
    Config c;
    std::stringstream in(text);
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            require(line.back() == ']', "bad section header at line " + std::to_string(line_no));
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        require(eq != std::string::npos, "expected key = value at line " + std::to_string(line_no));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        require(!key.empty(), "empty key at line " + std::to_string(line_no));
        c.kv_[section.empty() ? key : section + "." + key] = value;
    }
    return c;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str());
}

bool Config::has(const std::string& k) const { return kv_.count(k) > 0; }

std::string Config::get(const std::string& k) const {
    auto it = kv_.find(k);
    require(it != kv_.end(), "missing config key: " + k);
    return it->second;
}

std::string Config::get_or(const std::string& k, const std::string& fallback) const {
    auto it = kv_.find(k);
    return it == kv_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& k, double fallback) const {
    auto it = kv_.find(k);
    if (it == kv_.end()) return fallback;
    char* end = nullptr;
    const double v = std::strtod(it->second.c_str(), &end);
    require(end != it->second.c_str(), "config key " + k + " is not a number");
    return v;
}

long long Config::get_int(const std::string& k, long long fallback) const {
    auto it = kv_.find(k);
    if (it == kv_.end()) return fallback;
    return std::strtoll(it->second.c_str(), nullptr, 10);
}

bool Config::get_bool(const std::string& k, bool fallback) const {
    auto it = kv_.find(k);
    if (it == kv_.end()) return fallback;
    const std::string& v = it->second;
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::invalid_argument("config key " + k + " is not a boolean");
}

void Config::set(const std::string& k, const std::string& v) { kv_[k] = v; }

std::vector<std::pair<std::string, std::string>> Config::section(const std::string& name) const {
    std::vector<std::pair<std::string, std::string>> out;
    const std::string prefix = name + ".";
    for (const auto& [k, v] : kv_)
        if (k.rfind(prefix, 0) == 0) out.emplace_back(k.substr(prefix.size()), v);
    return out;
}

} // namespace mcbnn
