#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace podrom {

/// Flat `key = value` run configuration. Lines starting with '#' are comments;
/// `--set key=value` overrides land on top of the file contents.
class Config {
public:
    Config() = default;

    static Config from_file(const std::filesystem::path& path) {
        std::ifstream is(path);
        if (!is) throw std::runtime_error("cannot open config: " + path.string());
        Config cfg;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(is, line)) {
            ++line_no;
            const std::string trimmed = trim(line);
            if (trimmed.empty() || trimmed[0] == '#') continue;
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("config line " + std::to_string(line_no) + ": expected key = value");
            cfg.values_[trim(trimmed.substr(0, eq))] = trim(trimmed.substr(eq + 1));
        }
        return cfg;
    }

    void set_override(const std::string& key_equals_value) {
        const auto eq = key_equals_value.find('=');
        if (eq == std::string::npos) throw std::runtime_error("--set expects key=value");
        values_[trim(key_equals_value.substr(0, eq))] = trim(key_equals_value.substr(eq + 1));
    }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        const auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    std::string require_string(const std::string& key) const {
        const auto it = values_.find(key);
        if (it == values_.end()) throw std::runtime_error("config: missing required key '" + key + "'");
        return it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        const auto it = values_.find(key);
        return it == values_.end() ? fallback : parse_double(key, it->second);
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
        const auto it = values_.find(key);
        return it == values_.end() ? fallback : parse_u64(key, it->second);
    }

    std::size_t get_size(const std::string& key, std::size_t fallback) const {
        return static_cast<std::size_t>(get_u64(key, fallback));
    }

    std::vector<std::size_t> get_size_list(const std::string& key,
                                           const std::vector<std::size_t>& fallback) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::vector<std::size_t> out;
        std::stringstream ss(it->second);
        std::string token;
        while (std::getline(ss, token, ','))
            if (!trim(token).empty()) out.push_back(static_cast<std::size_t>(parse_u64(key, trim(token))));
        if (out.empty()) throw std::runtime_error("config: empty list for key '" + key + "'");
        return out;
    }

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return "";
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    static double parse_double(const std::string& key, const std::string& v) {
        try {
            std::size_t used = 0;
            const double x = std::stod(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
            return x;
        } catch (const std::exception&) {
            throw std::runtime_error("config: key '" + key + "' is not a number: " + v);
        }
    }

    static std::uint64_t parse_u64(const std::string& key, const std::string& v) {
        try {
            std::size_t used = 0;
            const unsigned long long x = std::stoull(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
            return x;
        } catch (const std::exception&) {
            throw std::runtime_error("config: key '" + key + "' is not a count: " + v);
        }
    }

    std::map<std::string, std::string> values_;
};

} // namespace podrom
