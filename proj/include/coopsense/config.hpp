#pragma once

// Flat key = value run configuration. One config drives one command
// invocation; dB-valued keys carry an explicit _db suffix. Unknown keys are
// rejected so a typo cannot silently fall back to a default.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace coopsense {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Config {
  public:
    static Config parse_text(const std::string& text) {
        Config cfg;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::string stripped = trim(line);
            if (stripped.empty() || stripped[0] == '#') continue;
            const auto eq = stripped.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": expected 'key = value', got '" + stripped + "'");
            const std::string key = trim(stripped.substr(0, eq));
            const std::string value = trim(stripped.substr(eq + 1));
            if (key.empty())
                throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
            if (cfg.index_.count(key))
                throw ConfigError("config: duplicate key '" + key + "'");
            cfg.index_[key] = cfg.entries_.size();
            cfg.entries_.emplace_back(key, value);
        }
        return cfg;
    }

    static Config parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("config: cannot open '" + path + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse_text(buf.str());
    }

    bool has(const std::string& key) const { return index_.count(key) != 0; }

    void set(const std::string& key, const std::string& value) {
        auto it = index_.find(key);
        if (it == index_.end()) {
            index_[key] = entries_.size();
            entries_.emplace_back(key, value);
        } else {
            entries_[it->second].second = value;
        }
    }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        auto it = index_.find(key);
        return it == index_.end() ? fallback : entries_[it->second].second;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = index_.find(key);
        if (it == index_.end()) return fallback;
        return parse_double(key, entries_[it->second].second);
    }

    long long get_int(const std::string& key, long long fallback) const {
        auto it = index_.find(key);
        if (it == index_.end()) return fallback;
        return parse_int(key, entries_[it->second].second);
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
        auto it = index_.find(key);
        if (it == index_.end()) return fallback;
        const std::string& raw = entries_[it->second].second;
        char* end = nullptr;
        errno = 0;
        const unsigned long long v = std::strtoull(raw.c_str(), &end, 10);
        // strtoull silently wraps negative input, so reject it explicitly
        if (errno != 0 || end == raw.c_str() || *end != '\0' ||
            raw.find('-') != std::string::npos)
            throw ConfigError("config key '" + key + "': expected unsigned integer, got '" +
                              raw + "'");
        return v;
    }

    std::vector<double> get_double_list(const std::string& key,
                                        const std::vector<double>& fallback) const {
        auto it = index_.find(key);
        if (it == index_.end()) return fallback;
        std::vector<double> out;
        for (const std::string& piece : split_commas(entries_[it->second].second))
            out.push_back(parse_double(key, piece));
        if (out.empty())
            throw ConfigError("config key '" + key + "': expected a comma-separated list");
        return out;
    }

    std::vector<int> get_int_list(const std::string& key,
                                  const std::vector<int>& fallback) const {
        auto it = index_.find(key);
        if (it == index_.end()) return fallback;
        std::vector<int> out;
        for (const std::string& piece : split_commas(entries_[it->second].second)) {
            long long v = parse_int(key, piece);
            out.push_back(static_cast<int>(v));
        }
        if (out.empty())
            throw ConfigError("config key '" + key + "': expected a comma-separated list");
        return out;
    }

    // Reject anything outside the allowed vocabulary, naming the field.
    void require_known(const std::vector<std::string>& allowed) const {
        for (const auto& [key, value] : entries_) {
            if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
                throw ConfigError("config: unknown key '" + key + "'");
        }
    }

    std::string serialize() const {
        std::ostringstream out;
        for (const auto& [key, value] : entries_) out << key << " = " << value << "\n";
        return out.str();
    }

    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  private:
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return "";
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    static std::vector<std::string> split_commas(const std::string& s) {
        std::vector<std::string> out;
        std::string cur;
        std::istringstream in(s);
        while (std::getline(in, cur, ',')) {
            const std::string piece = trim(cur);
            if (!piece.empty()) out.push_back(piece);
        }
        return out;
    }

    static double parse_double(const std::string& key, const std::string& raw) {
        char* end = nullptr;
        errno = 0;
        const double v = std::strtod(raw.c_str(), &end);
        if (errno != 0 || end == raw.c_str() || *end != '\0')
            throw ConfigError("config key '" + key + "': expected number, got '" + raw + "'");
        return v;
    }

    static long long parse_int(const std::string& key, const std::string& raw) {
        char* end = nullptr;
        errno = 0;
        const long long v = std::strtoll(raw.c_str(), &end, 10);
        if (errno != 0 || end == raw.c_str() || *end != '\0')
            throw ConfigError("config key '" + key + "': expected integer, got '" + raw + "'");
        return v;
    }

    std::vector<std::pair<std::string, std::string>> entries_;
    std::map<std::string, std::size_t> index_;
};

}  // namespace coopsense
