#pragma once

// CSV (RFC 4180) and metadata sidecars.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace ringcf {

#ifndef RINGCF_VERSION
#define RINGCF_VERSION "0.0.0"
#endif

inline constexpr std::string_view kVersion = RINGCF_VERSION;

// Shortest text that parses back to the same double.
inline std::string format_double(double x) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(uint64_t x) {
    char buf[17];
    for (int i = 15; i >= 0; --i) {
        buf[i] = "0123456789abcdef"[x & 15];
        x >>= 4;
    }
    buf[16] = 0;
    return buf;
}

inline std::string digest(std::string_view s) { return "fnv1a64:" + hex64(fnv1a64(s)); }

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : cols_(header.size()) { row(header); }

    CsvTable& row(const std::vector<std::string>& fields) {
        if (fields.size() != cols_) throw std::logic_error("csv row has wrong number of fields");
        for (size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ += ',';
            out_ += quote(fields[i]);
        }
        out_ += "\r\n";
        return *this;
    }

    const std::string& str() const { return out_; }

    static std::string quote(const std::string& f) {
        if (f.find_first_of(",\"\r\n") == std::string::npos) return f;
        std::string q = "\"";
        for (char c : f) {
            if (c == '"') q += '"';
            q += c;
        }
        return q + '"';
    }

private:
    size_t cols_;
    std::string out_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    f << content;
    if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

inline std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// Sidecar for an output file: config echo and digests.
inline nlohmann::ordered_json sidecar(std::string_view command, const nlohmann::ordered_json& config,
                                      const std::string& output_name, const std::string& output_content) {
    nlohmann::ordered_json j;
    j["tool"] = "ringcf";
    j["version"] = std::string(kVersion);
    j["command"] = std::string(command);
    j["config"] = config;
    j["config_digest"] = digest(config.dump());
    j["output"] = output_name;
    j["output_digest"] = digest(output_content);
    return j;
}

} // namespace ringcf
