#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace laser::test {

inline std::vector<std::uint8_t> from_hex(const std::string& hex) {
    if (hex == "-") return {};  // fixture marker for empty input
    if (hex.size() % 2 != 0) throw std::invalid_argument("odd hex length");
    std::vector<std::uint8_t> out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<std::uint8_t>(std::stoul(hex.substr(2 * i, 2), nullptr, 16));
    }
    return out;
}

inline std::string to_hex(const std::uint8_t* data, std::size_t n) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        s.push_back(digits[data[i] >> 4]);
        s.push_back(digits[data[i] & 0x0F]);
    }
    return s;
}

template <typename Container>
std::string to_hex(const Container& c) {
    return to_hex(c.data(), c.size());
}

inline std::string data_path(const std::string& name) {
    return std::string(LASER_TEST_DATA_DIR) + "/" + name;
}

// Reads whitespace-separated columns, skipping comment lines.
inline std::vector<std::vector<std::string>> load_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open fixture: " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::vector<std::string> cols;
        std::string col;
        while (ls >> col) cols.push_back(col);
        if (!cols.empty()) rows.push_back(std::move(cols));
    }
    return rows;
}

struct CommandResult {
    int exit_code;
    std::string output;  // stdout and stderr interleaved
};

inline CommandResult run_command(const std::string& command) {
    FILE* pipe = popen((command + " 2>&1").c_str(), "r");
    if (!pipe) throw std::runtime_error("popen failed for: " + command);
    std::string output;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof(buf), pipe)) output.append(buf, n);
    const int status = pclose(pipe);
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return {code, output};
}

// Value of a "key: value" line in CLI report output.
inline std::string report_value(const std::string& output, const std::string& key) {
    const std::string needle = key + ": ";
    const auto pos = output.find(needle);
    if (pos == std::string::npos) {
        throw std::runtime_error("report key '" + key + "' not found in:\n" + output);
    }
    const auto end = output.find('\n', pos);
    return output.substr(pos + needle.size(), end - pos - needle.size());
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace laser::test
