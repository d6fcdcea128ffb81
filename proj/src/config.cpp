#include "cevsim/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cevsim/report_io.hpp"

namespace cevsim {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

} // namespace

KeyValueConfig KeyValueConfig::parse_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw ConfigError("", "cannot open config file " + file.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_string(text.str());
}

KeyValueConfig KeyValueConfig::parse_string(std::string_view text) {
    KeyValueConfig cfg;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        const std::size_t hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;

        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            std::ostringstream msg;
            msg << "config line " << line_no << ": expected `key = value`, got `"
                << stripped << "`";
            throw ConfigError("", msg.str());
        }
        const std::string key = trim(std::string_view(stripped).substr(0, eq));
        const std::string value = trim(std::string_view(stripped).substr(eq + 1));
        if (key.empty()) {
            std::ostringstream msg;
            msg << "config line " << line_no << ": empty key";
            throw ConfigError("", msg.str());
        }
        cfg.entries_[key] = value;
    }
    return cfg;
}

bool KeyValueConfig::has(const std::string& key) const {
    return entries_.count(key) != 0;
}

std::string KeyValueConfig::get_string(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
        throw ConfigError(key, "missing required config key `" + key + "`");
    }
    return it->second;
}

double KeyValueConfig::get_double(const std::string& key) const {
    const std::string raw = get_string(key);
    char* end = nullptr;
    const double value = std::strtod(raw.c_str(), &end);
    if (end == raw.c_str() || *end != '\0') {
        throw ConfigError(key, "config key `" + key + "`: `" + raw + "` is not a number");
    }
    return value;
}

std::uint64_t KeyValueConfig::get_uint(const std::string& key) const {
    const std::string raw = get_string(key);
    char* end = nullptr;
    const unsigned long long value = std::strtoull(raw.c_str(), &end, 10);
    if (end == raw.c_str() || *end != '\0') {
        throw ConfigError(key,
                          "config key `" + key + "`: `" + raw + "` is not an integer");
    }
    return value;
}

std::string KeyValueConfig::get_string_or(const std::string& key,
                                          std::string fallback) const {
    return has(key) ? get_string(key) : std::move(fallback);
}

double KeyValueConfig::get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

std::uint64_t KeyValueConfig::get_uint_or(const std::string& key,
                                          std::uint64_t fallback) const {
    return has(key) ? get_uint(key) : fallback;
}

void KeyValueConfig::set(const std::string& key, std::string value) {
    entries_[key] = std::move(value);
}

void KeyValueConfig::set_double(const std::string& key, double value) {
    entries_[key] = format_double(value);
}

void KeyValueConfig::set_uint(const std::string& key, std::uint64_t value) {
    entries_[key] = std::to_string(value);
}

void KeyValueConfig::write_file(const std::filesystem::path& file,
                                const std::vector<std::string>& comments) const {
    if (file.has_parent_path()) {
        std::filesystem::create_directories(file.parent_path());
    }
    std::ofstream out(file, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write config file " + file.string());
    }
    for (const std::string& comment : comments) {
        out << "# " << comment << '\n';
    }
    for (const auto& [key, value] : entries_) {
        out << key << " = " << value << '\n';
    }
}

} // namespace cevsim
