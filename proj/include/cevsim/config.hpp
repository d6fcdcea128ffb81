#ifndef CEVSIM_CONFIG_HPP
#define CEVSIM_CONFIG_HPP

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cevsim {

struct ConfigError : std::runtime_error {
    ConfigError(std::string key_, const std::string& what)
        : std::runtime_error(what), key(std::move(key_)) {}
    std::string key;
};

// Flat `key = value` text config with dotted section prefixes. '#' starts a
// comment; blank lines are ignored. Keys are unique; values keep their raw
// text so an emitted manifest reparses to the identical configuration.
class KeyValueConfig {
public:
    static KeyValueConfig parse_file(const std::filesystem::path& file);
    static KeyValueConfig parse_string(std::string_view text);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    double get_double(const std::string& key) const;
    std::uint64_t get_uint(const std::string& key) const;

    std::string get_string_or(const std::string& key, std::string fallback) const;
    double get_double_or(const std::string& key, double fallback) const;
    std::uint64_t get_uint_or(const std::string& key, std::uint64_t fallback) const;

    void set(const std::string& key, std::string value);
    void set_double(const std::string& key, double value);
    void set_uint(const std::string& key, std::uint64_t value);

    const std::map<std::string, std::string>& entries() const { return entries_; }

    // Writes `# <comment>` lines followed by sorted `key = value` lines.
    void write_file(const std::filesystem::path& file,
                    const std::vector<std::string>& comments = {}) const;

private:
    std::map<std::string, std::string> entries_;
};

} // namespace cevsim

#endif // CEVSIM_CONFIG_HPP
