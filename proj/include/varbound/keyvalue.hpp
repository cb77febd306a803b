#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace varbound {

/// Raised for malformed input files; carries the offending line.
class InputError : public std::runtime_error {
public:
    InputError(const std::string& what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

struct KeyValueEntry {
    std::string key;
    std::string value;
    int line = 0;
};

/// One "[name]" block of a key/value file. The unnamed leading block has an
/// empty name. Repeated section names are kept as separate sections, in order.
struct KeyValueSection {
    std::string name;
    int line = 0;
    std::vector<KeyValueEntry> entries;

    std::optional<std::string> get(std::string_view key) const;
    std::vector<std::string> get_all(std::string_view key) const;
    const KeyValueEntry* find(std::string_view key) const;

    /// Throws InputError naming the first key not in `allowed`.
    void reject_unknown(std::initializer_list<std::string_view> allowed) const;
};

/// Line-oriented "key = value" text with "[section]" headers and "#" comments.
struct KeyValueDocument {
    std::filesystem::path source;
    std::vector<KeyValueSection> sections;

    static KeyValueDocument parse(std::string_view text, std::filesystem::path source = {});
    static KeyValueDocument load(const std::filesystem::path& path);

    const KeyValueSection& root() const { return sections.front(); }
    const KeyValueSection* section(std::string_view name) const;
    std::vector<const KeyValueSection*> sections_named(std::string_view name) const;
};

std::vector<std::string> split_whitespace(std::string_view s);
std::vector<std::string> split_on(std::string_view s, char sep);
std::string trim_copy(std::string_view s);
double parse_double(std::string_view s, int line = 0);
int parse_int(std::string_view s, int line = 0);
bool parse_bool(std::string_view s, int line = 0);

}  // namespace varbound
