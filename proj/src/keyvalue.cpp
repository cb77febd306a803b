#include "varbound/keyvalue.hpp"

#include "varbound/surd.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace varbound {

std::string trim_copy(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_whitespace(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream is{std::string(s)};
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

std::vector<std::string> split_on(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.push_back(trim_copy(s.substr(start, i - start)));
            start = i + 1;
        }
    }
    return out;
}

double parse_double(std::string_view s, int line) {
    try {
        return Surd::parse(s).to_double();
    } catch (const std::exception& e) {
        throw InputError("expected a number, got '" + std::string(s) + "'", line);
    }
}

int parse_int(std::string_view s, int line) {
    std::string t = trim_copy(s);
    try {
        std::size_t used = 0;
        int v = std::stoi(t, &used);
        if (used != t.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw InputError("expected an integer, got '" + t + "'", line);
    }
}

bool parse_bool(std::string_view s, int line) {
    std::string t = trim_copy(s);
    if (t == "true" || t == "yes" || t == "1") return true;
    if (t == "false" || t == "no" || t == "0") return false;
    throw InputError("expected true/false, got '" + t + "'", line);
}

std::optional<std::string> KeyValueSection::get(std::string_view key) const {
    const KeyValueEntry* e = find(key);
    if (e == nullptr) return std::nullopt;
    return e->value;
}

const KeyValueEntry* KeyValueSection::find(std::string_view key) const {
    const KeyValueEntry* found = nullptr;
    for (const auto& e : entries) {
        if (e.key == key) {
            if (found != nullptr) throw InputError("duplicate key '" + e.key + "'", e.line);
            found = &e;
        }
    }
    return found;
}

std::vector<std::string> KeyValueSection::get_all(std::string_view key) const {
    std::vector<std::string> out;
    for (const auto& e : entries) {
        if (e.key == key) out.push_back(e.value);
    }
    return out;
}

void KeyValueSection::reject_unknown(std::initializer_list<std::string_view> allowed) const {
    for (const auto& e : entries) {
        if (std::find(allowed.begin(), allowed.end(), e.key) == allowed.end()) {
            std::string where = name.empty() ? "top level" : "section [" + name + "]";
            throw InputError("unknown key '" + e.key + "' in " + where, e.line);
        }
    }
}

KeyValueDocument KeyValueDocument::parse(std::string_view text, std::filesystem::path source) {
    KeyValueDocument doc;
    doc.source = std::move(source);
    doc.sections.push_back(KeyValueSection{});
    std::istringstream is{std::string(text)};
    std::string raw;
    int lineno = 0;
    while (std::getline(is, raw)) {
        ++lineno;
        std::string line = raw;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim_copy(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw InputError("unterminated section header", lineno);
            doc.sections.push_back(KeyValueSection{trim_copy(line.substr(1, line.size() - 2)), lineno, {}});
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) throw InputError("expected 'key = value'", lineno);
        std::string key = trim_copy(line.substr(0, eq));
        std::string value = trim_copy(line.substr(eq + 1));
        if (key.empty()) throw InputError("empty key", lineno);
        doc.sections.back().entries.push_back({key, value, lineno});
    }
    return doc;
}

KeyValueDocument KeyValueDocument::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
}

const KeyValueSection* KeyValueDocument::section(std::string_view name) const {
    const KeyValueSection* found = nullptr;
    for (const auto& s : sections) {
        if (s.name == name) {
            if (found != nullptr) throw InputError("duplicate section [" + s.name + "]", s.line);
            found = &s;
        }
    }
    return found;
}

std::vector<const KeyValueSection*> KeyValueDocument::sections_named(std::string_view name) const {
    std::vector<const KeyValueSection*> out;
    for (const auto& s : sections) {
        if (s.name == name) out.push_back(&s);
    }
    return out;
}

}  // namespace varbound
