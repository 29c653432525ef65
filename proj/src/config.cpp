#include "pseudoscope/config.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include "pseudoscope/errors.hpp"
#include "pseudoscope/text.hpp"

namespace pseudoscope {

namespace {

bool valid_key(std::string_view key) {
    return !key.empty() && std::all_of(key.begin(), key.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
    });
}

template <typename T, typename Parse>
std::vector<T> parse_list(std::string_view value, Parse parse) {
    std::vector<T> out;
    for (std::string_view piece : text::split(value, ',')) {
        out.push_back(parse(piece));
    }
    return out;
}

}  // namespace

ConfigFile ConfigFile::parse(std::string_view text, std::string source) {
    ConfigFile cfg;
    cfg.source_ = std::move(source);
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string_view line = text::trim(raw);
        if (line.empty() || line.front() == '#' || line.front() == ';') {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                cfg.fail(line_no, "unterminated section header");
            }
            const std::string_view name = text::trim(line.substr(1, line.size() - 2));
            if (!valid_key(name)) {
                cfg.fail(line_no, "invalid section name '" + std::string(name) + "'");
            }
            if (!cfg.section_.empty()) {
                cfg.fail(line_no, "second section [" + std::string(name) + "]; only one section is allowed");
            }
            cfg.section_ = std::string(name);
            cfg.section_line_ = line_no;
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            cfg.fail(line_no, "expected 'key = value'");
        }
        const std::string key(text::trim(line.substr(0, eq)));
        if (!valid_key(key)) {
            cfg.fail(line_no, "invalid key '" + key + "'");
        }
        if (cfg.section_.empty()) {
            cfg.fail(line_no, "key '" + key + "' appears before the section header");
        }
        if (cfg.entries_.count(key) != 0) {
            cfg.fail(line_no, "duplicate key '" + key + "' (first set on line " +
                                  std::to_string(cfg.entries_.at(key).line) + ")");
        }
        cfg.entries_[key] = Entry{std::string(text::trim(line.substr(eq + 1))), line_no};
    }
    if (cfg.section_.empty()) {
        cfg.fail(line_no, "no [section] header found");
    }
    return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError(path.string() + ":0: cannot open config file", 0);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str(), path.string());
}

void ConfigFile::require_section(std::string_view expected) const {
    if (section_ != expected) {
        fail(section_line_, "section [" + section_ + "] does not match the command; expected [" +
                                std::string(expected) + "]");
    }
}

void ConfigFile::require_known(std::initializer_list<std::string_view> allowed) const {
    const Entry* first = nullptr;
    std::string first_key;
    for (const auto& [key, entry] : entries_) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end() &&
            (first == nullptr || entry.line < first->line)) {
            first = &entry;
            first_key = key;
        }
    }
    if (first != nullptr) {
        std::string names;
        for (std::string_view a : allowed) {
            names += names.empty() ? "" : ", ";
            names += a;
        }
        fail(first->line, "unknown key '" + first_key + "' in [" + section_ + "] (allowed: " + names + ")");
    }
}

const ConfigFile::Entry* ConfigFile::find(std::string_view key) const {
    const auto it = entries_.find(std::string(key));
    return it == entries_.end() ? nullptr : &it->second;
}

const ConfigFile::Entry& ConfigFile::require(std::string_view key) const {
    const Entry* entry = find(key);
    if (entry == nullptr) {
        fail(section_line_, "missing required key '" + std::string(key) + "' in [" + section_ + "]");
    }
    return *entry;
}

void ConfigFile::fail(std::size_t line, const std::string& message) const {
    throw ConfigError(source_ + ":" + std::to_string(line) + ": " + message, line);
}

template <typename T, typename Parse>
T ConfigFile::get_parsed(std::string_view key, T fallback, Parse parse) const {
    const Entry* entry = find(key);
    if (entry == nullptr) {
        return fallback;
    }
    try {
        return parse(entry->value);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        fail(entry->line, "key '" + std::string(key) + "': " + e.what());
    }
}

std::string ConfigFile::get_string(std::string_view key, std::string fallback) const {
    return get_parsed<std::string>(key, std::move(fallback), [](const std::string& v) { return v; });
}

double ConfigFile::get_double(std::string_view key, double fallback) const {
    return get_parsed<double>(key, fallback, [](const std::string& v) { return text::parse_double(v); });
}

std::size_t ConfigFile::get_size(std::string_view key, std::size_t fallback) const {
    return get_parsed<std::size_t>(key, fallback, [](const std::string& v) {
        const auto n = text::parse_unsigned(v);
        if (n > std::numeric_limits<std::size_t>::max()) {
            throw InvalidArgument("value out of range");
        }
        return static_cast<std::size_t>(n);
    });
}

std::uint64_t ConfigFile::get_u64(std::string_view key, std::uint64_t fallback) const {
    return get_parsed<std::uint64_t>(key, fallback, [](const std::string& v) { return text::parse_unsigned(v); });
}

std::vector<double> ConfigFile::get_doubles(std::string_view key, std::vector<double> fallback) const {
    return get_parsed<std::vector<double>>(key, std::move(fallback), [](const std::string& v) {
        return parse_list<double>(v, [](std::string_view p) { return text::parse_double(p); });
    });
}

std::vector<std::size_t> ConfigFile::get_sizes(std::string_view key, std::vector<std::size_t> fallback) const {
    return get_parsed<std::vector<std::size_t>>(key, std::move(fallback), [](const std::string& v) {
        return parse_list<std::size_t>(v, [](std::string_view p) { return static_cast<std::size_t>(text::parse_unsigned(p)); });
    });
}

std::vector<Complex> ConfigFile::get_complexes(std::string_view key, std::vector<Complex> fallback) const {
    return get_parsed<std::vector<Complex>>(key, std::move(fallback), [](const std::string& v) {
        return parse_list<Complex>(v, [](std::string_view p) { return parse_complex(p); });
    });
}

Structure ConfigFile::get_structure(std::string_view key) const {
    const Entry& entry = require(key);
    try {
        return parse_structure(entry.value);
    } catch (const Error& e) {
        fail(entry.line, "key '" + std::string(key) + "': " + e.what());
    }
}

}  // namespace pseudoscope
