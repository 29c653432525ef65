#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pseudoscope/experiments.hpp"

namespace pseudoscope {

// Flat key-value configuration with exactly one bracketed section:
//
//   # comment
//   [experiment]
//   structure = toeplitz(3,2,1)
//   d = 100
//
// Blank lines and lines starting with '#' or ';' are ignored. Every error is
// a ConfigError whose message starts with "<source>:<line>: ".
class ConfigFile {
public:
    struct Entry {
        std::string value;
        std::size_t line = 0;
    };

    static ConfigFile parse(std::string_view text, std::string source = "<config>");
    static ConfigFile load(const std::filesystem::path& path);

    const std::string& source() const noexcept { return source_; }
    const std::string& section() const noexcept { return section_; }
    std::size_t section_line() const noexcept { return section_line_; }
    const std::map<std::string, Entry>& entries() const noexcept { return entries_; }

    // Throws unless the section is named `expected`.
    void require_section(std::string_view expected) const;
    // Throws for the first key (by line) that is not in `allowed`.
    void require_known(std::initializer_list<std::string_view> allowed) const;

    bool has(std::string_view key) const { return entries_.find(std::string(key)) != entries_.end(); }
    const Entry* find(std::string_view key) const;
    // Throws when the key is absent.
    const Entry& require(std::string_view key) const;

    std::string get_string(std::string_view key, std::string fallback) const;
    double get_double(std::string_view key, double fallback) const;
    std::size_t get_size(std::string_view key, std::size_t fallback) const;
    std::uint64_t get_u64(std::string_view key, std::uint64_t fallback) const;
    // Comma-separated lists; an empty value gives an empty list.
    std::vector<double> get_doubles(std::string_view key, std::vector<double> fallback) const;
    std::vector<std::size_t> get_sizes(std::string_view key, std::vector<std::size_t> fallback) const;
    std::vector<Complex> get_complexes(std::string_view key, std::vector<Complex> fallback) const;
    Structure get_structure(std::string_view key) const;

    // "<source>:<line>: <message>" as a ConfigError.
    [[noreturn]] void fail(std::size_t line, const std::string& message) const;

private:
    template <typename T, typename Parse>
    T get_parsed(std::string_view key, T fallback, Parse parse) const;

    std::string source_;
    std::string section_;
    std::size_t section_line_ = 0;
    std::map<std::string, Entry> entries_;
};

}  // namespace pseudoscope
