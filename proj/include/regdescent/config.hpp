/*
 * Copyright 2026 The reg-descent Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace regdescent
{

class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/**
 * Flat key/value text:
 *
 *   # comment
 *   key = value
 *   [section]
 *   key = value        (stored as section.key)
 *
 * Keys are [A-Za-z0-9_.]+. Values run to the end of the line; a trailing
 * "# ..." is a comment. Repeated keys are an error.
 */
class Config
{
public:
    static Config parse(std::string_view text, std::string_view origin = "<string>");
    static Config load(const std::filesystem::path& path);

    /// Canonical text: top-level keys first, then one block per section, keys sorted.
    std::string serialize() const;

    bool has(std::string_view key) const;
    std::optional<std::string> get(std::string_view key) const;
    std::string require(std::string_view key) const;
    std::string get_string(std::string_view key, std::string_view fallback) const;
    double get_double(std::string_view key, double fallback) const;
    std::int64_t get_int(std::string_view key, std::int64_t fallback) const;
    std::uint64_t get_u64(std::string_view key, std::uint64_t fallback) const;
    bool get_bool(std::string_view key, bool fallback) const;

    void set(std::string_view key, std::string value);
    void erase(std::string_view key);
    const std::map<std::string, std::string, std::less<>>& entries() const { return entries_; }

    friend bool operator==(const Config&, const Config&) = default;

private:
    std::map<std::string, std::string, std::less<>> entries_;
};

double parse_double(std::string_view text, std::string_view what);
std::int64_t parse_int(std::string_view text, std::string_view what);
std::uint64_t parse_u64(std::string_view text, std::string_view what);
bool parse_bool(std::string_view text, std::string_view what);
/// Shortest text that parses back to the same double.
std::string format_double(double value);

/**
 * Grid syntax: a comma list ("0.1, 0.2"), "linspace(a, b, n)" with both ends,
 * or "open(a, b, n)" with n interior points of (a, b).
 */
std::vector<double> parse_grid(std::string_view text);

}  // namespace regdescent
