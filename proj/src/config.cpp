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

#include "regdescent/config.hpp"

#include "regdescent/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace regdescent
{

namespace
{

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    {
        s.remove_suffix(1);
    }
    return s;
}

bool valid_key(std::string_view key)
{
    if (key.empty() || key.front() == '.' || key.back() == '.')
    {
        return false;
    }
    return std::all_of(key.begin(), key.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
    });
}

std::string location(std::string_view origin, std::size_t line)
{
    return std::string(origin) + ":" + std::to_string(line) + ": ";
}

}  // namespace

Config Config::parse(std::string_view text, std::string_view origin)
{
    Config config;
    std::string section;
    std::size_t line_no = 0;
    while (!text.empty())
    {
        const std::size_t eol = text.find('\n');
        std::string_view line = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        ++line_no;

        if (const std::size_t hash = line.find('#'); hash != std::string_view::npos)
        {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty())
        {
            continue;
        }
        if (line.front() == '[')
        {
            if (line.back() != ']')
            {
                throw ConfigError(location(origin, line_no) + "unterminated section header");
            }
            const std::string_view name = trim(line.substr(1, line.size() - 2));
            if (!name.empty() && !valid_key(name))
            {
                throw ConfigError(location(origin, line_no) + "bad section name '" + std::string(name) + "'");
            }
            section = std::string(name);
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos)
        {
            throw ConfigError(location(origin, line_no) + "expected 'key = value'");
        }
        const std::string_view key = trim(line.substr(0, eq));
        if (!valid_key(key))
        {
            throw ConfigError(location(origin, line_no) + "bad key '" + std::string(key) + "'");
        }
        std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
        if (config.entries_.count(full) != 0)
        {
            throw ConfigError(location(origin, line_no) + "duplicate key '" + full + "'");
        }
        config.entries_.emplace(std::move(full), std::string(trim(line.substr(eq + 1))));
    }
    return config;
}

Config Config::load(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw ConfigError("cannot open config file '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str(), path.string());
}

std::string Config::serialize() const
{
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections;
    for (const auto& [key, value] : entries_)
    {
        const std::size_t dot = key.rfind('.');
        if (dot == std::string::npos)
        {
            sections[""].emplace_back(key, value);
        }
        else
        {
            sections[key.substr(0, dot)].emplace_back(key.substr(dot + 1), value);
        }
    }
    std::ostringstream out;
    bool first = true;
    for (const auto& [name, items] : sections)
    {
        if (!name.empty())
        {
            out << (first ? "" : "\n") << '[' << name << "]\n";
        }
        for (const auto& [key, value] : items)
        {
            out << key << " = " << value << '\n';
        }
        first = false;
    }
    return out.str();
}

bool Config::has(std::string_view key) const
{
    return entries_.find(key) != entries_.end();
}

std::optional<std::string> Config::get(std::string_view key) const
{
    auto it = entries_.find(key);
    if (it == entries_.end())
    {
        return std::nullopt;
    }
    return it->second;
}

std::string Config::require(std::string_view key) const
{
    auto value = get(key);
    if (!value)
    {
        throw ConfigError("missing required key '" + std::string(key) + "'");
    }
    return *value;
}

std::string Config::get_string(std::string_view key, std::string_view fallback) const
{
    auto value = get(key);
    return value ? *value : std::string(fallback);
}

double Config::get_double(std::string_view key, double fallback) const
{
    auto value = get(key);
    return value ? parse_double(*value, key) : fallback;
}

std::int64_t Config::get_int(std::string_view key, std::int64_t fallback) const
{
    auto value = get(key);
    return value ? parse_int(*value, key) : fallback;
}

std::uint64_t Config::get_u64(std::string_view key, std::uint64_t fallback) const
{
    auto value = get(key);
    return value ? parse_u64(*value, key) : fallback;
}

bool Config::get_bool(std::string_view key, bool fallback) const
{
    auto value = get(key);
    return value ? parse_bool(*value, key) : fallback;
}

void Config::set(std::string_view key, std::string value)
{
    if (!valid_key(key))
    {
        throw ConfigError("bad key '" + std::string(key) + "'");
    }
    entries_.insert_or_assign(std::string(key), std::move(value));
}

void Config::erase(std::string_view key)
{
    auto it = entries_.find(key);
    if (it != entries_.end())
    {
        entries_.erase(it);
    }
}

double parse_double(std::string_view text, std::string_view what)
{
    text = trim(text);
    if (!text.empty() && text.front() == '+')
    {
        text.remove_prefix(1);
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    {
        throw ConfigError("'" + std::string(what) + "': expected a number, got '" + std::string(text) + "'");
    }
    return value;
}

std::int64_t parse_int(std::string_view text, std::string_view what)
{
    text = trim(text);
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    {
        // Allow integral values in exponent notation, e.g. 1e5.
        const double d = parse_double(text, what);
        if (d != static_cast<double>(static_cast<std::int64_t>(d)))
        {
            throw ConfigError("'" + std::string(what) + "': expected an integer, got '" + std::string(text) + "'");
        }
        return static_cast<std::int64_t>(d);
    }
    return value;
}

std::uint64_t parse_u64(std::string_view text, std::string_view what)
{
    text = trim(text);
    int base = 10;
    if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X'))
    {
        text.remove_prefix(2);
        base = 16;
    }
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value, base);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    {
        throw ConfigError("'" + std::string(what) + "': expected an unsigned integer, got '" + std::string(text) +
                          "'");
    }
    return value;
}

bool parse_bool(std::string_view text, std::string_view what)
{
    text = trim(text);
    if (text == "true" || text == "yes" || text == "on" || text == "1")
    {
        return true;
    }
    if (text == "false" || text == "no" || text == "off" || text == "0")
    {
        return false;
    }
    throw ConfigError("'" + std::string(what) + "': expected true/false, got '" + std::string(text) + "'");
}

std::string format_double(double value)
{
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
    return std::string(buffer, ptr);
}

namespace
{

std::vector<double> parse_call(std::string_view body, std::string_view name)
{
    std::vector<double> args;
    std::size_t start = 0;
    while (start <= body.size())
    {
        const std::size_t comma = body.find(',', start);
        const std::string_view piece = body.substr(start, comma == std::string_view::npos ? body.npos : comma - start);
        args.push_back(parse_double(piece, name));
        if (comma == std::string_view::npos)
        {
            break;
        }
        start = comma + 1;
    }
    if (args.size() != 3 || args[2] < 1 || args[2] != static_cast<double>(static_cast<std::size_t>(args[2])))
    {
        throw ConfigError(std::string(name) + "(a, b, n) needs three arguments with integral n >= 1");
    }
    return args;
}

}  // namespace

std::vector<double> parse_grid(std::string_view text)
{
    text = trim(text);
    auto call = [&](std::string_view name) -> std::optional<std::string_view> {
        if (text.size() > name.size() + 1 && text.substr(0, name.size()) == name && text[name.size()] == '(' &&
            text.back() == ')')
        {
            return text.substr(name.size() + 1, text.size() - name.size() - 2);
        }
        return std::nullopt;
    };
    std::vector<double> grid;
    if (auto body = call("linspace"))
    {
        const auto args = parse_call(*body, "linspace");
        const auto n = static_cast<std::size_t>(args[2]);
        for (std::size_t i = 0; i < n; ++i)
        {
            grid.push_back(n == 1 ? args[0] : args[0] + (args[1] - args[0]) * static_cast<double>(i) / (n - 1.0));
        }
    }
    else if (auto open = call("open"))
    {
        const auto args = parse_call(*open, "open");
        try
        {
            grid = open_grid(args[0], args[1], static_cast<std::size_t>(args[2]));
        }
        catch (const std::invalid_argument& e)
        {
            throw ConfigError(e.what());
        }
    }
    else
    {
        std::size_t start = 0;
        while (start <= text.size())
        {
            const std::size_t comma = text.find(',', start);
            grid.push_back(parse_double(text.substr(start, comma == text.npos ? text.npos : comma - start), "grid"));
            if (comma == std::string_view::npos)
            {
                break;
            }
            start = comma + 1;
        }
    }
    for (std::size_t i = 1; i < grid.size(); ++i)
    {
        if (!(grid[i] > grid[i - 1]))
        {
            throw ConfigError("grid values must be strictly ascending");
        }
    }
    return grid;
}

}  // namespace regdescent
