#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace fleetmeter::csv {

// Splits one line on commas. No quoting: identifiers are opaque tokens that
// may not contain commas.
std::vector<std::string_view> split_line(std::string_view line);

// Strict full-token numeric parsing; rejects empty tokens, trailing junk,
// inf and nan.
bool parse_double(std::string_view token, double& out);
bool parse_u64(std::string_view token, std::uint64_t& out);

// Shortest round-trip decimal form; reparses to the identical bit pattern.
std::string format_double(double value);

// Iterates lines of `text`, invoking fn(line_number, line) with CR/LF
// stripped. Line numbers are 1-based. Empty lines are skipped.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    std::size_t pos = 0;
    std::int64_t line_no = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line = (nl == std::string_view::npos)
                                    ? text.substr(pos)
                                    : text.substr(pos, nl - pos);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) fn(line_no, line);
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
}

} // namespace fleetmeter::csv
