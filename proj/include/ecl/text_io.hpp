#pragma once

// Small helpers shared by the line-oriented text formats.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ecl {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);
void append_double(std::string& out, double v);

std::string read_text_file(const std::filesystem::path& path);
/// Writes atomically enough for our purposes: to path.tmp, then renames.
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Splits text into whitespace-separated records, one per line, and reports
/// failures as ParseError carrying the current line number.
class LineReader {
public:
    explicit LineReader(std::string_view text) : text_(text) {}

    /// Tokens of the next non-blank line; empty at end of input.
    std::vector<std::string_view> next_record();
    /// Next record must start with key; returns the remaining tokens.
    std::vector<std::string_view> expect_key(std::string_view key);

    int parse_int(std::string_view tok);
    std::int64_t parse_int64(std::string_view tok);
    double parse_double(std::string_view tok);

    [[noreturn]] void fail(const std::string& what) const;
    std::size_t line() const noexcept { return line_; }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 0;
};

}  // namespace ecl
