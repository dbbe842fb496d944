#include "ecl/text_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ecl/error.hpp"

namespace ecl {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void append_double(std::string& out, double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out) throw Error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::vector<std::string_view> LineReader::next_record() {
    std::vector<std::string_view> toks;
    while (pos_ < text_.size() && toks.empty()) {
        const auto end = text_.find('\n', pos_);
        const auto stop = end == std::string_view::npos ? text_.size() : end;
        std::string_view ln = text_.substr(pos_, stop - pos_);
        pos_ = stop == text_.size() ? stop : stop + 1;
        ++line_;
        std::size_t i = 0;
        while (i < ln.size()) {
            while (i < ln.size() && (ln[i] == ' ' || ln[i] == '\t' || ln[i] == '\r')) ++i;
            const auto start = i;
            while (i < ln.size() && ln[i] != ' ' && ln[i] != '\t' && ln[i] != '\r') ++i;
            if (i > start) toks.push_back(ln.substr(start, i - start));
        }
    }
    return toks;
}

std::vector<std::string_view> LineReader::expect_key(std::string_view key) {
    auto toks = next_record();
    if (toks.empty()) fail("unexpected end of file, expected '" + std::string(key) + "'");
    if (toks[0] != key) {
        fail("expected '" + std::string(key) + "', found '" + std::string(toks[0]) + "'");
    }
    toks.erase(toks.begin());
    return toks;
}

std::int64_t LineReader::parse_int64(std::string_view tok) {
    std::int64_t v = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
        fail("invalid integer '" + std::string(tok) + "'");
    }
    return v;
}

int LineReader::parse_int(std::string_view tok) {
    const auto v = parse_int64(tok);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
        fail("integer out of range '" + std::string(tok) + "'");
    }
    return static_cast<int>(v);
}

double LineReader::parse_double(std::string_view tok) {
    double v = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
        fail("invalid number '" + std::string(tok) + "'");
    }
    return v;
}

void LineReader::fail(const std::string& what) const { throw ParseError(what, line_); }

}  // namespace ecl
