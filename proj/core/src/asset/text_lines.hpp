#pragma once

#include <charconv>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <system_error>

#include "s3d/asset/error.hpp"

namespace s3d::asset::detail {

/// Forward-only line reader over a byte buffer. Handles LF and CRLF endings.
class LineReader {
public:
    explicit LineReader(std::span<const std::byte> bytes, std::size_t start = 0, std::size_t first_line = 1)
        : text_(reinterpret_cast<const char*>(bytes.data()), bytes.size()), pos_(start), line_(first_line - 1) {}

    struct Line {
        std::string_view text;
        std::size_t number = 0;
        std::size_t offset = 0;
    };

    std::optional<Line> next() {
        if (pos_ >= text_.size()) return std::nullopt;
        const std::size_t begin = pos_;
        std::size_t end = text_.find('\n', pos_);
        if (end == std::string_view::npos) {
            end = text_.size();
            pos_ = end;
        } else {
            pos_ = end + 1;
        }
        std::string_view line = text_.substr(begin, end - begin);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        ++line_;
        return Line{line, line_, begin};
    }

    [[nodiscard]] std::size_t position() const noexcept { return pos_; }
    [[nodiscard]] std::size_t line_number() const noexcept { return line_; }
    [[nodiscard]] bool at_end() const noexcept { return pos_ >= text_.size(); }

private:
    std::string_view text_;
    std::size_t pos_;
    std::size_t line_;
};

/// Whitespace tokenizer over a single line.
class Tokens {
public:
    explicit Tokens(std::string_view line) : rest_(line) {}

    std::optional<std::string_view> next() {
        const auto start = rest_.find_first_not_of(" \t");
        if (start == std::string_view::npos) {
            rest_ = {};
            return std::nullopt;
        }
        rest_.remove_prefix(start);
        const auto stop = rest_.find_first_of(" \t");
        std::string_view token = rest_.substr(0, stop);
        rest_.remove_prefix(stop == std::string_view::npos ? rest_.size() : stop);
        return token;
    }

    [[nodiscard]] bool empty() const { return rest_.find_first_not_of(" \t") == std::string_view::npos; }

private:
    std::string_view rest_;
};

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

template <typename T>
std::optional<T> parse_number(std::string_view token) {
    if (!token.empty() && token.front() == '+') token.remove_prefix(1);
    T value{};
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size()) return std::nullopt;
    return value;
}

}  // namespace s3d::asset::detail
