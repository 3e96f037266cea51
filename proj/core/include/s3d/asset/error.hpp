#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace s3d::asset {

enum class AssetErrc {
    UnsupportedFormat,
    MalformedFile,
    DegenerateModel,
    InvalidModel,
};

[[nodiscard]] std::string_view to_string(AssetErrc code) noexcept;

/// Position inside the source file. `line` is 1-based and 0 when the failure
/// is inside a binary section; `byte_offset` is always meaningful.
struct SourceLocation {
    std::size_t line = 0;
    std::size_t byte_offset = 0;
};

class AssetError : public std::runtime_error {
public:
    AssetError(AssetErrc code, const std::string& message, SourceLocation where = {});

    [[nodiscard]] AssetErrc code() const noexcept { return code_; }
    [[nodiscard]] const SourceLocation& where() const noexcept { return where_; }

private:
    AssetErrc code_;
    SourceLocation where_;
};

}  // namespace s3d::asset
