#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

namespace s3d {

/// Lowercase hex SHA-256 of the given bytes.
[[nodiscard]] std::string sha256_hex(std::span<const std::byte> bytes);
[[nodiscard]] std::string sha256_hex(std::string_view text);

}  // namespace s3d
