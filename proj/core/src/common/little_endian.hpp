#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <string_view>
#include <type_traits>
#include <vector>

namespace s3d::detail {

template <typename T>
concept LittleEndianScalar = std::is_arithmetic_v<T> && (sizeof(T) == 1 || sizeof(T) == 2 || sizeof(T) == 4 || sizeof(T) == 8);

template <LittleEndianScalar T>
void put_le(std::vector<std::byte>& out, T value) {
    using U = std::conditional_t<sizeof(T) == 1, std::uint8_t,
              std::conditional_t<sizeof(T) == 2, std::uint16_t,
              std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>>;
    const U bits = std::bit_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.push_back(static_cast<std::byte>((bits >> (8 * i)) & 0xFFu));
    }
}

/// Reads a little-endian value at `data`; caller guarantees sizeof(T) bytes.
template <LittleEndianScalar T>
[[nodiscard]] T get_le(const std::byte* data) {
    using U = std::conditional_t<sizeof(T) == 1, std::uint8_t,
              std::conditional_t<sizeof(T) == 2, std::uint16_t,
              std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>>;
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        bits |= static_cast<U>(static_cast<U>(std::to_integer<std::uint8_t>(data[i])) << (8 * i));
    }
    return std::bit_cast<T>(bits);
}

inline void put_bytes(std::vector<std::byte>& out, std::string_view text) {
    for (char c : text) out.push_back(static_cast<std::byte>(c));
}

}  // namespace s3d::detail
