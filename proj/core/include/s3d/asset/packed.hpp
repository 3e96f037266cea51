#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "s3d/asset/model.hpp"

namespace s3d::asset {

// PackedGeometry container layout (all integers little-endian):
//
//   offset 0   "P3DG"                 magic
//   offset 4   u8                     container version (kPackedVersion)
//   offset 5   u32                    header length H in bytes
//   offset 9   H bytes                header, canonical JSON
//   offset 9+H payload:
//                f32 x N x 3          positions
//                u8  x N x 3          colors   (flag bit 0)
//                f32 x N x 3          normals  (flag bit 1)
//                u32 x F x 3          faces    (flag bit 2)
//
// Header keys: "face_count", "flags", "kind" ("point_cloud"|"triangle_mesh"),
// "point_count". Blocks are tightly packed with no padding.

inline constexpr std::uint8_t kPackedVersion = 1;

enum PackedFlags : std::uint32_t {
    kPackedColors = 1u << 0,
    kPackedNormals = 1u << 1,
    kPackedFaces = 1u << 2,
};

struct PackedHeader {
    std::uint64_t point_count = 0;
    std::uint64_t face_count = 0;
    std::uint32_t flags = 0;
    ModelKind kind = ModelKind::PointCloud;

    [[nodiscard]] std::size_t payload_size() const noexcept;

    friend bool operator==(const PackedHeader&, const PackedHeader&) = default;
};

struct PackedGeometry {
    PackedHeader header;
    std::vector<std::byte> payload;

    friend bool operator==(const PackedGeometry&, const PackedGeometry&) = default;
};

[[nodiscard]] PackedGeometry pack_geometry(const Model3D& model);
[[nodiscard]] Model3D unpack_geometry(const PackedGeometry& packed);

/// Serializes to the on-wire container ("P3DG" magic, version, JSON header, payload).
[[nodiscard]] std::vector<std::byte> encode_container(const PackedGeometry& packed);
[[nodiscard]] PackedGeometry decode_container(std::span<const std::byte> bytes);

[[nodiscard]] std::string header_json(const PackedHeader& header);

}  // namespace s3d::asset
