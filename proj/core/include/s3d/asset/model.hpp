#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace s3d::asset {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend bool operator==(const Vec3&, const Vec3&) = default;
};

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

using Face = std::array<std::uint32_t, 3>;

enum class ModelKind { PointCloud, TriangleMesh };

/// Parsed geometry. Colors and normals are optional per-vertex attributes;
/// when present they are parallel to `positions`. `kind` is TriangleMesh iff
/// `faces` is non-empty.
struct Model3D {
    ModelKind kind = ModelKind::PointCloud;
    std::vector<Vec3> positions;
    std::optional<std::vector<Rgb>> colors;
    std::optional<std::vector<Vec3>> normals;
    std::vector<Face> faces;

    [[nodiscard]] std::size_t vertex_count() const noexcept { return positions.size(); }
    [[nodiscard]] bool has_colors() const noexcept { return colors.has_value(); }
    [[nodiscard]] bool has_normals() const noexcept { return normals.has_value(); }

    friend bool operator==(const Model3D&, const Model3D&) = default;
};

struct BoundingBox {
    Vec3 min;
    Vec3 max;

    [[nodiscard]] Vec3 center() const noexcept;
    [[nodiscard]] Vec3 extent() const noexcept;
    [[nodiscard]] double longest_edge() const noexcept;

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Maximum allowed deviation of a stored normal's length from 1.
inline constexpr double kNormalLengthTolerance = 1e-3;

/// Throws AssetError{InvalidModel} describing the first violated invariant.
void validate_model(const Model3D& model);

/// Rescales normals whose length is off by more than kNormalLengthTolerance.
/// Normals already within tolerance are left bit-identical. A zero-length
/// normal cannot be repaired and is reported as InvalidModel.
void renormalize_normals(Model3D& model);

[[nodiscard]] BoundingBox compute_bounds(const Model3D& model);

/// Centers the bounding box at the origin and scales uniformly so that the
/// longest bounding-box edge is exactly 1. Attributes and faces are copied
/// unchanged.
[[nodiscard]] Model3D normalize_model(const Model3D& model);

[[nodiscard]] Model3D translate_model(const Model3D& model, const Vec3& offset);

}  // namespace s3d::asset
