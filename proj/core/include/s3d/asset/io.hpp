#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "s3d/asset/model.hpp"

namespace s3d::asset {

enum class FormatHint { Auto, Ply, Obj };

enum class PlyEncoding { Ascii, BinaryLittleEndian };

/// Scalar type used for positions and normals when writing PLY. `Auto` picks
/// float when every value survives a float round trip and double otherwise,
/// so that writing never loses information.
enum class PlyScalar { Auto, Float32, Float64 };

/// Detects the format from the leading bytes: a "ply" magic line, or an OBJ
/// statement on the first meaningful line. Throws UnsupportedFormat otherwise.
[[nodiscard]] FormatHint detect_format(std::span<const std::byte> bytes);

/// Single-pass parse of a PLY or OBJ buffer into a validated Model3D.
[[nodiscard]] Model3D parse_model(std::span<const std::byte> bytes, FormatHint hint = FormatHint::Auto);

[[nodiscard]] Model3D parse_ply(std::span<const std::byte> bytes);
[[nodiscard]] Model3D parse_obj(std::span<const std::byte> bytes);

[[nodiscard]] std::vector<std::byte> write_ply(const Model3D& model,
                                               PlyEncoding encoding = PlyEncoding::BinaryLittleEndian,
                                               PlyScalar scalar = PlyScalar::Auto);

[[nodiscard]] std::vector<std::byte> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::byte> bytes);

/// Loads a model from disk, choosing the parser from the file content.
[[nodiscard]] Model3D load_model(const std::filesystem::path& path);

}  // namespace s3d::asset
