#include "s3d/asset/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "s3d/asset/error.hpp"

namespace s3d::asset {

namespace {

double length(const Vec3& v) { return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z); }

}  // namespace

std::string_view to_string(AssetErrc code) noexcept {
    switch (code) {
    case AssetErrc::UnsupportedFormat: return "UnsupportedFormat";
    case AssetErrc::MalformedFile: return "MalformedFile";
    case AssetErrc::DegenerateModel: return "DegenerateModel";
    case AssetErrc::InvalidModel: return "InvalidModel";
    }
    return "Unknown";
}

AssetError::AssetError(AssetErrc code, const std::string& message, SourceLocation where)
    : std::runtime_error(std::string(to_string(code)) + ": " + message +
                         (where.line != 0 ? " (line " + std::to_string(where.line) + ")"
                                          : " (byte " + std::to_string(where.byte_offset) + ")")),
      code_(code),
      where_(where) {}

Vec3 BoundingBox::center() const noexcept {
    return {(min.x + max.x) / 2.0, (min.y + max.y) / 2.0, (min.z + max.z) / 2.0};
}

Vec3 BoundingBox::extent() const noexcept { return {max.x - min.x, max.y - min.y, max.z - min.z}; }

double BoundingBox::longest_edge() const noexcept {
    const Vec3 e = extent();
    return std::max({e.x, e.y, e.z});
}

void validate_model(const Model3D& model) {
    auto fail = [](const std::string& what) { throw AssetError(AssetErrc::InvalidModel, what); };
    const std::size_t n = model.positions.size();
    if (n == 0) fail("model has no positions");
    if (model.colors && model.colors->size() != n) fail("color count differs from position count");
    if (model.normals) {
        if (model.normals->size() != n) fail("normal count differs from position count");
        for (const Vec3& normal : *model.normals) {
            if (std::abs(length(normal) - 1.0) > kNormalLengthTolerance) fail("normal is not unit length");
        }
    }
    for (const Face& face : model.faces) {
        for (std::uint32_t index : face) {
            if (index >= n) fail("face index " + std::to_string(index) + " out of range");
        }
    }
    const bool mesh = !model.faces.empty();
    if (mesh != (model.kind == ModelKind::TriangleMesh)) fail("model kind does not match face list");
    for (const Vec3& p : model.positions) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) fail("non-finite position");
    }
}

void renormalize_normals(Model3D& model) {
    if (!model.normals) return;
    for (Vec3& normal : *model.normals) {
        const double len = length(normal);
        if (std::abs(len - 1.0) <= kNormalLengthTolerance) continue;
        if (!(len > 0.0) || !std::isfinite(len)) {
            throw AssetError(AssetErrc::InvalidModel, "zero-length or non-finite normal");
        }
        normal = {normal.x / len, normal.y / len, normal.z / len};
    }
}

BoundingBox compute_bounds(const Model3D& model) {
    if (model.positions.empty()) throw AssetError(AssetErrc::InvalidModel, "model has no positions");
    BoundingBox box{model.positions.front(), model.positions.front()};
    for (const Vec3& p : model.positions) {
        box.min = {std::min(box.min.x, p.x), std::min(box.min.y, p.y), std::min(box.min.z, p.z)};
        box.max = {std::max(box.max.x, p.x), std::max(box.max.y, p.y), std::max(box.max.z, p.z)};
    }
    return box;
}

Model3D normalize_model(const Model3D& model) {
    const BoundingBox box = compute_bounds(model);
    const double longest = box.longest_edge();
    if (!(longest > 0.0)) {
        throw AssetError(AssetErrc::DegenerateModel, "all points coincide; bounding box has zero extent");
    }
    const Vec3 c = box.center();
    const double scale = 1.0 / longest;

    Model3D out = model;
    for (Vec3& p : out.positions) {
        p = {(p.x - c.x) * scale, (p.y - c.y) * scale, (p.z - c.z) * scale};
    }
    return out;
}

Model3D translate_model(const Model3D& model, const Vec3& offset) {
    Model3D out = model;
    for (Vec3& p : out.positions) p = {p.x + offset.x, p.y + offset.y, p.z + offset.z};
    return out;
}

}  // namespace s3d::asset
