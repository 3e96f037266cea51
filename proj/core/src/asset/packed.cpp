#include "s3d/asset/packed.hpp"

#include <nlohmann/json.hpp>

#include "common/little_endian.hpp"
#include "s3d/asset/error.hpp"

namespace s3d::asset {

namespace {

constexpr std::string_view kMagic = "P3DG";
constexpr std::size_t kPreambleSize = 4 + 1 + 4;

std::string_view kind_name(ModelKind kind) {
    return kind == ModelKind::TriangleMesh ? "triangle_mesh" : "point_cloud";
}

[[noreturn]] void bad_container(const std::string& what, std::size_t offset = 0) {
    throw AssetError(AssetErrc::MalformedFile, "packed geometry: " + what, {0, offset});
}

}  // namespace

std::size_t PackedHeader::payload_size() const noexcept {
    std::size_t size = point_count * 12;
    if (flags & kPackedColors) size += point_count * 3;
    if (flags & kPackedNormals) size += point_count * 12;
    if (flags & kPackedFaces) size += face_count * 12;
    return size;
}

std::string header_json(const PackedHeader& header) {
    const nlohmann::json j = {
        {"face_count", header.face_count},
        {"flags", header.flags},
        {"kind", kind_name(header.kind)},
        {"point_count", header.point_count},
    };
    return j.dump();
}

PackedGeometry pack_geometry(const Model3D& model) {
    validate_model(model);
    PackedGeometry packed;
    PackedHeader& h = packed.header;
    h.point_count = model.positions.size();
    h.face_count = model.faces.size();
    h.kind = model.kind;
    if (model.colors) h.flags |= kPackedColors;
    if (model.normals) h.flags |= kPackedNormals;
    if (!model.faces.empty()) h.flags |= kPackedFaces;

    std::vector<std::byte>& out = packed.payload;
    out.reserve(h.payload_size());
    for (const Vec3& p : model.positions) {
        s3d::detail::put_le(out, static_cast<float>(p.x));
        s3d::detail::put_le(out, static_cast<float>(p.y));
        s3d::detail::put_le(out, static_cast<float>(p.z));
    }
    if (model.colors) {
        for (const Rgb& c : *model.colors) {
            s3d::detail::put_le(out, c.r);
            s3d::detail::put_le(out, c.g);
            s3d::detail::put_le(out, c.b);
        }
    }
    if (model.normals) {
        for (const Vec3& n : *model.normals) {
            s3d::detail::put_le(out, static_cast<float>(n.x));
            s3d::detail::put_le(out, static_cast<float>(n.y));
            s3d::detail::put_le(out, static_cast<float>(n.z));
        }
    }
    for (const Face& f : model.faces) {
        for (std::uint32_t index : f) s3d::detail::put_le(out, index);
    }
    return packed;
}

Model3D unpack_geometry(const PackedGeometry& packed) {
    const PackedHeader& h = packed.header;
    if (packed.payload.size() != h.payload_size()) {
        bad_container("payload is " + std::to_string(packed.payload.size()) + " bytes, header implies " +
                      std::to_string(h.payload_size()));
    }
    if (((h.flags & kPackedFaces) != 0) != (h.kind == ModelKind::TriangleMesh)) {
        bad_container("face flag disagrees with kind");
    }
    const std::byte* p = packed.payload.data();
    auto read_vec = [&p] {
        Vec3 v{s3d::detail::get_le<float>(p), s3d::detail::get_le<float>(p + 4), s3d::detail::get_le<float>(p + 8)};
        p += 12;
        return v;
    };

    Model3D model;
    model.kind = h.kind;
    model.positions.reserve(h.point_count);
    for (std::uint64_t i = 0; i < h.point_count; ++i) model.positions.push_back(read_vec());
    if (h.flags & kPackedColors) {
        model.colors.emplace();
        model.colors->reserve(h.point_count);
        for (std::uint64_t i = 0; i < h.point_count; ++i, p += 3) {
            model.colors->push_back({std::to_integer<std::uint8_t>(p[0]), std::to_integer<std::uint8_t>(p[1]),
                                     std::to_integer<std::uint8_t>(p[2])});
        }
    }
    if (h.flags & kPackedNormals) {
        model.normals.emplace();
        model.normals->reserve(h.point_count);
        for (std::uint64_t i = 0; i < h.point_count; ++i) model.normals->push_back(read_vec());
    }
    if (h.flags & kPackedFaces) {
        model.faces.reserve(h.face_count);
        for (std::uint64_t i = 0; i < h.face_count; ++i, p += 12) {
            model.faces.push_back({s3d::detail::get_le<std::uint32_t>(p), s3d::detail::get_le<std::uint32_t>(p + 4),
                                   s3d::detail::get_le<std::uint32_t>(p + 8)});
        }
    }
    try {
        validate_model(model);
    } catch (const AssetError& e) {
        bad_container(e.what());
    }
    return model;
}

std::vector<std::byte> encode_container(const PackedGeometry& packed) {
    const std::string header = header_json(packed.header);
    std::vector<std::byte> out;
    out.reserve(kPreambleSize + header.size() + packed.payload.size());
    s3d::detail::put_bytes(out, kMagic);
    s3d::detail::put_le(out, kPackedVersion);
    s3d::detail::put_le(out, static_cast<std::uint32_t>(header.size()));
    s3d::detail::put_bytes(out, header);
    out.insert(out.end(), packed.payload.begin(), packed.payload.end());
    return out;
}

PackedGeometry decode_container(std::span<const std::byte> bytes) {
    if (bytes.size() < kPreambleSize) bad_container("truncated preamble");
    for (std::size_t i = 0; i < kMagic.size(); ++i) {
        if (static_cast<char>(bytes[i]) != kMagic[i]) {
            throw AssetError(AssetErrc::UnsupportedFormat, "missing P3DG magic", {0, 0});
        }
    }
    const auto version = s3d::detail::get_le<std::uint8_t>(bytes.data() + 4);
    if (version != kPackedVersion) {
        throw AssetError(AssetErrc::UnsupportedFormat, "unsupported container version " + std::to_string(version), {0, 4});
    }
    const auto header_len = s3d::detail::get_le<std::uint32_t>(bytes.data() + 5);
    if (bytes.size() - kPreambleSize < header_len) bad_container("truncated header", kPreambleSize);

    const std::string_view header_text(reinterpret_cast<const char*>(bytes.data() + kPreambleSize), header_len);
    PackedGeometry packed;
    try {
        const auto j = nlohmann::json::parse(header_text);
        PackedHeader& h = packed.header;
        h.point_count = j.at("point_count").get<std::uint64_t>();
        h.face_count = j.at("face_count").get<std::uint64_t>();
        h.flags = j.at("flags").get<std::uint32_t>();
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "point_cloud") h.kind = ModelKind::PointCloud;
        else if (kind == "triangle_mesh") h.kind = ModelKind::TriangleMesh;
        else bad_container("unknown kind '" + kind + "'", kPreambleSize);
    } catch (const nlohmann::json::exception& e) {
        bad_container(std::string("bad header: ") + e.what(), kPreambleSize);
    }
    const std::size_t payload_offset = kPreambleSize + header_len;
    const std::size_t payload_len = bytes.size() - payload_offset;
    if (payload_len != packed.header.payload_size()) {
        bad_container("payload is " + std::to_string(payload_len) + " bytes, header implies " +
                          std::to_string(packed.header.payload_size()),
                      payload_offset);
    }
    packed.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(payload_offset), bytes.end());
    return packed;
}

}  // namespace s3d::asset
