#include <optional>
#include <string>
#include <vector>

#include "s3d/asset/error.hpp"
#include "s3d/asset/io.hpp"
#include "text_lines.hpp"

namespace s3d::asset {

namespace {

using detail::LineReader;
using detail::parse_number;
using detail::Tokens;

struct Corner {
    std::int64_t vertex = 0;
    std::optional<std::int64_t> normal;
};

/// Resolves a 1-based (or negative, relative) OBJ index against `count` items.
std::optional<std::int64_t> resolve_index(std::int64_t raw, std::size_t count) {
    const auto n = static_cast<std::int64_t>(count);
    const std::int64_t zero_based = raw > 0 ? raw - 1 : n + raw;
    if (raw == 0 || zero_based < 0 || zero_based >= n) return std::nullopt;
    return zero_based;
}

}  // namespace

// Supported statements: v, vn, f. Texture coordinates, materials, groups and
// smoothing are skipped. Polygons are fan-triangulated. Per-corner normals are
// folded onto vertices (first reference wins); if any vertex ends up without a
// normal the normal attribute is dropped. Without faces, normals pair with
// vertices by order when the counts match.
Model3D parse_obj(std::span<const std::byte> bytes) {
    if (bytes.empty()) throw AssetError(AssetErrc::MalformedFile, "empty input");
    LineReader reader(bytes);
    Model3D model;
    std::vector<Vec3> file_normals;
    std::vector<std::optional<std::size_t>> vertex_normal;
    std::vector<Corner> corners;
    bool any_corner_normal = false;

    auto bad = [](const std::string& what, const LineReader::Line& line) {
        throw AssetError(AssetErrc::MalformedFile, what, {line.number, line.offset});
    };
    auto read_vec = [&](Tokens& tokens, const LineReader::Line& line) {
        double xyz[3];
        for (double& c : xyz) {
            auto token = tokens.next();
            std::optional<double> value;
            if (token) value = parse_number<double>(*token);
            if (!value) bad("expected 3 numeric components", line);
            c = *value;
        }
        return Vec3{xyz[0], xyz[1], xyz[2]};
    };

    while (auto line = reader.next()) {
        std::string_view text = line->text;
        if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
        Tokens tokens(text);
        auto keyword = tokens.next();
        if (!keyword) continue;
        if (*keyword == "v") {
            model.positions.push_back(read_vec(tokens, *line));
            vertex_normal.emplace_back();
        } else if (*keyword == "vn") {
            file_normals.push_back(read_vec(tokens, *line));
        } else if (*keyword == "f") {
            corners.clear();
            while (auto token = tokens.next()) {
                const std::string_view ref = *token;
                const auto slash1 = ref.find('/');
                auto v = parse_number<std::int64_t>(ref.substr(0, slash1));
                if (!v) bad("bad face vertex '" + std::string(ref) + "'", *line);
                auto vi = resolve_index(*v, model.positions.size());
                if (!vi) bad("face index " + std::to_string(*v) + " out of range", *line);
                Corner corner{*vi, std::nullopt};
                if (slash1 != std::string_view::npos) {
                    const auto slash2 = ref.find('/', slash1 + 1);
                    if (slash2 != std::string_view::npos && slash2 + 1 < ref.size()) {
                        auto n = parse_number<std::int64_t>(ref.substr(slash2 + 1));
                        if (!n) bad("bad face normal reference '" + std::string(ref) + "'", *line);
                        auto ni = resolve_index(*n, file_normals.size());
                        if (!ni) bad("normal index " + std::to_string(*n) + " out of range", *line);
                        corner.normal = *ni;
                        any_corner_normal = true;
                    }
                }
                corners.push_back(corner);
            }
            if (corners.size() < 3) bad("face with fewer than 3 vertices", *line);
            for (const Corner& c : corners) {
                auto& slot = vertex_normal[static_cast<std::size_t>(c.vertex)];
                if (c.normal && !slot) slot = static_cast<std::size_t>(*c.normal);
            }
            for (std::size_t k = 1; k + 1 < corners.size(); ++k) {
                model.faces.push_back({static_cast<std::uint32_t>(corners[0].vertex),
                                       static_cast<std::uint32_t>(corners[k].vertex),
                                       static_cast<std::uint32_t>(corners[k + 1].vertex)});
            }
        }
        // vt, vp, l, o, g, s, mtllib, usemtl and unknown statements are ignored
    }

    if (model.positions.empty()) throw AssetError(AssetErrc::MalformedFile, "no vertices in OBJ input");

    if (!model.faces.empty() && any_corner_normal) {
        bool complete = true;
        for (const auto& slot : vertex_normal) complete = complete && slot.has_value();
        if (complete) {
            model.normals.emplace();
            model.normals->reserve(model.positions.size());
            for (const auto& slot : vertex_normal) model.normals->push_back(file_normals[*slot]);
        }
    } else if (model.faces.empty() && !file_normals.empty() && file_normals.size() == model.positions.size()) {
        model.normals = std::move(file_normals);
    }

    model.kind = model.faces.empty() ? ModelKind::PointCloud : ModelKind::TriangleMesh;
    try {
        renormalize_normals(model);
        validate_model(model);
    } catch (const AssetError& e) {
        throw AssetError(AssetErrc::MalformedFile, e.what());
    }
    return model;
}

}  // namespace s3d::asset
