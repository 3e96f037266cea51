#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "common/little_endian.hpp"
#include "s3d/asset/error.hpp"
#include "s3d/asset/io.hpp"
#include "text_lines.hpp"

namespace s3d::asset {

namespace {

using detail::LineReader;
using detail::parse_number;
using detail::Tokens;

enum class Scalar { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

std::optional<Scalar> scalar_from_name(std::string_view name) {
    if (name == "char" || name == "int8") return Scalar::Int8;
    if (name == "uchar" || name == "uint8") return Scalar::UInt8;
    if (name == "short" || name == "int16") return Scalar::Int16;
    if (name == "ushort" || name == "uint16") return Scalar::UInt16;
    if (name == "int" || name == "int32") return Scalar::Int32;
    if (name == "uint" || name == "uint32") return Scalar::UInt32;
    if (name == "float" || name == "float32") return Scalar::Float32;
    if (name == "double" || name == "float64") return Scalar::Float64;
    return std::nullopt;
}

std::size_t scalar_size(Scalar s) {
    switch (s) {
    case Scalar::Int8:
    case Scalar::UInt8: return 1;
    case Scalar::Int16:
    case Scalar::UInt16: return 2;
    case Scalar::Int32:
    case Scalar::UInt32:
    case Scalar::Float32: return 4;
    case Scalar::Float64: return 8;
    }
    return 0;
}

bool is_integral(Scalar s) { return s != Scalar::Float32 && s != Scalar::Float64; }

struct Property {
    std::string name;
    Scalar type = Scalar::Float32;
    bool is_list = false;
    Scalar count_type = Scalar::UInt8;
};

struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<Property> properties;
};

enum class Encoding { Ascii, BinaryLE };

struct Header {
    Encoding encoding = Encoding::Ascii;
    std::vector<Element> elements;
    std::size_t body_offset = 0;
    std::size_t body_line = 1;
};

[[noreturn]] void malformed(const std::string& what, std::size_t line, std::size_t offset) {
    throw AssetError(AssetErrc::MalformedFile, what, {line, offset});
}

Header parse_header(std::span<const std::byte> bytes) {
    LineReader reader(bytes);
    Header header;
    auto first = reader.next();
    if (!first || detail::trim(first->text) != "ply") {
        throw AssetError(AssetErrc::UnsupportedFormat, "missing 'ply' magic", {1, 0});
    }
    bool have_format = false;
    while (auto line = reader.next()) {
        Tokens tokens(line->text);
        auto keyword = tokens.next();
        if (!keyword) continue;
        if (*keyword == "comment" || *keyword == "obj_info") continue;
        if (*keyword == "end_header") {
            if (!have_format) malformed("header has no format line", line->number, line->offset);
            header.body_offset = reader.position();
            header.body_line = line->number + 1;
            return header;
        }
        if (*keyword == "format") {
            auto kind = tokens.next();
            if (!kind) malformed("format line without encoding", line->number, line->offset);
            if (*kind == "ascii") {
                header.encoding = Encoding::Ascii;
            } else if (*kind == "binary_little_endian") {
                header.encoding = Encoding::BinaryLE;
            } else if (*kind == "binary_big_endian") {
                throw AssetError(AssetErrc::UnsupportedFormat, "big-endian PLY is not supported",
                                 {line->number, line->offset});
            } else {
                malformed("unknown PLY encoding '" + std::string(*kind) + "'", line->number, line->offset);
            }
            have_format = true;
        } else if (*keyword == "element") {
            auto name = tokens.next();
            auto count_token = tokens.next();
            std::optional<std::size_t> count;
            if (count_token) count = parse_number<std::size_t>(*count_token);
            if (!name || !count) malformed("bad element declaration", line->number, line->offset);
            header.elements.push_back({std::string(*name), *count, {}});
        } else if (*keyword == "property") {
            if (header.elements.empty()) malformed("property before any element", line->number, line->offset);
            Property prop;
            auto type_token = tokens.next();
            if (!type_token) malformed("property without type", line->number, line->offset);
            if (*type_token == "list") {
                auto count_type = tokens.next();
                auto item_type = tokens.next();
                std::optional<Scalar> ct;
                std::optional<Scalar> it;
                if (count_type) ct = scalar_from_name(*count_type);
                if (item_type) it = scalar_from_name(*item_type);
                if (!ct || !it || !is_integral(*ct)) malformed("bad list property types", line->number, line->offset);
                prop.is_list = true;
                prop.count_type = *ct;
                prop.type = *it;
            } else {
                auto st = scalar_from_name(*type_token);
                if (!st) malformed("unknown property type '" + std::string(*type_token) + "'", line->number, line->offset);
                prop.type = *st;
            }
            auto name = tokens.next();
            if (!name) malformed("property without name", line->number, line->offset);
            prop.name = std::string(*name);
            header.elements.back().properties.push_back(std::move(prop));
        } else {
            malformed("unexpected header keyword '" + std::string(*keyword) + "'", line->number, line->offset);
        }
    }
    malformed("header is not terminated by end_header", reader.line_number(), reader.position());
}

/// Which model attribute each vertex property feeds. -1 means skipped.
struct VertexLayout {
    std::array<int, 3> position{-1, -1, -1};
    std::array<int, 3> color{-1, -1, -1};
    std::array<int, 3> normal{-1, -1, -1};
    bool color_is_float = false;

    [[nodiscard]] bool has_colors() const { return color[0] >= 0 && color[1] >= 0 && color[2] >= 0; }
    [[nodiscard]] bool has_normals() const { return normal[0] >= 0 && normal[1] >= 0 && normal[2] >= 0; }
};

VertexLayout vertex_layout(const Element& element) {
    VertexLayout layout;
    for (std::size_t i = 0; i < element.properties.size(); ++i) {
        const Property& p = element.properties[i];
        if (p.is_list) continue;
        const int idx = static_cast<int>(i);
        const std::string& n = p.name;
        if (n == "x") layout.position[0] = idx;
        else if (n == "y") layout.position[1] = idx;
        else if (n == "z") layout.position[2] = idx;
        else if (n == "red" || n == "r") layout.color[0] = idx;
        else if (n == "green" || n == "g") layout.color[1] = idx;
        else if (n == "blue" || n == "b") layout.color[2] = idx;
        else if (n == "nx") layout.normal[0] = idx;
        else if (n == "ny") layout.normal[1] = idx;
        else if (n == "nz") layout.normal[2] = idx;
    }
    if (layout.has_colors()) {
        layout.color_is_float = !is_integral(element.properties[static_cast<std::size_t>(layout.color[0])].type);
    }
    return layout;
}

int face_list_property(const Element& element) {
    for (std::size_t i = 0; i < element.properties.size(); ++i) {
        const Property& p = element.properties[i];
        if (p.is_list && (p.name == "vertex_indices" || p.name == "vertex_index")) return static_cast<int>(i);
    }
    return -1;
}

std::uint8_t to_color(double value, bool is_float) {
    const double scaled = is_float ? value * 255.0 : value;
    return static_cast<std::uint8_t>(std::clamp(std::round(scaled), 0.0, 255.0));
}

/// Accumulates one model while elements are decoded in file order.
class ModelBuilder {
public:
    void begin_vertices(const Element& element) {
        layout_ = vertex_layout(element);
        if (layout_.position[0] < 0 || layout_.position[1] < 0 || layout_.position[2] < 0) {
            throw AssetError(AssetErrc::MalformedFile, "vertex element lacks x/y/z properties");
        }
        model_.positions.reserve(element.count);
        if (layout_.has_colors()) {
            model_.colors.emplace();
            model_.colors->reserve(element.count);
        }
        if (layout_.has_normals()) {
            model_.normals.emplace();
            model_.normals->reserve(element.count);
        }
        values_.assign(element.properties.size(), 0.0);
    }

    std::vector<double>& vertex_values() { return values_; }

    void commit_vertex() {
        auto v = [&](int i) { return values_[static_cast<std::size_t>(i)]; };
        model_.positions.push_back({v(layout_.position[0]), v(layout_.position[1]), v(layout_.position[2])});
        if (model_.colors) {
            model_.colors->push_back({to_color(v(layout_.color[0]), layout_.color_is_float),
                                      to_color(v(layout_.color[1]), layout_.color_is_float),
                                      to_color(v(layout_.color[2]), layout_.color_is_float)});
        }
        if (model_.normals) model_.normals->push_back({v(layout_.normal[0]), v(layout_.normal[1]), v(layout_.normal[2])});
    }

    /// Fan-triangulates a polygon; indices are validated against the vertex count.
    void add_polygon(std::span<const std::int64_t> indices, std::size_t line, std::size_t offset) {
        if (indices.size() < 3) malformed("face with fewer than 3 vertices", line, offset);
        for (std::int64_t index : indices) {
            if (index < 0 || static_cast<std::uint64_t>(index) >= model_.positions.size()) {
                malformed("face index " + std::to_string(index) + " out of range", line, offset);
            }
        }
        for (std::size_t k = 1; k + 1 < indices.size(); ++k) {
            model_.faces.push_back({static_cast<std::uint32_t>(indices[0]), static_cast<std::uint32_t>(indices[k]),
                                    static_cast<std::uint32_t>(indices[k + 1])});
        }
    }

    Model3D finish() && {
        model_.kind = model_.faces.empty() ? ModelKind::PointCloud : ModelKind::TriangleMesh;
        try {
            renormalize_normals(model_);
            validate_model(model_);
        } catch (const AssetError& e) {
            throw AssetError(AssetErrc::MalformedFile, e.what());
        }
        return std::move(model_);
    }

private:
    Model3D model_;
    VertexLayout layout_;
    std::vector<double> values_;
};

Model3D parse_ascii_body(std::span<const std::byte> bytes, const Header& header) {
    LineReader reader(bytes, header.body_offset, header.body_line);
    ModelBuilder builder;
    bool seen_vertices = false;
    std::vector<std::int64_t> polygon;

    auto next_content_line = [&](const std::string& element_name) {
        while (auto line = reader.next()) {
            if (!detail::trim(line->text).empty()) return *line;
        }
        malformed("file ends before all '" + element_name + "' entries were read", reader.line_number(),
                  reader.position());
    };

    for (const Element& element : header.elements) {
        const bool is_vertex = element.name == "vertex";
        const bool is_face = element.name == "face";
        const int face_prop = is_face ? face_list_property(element) : -1;
        if (is_vertex) {
            builder.begin_vertices(element);
            seen_vertices = true;
        }
        if (is_face && face_prop >= 0 && !seen_vertices) {
            throw AssetError(AssetErrc::MalformedFile, "face element precedes vertex element");
        }
        for (std::size_t i = 0; i < element.count; ++i) {
            const auto line = next_content_line(element.name);
            Tokens tokens(line.text);
            auto require = [&](std::string_view what) {
                auto token = tokens.next();
                if (!token) malformed("missing value for '" + std::string(what) + "'", line.number, line.offset);
                return *token;
            };
            for (std::size_t p = 0; p < element.properties.size(); ++p) {
                const Property& prop = element.properties[p];
                if (prop.is_list) {
                    auto count = parse_number<std::int64_t>(require(prop.name));
                    if (!count || *count < 0) malformed("bad list length", line.number, line.offset);
                    const bool collect = static_cast<int>(p) == face_prop;
                    polygon.clear();
                    for (std::int64_t k = 0; k < *count; ++k) {
                        auto token = require(prop.name);
                        if (collect) {
                            auto index = parse_number<std::int64_t>(token);
                            if (!index) malformed("bad face index '" + std::string(token) + "'", line.number, line.offset);
                            polygon.push_back(*index);
                        } else if (!parse_number<double>(token)) {
                            malformed("bad list value '" + std::string(token) + "'", line.number, line.offset);
                        }
                    }
                    if (collect) builder.add_polygon(polygon, line.number, line.offset);
                } else {
                    auto token = require(prop.name);
                    // float properties go through float so ascii and binary decode identically
                    std::optional<double> value;
                    if (prop.type == Scalar::Float32) {
                        if (auto f = parse_number<float>(token)) value = *f;
                    } else {
                        value = parse_number<double>(token);
                    }
                    if (!value) malformed("bad number '" + std::string(token) + "'", line.number, line.offset);
                    if (is_vertex) builder.vertex_values()[p] = *value;
                }
            }
            if (!tokens.empty()) malformed("extra values on '" + element.name + "' line", line.number, line.offset);
            if (is_vertex) builder.commit_vertex();
        }
    }
    while (auto line = reader.next()) {
        if (!detail::trim(line->text).empty()) malformed("trailing data after last element", line->number, line->offset);
    }
    if (!seen_vertices) throw AssetError(AssetErrc::MalformedFile, "no vertex element");
    return std::move(builder).finish();
}

class BinaryCursor {
public:
    BinaryCursor(std::span<const std::byte> bytes, std::size_t pos) : bytes_(bytes), pos_(pos) {}

    double read(Scalar type) {
        const std::size_t n = scalar_size(type);
        if (pos_ + n > bytes_.size()) {
            throw AssetError(AssetErrc::MalformedFile, "truncated binary payload", {0, pos_});
        }
        const std::byte* p = bytes_.data() + pos_;
        pos_ += n;
        switch (type) {
        case Scalar::Int8: return s3d::detail::get_le<std::int8_t>(p);
        case Scalar::UInt8: return s3d::detail::get_le<std::uint8_t>(p);
        case Scalar::Int16: return s3d::detail::get_le<std::int16_t>(p);
        case Scalar::UInt16: return s3d::detail::get_le<std::uint16_t>(p);
        case Scalar::Int32: return s3d::detail::get_le<std::int32_t>(p);
        case Scalar::UInt32: return s3d::detail::get_le<std::uint32_t>(p);
        case Scalar::Float32: return s3d::detail::get_le<float>(p);
        case Scalar::Float64: return s3d::detail::get_le<double>(p);
        }
        return 0.0;
    }

    [[nodiscard]] std::size_t position() const noexcept { return pos_; }
    [[nodiscard]] bool at_end() const noexcept { return pos_ >= bytes_.size(); }

private:
    std::span<const std::byte> bytes_;
    std::size_t pos_;
};

Model3D parse_binary_body(std::span<const std::byte> bytes, const Header& header) {
    BinaryCursor cursor(bytes, header.body_offset);
    ModelBuilder builder;
    bool seen_vertices = false;
    std::vector<std::int64_t> polygon;

    for (const Element& element : header.elements) {
        const bool is_vertex = element.name == "vertex";
        const int face_prop = element.name == "face" ? face_list_property(element) : -1;
        if (is_vertex) {
            builder.begin_vertices(element);
            seen_vertices = true;
        }
        if (face_prop >= 0 && !seen_vertices) {
            throw AssetError(AssetErrc::MalformedFile, "face element precedes vertex element");
        }
        for (std::size_t i = 0; i < element.count; ++i) {
            const std::size_t record_offset = cursor.position();
            for (std::size_t p = 0; p < element.properties.size(); ++p) {
                const Property& prop = element.properties[p];
                if (prop.is_list) {
                    const double count = cursor.read(prop.count_type);
                    if (count < 0) throw AssetError(AssetErrc::MalformedFile, "negative list length", {0, record_offset});
                    const bool collect = static_cast<int>(p) == face_prop;
                    polygon.clear();
                    for (std::int64_t k = 0; k < static_cast<std::int64_t>(count); ++k) {
                        const double value = cursor.read(prop.type);
                        if (collect) polygon.push_back(static_cast<std::int64_t>(value));
                    }
                    if (collect) builder.add_polygon(polygon, 0, record_offset);
                } else {
                    const double value = cursor.read(prop.type);
                    if (is_vertex) builder.vertex_values()[p] = value;
                }
            }
            if (is_vertex) builder.commit_vertex();
        }
    }
    if (!cursor.at_end()) {
        throw AssetError(AssetErrc::MalformedFile, "trailing bytes after last element", {0, cursor.position()});
    }
    if (!seen_vertices) throw AssetError(AssetErrc::MalformedFile, "no vertex element");
    return std::move(builder).finish();
}

bool fits_float(double v) {
    return static_cast<double>(static_cast<float>(v)) == v || std::isnan(v);
}

bool model_fits_float(const Model3D& model) {
    auto all_fit = [](const std::vector<Vec3>& vs) {
        return std::all_of(vs.begin(), vs.end(), [](const Vec3& v) { return fits_float(v.x) && fits_float(v.y) && fits_float(v.z); });
    };
    return all_fit(model.positions) && (!model.normals || all_fit(*model.normals));
}

void append_number(std::string& out, double value, bool as_float) {
    std::array<char, 64> buf{};
    const auto result = as_float ? std::to_chars(buf.data(), buf.data() + buf.size(), static_cast<float>(value))
                                 : std::to_chars(buf.data(), buf.data() + buf.size(), value);
    out.append(buf.data(), result.ptr);
}

}  // namespace

Model3D parse_ply(std::span<const std::byte> bytes) {
    if (bytes.empty()) throw AssetError(AssetErrc::MalformedFile, "empty input");
    const Header header = parse_header(bytes);
    return header.encoding == Encoding::Ascii ? parse_ascii_body(bytes, header) : parse_binary_body(bytes, header);
}

std::vector<std::byte> write_ply(const Model3D& model, PlyEncoding encoding, PlyScalar scalar) {
    validate_model(model);
    const bool as_float = scalar == PlyScalar::Float32 || (scalar == PlyScalar::Auto && model_fits_float(model));
    const char* real = as_float ? "float" : "double";

    std::string header = "ply\n";
    header += encoding == PlyEncoding::Ascii ? "format ascii 1.0\n" : "format binary_little_endian 1.0\n";
    header += "element vertex " + std::to_string(model.positions.size()) + "\n";
    for (const char* axis : {"x", "y", "z"}) header += std::string("property ") + real + " " + axis + "\n";
    if (model.colors) header += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    if (model.normals) {
        for (const char* axis : {"nx", "ny", "nz"}) header += std::string("property ") + real + " " + axis + "\n";
    }
    if (!model.faces.empty()) {
        header += "element face " + std::to_string(model.faces.size()) + "\n";
        header += "property list uchar uint vertex_indices\n";
    }
    header += "end_header\n";

    std::vector<std::byte> out;
    s3d::detail::put_bytes(out, header);

    if (encoding == PlyEncoding::Ascii) {
        std::string body;
        body.reserve(model.positions.size() * 48);
        auto put_vec = [&](const Vec3& v) {
            append_number(body, v.x, as_float);
            body += ' ';
            append_number(body, v.y, as_float);
            body += ' ';
            append_number(body, v.z, as_float);
        };
        for (std::size_t i = 0; i < model.positions.size(); ++i) {
            put_vec(model.positions[i]);
            if (model.colors) {
                const Rgb& c = (*model.colors)[i];
                body += ' ' + std::to_string(c.r) + ' ' + std::to_string(c.g) + ' ' + std::to_string(c.b);
            }
            if (model.normals) {
                body += ' ';
                put_vec((*model.normals)[i]);
            }
            body += '\n';
        }
        for (const Face& f : model.faces) {
            body += "3 " + std::to_string(f[0]) + ' ' + std::to_string(f[1]) + ' ' + std::to_string(f[2]) + '\n';
        }
        s3d::detail::put_bytes(out, body);
        return out;
    }

    const std::size_t real_size = as_float ? 4 : 8;
    out.reserve(out.size() + model.positions.size() * (3 * real_size * 2 + 3) + model.faces.size() * 13);
    auto put_real = [&](double v) {
        if (as_float) s3d::detail::put_le(out, static_cast<float>(v));
        else s3d::detail::put_le(out, v);
    };
    for (std::size_t i = 0; i < model.positions.size(); ++i) {
        const Vec3& p = model.positions[i];
        put_real(p.x);
        put_real(p.y);
        put_real(p.z);
        if (model.colors) {
            const Rgb& c = (*model.colors)[i];
            s3d::detail::put_le(out, c.r);
            s3d::detail::put_le(out, c.g);
            s3d::detail::put_le(out, c.b);
        }
        if (model.normals) {
            const Vec3& n = (*model.normals)[i];
            put_real(n.x);
            put_real(n.y);
            put_real(n.z);
        }
    }
    for (const Face& f : model.faces) {
        s3d::detail::put_le(out, std::uint8_t{3});
        for (std::uint32_t index : f) s3d::detail::put_le(out, index);
    }
    return out;
}

}  // namespace s3d::asset
