#include <fstream>
#include <string>

#include "s3d/asset/error.hpp"
#include "s3d/asset/io.hpp"
#include "text_lines.hpp"

namespace s3d::asset {

namespace {

bool is_obj_keyword(std::string_view word) {
    static constexpr std::string_view kKeywords[] = {"v", "vn", "vt", "vp", "f", "l", "o", "g", "s", "mtllib", "usemtl"};
    for (std::string_view k : kKeywords) {
        if (word == k) return true;
    }
    return false;
}

}  // namespace

FormatHint detect_format(std::span<const std::byte> bytes) {
    if (bytes.empty()) throw AssetError(AssetErrc::UnsupportedFormat, "empty input");
    detail::LineReader reader(bytes);
    if (auto first = reader.next(); first && detail::trim(first->text) == "ply") return FormatHint::Ply;

    detail::LineReader obj_reader(bytes);
    while (auto line = obj_reader.next()) {
        std::string_view text = detail::trim(line->text);
        if (text.empty() || text.front() == '#') continue;
        detail::Tokens tokens(text);
        if (auto word = tokens.next(); word && is_obj_keyword(*word)) return FormatHint::Obj;
        break;
    }
    throw AssetError(AssetErrc::UnsupportedFormat, "input is neither PLY nor OBJ", {1, 0});
}

Model3D parse_model(std::span<const std::byte> bytes, FormatHint hint) {
    if (bytes.empty()) throw AssetError(AssetErrc::MalformedFile, "empty input");
    if (hint == FormatHint::Auto) hint = detect_format(bytes);
    return hint == FormatHint::Ply ? parse_ply(bytes) : parse_obj(bytes);
}

std::vector<std::byte> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    in.seekg(0, std::ios::end);
    const auto size = static_cast<std::size_t>(in.tellg());
    in.seekg(0, std::ios::beg);
    std::vector<std::byte> bytes(size);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::byte> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot create " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

Model3D load_model(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    return parse_model(bytes);
}

}  // namespace s3d::asset
