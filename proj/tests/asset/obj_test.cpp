#include <doctest.h>

#include "s3d/asset/error.hpp"
#include "s3d/asset/io.hpp"
#include "support/fixtures.hpp"

using namespace s3d::asset;
using s3d::testing::as_bytes;

TEST_CASE("OBJ mesh with all face reference forms") {
    const auto m = parse_model(as_bytes(
        "# cube corner\n"
        "mtllib scene.mtl\n"
        "o part\n"
        "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\n"
        "vt 0 0\nvn 0 0 1\n"
        "usemtl red\ns off\n"
        "f 1/1/1 2//1 3/1/1\n"
        "f 1 3 4\n"));
    CHECK(m.kind == ModelKind::TriangleMesh);
    CHECK(m.faces == std::vector<Face>{{0, 1, 2}, {0, 2, 3}});
    // vertex 4 never received a normal, so normals are dropped
    CHECK_FALSE(m.normals);
}

TEST_CASE("OBJ negative indices and polygons") {
    const auto m = parse_model(as_bytes("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 2\nf -4//-1 -3//-1 -2//-1 -1//-1\n"));
    REQUIRE(m.faces.size() == 2);
    CHECK(m.faces[1] == Face{0, 2, 3});
    REQUIRE(m.normals);
    CHECK((*m.normals)[3] == Vec3{0, 0, 1});
}

TEST_CASE("OBJ point cloud pairs normals with vertices") {
    const auto m = parse_model(as_bytes("v 0 0 0\nv 1 2 3\nvn 1 0 0\nvn 0 1 0\n"));
    CHECK(m.kind == ModelKind::PointCloud);
    REQUIRE(m.normals);
    CHECK((*m.normals)[1] == Vec3{0, 1, 0});
}

TEST_CASE("OBJ errors carry line numbers") {
    auto error_of = [](std::string_view text) {
        try {
            (void)parse_obj(as_bytes(text));
        } catch (const AssetError& e) {
            return e;
        }
        FAIL("expected AssetError");
        return AssetError(AssetErrc::InvalidModel, "");
    };
    auto e = error_of("v 0 0 0\nv 1 0 0\nf 1 2 3\n");
    CHECK(e.code() == AssetErrc::MalformedFile);
    CHECK(e.where().line == 3);
    CHECK(error_of("v 0 0\n").where().line == 1);
    CHECK(error_of("v 0 0 0\nv 1 1 1\nf 1 2\n").code() == AssetErrc::MalformedFile);
    CHECK(error_of("# nothing\n").code() == AssetErrc::MalformedFile);
    CHECK(error_of("v 0 0 0\nf 0 1 1\n").code() == AssetErrc::MalformedFile);
}
