#include <doctest.h>

#include <random>

#include "s3d/asset/error.hpp"
#include "s3d/asset/model.hpp"
#include "support/fixtures.hpp"

using namespace s3d::asset;
using s3d::testing::random_model;

namespace {

/// Bounds by a plain scan, independent of compute_bounds.
BoundingBox scan_bounds(const Model3D& m) {
    BoundingBox b{m.positions[0], m.positions[0]};
    for (const Vec3& p : m.positions) {
        b.min = {std::min(b.min.x, p.x), std::min(b.min.y, p.y), std::min(b.min.z, p.z)};
        b.max = {std::max(b.max.x, p.x), std::max(b.max.y, p.y), std::max(b.max.z, p.z)};
    }
    return b;
}

AssetErrc code_of(auto&& fn) {
    try {
        fn();
    } catch (const AssetError& e) {
        return e.code();
    }
    FAIL("expected AssetError");
    return AssetErrc::InvalidModel;
}

}  // namespace

TEST_CASE("compute_bounds agrees with a linear scan") {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 50; ++i) {
        const auto m = random_model(rng, {});
        CHECK(compute_bounds(m) == scan_bounds(m));
    }
}

TEST_CASE("normalize_model centers and scales to unit longest edge") {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 100; ++i) {
        const auto m = random_model(rng, {.mesh = i % 2 == 0, .colors = true, .normals = i % 3 == 0});
        const auto n = normalize_model(m);
        const auto b = scan_bounds(n);
        const double longest = std::max({b.max.x - b.min.x, b.max.y - b.min.y, b.max.z - b.min.z});
        CHECK(longest == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(std::abs((b.min.x + b.max.x) / 2) < 1e-9);
        CHECK(std::abs((b.min.y + b.max.y) / 2) < 1e-9);
        CHECK(std::abs((b.min.z + b.max.z) / 2) < 1e-9);
        CHECK(n.faces == m.faces);
        CHECK(n.colors == m.colors);
        CHECK(n.normals == m.normals);
    }
}

TEST_CASE("normalization is idempotent and translation invariant") {
    std::mt19937_64 rng(3);
    const auto m = random_model(rng, {});
    const auto once = normalize_model(m);
    const auto twice = normalize_model(once);
    for (std::size_t i = 0; i < once.positions.size(); ++i) {
        CHECK(twice.positions[i].x == doctest::Approx(once.positions[i].x).epsilon(1e-12));
        CHECK(twice.positions[i].y == doctest::Approx(once.positions[i].y).epsilon(1e-12));
    }
    const auto shifted = normalize_model(translate_model(m, {100.0, -3.5, 7.25}));
    for (std::size_t i = 0; i < once.positions.size(); ++i) {
        CHECK(shifted.positions[i].z == doctest::Approx(once.positions[i].z).epsilon(1e-9));
    }
}

TEST_CASE("a single point or coincident points are degenerate") {
    Model3D m;
    m.positions = {{1, 2, 3}, {1, 2, 3}};
    CHECK(code_of([&] { (void)normalize_model(m); }) == AssetErrc::DegenerateModel);
}

TEST_CASE("a flat model normalizes by its longest edge") {
    Model3D m;
    m.positions = {{0, 0, 5}, {4, 0, 5}, {0, 2, 5}};
    const auto n = normalize_model(m);
    const auto b = compute_bounds(n);
    CHECK(b.extent().x == doctest::Approx(1.0));
    CHECK(b.extent().y == doctest::Approx(0.5));
    CHECK(b.extent().z == 0.0);
}

TEST_CASE("validate_model rejects broken invariants") {
    Model3D m;
    CHECK(code_of([&] { validate_model(m); }) == AssetErrc::InvalidModel);

    m.positions = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    CHECK_NOTHROW(validate_model(m));

    auto bad_colors = m;
    bad_colors.colors = std::vector<Rgb>(2);
    CHECK(code_of([&] { validate_model(bad_colors); }) == AssetErrc::InvalidModel);

    auto bad_face = m;
    bad_face.kind = ModelKind::TriangleMesh;
    bad_face.faces = {{0, 1, 3}};
    CHECK(code_of([&] { validate_model(bad_face); }) == AssetErrc::InvalidModel);

    auto kind_mismatch = m;
    kind_mismatch.kind = ModelKind::TriangleMesh;
    CHECK(code_of([&] { validate_model(kind_mismatch); }) == AssetErrc::InvalidModel);

    auto long_normal = m;
    long_normal.normals = std::vector<Vec3>(3, Vec3{0, 0, 2});
    CHECK(code_of([&] { validate_model(long_normal); }) == AssetErrc::InvalidModel);

    auto nan = m;
    nan.positions[1].y = std::nan("");
    CHECK(code_of([&] { validate_model(nan); }) == AssetErrc::InvalidModel);
}

TEST_CASE("renormalize_normals only touches out-of-tolerance normals") {
    Model3D m;
    m.positions = {{0, 0, 0}, {1, 0, 0}};
    const Vec3 almost{0.0, 0.0, 1.0 + 0.5e-3};
    m.normals = std::vector<Vec3>{almost, {0.0, 3.0, 4.0}};
    renormalize_normals(m);
    CHECK((*m.normals)[0] == almost);
    CHECK((*m.normals)[1].y == doctest::Approx(0.6));
    CHECK((*m.normals)[1].z == doctest::Approx(0.8));

    m.normals = std::vector<Vec3>{{0, 0, 0}, {0, 0, 1}};
    CHECK(code_of([&] { renormalize_normals(m); }) == AssetErrc::InvalidModel);
}
