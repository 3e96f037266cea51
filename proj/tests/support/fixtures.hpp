#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <system_error>

#include "s3d/asset/io.hpp"
#include "s3d/asset/model.hpp"
#include "s3d/session/manifest.hpp"

namespace s3d::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::mt19937_64 rng{std::random_device{}()};
        const auto base = std::filesystem::temp_directory_path();
        do {
            path_ = base / ("s3d-test-" + std::to_string(rng()));
        } while (std::filesystem::exists(path_));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const { return path_; }
    [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

struct RandomModelSpec {
    bool mesh = false;
    bool colors = false;
    bool normals = false;
    /// Round coordinates through float so they are float-representable.
    bool float_exact = true;
};

inline asset::Model3D random_model(std::mt19937_64& rng, RandomModelSpec spec) {
    std::uniform_int_distribution<int> count(4, 200);
    std::uniform_real_distribution<double> coord(-50.0, 50.0);
    std::uniform_real_distribution<double> scale(0.01, 20.0);
    std::uniform_int_distribution<int> byte(0, 255);
    std::normal_distribution<double> gauss(0.0, 1.0);

    asset::Model3D m;
    const int n = count(rng);
    const double sx = scale(rng), sy = scale(rng), sz = scale(rng);
    const asset::Vec3 offset{coord(rng), coord(rng), coord(rng)};
    auto maybe_float = [&](double v) { return spec.float_exact ? static_cast<double>(static_cast<float>(v)) : v; };
    for (int i = 0; i < n; ++i) {
        m.positions.push_back({maybe_float(offset.x + sx * coord(rng)), maybe_float(offset.y + sy * coord(rng)),
                               maybe_float(offset.z + sz * coord(rng))});
    }
    if (spec.colors) {
        m.colors.emplace();
        for (int i = 0; i < n; ++i) {
            m.colors->push_back({static_cast<std::uint8_t>(byte(rng)), static_cast<std::uint8_t>(byte(rng)),
                                 static_cast<std::uint8_t>(byte(rng))});
        }
    }
    if (spec.normals) {
        m.normals.emplace();
        for (int i = 0; i < n; ++i) {
            asset::Vec3 v{gauss(rng), gauss(rng), gauss(rng)};
            double len = std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z);
            if (len < 1e-6) {
                v = {0, 0, 1};
                len = 1;
            }
            m.normals->push_back({maybe_float(v.x / len), maybe_float(v.y / len), maybe_float(v.z / len)});
        }
    }
    if (spec.mesh) {
        m.kind = asset::ModelKind::TriangleMesh;
        std::uniform_int_distribution<std::uint32_t> index(0, static_cast<std::uint32_t>(n - 1));
        const int faces = count(rng);
        for (int f = 0; f < faces; ++f) m.faces.push_back({index(rng), index(rng), index(rng)});
    }
    return m;
}

/// Writes a small distinct PLY for every stimulus of `manifest` into `dir`
/// and points the manifest at them.
inline session::Manifest materialize(session::Manifest manifest, const std::filesystem::path& dir) {
    std::mt19937_64 rng(42);
    manifest.base_dir = dir;
    for (auto& s : manifest.stimuli) {
        s.asset_path = s.id + ".ply";
        s.content_hash.reset();
        auto model = random_model(rng, {.mesh = false, .colors = true, .normals = false});
        asset::write_file(dir / s.asset_path, asset::write_ply(model));
    }
    return manifest;
}

inline std::span<const std::byte> as_bytes(std::string_view text) {
    return {reinterpret_cast<const std::byte*>(text.data()), text.size()};
}

}  // namespace s3d::testing
