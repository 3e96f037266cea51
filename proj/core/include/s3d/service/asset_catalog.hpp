#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "s3d/session/manifest.hpp"

namespace s3d::service {

using Bytes = std::vector<std::byte>;

/// Content-addressed view of every asset named in a manifest. Each asset is
/// served as a packed geometry container whose SHA-256 is its address.
/// Containers are rebuilt from disk on demand and held in a bounded LRU cache.
class AssetCatalog {
public:
    static constexpr std::size_t kDefaultCacheEntries = 16;

    /// Loads and packs every asset once to learn its hash. Throws
    /// ServiceError{AssetMissing} naming all missing files, or
    /// ServiceError{AssetInvalid} for unreadable models and stale hashes.
    static AssetCatalog build(const session::Manifest& manifest, std::size_t cache_entries = kDefaultCacheEntries);

    AssetCatalog(AssetCatalog&& other) noexcept;
    AssetCatalog& operator=(AssetCatalog&&) = delete;

    [[nodiscard]] std::optional<std::string> hash_for(const std::string& stimulus_id) const;
    /// "/geom/<hash>" for a stimulus.
    [[nodiscard]] std::string url_for(const std::string& stimulus_id) const;

    /// Container bytes for a hash, or nullptr when the hash is unknown.
    [[nodiscard]] std::shared_ptr<const Bytes> fetch(const std::string& hash) const;

    [[nodiscard]] std::size_t size() const noexcept { return by_hash_.size(); }
    [[nodiscard]] std::size_t cached_entries() const;

private:
    explicit AssetCatalog(std::size_t cache_entries) : capacity_(cache_entries) {}

    std::size_t capacity_;
    std::map<std::string, std::string> by_stimulus_;
    std::map<std::string, std::filesystem::path> by_hash_;

    mutable std::mutex mutex_;
    mutable std::list<std::pair<std::string, std::shared_ptr<const Bytes>>> lru_;
    mutable std::unordered_map<std::string, decltype(lru_)::iterator> index_;
};

/// Packed container bytes for a model file. `.p3dg` files are returned as is
/// after validation; PLY and OBJ files are parsed and packed.
[[nodiscard]] Bytes container_for_file(const std::filesystem::path& path);

}  // namespace s3d::service
