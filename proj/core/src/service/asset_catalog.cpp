#include "s3d/service/asset_catalog.hpp"

#include <array>
#include <system_error>

#include "s3d/asset/error.hpp"
#include "s3d/asset/io.hpp"
#include "s3d/asset/packed.hpp"
#include "s3d/common/hash.hpp"
#include "s3d/service/error.hpp"

namespace s3d::service {

namespace {

constexpr std::array<std::pair<ServiceErrc, std::string_view>, 4> kErrcNames = {{
    {ServiceErrc::AssetMissing, "AssetMissing"},
    {ServiceErrc::AssetInvalid, "AssetInvalid"},
    {ServiceErrc::PortInUse, "PortInUse"},
    {ServiceErrc::BindFailed, "BindFailed"},
}};

}  // namespace

std::string_view to_string(ServiceErrc code) noexcept {
    for (const auto& [c, name] : kErrcNames) {
        if (c == code) return name;
    }
    return "Unknown";
}

ServiceError::ServiceError(ServiceErrc code, const std::string& message, std::vector<std::string> details)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), details_(std::move(details)) {}

Bytes container_for_file(const std::filesystem::path& path) {
    Bytes bytes = asset::read_file(path);
    if (path.extension() == ".p3dg") {
        (void)asset::unpack_geometry(asset::decode_container(bytes));
        return bytes;
    }
    return asset::encode_container(asset::pack_geometry(asset::parse_model(bytes)));
}

AssetCatalog AssetCatalog::build(const session::Manifest& manifest, std::size_t cache_entries) {
    AssetCatalog catalog(cache_entries);
    std::vector<std::string> missing;
    for (const auto& stimulus : manifest.stimuli) {
        std::error_code ec;
        const auto path = manifest.resolve(stimulus);
        if (!std::filesystem::is_regular_file(path, ec)) missing.push_back(path.string());
    }
    if (!missing.empty()) {
        std::string message = std::to_string(missing.size()) + " asset file(s) missing:";
        for (const auto& m : missing) message += "\n  " + m;
        throw ServiceError(ServiceErrc::AssetMissing, message, std::move(missing));
    }

    for (const auto& stimulus : manifest.stimuli) {
        const auto path = manifest.resolve(stimulus);
        Bytes bytes;
        try {
            bytes = container_for_file(path);
        } catch (const std::exception& e) {
            throw ServiceError(ServiceErrc::AssetInvalid, path.string() + ": " + e.what());
        }
        std::string hash = sha256_hex(std::span<const std::byte>(bytes));
        if (stimulus.content_hash && *stimulus.content_hash != hash) {
            throw ServiceError(ServiceErrc::AssetInvalid, path.string() + ": content hash " + hash +
                                                              " does not match manifest hash " + *stimulus.content_hash);
        }
        catalog.by_stimulus_[stimulus.id] = hash;
        catalog.by_hash_.emplace(hash, path);
    }
    return catalog;
}

AssetCatalog::AssetCatalog(AssetCatalog&& other) noexcept
    : capacity_(other.capacity_),
      by_stimulus_(std::move(other.by_stimulus_)),
      by_hash_(std::move(other.by_hash_)),
      lru_(std::move(other.lru_)),
      index_(std::move(other.index_)) {}

std::optional<std::string> AssetCatalog::hash_for(const std::string& stimulus_id) const {
    const auto it = by_stimulus_.find(stimulus_id);
    if (it == by_stimulus_.end()) return std::nullopt;
    return it->second;
}

std::string AssetCatalog::url_for(const std::string& stimulus_id) const {
    const auto hash = hash_for(stimulus_id);
    return hash ? "/geom/" + *hash : std::string{};
}

std::shared_ptr<const Bytes> AssetCatalog::fetch(const std::string& hash) const {
    const auto path_it = by_hash_.find(hash);
    if (path_it == by_hash_.end()) return nullptr;
    {
        std::lock_guard lock(mutex_);
        if (const auto it = index_.find(hash); it != index_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second);
            return it->second->second;
        }
    }

    // Rebuilt outside the lock; concurrent misses for one hash do duplicate work.
    auto bytes = std::make_shared<const Bytes>(container_for_file(path_it->second));
    if (sha256_hex(std::span<const std::byte>(*bytes)) != hash) {
        throw ServiceError(ServiceErrc::AssetInvalid, path_it->second.string() + " changed on disk since startup");
    }

    std::lock_guard lock(mutex_);
    if (const auto it = index_.find(hash); it != index_.end()) return it->second->second;
    if (capacity_ == 0) return bytes;
    lru_.emplace_front(hash, bytes);
    index_[hash] = lru_.begin();
    while (lru_.size() > capacity_) {
        index_.erase(lru_.back().first);
        lru_.pop_back();
    }
    return bytes;
}

std::size_t AssetCatalog::cached_entries() const {
    std::lock_guard lock(mutex_);
    return lru_.size();
}

}  // namespace s3d::service
