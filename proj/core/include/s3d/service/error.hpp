#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace s3d::service {

enum class ServiceErrc {
    AssetMissing,
    AssetInvalid,
    PortInUse,
    BindFailed,
};

[[nodiscard]] std::string_view to_string(ServiceErrc code) noexcept;

class ServiceError : public std::runtime_error {
public:
    ServiceError(ServiceErrc code, const std::string& message, std::vector<std::string> details = {});

    [[nodiscard]] ServiceErrc code() const noexcept { return code_; }
    /// For AssetMissing: every missing path.
    [[nodiscard]] const std::vector<std::string>& details() const noexcept { return details_; }

private:
    ServiceErrc code_;
    std::vector<std::string> details_;
};

}  // namespace s3d::service
