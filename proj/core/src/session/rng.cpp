#include "s3d/session/rng.hpp"

#include <cmath>
#include <numbers>

namespace s3d::session {

double Xoshiro256::gaussian() noexcept {
    double u1 = unit();
    while (u1 <= 0.0) u1 = unit();
    const double u2 = unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace s3d::session
