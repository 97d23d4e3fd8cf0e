#pragma once

#include <cmath>
#include <numbers>

// Unit conventions, applied at exactly one boundary:
// configs and serialized outputs use ordinary frequencies in MHz and fields
// in gauss; everything internal is angular frequency in rad/us and time in us.

namespace nvspin {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline constexpr double angular_from_mhz(double mhz) { return two_pi * mhz; }
inline constexpr double mhz_from_angular(double rad_per_us) { return rad_per_us / two_pi; }

// Reduce an angle to [0, 2*pi).
inline double wrap_angle(double a) {
    double r = std::fmod(a, two_pi);
    if (r < 0.0) r += two_pi;
    return r;
}

} // namespace nvspin
