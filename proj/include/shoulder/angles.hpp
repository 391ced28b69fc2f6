#pragma once

#include <numbers>

namespace shoulder {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

constexpr double deg2rad(double deg) { return deg * kDegToRad; }
constexpr double rad2deg(double rad) { return rad * kRadToDeg; }

}  // namespace shoulder
