#pragma once

#include <numbers>

namespace uvac {

// Units throughout: time in fs, length in nm, frequency in 1/fs.
inline constexpr double kSpeedOfLight = 299.792458;  // nm/fs

// Intensity FWHM of sech^2(t/dt) is this factor times dt: 2 ln(1 + sqrt 2).
inline constexpr double kSechFwhmFactor = 1.7627471740390860504652186499596;

// tau_FT = kFtLimitFactor * FWHM(g1 - 1) for sech pulses.
inline constexpr double kFtLimitFactor = 0.4048;

inline constexpr double kPi = std::numbers::pi;

}  // namespace uvac
