#pragma once

#include <cmath>

#include "cspqaoa/common.hpp"

namespace cspqaoa {

/// The two variational angles of a depth-1 schedule.
struct QaoaAngles {
    double gamma = 0.0;
    double beta = 0.0;

    bool operator==(const QaoaAngles&) const = default;
};

/// Maps beta into [0, 2pi) and gamma into [0, 4pi); both enter the state only
/// through these periods.
inline QaoaAngles canonical_angles(QaoaAngles angles) {
    if (!std::isfinite(angles.gamma) || !std::isfinite(angles.beta))
        throw Error("angles must be finite");
    const double two_pi = 2.0 * M_PI;
    const double four_pi = 4.0 * M_PI;
    double beta = std::fmod(angles.beta, two_pi);
    if (beta < 0) beta += two_pi;
    double gamma = std::fmod(angles.gamma, four_pi);
    if (gamma < 0) gamma += four_pi;
    return {gamma, beta};
}

}  // namespace cspqaoa
