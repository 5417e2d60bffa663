#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace ldof::theory {

/// Asymptotic LDOF of an interior point of a locally uniform cloud.
inline constexpr double ldof_lower_bound() { return 0.5; }

/// Exponent coefficient of the false-detection bound:
///   alpha = (2/25) (1 - 1/(2c))^2 (d/(d+2))^2
/// Defined for thresholds c > 1/2; at c = 1/2 the bound degenerates
/// (alpha -> 0), consistent with the lower bound above.
inline double false_detection_alpha(std::size_t d, double c) {
    if (d < 1) throw std::invalid_argument("false_detection_alpha: d must be >= 1");
    if (!(c > 0.5))
        throw std::domain_error("false_detection_alpha: threshold c must exceed 1/2; "
                                "at c = 1/2 the bound degenerates (alpha -> 0)");
    const double shape = static_cast<double>(d) / (static_cast<double>(d) + 2.0);
    const double margin = 1.0 - 1.0 / (2.0 * c);
    return (2.0 / 25.0) * margin * margin * shape * shape;
}

/// Upper bound on the probability that a point whose k-neighborhood is
/// uniform gets LDOF > c:  exp(-alpha (k-2)), clamped to <= 1.
/// k = 2 is admitted and yields the vacuous bound 1.
inline double false_detection_bound(std::size_t k, std::size_t d, double c) {
    if (k < 2) throw std::invalid_argument("false_detection_bound: k must be >= 2");
    const double alpha = false_detection_alpha(d, c);
    const double b = std::exp(-alpha * static_cast<double>(k - 2));
    return b > 1.0 ? 1.0 : b;
}

/// Mean squared norm of a point uniform in the d-ball of radius r:
/// d/(d+2) * r^2.
inline double uniform_ball_mean_square(std::size_t d, double r) {
    if (d < 1) throw std::invalid_argument("uniform_ball_mean_square: d must be >= 1");
    if (r < 0.0) throw std::invalid_argument("uniform_ball_mean_square: r must be >= 0");
    return static_cast<double>(d) / (static_cast<double>(d) + 2.0) * r * r;
}

}  // namespace ldof::theory
