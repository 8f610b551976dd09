#include "qgrav/elliptic.hpp"

#include <cmath>
#include <limits>

#include "qgrav/constants.hpp"
#include "qgrav/errors.hpp"

namespace qgrav::elliptic {

KE complete_KE_parameter(double m) {
    if (!(m >= 0.0) || m >= 1.0)
        throw DomainError("elliptic parameter must lie in [0, 1)");
    const double half_pi = 0.5 * constants::pi;
    if (m == 0.0) return {half_pi, half_pi};

    // a_0 = 1, g_0 = k' = sqrt(1 - m); E accumulates sum 2^(n-1) c_n^2 with
    // c_0^2 = m and c_n = (a_{n-1} - g_{n-1}) / 2.
    double a = 1.0;
    double g = std::sqrt(1.0 - m);
    double sum = 0.5 * m;
    double two_n = 0.5;
    for (int it = 0; it < 64; ++it) {
        const double c = 0.5 * (a - g);
        two_n *= 2.0;
        sum += two_n * c * c;
        const double a_next = 0.5 * (a + g);
        const double g_next = std::sqrt(a * g);
        a = a_next;
        g = g_next;
        if (std::abs(a - g) <= a * std::numeric_limits<double>::epsilon()) break;
    }
    KE out;
    out.K = half_pi / a;
    out.E = out.K * (1.0 - sum);
    return out;
}

} // namespace qgrav::elliptic
