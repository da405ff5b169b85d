#include <cmath>
#include <stdexcept>

#include "photofeedback/analysis.hpp"

namespace photofeedback {

std::string to_string(ResponseClass cls) {
    switch (cls) {
        case ResponseClass::linear: return "linear";
        case ResponseClass::saturating: return "saturating";
        case ResponseClass::superlinear: return "superlinear";
        default: return "mixed";
    }
}

ResponseMetrics classify_response(const ResponseCurve& curve) {
    const auto& x = curve.parameter;
    const auto& y = curve.observable;
    if (x.size() < 5)
        throw std::invalid_argument("classify_response: need at least 5 points");

    ResponseMetrics m;

    // R^2 of a least-squares straight line through the curve.
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double denom = n * sxx - sx * sx;
    double slope = denom != 0 ? (n * sxy - sx * sy) / denom : 0.0;
    double icept = (sy - slope * sx) / n;
    double ss_res = 0, ss_tot = 0, ybar = sy / n;
    for (std::size_t i = 0; i < n; ++i) {
        double e = y[i] - (icept + slope * x[i]);
        ss_res += e * e;
        ss_tot += (y[i] - ybar) * (y[i] - ybar);
    }
    m.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;

    // 3-point secants at both ends.
    m.initial_slope = (y[2] - y[0]) / (x[2] - x[0]);
    m.end_slope = (y[n - 1] - y[n - 3]) / (x[n - 1] - x[n - 3]);
    m.slope_ratio = m.initial_slope != 0 ? m.end_slope / m.initial_slope
                                         : std::numeric_limits<double>::infinity();

    if (m.r_squared > 0.99)
        m.cls = ResponseClass::linear;
    else if (m.slope_ratio < 0.2)
        m.cls = ResponseClass::saturating;
    else if (m.slope_ratio > 2.0)
        m.cls = ResponseClass::superlinear;
    else
        m.cls = ResponseClass::mixed;
    return m;
}

} // namespace photofeedback
