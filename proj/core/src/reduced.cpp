#include "photofeedback/optics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace photofeedback {

double ReducedAreaModel::domain_lo() const {
    if (mode == ReducedMode::table) {
        if (table.empty()) throw std::invalid_argument("reduced model table empty");
        return table.front().first;
    }
    return -1e9;
}

double ReducedAreaModel::domain_hi() const {
    if (mode == ReducedMode::table) {
        if (table.empty()) throw std::invalid_argument("reduced model table empty");
        return table.back().first;
    }
    return 1e9;
}

double ReducedAreaModel::area(double q) const {
    switch (mode) {
    case ReducedMode::bend:
        return area_max * std::abs(std::sin(q_align - q));
    case ReducedMode::twist:
        return area_max * std::abs(std::cos(q));
    case ReducedMode::spring: {
        // Projected width of a tilted loop; 0.1 = closed-loop width fraction.
        double c = std::cos(q), s = std::sin(q);
        return area_max * std::sqrt(c * c + 0.01 * s * s);
    }
    case ReducedMode::table: {
        double qc = std::clamp(q, domain_lo(), domain_hi());
        auto it = std::lower_bound(table.begin(), table.end(), qc,
                                   [](const auto& p, double v) { return p.first < v; });
        if (it == table.begin()) return it->second;
        if (it == table.end()) return table.back().second;
        auto prev = std::prev(it);
        double t = (qc - prev->first) / (it->first - prev->first);
        return prev->second + t * (it->second - prev->second);
    }
    }
    return 0.0;
}

ReducedPower reduced_absorbed_power(const ReducedAreaModel& model, double q,
                                    double intensity, double absorptance) {
    ReducedPower out;
    if (model.mode == ReducedMode::table &&
        (q < model.domain_lo() || q > model.domain_hi()))
        out.out_of_domain = true;
    out.power = absorptance * intensity * model.area(q);
    return out;
}

double reduced_steady(const ReducedModelSystem& sys, double intensity, double q_guess) {
    // q = q0 + gain * a * I * A(q) / (h * A_max); damped fixed point with a
    // secant polish.
    auto G = [&](double q) {
        return sys.q0 + sys.gain * sys.absorptance * intensity *
                            sys.area.area(q) / (sys.heat_loss * sys.area.area_max);
    };
    double q = q_guess;
    for (int i = 0; i < 400; ++i) {
        double next = 0.5 * q + 0.5 * G(q);
        if (std::abs(next - q) < 1e-13 * (1.0 + std::abs(q))) { q = next; break; }
        q = next;
    }
    // Secant refinement of F(q) = G(q) - q.
    double q1 = q, q2 = q + 1e-7;
    double f1 = G(q1) - q1, f2 = G(q2) - q2;
    for (int i = 0; i < 50 && std::abs(f2) > 1e-15; ++i) {
        if (f2 == f1) break;
        double qn = q2 - f2 * (q2 - q1) / (f2 - f1);
        q1 = q2; f1 = f2;
        q2 = qn; f2 = G(q2) - q2;
    }
    return q2;
}

std::vector<FeedbackSign> reduced_feedback_signs(const ReducedModelSystem& sys,
                                                 const std::vector<double>& intensities,
                                                 double tol) {
    std::vector<FeedbackSign> signs;
    double q = sys.q0;
    std::vector<double> power;
    for (double I : intensities) {
        q = reduced_steady(sys, I, q);
        power.push_back(sys.absorptance * I * sys.area.area(q));
    }
    for (std::size_t k = 0; k + 1 < intensities.size(); ++k) {
        double ratio = (power[k + 1] / power[k]) / (intensities[k + 1] / intensities[k]);
        if (ratio > 1.0 + tol) signs.push_back(FeedbackSign::positive);
        else if (ratio < 1.0 - tol) signs.push_back(FeedbackSign::negative);
        else signs.push_back(FeedbackSign::none);
    }
    return signs;
}

} // namespace photofeedback
