#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "photofeedback/analysis.hpp"

namespace photofeedback {

namespace {

std::vector<double> project(std::vector<double> x, const std::vector<double>& lo,
                            const std::vector<double>& hi) {
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = std::clamp(x[i], lo[i], hi[i]);
    return x;
}

} // namespace

CalibrationResult calibrate(const std::vector<double>& initial,
                            const std::vector<double>& lower,
                            const std::vector<double>& upper,
                            const std::vector<CalibrationTarget>& targets,
                            const CalibrateOptions& opts) {
    const std::size_t n = initial.size();
    if (lower.size() != n || upper.size() != n)
        throw std::invalid_argument("calibrate: bound size mismatch");
    for (std::size_t i = 0; i < n; ++i)
        if (lower[i] > upper[i])
            throw std::invalid_argument("calibrate: lower bound exceeds upper");
    if (targets.empty())
        throw std::invalid_argument("calibrate: no targets");

    int evaluations = 0;
    auto objective = [&](const std::vector<double>& x) {
        ++evaluations;
        double sum = 0.0;
        for (const auto& t : targets) {
            double scale = std::max(std::abs(t.target), 1e-12);
            double r = t.weight * (t.evaluate(x) - t.target) / scale;
            sum += r * r;
        }
        return sum;
    };

    // Initial simplex: start point plus one perturbed vertex per dimension.
    std::vector<std::vector<double>> verts;
    verts.push_back(project(initial, lower, upper));
    for (std::size_t i = 0; i < n; ++i) {
        auto v = verts[0];
        double span = upper[i] - lower[i];
        double step = opts.simplex_scale *
                      (std::abs(v[i]) > 1e-12 ? std::abs(v[i]) : span > 0 ? span : 1.0);
        v[i] += step;
        if (v[i] > upper[i]) v[i] = verts[0][i] - step;
        verts.push_back(project(std::move(v), lower, upper));
    }
    std::vector<double> f(verts.size());
    for (std::size_t i = 0; i < verts.size(); ++i) f[i] = objective(verts[i]);

    auto order = [&] {
        std::vector<std::size_t> idx(verts.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(),
                  [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
        std::vector<std::vector<double>> v2;
        std::vector<double> f2;
        for (auto i : idx) {
            v2.push_back(verts[i]);
            f2.push_back(f[i]);
        }
        verts = std::move(v2);
        f = std::move(f2);
    };
    order();

    while (evaluations < opts.max_evaluations) {
        if (f.back() - f.front() < opts.tolerance) break;

        std::vector<double> centroid(n, 0.0);
        for (std::size_t v = 0; v + 1 < verts.size(); ++v)
            for (std::size_t i = 0; i < n; ++i) centroid[i] += verts[v][i];
        for (auto& c : centroid) c /= (double)n;

        auto blend = [&](double coeff) {
            std::vector<double> x(n);
            for (std::size_t i = 0; i < n; ++i)
                x[i] = centroid[i] + coeff * (centroid[i] - verts.back()[i]);
            return project(std::move(x), lower, upper);
        };

        auto xr = blend(1.0);
        double fr = objective(xr);
        if (fr < f.front()) {
            auto xe = blend(2.0);
            double fe = objective(xe);
            if (fe < fr) {
                verts.back() = std::move(xe);
                f.back() = fe;
            } else {
                verts.back() = std::move(xr);
                f.back() = fr;
            }
        } else if (fr < f[f.size() - 2]) {
            verts.back() = std::move(xr);
            f.back() = fr;
        } else {
            auto xc = blend(fr < f.back() ? 0.5 : -0.5);
            double fc = objective(xc);
            if (fc < std::min(fr, f.back())) {
                verts.back() = std::move(xc);
                f.back() = fc;
            } else {
                // Shrink toward the best vertex.
                for (std::size_t v = 1; v < verts.size(); ++v) {
                    for (std::size_t i = 0; i < n; ++i)
                        verts[v][i] = verts[0][i] + 0.5 * (verts[v][i] - verts[0][i]);
                    f[v] = objective(verts[v]);
                    if (evaluations >= opts.max_evaluations) break;
                }
            }
        }
        order();
    }

    CalibrationResult out;
    out.parameters = verts.front();
    out.objective = f.front();
    out.evaluations = evaluations;
    for (const auto& t : targets) {
        double scale = std::max(std::abs(t.target), 1e-12);
        out.residuals.push_back(t.weight * (t.evaluate(out.parameters) - t.target) /
                                scale);
    }
    return out;
}

} // namespace photofeedback
