#include <cmath>
#include <stdexcept>

#include "photofeedback/analysis.hpp"

namespace photofeedback {

SpectrumResult spectrum(const std::vector<double>& times,
                        const std::vector<double>& signal,
                        SpectrumWindow window) {
    const std::size_t n = times.size();
    if (n != signal.size())
        throw std::invalid_argument("spectrum: times/signal size mismatch");
    if (n < 4) throw std::invalid_argument("spectrum: need at least 4 samples");
    const double dt = times[1] - times[0];
    for (std::size_t i = 1; i < n; ++i) {
        double step = times[i] - times[i - 1];
        if (std::abs(step - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
            throw std::invalid_argument("spectrum: non-uniform sampling");
    }

    SpectrumResult out;
    double mean = 0.0;
    for (double v : signal) mean += v;
    mean /= (double)n;
    out.dc = mean;

    std::vector<double> x(n);
    double wsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double w = 1.0;
        if (window == SpectrumWindow::hann)
            w = 0.5 * (1.0 - std::cos(2.0 * M_PI * i / (n - 1)));
        x[i] = (signal[i] - mean) * w;
        wsum += w;
    }

    // Naive DFT is plenty for the trace lengths used here and has no padding
    // or radix constraints.
    const std::size_t half = n / 2;
    out.frequency.resize(half);
    out.amplitude.resize(half);
    const double T = n * dt;
    for (std::size_t k = 1; k <= half; ++k) {
        double re = 0.0, im = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double ph = -2.0 * M_PI * (double)k * (double)i / (double)n;
            re += x[i] * std::cos(ph);
            im += x[i] * std::sin(ph);
        }
        out.frequency[k - 1] = (double)k / T;
        out.amplitude[k - 1] = 2.0 * std::sqrt(re * re + im * im) / wsum;
    }

    // Largest bin, refined by a quadratic fit through its neighbours.
    std::size_t best = 0;
    for (std::size_t k = 1; k < half; ++k)
        if (out.amplitude[k] > out.amplitude[best]) best = k;
    double peak = out.amplitude[best];
    double floor_amp = 0.0;
    for (double a : out.amplitude) floor_amp += a;
    floor_amp /= (double)half;
    out.has_harmonic = peak > 5.0 * floor_amp && peak > 0.0;
    out.f1 = out.frequency[best];
    out.f1_amplitude = peak;
    if (best > 0 && best + 1 < half) {
        double ym = out.amplitude[best - 1], y0 = peak, yp = out.amplitude[best + 1];
        double denom = ym - 2.0 * y0 + yp;
        if (std::abs(denom) > 1e-300) {
            double delta = 0.5 * (ym - yp) / denom;
            if (std::abs(delta) <= 0.5) {
                out.f1 += delta / T;
                out.f1_amplitude = y0 - 0.25 * (ym - yp) * delta;
            }
        }
    }
    return out;
}

SpectrumResult spectrum(const Trace& trace, SpectrumWindow window) {
    std::vector<double> d;
    d.reserve(trace.records.size());
    for (const auto& r : trace.records) d.push_back(r.d);
    return spectrum(trace.times, d, window);
}

OscillationMetrics oscillation_metrics(const Trace& trace) {
    OscillationMetrics m;
    const std::size_t n = trace.times.size();
    if (n < 16) return m;

    // Drop the first half as transient, then compare the two remaining
    // quarters for convergence.
    auto window_metrics = [&](std::size_t lo, std::size_t hi) {
        std::vector<double> t(trace.times.begin() + lo, trace.times.begin() + hi);
        std::vector<double> d;
        d.reserve(hi - lo);
        double mn = 1e300, mx = -1e300;
        for (std::size_t i = lo; i < hi; ++i) {
            d.push_back(trace.records[i].d);
            mn = std::min(mn, trace.records[i].d);
            mx = std::max(mx, trace.records[i].d);
        }
        auto sp = spectrum(t, d, SpectrumWindow::hann);
        return std::tuple<double, double, double>{sp.f1, 0.5 * (mx - mn), sp.dc};
    };

    auto [f_a, amp_a, dc_a] = window_metrics(n / 2, 3 * n / 4);
    auto [f_b, amp_b, dc_b] = window_metrics(3 * n / 4, n);

    m.f1 = f_b;
    m.amplitude = amp_b;
    m.dc = dc_b;
    double ref = std::max(std::abs(amp_a), std::abs(amp_b));
    m.oscillating = ref > 1e-7 && f_b > 0;
    if (m.oscillating) {
        bool f_ok = std::abs(f_a - f_b) <= 0.02 * std::max(f_a, f_b);
        bool a_ok = std::abs(amp_a - amp_b) <= 0.02 * ref;
        m.converged = f_ok && a_ok;
    } else {
        m.converged = std::abs(dc_a - dc_b) <=
                      0.02 * std::max({std::abs(dc_a), std::abs(dc_b), 1e-9});
    }
    return m;
}

HomeostasisReport homeostasis_report(const Trace& trace,
                                     const Schedule& disturbance_schedule) {
    if (disturbance_schedule.intervals.empty())
        throw std::invalid_argument("homeostasis_report: schedule has no intervals");
    double t_on = disturbance_schedule.intervals.front().first;
    double t_off = disturbance_schedule.intervals.front().second;

    HomeostasisReport rep;
    auto phase = [&](const std::string& name, double lo, double hi) {
        std::vector<double> t, d;
        for (std::size_t i = 0; i < trace.times.size(); ++i) {
            if (trace.times[i] >= lo && trace.times[i] < hi) {
                t.push_back(trace.times[i]);
                d.push_back(trace.records[i].d);
            }
        }
        PhaseReport p;
        p.name = name;
        if (t.size() >= 8) {
            auto sp = spectrum(t, d, SpectrumWindow::hann);
            p.dc = sp.dc;
            p.f1 = sp.f1;
            p.amplitude = sp.f1_amplitude;
        }
        rep.phases.push_back(p);
    };
    // Skip the first half of the pre-disturbance window as startup transient.
    phase("before", 0.5 * (trace.times.front() + t_on), t_on);
    phase("during", t_on, t_off);
    phase("after", t_off, trace.times.back() + 1e-12);

    double dc0 = std::abs(rep.phases[0].dc);
    double f0 = rep.phases[0].f1;
    for (std::size_t i = 0; i < rep.phases.size(); ++i) {
        for (std::size_t j = i + 1; j < rep.phases.size(); ++j) {
            double drift = std::abs(rep.phases[i].dc - rep.phases[j].dc) /
                           std::max(dc0, 1e-12);
            rep.dc_drift = std::max(rep.dc_drift, drift);
        }
        if (f0 > 0)
            rep.f1_shift = std::max(
                rep.f1_shift, std::abs(rep.phases[i].f1 - f0) / f0);
    }
    return rep;
}

} // namespace photofeedback
