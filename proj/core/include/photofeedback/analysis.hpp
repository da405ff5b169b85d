#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "photofeedback/dynamics.hpp"

namespace photofeedback {

// ---- Response-curve classification -----------------------------------------

enum class ResponseClass { linear, saturating, superlinear, mixed };

struct ResponseMetrics {
    ResponseClass cls = ResponseClass::mixed;
    double r_squared = 0.0;
    double initial_slope = 0.0;  // 3-point secant at the start
    double end_slope = 0.0;      // 3-point secant at the end
    double slope_ratio = 0.0;    // end / initial
};

ResponseMetrics classify_response(const ResponseCurve& curve);

std::string to_string(ResponseClass cls);

// ---- Energy barriers -------------------------------------------------------

struct EnergyBarrier {
    double barrier_1to2 = 0.0;         // J, external work to the fold point
    double barrier_2to1 = 0.0;
    std::vector<std::pair<double, double>> path_1to2; // (tip displacement m, force N)
    std::vector<std::pair<double, double>> path_2to1;
    double intensity = 0.0;            // fuel intensity, W/m^2
};

struct BarrierOptions {
    double force_cap = 1e-2;           // N
    double max_tip_step_fraction = 1.0 / 500.0; // of L per quasi-static step
};

// Quasi-static tip-force protocol: ramp a transverse tip force from stable
// state 1 until the static branch folds; barrier = integral F dd. Throws if
// the config is not bistable at the given intensity.
EnergyBarrier compute_barrier(const ScenarioConfig& config, double intensity,
                              const BarrierOptions& opts = {});

// ---- Trigger switching thresholds ------------------------------------------

struct SwitchingResult {
    double threshold = 0.0;            // minimal trigger intensity, W/m^2
    bool above_cap = false;
    int bisection_iters = 0;
};

struct SwitchingOptions {
    double intensity_cap = 2e4;        // W/m^2
    int bisection_iters = 12;
};

// Minimal trigger intensity that flips the bistable state; success means the
// system settles in the opposite state within 5 thermal time constants after
// the trigger ends. `trigger_template` supplies geometry; its intensity is
// the bisection variable.
SwitchingResult switching_threshold(const ScenarioConfig& config, double fuel_intensity,
                                    const LightField& trigger_template,
                                    double trigger_duration,
                                    const SwitchingOptions& opts = {});

// ---- Spectra and oscillation metrics ---------------------------------------

enum class SpectrumWindow { none, hann };

struct SpectrumResult {
    std::vector<double> frequency;     // Hz, bins above DC
    std::vector<double> amplitude;     // per bin
    double dc = 0.0;                   // arithmetic mean of the signal
    double f1 = 0.0;                   // first harmonic, Hz (quadratic-refined)
    double f1_amplitude = 0.0;
    bool has_harmonic = false;
};

// DFT of the mean-removed signal; throws on non-uniform sampling.
SpectrumResult spectrum(const std::vector<double>& times,
                        const std::vector<double>& signal,
                        SpectrumWindow window = SpectrumWindow::none);

SpectrumResult spectrum(const Trace& trace, SpectrumWindow window = SpectrumWindow::none);

struct OscillationMetrics {
    double f1 = 0.0;
    double amplitude = 0.0;            // half peak-to-peak after transient cut
    double dc = 0.0;
    bool oscillating = false;
    bool converged = false;            // quarters 3 and 4 agree within 2%
};

OscillationMetrics oscillation_metrics(const Trace& trace);

struct PhaseReport {
    std::string name;                  // before / during / after
    double dc = 0.0;
    double f1 = 0.0;
    double amplitude = 0.0;
};

struct HomeostasisReport {
    std::vector<PhaseReport> phases;
    double dc_drift = 0.0;             // max pairwise |DC_i - DC_j| / |DC_before|
    double f1_shift = 0.0;             // max relative f1 change vs before
};

// Splits the trace at the disturbance schedule edges into before/during/after.
HomeostasisReport homeostasis_report(const Trace& trace,
                                     const Schedule& disturbance_schedule);

// ---- Multi-unit configuration enumeration ----------------------------------

struct StableConfigurationSet {
    int unit_count = 0;
    std::vector<std::vector<int>> observed;   // settled sign vectors (+1/-1)
    std::vector<std::vector<int>> forbidden;  // complement of observed
    std::vector<std::vector<int>> unresolved; // seeds that failed to settle
    std::vector<std::vector<int>> centered;   // seeds settling with a unit near center
    std::map<std::vector<int>, SystemState> representative;
};

struct EnumerateOptions {
    double tilt = 0.1;                 // rad, per-unit seed tilt
    double settle_velocity = 1e-5;     // rad/s norm
    double sign_threshold_fraction = 0.02; // of L, minimum |d| to call a side
    double max_time_factor = 400.0;    // cap, in thermal time constants
};

StableConfigurationSet enumerate_states(const ChainConfig& chain, double intensity,
                                        const EnumerateOptions& opts = {});

// ---- Derivative-free calibration -------------------------------------------

struct CalibrationTarget {
    std::string name;
    std::function<double(const std::vector<double>&)> evaluate; // model value
    double target = 0.0;
    double weight = 1.0;
};

struct CalibrationResult {
    std::vector<double> parameters;
    std::vector<double> residuals;     // weighted, per target
    double objective = 0.0;
    int evaluations = 0;
};

struct CalibrateOptions {
    int max_evaluations = 500;
    double simplex_scale = 0.25;       // initial vertex spread, relative
    double tolerance = 1e-10;          // simplex spread stop
};

// Nelder-Mead (reflect 1, expand 2, contract 0.5, shrink 0.5) with bounds
// enforced by projection; returns best-so-far on budget exhaustion.
CalibrationResult calibrate(const std::vector<double>& initial,
                            const std::vector<double>& lower,
                            const std::vector<double>& upper,
                            const std::vector<CalibrationTarget>& targets,
                            const CalibrateOptions& opts = {});

} // namespace photofeedback
