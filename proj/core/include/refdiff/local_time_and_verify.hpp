#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "refdiff/analytic_engine.hpp"
#include "refdiff/coefficient_model.hpp"
#include "refdiff/path_simulator.hpp"

namespace refdiff {

// ---------------------------------------------------------------------------
// Local time

/// Occupation-density estimate of the local time of the reflected state at
/// level x over the whole path:
///
///   sum_k 1(z_k in W) sigma^2(z_k) dt / |W|,   W = (x - eps, x + eps) ∩ domain.
///
/// Away from the boundary |W| = 2 eps. At a reflecting boundary only the
/// inner half of the window exists, so the estimate is the right-continuous
/// local time there (twice the regulator). Throws std::invalid_argument for
/// eps <= 0 or x outside the domain.
double estimate_local_time(const PathSample& path, const CoefficientField& field, double x, double eps);

/// 2 L(eps/2) - L(eps). The box window has an O(eps) bias wherever the
/// expected local time has a kink in the level (at a boundary or at the
/// start point); the combination cancels it.
double estimate_local_time_extrapolated(const PathSample& path, const CoefficientField& field, double x,
                                        double eps);

/// Same estimate on the unreflected driver x_raw, with a symmetric window on
/// the full line.
double estimate_driver_local_time(const PathSample& path, const CoefficientField& field, double level, double eps);

/// Default bandwidth 5 sigma_max sqrt(dt), sigma_max over [x - 5 sqrt(dt) sigma(x), ...]
/// sampled near the level.
double default_bandwidth(const CoefficientField& field, double x, double dt);

/// Y(T) - L_0(T) / 2 for a one-sided path (extrapolated estimator).
double check_y_halfL0(const PathSample& path, const CoefficientField& field, double eps);

/// |X_n - a| - |X_0 - a| - sum_k sgn(X_k - a)(X_{k+1} - X_k) - L_a on the
/// driver, sgn(0) = -1, L_a by the extrapolated driver estimator. Throws
/// PathError on an exploded path.
double tanaka_residual(const PathSample& path, const CoefficientField& field, double a, double eps);

// ---------------------------------------------------------------------------
// Distribution checks

/// Fraction of samples <= x. Throws std::invalid_argument when empty.
double empirical_cdf(std::span<const double> samples, double x);

/// sup |F_n - F| by the order-statistics formula. Throws
/// std::invalid_argument when empty.
double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf);

struct MeanEstimate {
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

MeanEstimate mean_and_se(std::span<const double> values);

// ---------------------------------------------------------------------------
// Stationarity verification

struct RegulatorCheck {
    std::string boundary;  // "0" or "a"
    double mean = 0.0;     // per unit time over the window
    double se = 0.0;
    double target = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

struct RatioCheck {
    double estimate = 0.0;
    double se = 0.0;
    double target = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

struct LocalTimeCheck {
    std::string name;
    double level = 0.0;
    double estimate = 0.0;  // mean residual
    double target = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

struct HistogramRow {
    double lo = 0.0;
    double hi = 0.0;
    double empirical = 0.0;  // density
    double analytic = 0.0;   // bin-averaged stationary density
};

struct VerifyOptions {
    double ks_threshold = 0.02;
    double se_band = 3.0;
    /// Local-time bandwidth; 0 selects default_bandwidth at each level.
    double epsilon = 0.0;
    std::size_t histogram_bins = 50;
    /// Worker threads; 0 uses default_worker_count().
    std::size_t threads = 0;
};

struct VerificationReport {
    std::size_t sample_size = 0;
    std::size_t exploded = 0;
    double window_start = 0.0;
    double window_end = 0.0;
    double ks_distance = 0.0;
    double ks_threshold = 0.0;
    bool ks_passed = false;
    std::vector<RegulatorCheck> regulators;
    std::optional<RatioCheck> ratio;
    std::vector<LocalTimeCheck> localtime_checks;
    std::vector<HistogramRow> histogram;
    bool passed = false;
};

/// Runs a stationary-start ensemble and compares it with the analytic
/// profile. The endpoint law is tested by KS, regulator rates over
/// [max(burn_in, horizon - 1), horizon] against the closed forms (3 SE), and
/// Y = L_0 / 2 (and Y_a = L_a / 2 on an interval) by the mean residual.
/// cfg.initial_state is ignored. Throws NoStationaryLaw unless the profile
/// is positive recurrent.
VerificationReport verify_stationarity(const CoefficientField& field, const SimConfig& cfg,
                                       const VerifyOptions& opts = {});

// ---------------------------------------------------------------------------
// Hitting frequencies

struct HittingFrequencies {
    double p_c_first = 0.0;
    double p_d_first = 0.0;
    double se = 0.0;  // binomial SE, shared by both
    std::size_t paths = 0;
    std::size_t unfinished = 0;  // paths still inside (c, d) at the horizon
};

/// Monte Carlo exit frequencies of (c, d) from x; path i uses stream i.
HittingFrequencies hitting_frequencies(const CoefficientField& field, const SimConfig& cfg, double c, double x,
                                       double d, std::size_t threads = 0);

}  // namespace refdiff
