#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "refdiff/analytic_engine.hpp"
#include "refdiff/coefficient_model.hpp"
#include "refdiff/occupation.hpp"

namespace refdiff {

enum class Scheme {
    /// Euler steps of the symmetrized / fold-extended full-line driver,
    /// mapped through |.| or the fold.
    SymmetrizedEuler,
    /// Euler step of the reflected state, then clamp into the domain; the
    /// clamp amount is the regulator increment.
    ProjectedEuler,
};

struct SimConfig {
    double dt = 1e-3;
    double horizon = 1.0;
    double burn_in = 0.0;
    std::uint64_t seed = 0;
    std::size_t path_count = 1;
    double explosion_bound = 1e6;
    Scheme scheme = Scheme::SymmetrizedEuler;
    /// Driver start. Empty means a draw from the stationary law.
    std::optional<double> initial_state;

    std::size_t steps() const;
};

/// Throws std::invalid_argument on an inconsistent configuration.
void check_config(const SimConfig& cfg);

enum class PathMode {
    Symmetrized,  // one-sided: z = |x|
    Folded,       // two-sided: z = g(x), driver on [0, 2a) with ends identified
    Projected,    // x = z, clamped into the domain
    Free,         // full line, no reflection
};

/// One simulated trajectory on the grid t_k = k dt.
///
/// y_net is z_n - z_0 - sum sigma(z_k) s_k dW_k - sum b(z_k) dt where s_k is
/// the driver sign (sgn x for the symmetrized driver, sgn(a - x) for the
/// folded one, 1 otherwise). On an interval y_net = Y_0 - Y_a and the two
/// parts are kept separately in y0 / ya.
struct PathSample {
    PathMode mode = PathMode::Symmetrized;
    DomainSpec domain;
    double dt = 0.0;
    std::vector<double> times;
    std::vector<double> x_raw;
    std::vector<double> z;
    std::vector<double> dW;  // dW[k] drives the step k -> k+1
    std::vector<double> y_net;
    std::vector<double> y0;
    std::vector<double> ya;
    std::vector<double> qv;
    bool exploded = false;
    double explosion_time = kInf;

    std::size_t steps() const { return dW.size(); }
};

PathSample simulate_one_sided(const CoefficientField& field, const SimConfig& cfg, std::uint64_t stream);
PathSample simulate_two_sided(const CoefficientField& field, const SimConfig& cfg, std::uint64_t stream);
/// Unreflected diffusion on the full line.
PathSample simulate_free(const CoefficientField& field, const SimConfig& cfg, std::uint64_t stream);
/// Dispatches on the field's domain.
PathSample simulate(const CoefficientField& field, const SimConfig& cfg, std::uint64_t stream);

/// Replays a path from given standard normal draws (dW_k = sqrt(dt) xi_k)
/// and driver start x0; cfg.horizon is ignored, the path has xi.size()
/// steps.
PathSample simulate_driven(const CoefficientField& field, const SimConfig& cfg, double x0,
                           std::span<const double> xi);

struct RegulatorSeries {
    std::vector<double> y_net;
    std::vector<double> y0;
    std::vector<double> ya;  // empty off the interval
};

/// Recomputes the regulator from the stored states and noise. Throws
/// PathError on an exploded path.
RegulatorSeries extract_regulator(const PathSample& path, const CoefficientField& field);

// ---------------------------------------------------------------------------
// Ensembles

/// Weighted occupation sum_k 1(state_k in W) sigma^2(z_k) dt over steps
/// with t_k in [t_from, horizon). on_driver probes the raw driver on the
/// full line instead of the reflected state.
struct OccupationProbe {
    double level = 0.0;
    double epsilon = 0.0;
    double t_from = 0.0;
    bool on_driver = false;
};

/// Discrete Tanaka sum |X_n - l| - |X_0 - l| - sum sgn(X_k - l)(X_{k+1} - X_k)
/// on the driver, with sgn(0) = -1.
struct TanakaProbe {
    double level = 0.0;
};

struct HistogramSpec {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t bins = 0;  // 0 disables the histogram
    double t_from = 0.0;
};

struct EnsembleOptions {
    /// Times at which z and the regulators are recorded (rounded to the grid).
    std::vector<double> snapshot_times;
    std::vector<OccupationProbe> occupation;
    std::vector<TanakaProbe> tanaka;
    HistogramSpec histogram;
    /// Worker threads; 0 uses default_worker_count().
    std::size_t threads = 0;
};

struct PathSummary {
    double z_start = 0.0;
    double z_end = 0.0;
    double x_end = 0.0;
    bool exploded = false;
    double explosion_time = kInf;
    std::vector<double> z_at;
    std::vector<double> y_net_at;
    std::vector<double> y0_at;
    std::vector<double> ya_at;
    std::vector<double> occupation;
    std::vector<double> tanaka;
};

struct EnsembleResult {
    std::vector<PathSummary> paths;  // index = path index = RNG stream
    std::vector<OccupationWindow> windows;  // one per occupation probe
    std::vector<std::uint64_t> histogram;   // pooled occupation counts
    std::size_t exploded_count = 0;
};

/// Runs cfg.path_count independent paths; path i uses RNG stream i of
/// cfg.seed. Results do not depend on the number of workers.
EnsembleResult run_ensemble(const CoefficientField& field, const SimConfig& cfg, const EnsembleOptions& opts = {});

/// Worker count: REFDIFF_THREADS if set and positive, else the machine's
/// hardware concurrency.
std::size_t default_worker_count();

enum class ExitSide { Lower, Upper, None };

struct FirstPassage {
    ExitSide side = ExitSide::None;
    double time = kInf;
};

/// Runs the field's driver (symmetrized for a half-line field, unreflected
/// for a full-line field) from x0 until it leaves (c, d) or cfg.horizon
/// elapses.
FirstPassage first_passage(const CoefficientField& field, const SimConfig& cfg, std::uint64_t stream, double x0,
                           double c, double d);

}  // namespace refdiff
