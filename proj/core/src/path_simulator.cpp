#include "refdiff/path_simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <stdexcept>
#include <string>
#include <thread>

#include "refdiff/coefficient_transforms.hpp"
#include "refdiff/errors.hpp"
#include "refdiff/random.hpp"
#include "parallel.hpp"

namespace refdiff {

std::size_t SimConfig::steps() const {
    return static_cast<std::size_t>(std::llround(horizon / dt));
}

void check_config(const SimConfig& cfg) {
    if (!(cfg.dt > 0.0) || !(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon)) {
        throw std::invalid_argument("dt and horizon must be positive and finite");
    }
    if (!(cfg.dt < cfg.horizon)) {
        throw std::invalid_argument("dt must be smaller than the horizon");
    }
    if (!(cfg.burn_in >= 0.0 && cfg.burn_in < cfg.horizon)) {
        throw std::invalid_argument("burn_in must lie in [0, horizon)");
    }
    if (cfg.path_count == 0) {
        throw std::invalid_argument("path_count must be positive");
    }
    if (!(cfg.explosion_bound > 0.0)) {
        throw std::invalid_argument("explosion_bound must be positive");
    }
}

namespace {

struct StepData {
    std::size_t k;
    double x;
    double z;
    double x_next;
    double z_next;
    double dW;
    double sigma;
    double dy0;
    double dya;
    double y_net_next;
};

struct KernelEnd {
    std::size_t steps_done = 0;
    bool exploded = false;
};

PathMode mode_for(const CoefficientField& field, Scheme scheme) {
    switch (field.domain().kind) {
        case DomainKind::FullLine:
            return PathMode::Free;
        case DomainKind::HalfLine:
            return scheme == Scheme::ProjectedEuler ? PathMode::Projected : PathMode::Symmetrized;
        case DomainKind::Interval:
            return scheme == Scheme::ProjectedEuler ? PathMode::Projected : PathMode::Folded;
    }
    return PathMode::Free;
}

/// Maps a driver value onto the circle [0, 2a).
double wrap_circle(double x, double two_a) {
    if (x >= 0.0 && x < two_a) {
        return x;
    }
    double w = x - two_a * std::floor(x / two_a);
    if (w >= two_a) {
        w = 0.0;
    }
    return w;
}

double reflect(PathMode mode, double a, double x) {
    switch (mode) {
        case PathMode::Symmetrized:
            return std::abs(x);
        case PathMode::Folded:
            return fold_map(a, x);
        case PathMode::Projected:
        case PathMode::Free:
            return x;
    }
    return x;
}

double driver_sign(PathMode mode, double a, double x) {
    switch (mode) {
        case PathMode::Symmetrized:
            return sign0(x);
        case PathMode::Folded:
            return sign0(a - x);
        case PathMode::Projected:
        case PathMode::Free:
            return 1.0;
    }
    return 1.0;
}

/// Normalizes a requested driver start for the given construction.
double prepare_start(PathMode mode, const DomainSpec& dom, double x0) {
    if (!std::isfinite(x0)) {
        throw std::invalid_argument("initial state must be finite");
    }
    if (mode == PathMode::Folded) {
        return wrap_circle(x0, 2.0 * dom.a);
    }
    if (mode == PathMode::Projected && !dom.contains(x0)) {
        throw DomainError("projected scheme needs an initial state inside the domain");
    }
    return x0;
}

/// Euler-Maruyama kernel shared by every path API. Coefficients are frozen
/// at the reflected state z_k for the whole step.
template <PathMode Mode, class Noise, class Observer>
KernelEnd run_kernel(const CoefficientField& field, double dt, std::size_t steps, double x0, double bound,
                     Noise& noise, Observer& obs) {
    const double sqdt = std::sqrt(dt);
    const double a = field.domain().a;
    const double two_a = 2.0 * a;
    const bool interval = field.domain().kind == DomainKind::Interval;

    double x = x0;
    double z = reflect(Mode, a, x);
    const double z0 = z;
    double noise_sum = 0.0;
    double drift_sum = 0.0;
    obs.start(x, z);

    for (std::size_t k = 0; k < steps; ++k) {
        const auto [b, sig] = field.at_unchecked(z);
        const double dW = sqdt * noise();
        double s = 1.0;
        double xn = 0.0;
        double zn = 0.0;
        double dy0 = 0.0;
        double dya = 0.0;
        if constexpr (Mode == PathMode::Symmetrized) {
            s = sign0(x);
            xn = x + s * b * dt + sig * dW;
            zn = std::abs(xn);
            dy0 = (zn - z) - sig * s * dW - b * dt;
        } else if constexpr (Mode == PathMode::Folded) {
            s = sign0(a - x);
            const double raw = x + s * b * dt + sig * dW;
            if (!(std::abs(raw) < bound)) {
                obs.explode(k);
                return {k, true};
            }
            xn = wrap_circle(raw, two_a);
            zn = fold_map(a, xn);
            const double dy = (zn - z) - sig * s * dW - b * dt;
            // The increment is non-zero only on steps that cross a kink of
            // the fold; attribute it to the nearer boundary.
            if (z + zn < a) {
                dy0 = dy;
            } else {
                dya = -dy;
            }
        } else if constexpr (Mode == PathMode::Projected) {
            const double raw = z + b * dt + sig * dW;
            zn = raw;
            if (zn < 0.0) {
                dy0 = -zn;
                zn = 0.0;
            }
            if (interval && zn > a) {
                dya = zn - a;
                zn = a;
            }
            xn = zn;
            if (!(std::abs(raw) < bound)) {
                obs.explode(k);
                return {k, true};
            }
        } else {
            xn = x + b * dt + sig * dW;
            zn = xn;
        }
        if (!(std::abs(xn) < bound)) {
            obs.explode(k);
            return {k, true};
        }
        noise_sum += sig * s * dW;
        drift_sum += b * dt;
        const double y_net = zn - z0 - noise_sum - drift_sum;
        obs.step(StepData{k, x, z, xn, zn, dW, sig, dy0, dya, y_net});
        x = xn;
        z = zn;
    }
    return {steps, false};
}

template <class Noise, class Observer>
KernelEnd dispatch_kernel(PathMode mode, const CoefficientField& field, double dt, std::size_t steps, double x0,
                          double bound, Noise& noise, Observer& obs) {
    switch (mode) {
        case PathMode::Symmetrized:
            return run_kernel<PathMode::Symmetrized>(field, dt, steps, x0, bound, noise, obs);
        case PathMode::Folded:
            return run_kernel<PathMode::Folded>(field, dt, steps, x0, bound, noise, obs);
        case PathMode::Projected:
            return run_kernel<PathMode::Projected>(field, dt, steps, x0, bound, noise, obs);
        case PathMode::Free:
            return run_kernel<PathMode::Free>(field, dt, steps, x0, bound, noise, obs);
    }
    return {};
}

/// Stores every grid value in a PathSample.
class Recorder {
public:
    Recorder(PathSample& out, double dt, std::size_t steps) : out_(out), dt_(dt) {
        out_.times.reserve(steps + 1);
        out_.x_raw.reserve(steps + 1);
        out_.z.reserve(steps + 1);
        out_.dW.reserve(steps);
        out_.y_net.reserve(steps + 1);
        out_.y0.reserve(steps + 1);
        out_.qv.reserve(steps + 1);
        if (out_.domain.kind == DomainKind::Interval) {
            out_.ya.reserve(steps + 1);
        }
    }

    void start(double x, double z) {
        out_.times.push_back(0.0);
        out_.x_raw.push_back(x);
        out_.z.push_back(z);
        out_.y_net.push_back(0.0);
        out_.y0.push_back(0.0);
        if (out_.domain.kind == DomainKind::Interval) {
            out_.ya.push_back(0.0);
        }
        out_.qv.push_back(0.0);
    }

    void step(const StepData& s) {
        out_.times.push_back(static_cast<double>(s.k + 1) * dt_);
        out_.x_raw.push_back(s.x_next);
        out_.z.push_back(s.z_next);
        out_.dW.push_back(s.dW);
        out_.y_net.push_back(s.y_net_next);
        out_.y0.push_back(out_.y0.back() + s.dy0);
        if (out_.domain.kind == DomainKind::Interval) {
            out_.ya.push_back(out_.ya.back() + s.dya);
        }
        out_.qv.push_back(out_.qv.back() + s.sigma * s.sigma * dt_);
    }

    void explode(std::size_t k) {
        out_.exploded = true;
        out_.explosion_time = static_cast<double>(k + 1) * dt_;
    }

private:
    PathSample& out_;
    double dt_;
};

class ReplayNoise {
public:
    explicit ReplayNoise(std::span<const double> xi) : xi_(xi) {}
    double operator()() { return xi_[i_++]; }

private:
    std::span<const double> xi_;
    std::size_t i_ = 0;
};

double draw_start(const SimConfig& cfg, const AnalyticProfile* profile, NormalStream& rng) {
    if (cfg.initial_state) {
        return *cfg.initial_state;
    }
    if (profile == nullptr) {
        throw std::logic_error("stationary start needs an analytic profile");
    }
    return profile->sample_stationary(rng.uniform_open());
}

PathSample simulate_mode(const CoefficientField& field, const SimConfig& cfg, std::uint64_t stream, PathMode mode,
                         const AnalyticProfile* profile) {
    check_config(cfg);
    std::unique_ptr<AnalyticProfile> owned;
    if (!cfg.initial_state && profile == nullptr) {
        owned = std::make_unique<AnalyticProfile>(field);
        profile = owned.get();
    }
    NormalStream rng(cfg.seed, stream);
    const double x0 = prepare_start(mode, field.domain(), draw_start(cfg, profile, rng));

    PathSample out;
    out.mode = mode;
    out.domain = field.domain();
    out.dt = cfg.dt;
    const std::size_t steps = cfg.steps();
    Recorder rec(out, cfg.dt, steps);
    dispatch_kernel(mode, field, cfg.dt, steps, x0, cfg.explosion_bound, rng, rec);
    return out;
}

void require_domain(const CoefficientField& field, DomainKind kind, const char* op) {
    const ValidationReport report = validate(field);
    if (!report.empty()) {
        throw InvalidField(describe(report));
    }
    if (field.domain().kind != kind) {
        throw std::invalid_argument(std::string(op) + ": wrong domain kind for this construction");
    }
}

}  // namespace

PathSample simulate_one_sided(const CoefficientField& field, const SimConfig& cfg, std::uint64_t stream) {
    require_domain(field, DomainKind::HalfLine, "simulate_one_sided");
    return simulate_mode(field, cfg, stream, mode_for(field, cfg.scheme), nullptr);
}

PathSample simulate_two_sided(const CoefficientField& field, const SimConfig& cfg, std::uint64_t stream) {
    require_domain(field, DomainKind::Interval, "simulate_two_sided");
    return simulate_mode(field, cfg, stream, mode_for(field, cfg.scheme), nullptr);
}

PathSample simulate_free(const CoefficientField& field, const SimConfig& cfg, std::uint64_t stream) {
    require_domain(field, DomainKind::FullLine, "simulate_free");
    return simulate_mode(field, cfg, stream, PathMode::Free, nullptr);
}

PathSample simulate(const CoefficientField& field, const SimConfig& cfg, std::uint64_t stream) {
    switch (field.domain().kind) {
        case DomainKind::HalfLine:
            return simulate_one_sided(field, cfg, stream);
        case DomainKind::Interval:
            return simulate_two_sided(field, cfg, stream);
        case DomainKind::FullLine:
            return simulate_free(field, cfg, stream);
    }
    throw std::logic_error("unknown domain");
}

PathSample simulate_driven(const CoefficientField& field, const SimConfig& cfg, double x0,
                           std::span<const double> xi) {
    const ValidationReport report = validate(field);
    if (!report.empty()) {
        throw InvalidField(describe(report));
    }
    if (!(cfg.dt > 0.0) || !(cfg.explosion_bound > 0.0)) {
        throw std::invalid_argument("dt and explosion_bound must be positive");
    }
    const PathMode mode = mode_for(field, cfg.scheme);
    PathSample out;
    out.mode = mode;
    out.domain = field.domain();
    out.dt = cfg.dt;
    Recorder rec(out, cfg.dt, xi.size());
    ReplayNoise noise(xi);
    dispatch_kernel(mode, field, cfg.dt, xi.size(), prepare_start(mode, field.domain(), x0), cfg.explosion_bound,
                    noise, rec);
    return out;
}

RegulatorSeries extract_regulator(const PathSample& path, const CoefficientField& field) {
    if (path.exploded) {
        throw PathError("extract_regulator: path exploded at t = " + std::to_string(path.explosion_time));
    }
    const double a = path.domain.a;
    const bool interval = path.domain.kind == DomainKind::Interval;
    const std::size_t n = path.steps();
    RegulatorSeries out;
    out.y_net.assign(n + 1, 0.0);
    out.y0.assign(n + 1, 0.0);
    if (interval) {
        out.ya.assign(n + 1, 0.0);
    }
    double noise_sum = 0.0;
    double drift_sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double z = path.z[k];
        const auto [b, sig] = field.at_unchecked(z);
        const double s = driver_sign(path.mode, a, path.x_raw[k]);
        noise_sum += sig * s * path.dW[k];
        drift_sum += b * path.dt;
        out.y_net[k + 1] = path.z[k + 1] - path.z[0] - noise_sum - drift_sum;

        double dy0 = 0.0;
        double dya = 0.0;
        if (path.mode == PathMode::Projected) {
            const double raw = z + b * path.dt + sig * path.dW[k];
            dy0 = raw < 0.0 ? -raw : 0.0;
            dya = (interval && raw > a) ? raw - a : 0.0;
        } else {
            const double dy = (path.z[k + 1] - z) - sig * s * path.dW[k] - b * path.dt;
            if (interval && !(z + path.z[k + 1] < a)) {
                dya = -dy;
            } else {
                dy0 = dy;
            }
        }
        out.y0[k + 1] = out.y0[k] + dy0;
        if (interval) {
            out.ya[k + 1] = out.ya[k] + dya;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Ensembles

namespace {

/// Streams one path into a PathSummary.
class SummaryObserver {
public:
    SummaryObserver(PathSummary& out, const SimConfig& cfg, const EnsembleOptions& opts,
                    const std::vector<OccupationWindow>& windows, std::vector<std::uint64_t>& hist)
        : out_(out), opts_(opts), windows_(windows), hist_(hist), dt_(cfg.dt) {
        snap_index_.reserve(opts.snapshot_times.size());
        for (double t : opts.snapshot_times) {
            snap_index_.push_back(static_cast<std::size_t>(std::llround(t / cfg.dt)));
        }
        out_.z_at.assign(snap_index_.size(), 0.0);
        out_.y_net_at.assign(snap_index_.size(), 0.0);
        out_.y0_at.assign(snap_index_.size(), 0.0);
        out_.ya_at.assign(snap_index_.size(), 0.0);
        out_.occupation.assign(opts.occupation.size(), 0.0);
        out_.tanaka.assign(opts.tanaka.size(), 0.0);
        probe_from_.reserve(opts.occupation.size());
        for (const auto& p : opts.occupation) {
            probe_from_.push_back(static_cast<std::size_t>(std::llround(p.t_from / cfg.dt)));
        }
        hist_from_ = static_cast<std::size_t>(std::llround(opts.histogram.t_from / cfg.dt));
        if (opts.histogram.bins > 0) {
            hist_width_ = (opts.histogram.hi - opts.histogram.lo) / static_cast<double>(opts.histogram.bins);
        }
    }

    void start(double x, double z) {
        out_.z_start = z;
        x0_ = x;
        record_snapshots(0, z);
    }

    void step(const StepData& s) {
        const double w = s.sigma * s.sigma * dt_;
        for (std::size_t i = 0; i < windows_.size(); ++i) {
            if (s.k >= probe_from_[i]) {
                const double state = opts_.occupation[i].on_driver ? s.x : s.z;
                if (windows_[i].contains(state)) {
                    out_.occupation[i] += w;
                }
            }
        }
        for (std::size_t i = 0; i < opts_.tanaka.size(); ++i) {
            const double l = opts_.tanaka[i].level;
            const double sg = s.x > l ? 1.0 : -1.0;
            out_.tanaka[i] -= sg * (s.x_next - s.x);
        }
        if (hist_width_ > 0.0 && s.k >= hist_from_) {
            const double pos = (s.z - opts_.histogram.lo) / hist_width_;
            if (pos >= 0.0 && pos < static_cast<double>(opts_.histogram.bins)) {
                ++hist_[static_cast<std::size_t>(pos)];
            }
        }
        y0_ += s.dy0;
        ya_ += s.dya;
        y_net_ = s.y_net_next;
        record_snapshots(s.k + 1, s.z_next);
        last_x_ = s.x_next;
        last_z_ = s.z_next;
    }

    void explode(std::size_t k) {
        out_.exploded = true;
        out_.explosion_time = static_cast<double>(k + 1) * dt_;
    }

    void finish() {
        out_.z_end = last_z_;
        out_.x_end = last_x_;
        for (std::size_t i = 0; i < opts_.tanaka.size(); ++i) {
            const double l = opts_.tanaka[i].level;
            out_.tanaka[i] += std::abs(last_x_ - l) - std::abs(x0_ - l);
        }
    }

    void set_last(double x, double z) {
        last_x_ = x;
        last_z_ = z;
    }

private:
    void record_snapshots(std::size_t k, double z) {
        for (std::size_t i = 0; i < snap_index_.size(); ++i) {
            if (snap_index_[i] == k) {
                out_.z_at[i] = z;
                out_.y_net_at[i] = y_net_;
                out_.y0_at[i] = y0_;
                out_.ya_at[i] = ya_;
            }
        }
    }

    PathSummary& out_;
    const EnsembleOptions& opts_;
    const std::vector<OccupationWindow>& windows_;
    std::vector<std::uint64_t>& hist_;
    double dt_;
    std::vector<std::size_t> snap_index_;
    std::vector<std::size_t> probe_from_;
    std::size_t hist_from_ = 0;
    double hist_width_ = 0.0;
    double x0_ = 0.0;
    double last_x_ = 0.0;
    double last_z_ = 0.0;
    double y0_ = 0.0;
    double ya_ = 0.0;
    double y_net_ = 0.0;
};

}  // namespace

std::size_t default_worker_count() {
    if (const char* env = std::getenv("REFDIFF_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) {
            return static_cast<std::size_t>(v);
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

EnsembleResult run_ensemble(const CoefficientField& field, const SimConfig& cfg, const EnsembleOptions& opts) {
    check_config(cfg);
    const ValidationReport report = validate(field);
    if (!report.empty()) {
        throw InvalidField(describe(report));
    }
    std::unique_ptr<AnalyticProfile> profile;
    if (!cfg.initial_state) {
        profile = std::make_unique<AnalyticProfile>(field);
    }

    const PathMode mode = mode_for(field, cfg.scheme);
    const std::size_t steps = cfg.steps();

    EnsembleResult result;
    result.paths.resize(cfg.path_count);
    for (const auto& p : opts.occupation) {
        if (!(p.epsilon > 0.0)) {
            throw std::invalid_argument("occupation probe needs epsilon > 0");
        }
        result.windows.emplace_back(p.on_driver ? DomainSpec::full_line() : field.domain(), p.level, p.epsilon);
    }
    std::vector<std::vector<std::uint64_t>> hist_parts(cfg.path_count);

    auto run_one = [&](std::size_t i) {
        PathSummary& summary = result.paths[i];
        std::vector<std::uint64_t>& hist = hist_parts[i];
        hist.assign(opts.histogram.bins, 0);
        NormalStream rng(cfg.seed, i);
        const double x0 = prepare_start(mode, field.domain(), draw_start(cfg, profile.get(), rng));
        SummaryObserver obs(summary, cfg, opts, result.windows, hist);
        obs.set_last(x0, reflect(mode, field.domain().a, x0));
        dispatch_kernel(mode, field, cfg.dt, steps, x0, cfg.explosion_bound, rng, obs);
        obs.finish();
    };

    const std::size_t workers = opts.threads == 0 ? default_worker_count() : opts.threads;
    detail::parallel_for(cfg.path_count, workers, run_one);

    // Reduce in path order so the result is independent of scheduling.
    result.histogram.assign(opts.histogram.bins, 0);
    for (std::size_t i = 0; i < cfg.path_count; ++i) {
        for (std::size_t b = 0; b < opts.histogram.bins; ++b) {
            result.histogram[b] += hist_parts[i][b];
        }
        if (result.paths[i].exploded) {
            ++result.exploded_count;
        }
    }
    return result;
}

FirstPassage first_passage(const CoefficientField& field, const SimConfig& cfg, std::uint64_t stream, double x0,
                           double c, double d) {
    check_config(cfg);
    if (!(c < x0 && x0 < d)) {
        throw std::invalid_argument("first_passage needs c < x0 < d");
    }
    const ValidationReport report = validate(field);
    if (!report.empty()) {
        throw InvalidField(describe(report));
    }
    const DomainKind kind = field.domain().kind;
    if (kind == DomainKind::Interval) {
        throw std::invalid_argument("first_passage supports half-line (symmetrized) and full-line drivers");
    }
    const bool sym = kind == DomainKind::HalfLine;
    const double sqdt = std::sqrt(cfg.dt);
    const std::size_t steps = cfg.steps();
    NormalStream rng(cfg.seed, stream);
    double x = x0;
    for (std::size_t k = 0; k < steps; ++k) {
        const auto [b, sig] = field.at_unchecked(sym ? std::abs(x) : x);
        const double s = sym ? sign0(x) : 1.0;
        x += s * b * cfg.dt + sig * sqdt * rng();
        const double t = static_cast<double>(k + 1) * cfg.dt;
        if (x <= c) {
            return {ExitSide::Lower, t};
        }
        if (x >= d) {
            return {ExitSide::Upper, t};
        }
    }
    return {};
}

}  // namespace refdiff
