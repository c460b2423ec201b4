#include "refdiff/local_time_and_verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "parallel.hpp"
#include "refdiff/errors.hpp"
#include "refdiff/occupation.hpp"

namespace refdiff {

namespace {

double occupation(const PathSample& path, const CoefficientField& field, const std::vector<double>& states,
                  const OccupationWindow& w) {
    if (!(w.length > 0.0)) {
        return 0.0;
    }
    double acc = 0.0;
    const std::size_t n = path.steps();
    for (std::size_t k = 0; k < n; ++k) {
        if (w.contains(states[k])) {
            const double s = field.at_unchecked(path.z[k]).sigma;
            acc += s * s * path.dt;
        }
    }
    return acc / w.length;
}

void check_level(const CoefficientField& field, double x, double eps) {
    if (!(eps > 0.0)) {
        throw std::invalid_argument("local time bandwidth must be positive");
    }
    if (!field.domain().contains(x)) {
        throw std::invalid_argument("local time level outside the domain");
    }
}

}  // namespace

double estimate_local_time(const PathSample& path, const CoefficientField& field, double x, double eps) {
    check_level(field, x, eps);
    return occupation(path, field, path.z, OccupationWindow(field.domain(), x, eps));
}

double estimate_local_time_extrapolated(const PathSample& path, const CoefficientField& field, double x,
                                        double eps) {
    return 2.0 * estimate_local_time(path, field, x, 0.5 * eps) - estimate_local_time(path, field, x, eps);
}

double estimate_driver_local_time(const PathSample& path, const CoefficientField& field, double level,
                                  double eps) {
    if (!(eps > 0.0)) {
        throw std::invalid_argument("local time bandwidth must be positive");
    }
    const DomainSpec line = DomainSpec::full_line();
    return 2.0 * occupation(path, field, path.x_raw, OccupationWindow(line, level, 0.5 * eps)) -
           occupation(path, field, path.x_raw, OccupationWindow(line, level, eps));
}

double default_bandwidth(const CoefficientField& field, double x, double dt) {
    const double h = std::sqrt(dt);
    const DomainSpec& dom = field.domain();
    // Probe sigma on a few points around the level; the window has to cover
    // the one-step displacement everywhere inside it.
    double smax = field.sigma(x);
    const double reach = 5.0 * h * smax;
    for (int i = -8; i <= 8; ++i) {
        const double y = std::clamp(x + reach * i / 8.0, dom.lower(), dom.upper());
        smax = std::max(smax, field.sigma(y));
    }
    return 5.0 * smax * h;
}

double check_y_halfL0(const PathSample& path, const CoefficientField& field, double eps) {
    if (path.domain.kind != DomainKind::HalfLine) {
        throw std::invalid_argument("check_y_halfL0 needs a one-sided path");
    }
    if (path.exploded) {
        throw PathError("check_y_halfL0: path exploded");
    }
    return path.y_net.back() - 0.5 * estimate_local_time_extrapolated(path, field, 0.0, eps);
}

double tanaka_residual(const PathSample& path, const CoefficientField& field, double a, double eps) {
    if (path.exploded) {
        throw PathError("tanaka_residual: path exploded");
    }
    const auto& x = path.x_raw;
    const std::size_t n = path.steps();
    double stoch = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double sg = x[k] > a ? 1.0 : -1.0;
        stoch += sg * (x[k + 1] - x[k]);
    }
    const double lhs = std::abs(x[n] - a) - std::abs(x[0] - a) - stoch;
    return lhs - estimate_driver_local_time(path, field, a, eps);
}

double empirical_cdf(std::span<const double> samples, double x) {
    if (samples.empty()) {
        throw std::invalid_argument("empirical_cdf of an empty sample");
    }
    const auto count = std::count_if(samples.begin(), samples.end(), [x](double s) { return s <= x; });
    return static_cast<double>(count) / static_cast<double>(samples.size());
}

double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) {
        throw std::invalid_argument("ks_distance of an empty sample");
    }
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        // Ties: the empirical CDF jumps over the whole block at once.
        std::size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) {
            ++j;
        }
        const double f = cdf(sorted[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(j + 1) / n - f});
        i = j + 1;
    }
    return std::clamp(d, 0.0, 1.0);
}

MeanEstimate mean_and_se(std::span<const double> values) {
    MeanEstimate out;
    out.n = values.size();
    if (values.empty()) {
        return out;
    }
    const double n = static_cast<double>(values.size());
    out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) {
            ss += (v - out.mean) * (v - out.mean);
        }
        out.se = std::sqrt(ss / (n - 1.0) / n);
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

struct LevelProbes {
    std::size_t wide;
    std::size_t narrow;
};

double extrapolated(const PathSummary& p, const EnsembleResult& r, LevelProbes probes) {
    const double wide = p.occupation[probes.wide] / r.windows[probes.wide].length;
    const double narrow = p.occupation[probes.narrow] / r.windows[probes.narrow].length;
    return 2.0 * narrow - wide;
}

}  // namespace

VerificationReport verify_stationarity(const CoefficientField& field, const SimConfig& cfg_in,
                                       const VerifyOptions& opts) {
    const AnalyticProfile profile(field);
    if (!profile.positive_recurrent()) {
        throw NoStationaryLaw("verify_stationarity needs a positive recurrent field");
    }
    SimConfig cfg = cfg_in;
    cfg.initial_state.reset();
    check_config(cfg);

    const DomainSpec& dom = field.domain();
    const bool interval = dom.kind == DomainKind::Interval;
    const double t0 = std::max(cfg.burn_in, cfg.horizon - 1.0);
    const double t0_grid = static_cast<double>(std::llround(t0 / cfg.dt)) * cfg.dt;
    const double window = static_cast<double>(cfg.steps()) * cfg.dt - t0_grid;

    std::vector<double> levels{0.0};
    if (interval) {
        levels.push_back(dom.a);
    }
    EnsembleOptions eo;
    eo.threads = opts.threads;
    eo.snapshot_times = {t0, cfg.horizon};
    std::vector<LevelProbes> probes;
    for (double level : levels) {
        const double eps = opts.epsilon > 0.0 ? opts.epsilon : default_bandwidth(field, level, cfg.dt);
        probes.push_back({eo.occupation.size(), eo.occupation.size() + 1});
        eo.occupation.push_back({level, eps, t0, false});
        eo.occupation.push_back({level, 0.5 * eps, t0, false});
    }
    const double hist_hi = interval ? dom.a : profile.sample_stationary(0.999);
    if (opts.histogram_bins > 0) {
        eo.histogram = {0.0, hist_hi, opts.histogram_bins, t0};
    }

    const EnsembleResult ens = run_ensemble(field, cfg, eo);

    VerificationReport rep;
    rep.exploded = ens.exploded_count;
    rep.window_start = t0_grid;
    rep.window_end = t0_grid + window;
    rep.ks_threshold = opts.ks_threshold;

    std::vector<double> endpoints;
    std::vector<double> y0;
    std::vector<double> ya;
    std::vector<std::vector<double>> lt_resid(levels.size());
    for (const PathSummary& p : ens.paths) {
        if (p.exploded) {
            continue;
        }
        endpoints.push_back(p.z_end);
        const double d0 = (p.y0_at[1] - p.y0_at[0]);
        const double da = (p.ya_at[1] - p.ya_at[0]);
        y0.push_back(d0 / window);
        if (interval) {
            ya.push_back(da / window);
        }
        lt_resid[0].push_back(d0 - 0.5 * extrapolated(p, ens, probes[0]));
        if (interval) {
            lt_resid[1].push_back(da - 0.5 * extrapolated(p, ens, probes[1]));
        }
    }
    rep.sample_size = endpoints.size();
    if (endpoints.empty()) {
        rep.passed = false;
        return rep;
    }

    rep.ks_distance = ks_distance(endpoints, [&](double x) { return profile.stationary_cdf(x); });
    rep.ks_passed = rep.ks_distance <= opts.ks_threshold;

    const RegulatorExpectations target = profile.regulator_expectations();
    auto regulator_check = [&](const char* name, const std::vector<double>& v, double tgt) {
        const MeanEstimate m = mean_and_se(v);
        RegulatorCheck c{name, m.mean, m.se, tgt, opts.se_band * m.se, false};
        c.passed = std::abs(m.mean - tgt) <= c.tolerance;
        return c;
    };
    rep.regulators.push_back(regulator_check("0", y0, target.ey0));
    if (interval) {
        rep.regulators.push_back(regulator_check("a", ya, *target.eya));

        // Delta-method SE of the ratio of means.
        const MeanEstimate m0 = mean_and_se(y0);
        const MeanEstimate ma = mean_and_se(ya);
        const double n = static_cast<double>(y0.size());
        double cov = 0.0;
        for (std::size_t i = 0; i < y0.size(); ++i) {
            cov += (y0[i] - m0.mean) * (ya[i] - ma.mean);
        }
        cov /= (n - 1.0) * n;
        RatioCheck r;
        r.estimate = ma.mean / m0.mean;
        const double rel = ma.se * ma.se / (ma.mean * ma.mean) + m0.se * m0.se / (m0.mean * m0.mean) -
                           2.0 * cov / (ma.mean * m0.mean);
        r.se = std::abs(r.estimate) * std::sqrt(std::max(rel, 0.0));
        r.target = *target.eya / target.ey0;
        r.tolerance = opts.se_band * r.se;
        r.passed = std::abs(r.estimate - r.target) <= r.tolerance;
        rep.ratio = r;
    }

    for (std::size_t i = 0; i < levels.size(); ++i) {
        const MeanEstimate m = mean_and_se(lt_resid[i]);
        LocalTimeCheck c{i == 0 ? "Y0 - L0/2" : "Ya - La/2", levels[i], m.mean, 0.0, opts.se_band * m.se, false};
        c.passed = std::abs(c.estimate) <= c.tolerance;
        rep.localtime_checks.push_back(c);
    }

    if (opts.histogram_bins > 0) {
        const std::size_t k0 = static_cast<std::size_t>(std::llround(t0 / cfg.dt));
        const double total = static_cast<double>(rep.sample_size) * static_cast<double>(cfg.steps() - k0);
        const double width = hist_hi / static_cast<double>(opts.histogram_bins);
        for (std::size_t b = 0; b < opts.histogram_bins; ++b) {
            HistogramRow row;
            row.lo = width * static_cast<double>(b);
            row.hi = b + 1 == opts.histogram_bins ? hist_hi : width * static_cast<double>(b + 1);
            row.empirical = static_cast<double>(ens.histogram[b]) / (total * width);
            row.analytic = (profile.stationary_cdf(row.hi) - profile.stationary_cdf(row.lo)) / (row.hi - row.lo);
            rep.histogram.push_back(row);
        }
    }

    bool ok = rep.ks_passed && rep.exploded == 0;
    for (const auto& c : rep.regulators) {
        ok = ok && c.passed;
    }
    if (rep.ratio) {
        ok = ok && rep.ratio->passed;
    }
    for (const auto& c : rep.localtime_checks) {
        ok = ok && c.passed;
    }
    rep.passed = ok;
    return rep;
}

HittingFrequencies hitting_frequencies(const CoefficientField& field, const SimConfig& cfg, double c, double x,
                                       double d, std::size_t threads) {
    check_config(cfg);
    std::vector<ExitSide> sides(cfg.path_count, ExitSide::None);
    detail::parallel_for(cfg.path_count, threads == 0 ? default_worker_count() : threads,
                         [&](std::size_t i) { sides[i] = first_passage(field, cfg, i, x, c, d).side; });
    HittingFrequencies out;
    out.paths = cfg.path_count;
    std::size_t lower = 0;
    std::size_t upper = 0;
    for (ExitSide s : sides) {
        lower += s == ExitSide::Lower;
        upper += s == ExitSide::Upper;
    }
    out.unfinished = cfg.path_count - lower - upper;
    const double n = static_cast<double>(cfg.path_count);
    out.p_c_first = static_cast<double>(lower) / n;
    out.p_d_first = static_cast<double>(upper) / n;
    out.se = std::sqrt(out.p_c_first * (1.0 - out.p_c_first) / n);
    return out;
}

}  // namespace refdiff
