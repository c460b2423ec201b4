// Acceptance suite. One PASS/FAIL line per criterion; exit status is the
// number of failed criteria. Every tolerance and run size is fixed below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cli.hpp"
#include "refdiff/analytic_engine.hpp"
#include "refdiff/local_time_and_verify.hpp"
#include "refdiff/path_simulator.hpp"
#include "support/corpus.hpp"
#include "support/oracle.hpp"

using namespace refdiff;
using refdiff::testing::A;
using refdiff::testing::K;
using refdiff::testing::seg;

namespace {

constexpr std::uint64_t kSeed = 42;
constexpr double kSeBand = 3.0;

// Criterion 1
constexpr double kOracleStep = 1e-5;
constexpr double kOracleFloor = 1e-14;
constexpr double kOracleRelTol = 1e-6;
constexpr double kOracleSeconds = 10.0;
constexpr int kOracleProbes = 64;

// Criteria 2 to 5
constexpr double kStatDt = 1e-4;
constexpr std::size_t kStatPaths = 10000;
constexpr double kStatHorizon = 2.0;
constexpr double kStatBurnIn = 1.0;
constexpr double kKsRbm = 0.02;
constexpr double kKsTwoLevel = 0.03;
constexpr double kKsInterval = 0.02;
constexpr double kTwoLevelC = 0.466164;
constexpr double kTwoLevelCTol = 5e-6;

// Criterion 6
constexpr double kHitDt = 1e-4;
constexpr double kHitHorizon = 100.0;
constexpr std::size_t kHitPaths = 10000;

// Criterion 7
constexpr double kLtDt = 1e-4;
constexpr std::size_t kLtPaths = 10000;
constexpr double kYDt = 1e-5;  // see README: reflected Euler carries an O(sqrt dt) bias here
constexpr std::size_t kYPaths = 10000;
constexpr double kBandwidthFactor = 5.0;  // eps = 5 sqrt(dt)
constexpr double kRefineDt[3] = {1e-2, 1e-3, 1e-4};
constexpr std::size_t kRefinePaths = 2000;

// Criterion 9
constexpr std::size_t kDetPaths = 2000;
constexpr double kDetDt = 1e-3;

int failures = 0;

void report(int id, const char* title, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %d: %s | %s\n", ok ? "PASS" : "FAIL", id, title, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

SimConfig stationary_config() {
    SimConfig c;
    c.dt = kStatDt;
    c.horizon = kStatHorizon;
    c.burn_in = kStatBurnIn;
    c.seed = kSeed;
    c.path_count = kStatPaths;
    return c;
}

CoefficientField half(std::vector<Segment> s) { return CoefficientField::validated(DomainSpec::half_line(), std::move(s)); }
CoefficientField line(std::vector<Segment> s) { return CoefficientField::validated(DomainSpec::full_line(), std::move(s)); }

// ---------------------------------------------------------------------------

void criterion1() {
    const auto t = std::chrono::steady_clock::now();
    const auto corpus = refdiff::testing::analytic_corpus();
    double worst = 0.0;
    std::string worst_at = "-";
    // B only appears through exp(B), so its error is taken against max(|B|, 1):
    // an absolute error in B is the relative error it induces in h. This
    // matters where B crosses zero away from the origin.
    auto check = [&](const std::string& where, double got, double want, double floor = 0.0) {
        const double scale = std::max(std::abs(want), floor);
        const double rel = scale == 0.0 ? std::abs(got) : std::abs(got - want) / scale;
        if (!(rel <= worst)) {
            worst = rel;
            worst_at = where;
        }
    };
    for (const auto& nf : corpus) {
        const auto& f = nf.field;
        const double lo = refdiff::testing::truncation_point(f, -1.0, kOracleFloor);
        const double hi = refdiff::testing::truncation_point(f, +1.0, kOracleFloor);
        const refdiff::testing::TrapezoidOracle o(f, lo, hi, kOracleStep);
        const AnalyticProfile p(f);
        const auto& nodes = o.nodes();
        for (int i = 0; i <= kOracleProbes; ++i) {
            const double x = nodes[(nodes.size() - 1) * static_cast<std::size_t>(i) / kOracleProbes];
            check(nf.name + " B(" + std::to_string(x) + ")", p.cumulative_beta(x), o.B(x), 1.0);
            check(nf.name + " eta(" + std::to_string(x) + ")", p.scale_function(x), o.eta(x));
            check(nf.name + " h(" + std::to_string(x) + ")", p.stationary_density(x), o.h(x));
        }
        check(nf.name + " C", p.normalizing_constant(), o.total_mass());
    }
    const double secs = seconds_since(t);
    const bool ok = corpus.size() >= 20 && worst <= kOracleRelTol && secs < kOracleSeconds;
    report(1, "analytic engine vs trapezoid oracle", ok,
           fmt("fields=%zu worst_rel=%.3g (%s) tol=%.0e time=%.2fs limit=%.0fs", corpus.size(), worst,
               worst_at.c_str(), kOracleRelTol, secs, kOracleSeconds));
}

void criterion2() {
    const auto t = std::chrono::steady_clock::now();
    const auto f = CoefficientField::constant(DomainSpec::half_line(), -1.0, 1.0);
    const AnalyticProfile p(f);
    // Closed forms: density 2 exp(-2x), C = 1/2.
    double dens_err = 0.0;
    for (int i = 0; i <= 50; ++i) {
        const double x = 0.1 * i;
        dens_err = std::max(dens_err, std::abs(p.stationary_density(x) / p.normalizing_constant() - 2.0 * std::exp(-2.0 * x)));
    }
    const bool analytic_ok = std::abs(p.normalizing_constant() - 0.5) <= 1e-14 && dens_err <= 1e-13;
    const VerificationReport r = verify_stationarity(f, stationary_config(), {.ks_threshold = kKsRbm, .se_band = kSeBand});
    const RegulatorCheck& y = r.regulators.at(0);
    const bool ok = analytic_ok && r.ks_distance <= kKsRbm && std::abs(y.mean - 1.0) <= kSeBand * y.se && r.exploded == 0;
    report(2, "reflected BM with drift -1", ok,
           fmt("C=%.17g KS=%.4f<=%.2f EY=%.4f se=%.4f target=1 time=%.1fs", p.normalizing_constant(), r.ks_distance, kKsRbm,
               y.mean, y.se, seconds_since(t)));
}

void criterion3() {
    const auto t = std::chrono::steady_clock::now();
    const auto f = half({seg(0, 1, K(-1), K(1)), seg(1, kInf, K(-2), K(1))});
    const AnalyticProfile p(f);
    const double c = p.normalizing_constant();
    const VerificationReport r = verify_stationarity(f, stationary_config(), {.ks_threshold = kKsTwoLevel, .se_band = kSeBand});
    const bool ok = std::abs(c - kTwoLevelC) <= kTwoLevelCTol && r.ks_distance <= kKsTwoLevel && r.exploded == 0;
    report(3, "two-level drift", ok,
           fmt("C=%.17g (~%.6f +/- %.0e) KS=%.4f<=%.2f time=%.1fs", c, kTwoLevelC, kTwoLevelCTol, r.ks_distance, kKsTwoLevel,
               seconds_since(t)));
}

void criterion4() {
    const auto t = std::chrono::steady_clock::now();
    const auto f = CoefficientField::constant(DomainSpec::interval(2.0), 0.0, 1.0);
    const AnalyticProfile p(f);
    const auto ey = p.regulator_expectations();
    const bool analytic_ok = std::abs(ey.ey0 - 0.25) <= 1e-15 && std::abs(*ey.eya - 0.25) <= 1e-15 &&
                             std::abs(p.stationary_cdf(0.5) - 0.25) <= 1e-15;
    const VerificationReport r = verify_stationarity(f, stationary_config(), {.ks_threshold = kKsInterval, .se_band = kSeBand});
    const RegulatorCheck& y0 = r.regulators.at(0);
    const RegulatorCheck& ya = r.regulators.at(1);
    const bool ok = analytic_ok && r.ks_distance <= kKsInterval && std::abs(y0.mean - 0.25) <= kSeBand * y0.se &&
                    std::abs(ya.mean - 0.25) <= kSeBand * ya.se && r.exploded == 0;
    report(4, "interval [0,2], zero drift", ok,
           fmt("KS=%.4f<=%.2f EY0=%.4f se=%.4f EYa=%.4f se=%.4f target=0.25 time=%.1fs", r.ks_distance, kKsInterval, y0.mean,
               y0.se, ya.mean, ya.se, seconds_since(t)));
}

void criterion5() {
    const auto t = std::chrono::steady_clock::now();
    const auto f = CoefficientField::constant(DomainSpec::interval(1.0), -1.0, 1.0);
    const VerificationReport r = verify_stationarity(f, stationary_config(), {.se_band = kSeBand});
    const double target = std::exp(-2.0);
    const RatioCheck& q = *r.ratio;
    const bool ok = std::abs(q.estimate - target) <= kSeBand * q.se && r.exploded == 0;
    report(5, "interval [0,1], drift -1, regulator ratio", ok,
           fmt("ratio=%.5f se=%.5f target=%.5f time=%.1fs", q.estimate, q.se, target, seconds_since(t)));
}

void criterion6() {
    const auto t = std::chrono::steady_clock::now();
    const auto f = CoefficientField::constant(DomainSpec::half_line(), -1.0, 1.0);  // beta = -2
    const auto exact = AnalyticProfile(f).hitting_probabilities(0.0, 1.0, 2.0);
    SimConfig cfg;
    cfg.dt = kHitDt;
    cfg.horizon = kHitHorizon;
    cfg.seed = kSeed;
    cfg.path_count = kHitPaths;
    const HittingFrequencies h = hitting_frequencies(f, cfg, 0.0, 1.0, 2.0);
    const bool ok = h.unfinished == 0 && std::abs(h.p_c_first - exact.p_c_first) <= kSeBand * h.se &&
                    std::abs(h.p_d_first - exact.p_d_first) <= kSeBand * h.se;
    report(6, "first-passage frequencies of the symmetrized driver", ok,
           fmt("P(c first)=%.4f vs %.4f  P(d first)=%.4f vs %.4f se=%.4f unfinished=%zu time=%.1fs", h.p_c_first,
               exact.p_c_first, h.p_d_first, exact.p_d_first, h.se, h.unfinished, seconds_since(t)));
}

// Per-path residuals from one ensemble. For the free driver: L0 estimate
// and Tanaka residual. For the reflected state: Y(T) - L0(T)/2.
struct Residuals {
    std::vector<double> local_time;
    std::vector<double> tanaka;
    std::vector<double> y_half_l0;
};

Residuals brownian_residuals(double dt, std::size_t paths) {
    const auto f = CoefficientField::constant(DomainSpec::full_line(), 0.0, 1.0);
    SimConfig cfg;
    cfg.dt = dt;
    cfg.horizon = 1.0;
    cfg.seed = kSeed;
    cfg.path_count = paths;
    cfg.initial_state = 0.0;
    const double eps = kBandwidthFactor * std::sqrt(dt);
    EnsembleOptions eo;
    eo.occupation = {{0.0, eps, 0.0, true}, {0.0, 0.5 * eps, 0.0, true}};
    eo.tanaka = {{0.0}};
    const EnsembleResult e = run_ensemble(f, cfg, eo);
    Residuals r;
    for (const auto& p : e.paths) {
        const double l = 2.0 * p.occupation[1] / e.windows[1].length - p.occupation[0] / e.windows[0].length;
        r.local_time.push_back(l);
        r.tanaka.push_back(p.tanaka[0] - l);
    }
    return r;
}

Residuals reflected_residuals(double dt, std::size_t paths) {
    const auto f = CoefficientField::constant(DomainSpec::half_line(), -1.0, 1.0);
    SimConfig cfg;
    cfg.dt = dt;
    cfg.horizon = 1.0;
    cfg.seed = kSeed;
    cfg.path_count = paths;
    const double eps = kBandwidthFactor * std::sqrt(dt);
    EnsembleOptions eo;
    eo.snapshot_times = {1.0};
    eo.occupation = {{0.0, eps, 0.0, false}, {0.0, 0.5 * eps, 0.0, false}};
    const EnsembleResult e = run_ensemble(f, cfg, eo);
    Residuals r;
    for (const auto& p : e.paths) {
        const double l = 2.0 * p.occupation[1] / e.windows[1].length - p.occupation[0] / e.windows[0].length;
        r.y_half_l0.push_back(p.y_net_at[0] - 0.5 * l);
    }
    return r;
}

double rms(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s / static_cast<double>(v.size()));
}

void criterion7() {
    const auto t = std::chrono::steady_clock::now();
    const Residuals bm = brownian_residuals(kLtDt, kLtPaths);
    const MeanEstimate l0 = mean_and_se(bm.local_time);
    const MeanEstimate tz = mean_and_se(bm.tanaka);
    const double target = std::sqrt(2.0 / std::numbers::pi);
    const bool l0_ok = std::abs(l0.mean - target) <= kSeBand * l0.se;
    const bool tz_ok = std::abs(tz.mean) <= kSeBand * tz.se;

    const MeanEstimate yr = mean_and_se(reflected_residuals(kYDt, kYPaths).y_half_l0);
    const bool y_ok = std::abs(yr.mean) <= kSeBand * yr.se;

    double tz_rms[3];
    double y_rms[3];
    for (int i = 0; i < 3; ++i) {
        tz_rms[i] = rms(brownian_residuals(kRefineDt[i], kRefinePaths).tanaka);
        y_rms[i] = rms(reflected_residuals(kRefineDt[i], kRefinePaths).y_half_l0);
    }
    const bool refine_ok = tz_rms[1] < tz_rms[0] && tz_rms[2] < tz_rms[1] && y_rms[1] < y_rms[0] && y_rms[2] < y_rms[1];

    report(7, "local time, Tanaka and Y = L0/2", l0_ok && tz_ok && y_ok && refine_ok,
           fmt("E L0(1)=%.4f se=%.4f target=%.4f; Tanaka resid=%.2e se=%.1e; Y-L0/2=%.2e se=%.1e (dt=%.0e); "
               "rms Tanaka %.3f>%.3f>%.3f rms Y %.3f>%.3f>%.3f; time=%.1fs",
               l0.mean, l0.se, target, tz.mean, tz.se, yr.mean, yr.se, kYDt, tz_rms[0], tz_rms[1], tz_rms[2], y_rms[0],
               y_rms[1], y_rms[2], seconds_since(t)));
}

void criterion8() {
    // Upper side recurrent iff tail beta <= 0; lower side iff tail beta >= 0.
    struct Case {
        const char* name;
        CoefficientField field;
        Recurrence expected;
    };
    const Recurrence R = Recurrence::Recurrent;
    const Recurrence T = Recurrence::Transient;
    auto mid = [] { return seg(-1, 1, A(0.2, 0.7), A(1.0, 0.1)); };
    auto hl = [](double tail_b) { return half({seg(0, 1, A(0.5, 1.0), K(0.8)), seg(1, kInf, K(tail_b), K(1.5))}); };
    auto fl = [&](double lower_b, double upper_b) {
        return line({seg(-kInf, -1, K(lower_b), K(0.7)), mid(), seg(1, kInf, K(upper_b), K(1.3))});
    };
    const std::vector<Case> table{
        {"half tail<0", hl(-0.4), R},       {"half tail=0", hl(0.0), R},       {"half tail>0", hl(0.4), T},
        {"line +,-", fl(0.5, -0.5), R},     {"line +,0", fl(0.5, 0.0), R},     {"line +,+", fl(0.5, 0.5), T},
        {"line 0,-", fl(0.0, -0.5), R},     {"line 0,0", fl(0.0, 0.0), R},     {"line 0,+", fl(0.0, 0.5), T},
        {"line -,-", fl(-0.5, -0.5), T},    {"line -,0", fl(-0.5, 0.0), T},    {"line -,+", fl(-0.5, 0.5), T},
    };
    int agree = 0;
    std::string misses;
    for (const auto& c : table) {
        if (AnalyticProfile(c.field).classify_recurrence() == c.expected) {
            ++agree;
        } else {
            misses += std::string(" ") + c.name;
        }
    }
    report(8, "recurrence classification table", agree == static_cast<int>(table.size()),
           fmt("%d/%zu agree%s", agree, table.size(), misses.empty() ? "" : (" misses:" + misses).c_str()));
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

void criterion9() {
    namespace fs = std::filesystem;
    const auto t = std::chrono::steady_clock::now();
    const fs::path dir = fs::temp_directory_path() / ("refdiff_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const fs::path cfg = dir / "config.json";
    std::ofstream(cfg) << R"({"field": {"domain": {"kind": "interval", "a": 1},
        "segments": [{"lower": 0, "upper": 1, "b": -1, "sigma": 1}]},
      "sim": {"dt": )" << kDetDt << R"(, "horizon": 2, "burn_in": 1, "path_count": )" << kDetPaths << R"(}})";

    struct Run {
        const char* threads;
        std::string report;
        std::string hist;
        int code;
    };
    std::vector<Run> runs{{"1"}, {"1"}, {"4"}, {"8"}};
    for (std::size_t i = 0; i < runs.size(); ++i) {
        ::setenv("REFDIFF_THREADS", runs[i].threads, 1);
        const fs::path rep = dir / ("r" + std::to_string(i) + ".json");
        const fs::path hist = dir / ("h" + std::to_string(i) + ".csv");
        std::ostringstream out;
        std::ostringstream err;
        runs[i].code = cli::run({"verify", "--config", cfg.string(), "--seed", std::to_string(kSeed), "--report",
                                 rep.string(), "--hist", hist.string()},
                                out, err);
        runs[i].report = slurp(rep);
        runs[i].hist = slurp(hist);
    }
    ::unsetenv("REFDIFF_THREADS");
    fs::remove_all(dir);

    bool same = !runs[0].report.empty();
    for (const auto& r : runs) {
        same = same && r.report == runs[0].report && r.hist == runs[0].hist && r.code == runs[0].code;
    }
    report(9, "verify reports identical across reruns and 1/4/8 workers", same,
           fmt("runs=%zu report_bytes=%zu exit=%d time=%.1fs", runs.size(), runs[0].report.size(), runs[0].code,
               seconds_since(t)));
}

}  // namespace

int main() {
    const std::vector<std::function<void()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                      criterion6, criterion7, criterion8, criterion9};
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        try {
            criteria[i]();
        } catch (const std::exception& ex) {
            report(static_cast<int>(i + 1), "exception", false, ex.what());
        }
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
