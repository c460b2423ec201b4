#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "config_io.hpp"
#include "refdiff/analytic_engine.hpp"
#include "refdiff/coefficient_transforms.hpp"
#include "refdiff/errors.hpp"
#include "refdiff/local_time_and_verify.hpp"
#include "refdiff/path_simulator.hpp"

namespace refdiff::cli {

using nlohmann::json;

namespace {

/// Exit with a code and a message already formatted for the user.
struct Failure {
    int code;
    std::string message;
};

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Failure{kExitUsage, "cannot read config file " + path};
    }
    std::stringstream buf;
    buf << in.rdbuf();
    json doc;
    try {
        doc = json::parse(buf.str());
    } catch (const json::parse_error& e) {
        throw Failure{kExitUsage, path + ": malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what()};
    }
    try {
        return parse_run_config(doc);
    } catch (const ConfigError& e) {
        throw Failure{kExitUsage, path + ": " + e.what()};
    } catch (const json::exception& e) {
        throw Failure{kExitUsage, path + ": " + e.what()};
    }
}

/// Builds the field, reporting every violation on failure.
CoefficientField build_field(const RunConfig& rc) {
    CoefficientField field(rc.domain, rc.segments);
    const ValidationReport report = validate(field);
    if (!report.empty()) {
        std::string msg = "coefficient field failed validation:";
        for (const auto& v : report) {
            msg += "\n  - " + v.message;
        }
        throw Failure{kExitValidation, msg};
    }
    return field;
}

class Sink {
public:
    Sink(const std::optional<std::string>& path, std::ostream& fallback) {
        if (path) {
            file_ = std::make_unique<std::ofstream>(*path, std::ios::binary | std::ios::trunc);
            if (!*file_) {
                throw Failure{kExitUsage, "cannot write " + *path};
            }
        }
        os_ = file_ ? file_.get() : &fallback;
    }
    std::ostream& get() { return *os_; }
    void close(const std::optional<std::string>& path) {
        if (file_) {
            file_->close();
            if (!*file_) {
                throw Failure{kExitUsage, "failed writing " + *path};
            }
        }
    }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* os_;
};

void write_text(const std::optional<std::string>& path, std::ostream& fallback, const std::string& text) {
    Sink s(path, fallback);
    s.get() << text;
    s.close(path);
}

std::vector<double> grid_points(const GridSpec& g) {
    std::vector<double> xs(g.count);
    const double step = (g.max - g.min) / static_cast<double>(g.count - 1);
    for (std::size_t i = 0; i < g.count; ++i) {
        xs[i] = i + 1 == g.count ? g.max : g.min + step * static_cast<double>(i);
    }
    return xs;
}

GridSpec resolve_grid(const std::string& flag, const std::optional<GridSpec>& from_config, GridSpec fallback) {
    if (!flag.empty()) {
        try {
            return parse_grid(flag);
        } catch (const ConfigError& e) {
            throw Failure{kExitUsage, e.what()};
        }
    }
    return from_config ? *from_config : fallback;
}

const char* scheme_name(Scheme s) {
    return s == Scheme::ProjectedEuler ? "projected_euler" : "symmetrized_euler";
}

json sim_json(const SimConfig& c) {
    json j{{"dt", c.dt},
           {"horizon", c.horizon},
           {"burn_in", c.burn_in},
           {"seed", c.seed},
           {"path_count", c.path_count},
           {"explosion_bound", c.explosion_bound},
           {"scheme", scheme_name(c.scheme)}};
    j["initial_state"] = c.initial_state ? json(*c.initial_state) : json(nullptr);
    return j;
}

// ---------------------------------------------------------------------------

struct SimFlags {
    std::optional<std::size_t> paths;
    std::optional<double> dt;
    std::optional<double> horizon;
    std::optional<double> burn_in;
    std::optional<std::uint64_t> seed;
    std::optional<double> x0;
    std::string scheme;

    void add_to(CLI::App* app, bool with_start) {
        app->add_option("--paths", paths, "Number of paths");
        app->add_option("--dt", dt, "Time step");
        app->add_option("--horizon", horizon, "Simulated time span");
        app->add_option("--burn-in", burn_in, "Discarded initial time");
        app->add_option("--seed", seed, "RNG seed (u64)");
        if (with_start) {
            app->add_option("--x0", x0, "Fixed driver start (default: stationary draw)");
            app->add_option("--scheme", scheme, "symmetrized_euler | projected_euler")
                ->check(CLI::IsMember({"symmetrized_euler", "projected_euler"}));
        }
    }

    SimConfig apply(SimConfig c) const {
        if (paths) c.path_count = *paths;
        if (dt) c.dt = *dt;
        if (horizon) c.horizon = *horizon;
        if (burn_in) c.burn_in = *burn_in;
        if (seed) c.seed = *seed;
        if (x0) c.initial_state = *x0;
        if (scheme == "projected_euler") c.scheme = Scheme::ProjectedEuler;
        if (scheme == "symmetrized_euler") c.scheme = Scheme::SymmetrizedEuler;
        try {
            check_config(c);
        } catch (const std::invalid_argument& e) {
            throw Failure{kExitUsage, std::string("invalid simulation settings: ") + e.what()};
        }
        return c;
    }
};

int cmd_analyze(const std::string& config, const std::string& grid_flag, std::optional<std::string> report,
                std::optional<std::string> csv, std::ostream& out) {
    const RunConfig rc = load_config(config);
    const CoefficientField field = build_field(rc);
    const AnalyticProfile profile(field);
    if (!report) report = rc.outputs.report;
    if (!csv) csv = rc.outputs.csv;

    const bool recurrent = profile.classify_recurrence() == Recurrence::Recurrent;
    const bool positive = profile.positive_recurrent();
    json j;
    j["domain"] = to_json(field.domain());
    j["recurrence"] = to_string(profile.classify_recurrence());
    j["positive_recurrent"] = positive;
    j["eta_upper"] = profile.scale_upper_limit();
    if (field.domain().kind == DomainKind::FullLine) {
        j["eta_lower"] = profile.scale_lower_limit();
    }
    if (recurrent) {
        j["C"] = profile.normalizing_constant();
    }
    if (positive && field.domain().kind != DomainKind::FullLine) {
        const RegulatorExpectations e = profile.regulator_expectations();
        j["ey0"] = e.ey0;
        if (e.eya) {
            j["eya"] = *e.eya;
        }
    }

    if (csv) {
        const double hi = field.domain().kind == DomainKind::Interval ? field.domain().a : 5.0;
        const double lo = field.domain().kind == DomainKind::FullLine ? -5.0 : 0.0;
        const GridSpec g = resolve_grid(grid_flag, rc.grid, GridSpec{lo, hi, 101});
        const std::vector<double> xs = grid_points(g);
        for (double x : xs) {
            if (!field.domain().contains(x)) {
                throw Failure{kExitUsage, "grid point " + format_double(x) + " lies outside the domain"};
            }
        }
        std::ostringstream os;
        os << "x,beta,eta" << (recurrent ? ",h" : "") << (positive ? ",cdf" : "") << '\n';
        for (double x : xs) {
            os << format_double(x) << ',' << format_double(profile.field().beta(x)) << ','
               << format_double(profile.scale_function(x));
            if (recurrent) os << ',' << format_double(profile.stationary_density(x));
            if (positive) os << ',' << format_double(profile.stationary_cdf(x));
            os << '\n';
        }
        write_text(csv, out, os.str());
    }
    write_text(report, out, dump_json(j));
    return kExitOk;
}

void require_start(const CoefficientField& field, const SimConfig& cfg) {
    if (!cfg.initial_state && !AnalyticProfile(field).positive_recurrent()) {
        throw Failure{kExitValidation,
                      "no stationary law to start from; set sim.initial_state or pass --x0"};
    }
}

int cmd_simulate(const std::string& config, const SimFlags& flags, std::optional<std::string> out_path,
                 std::optional<std::string> traj_path, std::size_t traj_paths, std::ostream& out) {
    const RunConfig rc = load_config(config);
    const CoefficientField field = build_field(rc);
    const SimConfig cfg = flags.apply(rc.sim);
    require_start(field, cfg);
    if (!out_path) out_path = rc.outputs.out;
    if (!traj_path) traj_path = rc.outputs.trajectory;

    EnsembleOptions eo;
    eo.snapshot_times = {cfg.horizon};
    const EnsembleResult ens = run_ensemble(field, cfg, eo);
    const bool interval = field.domain().kind == DomainKind::Interval;

    std::ostringstream os;
    os << "path,z_start,z_end,x_end,y_net,y0" << (interval ? ",ya" : "") << ",exploded,explosion_time\n";
    for (std::size_t i = 0; i < ens.paths.size(); ++i) {
        const PathSummary& p = ens.paths[i];
        os << i << ',' << format_double(p.z_start) << ',' << format_double(p.exploded ? NAN : p.z_end) << ','
           << format_double(p.exploded ? NAN : p.x_end) << ',' << format_double(p.exploded ? NAN : p.y_net_at[0])
           << ',' << format_double(p.exploded ? NAN : p.y0_at[0]);
        if (interval) os << ',' << format_double(p.exploded ? NAN : p.ya_at[0]);
        os << ',' << (p.exploded ? 1 : 0) << ',' << format_double(p.explosion_time) << '\n';
    }
    write_text(out_path, out, os.str());

    if (traj_path) {
        std::ostringstream ts;
        ts << "path,time,x_raw,z,y_net\n";
        const std::size_t n = std::min(traj_paths, cfg.path_count);
        for (std::size_t i = 0; i < n; ++i) {
            const PathSample p = simulate(field, cfg, i);
            for (std::size_t k = 0; k < p.times.size(); ++k) {
                ts << i << ',' << format_double(p.times[k]) << ',' << format_double(p.x_raw[k]) << ','
                   << format_double(p.z[k]) << ',' << format_double(p.y_net[k]) << '\n';
            }
        }
        write_text(traj_path, out, ts.str());
    }
    if (out_path) {
        out << "simulated " << cfg.path_count << " paths (" << ens.exploded_count << " exploded) -> " << *out_path
            << '\n';
    }
    return kExitOk;
}

json report_json(const CoefficientField& field, const SimConfig& cfg, const VerificationReport& r) {
    json j;
    j["field"] = field_to_json(field.domain(), field.segments());
    json sim = sim_json(cfg);
    sim.erase("initial_state");
    j["sim"] = sim;
    j["sample_size"] = r.sample_size;
    j["exploded"] = r.exploded;
    j["window"] = {r.window_start, r.window_end};
    j["ks_distance"] = r.ks_distance;
    j["ks_threshold"] = r.ks_threshold;
    j["ks_passed"] = r.ks_passed;
    json regs = json::array();
    for (const auto& c : r.regulators) {
        regs.push_back({{"boundary", c.boundary},
                        {"mean", c.mean},
                        {"se", c.se},
                        {"target", c.target},
                        {"tolerance", c.tolerance},
                        {"passed", c.passed}});
    }
    j["regulator_estimates"] = regs;
    if (r.ratio) {
        j["regulator_ratio"] = {{"estimate", r.ratio->estimate},
                                {"se", r.ratio->se},
                                {"target", r.ratio->target},
                                {"tolerance", r.ratio->tolerance},
                                {"passed", r.ratio->passed}};
    }
    json lts = json::array();
    for (const auto& c : r.localtime_checks) {
        lts.push_back({{"name", c.name},
                       {"level", c.level},
                       {"estimate", c.estimate},
                       {"target", c.target},
                       {"tolerance", c.tolerance},
                       {"passed", c.passed}});
    }
    j["localtime_checks"] = lts;
    j["passed"] = r.passed;
    return j;
}

int cmd_verify(const std::string& config, const SimFlags& flags, const VerifyOptions& vo,
               std::optional<std::string> report, std::optional<std::string> hist, std::ostream& out) {
    const RunConfig rc = load_config(config);
    const CoefficientField field = build_field(rc);
    SimConfig cfg = flags.apply(rc.sim);
    cfg.initial_state.reset();
    if (!report) report = rc.outputs.report;
    if (!hist) hist = rc.outputs.hist;

    const AnalyticProfile profile(field);
    if (!profile.positive_recurrent()) {
        throw Failure{kExitValidation, "verify needs a positive recurrent field (finite C)"};
    }
    const VerificationReport r = verify_stationarity(field, cfg, vo);
    write_text(report, out, dump_json(report_json(field, cfg, r)));
    if (hist) {
        std::ostringstream os;
        os << "lo,hi,empirical_density,analytic_density\n";
        for (const auto& row : r.histogram) {
            os << format_double(row.lo) << ',' << format_double(row.hi) << ',' << format_double(row.empirical)
               << ',' << format_double(row.analytic) << '\n';
        }
        write_text(hist, out, os.str());
    }
    return r.passed ? kExitOk : kExitValidation;
}

int cmd_transform(const std::string& config, const std::string& grid_flag, std::optional<std::string> dump,
                  std::ostream& out) {
    const RunConfig rc = load_config(config);
    const CoefficientField field = build_field(rc);
    if (!dump) dump = rc.outputs.csv;
    const DomainSpec& dom = field.domain();
    if (dom.kind == DomainKind::FullLine) {
        throw Failure{kExitValidation, "transform needs a half-line or interval field"};
    }
    const ExtendedField ext = dom.kind == DomainKind::HalfLine ? symmetrize(field) : fold_extend(field);
    const GridSpec fallback = dom.kind == DomainKind::HalfLine ? GridSpec{-5.0, 5.0, 201}
                                                               : GridSpec{-dom.a, 3.0 * dom.a, 401};
    const GridSpec g = resolve_grid(grid_flag, rc.grid, fallback);
    std::ostringstream os;
    os << "x,b,sigma,beta";
    if (dom.kind == DomainKind::Interval) os << ",g";
    os << '\n';
    for (double x : grid_points(g)) {
        os << format_double(x) << ',' << format_double(ext.b(x)) << ',' << format_double(ext.sigma(x)) << ','
           << format_double(ext.beta(x));
        if (dom.kind == DomainKind::Interval) os << ',' << format_double(fold_map(dom.a, x));
        os << '\n';
    }
    write_text(dump, out, os.str());
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Reflected diffusion analysis and simulation", "refdiff"};
    app.require_subcommand(1);

    std::string config;
    std::string grid;
    std::optional<std::string> report;
    std::optional<std::string> csv;
    std::optional<std::string> out_path;
    std::optional<std::string> traj_path;
    std::optional<std::string> hist;
    std::size_t traj_paths = 1;
    SimFlags sim_flags;
    VerifyOptions vo;

    CLI::App* analyze = app.add_subcommand("analyze", "Closed-form analysis of a coefficient field");
    analyze->add_option("--config", config, "Config JSON")->required();
    analyze->add_option("--grid", grid, "Evaluation grid min:max:count");
    analyze->add_option("--report", report, "JSON report path (default stdout)");
    analyze->add_option("--csv", csv, "CSV table x,beta,eta,h,cdf");

    CLI::App* simulate_cmd = app.add_subcommand("simulate", "Simulate reflected paths");
    simulate_cmd->add_option("--config", config, "Config JSON")->required();
    sim_flags.add_to(simulate_cmd, true);
    simulate_cmd->add_option("--out", out_path, "Per-path endpoint CSV (default stdout)");
    simulate_cmd->add_option("--trajectory", traj_path, "Full-trajectory CSV");
    simulate_cmd->add_option("--trajectory-paths", traj_paths, "Paths included in the trajectory dump");

    CLI::App* verify = app.add_subcommand("verify", "Check simulated stationary behaviour against closed forms");
    verify->add_option("--config", config, "Config JSON")->required();
    SimFlags verify_flags;
    verify_flags.add_to(verify, false);
    verify->add_option("--report", report, "JSON report path (default stdout)");
    verify->add_option("--hist", hist, "Histogram CSV vs analytic density");
    verify->add_option("--ks-threshold", vo.ks_threshold, "KS ceiling");
    verify->add_option("--epsilon", vo.epsilon, "Local-time bandwidth (default 5 sigma sqrt(dt))");
    verify->add_option("--bins", vo.histogram_bins, "Histogram bins");

    CLI::App* transform = app.add_subcommand("transform", "Dump the full-line driver coefficients");
    transform->add_option("--config", config, "Config JSON")->required();
    transform->add_option("--dump", csv, "CSV path (default stdout)");
    transform->add_option("--grid", grid, "Evaluation grid min:max:count");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "refdiff: " << e.what() << '\n';
        if (app.get_subcommands().empty()) {
            err << app.help();
        }
        return kExitUsage;
    }

    try {
        if (analyze->parsed()) {
            return cmd_analyze(config, grid, report, csv, out);
        }
        if (simulate_cmd->parsed()) {
            return cmd_simulate(config, sim_flags, out_path, traj_path, traj_paths, out);
        }
        if (verify->parsed()) {
            return cmd_verify(config, verify_flags, vo, report, hist, out);
        }
        if (transform->parsed()) {
            return cmd_transform(config, grid, csv, out);
        }
    } catch (const Failure& f) {
        err << "refdiff: " << f.message << '\n';
        return f.code;
    } catch (const InvalidField& e) {
        err << "refdiff: " << e.what() << '\n';
        return kExitValidation;
    } catch (const NoStationaryLaw& e) {
        err << "refdiff: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        err << "refdiff: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "refdiff: " << e.what() << '\n';
        return kExitValidation;
    }
    return kExitUsage;
}

}  // namespace refdiff::cli
