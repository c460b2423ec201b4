#include "refdiff/analytic_engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "refdiff/errors.hpp"
#include "refdiff/quadrature.hpp"

namespace refdiff {

const char* to_string(Recurrence r) {
    return r == Recurrence::Recurrent ? "recurrent" : "transient";
}

namespace {

/// expm1(z) / z, continuous at 0.
double relative_expm1(double z) {
    if (std::abs(z) < 1e-300) {
        return 1.0;
    }
    return std::expm1(z) / z;
}

/// (log(1+d) - d/(1+d)) / d^2, the shape factor of int tau/(s0 + sq tau)^2.
double log_shape(double d) {
    if (std::abs(d) < 1e-2) {
        double sum = 0.0;
        double pw = 1.0;
        for (int k = 0; k < 10; ++k) {
            const double term = static_cast<double>(k + 1) / static_cast<double>(k + 2) * pw;
            sum += (k % 2 == 0) ? term : -term;
            pw *= d;
        }
        return sum;
    }
    return (std::log1p(d) - d / (1.0 + d)) / (d * d);
}

double slope_of(const FuncSpec& f, double lo, double hi) {
    switch (f.kind) {
        case FuncKind::Constant:
            return 0.0;
        case FuncKind::Affine:
            return f.c1;
        case FuncKind::Table:
            return (f(hi) - f(lo)) / (hi - lo);
    }
    return 0.0;
}

constexpr double kQuadTol = 1e-10;

}  // namespace

AnalyticProfile::AnalyticProfile(CoefficientField field) : field_(std::move(field)) {
    const ValidationReport report = validate(field_);
    if (!report.empty()) {
        throw InvalidField(describe(report));
    }

    for (const Segment& seg : field_.segments()) {
        std::vector<double> cuts{seg.lower};
        auto kb = seg.b.kinks_inside(seg.lower, seg.upper);
        auto ks = seg.sigma.kinks_inside(seg.lower, seg.upper);
        cuts.insert(cuts.end(), kb.begin(), kb.end());
        cuts.insert(cuts.end(), ks.begin(), ks.end());
        if (seg.lower < 0.0 && seg.upper > 0.0) {
            cuts.push_back(0.0);
        }
        cuts.push_back(seg.upper);
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            Piece p{};
            p.lo = cuts[i];
            p.hi = cuts[i + 1];
            p.ref = p.lo >= 0.0 ? p.lo : p.hi;
            p.b0 = seg.b(p.ref);
            p.s0 = seg.sigma(p.ref);
            const bool bounded = std::isfinite(p.lo) && std::isfinite(p.hi);
            p.bn = bounded ? slope_of(seg.b, p.lo, p.hi) : 0.0;
            p.sq = bounded ? slope_of(seg.sigma, p.lo, p.hi) : 0.0;
            p.constant_beta = p.bn == 0.0 && p.sq == 0.0;
            p.beta_const = 2.0 * p.b0 / (p.s0 * p.s0);
            pieces_.push_back(p);
        }
    }

    // Accumulate outward from the origin so every cached value is an
    // integral that starts at 0.
    std::size_t first_pos = 0;
    while (first_pos < pieces_.size() && pieces_[first_pos].lo < 0.0) {
        ++first_pos;
    }
    for (std::size_t i = first_pos; i < pieces_.size(); ++i) {
        Piece& p = pieces_[i];
        if (i == first_pos) {
            p.B_ref = p.eta_ref = p.mass_ref = 0.0;
            continue;
        }
        const Piece& prev = pieces_[i - 1];
        const double t = prev.hi - prev.ref;
        p.B_ref = prev.B_ref + beta_integral(prev, t);
        p.eta_ref = prev.eta_ref + eta_integral(prev, t);
        p.mass_ref = prev.mass_ref + mass_integral(prev, t);
    }
    for (std::size_t j = first_pos; j-- > 0;) {
        Piece& p = pieces_[j];
        if (j + 1 == first_pos) {
            p.B_ref = p.eta_ref = p.mass_ref = 0.0;
            continue;
        }
        const Piece& next = pieces_[j + 1];
        const double t = next.lo - next.ref;
        p.B_ref = next.B_ref + beta_integral(next, t);
        p.eta_ref = next.eta_ref + eta_integral(next, t);
        p.mass_ref = next.mass_ref + mass_integral(next, t);
    }

    const DomainSpec& dom = field_.domain();
    const Piece& top = pieces_.back();
    if (dom.kind == DomainKind::Interval) {
        const double t = top.hi - top.ref;
        eta_upper_ = top.eta_ref + eta_integral(top, t);
        mass_upper_ = top.mass_ref + mass_integral(top, t);
    } else {
        // Unbounded tails are constant, so both limits are symbolic.
        const double beta = top.beta_const;
        eta_upper_ = beta > 0.0 ? top.eta_ref + std::exp(-top.B_ref) / beta : kInf;
        mass_upper_ = beta < 0.0 ? top.mass_ref + std::exp(top.B_ref) / (top.s0 * top.s0 * -beta) : kInf;
    }
    if (dom.kind == DomainKind::FullLine) {
        const Piece& bottom = pieces_.front();
        const double beta = bottom.beta_const;
        eta_lower_ = beta < 0.0 ? bottom.eta_ref + std::exp(-bottom.B_ref) / beta : -kInf;
        mass_lower_ = beta > 0.0 ? bottom.mass_ref - std::exp(bottom.B_ref) / (bottom.s0 * bottom.s0 * beta)
                                 : -kInf;
    }

    switch (dom.kind) {
        case DomainKind::Interval:
            recurrence_ = Recurrence::Recurrent;
            break;
        case DomainKind::HalfLine:
            recurrence_ = std::isinf(eta_upper_) ? Recurrence::Recurrent : Recurrence::Transient;
            break;
        case DomainKind::FullLine:
            recurrence_ = (std::isinf(eta_upper_) && std::isinf(eta_lower_)) ? Recurrence::Recurrent
                                                                              : Recurrence::Transient;
            break;
    }
    c_ = mass_upper_ - mass_lower_;
}

const AnalyticProfile::Piece& AnalyticProfile::piece_for(double x) const {
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), x,
                               [](double v, const Piece& p) { return v < p.lo; });
    if (it == pieces_.begin()) {
        return pieces_.front();
    }
    return *(it - 1);
}

double AnalyticProfile::beta_integral(const Piece& p, double t) const {
    if (t == 0.0) {
        return 0.0;
    }
    // int_0^t 2 (b0 + bn tau) / (s0 + sq tau)^2 dtau, split so that no
    // term cancels as sq -> 0.
    const double d = p.sq * t / p.s0;
    const double u1 = p.s0 + p.sq * t;
    return 2.0 * p.b0 * t / (p.s0 * u1) + 2.0 * p.bn * t * t * log_shape(d) / (p.s0 * p.s0);
}

double AnalyticProfile::eta_integral(const Piece& p, double t) const {
    if (t == 0.0) {
        return 0.0;
    }
    if (p.constant_beta) {
        return std::exp(-p.B_ref) * t * relative_expm1(-p.beta_const * t);
    }
    auto f = [&](double tau) { return std::exp(-(p.B_ref + beta_integral(p, tau))); };
    const double scale = std::abs(t) * std::max(f(0.0), f(t));
    return adaptive_simpson(f, 0.0, t, kQuadTol * std::max(1.0, scale));
}

double AnalyticProfile::mass_integral(const Piece& p, double t) const {
    if (t == 0.0) {
        return 0.0;
    }
    if (p.constant_beta) {
        return std::exp(p.B_ref) / (p.s0 * p.s0) * t * relative_expm1(p.beta_const * t);
    }
    auto f = [&](double tau) {
        const double s = p.s0 + p.sq * tau;
        return std::exp(p.B_ref + beta_integral(p, tau)) / (s * s);
    };
    const double scale = std::abs(t) * std::max(f(0.0), f(t));
    return adaptive_simpson(f, 0.0, t, kQuadTol * std::max(1.0, scale));
}

double AnalyticProfile::cumulative_beta(double x) const {
    field_.segment_index(x);
    const Piece& p = piece_for(x);
    return p.B_ref + beta_integral(p, x - p.ref);
}

double AnalyticProfile::scale_function(double x) const {
    field_.segment_index(x);
    const Piece& p = piece_for(x);
    return p.eta_ref + eta_integral(p, x - p.ref);
}

double AnalyticProfile::symmetrized_scale_function(double x) const {
    if (field_.domain().kind != DomainKind::HalfLine) {
        return scale_function(x);
    }
    if (!std::isfinite(x)) {
        throw DomainError("symmetrized scale function needs a finite argument");
    }
    const double e = scale_function(std::abs(x));
    return x < 0.0 ? -e : e;
}

double AnalyticProfile::mass(double x) const {
    const Piece& p = piece_for(x);
    return p.mass_ref + mass_integral(p, x - p.ref);
}

void AnalyticProfile::require_recurrent(const char* op) const {
    if (recurrence_ != Recurrence::Recurrent) {
        throw NoStationaryLaw(std::string(op) + ": transient profile has no stationary measure");
    }
}

void AnalyticProfile::require_positive_recurrent(const char* op) const {
    require_recurrent(op);
    if (!std::isfinite(c_)) {
        throw NoStationaryLaw(std::string(op) + ": stationary measure is not finite (C = inf)");
    }
}

double AnalyticProfile::stationary_density(double x) const {
    require_recurrent("stationary_density");
    const double sig = field_.sigma(x);
    return std::exp(cumulative_beta(x)) / (sig * sig);
}

double AnalyticProfile::normalizing_constant() const {
    require_recurrent("normalizing_constant");
    return c_;
}

double AnalyticProfile::stationary_cdf(double x) const {
    require_positive_recurrent("stationary_cdf");
    const DomainSpec& dom = field_.domain();
    if (std::isnan(x)) {
        throw DomainError("stationary_cdf of NaN");
    }
    if (x <= dom.lower()) {
        return 0.0;
    }
    if (x >= dom.upper()) {
        return 1.0;
    }
    const double v = (mass(x) - mass_lower_) / c_;
    return std::clamp(v, 0.0, 1.0);
}

double AnalyticProfile::sample_stationary(double u) const {
    require_positive_recurrent("sample_stationary");
    if (!(u > 0.0 && u < 1.0)) {
        throw DomainError("sample_stationary needs u in (0, 1)");
    }
    const DomainSpec& dom = field_.domain();
    constexpr double kTol = 1e-12;

    double lo = dom.lower();
    double hi = dom.upper();
    const bool bounded = dom.kind == DomainKind::Interval;
    if (!bounded) {
        // Bracket the quantile starting from the breakpoints nearest the origin.
        double step = 1.0;
        for (const Segment& s : field_.segments()) {
            if (std::isfinite(s.upper)) {
                step = std::max(step, std::abs(s.upper));
            }
            if (std::isfinite(s.lower)) {
                step = std::max(step, std::abs(s.lower));
            }
        }
        hi = step;
        while (stationary_cdf(hi) < u) {
            hi *= 2.0;
        }
        if (dom.kind == DomainKind::FullLine) {
            lo = -step;
            while (stationary_cdf(lo) >= u) {
                lo *= 2.0;
            }
        }
    }

    for (int it = 0; it < 400; ++it) {
        const double width = hi - lo;
        if (bounded ? width <= kTol : (width <= kTol * std::max(1.0, std::abs(hi)) ||
                                       stationary_cdf(hi) - stationary_cdf(lo) <= kTol)) {
            break;
        }
        const double mid = lo + 0.5 * width;
        if (stationary_cdf(mid) < u) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return hi;
}

RegulatorExpectations AnalyticProfile::regulator_expectations() const {
    require_positive_recurrent("regulator_expectations");
    const DomainSpec& dom = field_.domain();
    if (dom.kind == DomainKind::FullLine) {
        throw std::logic_error("regulator_expectations: the full line has no boundary");
    }
    RegulatorExpectations out;
    out.ey0 = 0.5 / c_;
    if (dom.kind == DomainKind::Interval) {
        out.eya = out.ey0 * std::exp(cumulative_beta(dom.a));
    }
    return out;
}

HittingProbabilities AnalyticProfile::hitting_probabilities(double c, double x, double d) const {
    if (!(c < x && x < d)) {
        throw std::invalid_argument("hitting_probabilities needs c < x < d");
    }
    const double ec = symmetrized_scale_function(c);
    const double ex = symmetrized_scale_function(x);
    const double ed = symmetrized_scale_function(d);
    const double span = ed - ec;
    HittingProbabilities out;
    out.p_c_first = (ed - ex) / span;
    out.p_d_first = (ex - ec) / span;
    return out;
}

}  // namespace refdiff
