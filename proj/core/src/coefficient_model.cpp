#include "refdiff/coefficient_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "refdiff/errors.hpp"

namespace refdiff {

bool DomainSpec::contains(double x) const {
    switch (kind) {
        case DomainKind::HalfLine:
            return x >= 0.0 && x < kInf;
        case DomainKind::Interval:
            return x >= 0.0 && x <= a;
        case DomainKind::FullLine:
            return std::isfinite(x);
    }
    return false;
}

double FuncSpec::operator()(double x) const {
    switch (kind) {
        case FuncKind::Constant:
            return c0;
        case FuncKind::Affine:
            return c0 + c1 * x;
        case FuncKind::Table: {
            if (x <= points.front().first) {
                return points.front().second;
            }
            if (x >= points.back().first) {
                return points.back().second;
            }
            auto it = std::upper_bound(points.begin(), points.end(), x,
                                       [](double v, const auto& p) { return v < p.first; });
            const auto& [x1, y1] = *it;
            const auto& [x0, y0] = *(it - 1);
            return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
        }
    }
    return 0.0;
}

double FuncSpec::min_over(double lo, double hi) const {
    switch (kind) {
        case FuncKind::Constant:
            return c0;
        case FuncKind::Affine:
            if (std::isinf(lo) || std::isinf(hi)) {
                if (c1 == 0.0) {
                    return c0;
                }
                const bool falls_to_infinity = (std::isinf(hi) && c1 < 0.0) || (std::isinf(lo) && c1 > 0.0);
                if (falls_to_infinity) {
                    return -kInf;
                }
                return std::isinf(hi) ? (*this)(lo) : (*this)(hi);
            }
            return std::min((*this)(lo), (*this)(hi));
        case FuncKind::Table: {
            double m = std::min((*this)(lo), (*this)(hi));
            for (const auto& [px, py] : points) {
                if (px > lo && px < hi) {
                    m = std::min(m, py);
                }
            }
            return m;
        }
    }
    return 0.0;
}

std::vector<double> FuncSpec::kinks_inside(double lo, double hi) const {
    std::vector<double> out;
    if (kind == FuncKind::Table) {
        for (const auto& p : points) {
            if (p.first > lo && p.first < hi) {
                out.push_back(p.first);
            }
        }
    }
    return out;
}

CoefficientField::CoefficientField(DomainSpec domain, std::vector<Segment> segments)
    : domain_(domain), segments_(std::move(segments)) {}

CoefficientField CoefficientField::validated(DomainSpec domain, std::vector<Segment> segments) {
    CoefficientField field(domain, std::move(segments));
    const ValidationReport report = validate(field);
    if (!report.empty()) {
        throw InvalidField(describe(report));
    }
    return field;
}

CoefficientField CoefficientField::constant(DomainSpec domain, double b, double sigma) {
    return validated(domain, {Segment{domain.lower(), domain.upper(), FuncSpec::constant(b),
                                      FuncSpec::constant(sigma)}});
}

std::size_t CoefficientField::segment_index(double x) const {
    if (!domain_.contains(x)) {
        std::ostringstream msg;
        msg << "x = " << x << " is outside the domain";
        throw DomainError(msg.str());
    }
    return locate(x);
}

double CoefficientField::b(double x) const {
    return segments_[segment_index(x)].b(x);
}

double CoefficientField::sigma(double x) const {
    return segments_[segment_index(x)].sigma(x);
}

double CoefficientField::beta(double x) const {
    const Segment& s = segments_[segment_index(x)];
    const double sig = s.sigma(x);
    return 2.0 * s.b(x) / (sig * sig);
}

namespace {

bool finite_spec(const FuncSpec& f) {
    if (!std::isfinite(f.c0) || !std::isfinite(f.c1)) {
        return false;
    }
    return std::all_of(f.points.begin(), f.points.end(), [](const auto& p) {
        return std::isfinite(p.first) && std::isfinite(p.second);
    });
}

bool table_ok(const FuncSpec& f) {
    if (f.kind != FuncKind::Table) {
        return true;
    }
    if (f.points.size() < 2) {
        return false;
    }
    for (std::size_t i = 1; i < f.points.size(); ++i) {
        if (!(f.points[i].first > f.points[i - 1].first)) {
            return false;
        }
    }
    return true;
}

std::string seg_msg(const char* what, std::size_t i) {
    std::ostringstream os;
    os << what << " (segment " << i << ")";
    return os.str();
}

}  // namespace

ValidationReport validate(const CoefficientField& field) {
    ValidationReport out;
    const DomainSpec& dom = field.domain();
    const auto& segs = field.segments();

    if (dom.kind == DomainKind::Interval && !(std::isfinite(dom.a) && dom.a > 0.0)) {
        out.push_back({ViolationKind::BadDomain, std::nullopt, "interval width a must be finite and > 0"});
        return out;
    }
    if (segs.empty()) {
        out.push_back({ViolationKind::NoSegments, std::nullopt, "field has no segments"});
        return out;
    }

    if (segs.front().lower != dom.lower()) {
        out.push_back({ViolationKind::CoverageMismatch, 0, "first segment does not start at the domain lower end"});
    }
    if (segs.back().upper != dom.upper()) {
        out.push_back({ViolationKind::CoverageMismatch, segs.size() - 1,
                       "last segment does not end at the domain upper end"});
    }

    for (std::size_t i = 0; i < segs.size(); ++i) {
        const Segment& s = segs[i];
        if (std::isnan(s.lower) || std::isnan(s.upper) || !(s.lower < s.upper)) {
            out.push_back({ViolationKind::EmptySegment, i, seg_msg("segment requires lower < upper", i)});
            continue;
        }
        if (!finite_spec(s.b) || !finite_spec(s.sigma)) {
            out.push_back({ViolationKind::NonFinite, i, seg_msg("non-finite coefficient parameter", i)});
            continue;
        }
        if (!table_ok(s.b) || !table_ok(s.sigma)) {
            out.push_back({ViolationKind::BadTable, i,
                           seg_msg("table needs >= 2 points with strictly increasing x", i)});
            continue;
        }
        const bool unbounded = std::isinf(s.lower) || std::isinf(s.upper);
        if (unbounded) {
            if (dom.kind == DomainKind::Interval) {
                out.push_back({ViolationKind::CoverageMismatch, i, seg_msg("unbounded segment on an interval", i)});
                continue;
            }
            if (s.b.kind != FuncKind::Constant || s.sigma.kind != FuncKind::Constant) {
                out.push_back({ViolationKind::UnboundedTailNotConstant, i,
                               seg_msg("unbounded tail must have constant b and sigma", i)});
                continue;
            }
        }
        if (!(s.sigma.min_over(s.lower, s.upper) > 0.0)) {
            out.push_back({ViolationKind::SigmaNotPositive, i, seg_msg("sigma not positive", i)});
        }
    }

    for (std::size_t i = 0; i + 1 < segs.size(); ++i) {
        if (segs[i].upper < segs[i + 1].lower) {
            out.push_back({ViolationKind::GapInCoverage, i, seg_msg("gap in domain coverage after", i)});
        } else if (segs[i].upper > segs[i + 1].lower) {
            out.push_back({ViolationKind::OverlapInCoverage, i, seg_msg("overlap in domain coverage after", i)});
        }
    }
    return out;
}

std::string describe(const ValidationReport& report) {
    std::ostringstream os;
    for (std::size_t i = 0; i < report.size(); ++i) {
        if (i > 0) {
            os << "; ";
        }
        os << report[i].message;
    }
    return os.str();
}

double eval_b(const CoefficientField& field, double x) { return field.b(x); }
double eval_sigma(const CoefficientField& field, double x) { return field.sigma(x); }
double eval_beta(const CoefficientField& field, double x) { return field.beta(x); }

}  // namespace refdiff
