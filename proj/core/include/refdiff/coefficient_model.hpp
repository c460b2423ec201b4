#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace refdiff {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class DomainKind { HalfLine, Interval, FullLine };

/// State space of the diffusion: [0,inf), [0,a] or the whole line.
struct DomainSpec {
    DomainKind kind = DomainKind::HalfLine;
    double a = 0.0;  // only meaningful for Interval

    static DomainSpec half_line() { return {DomainKind::HalfLine, 0.0}; }
    static DomainSpec interval(double width) { return {DomainKind::Interval, width}; }
    static DomainSpec full_line() { return {DomainKind::FullLine, 0.0}; }

    double lower() const { return kind == DomainKind::FullLine ? -kInf : 0.0; }
    double upper() const { return kind == DomainKind::Interval ? a : kInf; }
    bool contains(double x) const;
};

enum class FuncKind { Constant, Affine, Table };

/// One coefficient on one segment. Affine is c0 + c1*x in absolute
/// coordinates; Table interpolates linearly and clamps to its end values.
struct FuncSpec {
    FuncKind kind = FuncKind::Constant;
    double c0 = 0.0;
    double c1 = 0.0;
    std::vector<std::pair<double, double>> points;

    static FuncSpec constant(double v) { return {FuncKind::Constant, v, 0.0, {}}; }
    static FuncSpec affine(double c0, double c1) { return {FuncKind::Affine, c0, c1, {}}; }
    static FuncSpec table(std::vector<std::pair<double, double>> pts) {
        return {FuncKind::Table, 0.0, 0.0, std::move(pts)};
    }

    double operator()(double x) const;

    /// Smallest value over the closed interval [lo, hi] (both finite, or the
    /// function is Constant).
    double min_over(double lo, double hi) const;

    /// Abscissae inside (lo, hi) where the function changes slope.
    std::vector<double> kinks_inside(double lo, double hi) const;
};

struct Segment {
    double lower = 0.0;
    double upper = kInf;
    FuncSpec b;
    FuncSpec sigma;
};

enum class ViolationKind {
    BadDomain,
    NoSegments,
    EmptySegment,
    NonFinite,
    GapInCoverage,
    OverlapInCoverage,
    CoverageMismatch,
    BadTable,
    SigmaNotPositive,
    UnboundedTailNotConstant,
};

struct Violation {
    ViolationKind kind;
    std::optional<std::size_t> segment;
    std::string message;
};

using ValidationReport = std::vector<Violation>;

/// Piecewise drift b(x) and deviation sigma(x) over a domain.
///
/// Segments are ordered and right-continuous: a breakpoint belongs to the
/// segment whose lower endpoint it is. The closed right end of an Interval
/// belongs to the last segment.
class CoefficientField {
public:
    CoefficientField() = default;
    CoefficientField(DomainSpec domain, std::vector<Segment> segments);

    /// Builds the field and throws InvalidField listing every violation.
    static CoefficientField validated(DomainSpec domain, std::vector<Segment> segments);

    /// Single-segment convenience: constant b and sigma on the whole domain.
    static CoefficientField constant(DomainSpec domain, double b, double sigma);

    const DomainSpec& domain() const { return domain_; }
    const std::vector<Segment>& segments() const { return segments_; }

    /// Index of the owning segment; throws DomainError outside the domain.
    std::size_t segment_index(double x) const;

    double b(double x) const;
    double sigma(double x) const;
    double beta(double x) const;

    struct Coefficients {
        double b;
        double sigma;
    };

    /// Both coefficients at x without the domain check. x must be in the
    /// domain; used by the path kernels.
    Coefficients at_unchecked(double x) const {
        const Segment& s = segments_[locate(x)];
        return {s.b(x), s.sigma(x)};
    }

private:
    std::size_t locate(double x) const {
        if (segments_.size() == 1) {
            return 0;
        }
        // Last segment whose lower endpoint is <= x.
        std::size_t lo = 0;
        std::size_t hi = segments_.size();
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            if (segments_[mid].lower <= x) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return lo;
    }

    DomainSpec domain_;
    std::vector<Segment> segments_;
};

ValidationReport validate(const CoefficientField& field);
std::string describe(const ValidationReport& report);

double eval_b(const CoefficientField& field, double x);
double eval_sigma(const CoefficientField& field, double x);
double eval_beta(const CoefficientField& field, double x);

}  // namespace refdiff
