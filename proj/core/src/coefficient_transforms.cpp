#include "refdiff/coefficient_transforms.hpp"

#include <cmath>
#include <stdexcept>

#include "refdiff/errors.hpp"

namespace refdiff {

double fold_map(double a, double x) {
    if (x >= 0.0 && x <= a) {
        return x;
    }
    if (x > a && x <= 2.0 * a) {
        return 2.0 * a - x;
    }
    return 0.0;
}

ExtendedField::ExtendedField(CoefficientField base, ExtensionMode mode)
    : base_(std::move(base)), mode_(mode) {
    const ValidationReport report = validate(base_);
    if (!report.empty()) {
        throw InvalidField(describe(report));
    }
    const DomainKind want = mode_ == ExtensionMode::Symmetrized ? DomainKind::HalfLine : DomainKind::Interval;
    if (base_.domain().kind != want) {
        throw std::invalid_argument(mode_ == ExtensionMode::Symmetrized
                                        ? "symmetrize needs a half-line field"
                                        : "fold_extend needs an interval field");
    }
    if (mode_ == ExtensionMode::FoldExtended) {
        a_ = base_.domain().a;
    }
}

double ExtendedField::b(double x) const {
    if (mode_ == ExtensionMode::Symmetrized) {
        return sign0(x) * base_.b(std::abs(x));
    }
    if (x < 0.0) {
        return 1.0;
    }
    if (x > 2.0 * a_) {
        return -1.0;
    }
    return sign0(a_ - x) * base_.b(fold_map(a_, x));
}

double ExtendedField::sigma(double x) const {
    if (mode_ == ExtensionMode::Symmetrized) {
        return base_.sigma(std::abs(x));
    }
    if (x < 0.0 || x > 2.0 * a_) {
        return 1.0;
    }
    return base_.sigma(fold_map(a_, x));
}

double ExtendedField::beta(double x) const {
    const double s = sigma(x);
    return 2.0 * b(x) / (s * s);
}

ExtendedField symmetrize(const CoefficientField& field) {
    return ExtendedField(field, ExtensionMode::Symmetrized);
}

ExtendedField fold_extend(const CoefficientField& field) {
    return ExtendedField(field, ExtensionMode::FoldExtended);
}

}  // namespace refdiff
