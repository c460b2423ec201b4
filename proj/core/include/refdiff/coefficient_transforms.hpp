#pragma once

#include "refdiff/coefficient_model.hpp"

namespace refdiff {

enum class ExtensionMode { Symmetrized, FoldExtended };

/// sgn with sgn(0) = 0.
inline double sign0(double x) { return static_cast<double>((x > 0.0) - (x < 0.0)); }

/// Tent map onto [0, a]: identity on [0, a], 2a - x on (a, 2a], 0 elsewhere.
double fold_map(double a, double x);

/// Full-line coefficients built from a reflected field.
///
/// Symmetrized (half-line base):  sigma~(x) = sigma(|x|), b~(x) = sgn(x) b(|x|).
/// FoldExtended (interval base):  on [0, 2a] sigma^(x) = sigma(g(x)) and
/// b^(x) = sgn(a - x) b(g(x)); outside, sigma^ = 1 and b^ is the restoring
/// constant +1 below 0, -1 above 2a.
class ExtendedField {
public:
    ExtendedField(CoefficientField base, ExtensionMode mode);

    const CoefficientField& base() const { return base_; }
    ExtensionMode mode() const { return mode_; }
    /// Interval width (FoldExtended only, 0 otherwise).
    double a() const { return a_; }

    double b(double x) const;
    double sigma(double x) const;
    double beta(double x) const;

private:
    CoefficientField base_;
    ExtensionMode mode_;
    double a_ = 0.0;
};

/// Throws std::invalid_argument unless the field is a valid half-line field.
ExtendedField symmetrize(const CoefficientField& field);

/// Throws std::invalid_argument unless the field is a valid interval field.
ExtendedField fold_extend(const CoefficientField& field);

}  // namespace refdiff
