#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "refdiff/coefficient_model.hpp"

namespace refdiff {

enum class Recurrence { Recurrent, Transient };

const char* to_string(Recurrence r);

struct RegulatorExpectations {
    double ey0 = 0.0;                 // E[Y(1)] or E[Y_0(1)]
    std::optional<double> eya;        // E[Y_a(1)], Interval only
};

struct HittingProbabilities {
    double p_c_first = 0.0;
    double p_d_first = 0.0;
};

/// Closed-form analysis of a validated coefficient field.
///
/// Everything is expressed through B(x) = int_0^x beta(u) du (signed, so
/// B(x) = -int_x^0 beta for x < 0 on the full line):
///
///   scale function      eta(x) = int_0^x exp(-B(y)) dy
///   stationary density  h(x)   = exp(B(x)) / sigma(x)^2
///   normalizer          C      = int over the domain of h
///
/// The field is cut into pieces at segment breakpoints, table knots and the
/// origin; on every piece b and sigma are affine, so B has an exact
/// antiderivative. eta and the mass of h are exact where beta is constant on
/// the piece and use adaptive Simpson otherwise. Values at piece endpoints
/// are cached at construction, so each query integrates over at most one
/// piece.
class AnalyticProfile {
public:
    /// Throws InvalidField if the field does not validate.
    explicit AnalyticProfile(CoefficientField field);

    const CoefficientField& field() const { return field_; }

    double cumulative_beta(double x) const;

    /// eta(x) on the domain; negative for x < 0 on the full line.
    double scale_function(double x) const;

    /// Odd extension sgn(x) * eta(|x|) of a half-line scale function; this
    /// is the scale function of the symmetrized full-line driver.
    double symmetrized_scale_function(double x) const;

    /// lim eta(x) as x -> +inf (+inf when divergent). Finite domains return
    /// eta(a).
    double scale_upper_limit() const { return eta_upper_; }
    /// lim eta(x) as x -> -inf on the full line (-inf when divergent).
    double scale_lower_limit() const { return eta_lower_; }

    Recurrence classify_recurrence() const { return recurrence_; }
    bool positive_recurrent() const { return recurrence_ == Recurrence::Recurrent && std::isfinite(c_); }

    /// Unnormalized stationary density h(x). Throws NoStationaryLaw on a
    /// transient profile.
    double stationary_density(double x) const;

    /// C = int h over the domain; +inf when the stationary measure is not
    /// finite. Throws NoStationaryLaw on a transient profile.
    double normalizing_constant() const;

    /// C^-1 int_{lower}^x h. Arguments outside the domain clamp to 0 or 1.
    double stationary_cdf(double x) const;

    /// Inverse of stationary_cdf by bisection; smallest x with cdf(x) >= u.
    double sample_stationary(double u) const;

    RegulatorExpectations regulator_expectations() const;

    /// Exit probabilities of the interval (c, d) started at x, computed
    /// from the scale function. Half-line profiles use the symmetrized
    /// scale function, so c may be negative.
    HittingProbabilities hitting_probabilities(double c, double x, double d) const;

private:
    struct Piece {
        double lo;
        double hi;
        double ref;  // finite endpoint nearest the origin
        // b(x) = b0 + bn (x - ref), sigma(x) = s0 + sq (x - ref)
        double b0;
        double bn;
        double s0;
        double sq;
        bool constant_beta;
        double beta_const;  // valid when constant_beta
        double B_ref;
        double eta_ref;
        double mass_ref;
    };

    const Piece& piece_for(double x) const;
    double beta_integral(const Piece& p, double t) const;
    double eta_integral(const Piece& p, double t) const;
    double mass_integral(const Piece& p, double t) const;
    double mass(double x) const;  // signed int_0^x h
    void require_recurrent(const char* op) const;
    void require_positive_recurrent(const char* op) const;

    CoefficientField field_;
    std::vector<Piece> pieces_;  // ascending
    Recurrence recurrence_ = Recurrence::Recurrent;
    double eta_upper_ = 0.0;
    double eta_lower_ = 0.0;
    double mass_upper_ = 0.0;  // int_0^{upper} h
    double mass_lower_ = 0.0;  // int_0^{lower} h (<= 0)
    double c_ = 0.0;
};

}  // namespace refdiff
