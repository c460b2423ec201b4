#pragma once

// Fields shared by the analytic unit tests and the acceptance suite. All
// are piecewise Constant/Affine; every one is positive recurrent except
// where noted by the builder name.

#include <string>
#include <vector>

#include "refdiff/coefficient_model.hpp"

namespace refdiff::testing {

struct NamedField {
    std::string name;
    CoefficientField field;
};

inline Segment seg(double lo, double hi, FuncSpec b, FuncSpec s) { return Segment{lo, hi, std::move(b), std::move(s)}; }
inline FuncSpec K(double v) { return FuncSpec::constant(v); }
inline FuncSpec A(double c0, double c1) { return FuncSpec::affine(c0, c1); }

inline std::vector<NamedField> analytic_corpus() {
    const auto H = DomainSpec::half_line();
    const auto R = DomainSpec::full_line();
    auto I = [](double a) { return DomainSpec::interval(a); };
    auto F = [](DomainSpec d, std::vector<Segment> s) { return CoefficientField::validated(d, std::move(s)); };
    return {
        {"rbm_drift_-1", CoefficientField::constant(H, -1.0, 1.0)},
        {"rbm_drift_-0.3_sigma_2", CoefficientField::constant(H, -0.3, 2.0)},
        {"two_level", F(H, {seg(0, 1, K(-1), K(1)), seg(1, kInf, K(-2), K(1))})},
        {"three_level_sigma_steps", F(H, {seg(0, 0.5, K(0.5), K(1)), seg(0.5, 2, K(-1), K(1.5)), seg(2, kInf, K(-3), K(0.8))})},
        {"affine_drift_then_const", F(H, {seg(0, 2, A(0.5, -1), K(1)), seg(2, kInf, K(-1.5), K(1))})},
        {"affine_sigma_then_const", F(H, {seg(0, 1.5, K(-1), A(0.5, 0.5)), seg(1.5, kInf, K(-1), K(1.25))})},
        {"affine_both", F(H, {seg(0, 1, A(-0.2, -0.8), A(1, 0.3)), seg(1, 3, A(0, -0.5), A(1.6, -0.2)), seg(3, kInf, K(-2), K(1))})},
        {"upward_then_down", F(H, {seg(0, 0.7, K(2), K(1)), seg(0.7, kInf, K(-2), K(1))})},
        {"small_sigma_core", F(H, {seg(0, 0.25, K(-0.1), K(0.3)), seg(0.25, kInf, K(-0.5), K(0.9))})},
        {"many_breakpoints", F(H, {seg(0, 0.2, K(-1), K(1)), seg(0.2, 0.4, K(1), K(1)), seg(0.4, 0.6, K(-1), K(2)),
                                   seg(0.6, 0.8, K(0.5), K(0.5)), seg(0.8, kInf, K(-1), K(1))})},
        {"interval_null", CoefficientField::constant(I(2), 0.0, 1.0)},
        {"interval_down", CoefficientField::constant(I(1), -1.0, 1.0)},
        {"interval_up_sigma", CoefficientField::constant(I(3), 0.4, 0.7)},
        {"interval_affine_drift", F(I(2), {seg(0, 2, A(1, -1), K(1))})},
        {"interval_affine_sigma", F(I(1.5), {seg(0, 1.5, K(-0.5), A(0.6, 0.4))})},
        {"interval_mixed", F(I(4), {seg(0, 1, K(1), K(1)), seg(1, 2.5, A(1, -0.8), A(1.2, -0.2)), seg(2.5, 4, K(-2), K(0.9))})},
        {"line_ou_like", F(R, {seg(-kInf, -1, K(1), K(1)), seg(-1, 1, A(0, -1), K(1)), seg(1, kInf, K(-1), K(1))})},
        {"line_asym", F(R, {seg(-kInf, 0, K(2), K(1.5)), seg(0, kInf, K(-0.5), K(1))})},
        {"line_affine_sigma", F(R, {seg(-kInf, -2, K(0.7), K(1)), seg(-2, 0, A(0.3, -0.2), A(0.8, -0.1)),
                                    seg(0, 2, A(0, -0.6), A(0.8, 0.1)), seg(2, kInf, K(-1), K(1))})},
        {"line_shifted_breaks", F(R, {seg(-kInf, 0.5, K(1.2), K(1)), seg(0.5, 1.5, K(0), K(0.6)), seg(1.5, kInf, K(-0.8), K(1.1))})},
        {"half_slow_tail", F(H, {seg(0, 3, A(0.6, -0.3), A(1, 0.1)), seg(3, kInf, K(-0.6), K(1.3))})},
        {"interval_steps", F(I(2.5), {seg(0, 0.5, K(-1), K(0.5)), seg(0.5, 1, K(2), K(1)), seg(1, 2.5, K(-0.5), K(1.4))})},
    };
}

}  // namespace refdiff::testing
