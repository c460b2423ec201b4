#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "refdiff/coefficient_transforms.hpp"
#include "support/corpus.hpp"

using namespace refdiff;
using refdiff::testing::A;
using refdiff::testing::K;
using refdiff::testing::seg;

TEST(Symmetrize, Examples) {
    const auto s = symmetrize(CoefficientField::constant(DomainSpec::half_line(), -1, 1));
    EXPECT_EQ(s.b(-1.5), 1.0);
    EXPECT_EQ(s.sigma(-1.5), 1.0);
    EXPECT_EQ(s.b(0.0), 0.0);
    EXPECT_EQ(s.mode(), ExtensionMode::Symmetrized);
}

TEST(Symmetrize, AffineDriftIsOdd) {
    const auto f = CoefficientField::validated(DomainSpec::half_line(), {seg(0, 3, A(0, -1), K(1)), seg(3, kInf, K(-3), K(1))});
    EXPECT_EQ(symmetrize(f).b(-2.0), 2.0);
}

TEST(Symmetrize, WrongDomainThrows) {
    EXPECT_THROW(symmetrize(CoefficientField::constant(DomainSpec::interval(1), 0, 1)), std::invalid_argument);
    EXPECT_THROW(fold_extend(CoefficientField::constant(DomainSpec::half_line(), -1, 1)), std::invalid_argument);
}

TEST(FoldMap, Examples) {
    EXPECT_EQ(fold_map(2, 1), 1.0);
    EXPECT_EQ(fold_map(2, 3), 1.0);
    EXPECT_EQ(fold_map(2, -0.7), 0.0);
    EXPECT_EQ(fold_map(2, 5), 0.0);
    EXPECT_EQ(fold_map(2, 2), 2.0);
    EXPECT_EQ(fold_map(2, 4), 0.0);
}

TEST(FoldExtend, Examples) {
    const auto u = fold_extend(CoefficientField::constant(DomainSpec::interval(2), -1, 1));
    EXPECT_EQ(u.sigma(3), 1.0);
    EXPECT_EQ(u.b(3), 1.0);
    EXPECT_EQ(u.b(5), -1.0);
    EXPECT_EQ(u.b(-0.5), 1.0);  // restoring below the band
    EXPECT_EQ(u.b(2.0), 0.0);   // sgn(a - a) = 0
    EXPECT_EQ(u.a(), 2.0);
}

TEST(FoldExtend, SigmaOutsideBandIsOne) {
    const auto u = fold_extend(CoefficientField::constant(DomainSpec::interval(1), 0.3, 2.5));
    EXPECT_EQ(u.sigma(-3), 1.0);
    EXPECT_EQ(u.sigma(2.5), 1.0);
    EXPECT_EQ(u.sigma(1.5), 2.5);
}

TEST(TransformProperty, SymmetryOnGrid) {
    for (const auto& nf : refdiff::testing::analytic_corpus()) {
        if (nf.field.domain().kind != DomainKind::HalfLine) continue;
        const auto s = symmetrize(nf.field);
        for (int i = 0; i <= 500; ++i) {
            const double x = 0.013 * i;
            EXPECT_EQ(s.sigma(-x), s.sigma(x)) << nf.name;
            EXPECT_EQ(s.b(-x), -s.b(x)) << nf.name;
            EXPECT_GT(s.sigma(-x), 0.0);
        }
    }
}

TEST(TransformProperty, FoldMapRangeLipschitzAndFixedPoints) {
    for (double a : {0.5, 1.0, 2.0, 3.7}) {
        double prev_x = -a;
        double prev_g = fold_map(a, prev_x);
        for (int i = 1; i <= 4000; ++i) {
            const double x = -a + 4.0 * a * i / 4000.0;
            const double g = fold_map(a, x);
            EXPECT_GE(g, 0.0);
            EXPECT_LE(g, a);
            EXPECT_LE(std::abs(g - prev_g), std::abs(x - prev_x) * (1 + 1e-12));
            prev_x = x;
            prev_g = g;
            if (x >= 0 && x <= a) {
                EXPECT_EQ(fold_map(a, x), x);
                EXPECT_EQ(fold_map(a, fold_map(a, x)), fold_map(a, x));
            }
        }
    }
}

TEST(TransformProperty, FoldAntisymmetryOfBeta) {
    for (const auto& nf : refdiff::testing::analytic_corpus()) {
        if (nf.field.domain().kind != DomainKind::Interval) continue;
        const auto u = fold_extend(nf.field);
        const double a = u.a();
        for (int i = 1; i < 200; ++i) {
            const double eps = a * i / 200.0;
            EXPECT_NEAR(u.beta(a + eps), -u.beta(a - eps), 1e-12 * std::max(1.0, std::abs(u.beta(a - eps))))
                << nf.name << " eps=" << eps;
            EXPECT_GT(u.sigma(a + eps), 0.0);
            EXPECT_GT(u.sigma(-eps), 0.0);
        }
    }
}
