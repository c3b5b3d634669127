#include "spotvol/shrinkage.hpp"

#include "property_checks.hpp"

#include <gtest/gtest.h>

using namespace spotvol;

TEST(ShrinkValue, Examples)
{
    EXPECT_DOUBLE_EQ(shrink_value(ShrinkRule::soft(), 2.5, 1.0), 1.5);
    EXPECT_DOUBLE_EQ(shrink_value(ShrinkRule::hard(), 0.8, 1.0), 0.0);
    EXPECT_DOUBLE_EQ(shrink_value(ShrinkRule::scad(3.7), 1.5, 1.0), 0.5);
    EXPECT_DOUBLE_EQ(shrink_value(ShrinkRule::scad(3.7), 5.0, 1.0), 5.0);
    EXPECT_DOUBLE_EQ(shrink_value(ShrinkRule::adaptive_lasso(3.0), 2.0, 1.0), 1.75);
}

TEST(ShrinkValue, BoundaryShrinksToZero)
{
    for (auto r : {ShrinkRule::hard(), ShrinkRule::soft(), ShrinkRule::adaptive_lasso(), ShrinkRule::scad()}) {
        EXPECT_EQ(shrink_value(r, 0.7, 0.7), 0.0);
        EXPECT_EQ(shrink_value(r, -0.7, 0.7), 0.0);
    }
}

TEST(ShrinkValue, ScadMiddleBranch)
{
    // ((a - 1) u - a rho) / (a - 2) at u = 3, rho = 1, a = 3.7
    EXPECT_NEAR(shrink_value(ShrinkRule::scad(3.7), 3.0, 1.0), (2.7 * 3.0 - 3.7) / 1.7, 1e-15);
    EXPECT_NEAR(shrink_value(ShrinkRule::scad(3.7), -3.0, 1.0), -(2.7 * 3.0 - 3.7) / 1.7, 1e-15);
}

TEST(ShrinkValue, InvalidParameters)
{
    EXPECT_THROW(ShrinkRule::scad(2.0).validate(), InvalidArgument);
    EXPECT_THROW(ShrinkRule::adaptive_lasso(0.5).validate(), InvalidArgument);
    EXPECT_THROW(parse_shrink_rule("lasso"), InvalidArgument);
}

TEST(ShrinkValue, Axioms)
{
    const auto r = checks::shrinkage_axioms(10000);
    EXPECT_TRUE(r.ok) << r.detail;
}

TEST(ShrinkMatrix, ZeroRhoIsIdentityMap)
{
    Matrix s(3, 3);
    s << 2, 0.3, -0.1, 0.3, 1, 0.2, -0.1, 0.2, 1.5;
    ShrinkageSpec spec;
    spec.tuning = TuningKind::entry_adaptive;
    spec.rho = 0.0;
    for (auto r : {ShrinkRule::hard(), ShrinkRule::soft(), ShrinkRule::adaptive_lasso(), ShrinkRule::scad()}) {
        spec.rule = r;
        EXPECT_EQ(shrink_matrix(s, spec), s);
    }
}

TEST(ShrinkMatrix, DiagonalInputUnchanged)
{
    const Matrix d = Vector::LinSpaced(4, 1.0, 4.0).asDiagonal();
    ShrinkageSpec spec;
    for (auto tuning : {TuningKind::fixed, TuningKind::entry_adaptive, TuningKind::pd_grid}) {
        for (auto r : {ShrinkRule::hard(), ShrinkRule::soft(), ShrinkRule::adaptive_lasso(), ShrinkRule::scad()}) {
            spec.rule = r;
            spec.tuning = tuning;
            spec.rho = 0.7;
            EXPECT_EQ(shrink_matrix(d, spec), d);
        }
    }
}

TEST(ShrinkMatrix, EntryAdaptiveHard)
{
    Matrix s(2, 2);
    s << 1, 0.4, 0.4, 1;
    ShrinkageSpec spec;
    spec.rule = ShrinkRule::hard();
    spec.tuning = TuningKind::entry_adaptive;
    spec.rho = 0.5;
    EXPECT_EQ(shrink_matrix(s, spec), Matrix::Identity(2, 2));
}

TEST(ShrinkMatrix, TimeVaryingRho)
{
    Matrix s(2, 2);
    s << 4, 1, 1, 1;
    ShrinkageSpec spec;
    spec.rule = ShrinkRule::soft();
    spec.tuning = TuningKind::entry_adaptive;
    spec.rho_of_t = [](double t) { return t; };
    // threshold t * sqrt(4 * 1)
    EXPECT_NEAR(shrink_matrix(s, spec, 0.25)(0, 1), 0.5, 1e-15);
    EXPECT_NEAR(shrink_matrix(s, spec, 0.0)(0, 1), 1.0, 1e-15);
}

TEST(MinPdRho, ZeroForPdInputs)
{
    EXPECT_EQ(min_pd_rho(Matrix::Identity(3, 3), ShrinkRule::soft()).rho, 0.0);
    Matrix s(2, 2);
    s << 1, 0.5, 0.5, 1;
    EXPECT_EQ(min_pd_rho(s, ShrinkRule::scad()).rho, 0.0);
}

TEST(MinPdRho, IndefiniteCorrelation)
{
    Matrix s(3, 3);
    s << 1, 0.9, 0.9, 0.9, 1, -0.9, 0.9, -0.9, 1;
    const PdSearch r = min_pd_rho(s, ShrinkRule::hard());
    EXPECT_NEAR(r.rho, 0.90, 1e-12);
    EXPECT_TRUE(r.positive_definite);
    // brute force sweep
    double brute = 1.0;
    for (int k = 0; k <= 100; ++k) {
        const Matrix m = shrink_entry_adaptive(s, ShrinkRule::hard(), k * 0.01);
        Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
        if (eig.eigenvalues().minCoeff() > 1e-10) {
            brute = k * 0.01;
            break;
        }
    }
    EXPECT_NEAR(r.rho, brute, 1e-12);
}

TEST(MinPdRho, FlagsWhenNothingQualifies)
{
    // Soft thresholding at rho = 1 still leaves the singular all-ones matrix.
    const Matrix s = (Matrix(2, 2) << 1, 2, 2, 1).finished();
    ShrinkageSpec spec;
    spec.rule = ShrinkRule::soft();
    ShrinkOutcome oc;
    shrink_matrix(s, spec, 0.0, &oc);
    EXPECT_FALSE(oc.positive_definite);
    EXPECT_EQ(oc.rho, 1.0);
}

TEST(TheoryTuning, RhoIsMTimesZeta)
{
    const ShrinkageSpec spec = theory_tuning(ShrinkRule::soft(), [](double) { return 2.0; }, 0.01, 0.5, 1e-4, 100);
    ASSERT_TRUE(spec.rho_of_t);
    EXPECT_NEAR(spec.rho_of_t(0.3), 2.0 * (0.1 + std::sqrt(1e-4 * std::log(1e4) / 0.01)), 1e-12);
}
