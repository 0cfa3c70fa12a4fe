#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"

using namespace hawkeswave;

TEST(FixedPoints, FigureSigmoidMatchesOracle) {
    auto f = SigmoidSpec::arctan(8.0, 0.5);
    const auto fp = fixed_points(f);
    EXPECT_EQ(fp.a, 0.5);
    EXPECT_NEAR(fp.a1, fixture::a1, 1e-12);
    EXPECT_NEAR(fp.a2, fixture::a2, 1e-12);
    EXPECT_NEAR(fp.a, 0.5 * (fp.a1 + fp.a2), 1e-12);
    EXPECT_TRUE(f.has_fixed_points());
}

TEST(FixedPoints, IdentityIsNotBistable) {
    auto f = SigmoidSpec::tabulated({-10, 0, 1, 10}, {-10, 0, 1, 10});
    EXPECT_THROW(fixed_points(f), NotBistable);
}

TEST(FixedPoints, ShallowSigmoidHasOneRoot) {
    auto f = SigmoidSpec::arctan(2.0, 0.5);
    EXPECT_THROW(fixed_points(f), NotBistable);
}

TEST(FixedPoints, NegativeLowerRootRejected) {
    // Shifting the voltage down by 0.3 moves a1 below zero.
    auto f = SigmoidSpec::arctan(8.0, 0.5).voltage_shifted(-0.3);
    EXPECT_THROW(fixed_points(f), ConfigError);
}

TEST(FixedPoints, TangentialGainIsNotBistable) {
    // f'(a) = 1 exactly: the middle root is triple.
    auto f = SigmoidSpec::logistic(4.0, 0.5);
    EXPECT_THROW(fixed_points(f), NotBistable);
}

TEST(FixedPoints, VoltageShiftTranslatesRoots) {
    for (double c : {-0.05, 0.25, 1.5}) {
        auto f = SigmoidSpec::arctan(8.0, 0.5);
        const auto base = fixed_points(f);
        auto g = SigmoidSpec::arctan(8.0, 0.5).voltage_shifted(c);
        const auto fp = fixed_points(g);
        EXPECT_NEAR(fp.a1, base.a1 + c, 1e-11);
        EXPECT_NEAR(fp.a, base.a + c, 1e-11);
        EXPECT_NEAR(fp.a2, base.a2 + c, 1e-11);
    }
}

TEST(FixedPoints, LogisticFamily) {
    auto f = SigmoidSpec::logistic(10.0, 0.5);
    const auto fp = fixed_points(f);
    for (double r : {fp.a1, fp.a, fp.a2}) EXPECT_NEAR(f(r), r, 1e-12);
    EXPECT_NEAR(fp.a, 0.5, 1e-12);
}

TEST(Sigmoid, NeutralityResidual) {
    auto f = fixture::figure_sigmoid();
    EXPECT_LT(f.neutrality_residual(), 1e-12);
    auto g = SigmoidSpec::logistic(10.0, 0.5);
    fixed_points(g);
    EXPECT_LT(g.neutrality_residual(), 1e-12);
}

TEST(Sigmoid, DerivativesMatchFiniteDifferences) {
    for (auto f : {SigmoidSpec::arctan(8.0, 0.5), SigmoidSpec::logistic(10.0, 0.4)}) {
        for (double x = -1.0; x <= 2.0; x += 0.137) {
            const double h = 1e-5;
            EXPECT_NEAR(f.d1(x), (f(x + h) - f(x - h)) / (2 * h), 1e-7);
            EXPECT_NEAR(f.d2(x), (f.d1(x + h) - f.d1(x - h)) / (2 * h), 1e-5);
            EXPECT_GT(f.d1(x), 0.0);
            EXPECT_GE(f(x), 0.0);
            EXPECT_LE(f(x), 1.0);
        }
    }
}

TEST(Sigmoid, TabulatedFollowsSamples) {
    std::vector<double> x, y;
    for (int k = 0; k <= 200; ++k) {
        x.push_back(-2.0 + 5.0 * k / 200.0);
        y.push_back(0.5 + std::atan(8.0 * (x.back() - 0.5)) / std::numbers::pi);
    }
    auto t = SigmoidSpec::tabulated(x, y);
    const auto fp = fixed_points(t);
    EXPECT_NEAR(fp.a1, fixture::a1, 1e-4);
    EXPECT_NEAR(fp.a2, fixture::a2, 1e-4);
    EXPECT_THROW(SigmoidSpec::tabulated({0, 1}, {0, 1}), ConfigError);
}

TEST(Sigmoid, LipschitzConstant) {
    EXPECT_NEAR(SigmoidSpec::arctan(8.0, 0.5).lipschitz(), 8.0 / std::numbers::pi, 1e-15);
}

TEST(Kernel, Values) {
    KernelSpec k(1.0);
    EXPECT_EQ(k(0.0), 0.5);
    EXPECT_NEAR(k(1.0) / k(0.0), std::exp(-1.0), 1e-16);
    KernelSpec k2(2.5);
    const double mass = quad::panels([&](double x) { return k2(x); }, 0.0, 40.0 * 2.5, 200) * 2.0;
    EXPECT_NEAR(mass, 1.0, 1e-12);
    EXPECT_THROW(KernelSpec(0.0), ConfigError);
}

TEST(Kernel, SymmetryRandomized) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-30.0, 30.0);
    KernelSpec k(1.7);
    for (int n = 0; n < 1000; ++n) {
        const double x = u(rng);
        EXPECT_EQ(k(x), k(-x));
    }
}

TEST(Kernel, CellMassMatchesQuadrature) {
    KernelSpec k(0.8);
    for (double x : {-1.3, -0.01, 0.0, 0.004, 0.5, 2.0}) {
        // split at the kink when it falls inside the cell
        const double mid = std::clamp(x, -0.01, 0.01);
        const double ref = quad::panels([&](double y) { return k(x - y); }, -0.01, mid, 4) +
                           quad::panels([&](double y) { return k(x - y); }, mid, 0.01, 4);
        EXPECT_NEAR(k.cell_mass(x, 0.0, 0.01), ref, 1e-14);
    }
    EXPECT_NEAR(k.tail_mass(0.0), 0.5, 1e-16);
}

TEST(Grid, BulkCountAndCells) {
    const Grid g = Grid::from_beta(0.02, 0.75);
    EXPECT_EQ(g.half_count(), 940);
    EXPECT_EQ(g.size(), 1881u);
    EXPECT_DOUBLE_EQ(g.right_edge(), 0.02 * 940.5);
    const Grid h = Grid::from_beta(0.01, 0.5);
    EXPECT_EQ(h.half_count(), 1000);
}

TEST(Grid, CellsPartitionTheBulk) {
    const Grid g(0.1, 5);
    EXPECT_EQ(*g.bulk_slot(0.0), 5u);
    EXPECT_EQ(*g.bulk_slot(0.05 - 1e-9), 5u);
    EXPECT_EQ(*g.bulk_slot(0.05), 6u);
    EXPECT_EQ(*g.bulk_slot(g.left_edge()), 0u);
    EXPECT_FALSE(g.bulk_slot(g.right_edge()).has_value());
    EXPECT_FALSE(g.bulk_slot(g.left_edge() - 1e-12).has_value());
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(g.left_edge(), g.right_edge());
    for (int n = 0; n < 1000; ++n) {
        const double x = u(rng);
        const auto k = g.bulk_slot(x);
        ASSERT_TRUE(k.has_value());
        EXPECT_LE(g.node(*k) - 0.05, x + 1e-15);
        EXPECT_LT(x, g.node(*k) + 0.05 + 1e-15);
    }
}

TEST(Grid, RejectsBadParameters) {
    EXPECT_THROW(Grid(0.0, 3), ConfigError);
    EXPECT_THROW(Grid::from_beta(0.1, 1.0), ConfigError);
    EXPECT_THROW(Grid(0.1, 3, 0), ConfigError);
}
