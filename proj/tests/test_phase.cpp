#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"

using namespace hawkeswave;

namespace {

const WaveProfile& wave() { return fixture::figure_profile(); }

Grid grid() { return Grid(0.05, 600); }

Field perturbed(const Grid& g, double psi, double c, double (*bump)(double)) {
    const auto& w = wave();
    const auto& fp = w.fixed_points();
    return Field::sample(g, [&](double x) { return w.shifted(psi, x) + c * bump(x - psi); }, fp.a1, fp.a2);
}

double odd_bump(double x) { return x * std::exp(-x * x); }
double even_bump(double x) { return std::exp(-x * x); }

double norm(const Field& v) {
    double s = 0.0;
    for (double x : v.values) s += x * x;
    return std::sqrt(s * v.grid.eps());
}

// ||u - u_psi|| weighted by m_psi over the bulk.
double weighted_dist(const Field& u, double psi) {
    const auto& w = wave();
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double x = u.grid.node(k);
        const double d = u.values[k] - w.shifted(psi, x);
        s += d * d * w.sigmoid().d1(w.shifted(psi, x));
    }
    return std::sqrt(s * u.grid.eps());
}

}  // namespace

TEST(Projection, ExactRootOnManifold) {
    for (double psi : {0.0, 0.37, -1.2}) {
        const Field u = Field::from_profile(grid(), wave(), psi);
        const auto r = project_phase(u, wave(), 0.0);
        EXPECT_TRUE(r.converged);
        EXPECT_NEAR(r.psi, psi, 1e-9);
        EXPECT_LT(r.dist, 1e-9);
        const double scale = weighted_norm2_deriv(grid(), wave(), 0.0);
        EXPECT_LT(std::abs(projection_residual(u, wave(), r.psi).first), 1e-10 * scale);
    }
}

TEST(Projection, TangentPerturbationShiftsBack) {
    const double delta = 1e-3;
    const auto& w = wave();
    const auto& fp = w.fixed_points();
    const Field u = Field::sample(grid(), [&](double x) { return w.value(x) + delta * w.deriv(x); }, fp.a1, fp.a2);
    const auto r = project_phase(u, w);
    EXPECT_LE(std::abs(r.psi + delta), 10.0 * delta * delta);
}

TEST(Projection, OddBumpKeepsPhase) {
    const Field u = perturbed(grid(), 0.0, 1e-3, odd_bump);
    EXPECT_NEAR(project_phase(u, wave(), 0.1).psi, 0.0, 1e-12);
}

TEST(Projection, ConstantIsOutOfTube) {
    const Field u = Field::constant(grid(), wave().fixed_points().a);
    EXPECT_THROW(project_phase(u, wave()), OutOfTube);
    EXPECT_THROW(phase_by_minimization(u, wave()), OutOfTube);
    const double d = dist_to_manifold(u, wave());
    EXPECT_TRUE(std::isfinite(d));
    EXPECT_GT(d, 1.0);
}

TEST(Projection, Equivariance) {
    const Grid g = grid();
    const Field u = perturbed(g, 0.2, 5e-3, even_bump);
    const double base = project_phase(u, wave()).psi;
    for (int m : {-10, 7, 20}) {
        const double delta = m * g.eps();
        const Field v = perturbed(g, 0.2 + delta, 5e-3, even_bump);
        EXPECT_NEAR(project_phase(v, wave(), delta).psi, base + delta, 1e-8);
    }
}

TEST(Minimization, ExactRootOnManifold) {
    for (double psi : {0.0, 0.37, -1.2}) {
        const Field u = Field::from_profile(grid(), wave(), psi);
        const auto r = phase_by_minimization(u, wave());
        EXPECT_EQ(r.method, PhaseMethod::minimization);
        EXPECT_NEAR(r.psi, psi, 1e-7);
        EXPECT_NEAR(dist_to_manifold(u, wave()), 0.0, 1e-9);
    }
}

TEST(Minimization, AgreesWithProjectionForOddPerturbations) {
    for (double c : {1e-3, 1e-2}) {
        for (double psi : {0.0, 0.3, -0.85}) {
            const Field u = perturbed(grid(), psi, c, odd_bump);
            const auto p = project_phase(u, wave(), psi + 0.05);
            const auto m = phase_by_minimization(u, wave(), psi + 0.05);
            EXPECT_LE(std::abs(p.psi - m.psi), 1e-3 * p.dist) << "c=" << c << " psi=" << psi;
        }
    }
}

TEST(Minimization, ChartsAgreeToFirstOrderForGenericPerturbations) {
    // The two charts use different metrics, so they only agree up to O(c).
    for (double c : {1e-3, 1e-2}) {
        const Field u = perturbed(grid(), 0.0, c, even_bump);
        const auto p = project_phase(u, wave());
        const auto m = phase_by_minimization(u, wave());
        EXPECT_LE(std::abs(p.psi - m.psi), 2.0 * c);
    }
}

TEST(Distance, OrthogonalPerturbation) {
    const double c = 1e-3;
    const Field u = perturbed(grid(), 0.0, c, odd_bump);
    Field g = Field::sample(grid(), odd_bump, 0.0, 0.0);
    EXPECT_NEAR(dist_to_manifold(u, wave()) / (c * norm(g)), 1.0, 1e-2);
}

TEST(Distance, RampFixture) {
    const double eps = 0.02;
    const Grid g = Grid::from_beta(eps, 0.75);
    ASSERT_EQ(g.half_count(), 940);
    HawkesParams p{wave().sigmoid(), wave().kernel(), g};
    p.far_tail = false;
    const auto& fp = wave().fixed_points();
    Field u(g, fp.a1, fp.a2);
    u.values = initial_values(p);
    const auto r = nearest_phase(u, wave());
    EXPECT_NEAR(r.psi, 0.0, 1e-6);
    EXPECT_NEAR(r.dist, fixture::ramp_distance, 1e-6);
    EXPECT_THROW(phase_by_minimization(u, wave()), OutOfTube);
}

TEST(Dtheta, TangentIsMinusOne) {
    const auto& w = wave();
    const Field v = Field::sample(grid(), [&](double x) { return w.deriv(x); }, 0.0, 0.0);
    EXPECT_NEAR(dtheta_on_manifold(v, 0.0, w), -1.0, 1e-8);
}

TEST(Dtheta, OddDirectionIsZero) {
    const Field v = Field::sample(grid(), odd_bump, 0.0, 0.0);
    EXPECT_NEAR(dtheta_on_manifold(v, 0.0, wave()), 0.0, 1e-10);
}

TEST(Dtheta, Linear) {
    const Field v1 = Field::sample(grid(), even_bump, 0.0, 0.0);
    const Field v2 = Field::sample(grid(), [](double x) { return std::cos(x) * std::exp(-0.1 * x * x); }, 0.0, 0.0);
    const double a = 0.7, b = -2.3;
    Field mix = v1;
    for (std::size_t k = 0; k < mix.size(); ++k) mix.values[k] = a * v1.values[k] + b * v2.values[k];
    const auto& w = wave();
    EXPECT_NEAR(dtheta_on_manifold(mix, 0.4, w), a * dtheta_on_manifold(v1, 0.4, w) + b * dtheta_on_manifold(v2, 0.4, w),
                1e-12);
}

TEST(Dtheta, DenominatorIsPhaseIndependent) {
    const double d0 = weighted_norm2_deriv(grid(), wave(), 0.0);
    for (double psi : {0.013, 0.25, -0.6, 3.1}) EXPECT_NEAR(weighted_norm2_deriv(grid(), wave(), psi), d0, 1e-8);
}

TEST(Projection, WeightedResidualBoundedByDistance) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n01;
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const double size = trial % 2 ? 1e-2 : 1e-3;
        const double a = n01(rng), b = n01(rng), c = n01(rng), x0 = 2.0 * n01(rng);
        Field u = Field::from_profile(grid(), wave(), 0.1);
        for (std::size_t k = 0; k < u.size(); ++k) {
            const double x = u.grid.node(k) - x0;
            u.values[k] += size * (a * std::exp(-x * x) + b * x * std::exp(-x * x) + c * std::exp(-0.2 * x * x) * std::sin(x));
        }
        const auto p = project_phase(u, wave(), 0.1);
        worst = std::max(worst, weighted_dist(u, p.psi) / dist_to_manifold(u, wave(), 0.1));
    }
    EXPECT_LE(worst, 2.0);
}

TEST(Tracker, FollowsTranslatedWave) {
    PhaseTracker track(wave());
    for (double psi : {0.0, 0.3, 0.7, 1.4}) {
        const auto s = track(Field::from_profile(grid(), wave(), psi));
        EXPECT_TRUE(s.in_tube);
        EXPECT_NEAR(s.psi, psi, 1e-8);
        EXPECT_NEAR(track.psi(), psi, 1e-8);
    }
    const auto out = track(Field::constant(grid(), wave().fixed_points().a));
    EXPECT_FALSE(out.in_tube);
}
