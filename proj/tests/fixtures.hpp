#ifndef HAWKESWAVE_TEST_FIXTURES_HPP
#define HAWKESWAVE_TEST_FIXTURES_HPP

#include <hawkeswave/hawkeswave.hpp>

// Frozen outputs of tests/oracles/fixtures.py (mpmath bisection, scipy DOP853 at rtol 1e-13).
namespace fixture {

inline constexpr double a1 = 0.0953741734925318;
inline constexpr double a2 = 0.9046258265074682;
inline constexpr double potential_at_a = 0.033309807439059;  // H(a)
inline constexpr double mu_right = 0.8821262419785429;       // sqrt(1 - f'(a2)) / sigma
inline constexpr double rho2 = 0.3724351057788;
inline constexpr double rho2_numerator = 0.0627372521374;
inline constexpr double rho2_denominator = 0.1684514997753;
inline constexpr double phase_variance_rate = 2.21093374814;
// eps = 0.02, beta = 0.75 ramp initial condition: N = 940, psi_min = 0.
inline constexpr double ramp_distance = 1.2237616101017;

inline hawkeswave::SigmoidSpec figure_sigmoid() {
    auto f = hawkeswave::SigmoidSpec::arctan(8.0, 0.5);
    hawkeswave::fixed_points(f);
    return f;
}

inline const hawkeswave::WaveProfile& figure_profile() {
    static const hawkeswave::WaveProfile w = hawkeswave::solve_profile(figure_sigmoid(), hawkeswave::KernelSpec(1.0));
    return w;
}

}  // namespace fixture

#endif  // HAWKESWAVE_TEST_FIXTURES_HPP
