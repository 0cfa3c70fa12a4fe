#ifndef HAWKESWAVE_QUADRATURE_HPP
#define HAWKESWAVE_QUADRATURE_HPP

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace hawkeswave::quad {

/// Adaptive Gauss-Kronrod (15 points) on [a, b], relative tolerance on the L1 norm.
template <class F>
double adaptive(F&& f, double a, double b, double rel_tol = 1e-12, unsigned max_depth = 15) {
    if (a == b) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, max_depth, rel_tol);
}

/// Composite 8-point Gauss-Legendre over `panels` equal sub-intervals.
template <class F>
double panels(F&& f, double a, double b, int panels) {
    const double h = (b - a) / panels;
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h;
        sum += boost::math::quadrature::gauss<double, 8>::integrate(f, lo, lo + h);
    }
    return sum;
}

}  // namespace hawkeswave::quad

#endif  // HAWKESWAVE_QUADRATURE_HPP
