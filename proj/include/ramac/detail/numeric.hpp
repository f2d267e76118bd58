#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

namespace ramac::detail {

/// Gaussian tail probability Q(x) = P(Z > x) for standard normal Z.
inline double q_function(double x) {
    return 0.5 * std::erfc(x / std::sqrt(2.0));
}

/// Exponentially scaled modified Bessel function I0(x)*exp(-|x|).
/// Polynomial fits from Abramowitz & Stegun 9.8.1/9.8.2 (abs error < 2e-7
/// on the scaled function), which keeps the Rician fading integrand finite
/// for arbitrarily large arguments.
inline double bessel_i0_scaled(double x) {
    const double ax = std::fabs(x);
    if (ax < 3.75) {
        const double t = x / 3.75;
        const double t2 = t * t;
        const double i0 =
            1.0 + t2 * (3.5156229 +
                  t2 * (3.0899424 +
                  t2 * (1.2067492 +
                  t2 * (0.2659732 +
                  t2 * (0.0360768 +
                  t2 * 0.0045813)))));
        return i0 * std::exp(-ax);
    }
    const double t = 3.75 / ax;
    const double poly =
        0.39894228 + t * (0.01328592 +
                     t * (0.00225319 +
                     t * (-0.00157565 +
                     t * (0.00916281 +
                     t * (-0.02057706 +
                     t * (0.02635537 +
                     t * (-0.01647633 +
                     t * 0.00392377)))))));
    return poly / std::sqrt(ax);
}

namespace simpson_impl {

inline double recurse(const std::function<double(double)>& f, double a, double b,
                      double fa, double fm, double fb, double whole, double tol,
                      int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace simpson_impl

/// Adaptive Simpson quadrature of f over [a, b].
/// Terminates when the local error estimate falls below
/// max(rel_tol * |first whole-interval estimate|, abs_tol).
inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double rel_tol, double abs_tol,
                               int max_depth = 48) {
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double tol = std::fmax(rel_tol * std::fabs(whole), abs_tol);
    return simpson_impl::recurse(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

/// Format with a fixed number of significant digits ("%.*g").
inline std::string format_sig(double v, int digits) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    return buf;
}

}  // namespace ramac::detail
