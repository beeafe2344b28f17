#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

namespace adisweep {

inline constexpr double pi = std::numbers::pi;

// Wrap into (-pi, pi]. Idempotent.
inline double wrap_angle(double x) {
    double r = std::remainder(x, 2.0 * pi);
    if (r <= -pi) r += 2.0 * pi;  // remainder lands in [-pi, pi]; fold the closed edge
    return r;
}

#if defined(__GLIBC__)
extern "C" void sincos(double, double*, double*);
#endif

// Paired sine and cosine through one libm entry point. Compilers fuse
// sin/cos pairs into sincos in some inlining contexts and not others, and
// glibc's sincos differs from separate sin by an ulp for some arguments;
// a single entry keeps equal states bit-identical wherever evaluated.
inline void sin_cos(double x, double& s, double& c) {
#if defined(__GLIBC__)
    ::sincos(x, &s, &c);
#else
    s = std::sin(x);
    c = std::cos(x);
#endif
}

namespace detail {

template <class F>
double adaptive_simpson_rec(F&& f, double a, double fa, double b, double fb, double m,
                            double fm, double whole, double tol, int depth) {
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

} // namespace detail

// Adaptive Simpson quadrature with Richardson correction.
template <class F>
double integrate_adaptive(F&& f, double a, double b, double tol, int max_depth = 40) {
    double m = 0.5 * (a + b);
    double fa = f(a), fb = f(b), fm = f(m);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

// Angular frequency from the mean half-period between sign changes of a sampled
// oscillation. Crossing times are refined by linear interpolation between the
// bracketing samples. Returns 0 when fewer than two crossings are present.
inline double frequency_from_zero_crossings(const std::vector<double>& t,
                                            const std::vector<double>& y) {
    std::vector<double> crossings;
    for (std::size_t i = 0; i + 1 < y.size(); ++i) {
        if ((y[i] > 0.0 && y[i + 1] <= 0.0) || (y[i] < 0.0 && y[i + 1] >= 0.0)) {
            double f0 = y[i], f1 = y[i + 1];
            crossings.push_back(t[i] + (t[i + 1] - t[i]) * f0 / (f0 - f1));
        }
    }
    if (crossings.size() < 2) return 0.0;
    double span = crossings.back() - crossings.front();
    double mean_half_period = span / static_cast<double>(crossings.size() - 1);
    return pi / mean_half_period;
}

} // namespace adisweep
