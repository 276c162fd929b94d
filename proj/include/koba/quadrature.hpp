#ifndef KOBA_QUADRATURE_HPP
#define KOBA_QUADRATURE_HPP

#include <cmath>

namespace koba
{

struct QuadratureResult {
    double value = 0;
    // Sum of the local Richardson error estimates.
    double error = 0;
    // Set when some subinterval was accepted only because max_depth was reached.
    bool depth_limited = false;
};

namespace detail
{

template <typename F>
void simpson_step(const F &f, double a, double fa, double m, double fm, double b, double fb, double whole, double tol,
                  int depth, QuadratureResult &out)
{
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6 * (fa + 4 * flm + fm);
    const double right = (b - m) / 6 * (fm + 4 * frm + fb);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15 * tol || depth <= 0 || !(lm > a && rm < b)) {
        if (depth <= 0 && std::abs(delta) > 15 * tol) {
            out.depth_limited = true;
        }
        out.value += left + right + delta / 15;
        out.error += std::abs(delta) / 15;
        return;
    }
    simpson_step(f, a, fa, lm, flm, m, fm, left, tol / 2, depth - 1, out);
    simpson_step(f, m, fm, rm, frm, b, fb, right, tol / 2, depth - 1, out);
}

} // namespace detail

// Adaptive Simpson quadrature with absolute tolerance.
template <typename F>
QuadratureResult adaptive_simpson(const F &f, double a, double b, double tol, int max_depth = 40)
{
    QuadratureResult out;
    if (a == b) {
        return out;
    }
    const double fa = f(a);
    const double fb = f(b);
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    const double whole = (b - a) / 6 * (fa + 4 * fm + fb);
    detail::simpson_step(f, a, fa, m, fm, b, fb, whole, tol, max_depth, out);
    return out;
}

// Bisection for the unique root of a monotone predicate switch on [lo, hi]:
// pred(lo) is false, pred(hi) is true. Returns the final [lo, hi].
template <typename P>
std::pair<double, double> bisect(const P &pred, double lo, double hi, double tol)
{
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        if (pred(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return {lo, hi};
}

} // namespace koba

#endif
