#ifndef KOBA_LINALG_HPP
#define KOBA_LINALG_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace koba
{

// A point of C^n stored as (Re z_1, Im z_1, ..., Re z_n, Im z_n).
using RVec = std::vector<double>;
using CVec = std::vector<std::complex<double>>;

inline double dot(std::span<const double> a, std::span<const double> b)
{
    double acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline RVec add(std::span<const double> a, std::span<const double> b)
{
    RVec out(a.begin(), a.end());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] += b[i];
    }
    return out;
}

inline RVec sub(std::span<const double> a, std::span<const double> b)
{
    RVec out(a.begin(), a.end());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] -= b[i];
    }
    return out;
}

inline RVec scaled(std::span<const double> a, double s)
{
    RVec out(a.begin(), a.end());
    for (auto &x : out) {
        x *= s;
    }
    return out;
}

// a + s * b
inline RVec axpy(std::span<const double> a, double s, std::span<const double> b)
{
    RVec out(a.begin(), a.end());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] += s * b[i];
    }
    return out;
}

inline double distance(std::span<const double> a, std::span<const double> b) { return norm(sub(a, b)); }

inline RVec normalized(std::span<const double> a)
{
    const double n = norm(a);
    return scaled(a, 1.0 / n);
}

inline CVec to_complex(std::span<const double> x)
{
    CVec z(x.size() / 2);
    for (std::size_t j = 0; j < z.size(); ++j) {
        z[j] = {x[2 * j], x[2 * j + 1]};
    }
    return z;
}

inline RVec to_real(std::span<const std::complex<double>> z)
{
    RVec x(2 * z.size());
    for (std::size_t j = 0; j < z.size(); ++j) {
        x[2 * j] = z[j].real();
        x[2 * j + 1] = z[j].imag();
    }
    return x;
}

// Hermitian product <a, b> = sum a_j conj(b_j), evaluated on real storage.
inline std::complex<double> hermitian(std::span<const double> a, std::span<const double> b)
{
    double re = 0;
    double im = 0;
    for (std::size_t j = 0; 2 * j < a.size(); ++j) {
        const double ar = a[2 * j], ai = a[2 * j + 1];
        const double br = b[2 * j], bi = b[2 * j + 1];
        re += ar * br + ai * bi;
        im += ai * br - ar * bi;
    }
    return {re, im};
}

// z + lambda * v for complex lambda.
inline RVec complex_axpy(std::span<const double> z, std::complex<double> lambda, std::span<const double> v)
{
    RVec out(z.begin(), z.end());
    for (std::size_t j = 0; 2 * j < z.size(); ++j) {
        const std::complex<double> w = lambda * std::complex<double>(v[2 * j], v[2 * j + 1]);
        out[2 * j] += w.real();
        out[2 * j + 1] += w.imag();
    }
    return out;
}

} // namespace koba

#endif
