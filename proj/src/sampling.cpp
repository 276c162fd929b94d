#include <koba/sampling.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace koba
{

namespace
{

constexpr std::array<unsigned, 24> primes{2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37,
                                          41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89};

} // namespace

double radical_inverse(std::uint64_t index, unsigned base)
{
    double inv = 1.0 / base;
    double f = inv;
    double r = 0;
    while (index > 0) {
        r += f * static_cast<double>(index % base);
        index /= base;
        f *= inv;
    }
    return r;
}

std::vector<RVec> quasi_directions(std::size_t dim, std::size_t count, std::uint64_t offset)
{
    std::vector<RVec> out;
    out.reserve(count);
    const std::size_t pairs = (dim + 1) / 2;
    for (std::size_t k = 0; k < count; ++k) {
        RVec g(2 * pairs);
        for (std::size_t p = 0; p < pairs; ++p) {
            // Avoid u1 == 0 in the logarithm.
            const double u1 = std::max(radical_inverse(k + offset, primes[(2 * p) % primes.size()]), 1e-300);
            const double u2 = radical_inverse(k + offset, primes[(2 * p + 1) % primes.size()]);
            const double rad = std::sqrt(-2 * std::log(u1));
            g[2 * p] = rad * std::cos(2 * std::numbers::pi * u2);
            g[2 * p + 1] = rad * std::sin(2 * std::numbers::pi * u2);
        }
        g.resize(dim);
        const double n = norm(g);
        if (n < 1e-12) {
            g.assign(dim, 0.0);
            g[0] = 1;
        } else {
            for (auto &x : g) {
                x /= n;
            }
        }
        out.push_back(std::move(g));
    }
    return out;
}

std::vector<RVec> axis_directions(std::size_t dim)
{
    std::vector<RVec> out;
    for (std::size_t i = 0; i < dim; ++i) {
        RVec e(dim, 0.0);
        e[i] = -1;
        out.push_back(std::move(e));
    }
    for (std::size_t i = dim; i-- > 0;) {
        RVec e(dim, 0.0);
        e[i] = 1;
        out.push_back(std::move(e));
    }
    return out;
}

RVec random_unit(std::mt19937_64 &rng, std::size_t dim)
{
    std::normal_distribution<double> nd;
    while (true) {
        RVec g(dim);
        for (auto &x : g) {
            x = nd(rng);
        }
        const double n = norm(g);
        if (n > 1e-12) {
            return scaled(g, 1 / n);
        }
    }
}

RVec random_in_ball(std::mt19937_64 &rng, std::span<const double> center, double radius)
{
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    const RVec u = random_unit(rng, center.size());
    const double r = radius * std::pow(ud(rng), 1.0 / static_cast<double>(center.size()));
    return axpy(center, r, u);
}

bool lex_less(std::span<const double> a, std::span<const double> b)
{
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

} // namespace koba
