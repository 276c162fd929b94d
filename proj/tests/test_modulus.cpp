#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include <koba/errors.hpp>
#include <koba/modulus.hpp>

using namespace koba;

namespace
{

// Independent oracle for integrals with endpoint singularities.
double tanh_sinh(const std::function<double(double)> &f, double a, double b)
{
    boost::math::quadrature::tanh_sinh<double> integrator;
    return integrator.integrate(f, a, b);
}

Modulus inverse_log_modulus()
{
    // omega(t) = 1/|log t| on the grid t_k = 2^-k, k = 1..1000.
    std::vector<double> t;
    std::vector<double> v;
    for (int k = 1000; k >= 1; --k) {
        const double tk = std::ldexp(1.0, -k);
        t.push_back(tk);
        v.push_back(1.0 / std::abs(std::log(tk)));
    }
    return Modulus::empirical(t, v);
}

ErrorKind kind_of(const std::function<void()> &fn)
{
    try {
        fn();
    } catch (const Error &e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected an exception";
    return ErrorKind::config;
}

} // namespace

TEST(Dini, LinearIsSigma)
{
    const auto r = dini_integral(Modulus::linear(1.0), 1.0, 1e-10);
    ASSERT_TRUE(r.finite);
    EXPECT_NEAR(r.value, 1.0, 1e-8);
}

TEST(Dini, LogFamilyOneAtHalf)
{
    const auto omega = Modulus::log_family(1.0);
    const auto r = dini_integral(omega, 0.5, 1e-9);
    ASSERT_TRUE(r.finite);
    // Closed form via u = -log t: integral of u^-2 over [log 2, inf).
    EXPECT_NEAR(r.value, 1.0 / std::log(2.0), 1e-7);
    // Cross-check: quadrature in t on [delta, 1/2] plus the exact tail 1/|log delta|.
    const double delta = 1e-12;
    const double oracle =
        tanh_sinh([&](double t) { return omega(t) / t; }, delta, 0.5) + 1.0 / std::abs(std::log(delta));
    EXPECT_NEAR(oracle, r.value, 1e-6);
}

TEST(Dini, SquareRootIsTwo)
{
    const auto r = dini_integral(Modulus::hoelder(0.5, 1.0), 1.0, 1e-10);
    ASSERT_TRUE(r.finite);
    EXPECT_NEAR(r.value, 2.0, 1e-8);
}

TEST(Dini, HoelderClosedForm)
{
    for (const double alpha : {0.25, 0.5, 0.75, 1.0}) {
        for (const double sigma : {0.3, 1.0}) {
            const double c = 1.7;
            const auto r = dini_integral(Modulus::hoelder(alpha, c), sigma, 1e-10);
            ASSERT_TRUE(r.finite);
            EXPECT_NEAR(r.value, c * std::pow(sigma, alpha) / alpha, 1e-7) << alpha << " " << sigma;
        }
    }
}

TEST(Dini, LogFamilyFiniteForSeveralEps)
{
    for (const double eps : {0.5, 1.0, 2.0}) {
        const auto r = dini_integral(Modulus::log_family(eps), 0.5, 1e-9);
        ASSERT_TRUE(r.finite) << eps;
        // integral of u^-(1+eps) over [log 2, inf) = (log 2)^-eps / eps
        EXPECT_NEAR(r.value, std::pow(std::log(2.0), -eps) / eps, 1e-6) << eps;
    }
}

TEST(Dini, InverseLogDiverges)
{
    const auto omega = inverse_log_modulus();
    const auto r = dini_integral(omega, 0.5, 1e-6);
    EXPECT_FALSE(r.finite);
    // Oracle: partial integrals over [2^-k sigma, sigma] grow like log log(1/t).
    // Piece k contributes about 1/(k+1) so the partial sum at k=62 exceeds 3.
    double partial = 0;
    for (int k = 1; k <= 62; ++k) {
        partial += std::log(2.0) * omega(std::ldexp(0.5, -k)) * 1.0;
    }
    EXPECT_GT(partial, 3.0);
    EXPECT_GT(r.partial, 3.0);
}

TEST(Dini, Errors)
{
    EXPECT_EQ(kind_of([] { dini_integral(Modulus::linear(1.0), 1.5, 1e-6); }), ErrorKind::domain);
    EXPECT_EQ(kind_of([] { dini_integral(Modulus::linear(1.0), 0.0, 1e-6); }), ErrorKind::domain);
    EXPECT_EQ(kind_of([] { dini_integral(Modulus::linear(1.0), 0.5, 0.0); }), ErrorKind::argument);
    EXPECT_EQ(kind_of([] { Modulus::empirical({0.1, 0.2, 0.3}, {0.1, 0.05, 0.2}); }), ErrorKind::invalid_modulus);
}

TEST(ModulusEval, OutsideDomainRaises)
{
    const auto w = Modulus::hoelder(0.5, 1.0, 0.5);
    EXPECT_EQ(kind_of([&] { w(0.6); }), ErrorKind::domain);
    EXPECT_EQ(kind_of([&] { w(-0.1); }), ErrorKind::domain);
    EXPECT_EQ(w(0.0), 0.0);
}

TEST(ModulusEval, MonotoneAndVanishingAtZero)
{
    const std::vector<Modulus> all{Modulus::hoelder(0.3, 2.0), Modulus::log_family(1.0), Modulus::linear(3.0),
                                   inverse_log_modulus()};
    for (const auto &w : all) {
        double prev = w(0.0);
        EXPECT_EQ(prev, 0.0);
        for (int i = 1; i <= 4000; ++i) {
            const double t = w.radius() * i / 4000.0;
            const double cur = w(t);
            EXPECT_GE(cur, prev) << w.literal() << " at " << t;
            prev = cur;
        }
        // Continuity at 0 on a dyadic grid.
        EXPECT_LT(w(w.radius() * std::ldexp(1.0, -60)), 0.05) << w.literal();
    }
}

TEST(ModulusParse, Literals)
{
    EXPECT_EQ(parse_modulus("hoelder:0.5:2").family(), "hoelder");
    EXPECT_EQ(parse_modulus("log:1").family(), "log");
    EXPECT_DOUBLE_EQ(parse_modulus("log:1").radius(), 0.5);
    EXPECT_DOUBLE_EQ(parse_modulus("linear:2:0.25").radius(), 0.25);
    try {
        parse_modulus("bogus:1");
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::config);
        EXPECT_NE(std::string(e.what()).find("unknown modulus kind"), std::string::npos);
    }
    EXPECT_EQ(kind_of([] { parse_modulus("hoelder:x:1"); }), ErrorKind::config);
    EXPECT_EQ(kind_of([] { parse_modulus("hoelder:0.5"); }), ErrorKind::config);
}

TEST(ModulusParse, EmpiricalCsv)
{
    const auto path = std::filesystem::temp_directory_path() / "koba_test_modulus.csv";
    {
        std::ofstream out(path);
        out << "t,value\n0,0\n0.1,0.2\n0.2,0.3\n";
    }
    const auto w = parse_modulus("empirical:" + path.string());
    EXPECT_EQ(w.family(), "empirical");
    EXPECT_DOUBLE_EQ(w(0.15), 0.3);
    EXPECT_DOUBLE_EQ(w(0.1), 0.2);
    {
        std::ofstream out(path);
        out << "t,value\n0,0\n0.1,0.2\n0.2,0.1\n";
    }
    EXPECT_EQ(kind_of([&] { parse_modulus("empirical:" + path.string()); }), ErrorKind::invalid_modulus);
    std::filesystem::remove(path);
}

TEST(HTransform, LinearClosedForm)
{
    const auto h = h_transform(Modulus::linear(1.0), 0.5);
    EXPECT_NEAR(h(0.2), 0.02, 1e-15);
    EXPECT_NEAR(h(-0.2), 0.02, 1e-15);
    EXPECT_NEAR(h.inverse(0.02), 0.2, 1e-12);
    EXPECT_EQ(h(0.0), 0.0);
}

TEST(HTransform, LogFamilyAgainstQuadrature)
{
    const auto omega = Modulus::log_family(1.0);
    const auto h = h_transform(omega, 0.25);
    const double v = h(0.1);
    // 0 < h(t) <= t * omega(t) because omega is non-decreasing.
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 0.01886);
    const double oracle = tanh_sinh([&](double t) { return omega(t); }, 0.0, 0.1);
    EXPECT_NEAR(v, oracle, 1e-12);
}

TEST(HTransform, InverseRoundTripAndShape)
{
    for (const auto &w : {Modulus::linear(1.0), Modulus::log_family(1.0), Modulus::hoelder(0.5, 1.0)}) {
        const double r = w.radius() / 2;
        const auto h = h_transform(w, r);
        double prev = -1;
        for (int i = 0; i < 200; ++i) {
            const double t = 2 * r * i / 200.0;
            const double v = h(t);
            EXPECT_GT(v, prev) << w.literal();
            prev = v;
            EXPECT_NEAR(h.inverse(v), t, 1e-10) << w.literal() << " t=" << t;
            EXPECT_DOUBLE_EQ(h(-t), v);
        }
        // h(t)/t -> 0 as t -> 0.
        EXPECT_LT(h(1e-6) / 1e-6, 0.1);
    }
}

TEST(HTransform, Errors)
{
    const auto h = h_transform(Modulus::linear(1.0), 0.5);
    EXPECT_EQ(kind_of([&] { h(1.0); }), ErrorKind::domain);
    EXPECT_EQ(kind_of([&] { h.inverse(0.6); }), ErrorKind::range);
    EXPECT_EQ(kind_of([] { h_transform(Modulus::linear(1.0), 0.6); }), ErrorKind::domain);
}

TEST(Subadditive, SquareRootPasses)
{
    const auto grid = square_grid(1.0, 50);
    const auto res = check_subadditive(Modulus::hoelder(0.5, 1.0), grid);
    EXPECT_TRUE(res.pass);
}

TEST(Subadditive, SquareFailsWithGap)
{
    const std::vector<std::pair<double, double>> grid{{0.5, 0.5}, {0.1, 0.2}};
    const auto res = check_subadditive([](double t) { return t * t; }, grid);
    EXPECT_FALSE(res.pass);
    EXPECT_DOUBLE_EQ(res.worst_s, 0.5);
    EXPECT_DOUBLE_EQ(res.worst_t, 0.5);
    EXPECT_NEAR(res.gap, 0.5, 1e-15);
}

TEST(Subadditive, LinearEqualityCase)
{
    const auto res = check_subadditive(Modulus::linear(1.0), square_grid(1.0, 20));
    EXPECT_TRUE(res.pass);
    EXPECT_NEAR(res.gap, 0.0, 1e-15);
}

TEST(Subadditive, EmptyGridRaises)
{
    EXPECT_EQ(kind_of([] { check_subadditive(Modulus::linear(1.0), {}); }), ErrorKind::argument);
}

TEST(EmpiricalModulus, Identity)
{
    const std::vector<double> c{0.0};
    const auto w = empirical_modulus([](std::span<const double> x) { return x[0]; }, c, 1.0, 10000, 7);
    for (int i = 0; i <= 100; ++i) {
        const double t = 1.9 * i / 100.0;
        EXPECT_NEAR(w(t), t, 0.02);
    }
}

TEST(EmpiricalModulus, Constant)
{
    const std::vector<double> c{0.0, 0.0, 0.0};
    const auto w = empirical_modulus([](std::span<const double>) { return 3.0; }, c, 1.0, 2000, 1);
    for (int i = 0; i <= 50; ++i) {
        EXPECT_EQ(w(w.radius() * i / 50.0), 0.0);
    }
}

TEST(EmpiricalModulus, SquareRootOfAbs)
{
    const std::vector<double> c{0.0};
    const auto f = [](std::span<const double> x) { return std::sqrt(std::abs(x[0])); };
    const auto w = empirical_modulus(f, c, 1.0, 4000, 3);
    // Exhaustive pairwise oracle on an independent grid.
    const int n = 801;
    std::vector<double> xs(n);
    for (int i = 0; i < n; ++i) {
        xs[static_cast<std::size_t>(i)] = -1.0 + 2.0 * i / (n - 1);
    }
    for (const double t : {0.01, 0.05, 0.1, 0.3, 0.7, 1.0, 1.5}) {
        double best = 0;
        for (int i = 0; i < n; ++i) {
            for (int j = i; j < n && xs[static_cast<std::size_t>(j)] - xs[static_cast<std::size_t>(i)] <= t; ++j) {
                best = std::max(best, std::abs(f(std::span(&xs[static_cast<std::size_t>(i)], 1)) -
                                               f(std::span(&xs[static_cast<std::size_t>(j)], 1))));
            }
        }
        EXPECT_NEAR(w(t), best, 0.05) << t;
        EXPECT_NEAR(w(t), std::min(1.0, std::sqrt(t)), 0.05) << t;
    }
}

TEST(EmpiricalModulus, DeterministicAndSerialMatchesParallel)
{
    const std::vector<double> c{0.1, -0.2};
    const auto f = [](std::span<const double> x) { return std::sin(3 * x[0]) + std::abs(x[1]); };
    const auto a = empirical_modulus(f, c, 0.5, 900, 11, Exec::serial);
    const auto b = empirical_modulus(f, c, 0.5, 900, 11, Exec::parallel);
    const auto &ea = std::get<Empirical>(a.kind());
    const auto &eb = std::get<Empirical>(b.kind());
    EXPECT_EQ(ea.t, eb.t);
    EXPECT_EQ(ea.value, eb.value);
}

TEST(EmpiricalModulus, SamplingFailurePropagates)
{
    const std::vector<double> c{0.0};
    const auto f = [](std::span<const double> x) -> double {
        if (x[0] > 0.5) {
            throw std::runtime_error("boom");
        }
        return x[0];
    };
    EXPECT_EQ(kind_of([&] { empirical_modulus(f, c, 1.0, 100, 1); }), ErrorKind::sampling);
}

TEST(EmpiricalModulus, OutputsAreSubadditive)
{
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> ud(-1, 1);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t dim = 1 + static_cast<std::size_t>(trial % 3);
        std::vector<double> a(dim);
        for (auto &x : a) {
            x = ud(rng);
        }
        const double expo = 0.3 + 0.07 * trial;
        const auto f = [a, expo](std::span<const double> x) {
            double acc = 0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                acc += a[i] * std::pow(std::abs(x[i]), expo);
            }
            return acc;
        };
        const std::vector<double> c(dim, 0.0);
        const auto w = empirical_modulus(f, c, 1.0, 1500, static_cast<std::uint64_t>(trial));
        EXPECT_TRUE(check_subadditive(w, square_grid(w.radius(), 60)).pass) << trial;
    }
}
