#include <koba/modulus.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <koba/errors.hpp>
#include <koba/linalg.hpp>
#include <koba/quadrature.hpp>
#include <koba/sampling.hpp>

#include "text.hpp"

namespace koba
{

namespace
{

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

using text::fmt;
using text::parse_number;
using text::split;

// int_x^inf u^(a-1) e^(-u) du for a < 1, x >= 1, by the Lentz continued fraction.
double upper_gamma_cf(double a, double x)
{
    constexpr double tiny = 1e-300;
    double b = x + 1 - a;
    double c = 1 / tiny;
    double d = 1 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -i * (i - a);
        b += 2;
        d = an * d + b;
        if (std::abs(d) < tiny) {
            d = tiny;
        }
        c = b + an / c;
        if (std::abs(c) < tiny) {
            c = tiny;
        }
        d = 1 / d;
        const double step = d * c;
        h *= step;
        if (std::abs(step - 1) < 1e-16) {
            break;
        }
    }
    return std::exp(-x + a * std::log(x)) * h;
}

// int_0^b |log t|^-(1+eps) dt = Gamma(-eps, log(1/b)) for 0 < b < 1.
double log_family_integral(double eps, double b)
{
    const double x = -std::log(b);
    if (x >= 1) {
        return upper_gamma_cf(-eps, x);
    }
    const auto f = [eps](double u) { return std::pow(u, -(1 + eps)) * std::exp(-u); };
    return upper_gamma_cf(-eps, 1.0) + adaptive_simpson(f, x, 1.0, 1e-16).value;
}

} // namespace

Modulus Modulus::hoelder(double alpha, double c, double radius)
{
    if (!(alpha > 0 && alpha <= 1) || !(c > 0) || !(radius > 0)) {
        fail(ErrorKind::invalid_modulus, "hoelder modulus needs alpha in (0,1], c > 0, radius > 0");
    }
    return Modulus(Hoelder{alpha, c}, radius);
}

Modulus Modulus::log_family(double eps, double radius)
{
    if (!(eps > 0) || !(radius > 0 && radius < 1)) {
        fail(ErrorKind::invalid_modulus, "log-family modulus needs eps > 0 and radius in (0,1)");
    }
    return Modulus(LogFamily{eps}, radius);
}

Modulus Modulus::linear(double c, double radius)
{
    if (!(c > 0) || !(radius > 0)) {
        fail(ErrorKind::invalid_modulus, "linear modulus needs c > 0, radius > 0");
    }
    return Modulus(Linear{c}, radius);
}

Modulus Modulus::empirical(std::vector<double> t, std::vector<double> value)
{
    if (t.empty() || t.size() != value.size()) {
        fail(ErrorKind::invalid_modulus, "empirical modulus needs matching non-empty t and value columns");
    }
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (!std::isfinite(t[k]) || !std::isfinite(value[k]) || t[k] < 0 || value[k] < 0) {
            fail(ErrorKind::invalid_modulus, "empirical modulus entries must be finite and non-negative");
        }
        if (k > 0 && !(t[k] > t[k - 1])) {
            fail(ErrorKind::invalid_modulus, "empirical modulus abscissae must be strictly ascending");
        }
        if (k > 0 && value[k] < value[k - 1]) {
            fail(ErrorKind::invalid_modulus, "empirical modulus is not non-decreasing at t = " + fmt(t[k]));
        }
    }
    if (t.front() == 0 && value.front() != 0) {
        fail(ErrorKind::invalid_modulus, "empirical modulus must vanish at 0");
    }
    const double radius = t.back();
    if (!(radius > 0)) {
        fail(ErrorKind::invalid_modulus, "empirical modulus needs a positive abscissa");
    }
    return Modulus(Empirical{std::move(t), std::move(value)}, radius);
}

double Modulus::eval_unchecked(double t) const
{
    if (t <= 0) {
        return 0;
    }
    return std::visit(overloaded{
                          [t](const Hoelder &k) { return k.c * std::pow(t, k.alpha); },
                          [t](const LogFamily &k) { return std::pow(std::abs(std::log(t)), -(1 + k.eps)); },
                          [t](const Linear &k) { return k.c * t; },
                          [t](const Empirical &k) {
                              const auto it = std::lower_bound(k.t.begin(), k.t.end(), t);
                              if (it == k.t.end()) {
                                  return k.value.back();
                              }
                              return k.value[static_cast<std::size_t>(it - k.t.begin())];
                          },
                      },
                      kind_);
}

double Modulus::operator()(double t) const
{
    if (!(t >= 0 && t <= radius_)) {
        fail(ErrorKind::domain, "modulus evaluated at t = " + fmt(t) + " outside [0, " + fmt(radius_) + "]");
    }
    return eval_unchecked(t);
}

double Modulus::at_exp_neg(double u) const
{
    return std::visit(overloaded{
                          [u](const Hoelder &k) { return k.c * std::exp(-k.alpha * u); },
                          [u](const LogFamily &k) { return u > 0 ? std::pow(u, -(1 + k.eps)) : 0.0; },
                          [u](const Linear &k) { return k.c * std::exp(-u); },
                          [this, u](const Empirical &) { return eval_unchecked(std::exp(-u)); },
                      },
                      kind_);
}

double Modulus::integral(double b) const
{
    if (!(b >= 0 && b <= radius_)) {
        fail(ErrorKind::domain, "modulus integrated up to " + fmt(b) + " outside [0, " + fmt(radius_) + "]");
    }
    if (b == 0) {
        return 0;
    }
    return std::visit(overloaded{
                          [b](const Hoelder &k) { return k.c * std::pow(b, k.alpha + 1) / (k.alpha + 1); },
                          [b](const LogFamily &k) { return log_family_integral(k.eps, b); },
                          [b](const Linear &k) { return 0.5 * k.c * b * b; },
                          [b](const Empirical &k) {
                              double acc = 0;
                              double left = 0;
                              for (std::size_t i = 0; i < k.t.size() && left < b; ++i) {
                                  const double right = std::min(k.t[i], b);
                                  if (right > left) {
                                      acc += k.value[i] * (right - left);
                                      left = right;
                                  }
                              }
                              return acc;
                          },
                      },
                      kind_);
}

std::string_view Modulus::family() const noexcept
{
    return std::visit(overloaded{
                          [](const Hoelder &) { return std::string_view("hoelder"); },
                          [](const LogFamily &) { return std::string_view("log"); },
                          [](const Linear &) { return std::string_view("linear"); },
                          [](const Empirical &) { return std::string_view("empirical"); },
                      },
                      kind_);
}

std::string Modulus::literal() const
{
    return std::visit(
        overloaded{
            [this](const Hoelder &k) { return "hoelder:" + fmt(k.alpha) + ":" + fmt(k.c) + ":" + fmt(radius_); },
            [this](const LogFamily &k) { return "log:" + fmt(k.eps) + ":" + fmt(radius_); },
            [this](const Linear &k) { return "linear:" + fmt(k.c) + ":" + fmt(radius_); },
            [](const Empirical &k) { return "empirical[" + std::to_string(k.t.size()) + " points]"; },
        },
        kind_);
}

Modulus parse_modulus(std::string_view literal)
{
    const auto parts = split(literal, ':');
    const auto kind = parts.front();
    const auto want = [&](std::size_t lo, std::size_t hi) {
        if (parts.size() < lo || parts.size() > hi) {
            fail(ErrorKind::config, "wrong number of fields in modulus literal '" + std::string(literal) + "'");
        }
    };
    if (kind == "hoelder") {
        want(3, 4);
        const double radius = parts.size() == 4 ? parse_number(parts[3], "modulus radius") : 1.0;
        return Modulus::hoelder(parse_number(parts[1], "hoelder alpha"), parse_number(parts[2], "hoelder c"), radius);
    }
    if (kind == "log") {
        want(2, 3);
        const double radius = parts.size() == 3 ? parse_number(parts[2], "modulus radius") : 0.5;
        return Modulus::log_family(parse_number(parts[1], "log eps"), radius);
    }
    if (kind == "linear") {
        want(2, 3);
        const double radius = parts.size() == 3 ? parse_number(parts[2], "modulus radius") : 1.0;
        return Modulus::linear(parse_number(parts[1], "linear c"), radius);
    }
    if (kind == "empirical") {
        const auto colon = literal.find(':');
        if (colon == std::string_view::npos || colon + 1 >= literal.size()) {
            fail(ErrorKind::config, "empirical modulus literal needs a CSV path");
        }
        return load_empirical_csv(std::string(literal.substr(colon + 1)));
    }
    fail(ErrorKind::config, "unknown modulus kind '" + std::string(kind) + "' in literal '" + std::string(literal) + "'");
}

Modulus load_empirical_csv(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in) {
        fail(ErrorKind::config, "cannot open empirical modulus file " + path.string());
    }
    std::string line;
    if (!std::getline(in, line) || line.rfind("t,value", 0) != 0) {
        fail(ErrorKind::config, "empirical modulus file must start with header 't,value'");
    }
    std::vector<double> t;
    std::vector<double> v;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto fields = split(line, ',');
        if (fields.size() != 2) {
            fail(ErrorKind::config, "malformed empirical modulus row: '" + line + "'");
        }
        std::string_view second = fields[1];
        if (!second.empty() && second.back() == '\r') {
            second.remove_suffix(1);
        }
        t.push_back(parse_number(fields[0], "t"));
        v.push_back(parse_number(second, "value"));
    }
    return Modulus::empirical(std::move(t), std::move(v));
}

DiniResult dini_integral(const Modulus &omega, double sigma, double tol)
{
    if (!(sigma > 0 && sigma <= omega.radius())) {
        fail(ErrorKind::domain, "dini integral needs sigma in (0, " + fmt(omega.radius()) + "], got " + fmt(sigma));
    }
    if (!(tol > 0)) {
        fail(ErrorKind::argument, "dini integral needs tol > 0");
    }

    if (const auto *lf = std::get_if<LogFamily>(&omega.kind())) {
        DiniResult res;
        res.finite = true;
        res.value = std::pow(std::log(1.0 / sigma), -lf->eps) / lf->eps;
        res.partial = res.value;
        return res;
    }

    // With t = exp(-u) the integral becomes the integral of omega(exp(-u)) over
    // [log(1/sigma), inf). Block j covers the dyadic pieces [2^-(k+1) sigma, 2^-k sigma]
    // for k in [2^j - 1, 2^(j+1) - 1).
    constexpr double ln2 = 0.69314718055994530942;
    constexpr int max_blocks = 1000;
    constexpr int sub_blocks = 16;
    // Contraction ratio at or above which blocks count as non-Cauchy
    // (power-law decay of the dyadic pieces no faster than k^-1.1).
    const double stall_ratio = std::pow(2.0, -0.1);
    constexpr int stall_window = 4;

    const double u0 = std::log(1.0 / sigma);
    const auto g = [&omega](double u) { return omega.at_exp_neg(u); };
    const auto integrate = [&](double a, double b, double block_tol) {
        double acc = 0;
        const double w = (b - a) / sub_blocks;
        for (int i = 0; i < sub_blocks; ++i) {
            const double lo = a + i * w;
            const double hi = (i + 1 == sub_blocks) ? b : lo + w;
            acc += adaptive_simpson(g, lo, hi, block_tol / sub_blocks).value;
        }
        return acc;
    };

    DiniResult res;
    std::vector<double> blocks;
    double sum = 0;
    for (int j = 0; j < max_blocks; ++j) {
        const double a = u0 + (std::ldexp(1.0, j) - 1) * ln2;
        const double b = u0 + (std::ldexp(1.0, j + 1) - 1) * ln2;
        const double block_tol = std::max(tol * std::ldexp(1.0, -(j + 3)), tol * 1e-6);
        const double bj = integrate(a, b, block_tol);
        blocks.push_back(bj);
        sum += bj;
        res.blocks = j + 1;
        res.partial = sum;

        if (j >= 1) {
            const double prev = blocks[static_cast<std::size_t>(j - 1)];
            const double q = prev > 0 ? bj / prev : 0.0;
            if (bj <= tol / 4 && q <= 0.9) {
                const double tail = bj > 0 ? bj * q / (1 - q) : 0.0;
                if (tail <= tol / 4) {
                    res.finite = true;
                    res.value = sum + tail;
                    return res;
                }
            }
        }

        if (j >= 5) {
            // Pieces are non-increasing because omega is; the last piece of the
            // block bounds the previous ones from below.
            const double last_piece = integrate(b - ln2, b, tol * 1e-3);
            bool stalled = true;
            for (int i = j - stall_window + 1; i <= j; ++i) {
                const double prev = blocks[static_cast<std::size_t>(i - 1)];
                if (!(prev > 0 && blocks[static_cast<std::size_t>(i)] / prev >= stall_ratio)) {
                    stalled = false;
                    break;
                }
            }
            if (last_piece > tol && sum > 1e6 * tol && stalled) {
                res.finite = false;
                res.value = std::numeric_limits<double>::infinity();
                return res;
            }
        }
    }
    throw ToleranceNotMet("dini integral neither converged nor diverged within the block budget", sum,
                          std::numeric_limits<double>::infinity());
}

HTransform::HTransform(Modulus omega, double r) : omega_(std::move(omega)), r_(r)
{
    if (!(r > 0) || 2 * r > omega_.radius() * (1 + 1e-15)) {
        fail(ErrorKind::domain, "h-transform needs 0 < 2r <= modulus radius");
    }
    constexpr int nodes = 512;
    step_ = 2 * r_ / nodes;
    table_.resize(nodes + 1);
    table_[0] = 0;
    const double top = std::min(2 * r_, omega_.radius());
    double prev = 0;
    for (int i = 1; i <= nodes; ++i) {
        const double x = std::min(i * step_, top);
        const double cur = omega_.integral(x);
        // Cumulative integrals of a non-negative integrand; keep the table monotone.
        prev = std::max(prev, cur);
        table_[static_cast<std::size_t>(i)] = prev;
    }
}

double HTransform::integrate_from_node(double t) const
{
    const auto i = std::min(static_cast<std::size_t>(t / step_), table_.size() - 1);
    const double node = static_cast<double>(i) * step_;
    if (t <= node) {
        return table_[i];
    }
    return std::max(table_[i], omega_.integral(t));
}

double HTransform::operator()(double t) const
{
    const double a = std::abs(t);
    if (!(a < 2 * r_)) {
        fail(ErrorKind::domain, "h evaluated at t = " + fmt(t) + " outside (-2r, 2r)");
    }
    return integrate_from_node(a);
}

double HTransform::derivative(double t) const
{
    const double a = std::abs(t);
    if (!(a < 2 * r_)) {
        fail(ErrorKind::domain, "h' evaluated at t = " + fmt(t) + " outside (-2r, 2r)");
    }
    const double w = omega_(a);
    return t < 0 ? -w : w;
}

double HTransform::inverse(double s) const
{
    if (!(s >= 0) || !(s < range_max())) {
        fail(ErrorKind::range, "h inverse requested at s = " + fmt(s) + " beyond h(2r-) = " + fmt(range_max()));
    }
    if (s == 0) {
        return 0;
    }
    const double top = std::nextafter(2 * r_, 0.0);
    const auto [lo, hi] = bisect([this, s](double t) { return integrate_from_node(t) >= s; }, 0.0, top, 1e-13);
    return 0.5 * (lo + hi);
}

HTransform h_transform(const Modulus &omega, double r) { return HTransform(omega, r); }

SubadditivityResult check_subadditive(const std::function<double(double)> &omega,
                                      std::span<const std::pair<double, double>> grid)
{
    if (grid.empty()) {
        fail(ErrorKind::argument, "sub-additivity check needs a non-empty grid");
    }
    SubadditivityResult res;
    res.gap = -std::numeric_limits<double>::infinity();
    for (const auto &[s, t] : grid) {
        if (s < 0 || t < 0) {
            fail(ErrorKind::argument, "sub-additivity grid entries must be non-negative");
        }
        const double gap = omega(s + t) - omega(s) - omega(t);
        if (gap > res.gap) {
            res.gap = gap;
            res.worst_s = s;
            res.worst_t = t;
        }
    }
    res.pass = res.gap <= subadditivity_slack;
    return res;
}

SubadditivityResult check_subadditive(const Modulus &omega, std::span<const std::pair<double, double>> grid)
{
    for (const auto &[s, t] : grid) {
        if (s + t > omega.radius()) {
            fail(ErrorKind::argument, "sub-additivity grid pair exceeds the modulus radius");
        }
    }
    return check_subadditive([&omega](double x) { return omega(x); }, grid);
}

std::vector<std::pair<double, double>> square_grid(double limit, std::size_t n)
{
    std::vector<std::pair<double, double>> out;
    out.reserve(n * n);
    const double half = 0.5 * limit;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            out.emplace_back(half * static_cast<double>(i) / static_cast<double>(n),
                             half * static_cast<double>(j) / static_cast<double>(n));
        }
    }
    return out;
}

Modulus empirical_modulus(const ScalarField &f, std::span<const double> center, double radius, std::size_t budget,
                          std::uint64_t seed, Exec exec)
{
    if (budget < 2) {
        fail(ErrorKind::argument, "empirical modulus needs a budget of at least 2 evaluations");
    }
    if (!(radius > 0) || center.empty()) {
        fail(ErrorKind::argument, "empirical modulus needs a non-empty center and radius > 0");
    }
    const std::size_t dim = center.size();
    const std::size_t lines =
        dim == 1 ? 1 : std::max<std::size_t>(2, static_cast<std::size_t>(std::sqrt(static_cast<double>(budget))));
    const std::size_t per_line = std::max<std::size_t>(2, budget / lines);
    const double h = 2 * radius / static_cast<double>(per_line - 1);

    std::vector<std::vector<double>> lag_max(lines);
    std::vector<std::string> errors(lines);

    const auto run_line = [&](std::size_t l) {
        std::seed_seq seq{seed, static_cast<std::uint64_t>(l)};
        std::mt19937_64 rng(seq);
        RVec x0(center.begin(), center.end());
        RVec u(dim, 0.0);
        u[0] = 1;
        if (dim > 1) {
            x0 = random_in_ball(rng, center, radius);
            u = random_unit(rng, dim);
        }
        const RVec off = sub(x0, center);
        const double b = dot(u, off);
        const double c = dot(off, off) - radius * radius;
        const double disc = std::sqrt(std::max(0.0, b * b - c));
        const double s_lo = -b - disc;
        const double s_hi = -b + disc;
        std::vector<double> values;
        try {
            for (std::size_t k = 0; k < per_line; ++k) {
                const double s = s_lo + static_cast<double>(k) * h;
                if (s > s_hi) {
                    break;
                }
                const double fx = f(axpy(x0, s, u));
                if (!std::isfinite(fx)) {
                    throw std::runtime_error("non-finite value");
                }
                values.push_back(fx);
            }
        } catch (const std::exception &e) {
            errors[l] = e.what();
            return;
        }
        std::vector<double> &lags = lag_max[l];
        lags.assign(values.size(), 0.0);
        for (std::size_t lag = 1; lag < values.size(); ++lag) {
            double m = 0;
            for (std::size_t i = 0; i + lag < values.size(); ++i) {
                m = std::max(m, std::abs(values[i + lag] - values[i]));
            }
            lags[lag] = m;
        }
    };

    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
        for (std::size_t l = 0; l < lines; ++l) {
            run_line(l);
        }
    } else {
        for (std::size_t l = 0; l < lines; ++l) {
            run_line(l);
        }
    }

    for (const auto &e : errors) {
        if (!e.empty()) {
            fail(ErrorKind::sampling, "function evaluation failed while sampling: " + e);
        }
    }

    std::size_t kmax = 0;
    for (const auto &lags : lag_max) {
        kmax = std::max(kmax, lags.empty() ? 0 : lags.size() - 1);
    }
    if (kmax == 0) {
        fail(ErrorKind::sampling, "sampled chords too short for the requested budget");
    }
    std::vector<double> t(kmax + 1);
    std::vector<double> v(kmax + 1, 0.0);
    for (std::size_t k = 0; k <= kmax; ++k) {
        t[k] = static_cast<double>(k) * h;
        for (const auto &lags : lag_max) {
            if (k < lags.size()) {
                v[k] = std::max(v[k], lags[k]);
            }
        }
        if (k > 0) {
            v[k] = std::max(v[k], v[k - 1]);
        }
    }
    return Modulus::empirical(std::move(t), std::move(v));
}

} // namespace koba
