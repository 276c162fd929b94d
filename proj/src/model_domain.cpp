#include <koba/model_domain.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <koba/errors.hpp>
#include <koba/linalg.hpp>
#include <koba/quadrature.hpp>
#include <koba/sampling.hpp>

namespace koba
{

ModelDomain::ModelDomain(Modulus omega, double alpha, double tau)
    : h_(omega, 0.5 * omega.radius()), alpha_(alpha), tau_(tau)
{
    if (!(alpha >= 1) || !std::isfinite(alpha)) {
        fail(ErrorKind::argument, "model domain needs alpha >= 1");
    }
    if (!(tau > 0) || !(tau < omega.radius())) {
        fail(ErrorKind::argument, "model domain needs 0 < tau < modulus radius");
    }
    constexpr std::size_t nodes = 512;
    step_ = tau / nodes;
    arc_table_.assign(nodes + 1, 0.0);
    for (std::size_t i = 1; i <= nodes; ++i) {
        const double a = step_ * static_cast<double>(i - 1);
        const double b = i == nodes ? tau : step_ * static_cast<double>(i);
        arc_table_[i] = arc_table_[i - 1] + adaptive_simpson([&](double t) { return speed(t); }, a, b, 1e-15).value;
    }
}

double ModelDomain::speed(double t) const
{
    const double w = alpha_ * modulus()(t);
    return std::sqrt(1 + w * w);
}

double ModelDomain::arclength(double y) const
{
    const double a = std::abs(y);
    if (!(a <= tau_)) {
        fail(ErrorKind::domain, "arclength needs |y| <= tau");
    }
    const auto i = std::min(static_cast<std::size_t>(a / step_), arc_table_.size() - 1);
    const double node = step_ * static_cast<double>(i);
    const double g = arc_table_[i] + adaptive_simpson([&](double t) { return speed(t); }, node, a, 1e-15).value;
    return y < 0 ? -g : g;
}

bool ModelDomain::contains(std::complex<double> zeta) const
{
    const double s = zeta.real();
    const double t = zeta.imag();
    if (!(std::abs(t) < tau_) || !(s < tau_)) {
        return false;
    }
    return alpha_ * h_(t) < s;
}

double ModelDomain::half_height(double s) const
{
    if (!(s > 0)) {
        return 0;
    }
    const double x = s / alpha_;
    if (x >= h_.range_max()) {
        return tau_;
    }
    return std::min(h_.inverse(x), tau_);
}

bool model_membership(const ModelDomain &model, std::complex<double> zeta) { return model.contains(zeta); }

namespace
{

double largest_dyadic_below(double x)
{
    double d = std::exp2(std::floor(std::log2(x)));
    while (d >= x) {
        d *= 0.5;
    }
    return d;
}

std::vector<double> tau_grid(double tau)
{
    std::vector<double> xs;
    for (int j = 40; j >= 1; --j) {
        xs.push_back(std::ldexp(tau, -j));
    }
    for (int k = 1; k < 1000; ++k) {
        xs.push_back(tau * k / 1000.0);
    }
    xs.push_back(tau * (1 - 1e-9));
    return xs;
}

} // namespace

ParameterCertificate select_parameters(const ConvexDomain &domain, const Modulus &omega, double r,
                                       std::size_t boundary_samples, std::uint64_t seed,
                                       std::size_t oscillation_pairs)
{
    if (!(r > 0)) {
        fail(ErrorKind::argument, "neighbourhood radius must be positive");
    }
    if (boundary_samples == 0 || oscillation_pairs == 0) {
        fail(ErrorKind::argument, "sample counts must be positive");
    }
    ParameterCertificate cert;
    const auto samples = boundary_points(domain, boundary_samples);
    if (samples.empty()) {
        fail(ErrorKind::certificate_failure, "no admissible boundary samples on " + domain.tag());
    }
    cert.boundary_samples = samples.size();
    std::vector<RVec> grads;
    double min_grad = std::numeric_limits<double>::infinity();
    for (const auto &xi : samples) {
        grads.push_back(domain.active_piece(xi).gradient);
        min_grad = std::min(min_grad, norm(grads.back()));
    }
    cert.min_gradient = min_grad;
    cert.m = 0.9 * min_grad;
    if (!(cert.m >= 1e-8)) {
        fail(ErrorKind::degenerate_defining_function, "sampled gradient lower bound m is below 1e-8");
    }

    cert.oscillation_pairs = oscillation_pairs;
    double delta = largest_dyadic_below(r);
    while (true) {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<std::size_t> pick(0, samples.size() - 1);
        double osc = 0;
        for (std::size_t k = 0; k < oscillation_pairs; ++k) {
            const std::size_t i = pick(rng);
            const RVec y = random_in_ball(rng, samples[i], delta);
            osc = std::max(osc, distance(grads[i], domain.active_piece(y).gradient));
        }
        if (osc <= 0.5 * cert.m) {
            cert.delta0 = delta;
            cert.oscillation = osc;
            break;
        }
        delta *= 0.5;
        if (delta < 1e-12 * domain.bounding_radius()) {
            fail(ErrorKind::certificate_failure, "no dyadic radius keeps the gradient oscillation below m/2");
        }
    }

    cert.alpha = std::max(1.0, 8.0 / cert.m);
    const HTransform h(omega, 0.5 * omega.radius());
    const double cap = std::min({cert.delta0 / std::sqrt(2.0), h.range_max(), omega.radius()});
    double tau = largest_dyadic_below(cap);
    while (true) {
        const auto xs = tau_grid(tau);
        double worst = 0;
        for (double x : xs) {
            worst = std::max(worst, x / h.inverse(x));
        }
        if (worst <= 1.0 / cert.alpha) {
            cert.tau = tau;
            cert.tau_ratio = worst;
            cert.tau_grid = xs.size();
            break;
        }
        tau *= 0.5;
        if (tau < 1e-300) {
            std::ostringstream os;
            os << "no admissible tau: m=" << cert.m << " delta0=" << cert.delta0 << " alpha=" << cert.alpha;
            fail(ErrorKind::certificate_failure, os.str());
        }
    }
    return cert;
}

EmbeddingReport verify_embedding(const ConvexDomain &domain, const BoundaryPoint &xi, const ModelDomain &model,
                                 const ParameterCertificate &cert, std::size_t grid_s, std::size_t grid_t, Exec exec)
{
    if (grid_s < 2 || grid_t < 2) {
        fail(ErrorKind::argument, "embedding grid needs at least 2 points per axis");
    }
    if (xi.xi.size() != domain.real_dim()) {
        fail(ErrorKind::argument, "boundary point has the wrong dimension");
    }
    (void)cert;
    const double tau = model.tau();
    const double s_lo = std::ldexp(tau, -20);
    const double s_hi = tau * (1 - std::ldexp(1.0, -10));
    const double ratio = std::pow(s_hi / s_lo, 1.0 / static_cast<double>(grid_s - 1));
    const RVec jeta = multiply_by_i(xi.normal);

    struct Row {
        double worst = -std::numeric_limits<double>::infinity();
        double t = 0;
        double half = 0;
        std::vector<std::pair<double, double>> bad;
    };
    std::vector<double> ss(grid_s);
    for (std::size_t i = 0; i < grid_s; ++i) {
        ss[i] = i + 1 == grid_s ? s_hi : s_lo * std::pow(ratio, static_cast<double>(i));
    }
    std::vector<Row> rows(grid_s);
    const auto fill = [&](std::size_t i) {
        const double s = ss[i];
        const double half = model.half_height(s) * (1 - 1e-9);
        Row &row = rows[i];
        row.half = half;
        for (std::size_t j = 0; j < grid_t; ++j) {
            const double t = -half + 2 * half * static_cast<double>(j) / static_cast<double>(grid_t - 1);
            RVec p = axpy(xi.xi, s, xi.normal);
            p = axpy(p, t, jeta);
            const double v = domain.rho(p);
            if (v >= 0) {
                row.bad.emplace_back(s, t);
            }
            if (v / s > row.worst) {
                row.worst = v / s;
                row.t = t;
            }
        }
    };
    if (exec == Exec::parallel) {
        const auto n = static_cast<std::ptrdiff_t>(grid_s);
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            fill(static_cast<std::size_t>(i));
        }
    } else {
        for (std::size_t i = 0; i < grid_s; ++i) {
            fill(i);
        }
    }

    EmbeddingReport rep;
    rep.grid_s = grid_s;
    rep.grid_t = grid_t;
    rep.worst_margin = -std::numeric_limits<double>::infinity();
    std::vector<std::pair<double, double>> bad;
    for (std::size_t i = 0; i < grid_s; ++i) {
        rep.row_s.push_back(ss[i]);
        rep.row_half_height.push_back(rows[i].half);
        rep.row_worst.push_back(rows[i].worst);
        bad.insert(bad.end(), rows[i].bad.begin(), rows[i].bad.end());
        if (rows[i].worst > rep.worst_margin) {
            rep.worst_margin = rows[i].worst;
            rep.worst_s = ss[i];
            rep.worst_t = rows[i].t;
        }
    }
    if (!bad.empty()) {
        std::ostringstream os;
        os.precision(17);
        os << bad.size() << " grid points leave the domain, e.g.";
        for (std::size_t k = 0; k < std::min<std::size_t>(bad.size(), 5); ++k) {
            os << " (" << bad[k].first << (bad[k].second < 0 ? "" : "+") << bad[k].second << "i)";
        }
        fail(ErrorKind::embedding_violation, os.str());
    }
    return rep;
}

BoundaryGeometry boundary_geometry(const ModelDomain &model, double y)
{
    if (!(std::abs(y) < model.tau())) {
        fail(ErrorKind::domain, "boundary_geometry needs |y| < tau");
    }
    const double w = model.alpha() * model.modulus()(std::abs(y));
    const double theta = y < 0 ? -std::atan(w) : std::atan(w);
    return {theta, model.arclength(y)};
}

double arclength_inverse(const ModelDomain &model, double s)
{
    const double top = model.tau() * (1 - 1e-12);
    const double a = std::abs(s);
    if (a >= model.arclength(top)) {
        fail(ErrorKind::domain, "arclength value beyond G(tau)");
    }
    const auto [lo, hi] = bisect([&](double y) { return model.arclength(y) >= a; }, 0.0, std::min(a, top), 1e-12);
    const double y = 0.5 * (lo + hi);
    return s < 0 ? -y : y;
}

AngleCheck tangent_angle_check(const ModelDomain &model, std::size_t points, Exec exec)
{
    if (points == 0) {
        fail(ErrorKind::argument, "angle check needs at least one point");
    }
    const Modulus &omega = model.modulus();
    const double span =
        std::min(model.arclength(model.tau() * (1 - 1e-9)), omega.radius()) * (1 - 1e-9);
    std::vector<double> ratio(points, 0.0);
    std::vector<double> ss(points);
    for (std::size_t k = 0; k < points; ++k) {
        ss[k] = span * (-1 + 2 * (static_cast<double>(k) + 0.5) / static_cast<double>(points));
    }
    const auto eval = [&](std::size_t k) {
        const double s = ss[k];
        const double y = arclength_inverse(model, s);
        const double theta = boundary_geometry(model, y).theta_hat;
        const double bound = model.alpha() * omega(std::abs(s));
        if (bound == 0) {
            ratio[k] = std::abs(theta) == 0 ? 0 : std::numeric_limits<double>::infinity();
        } else {
            ratio[k] = std::abs(theta) / bound;
        }
    };
    if (exec == Exec::parallel) {
        const auto n = static_cast<std::ptrdiff_t>(points);
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t k = 0; k < n; ++k) {
            eval(static_cast<std::size_t>(k));
        }
    } else {
        for (std::size_t k = 0; k < points; ++k) {
            eval(k);
        }
    }
    AngleCheck out;
    out.points = points;
    out.grid = ss;
    out.ratios = ratio;
    for (std::size_t k = 0; k < points; ++k) {
        if (ratio[k] > out.worst_ratio) {
            out.worst_ratio = ratio[k];
            out.worst_s = ss[k];
        }
    }
    out.pass = out.worst_ratio <= angle_ratio_limit;
    return out;
}

} // namespace koba
