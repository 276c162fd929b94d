#include <koba/geodesics.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include <koba/errors.hpp>
#include <koba/model_domain.hpp>

#include "text.hpp"

namespace koba
{

namespace
{

using text::fmt;
using text::parse_number;
using text::split;

constexpr double inf = std::numeric_limits<double>::infinity();

RVec ray_point(const NormalRay &ray, double t) { return axpy(ray.xi.xi, ray.eps * std::exp(-2 * t), ray.xi.normal); }

} // namespace

NormalRay make_normal_ray(const ConvexDomain &domain, std::span<const double> xi, double eps)
{
    if (xi.size() != domain.real_dim()) {
        fail(ErrorKind::argument, "boundary point has the wrong dimension");
    }
    if (!(eps > 0) || !std::isfinite(eps)) {
        fail(ErrorKind::argument, "ray scale eps must be positive");
    }
    const ConvexPiece piece = domain.active_piece(xi);
    const double g = norm(piece.gradient);
    if (g > 0 && std::abs(piece.value) / g > 1e-8 * domain.bounding_radius()) {
        fail(ErrorKind::argument, "xi is not on the boundary of " + domain.tag());
    }
    return {make_boundary_point(domain, xi), eps};
}

double certified_ray_scale(const ConvexDomain &domain, const Modulus &omega, std::size_t boundary_samples,
                           std::uint64_t seed)
{
    const ParameterCertificate cert =
        select_parameters(domain, omega, domain.neighborhood_radius(), boundary_samples, seed);
    return 0.5 * cert.tau;
}

RVec sigma_eval(const ConvexDomain &domain, const NormalRay &ray, double t)
{
    if (!(t >= 0) || !std::isfinite(t)) {
        fail(ErrorKind::argument, "ray time must be finite and non-negative");
    }
    RVec p = ray_point(ray, t);
    if (!domain.contains(p)) {
        fail(ErrorKind::ray_escape, "sigma(" + fmt(t) + ") leaves the domain; eps = " + fmt(ray.eps) +
                                        " is not admissible");
    }
    return p;
}

double max_ray_time(const ConvexDomain &domain, const NormalRay &ray)
{
    return 0.5 * std::log(ray.eps / (4e-9 * domain.bounding_radius()));
}

std::vector<double> uniform_time_grid(double T, std::size_t points)
{
    if (!(T > 0) || points < 2) {
        fail(ErrorKind::argument, "time grid needs T > 0 and at least two points");
    }
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i) {
        grid[i] = T * static_cast<double>(i) / static_cast<double>(points - 1);
    }
    return grid;
}

AlmostGeodesicReport almost_geodesic_report(const BracketEngine &base, const NormalRay &ray,
                                            std::span<const double> times, Exec exec)
{
    if (times.empty()) {
        fail(ErrorKind::argument, "time grid is empty");
    }
    if (!std::is_sorted(times.begin(), times.end())) {
        fail(ErrorKind::argument, "time grid must be increasing");
    }
    const ConvexDomain &dom = base.domain();
    const BracketEngine engine = base.with_support({ray.xi});
    const std::size_t n = times.size();
    std::vector<RVec> sigma(n);
    for (std::size_t i = 0; i < n; ++i) {
        sigma[i] = sigma_eval(dom, ray, times[i]);
    }

    AlmostGeodesicReport rep;
    std::vector<std::pair<std::size_t, std::size_t>> index;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            index.emplace_back(i, j);
        }
    }
    rep.pairs.resize(index.size());
    for_each_index(index.size(), exec, [&](std::size_t k) {
        const auto [i, j] = index[k];
        GeodesicPair &pair = rep.pairs[k];
        pair.s = times[i];
        pair.t = times[j];
        if (i != j) {
            const DistanceBracket b = engine.distance(sigma[i], sigma[j]);
            pair.lo = b.lo;
            pair.hi = b.hi;
        }
        const double d = pair.t - pair.s;
        pair.defect = std::max({pair.hi - d, d - pair.lo, 0.0});
    });
    std::vector<double> speed(n);
    for_each_index(n, exec, [&](std::size_t i) {
        const RVec v = scaled(ray.xi.normal, -2 * ray.eps * std::exp(-2 * times[i]));
        speed[i] = engine.metric(sigma[i], v).hi;
    });

    double worst_defect = 0;
    rep.lower_gap = inf;
    double ratio = 0;
    rep.worst = rep.pairs.front();
    for (const auto &pair : rep.pairs) {
        const double d = pair.t - pair.s;
        if (pair.defect > worst_defect) {
            worst_defect = pair.defect;
            rep.worst = pair;
        }
        rep.lower_gap = std::min(rep.lower_gap, pair.lo - d);
        if (d > 0) {
            ratio = std::max(ratio, pair.hi / d);
        }
    }
    rep.speed_sup = *std::max_element(speed.begin(), speed.end());
    rep.K_additive = std::exp(worst_defect);
    rep.K_lipschitz = std::max(ratio, rep.speed_sup);
    rep.K = std::max({rep.K_additive, rep.K_lipschitz, 1.0});

    const double log_cap = std::log(max_almost_geodesic_K);
    for (const auto &pair : rep.pairs) {
        if (pair.lo > pair.t - pair.s + log_cap) {
            rep.violations.push_back("lower bracket exceeds |s-t| + log K_max at s=" + fmt(pair.s) +
                                     ", t=" + fmt(pair.t));
        }
    }
    if (rep.K > max_almost_geodesic_K) {
        rep.violations.push_back("K = " + fmt(rep.K) + " exceeds " + fmt(max_almost_geodesic_K) +
                                 "; worst pair s=" + fmt(rep.worst.s) + ", t=" + fmt(rep.worst.t));
    }
    rep.pass = rep.violations.empty();
    return rep;
}

BoundarySequence dyadic_normal_sequence(const ConvexDomain &domain, std::span<const double> xi, double eps,
                                        std::size_t depth)
{
    if (depth == 0) {
        fail(ErrorKind::sequence_spec, "sequence depth must be positive");
    }
    const NormalRay ray = make_normal_ray(domain, xi, eps);
    BoundarySequence seq{ray.xi.xi, {}};
    for (std::size_t nu = 1; nu <= depth; ++nu) {
        RVec p = axpy(ray.xi.xi, std::ldexp(eps, -static_cast<int>(nu)), ray.xi.normal);
        if (!domain.contains(p)) {
            fail(ErrorKind::sequence_spec, "sequence point nu=" + std::to_string(nu) + " is outside the domain");
        }
        seq.points.push_back(std::move(p));
    }
    return seq;
}

void check_sequence(const ConvexDomain &domain, const BoundarySequence &seq, double tail_tol)
{
    if (seq.points.empty()) {
        fail(ErrorKind::sequence_spec, "empty sequence");
    }
    std::vector<double> gap;
    for (const auto &p : seq.points) {
        if (p.size() != domain.real_dim() || !domain.contains(p)) {
            fail(ErrorKind::sequence_spec, "sequence point outside the domain");
        }
        gap.push_back(distance(p, seq.limit));
    }
    for (std::size_t k = gap.size() / 2 + 1; k < gap.size(); ++k) {
        if (gap[k] > gap[k - 1]) {
            fail(ErrorKind::sequence_spec, "sequence tail does not approach its limit monotonically");
        }
    }
    if (!(gap.back() <= tail_tol)) {
        fail(ErrorKind::sequence_spec,
             "sequence ends " + fmt(gap.back()) + " away from its limit (allowed " + fmt(tail_tol) + ")");
    }
}

GromovExperimentReport gromov_boundary_experiment(const BracketEngine &engine, const BoundarySequence &p,
                                                  const BoundarySequence &q, std::span<const double> o,
                                                  const GromovExperimentOptions &opts, Exec exec)
{
    const ConvexDomain &dom = engine.domain();
    const double tail_tol = 0.05 * dom.bounding_radius();
    check_sequence(dom, p, tail_tol);
    check_sequence(dom, q, tail_tol);
    if (opts.ladder.empty() || !std::is_sorted(opts.ladder.begin(), opts.ladder.end())) {
        fail(ErrorKind::argument, "divergence ladder must be non-empty and increasing");
    }

    GromovExperimentReport rep;
    rep.rows = p.points.size();
    rep.cols = q.points.size();
    rep.products = gromov_matrix(engine, p.points, q.points, o, exec);

    const std::size_t diag = std::min(rep.rows, rep.cols);
    for (std::size_t k = 0; k < diag; ++k) {
        rep.diagonal_lo.push_back(rep.products[k * rep.cols + k].lo);
    }
    bool diverging = true;
    for (double level : opts.ladder) {
        std::optional<std::size_t> from;
        for (std::size_t k = diag; k-- > 0;) {
            if (!(rep.diagonal_lo[k] > level)) {
                break;
            }
            from = k;
        }
        rep.crossings.push_back(from);
        diverging = diverging && from.has_value();
    }

    const std::size_t qr = std::max<std::size_t>(1, rep.rows / 4);
    const std::size_t qc = std::max<std::size_t>(1, rep.cols / 4);
    double early = 0;
    for (std::size_t i = 0; i < rep.rows; ++i) {
        for (std::size_t j = 0; j < rep.cols; ++j) {
            const double hi = rep.products[i * rep.cols + j].hi;
            rep.max_hi = std::max(rep.max_hi, hi);
            if (i < qr && j < qc) {
                early = std::max(early, hi);
            }
        }
    }
    rep.cap = std::max(opts.cap_factor * early, opts.cap_floor);
    if (diverging) {
        rep.classification = "diverging";
    } else if (rep.max_hi < rep.cap) {
        rep.classification = "bounded";
    } else {
        rep.classification = "unclassified";
    }
    return rep;
}

namespace
{

RVec parse_vector(std::string_view text, std::string_view what)
{
    RVec v;
    for (auto part : split(text, ',')) {
        v.push_back(parse_number(part, what));
    }
    return v;
}

Isometry make_isometry(std::string_view literal)
{
    const auto colon = literal.find(':');
    const std::string_view kind = literal.substr(0, colon);
    const std::string_view rest = colon == std::string_view::npos ? std::string_view{} : literal.substr(colon + 1);
    if (kind == "identity") {
        DomainPtr dom = parse_domain(rest);
        return {std::string(literal), dom, dom, [](std::span<const double> z) { return RVec(z.begin(), z.end()); }};
    }
    if (kind == "disc-aut" || kind == "ball-aut") {
        const RVec a = parse_vector(rest, kind);
        if (a.empty() || a.size() % 2 != 0 || (kind == "disc-aut" && a.size() != 2)) {
            fail(ErrorKind::config, "automorphism centre has the wrong number of coordinates");
        }
        if (!(dot(a, a) < 1)) {
            fail(ErrorKind::config, "automorphism centre must lie in the unit ball");
        }
        DomainPtr dom = make_ball(a.size() / 2);
        return {std::string(literal), dom, dom, [a](std::span<const double> z) { return ball_automorphism(a, z); }};
    }
    if (kind == "disc-to-ball") {
        const double n = parse_number(rest, "disc-to-ball dimension");
        if (!(n >= 2) || n != std::floor(n) || n > 64) {
            fail(ErrorKind::config, "disc-to-ball needs an integer dimension >= 2");
        }
        const auto dim = static_cast<std::size_t>(n);
        return {std::string(literal), make_ball(1), make_ball(dim), [dim](std::span<const double> z) {
                    RVec w(2 * dim, 0.0);
                    std::copy(z.begin(), z.end(), w.begin());
                    return w;
                }};
    }
    fail(ErrorKind::config, "unknown map kind '" + std::string(kind) + "'");
}

} // namespace

Isometry parse_isometry(std::string_view literal)
{
    try {
        return make_isometry(literal);
    } catch (const Error &e) {
        if (e.kind() == ErrorKind::config) {
            throw;
        }
        fail(ErrorKind::config, "bad map literal '" + std::string(literal) + "': " + e.what());
    }
}

ExtensionProbeReport boundary_limit_probe(const Isometry &F, std::span<const double> xi, double eps,
                                          std::size_t depth, std::size_t check_depth, double tol, Exec exec)
{
    if (!F.source || !F.target || !F.map) {
        fail(ErrorKind::argument, "incomplete isometry");
    }
    if (depth < 2 || check_depth == 0 || check_depth >= depth) {
        fail(ErrorKind::argument, "probe needs 0 < check_depth < depth");
    }
    const BoundarySequence seq = dyadic_normal_sequence(*F.source, xi, eps, depth);
    ExtensionProbeReport rep;
    rep.check_depth = check_depth;
    for (const auto &p : seq.points) {
        RVec w = F.map(p);
        if (w.size() != F.target->real_dim() || !F.target->contains(w)) {
            fail(ErrorKind::map_error, F.name + " sends a sequence point outside the target domain");
        }
        rep.images.push_back(std::move(w));
    }
    rep.limit_estimate = rep.images.back();

    rep.diameters.assign(depth - 1, 0.0);
    for (std::size_t k = 0; k + 1 < depth; ++k) {
        double diam = 0;
        for (std::size_t i = k; i < depth; ++i) {
            for (std::size_t j = i + 1; j < depth; ++j) {
                diam = std::max(diam, distance(rep.images[i], rep.images[j]));
            }
        }
        rep.diameters[k] = diam;
    }
    bool shrinking = true;
    for (std::size_t k = 1; k < rep.diameters.size(); ++k) {
        shrinking = shrinking && rep.diameters[k] <= rep.diameters[k - 1];
    }
    rep.extends = shrinking && rep.diameters[check_depth - 1] < tol;

    const BracketEngine src(F.source);
    const BracketEngine dst(F.target);
    std::vector<double> gap(depth - 1), width(depth - 1);
    for_each_index(depth - 1, exec, [&](std::size_t k) {
        const DistanceBracket a = src.distance(seq.points[k], seq.points[k + 1]);
        const DistanceBracket b = dst.distance(rep.images[k], rep.images[k + 1]);
        gap[k] = std::max({0.0, a.lo - b.hi, b.lo - a.hi});
        width[k] = std::max(a.hi - a.lo, b.hi - b.lo);
    });
    rep.isometry_gap = *std::max_element(gap.begin(), gap.end());
    rep.bracket_width = *std::max_element(width.begin(), width.end());
    return rep;
}

} // namespace koba
