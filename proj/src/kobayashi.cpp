#include <koba/kobayashi.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include <koba/errors.hpp>
#include <koba/sampling.hpp>

namespace koba
{

namespace
{

constexpr double inf = std::numeric_limits<double>::infinity();

void check_point(const ConvexDomain &domain, std::span<const double> p, const char *what)
{
    if (p.size() != domain.real_dim()) {
        fail(ErrorKind::argument, std::string(what) + " has the wrong dimension");
    }
    if (!domain.contains(p)) {
        fail(ErrorKind::domain, std::string(what) + " is not inside the domain");
    }
}

// Lagrange identity |a|^2 |b|^2 - |<a, b>|^2 = sum_{j<k} |a_j b_k - a_k b_j|^2.
double cauchy_schwarz_gap(const CVec &a, const CVec &b)
{
    double gap = 0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        for (std::size_t k = j + 1; k < a.size(); ++k) {
            gap += std::norm(a[j] * b[k] - a[k] * b[j]);
        }
    }
    return gap;
}

double ball_distance(const CVec &a, const CVec &b)
{
    double na = 0, nb = 0, diff = 0;
    std::complex<double> ab = 0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        na += std::norm(a[j]);
        nb += std::norm(b[j]);
        diff += std::norm(a[j] - b[j]);
        ab += a[j] * std::conj(b[j]);
    }
    if (!(na < 1) || !(nb < 1)) {
        fail(ErrorKind::domain, "oracle point outside the unit ball");
    }
    const double den = std::norm(1.0 - ab);
    const double num = std::max(0.0, diff - cauchy_schwarz_gap(a, b));
    const double s = std::min(1.0, std::sqrt(num / den));
    if (s < 0.5) {
        return std::atanh(s);
    }
    const double x = (1 - na) * (1 - nb) / den;
    return 0.5 * std::log((1 + s) * (1 + s) / x);
}

double disc_distance(std::complex<double> z, std::complex<double> w) { return ball_distance(CVec{z}, CVec{w}); }

struct Ray {
    double phi;
    double t_in;
    double t_out;
};

// Disc radius about c in the complex line c + C u, u a unit vector. The inner
// value is the smallest sampled entry distance, refined around the local
// minima of the ray profile until it stops moving.
RadiusBracket slice_radius(const ConvexDomain &domain, std::span<const double> c, std::span<const double> u,
                           double tol)
{
    const RVec ju = multiply_by_i(u);
    const double rel = 0.05 * tol;
    RVec d(u.size());
    const auto cast = [&](double phi) {
        const double cs = std::cos(phi), sn = std::sin(phi);
        for (std::size_t i = 0; i < u.size(); ++i) {
            d[i] = cs * u[i] + sn * ju[i];
        }
        const RayHit hit = ray_cast(domain, c, d, 0.0, rel);
        return Ray{phi, hit.t_in, hit.t_out};
    };
    constexpr std::size_t initial = 64;
    constexpr std::size_t max_rays = 2048;
    constexpr std::size_t tracked = 4;
    constexpr double two_pi = 2 * std::numbers::pi;
    std::vector<Ray> rays;
    rays.reserve(initial);
    for (std::size_t k = 0; k < initial; ++k) {
        rays.push_back(cast(two_pi * static_cast<double>(k) / initial));
    }
    const auto smallest = [&] {
        double lo = inf;
        for (const auto &r : rays) {
            lo = std::min(lo, r.t_in);
        }
        return lo;
    };
    double lo = smallest();
    int quiet = 0;
    while (rays.size() < max_rays && quiet < 3) {
        const std::size_t n = rays.size();
        std::vector<std::size_t> minima;
        for (std::size_t k = 0; k < n; ++k) {
            const double t = rays[k].t_in;
            if (t <= rays[(k + n - 1) % n].t_in && t <= rays[(k + 1) % n].t_in) {
                minima.push_back(k);
            }
        }
        std::sort(minima.begin(), minima.end(), [&](std::size_t x, std::size_t y) {
            return rays[x].t_in < rays[y].t_in || (rays[x].t_in == rays[y].t_in && x < y);
        });
        minima.resize(std::min(minima.size(), tracked));
        std::vector<double> fresh;
        for (std::size_t k : minima) {
            const double left = rays[(k + n - 1) % n].phi - (k == 0 ? two_pi : 0);
            const double right = rays[(k + 1) % n].phi + (k + 1 == n ? two_pi : 0);
            if (rays[k].phi - left > 1e-12) {
                fresh.push_back(0.5 * (left + rays[k].phi));
            }
            if (right - rays[k].phi > 1e-12) {
                fresh.push_back(0.5 * (rays[k].phi + right));
            }
        }
        if (fresh.empty()) {
            break;
        }
        for (double phi : fresh) {
            phi = std::fmod(phi + two_pi, two_pi);
            const auto at = std::lower_bound(rays.begin(), rays.end(), phi,
                                             [](const Ray &r, double x) { return r.phi < x; });
            if (at != rays.end() && at->phi == phi) {
                continue;
            }
            rays.insert(at, cast(phi));
        }
        const double next = smallest();
        quiet = lo - next <= 0.01 * tol * next ? quiet + 1 : 0;
        lo = next;
    }
    double hi = inf;
    for (const auto &r : rays) {
        hi = std::min(hi, r.t_out);
    }
    if (!(lo > 0) || hi - lo > tol * hi) {
        throw ToleranceNotMet("inscribed disc radius did not reach its tolerance", lo, hi);
    }
    return {lo, hi, rays.size()};
}

struct Plane {
    RVec origin;
    RVec e1;
    RVec e2;

    RVec at(double a, double b) const
    {
        RVec x = axpy(origin, a, e1);
        return axpy(x, b, e2);
    }
};

// Compass search in the plane; f returns +inf where infeasible.
template <typename F>
double pattern_search(const F &f, std::vector<std::array<double, 2>> starts, double step, double min_step,
                      std::size_t max_evals)
{
    std::array<double, 2> best{};
    double best_val = inf;
    std::size_t evals = 0;
    for (const auto &s : starts) {
        const double v = f(s[0], s[1]);
        ++evals;
        if (v < best_val) {
            best_val = v;
            best = s;
        }
    }
    if (!std::isfinite(best_val)) {
        return best_val;
    }
    static constexpr std::array<std::array<double, 2>, 8> moves{
        {{1, 0}, {0, 1}, {-1, 0}, {0, -1}, {0.7071067811865476, 0.7071067811865476},
         {-0.7071067811865476, 0.7071067811865476}, {-0.7071067811865476, -0.7071067811865476},
         {0.7071067811865476, -0.7071067811865476}}};
    while (step > min_step && evals < max_evals) {
        bool improved = false;
        for (const auto &m : moves) {
            const std::array<double, 2> trial{best[0] + step * m[0], best[1] + step * m[1]};
            const double v = f(trial[0], trial[1]);
            ++evals;
            if (v < best_val) {
                best_val = v;
                best = trial;
                improved = true;
                break;
            }
        }
        if (improved) {
            step *= 1.5;
        } else {
            step *= 0.5;
        }
    }
    return best_val;
}

std::array<double, 2> plane_coords(const Plane &plane, std::span<const double> x)
{
    const std::complex<double> lambda = hermitian(sub(x, plane.origin), plane.e1);
    return {lambda.real(), lambda.imag()};
}

} // namespace

RadiusBracket inscribed_disc_radius(const ConvexDomain &domain, std::span<const double> p,
                                    std::span<const double> v, double tol)
{
    check_point(domain, p, "point");
    if (v.size() != p.size()) {
        fail(ErrorKind::argument, "direction has the wrong dimension");
    }
    const double nv = norm(v);
    if (!(nv > 0)) {
        fail(ErrorKind::argument, "direction must be non-zero");
    }
    if (!(tol > 0)) {
        fail(ErrorKind::argument, "tolerance must be positive");
    }
    return slice_radius(domain, p, scaled(v, 1.0 / nv), tol);
}

MetricBracket metric_bracket(const ConvexDomain &domain, std::span<const double> p, std::span<const double> v,
                             double tol)
{
    const RadiusBracket r = inscribed_disc_radius(domain, p, v, tol);
    const double nv = norm(v);
    MetricBracket out;
    out.r_lo = r.lo;
    out.r_hi = r.hi;
    out.lo = nv / (2 * r.hi);
    out.hi = nv / r.lo;
    out.method_hi = "graham";

    const RVec u = scaled(v, 1.0 / nv);
    const Plane plane{RVec(p.begin(), p.end()), u, multiply_by_i(u)};
    const auto objective = [&](double a, double b) {
        const RVec c = plane.at(a, b);
        if (!domain.contains(c)) {
            return inf;
        }
        const double rad = slice_radius(domain, c, u, tol).lo;
        const double off2 = a * a + b * b;
        if (off2 >= rad * rad) {
            return inf;
        }
        return nv * rad / (rad * rad - off2);
    };
    std::vector<std::array<double, 2>> starts{{0, 0}};
    const auto centre = plane_coords(plane, domain.interior_point());
    starts.push_back(centre);
    const double best = pattern_search(objective, starts, 0.25 * r.lo, 1e-9 * r.lo, 300);
    if (best < out.hi) {
        out.hi = best;
        out.method_hi = "slice-disc";
    }
    return out;
}

BracketEngine::BracketEngine(DomainPtr domain, DistanceOptions opts) : domain_(std::move(domain)), opts_(std::move(opts))
{
    if (!domain_) {
        fail(ErrorKind::argument, "null domain");
    }
    samples_ = sample_boundary(*domain_, opts_.boundary_samples);
}

BracketEngine BracketEngine::with_support(const std::vector<BoundaryPoint> &extra) const
{
    BracketEngine copy = *this;
    copy.opts_.extra_support.insert(copy.opts_.extra_support.end(), extra.begin(), extra.end());
    return copy;
}

MetricBracket BracketEngine::metric(std::span<const double> p, std::span<const double> v) const
{
    return metric_bracket(*domain_, p, v, opts_.radius_tol);
}

namespace
{

struct Support {
    RVec xi0;
    RVec normal;
};

Support support_at(const ConvexDomain &domain, std::span<const double> xi)
{
    const ConvexPiece piece = domain.active_piece(xi);
    const double g2 = dot(piece.gradient, piece.gradient);
    if (!(g2 > 0)) {
        return {};
    }
    // The gradient inequality of the active convex piece puts the domain
    // strictly inside {g . (x - xi0) < 0}.
    return {axpy(xi, -piece.value / g2, piece.gradient), scaled(piece.gradient, -1.0 / std::sqrt(g2))};
}

double hyperplane_bound(const Support &s, std::span<const double> p, std::span<const double> q)
{
    if (s.normal.empty()) {
        return 0;
    }
    const std::complex<double> wp = hermitian(sub(p, s.xi0), s.normal);
    const std::complex<double> wq = hermitian(sub(q, s.xi0), s.normal);
    if (!(wp.real() > 0) || !(wq.real() > 0)) {
        return 0;
    }
    const double by_real = 0.5 * std::abs(std::log(wp.real() / wq.real()));
    const double by_modulus = 0.5 * std::abs(std::log(std::abs(wp) / std::abs(wq)));
    return std::max(by_real, by_modulus);
}

CVec cover_image(const BallCover &c, std::span<const double> x)
{
    CVec w(c.scale.size());
    for (std::size_t j = 0; j < w.size(); ++j) {
        w[j] = std::complex<double>(x[2 * j] - c.center[2 * j], x[2 * j + 1] - c.center[2 * j + 1]) / c.scale[j];
    }
    return w;
}

struct Interval {
    double a, b, fa, fm, fb;
    [[nodiscard]] double trapezoid() const { return (b - a) * (fa + fb) / 2; }
    [[nodiscard]] double gain() const { return (b - a) / 4 * (fa + fb - 2 * fm); }
};

} // namespace

DistanceBracket BracketEngine::distance(std::span<const double> p_in, std::span<const double> q_in) const
{
    const ConvexDomain &dom = *domain_;
    check_point(dom, p_in, "first point");
    check_point(dom, q_in, "second point");
    const bool swap = lex_less(q_in, p_in);
    const std::span<const double> p = swap ? q_in : p_in;
    const std::span<const double> q = swap ? p_in : q_in;

    DistanceBracket out;
    const double len = koba::distance(p, q);
    if (len == 0) {
        out.method_lo = out.method_hi = "coincident";
        return out;
    }
    const double R = dom.bounding_radius();
    const Projection pp = boundary_project(dom, p);
    const Projection pq = boundary_project(dom, q);
    if (pp.delta < 1e-9 * R || pq.delta < 1e-9 * R) {
        fail(ErrorKind::conditioning, "point closer than 1e-9 R to the boundary");
    }

    // Lower side.
    out.method_lo = "hyperplane";
    const auto consider = [&](std::span<const double> xi) {
        const double b = hyperplane_bound(support_at(dom, xi), p, q);
        ++out.hyperplanes;
        if (b > out.lo) {
            out.lo = b;
            out.method_lo = "hyperplane";
        }
    };
    consider(pp.point.xi);
    consider(pq.point.xi);
    for (const auto &s : samples_) {
        consider(s.xi);
    }
    for (const auto &s : opts_.extra_support) {
        consider(s.xi);
    }
    for (const auto &c : dom.ball_covers()) {
        const CVec a = cover_image(c, p);
        const CVec b = cover_image(c, q);
        double na = 0, nb = 0;
        for (std::size_t j = 0; j < a.size(); ++j) {
            na += std::norm(a[j]);
            nb += std::norm(b[j]);
        }
        if (na < 1 && nb < 1) {
            const double v = ball_distance(a, b);
            if (v > out.lo) {
                out.lo = v;
                out.method_lo = "ball-cover";
            }
        }
    }

    // Upper side: slice discs, then the Graham metric along the segment.
    const RVec u = scaled(sub(q, p), 1.0 / len);
    double slice = inf;
    if (opts_.slice_bound) {
        const Plane plane{RVec(p.begin(), p.end()), u, multiply_by_i(u)};
        const auto objective = [&](double a, double b) {
            const RVec c = plane.at(a, b);
            if (!dom.contains(c)) {
                return inf;
            }
            const double rad = slice_radius(dom, c, u, opts_.radius_tol).lo;
            const std::complex<double> zp(-a / rad, -b / rad);
            const std::complex<double> zq((len - a) / rad, -b / rad);
            if (!(std::norm(zp) < 1) || !(std::norm(zq) < 1)) {
                return inf;
            }
            return disc_distance(zp, zq);
        };
        std::vector<std::array<double, 2>> starts{{0.5 * len, 0}, plane_coords(plane, dom.interior_point())};
        const double scale = std::max(len, std::min(pp.delta, pq.delta));
        slice = pattern_search(objective, starts, 0.25 * scale, 1e-9 * scale, 400);
    }

    const auto f = [&](double s) {
        const RVec x = axpy(p, s * len, u);
        return len / slice_radius(dom, x, u, opts_.radius_tol).lo;
    };
    std::vector<Interval> parts;
    constexpr int initial = 8;
    std::vector<double> nodes(2 * initial + 1);
    for (int k = 0; k <= 2 * initial; ++k) {
        nodes[k] = f(static_cast<double>(k) / (2 * initial));
    }
    for (int k = 0; k < initial; ++k) {
        parts.push_back({static_cast<double>(k) / initial, static_cast<double>(k + 1) / initial, nodes[2 * k],
                         nodes[2 * k + 1], nodes[2 * k + 2]});
    }
    double segment = inf;
    while (true) {
        double trap = 0, gain = 0, mid = 0;
        for (const auto &iv : parts) {
            trap += iv.trapezoid();
            gain += iv.gain();
            mid += (iv.b - iv.a) * iv.fm;
        }
        segment = trap - gain;
        if (gain <= opts_.tol * segment || parts.size() >= opts_.max_subintervals || mid > slice) {
            break;
        }
        std::vector<std::size_t> order(parts.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            order[i] = i;
        }
        std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
            return parts[x].gain() > parts[y].gain() || (parts[x].gain() == parts[y].gain() && x < y);
        });
        std::vector<bool> split(parts.size(), false);
        double covered = 0;
        for (std::size_t i : order) {
            if (covered >= 0.5 * gain || parts.size() + (covered > 0 ? 1 : 0) >= opts_.max_subintervals) {
                break;
            }
            split[i] = true;
            covered += parts[i].gain();
        }
        std::vector<Interval> next;
        for (std::size_t i = 0; i < parts.size(); ++i) {
            const Interval &iv = parts[i];
            if (!split[i] || next.size() + (parts.size() - i) + 1 > opts_.max_subintervals) {
                next.push_back(iv);
                continue;
            }
            const double m = 0.5 * (iv.a + iv.b);
            next.push_back({iv.a, m, iv.fa, f(0.5 * (iv.a + m)), iv.fm});
            next.push_back({m, iv.b, iv.fm, f(0.5 * (m + iv.b)), iv.fb});
        }
        if (next.size() == parts.size()) {
            break;
        }
        parts = std::move(next);
    }
    out.subintervals = 2 * parts.size();
    if (segment <= slice) {
        out.hi = segment;
        out.method_hi = "segment";
    } else {
        out.hi = slice;
        out.method_hi = "slice-disc";
    }
    if (out.lo > out.hi) {
        // Radius errors of size e R at distance delta from the boundary move k
        // by about e R / delta; e is radius_tol for the slice disc and a few
        // ulps for rounding of the points.
        const double slack = opts_.radius_tol * std::max(1.0, out.hi) +
                             (opts_.radius_tol + 64 * std::numeric_limits<double>::epsilon()) * R /
                                 std::min(pp.delta, pq.delta);
        if (out.lo - out.hi <= slack) {
            std::swap(out.lo, out.hi);
        } else {
            throw ToleranceNotMet("distance bracket is inconsistent", out.lo, out.hi);
        }
    }
    return out;
}

DistanceBracket BracketEngine::gromov(std::span<const double> x, std::span<const double> y,
                                      std::span<const double> o) const
{
    const DistanceBracket xo = distance(x, o);
    const DistanceBracket yo = distance(y, o);
    const DistanceBracket xy = distance(x, y);
    DistanceBracket out;
    out.lo = std::max(0.0, 0.5 * (xo.lo + yo.lo - xy.hi));
    out.hi = std::max(out.lo, 0.5 * (xo.hi + yo.hi - xy.lo));
    out.method_lo = "gromov(" + xo.method_lo + "," + yo.method_lo + "," + xy.method_hi + ")";
    out.method_hi = "gromov(" + xo.method_hi + "," + yo.method_hi + "," + xy.method_lo + ")";
    out.hyperplanes = xo.hyperplanes + yo.hyperplanes + xy.hyperplanes;
    out.subintervals = xo.subintervals + yo.subintervals + xy.subintervals;
    return out;
}

DistanceBracket distance_bracket(const DomainPtr &domain, std::span<const double> p, std::span<const double> q,
                                 const DistanceOptions &opts)
{
    return BracketEngine(domain, opts).distance(p, q);
}

DistanceBracket gromov_product(const DomainPtr &domain, std::span<const double> x, std::span<const double> y,
                               std::span<const double> o, const DistanceOptions &opts)
{
    return BracketEngine(domain, opts).gromov(x, y, o);
}

std::vector<DistanceBracket> bracket_matrix(const BracketEngine &engine, const std::vector<RVec> &a,
                                            const std::vector<RVec> &b, Exec exec)
{
    std::vector<DistanceBracket> out(a.size() * b.size());
    for_each_index(out.size(), exec, [&](std::size_t k) { out[k] = engine.distance(a[k / b.size()], b[k % b.size()]); });
    return out;
}

std::vector<DistanceBracket> gromov_matrix(const BracketEngine &engine, const std::vector<RVec> &a,
                                           const std::vector<RVec> &b, std::span<const double> o, Exec exec)
{
    // Distances to o are shared across rows and columns.
    std::vector<DistanceBracket> ao(a.size()), bo(b.size()), ab(a.size() * b.size());
    for_each_index(a.size(), exec, [&](std::size_t i) { ao[i] = engine.distance(a[i], o); });
    for_each_index(b.size(), exec, [&](std::size_t j) { bo[j] = engine.distance(b[j], o); });
    for_each_index(ab.size(), exec, [&](std::size_t k) { ab[k] = engine.distance(a[k / b.size()], b[k % b.size()]); });
    std::vector<DistanceBracket> out(ab.size());
    for (std::size_t k = 0; k < ab.size(); ++k) {
        const auto &xo = ao[k / b.size()];
        const auto &yo = bo[k % b.size()];
        const auto &xy = ab[k];
        DistanceBracket &g = out[k];
        g.lo = std::max(0.0, 0.5 * (xo.lo + yo.lo - xy.hi));
        g.hi = std::max(g.lo, 0.5 * (xo.hi + yo.hi - xy.lo));
        g.method_lo = xy.method_hi;
        g.method_hi = xy.method_lo;
    }
    return out;
}

std::vector<double> default_escape_depths(const ConvexDomain &domain)
{
    std::vector<double> d;
    for (int k = 0; k <= 10; ++k) {
        d.push_back(domain.bounding_radius() * std::pow(10.0, -1 - 0.5 * k));
    }
    return d;
}

EscapeReport escape_constant(const BracketEngine &engine, std::span<const double> z0, std::size_t directions,
                             std::span<const double> depths, Exec exec)
{
    const ConvexDomain &dom = engine.domain();
    check_point(dom, z0, "base point");
    if (directions == 0 || depths.empty()) {
        fail(ErrorKind::argument, "escape constant needs directions and depths");
    }
    const auto boundary = sample_boundary(dom, directions);
    EscapeReport rep;
    rep.depths.assign(depths.begin(), depths.end());
    rep.samples.resize(boundary.size() * depths.size());
    for_each_index(rep.samples.size(), exec, [&](std::size_t k) {
        const BoundaryPoint &bp = boundary[k / depths.size()];
        const double depth = depths[k % depths.size()];
        const RVec z = axpy(bp.xi, depth, bp.normal);
        const double delta = boundary_project(dom, z).delta;
        const double hi = engine.distance(z0, z).hi;
        rep.samples[k] = {depth, delta, hi, hi - 0.5 * std::log(1 / delta)};
    });
    rep.profile.assign(depths.size(), -inf);
    for (std::size_t k = 0; k < rep.samples.size(); ++k) {
        auto &slot = rep.profile[k % depths.size()];
        slot = std::max(slot, rep.samples[k].excess);
    }
    rep.constant = *std::max_element(rep.profile.begin(), rep.profile.end());
    return rep;
}

Oracle parse_oracle(std::string_view name)
{
    if (name == "disc") {
        return Oracle::disc;
    }
    if (name == "ball") {
        return Oracle::ball;
    }
    fail(ErrorKind::config, "unknown oracle '" + std::string(name) + "'");
}

double exact_oracle(Oracle which, std::span<const double> p, std::span<const double> q)
{
    if (p.size() != q.size() || p.size() % 2 != 0 || p.empty()) {
        fail(ErrorKind::argument, "oracle points must be non-empty even-length vectors of equal size");
    }
    if (which == Oracle::disc && p.size() != 2) {
        fail(ErrorKind::argument, "disc oracle needs points of C");
    }
    return ball_distance(to_complex(p), to_complex(q));
}

double exact_ball_metric(std::span<const double> p, std::span<const double> v)
{
    const double np2 = dot(p, p);
    if (!(np2 < 1)) {
        fail(ErrorKind::domain, "point outside the unit ball");
    }
    const double a = 1 - np2;
    const double pv = std::norm(hermitian(v, p));
    return std::sqrt(a * dot(v, v) + pv) / a;
}

RVec ball_automorphism(std::span<const double> a, std::span<const double> z)
{
    if (a.size() != z.size() || a.size() % 2 != 0) {
        fail(ErrorKind::argument, "automorphism arguments must be even-length vectors of equal size");
    }
    const double na2 = dot(a, a);
    if (!(na2 < 1)) {
        fail(ErrorKind::argument, "automorphism centre must lie in the unit ball");
    }
    if (na2 == 0) {
        return scaled(z, -1.0);
    }
    const std::complex<double> za = hermitian(z, a);
    const RVec pz = complex_axpy(RVec(z.size(), 0.0), za / na2, a);
    const RVec qz = sub(z, pz);
    const double sa = std::sqrt(1 - na2);
    RVec num = sub(a, pz);
    num = axpy(num, -sa, qz);
    const std::complex<double> den = 1.0 - za;
    CVec w = to_complex(num);
    for (auto &x : w) {
        x /= den;
    }
    return to_real(w);
}

} // namespace koba
