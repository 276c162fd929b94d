#include <koba/domain.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <koba/errors.hpp>
#include <koba/quadrature.hpp>
#include <koba/sampling.hpp>

#include "text.hpp"

namespace koba
{

RVec multiply_by_i(std::span<const double> v)
{
    if (v.size() % 2 != 0) {
        fail(ErrorKind::argument, "multiply_by_i needs an even-length vector");
    }
    RVec out(v.size());
    for (std::size_t j = 0; j < v.size(); j += 2) {
        out[j] = -v[j + 1];
        out[j + 1] = v[j];
    }
    return out;
}

ConvexDomain::ConvexDomain(std::size_t n, double bounding_radius, RVec interior_point, double neighborhood_radius,
                           std::string tag)
    : n_(n), radius_(bounding_radius), interior_(std::move(interior_point)), neighborhood_(neighborhood_radius),
      tag_(std::move(tag))
{
    if (n_ == 0) {
        fail(ErrorKind::argument, "domain dimension must be at least 1");
    }
    if (!(radius_ > 0) || !(neighborhood_ > 0)) {
        fail(ErrorKind::argument, "domain radii must be positive");
    }
    if (interior_.size() != 2 * n_) {
        fail(ErrorKind::argument, "interior point has the wrong dimension");
    }
}

RVec ConvexDomain::gradient(std::span<const double> x) const
{
    constexpr double step = 1e-6;
    RVec probe(x.begin(), x.end());
    RVec g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = probe[i];
        probe[i] = keep + step;
        const double up = rho(probe);
        probe[i] = keep - step;
        const double down = rho(probe);
        probe[i] = keep;
        g[i] = (up - down) / (2 * step);
    }
    return g;
}

ConvexPiece ConvexDomain::active_piece(std::span<const double> x) const { return {rho(x), gradient(x)}; }

bool ConvexDomain::near_seam(std::span<const double>) const { return false; }

std::vector<BallCover> ConvexDomain::ball_covers() const
{
    return {BallCover{RVec(real_dim(), 0.0), std::vector<double>(n_, radius_)}};
}

std::shared_ptr<const ConvexDomain> ConvexDomain::with_neighborhood_radius(double r) const
{
    if (!(r > 0)) {
        fail(ErrorKind::argument, "neighbourhood radius must be positive");
    }
    auto copy = clone();
    copy->neighborhood_ = r;
    return copy;
}

namespace
{

class Ball final : public ConvexDomain
{
public:
    Ball(std::size_t n, double radius, double scale)
        : ConvexDomain(n, radius, RVec(2 * n, 0.0), 0.5 * radius, "ball:" + std::to_string(n)), r_(radius),
          scale_(scale)
    {
    }

    double rho(std::span<const double> x) const override { return scale_ * (norm(x) - r_); }

    RVec gradient(std::span<const double> x) const override
    {
        const double nx = norm(x);
        if (nx == 0) {
            return RVec(x.size(), 0.0);
        }
        return scaled(x, scale_ / nx);
    }

    std::vector<BallCover> ball_covers() const override
    {
        return {BallCover{RVec(real_dim(), 0.0), std::vector<double>(complex_dim(), r_)}};
    }

protected:
    std::shared_ptr<ConvexDomain> clone() const override { return std::make_shared<Ball>(*this); }

private:
    double r_;
    double scale_;
};

std::string axes_tag(const std::vector<double> &a)
{
    std::string tag = "ellipsoid:";
    for (std::size_t j = 0; j < a.size(); ++j) {
        tag += (j ? "," : "") + text::fmt(a[j]);
    }
    return tag;
}

class Ellipsoid final : public ConvexDomain
{
public:
    explicit Ellipsoid(std::vector<double> a)
        : ConvexDomain(a.size(), *std::max_element(a.begin(), a.end()), RVec(2 * a.size(), 0.0),
                       0.5 * *std::min_element(a.begin(), a.end()), axes_tag(a)),
          a_(std::move(a))
    {
    }

    double rho(std::span<const double> x) const override
    {
        double s = 0;
        for (std::size_t j = 0; j < a_.size(); ++j) {
            s += (x[2 * j] * x[2 * j] + x[2 * j + 1] * x[2 * j + 1]) / (a_[j] * a_[j]);
        }
        return s - 1;
    }

    RVec gradient(std::span<const double> x) const override
    {
        RVec g(x.size());
        for (std::size_t j = 0; j < a_.size(); ++j) {
            g[2 * j] = 2 * x[2 * j] / (a_[j] * a_[j]);
            g[2 * j + 1] = 2 * x[2 * j + 1] / (a_[j] * a_[j]);
        }
        return g;
    }

    std::vector<BallCover> ball_covers() const override { return {BallCover{RVec(real_dim(), 0.0), a_}}; }

protected:
    std::shared_ptr<ConvexDomain> clone() const override { return std::make_shared<Ellipsoid>(*this); }

private:
    std::vector<double> a_;
};

class Polydisc final : public ConvexDomain
{
public:
    explicit Polydisc(std::size_t n)
        : ConvexDomain(n, std::sqrt(static_cast<double>(n)), RVec(2 * n, 0.0), 0.5, "polydisc:" + std::to_string(n))
    {
    }

    double rho(std::span<const double> x) const override { return active_piece(x).value; }

    RVec gradient(std::span<const double> x) const override { return active_piece(x).gradient; }

    ConvexPiece active_piece(std::span<const double> x) const override
    {
        std::size_t best = 0;
        double best_mod = -1;
        for (std::size_t j = 0; j < complex_dim(); ++j) {
            const double m = std::hypot(x[2 * j], x[2 * j + 1]);
            if (m > best_mod) {
                best_mod = m;
                best = j;
            }
        }
        RVec g(x.size(), 0.0);
        if (best_mod > 0) {
            g[2 * best] = x[2 * best] / best_mod;
            g[2 * best + 1] = x[2 * best + 1] / best_mod;
        }
        return {best_mod - 1, std::move(g)};
    }

    bool near_seam(std::span<const double> x) const override
    {
        if (complex_dim() < 2) {
            return false;
        }
        std::vector<double> mods;
        for (std::size_t j = 0; j < complex_dim(); ++j) {
            mods.push_back(std::hypot(x[2 * j], x[2 * j + 1]));
        }
        std::sort(mods.begin(), mods.end(), std::greater<>());
        return mods[0] - mods[1] < 0.05 * bounding_radius();
    }

    std::vector<BallCover> ball_covers() const override
    {
        return {BallCover{RVec(real_dim(), 0.0), std::vector<double>(complex_dim(), bounding_radius())}};
    }

protected:
    std::shared_ptr<ConvexDomain> clone() const override { return std::make_shared<Polydisc>(*this); }
};

// Intersection of a convex "profile" piece with a capping ball. rho is the max
// of the two pieces; seams are where both are close to zero.
class CappedDomain : public ConvexDomain
{
public:
    CappedDomain(std::size_t n, RVec cap_center, double cap_radius, double neighborhood, std::string tag)
        : ConvexDomain(n, norm(cap_center) + cap_radius, cap_center, neighborhood, std::move(tag)),
          cap_center_(std::move(cap_center)), cap_radius_(cap_radius)
    {
    }

    double rho(std::span<const double> x) const override { return active_piece(x).value; }

    RVec gradient(std::span<const double> x) const override { return active_piece(x).gradient; }

    ConvexPiece active_piece(std::span<const double> x) const override
    {
        ConvexPiece cap = cap_piece(x);
        if (!profile_defined(x)) {
            return cap;
        }
        ConvexPiece prof = profile_piece(x);
        return prof.value >= cap.value ? prof : cap;
    }

    bool near_seam(std::span<const double> x) const override
    {
        if (!profile_defined(x)) {
            return false;
        }
        const ConvexPiece cap = cap_piece(x);
        const ConvexPiece prof = profile_piece(x);
        const double gp = norm(prof.gradient);
        const double reach = 0.05 * bounding_radius();
        return std::abs(cap.value) < reach && gp > 0 && std::abs(prof.value) / gp < reach;
    }

    std::vector<BallCover> ball_covers() const override
    {
        return {BallCover{cap_center_, std::vector<double>(complex_dim(), cap_radius_)}};
    }

protected:
    virtual bool profile_defined(std::span<const double> x) const = 0;
    virtual ConvexPiece profile_piece(std::span<const double> x) const = 0;

private:
    ConvexPiece cap_piece(std::span<const double> x) const
    {
        RVec d = sub(x, cap_center_);
        const double nd = norm(d);
        if (nd > 0) {
            for (auto &v : d) {
                v /= nd;
            }
        }
        return {nd - cap_radius_, std::move(d)};
    }

    RVec cap_center_;
    double cap_radius_;
};

class Profile final : public CappedDomain
{
public:
    Profile(std::function<double(double)> g, std::function<double(double)> gp, double tau, std::string tag)
        : CappedDomain(1, RVec{tau, 0.0}, 1.5 * tau, 0.5 * tau, std::move(tag)), g_(std::move(g)), gp_(std::move(gp)),
          half_(1.5 * tau)
    {
    }

protected:
    bool profile_defined(std::span<const double> x) const override { return std::abs(x[1]) < half_; }

    ConvexPiece profile_piece(std::span<const double> x) const override
    {
        return {g_(x[1]) - x[0], RVec{-1.0, gp_(x[1])}};
    }

    std::shared_ptr<ConvexDomain> clone() const override { return std::make_shared<Profile>(*this); }

private:
    std::function<double(double)> g_;
    std::function<double(double)> gp_;
    double half_;
};

RVec graph_center(std::size_t n, double cap_radius)
{
    RVec c(2 * n, 0.0);
    c[2 * n - 1] = 0.5 * cap_radius;
    return c;
}

class Graph final : public CappedDomain
{
public:
    Graph(const Modulus &omega, std::size_t n)
        : CappedDomain(n, graph_center(n, 0.4 * omega.radius()), 0.4 * omega.radius(), 0.2 * omega.radius(),
                       "graph:" + omega.literal() + ":" + std::to_string(n)),
          h_(omega, 0.5 * omega.radius()), limit_(omega.radius())
    {
    }

protected:
    bool profile_defined(std::span<const double> x) const override
    {
        for (std::size_t k = 0; k + 1 < x.size(); ++k) {
            if (std::abs(x[k]) >= limit_) {
                return false;
            }
        }
        return true;
    }

    ConvexPiece profile_piece(std::span<const double> x) const override
    {
        const std::size_t last = x.size() - 1;
        RVec g(x.size(), 0.0);
        double phi = 0;
        for (std::size_t k = 0; k < last; ++k) {
            phi += h_(x[k]);
            g[k] = h_.derivative(x[k]);
        }
        g[last] = -1;
        return {phi - x[last], std::move(g)};
    }

    std::shared_ptr<ConvexDomain> clone() const override { return std::make_shared<Graph>(*this); }

private:
    HTransform h_;
    double limit_;
};

class FunctionDomain final : public ConvexDomain
{
public:
    FunctionDomain(std::size_t n, std::function<double(std::span<const double>)> rho, double radius, RVec interior,
                   std::string tag)
        : ConvexDomain(n, radius, std::move(interior), 0.5 * radius, std::move(tag)), rho_(std::move(rho))
    {
    }

    double rho(std::span<const double> x) const override { return rho_(x); }

protected:
    std::shared_ptr<ConvexDomain> clone() const override { return std::make_shared<FunctionDomain>(*this); }

private:
    std::function<double(std::span<const double>)> rho_;
};

std::size_t parse_dimension(std::string_view text)
{
    const double v = text::parse_number(text, "domain dimension");
    if (v < 1 || v != std::floor(v) || v > 64) {
        fail(ErrorKind::config, "domain dimension must be an integer in [1, 64], got '" + std::string(text) + "'");
    }
    return static_cast<std::size_t>(v);
}

std::string join(const std::vector<std::string_view> &parts, std::size_t from, std::size_t to)
{
    std::string out;
    for (std::size_t i = from; i < to; ++i) {
        out += (i > from ? ":" : "");
        out += parts[i];
    }
    return out;
}

} // namespace

DomainPtr make_ball(std::size_t n, double radius, double rho_scale)
{
    if (!(rho_scale > 0)) {
        fail(ErrorKind::argument, "rho scale must be positive");
    }
    return std::make_shared<Ball>(n, radius, rho_scale);
}

DomainPtr make_ellipsoid(std::vector<double> semi_axes)
{
    if (semi_axes.empty()) {
        fail(ErrorKind::argument, "ellipsoid needs at least one semi-axis");
    }
    for (double a : semi_axes) {
        if (!(a > 0) || !std::isfinite(a)) {
            fail(ErrorKind::argument, "ellipsoid semi-axes must be positive");
        }
    }
    return std::make_shared<Ellipsoid>(std::move(semi_axes));
}

DomainPtr make_polydisc(std::size_t n) { return std::make_shared<Polydisc>(n); }

DomainPtr make_profile(std::function<double(double)> g, std::function<double(double)> g_prime, double tau,
                       std::string tag)
{
    if (!(tau > 0)) {
        fail(ErrorKind::argument, "profile tau must be positive");
    }
    return std::make_shared<Profile>(std::move(g), std::move(g_prime), tau, std::move(tag));
}

DomainPtr make_profile(const Modulus &omega, double alpha, double tau)
{
    if (!(alpha > 0)) {
        fail(ErrorKind::argument, "profile alpha must be positive");
    }
    if (!(tau > 0) || !(1.5 * tau < omega.radius())) {
        fail(ErrorKind::argument, "profile tau must satisfy 0 < 1.5 tau < modulus radius");
    }
    auto h = std::make_shared<HTransform>(omega, 0.5 * omega.radius());
    return make_profile([h, alpha](double y) { return alpha * (*h)(y); },
                        [h, alpha](double y) { return alpha * h->derivative(y); }, tau,
                        "profile:" + omega.literal() + ":" + text::fmt(alpha) + ":" + text::fmt(tau));
}

DomainPtr make_graph(const Modulus &omega, std::size_t n)
{
    if (n == 0) {
        fail(ErrorKind::argument, "graph domain dimension must be at least 1");
    }
    return std::make_shared<Graph>(omega, n);
}

DomainPtr make_from_function(std::size_t n, std::function<double(std::span<const double>)> rho,
                             double bounding_radius, RVec interior_point, std::string tag)
{
    return std::make_shared<FunctionDomain>(n, std::move(rho), bounding_radius, std::move(interior_point),
                                            std::move(tag));
}

DomainPtr parse_domain(std::string_view literal)
{
    const auto parts = text::split(literal, ':');
    const auto kind = parts.front();
    const auto bad = [&](const std::string &why) {
        fail(ErrorKind::config, "bad domain literal '" + std::string(literal) + "': " + why);
    };
    try {
        if (kind == "ball") {
            if (parts.size() != 2) {
                bad("expected ball:<n>");
            }
            return make_ball(parse_dimension(parts[1]));
        }
        if (kind == "ellipsoid") {
            if (parts.size() != 2) {
                bad("expected ellipsoid:<a1,...,an>");
            }
            std::vector<double> a;
            for (auto f : text::split(parts[1], ',')) {
                a.push_back(text::parse_number(f, "ellipsoid semi-axis"));
            }
            return make_ellipsoid(std::move(a));
        }
        if (kind == "profile") {
            if (parts.size() < 4) {
                bad("expected profile:<modulus>:<alpha>:<tau>");
            }
            const Modulus omega = parse_modulus(join(parts, 1, parts.size() - 2));
            return make_profile(omega, text::parse_number(parts[parts.size() - 2], "profile alpha"),
                                text::parse_number(parts.back(), "profile tau"));
        }
        if (kind == "graph") {
            if (parts.size() < 3) {
                bad("expected graph:<modulus>:<n>");
            }
            const Modulus omega = parse_modulus(join(parts, 1, parts.size() - 1));
            return make_graph(omega, parse_dimension(parts.back()));
        }
    } catch (const Error &e) {
        if (e.kind() == ErrorKind::config) {
            throw;
        }
        bad(e.what());
    }
    fail(ErrorKind::config, "unknown domain kind '" + std::string(kind) + "' in literal '" + std::string(literal) + "'");
}

std::vector<RVec> complex_tangent_basis(std::span<const double> eta)
{
    const std::size_t n = eta.size() / 2;
    std::vector<RVec> residuals;
    std::size_t drop = 0;
    double drop_norm = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
        RVec e(eta.size(), 0.0);
        e[2 * k] = 1;
        const std::complex<double> c = hermitian(e, eta);
        RVec r = complex_axpy(e, -c, eta);
        const double nr = norm(r);
        if (nr < drop_norm) {
            drop_norm = nr;
            drop = k;
        }
        residuals.push_back(std::move(r));
    }
    std::vector<RVec> basis;
    for (std::size_t k = 0; k < n; ++k) {
        if (k == drop) {
            continue;
        }
        RVec v = residuals[k];
        for (const auto &b : basis) {
            v = complex_axpy(v, -hermitian(v, b), b);
        }
        v = complex_axpy(v, -hermitian(v, eta), eta);
        basis.push_back(normalized(v));
    }
    return basis;
}

BoundaryPoint boundary_point_with_normal(std::span<const double> xi, std::span<const double> inward_normal)
{
    if (xi.size() != inward_normal.size() || xi.size() % 2 != 0) {
        fail(ErrorKind::argument, "boundary point and normal must be even-length vectors of equal size");
    }
    const double nn = norm(inward_normal);
    if (!(nn > 0)) {
        fail(ErrorKind::argument, "normal must be non-zero");
    }
    BoundaryPoint bp;
    bp.xi.assign(xi.begin(), xi.end());
    bp.normal = scaled(inward_normal, 1.0 / nn);
    bp.tangent = complex_tangent_basis(bp.normal);
    return bp;
}

BoundaryPoint make_boundary_point(const ConvexDomain &domain, std::span<const double> xi)
{
    if (xi.size() != domain.real_dim()) {
        fail(ErrorKind::argument, "boundary point has the wrong dimension");
    }
    const ConvexPiece piece = domain.active_piece(xi);
    const double gn = norm(piece.gradient);
    if (!(gn >= 1e-8)) {
        fail(ErrorKind::ill_conditioned_boundary, "gradient of the defining function vanishes at the boundary point");
    }
    return boundary_point_with_normal(xi, scaled(piece.gradient, -1.0));
}

RayHit ray_cast(const ConvexDomain &domain, std::span<const double> z, std::span<const double> unit_dir, double tol,
                double rel)
{
    RVec probe(z.size());
    const auto value = [&](double t) {
        for (std::size_t i = 0; i < z.size(); ++i) {
            probe[i] = z[i] + t * unit_dir[i];
        }
        return domain.rho(probe);
    };
    // Illinois false position on rho along the ray; the bracket [lo, hi]
    // always has lo inside and hi outside.
    double lo = 0;
    double hi = norm(z) + domain.bounding_radius() * (1 + 1e-12) + 1e-12;
    double flo = value(lo);
    double fhi = value(hi);
    if (!(flo < 0)) {
        return {0, 0};
    }
    if (!(fhi >= 0)) {
        fhi = std::max(fhi, 0.0);
    }
    int side = 0;
    for (int it = 0; it < 400 && hi - lo > std::max(tol, rel * lo); ++it) {
        double x = lo - flo * (hi - lo) / (fhi - flo);
        if (!(x > lo && x < hi) || it % 8 == 7) {
            x = 0.5 * (lo + hi);
        }
        if (x <= lo || x >= hi) {
            break;
        }
        const double fx = value(x);
        if (fx < 0) {
            lo = x;
            flo = fx;
            if (side == -1) {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            fhi = fx;
            if (side == 1) {
                flo *= 0.5;
            }
            side = 1;
        }
    }
    return {lo, hi};
}

Projection boundary_project(const ConvexDomain &domain, std::span<const double> z, double tol)
{
    if (z.size() != domain.real_dim()) {
        fail(ErrorKind::argument, "point has the wrong dimension");
    }
    if (!domain.contains(z)) {
        fail(ErrorKind::domain, "boundary_project needs an interior point");
    }
    if (!(tol > 0)) {
        fail(ErrorKind::argument, "tolerance must be positive");
    }
    const std::size_t dim = domain.real_dim();
    std::vector<RVec> dirs = axis_directions(dim);
    for (auto &d : quasi_directions(dim, 64)) {
        dirs.push_back(std::move(d));
    }
    RVec best_dir;
    double best_t = std::numeric_limits<double>::infinity();
    for (const auto &d : dirs) {
        const RayHit hit = ray_cast(domain, z, d, tol);
        const double t = 0.5 * (hit.t_in + hit.t_out);
        if (t < best_t - 4 * tol || (std::abs(t - best_t) <= 4 * tol && lex_less(d, best_dir))) {
            best_t = t;
            best_dir = d;
        }
    }

    const auto outward = [&](std::span<const double> d, double t) {
        const RVec xi = axpy(z, t, d);
        RVec g = domain.active_piece(xi).gradient;
        const double gn = norm(g);
        if (!(gn >= 1e-8)) {
            fail(ErrorKind::ill_conditioned_boundary, "gradient vanishes at the projected boundary point");
        }
        return scaled(g, 1.0 / gn);
    };
    const auto angle = [](std::span<const double> a, std::span<const double> b) {
        return std::acos(std::clamp(dot(a, b), -1.0, 1.0));
    };

    RVec n = outward(best_dir, best_t);
    double residual = angle(n, best_dir);
    double gamma = 1.0;
    for (int it = 0; it < 2000 && residual > 1e-10 && gamma > 1e-14; ++it) {
        const double nd = dot(n, best_dir);
        RVec trial = best_dir;
        for (std::size_t i = 0; i < dim; ++i) {
            trial[i] += gamma * (n[i] - nd * best_dir[i]);
        }
        trial = normalized(trial);
        const RayHit hit = ray_cast(domain, z, trial, tol);
        const double t = 0.5 * (hit.t_in + hit.t_out);
        if (t < best_t) {
            best_t = t;
            best_dir = std::move(trial);
            n = outward(best_dir, best_t);
            residual = angle(n, best_dir);
            gamma = std::min(1.0, 2 * gamma);
        } else {
            gamma *= 0.5;
        }
    }

    const double delta = best_t * std::max(0.0, dot(n, best_dir));
    if (residual > projection_alignment_threshold) {
        throw ToleranceNotMet("boundary projection did not align with the normal", 0.0, delta);
    }
    Projection out{make_boundary_point(domain, axpy(z, best_t, best_dir)), delta};
    out.point.alignment_residual = residual;
    return out;
}

std::vector<RVec> boundary_points(const ConvexDomain &domain, std::size_t count, bool skip_seams)
{
    std::vector<RVec> out;
    const RVec &c = domain.interior_point();
    const double tol = 1e-13 * domain.bounding_radius();
    for (std::uint64_t offset = 1; out.size() < count && offset < 8 * count + 64; ++offset) {
        const RVec d = quasi_directions(domain.real_dim(), 1, offset).front();
        const RayHit hit = ray_cast(domain, c, d, tol);
        RVec xi = axpy(c, 0.5 * (hit.t_in + hit.t_out), d);
        if (!(skip_seams && domain.near_seam(xi))) {
            out.push_back(std::move(xi));
        }
    }
    return out;
}

std::vector<BoundaryPoint> sample_boundary(const ConvexDomain &domain, std::size_t count, bool skip_seams)
{
    std::vector<BoundaryPoint> out;
    for (const auto &xi : boundary_points(domain, count, skip_seams)) {
        try {
            out.push_back(make_boundary_point(domain, xi));
        } catch (const Error &e) {
            if (e.kind() != ErrorKind::ill_conditioned_boundary) {
                throw;
            }
        }
    }
    return out;
}

ComplexHyperplane complex_tangent_hyperplane(const ConvexDomain &domain, const BoundaryPoint &xi)
{
    if (xi.alignment_residual > projection_alignment_threshold) {
        fail(ErrorKind::certificate_failure, "boundary point alignment certificate above threshold");
    }
    if (!(norm(domain.active_piece(xi.xi).gradient) >= 1e-8)) {
        fail(ErrorKind::ill_conditioned_boundary, "gradient of the defining function vanishes at the boundary point");
    }
    return {xi.xi, xi.tangent};
}

StrictnessProbe c_strict_probe(const ConvexDomain &domain, const BoundaryPoint &xi, std::span<const double> radii,
                               std::size_t samples_per_radius)
{
    StrictnessProbe out;
    if (domain.complex_dim() == 1) {
        out.note = "complex tangent hyperplane is the single point xi; the condition is vacuous";
        return out;
    }
    if (samples_per_radius == 0) {
        fail(ErrorKind::argument, "samples_per_radius must be positive");
    }
    const std::size_t m = xi.tangent.size();
    const auto coeffs = quasi_directions(2 * m, samples_per_radius);
    for (double d : radii) {
        if (!(d > 0)) {
            fail(ErrorKind::argument, "probe radii must be positive");
        }
        double worst = std::numeric_limits<double>::infinity();
        for (const auto &c : coeffs) {
            RVec p = xi.xi;
            for (std::size_t k = 0; k < m; ++k) {
                p = complex_axpy(p, d * std::complex<double>(c[2 * k], c[2 * k + 1]), xi.tangent[k]);
            }
            const ConvexPiece piece = domain.active_piece(p);
            const double gn = norm(piece.gradient);
            const double margin = gn > 0 ? piece.value / gn : piece.value;
            worst = std::min(worst, margin);
        }
        out.samples.push_back({d, worst});
    }
    return out;
}

} // namespace koba
