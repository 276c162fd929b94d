#ifndef KOBA_DOMAIN_HPP
#define KOBA_DOMAIN_HPP

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <koba/linalg.hpp>
#include <koba/modulus.hpp>

namespace koba
{

// Multiplication by i on C^n in real storage:
// (x1, x2, ..., x_{2n-1}, x_{2n}) -> (-x2, x1, ..., -x_{2n}, x_{2n-1}).
RVec multiply_by_i(std::span<const double> v);

// Value and gradient of one convex piece of a defining function. For domains
// cut out by several convex inequalities, rho is the max of the pieces and the
// active piece is the one attaining it.
struct ConvexPiece {
    double value;
    RVec gradient;
};

// Affine image bound: the map z -> (z_j - center_j) / scale_j sends the
// domain into the unit ball of C^n. Used for distance lower bounds.
struct BallCover {
    RVec center;
    std::vector<double> scale;
};

// A bounded convex domain in C^n given by a convex defining function rho
// (negative inside). Implementations are immutable; all queries are pure.
class ConvexDomain
{
public:
    ConvexDomain(std::size_t n, double bounding_radius, RVec interior_point, double neighborhood_radius,
                 std::string tag);
    virtual ~ConvexDomain() = default;

    virtual double rho(std::span<const double> x) const = 0;
    // Defaults to central differences with step 1e-6.
    virtual RVec gradient(std::span<const double> x) const;
    // Defaults to the single piece (rho, gradient).
    virtual ConvexPiece active_piece(std::span<const double> x) const;
    // True near non-smooth seams where boundary queries are rejected.
    virtual bool near_seam(std::span<const double> x) const;
    virtual std::vector<BallCover> ball_covers() const;

    bool contains(std::span<const double> x) const { return rho(x) < 0; }

    [[nodiscard]] std::size_t complex_dim() const noexcept { return n_; }
    [[nodiscard]] std::size_t real_dim() const noexcept { return 2 * n_; }
    // Every member has Euclidean norm <= bounding_radius.
    [[nodiscard]] double bounding_radius() const noexcept { return radius_; }
    [[nodiscard]] const RVec &interior_point() const noexcept { return interior_; }
    // Radius of the boundary neighbourhood on which rho is meant to be used.
    [[nodiscard]] double neighborhood_radius() const noexcept { return neighborhood_; }
    [[nodiscard]] const std::string &tag() const noexcept { return tag_; }

    std::shared_ptr<const ConvexDomain> with_neighborhood_radius(double r) const;

protected:
    virtual std::shared_ptr<ConvexDomain> clone() const = 0;

private:
    std::size_t n_;
    double radius_;
    RVec interior_;
    double neighborhood_;
    std::string tag_;
};

using DomainPtr = std::shared_ptr<const ConvexDomain>;

// Gallery.
DomainPtr make_ball(std::size_t n, double radius = 1.0, double rho_scale = 1.0);
DomainPtr make_ellipsoid(std::vector<double> semi_axes);
DomainPtr make_polydisc(std::size_t n);
// {x + iy : g(y) < x} intersected with the disc of radius 1.5*tau about tau.
// g must be convex, C^1, with g(0) = 0, g'(0) = 0 and defined for |y| < 1.5*tau.
DomainPtr make_profile(std::function<double(double)> g, std::function<double(double)> g_prime, double tau,
                       std::string tag);
// Profile g = alpha * h with h the h-transform of omega.
DomainPtr make_profile(const Modulus &omega, double alpha, double tau);
// {Im z_n > sum_k h(x_k)} over all real coordinates except Im z_n, capped by a
// ball B(i * Rc/2 * e_n, Rc), Rc = 0.4 * omega.radius(). The marked point is 0
// with inward normal i * e_n.
DomainPtr make_graph(const Modulus &omega, std::size_t n);
// Domain from a bare defining function; the gradient uses finite differences.
DomainPtr make_from_function(std::size_t n, std::function<double(std::span<const double>)> rho,
                             double bounding_radius, RVec interior_point, std::string tag);

// ball:<n>, ellipsoid:<a1,...,an>, profile:<modulus>:<alpha>:<tau>, graph:<modulus>:<n>.
DomainPtr parse_domain(std::string_view literal);

struct BoundaryPoint {
    RVec xi;
    // Unit inward normal.
    RVec normal;
    // Complex-orthonormal basis of the complex tangent space, n - 1 vectors.
    std::vector<RVec> tangent;
    // Angle (rad) between the projection direction and the outward normal;
    // 0 when the point was not produced by a projection.
    double alignment_residual = 0;
};

// Boundary point with normal taken from the active gradient of rho at xi.
BoundaryPoint make_boundary_point(const ConvexDomain &domain, std::span<const double> xi);
// Boundary point with an explicitly supplied inward normal.
BoundaryPoint boundary_point_with_normal(std::span<const double> xi, std::span<const double> inward_normal);

// Complex-orthonormal basis of the Hermitian complement of the unit vector eta.
std::vector<RVec> complex_tangent_basis(std::span<const double> eta);

struct RayHit {
    // z + t_in d is inside, z + t_out d is not; t_out - t_in <= max(tol, rel * t_in).
    double t_in;
    double t_out;
};

RayHit ray_cast(const ConvexDomain &domain, std::span<const double> z, std::span<const double> unit_dir,
                double tol, double rel = 0);

struct Projection {
    BoundaryPoint point;
    double delta;
};

inline constexpr double projection_alignment_threshold = 1e-4;

// Nearest boundary point of z and dist(z, complement).
Projection boundary_project(const ConvexDomain &domain, std::span<const double> z, double tol = 1e-10);

// Quasi-uniform boundary points, ray cast from the interior point.
std::vector<RVec> boundary_points(const ConvexDomain &domain, std::size_t count, bool skip_seams = true);
// As above, dropping points where the gradient degenerates.
std::vector<BoundaryPoint> sample_boundary(const ConvexDomain &domain, std::size_t count, bool skip_seams = true);

struct ComplexHyperplane {
    RVec point;
    std::vector<RVec> directions;
};

ComplexHyperplane complex_tangent_hyperplane(const ConvexDomain &domain, const BoundaryPoint &xi);

struct StrictnessSample {
    double radius;
    double min_margin;
};

struct StrictnessProbe {
    std::vector<StrictnessSample> samples;
    std::string note;
};

StrictnessProbe c_strict_probe(const ConvexDomain &domain, const BoundaryPoint &xi, std::span<const double> radii,
                               std::size_t samples_per_radius);

} // namespace koba

#endif
