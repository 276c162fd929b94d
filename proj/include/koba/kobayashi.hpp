#ifndef KOBA_KOBAYASHI_HPP
#define KOBA_KOBAYASHI_HPP

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <koba/domain.hpp>
#include <koba/linalg.hpp>
#include <koba/parallel.hpp>

namespace koba
{

struct RadiusBracket {
    double lo = 0;
    double hi = 0;
    std::size_t rays = 0;
};

// Bracket on sup{r : p + lambda r v/|v| in the domain for all |lambda| < 1}.
// Ray hits in the complex line through p: the smallest exit is the outer value,
// the smallest entry after angular refinement the inner one (exact up to the
// angular resolution); r_hi - r_lo <= tol r_hi.
RadiusBracket inscribed_disc_radius(const ConvexDomain &domain, std::span<const double> p,
                                    std::span<const double> v, double tol = 1e-7);

struct MetricBracket {
    double lo = 0;
    double hi = 0;
    double r_lo = 0;
    double r_hi = 0;
    std::string method_hi;
};

// Graham's bounds |v|/(2 r_hi) <= kappa <= |v|/r_lo, with the upper side
// tightened by discs inscribed in the slice through p in direction v.
MetricBracket metric_bracket(const ConvexDomain &domain, std::span<const double> p, std::span<const double> v,
                             double tol = 1e-7);

struct DistanceBracket {
    double lo = 0;
    double hi = 0;
    std::string method_lo;
    std::string method_hi;
    std::size_t hyperplanes = 0;
    std::size_t subintervals = 0;
};

struct DistanceOptions {
    // Relative tolerance for the segment integral.
    double tol = 1e-4;
    double radius_tol = 1e-10;
    std::size_t boundary_samples = 128;
    std::size_t max_subintervals = std::size_t{1} << 14;
    bool slice_bound = true;
    // Extra boundary points whose complex supporting hyperplanes join the
    // lower-bound candidate set.
    std::vector<BoundaryPoint> extra_support;
};

// Reusable bracket evaluator: caches the boundary sample set of one domain.
class BracketEngine
{
public:
    explicit BracketEngine(DomainPtr domain, DistanceOptions opts = {});

    DistanceBracket distance(std::span<const double> p, std::span<const double> q) const;
    MetricBracket metric(std::span<const double> p, std::span<const double> v) const;
    // Bracket on (x|y)_o.
    DistanceBracket gromov(std::span<const double> x, std::span<const double> y, std::span<const double> o) const;
    // Copy of this engine with more supporting hyperplanes for the lower side.
    BracketEngine with_support(const std::vector<BoundaryPoint> &extra) const;

    [[nodiscard]] const ConvexDomain &domain() const noexcept { return *domain_; }
    [[nodiscard]] const DomainPtr &domain_ptr() const noexcept { return domain_; }
    [[nodiscard]] const DistanceOptions &options() const noexcept { return opts_; }

private:
    DomainPtr domain_;
    DistanceOptions opts_;
    std::vector<BoundaryPoint> samples_;
};

DistanceBracket distance_bracket(const DomainPtr &domain, std::span<const double> p, std::span<const double> q,
                                 const DistanceOptions &opts = {});

DistanceBracket gromov_product(const DomainPtr &domain, std::span<const double> x, std::span<const double> y,
                               std::span<const double> o, const DistanceOptions &opts = {});

// Row-major matrix of brackets k(a_i, b_j).
std::vector<DistanceBracket> bracket_matrix(const BracketEngine &engine, const std::vector<RVec> &a,
                                            const std::vector<RVec> &b, Exec exec = Exec::parallel);

// Row-major matrix of Gromov product brackets (a_i | b_j)_o.
std::vector<DistanceBracket> gromov_matrix(const BracketEngine &engine, const std::vector<RVec> &a,
                                           const std::vector<RVec> &b, std::span<const double> o,
                                           Exec exec = Exec::parallel);

struct EscapeSample {
    double depth;
    double delta;
    double hi;
    double excess;
};

struct EscapeReport {
    double constant = 0;
    // Per-depth maxima of hi(z0, z) - 1/2 log(1/delta(z)), deepest last.
    std::vector<double> depths;
    std::vector<double> profile;
    std::vector<EscapeSample> samples;
};

// Default depths: 11 geometric values from 1e-1 R down to 1e-6 R.
std::vector<double> default_escape_depths(const ConvexDomain &domain);

EscapeReport escape_constant(const BracketEngine &engine, std::span<const double> z0, std::size_t directions,
                             std::span<const double> depths, Exec exec = Exec::parallel);

enum class Oracle { disc, ball };

Oracle parse_oracle(std::string_view name);

// Exact Kobayashi distance of the unit disc or unit ball.
double exact_oracle(Oracle which, std::span<const double> p, std::span<const double> q);
// Exact infinitesimal metric of the unit ball at p in direction v.
double exact_ball_metric(std::span<const double> p, std::span<const double> v);

// Involutive automorphism of the unit ball exchanging a and 0.
RVec ball_automorphism(std::span<const double> a, std::span<const double> z);

} // namespace koba

#endif
