#ifndef KOBA_GEODESICS_HPP
#define KOBA_GEODESICS_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <koba/domain.hpp>
#include <koba/kobayashi.hpp>
#include <koba/modulus.hpp>
#include <koba/parallel.hpp>

namespace koba
{

// sigma(t) = xi + eps e^{-2t} eta, eta the inward unit normal at xi.
struct NormalRay {
    BoundaryPoint xi;
    double eps = 0;
};

// xi must lie on the boundary (|rho(xi)| / |grad rho| <= 1e-8 R).
NormalRay make_normal_ray(const ConvexDomain &domain, std::span<const double> xi, double eps);

// Half the embedding depth tau certified by select_parameters at the given modulus.
double certified_ray_scale(const ConvexDomain &domain, const Modulus &omega, std::size_t boundary_samples = 256,
                           std::uint64_t seed = 0);

// Throws ray_escape when sigma(t) is not inside the domain.
RVec sigma_eval(const ConvexDomain &domain, const NormalRay &ray, double t);

// Largest t with eps e^{-2t} >= 4e-9 R; later points are too close to the
// boundary for the distance brackets.
double max_ray_time(const ConvexDomain &domain, const NormalRay &ray);

// Uniform grid with `points` nodes on [0, T].
std::vector<double> uniform_time_grid(double T = 8, std::size_t points = 33);

struct GeodesicPair {
    double s = 0;
    double t = 0;
    double lo = 0;
    double hi = 0;
    // max(hi - |s-t|, |s-t| - lo, 0).
    double defect = 0;
};

inline constexpr double max_almost_geodesic_K = 100;

struct AlmostGeodesicReport {
    double K_additive = 1;
    double K_lipschitz = 0;
    double K = 1;
    // Largest metric upper bracket of sigma'(t) over the grid.
    double speed_sup = 0;
    // min over pairs of lo - |s-t|.
    double lower_gap = 0;
    std::vector<GeodesicPair> pairs;
    GeodesicPair worst;
    std::vector<std::string> violations;
    bool pass = true;
};

// Pairs s <= t of the grid. K is the least value with
// |s-t| - log K <= lo, hi <= |s-t| + log K, hi <= K |s-t| on the grid and
// kappa(sigma(t); sigma'(t)) <= K; the tangent hyperplane at xi joins the
// lower-bound candidates.
AlmostGeodesicReport almost_geodesic_report(const BracketEngine &engine, const NormalRay &ray,
                                            std::span<const double> times, Exec exec = Exec::parallel);

// Sequences converging to a boundary point.
struct BoundarySequence {
    RVec limit;
    std::vector<RVec> points;
};

// xi + eps 2^{-nu} eta for nu = 1..depth.
BoundarySequence dyadic_normal_sequence(const ConvexDomain &domain, std::span<const double> xi, double eps,
                                        std::size_t depth);

// Throws sequence_spec unless the points lie in the domain, approach the
// limit monotonically over the second half, and end within tail_tol of it.
void check_sequence(const ConvexDomain &domain, const BoundarySequence &seq, double tail_tol);

struct GromovExperimentOptions {
    std::vector<double> ladder{1, 2, 3, 4};
    double cap_factor = 1.5;
    double cap_floor = 0.5;
};

struct GromovExperimentReport {
    // "diverging", "bounded" or "unclassified".
    std::string classification;
    std::size_t rows = 0;
    std::size_t cols = 0;
    // Row-major brackets of (p_i | q_j)_o.
    std::vector<DistanceBracket> products;
    std::vector<double> diagonal_lo;
    // Diagonal index after which lo stays above each ladder threshold, if any.
    std::vector<std::optional<std::size_t>> crossings;
    double cap = 0;
    double max_hi = 0;
};

GromovExperimentReport gromov_boundary_experiment(const BracketEngine &engine, const BoundarySequence &p,
                                                  const BoundarySequence &q, std::span<const double> o,
                                                  const GromovExperimentOptions &opts = {},
                                                  Exec exec = Exec::parallel);

// A map between two domains treated as a Kobayashi isometry.
struct Isometry {
    std::string name;
    DomainPtr source;
    DomainPtr target;
    std::function<RVec(std::span<const double>)> map;
};

// identity:<domain>, disc-aut:<re>,<im>, ball-aut:<a_1 re>,<a_1 im>,...,
// disc-to-ball:<n>. Throws config on anything else.
Isometry parse_isometry(std::string_view literal);

struct ExtensionProbeReport {
    // diameters[k] = max pairwise distance of F(p_nu), nu > k (1-based tails).
    std::vector<double> diameters;
    std::vector<RVec> images;
    RVec limit_estimate;
    // max over sampled pairs of the gap between the two distance brackets
    // (0 when they overlap).
    double isometry_gap = 0;
    // Largest bracket width seen in the sanity check.
    double bracket_width = 0;
    std::size_t check_depth = 12;
    bool extends = false;
};

// Images of a dyadic normal sequence at xi; throws map_error when an image
// leaves the target.
ExtensionProbeReport boundary_limit_probe(const Isometry &F, std::span<const double> xi, double eps,
                                          std::size_t depth = 16, std::size_t check_depth = 12, double tol = 1e-3,
                                          Exec exec = Exec::parallel);

} // namespace koba

#endif
