#ifndef KOBA_MODEL_DOMAIN_HPP
#define KOBA_MODEL_DOMAIN_HPP

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <koba/domain.hpp>
#include <koba/modulus.hpp>
#include <koba/parallel.hpp>

namespace koba
{

// Omega_{alpha,tau} = {s + it : |t| < tau, alpha h(t) < s < tau}, with h the
// h-transform of omega on (-radius, radius).
class ModelDomain
{
public:
    ModelDomain(Modulus omega, double alpha, double tau);

    bool contains(std::complex<double> zeta) const;
    // alpha h(t) - s; negative exactly on the strip part of the domain.
    double rho(double s, double t) const { return alpha_ * h_(t) - s; }
    // Largest |t| allowed at real part s: min(h^{-1}(s/alpha), tau).
    double half_height(double s) const;
    // G(y) = int_0^y sqrt(1 + alpha^2 omega(|t|)^2) dt for |y| <= tau.
    double arclength(double y) const;

    [[nodiscard]] const Modulus &modulus() const noexcept { return h_.modulus(); }
    [[nodiscard]] const HTransform &h() const noexcept { return h_; }
    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] double tau() const noexcept { return tau_; }

private:
    double speed(double t) const;

    HTransform h_;
    double alpha_;
    double tau_;
    double step_;
    std::vector<double> arc_table_;
};

bool model_membership(const ModelDomain &model, std::complex<double> zeta);

struct ParameterCertificate {
    double m = 0;
    double min_gradient = 0;
    double delta0 = 0;
    double oscillation = 0;
    double alpha = 0;
    double tau = 0;
    // Largest x / h^{-1}(x) seen on the tau grid.
    double tau_ratio = 0;
    std::size_t boundary_samples = 0;
    std::size_t oscillation_pairs = 0;
    std::size_t tau_grid = 0;
};

// Parameter rule of the embedding estimate. The h-transform uses half the
// modulus radius, so h lives on (-omega.radius(), omega.radius()).
ParameterCertificate select_parameters(const ConvexDomain &domain, const Modulus &omega, double r,
                                       std::size_t boundary_samples, std::uint64_t seed = 0,
                                       std::size_t oscillation_pairs = 1000);

struct EmbeddingReport {
    double worst_margin = 0;
    double worst_s = 0;
    double worst_t = 0;
    std::size_t grid_s = 0;
    std::size_t grid_t = 0;
    // Per s-row: s, the half height used for t, and the row's worst margin.
    std::vector<double> row_s;
    std::vector<double> row_half_height;
    std::vector<double> row_worst;
};

// max over the grid of rho(xi + zeta eta) / s for zeta = s + it in the model
// domain. Throws embedding_violation if some grid point has rho >= 0.
EmbeddingReport verify_embedding(const ConvexDomain &domain, const BoundaryPoint &xi, const ModelDomain &model,
                                 const ParameterCertificate &cert, std::size_t grid_s = 32, std::size_t grid_t = 65,
                                 Exec exec = Exec::parallel);

struct BoundaryGeometry {
    double theta_hat;
    double arclength;
};

// theta_hat(y) = atan(alpha omega(|y|) sign y), G(y) = int_0^y sqrt(1 + alpha^2 omega(|t|)^2) dt.
BoundaryGeometry boundary_geometry(const ModelDomain &model, double y);

// G^{-1}(s) by bisection to 1e-12.
double arclength_inverse(const ModelDomain &model, double s);

struct AngleCheck {
    bool pass = true;
    double worst_ratio = 0;
    double worst_s = 0;
    std::size_t points = 0;
    std::vector<double> grid;
    std::vector<double> ratios;
};

inline constexpr double angle_ratio_limit = 1 + 1e-6;

// max over an s-grid of |theta_hat(G^{-1}(s))| / (alpha omega(|s|)).
AngleCheck tangent_angle_check(const ModelDomain &model, std::size_t points = 1000, Exec exec = Exec::parallel);

} // namespace koba

#endif
