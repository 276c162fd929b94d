#ifndef KOBA_MODULUS_HPP
#define KOBA_MODULUS_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <koba/parallel.hpp>

namespace koba
{

// omega(t) = c * t^alpha, alpha in (0, 1].
struct Hoelder {
    double alpha;
    double c;
};

// omega(t) = 1 / |log t|^(1 + eps) on (0, 1), omega(0) = 0. Dini but not
// Hoelder for any exponent.
struct LogFamily {
    double eps;
};

// omega(t) = c * t.
struct Linear {
    double c;
};

// Step function on an ascending grid. omega(t) takes the value attached to
// the smallest grid abscissa >= t, and omega(0) = 0.
struct Empirical {
    std::vector<double> t;
    std::vector<double> value;
};

// A modulus of continuity on [0, radius]. Values are immutable once built.
class Modulus
{
public:
    using Kind = std::variant<Hoelder, LogFamily, Linear, Empirical>;

    static Modulus hoelder(double alpha, double c, double radius = 1.0);
    static Modulus log_family(double eps, double radius = 0.5);
    static Modulus linear(double c, double radius = 1.0);
    // Validates the grid: ascending abscissae >= 0, non-negative
    // non-decreasing values. Throws invalid_modulus otherwise.
    static Modulus empirical(std::vector<double> t, std::vector<double> value);

    // Checked evaluation; t outside [0, radius] raises a domain error.
    double operator()(double t) const;

    // omega(exp(-u)) evaluated without forming exp(-u) where a closed form exists.
    double at_exp_neg(double u) const;

    // Integral of omega over [0, b], 0 <= b <= radius.
    double integral(double b) const;

    [[nodiscard]] double radius() const noexcept { return radius_; }
    [[nodiscard]] const Kind &kind() const noexcept { return kind_; }
    [[nodiscard]] std::string_view family() const noexcept;
    // Round-trippable literal (empirical moduli report their grid size only).
    [[nodiscard]] std::string literal() const;

private:
    Modulus(Kind kind, double radius) : kind_(std::move(kind)), radius_(radius) {}

    double eval_unchecked(double t) const;

    Kind kind_;
    double radius_;
};

// Parses hoelder:<alpha>:<c>[:<radius>], log:<eps>[:<radius>],
// linear:<c>[:<radius>], empirical:<path.csv>. Unknown kinds raise a config error.
Modulus parse_modulus(std::string_view literal);

// CSV with header "t,value" and ascending t.
Modulus load_empirical_csv(const std::filesystem::path &path);

struct DiniResult {
    bool finite = false;
    double value = 0;
    // Partial integral over [2^-k sigma, sigma] at the point of decision.
    double partial = 0;
    // Number of geometric blocks examined.
    int blocks = 0;
};

// Integral of omega(t)/t over (0, sigma], or a divergence verdict.
DiniResult dini_integral(const Modulus &omega, double sigma, double tol);

// h(t) = integral of omega over [0, |t|] on (-2r, 2r).
class HTransform
{
public:
    HTransform(Modulus omega, double r);

    double operator()(double t) const;
    // h'(t) = sign(t) omega(|t|).
    double derivative(double t) const;
    // Unique t in [0, 2r) with h(t) = s, to absolute tolerance 1e-12.
    double inverse(double s) const;
    // sup of h on [0, 2r).
    [[nodiscard]] double range_max() const noexcept { return table_.back(); }

    [[nodiscard]] double half_width() const noexcept { return 2 * r_; }
    [[nodiscard]] const Modulus &modulus() const noexcept { return omega_; }

private:
    double integrate_from_node(double t) const;

    Modulus omega_;
    double r_;
    double step_;
    std::vector<double> table_;
};

HTransform h_transform(const Modulus &omega, double r);

struct SubadditivityResult {
    bool pass = true;
    double worst_s = 0;
    double worst_t = 0;
    // max of omega(s+t) - omega(s) - omega(t) over the grid.
    double gap = 0;
};

inline constexpr double subadditivity_slack = 1e-12;

SubadditivityResult check_subadditive(const std::function<double(double)> &omega,
                                      std::span<const std::pair<double, double>> grid);
SubadditivityResult check_subadditive(const Modulus &omega, std::span<const std::pair<double, double>> grid);

// n x n grid of pairs in [0, limit/2)^2, so every s + t < limit.
std::vector<std::pair<double, double>> square_grid(double limit, std::size_t n);

using ScalarField = std::function<double(std::span<const double>)>;

// Sampled modulus of continuity of f on the closed ball B(center, radius).
// Samples lie on random chords with a shared spacing h; the result is the
// exact lag-maximum on those chords, evaluated as a ceiling step on the grid
// k*h, which makes it sub-additive and non-decreasing by construction.
Modulus empirical_modulus(const ScalarField &f, std::span<const double> center, double radius, std::size_t budget,
                          std::uint64_t seed, Exec exec = Exec::parallel);

} // namespace koba

#endif
