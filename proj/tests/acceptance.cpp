// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <koba/cli.hpp>
#include <koba/domain.hpp>
#include <koba/errors.hpp>
#include <koba/geodesics.hpp>
#include <koba/kobayashi.hpp>
#include <koba/model_domain.hpp>
#include <koba/modulus.hpp>
#include <koba/sampling.hpp>

namespace fs = std::filesystem;
using namespace koba;

namespace
{

struct Verdict {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string &what)
    {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

const double ln2 = std::log(2.0);

std::string num(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

RVec random_member(const ConvexDomain &d, std::mt19937_64 &rng)
{
    const RVec origin(d.real_dim(), 0.0);
    while (true) {
        RVec x = random_in_ball(rng, origin, 0.99 * d.bounding_radius());
        if (d.contains(x)) {
            return x;
        }
    }
}

Verdict dini_calculus()
{
    Verdict v;
    const auto log1 = dini_integral(Modulus::log_family(1.0), 0.5, 1e-9);
    v.require(log1.finite && std::abs(log1.value - 1 / ln2) <= 1e-6, "log_family 1 gave " + num(log1.value));
    for (double alpha : {0.25, 0.5, 0.75}) {
        const double c = 1.5;
        const double sigma = 0.5;
        const auto r = dini_integral(Modulus::hoelder(alpha, c), sigma, 1e-9);
        const double exact = c * std::pow(sigma, alpha) / alpha;
        v.require(r.finite && std::abs(r.value - exact) <= 1e-6, "hoelder " + num(alpha) + " gave " + num(r.value));
    }
    std::vector<double> t;
    std::vector<double> w;
    for (int k = 1000; k >= 1; --k) {
        t.push_back(std::ldexp(1.0, -k));
        w.push_back(1.0 / std::abs(std::log(t.back())));
    }
    const auto inv = dini_integral(Modulus::empirical(t, w), 0.5, 1e-6);
    v.require(!inv.finite, "1/|log t| was not declared diverged");
    if (v.ok) {
        v.detail = "1/log 2 error " + num(std::abs(log1.value - 1 / ln2)) + ", 1/|log t| diverged";
    }
    return v;
}

Verdict subadditivity()
{
    Verdict v;
    std::mt19937_64 rng(20);
    std::uniform_real_distribution<double> coef(-1, 1);
    for (int k = 0; k < 20; ++k) {
        const std::size_t dim = 1 + static_cast<std::size_t>(k % 3);
        std::vector<double> a(dim);
        for (auto &x : a) {
            x = coef(rng);
        }
        const bool lipschitz = k % 2 == 0;
        const double expo = lipschitz ? 1.0 : 0.25 + 0.05 * k / 2;
        const auto f = [a, expo, lipschitz](std::span<const double> x) {
            double acc = 0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                acc += lipschitz ? a[i] * std::abs(x[i] - 0.2) : a[i] * std::pow(std::abs(x[i]), expo);
            }
            return acc;
        };
        const std::vector<double> c(dim, 0.0);
        const Modulus w = empirical_modulus(f, c, 1.0, 1500, static_cast<std::uint64_t>(k));
        const auto res = check_subadditive(w, square_grid(w.radius(), 100));
        v.require(res.pass, "test function " + std::to_string(k) + " is not sub-additive");
    }
    if (v.ok) {
        v.detail = "20 empirical moduli sub-additive on 100x100 grids";
    }
    return v;
}

Verdict embedding()
{
    Verdict v;
    struct Case {
        DomainPtr domain;
        Modulus omega;
        RVec xi;
    };
    const std::vector<Case> cases{
        {make_ball(1), Modulus::linear(1.0), RVec{1, 0}},
        {make_ball(2), Modulus::linear(2.0), RVec{0.6, 0, 0, 0.8}},
        {make_ellipsoid({2.0, 1.0}), Modulus::linear(2.0), RVec{0, 0, 1, 0}},
        {make_graph(Modulus::log_family(1.0), 2), Modulus::log_family(1.0), RVec{0, 0, 0, 0}},
    };
    std::string worst;
    for (const auto &c : cases) {
        const auto start = std::chrono::steady_clock::now();
        const auto cert = select_parameters(*c.domain, c.omega, c.domain->neighborhood_radius(), 256);
        const ModelDomain model(c.omega, cert.alpha, cert.tau);
        const auto rep = verify_embedding(*c.domain, make_boundary_point(*c.domain, c.xi), model, cert, 32, 65);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const double bound = -cert.m / 4 + 0.05 * cert.m;
        v.require(rep.worst_margin <= bound,
                  c.domain->tag() + " margin " + num(rep.worst_margin) + " above " + num(bound));
        v.require(secs < 60, c.domain->tag() + " took " + num(secs) + " s");
        worst += (worst.empty() ? "" : ", ") + c.domain->tag() + " " + num(rep.worst_margin / cert.m) + "m";
    }
    if (v.ok) {
        v.detail = "worst margins " + worst;
    }
    return v;
}

Verdict tangent_angle()
{
    Verdict v;
    double worst = 0;
    for (const Modulus &w : {Modulus::linear(1.0), Modulus::hoelder(0.5, 1.0), Modulus::log_family(1.0)}) {
        const auto check = tangent_angle_check(ModelDomain(w, 2.0, 0.25), 1000);
        v.require(check.pass && check.worst_ratio <= 1 + 1e-6, w.literal() + " ratio " + num(check.worst_ratio));
        worst = std::max(worst, check.worst_ratio);
    }
    if (v.ok) {
        v.detail = "largest ratio " + num(worst);
    }
    return v;
}

Verdict bracket_soundness()
{
    Verdict v;
    std::mt19937_64 rng(5);
    std::size_t checked = 0;
    for (const auto &[dom, oracle] : {std::pair{make_ball(1), Oracle::disc}, std::pair{make_ball(2), Oracle::ball}}) {
        const BracketEngine engine(dom);
        std::vector<RVec> p, q, dirs;
        for (int k = 0; k < 200; ++k) {
            p.push_back(random_member(*dom, rng));
            q.push_back(random_member(*dom, rng));
            dirs.push_back(random_unit(rng, dom->real_dim()));
        }
        std::vector<DistanceBracket> d(p.size());
        std::vector<MetricBracket> m(p.size());
        for_each_index(p.size(), Exec::parallel, [&](std::size_t k) {
            d[k] = engine.distance(p[k], q[k]);
            m[k] = metric_bracket(*dom, p[k], dirs[k]);
        });
        for (std::size_t k = 0; k < p.size(); ++k) {
            const double exact = exact_oracle(oracle, p[k], q[k]);
            const double slack = 1e-12 * std::max(1.0, exact);
            v.require(d[k].lo <= exact + slack && exact <= d[k].hi + slack,
                      dom->tag() + " pair " + std::to_string(k) + " misses " + num(exact));
            const double kappa = exact_ball_metric(p[k], dirs[k]);
            v.require(m[k].lo <= kappa * (1 + 1e-12) && kappa <= m[k].hi * (1 + 1e-12),
                      dom->tag() + " metric " + std::to_string(k) + " misses " + num(kappa));
            ++checked;
        }
    }
    if (v.ok) {
        v.detail = std::to_string(checked) + " distance and metric brackets contain the closed forms";
    }
    return v;
}

Verdict supporting_hyperplane()
{
    Verdict v;
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-1, 1);
    double tightest = -1;
    for (int k = 0; k < 1000; ++k) {
        const double p = u(rng);
        const double q = u(rng);
        const double bound = 0.5 * std::abs(std::log((1 - p) / (1 - q)));
        const double exact = exact_oracle(Oracle::disc, RVec{p, 0}, RVec{q, 0});
        v.require(bound <= exact + 1e-12, "pair " + num(p) + ", " + num(q) + " violates the bound");
        tightest = std::max(tightest, bound - exact);
    }
    if (v.ok) {
        v.detail = "max bound - exact " + num(tightest);
    }
    return v;
}

Verdict almost_geodesic()
{
    Verdict v;
    {
        const BracketEngine engine(make_ball(1));
        const NormalRay ray = make_normal_ray(engine.domain(), RVec{1, 0}, 0.5);
        const auto rep = almost_geodesic_report(engine, ray, uniform_time_grid());
        double defect_err = 0;
        for (const auto &pair : rep.pairs) {
            const double a = 0.5 * std::exp(-2 * pair.s);
            const double b = 0.5 * std::exp(-2 * pair.t);
            const double exact = exact_oracle(Oracle::disc, RVec{1 - a, 0}, RVec{1 - b, 0});
            defect_err = std::max(defect_err, std::abs(exact - (pair.t - pair.s) - 0.5 * std::log((2 - b) / (2 - a))));
        }
        v.require(defect_err <= 1e-9, "disc defect off by " + num(defect_err));
        v.require(std::abs(rep.K - 4.0 / 3.0) <= 0.02 * 4.0 / 3.0, "disc K = " + num(rep.K));
        v.detail = "disc K " + num(rep.K);
    }
    for (const char *lit : {"ball:2", "ellipsoid:2,1"}) {
        const DomainPtr dom = parse_domain(lit);
        const double eps = certified_ray_scale(*dom, Modulus::linear(2.0));
        const BracketEngine engine(dom);
        const RVec xi = std::string(lit) == "ball:2" ? RVec{1, 0, 0, 0} : RVec{0, 0, 1, 0};
        const NormalRay ray = make_normal_ray(*dom, xi, eps);
        const double T = std::min(8.0, max_ray_time(*dom, ray));
        const auto rep = almost_geodesic_report(engine, ray, uniform_time_grid(T, 17));
        v.require(rep.K <= 10, std::string(lit) + " K = " + num(rep.K));
        v.require(rep.lower_gap >= -1e-6, std::string(lit) + " lower gap " + num(rep.lower_gap));
        if (v.ok) {
            v.detail += std::string(", ") + lit + " K " + num(rep.K);
        }
    }
    return v;
}

Verdict escape()
{
    Verdict v;
    for (std::size_t n : {1U, 2U}) {
        const BracketEngine engine(make_ball(n));
        const auto rep =
            escape_constant(engine, RVec(2 * n, 0.0), 16, default_escape_depths(engine.domain()));
        v.require(rep.constant >= 0.5 * ln2 - 0.01 && rep.constant <= 0.5 * ln2 + ln2 + 0.01,
                  engine.domain().tag() + " C = " + num(rep.constant));
        for (std::size_t k = 1; k < rep.profile.size(); ++k) {
            v.require(rep.profile[k] >= rep.profile[k - 1] - 1e-4, engine.domain().tag() + " profile not monotone");
        }
        v.require(rep.profile.back() <= rep.constant, engine.domain().tag() + " profile exceeds C");
        if (v.ok) {
            v.detail += (n == 1 ? "" : ", ") + engine.domain().tag() + " C " + num(rep.constant);
        }
    }
    return v;
}

Verdict gromov()
{
    Verdict v;
    const BracketEngine engine(make_ball(1));
    const auto p = dyadic_normal_sequence(engine.domain(), RVec{1, 0}, 1.0, 12);
    const auto q = dyadic_normal_sequence(engine.domain(), RVec{-1, 0}, 1.0, 12);
    const RVec o{0, 0};
    const auto same = gromov_boundary_experiment(engine, p, p, o);
    v.require(same.classification == "diverging", "same-point experiment is " + same.classification);
    for (std::size_t k = 0; k < same.diagonal_lo.size(); ++k) {
        const double nu = static_cast<double>(k + 1);
        v.require(same.diagonal_lo[k] >= (nu + 1) * ln2 / 2 - 0.8, "diagonal " + std::to_string(k + 1) + " too low");
    }
    const auto anti = gromov_boundary_experiment(engine, p, q, o);
    v.require(anti.classification == "bounded", "antipodal experiment is " + anti.classification);
    v.require(anti.max_hi < 0.5, "antipodal max hi " + num(anti.max_hi));
    if (v.ok) {
        v.detail = "diverging (last diagonal lo " + num(same.diagonal_lo.back()) + "), bounded (max hi " +
                   num(anti.max_hi) + ")";
    }
    return v;
}

Verdict extension()
{
    Verdict v;
    for (const char *lit : {"identity:ball:1", "disc-to-ball:2", "ball-aut:0.3,0.2,0,-0.1"}) {
        const Isometry F = parse_isometry(lit);
        const RVec xi = F.source->complex_dim() == 1 ? RVec{1, 0} : RVec{1, 0, 0, 0};
        const auto rep = boundary_limit_probe(F, xi, 1.0, 16, 12, 1e-3);
        const double diam = rep.diameters[rep.check_depth - 1];
        v.require(rep.extends && diam < 1e-3, std::string(lit) + " tail diameter " + num(diam));
        v.require(rep.isometry_gap <= rep.bracket_width + 1e-12,
                  std::string(lit) + " isometry gap " + num(rep.isometry_gap));
        if (v.ok) {
            v.detail += (v.detail.empty() ? "" : ", ") + std::string(lit) + " " + num(diam);
        }
    }
    return v;
}

std::string slurp(const fs::path &path)
{
    std::ifstream f(path, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

Verdict reproducibility()
{
    Verdict v;
    const fs::path dir = fs::temp_directory_path() / "koba-acceptance";
    fs::create_directories(dir);
    const std::vector<std::vector<std::string>> runs{
        {"dini", "--modulus", "log:1", "--sigma", "0.5"},
        {"embed-check", "--domain", "ball:2", "--modulus", "linear:2", "--seed", "3"},
        {"distance", "--domain", "ball:2", "--random-pairs", "20", "--seed", "9", "--oracle", "ball"},
        {"almost-geodesic", "--domain", "ball:1", "--xi", "1,0", "--eps", "0.5", "--points", "9"},
        {"gromov-experiment", "--domain", "ball:1", "--xi", "1,0", "--depth", "8"},
        {"extension-probe", "--map", "disc-to-ball:2", "--xi", "1,0"},
    };
    for (const auto &args : runs) {
        std::string csv[2];
        for (int rep = 0; rep < 2; ++rep) {
            const std::string prefix = (dir / (args.front() + std::to_string(rep))).string();
            std::vector<std::string> full = args;
            full.insert(full.end(), {"--out", prefix});
            std::ostringstream out, err;
            const int code = cli::run(full, out, err);
            v.require(code == 0, args.front() + " exited " + std::to_string(code) + ": " + err.str());
            csv[rep] = slurp(prefix + ".csv");
        }
        v.require(!csv[0].empty() && csv[0] == csv[1], args.front() + " CSV differs between runs");
    }
    fs::remove_all(dir);
    if (v.ok) {
        v.detail = std::to_string(runs.size()) + " experiments reproduced byte for byte";
    }
    return v;
}

} // namespace

int main()
{
    struct Criterion {
        int id;
        const char *name;
        double budget;
        std::function<Verdict()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "Dini calculus", 1, dini_calculus},
        {2, "sub-additivity of empirical moduli", 10, subadditivity},
        {3, "model-domain embedding", 240, embedding},
        {4, "tangent-angle domination", 5, tangent_angle},
        {5, "bracket soundness", 120, bracket_soundness},
        {6, "supporting-hyperplane lower bound", 1, supporting_hyperplane},
        {7, "normal rays are almost-geodesics", 120, almost_geodesic},
        {8, "escape constant", 60, escape},
        {9, "Gromov boundary conditions", 60, gromov},
        {10, "extension probe", 60, extension},
        {11, "reproducibility", 120, reproducibility},
    };
    int failures = 0;
    for (const auto &c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception &e) {
            v.ok = false;
            v.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (v.ok && secs > c.budget) {
            v.ok = false;
            v.detail = "runtime " + num(secs) + " s over the " + num(c.budget) + " s budget";
        }
        failures += v.ok ? 0 : 1;
        std::printf("%s criterion %d (%s): %s [%.2f s]\n", v.ok ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(),
                    secs);
    }
    return failures == 0 ? 0 : 1;
}
