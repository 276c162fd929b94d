#include <koba/cli.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include <koba/domain.hpp>
#include <koba/errors.hpp>
#include <koba/geodesics.hpp>
#include <koba/kobayashi.hpp>
#include <koba/model_domain.hpp>
#include <koba/modulus.hpp>
#include <koba/parallel.hpp>
#include <koba/sampling.hpp>
#include <koba/version.hpp>

#include "text.hpp"

namespace koba::cli
{

namespace
{

using nlohmann::json;
using text::fmt;

struct OptionSpec {
    std::string name;
    std::string fallback;
    std::string help;
    bool required = false;
};

using Row = std::vector<std::string>;

struct Outcome {
    int status = 0;
    json summary = json::object();
    Row header;
    std::vector<Row> rows;
    std::string message;
};

class Context
{
public:
    explicit Context(std::map<std::string, std::string> values) : values_(std::move(values)) {}

    [[nodiscard]] bool has(const std::string &name) const
    {
        const auto it = values_.find(name);
        return it != values_.end() && !it->second.empty();
    }

    [[nodiscard]] const std::string &str(const std::string &name) const
    {
        const auto it = values_.find(name);
        if (it == values_.end() || it->second.empty()) {
            fail(ErrorKind::config, "missing required option --" + name);
        }
        return it->second;
    }

    [[nodiscard]] double num(const std::string &name) const { return text::parse_number(str(name), "--" + name); }

    [[nodiscard]] std::size_t count(const std::string &name) const
    {
        const double v = num(name);
        if (!(v >= 0) || v != std::floor(v) || v > 1e9) {
            fail(ErrorKind::config, "--" + name + " must be a non-negative integer");
        }
        return static_cast<std::size_t>(v);
    }

    [[nodiscard]] RVec vec(const std::string &name) const
    {
        RVec v;
        for (auto part : text::split(str(name), ',')) {
            v.push_back(text::parse_number(part, "--" + name));
        }
        return v;
    }

    [[nodiscard]] RVec point(const std::string &name, const ConvexDomain &dom) const
    {
        RVec v = vec(name);
        if (v.size() != dom.real_dim()) {
            fail(ErrorKind::config, "--" + name + " needs " + std::to_string(dom.real_dim()) +
                                        " real coordinates for " + dom.tag());
        }
        return v;
    }

    [[nodiscard]] std::uint64_t seed() const
    {
        if (!has("seed")) {
            fail(ErrorKind::config, "--seed is required for this sampling experiment");
        }
        const double v = num("seed");
        if (!(v >= 0) || v != std::floor(v) || v > 9.007199254740992e15) {
            fail(ErrorKind::config, "--seed must be a non-negative integer");
        }
        return static_cast<std::uint64_t>(v);
    }

    [[nodiscard]] DomainPtr domain() const { return parse_domain(str("domain")); }
    [[nodiscard]] Modulus modulus() const { return parse_modulus(str("modulus")); }

private:
    std::map<std::string, std::string> values_;
};

struct Command {
    std::string name;
    std::string help;
    std::vector<OptionSpec> options;
    std::function<Outcome(const Context &)> body;
};

std::string join(std::span<const double> v, char sep = ' ')
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0) {
            s += sep;
        }
        s += fmt(v[i]);
    }
    return s;
}

json bracket_json(const DistanceBracket &b)
{
    return {{"lo", b.lo}, {"hi", b.hi}, {"method_lo", b.method_lo}, {"method_hi", b.method_hi}};
}

RVec random_member(const ConvexDomain &dom, std::mt19937_64 &rng)
{
    const RVec origin(dom.real_dim(), 0.0);
    for (int attempt = 0; attempt < 1000000; ++attempt) {
        RVec x = random_in_ball(rng, origin, dom.bounding_radius());
        if (dom.contains(x)) {
            return x;
        }
    }
    fail(ErrorKind::sampling, "rejection sampling found no interior point of " + dom.tag());
}

std::optional<Oracle> oracle_for(const Context &ctx)
{
    if (!ctx.has("oracle")) {
        return std::nullopt;
    }
    return parse_oracle(ctx.str("oracle"));
}

void check_oracle_domain(Oracle which, const ConvexDomain &dom)
{
    const bool disc = which == Oracle::disc;
    if (dom.tag() != (disc ? "ball:1" : "ball:" + std::to_string(dom.complex_dim())) || (disc && dom.complex_dim() != 1)) {
        fail(ErrorKind::config, std::string("oracle '") + (disc ? "disc" : "ball") + "' needs the unit " +
                                    (disc ? "disc ball:1" : "ball ball:<n>") + ", got " + dom.tag());
    }
}

Outcome cmd_dini(const Context &ctx)
{
    const Modulus omega = ctx.modulus();
    const double sigma = ctx.num("sigma");
    const DiniResult r = dini_integral(omega, sigma, ctx.num("tol"));
    Outcome o;
    o.message = r.finite ? fmt(r.value) : "diverged";
    o.header = {"modulus", "sigma", "finite", "value", "partial", "blocks"};
    o.rows.push_back({omega.literal(), fmt(sigma), r.finite ? "1" : "0", r.finite ? fmt(r.value) : "inf",
                      fmt(r.partial), std::to_string(r.blocks)});
    o.summary = {{"finite", r.finite}, {"partial", r.partial}, {"blocks", r.blocks}};
    o.summary["value"] = r.finite ? json(r.value) : json("inf");
    return o;
}

Outcome cmd_model_check(const Context &ctx)
{
    const ModelDomain model(ctx.modulus(), ctx.num("alpha"), ctx.num("tau"));
    const AngleCheck check = tangent_angle_check(model, ctx.count("points"));
    Outcome o;
    o.header = {"s", "ratio"};
    for (std::size_t k = 0; k < check.grid.size(); ++k) {
        o.rows.push_back({fmt(check.grid[k]), fmt(check.ratios[k])});
    }
    o.summary = {{"pass", check.pass},
                 {"worst_ratio", check.worst_ratio},
                 {"worst_s", check.worst_s},
                 {"limit", angle_ratio_limit},
                 {"G_tau", model.arclength(model.tau())}};
    if (ctx.has("zeta")) {
        const RVec z = ctx.vec("zeta");
        if (z.size() != 2) {
            fail(ErrorKind::config, "--zeta needs two coordinates re,im");
        }
        o.summary["zeta_member"] = model.contains({z[0], z[1]});
    }
    o.message = std::string(check.pass ? "pass" : "FAIL") + " worst ratio " + fmt(check.worst_ratio);
    o.status = check.pass ? 0 : 1;
    return o;
}

Outcome cmd_embed_check(const Context &ctx)
{
    const DomainPtr dom = ctx.domain();
    const Modulus omega = ctx.modulus();
    const std::uint64_t seed = ctx.seed();
    const double r = ctx.has("radius") ? ctx.num("radius") : dom->neighborhood_radius();
    const ParameterCertificate cert =
        select_parameters(*dom, omega, r, ctx.count("samples"), seed, ctx.count("pairs"));
    const ModelDomain model(omega, cert.alpha, cert.tau);
    const RVec xi = ctx.has("xi") ? ctx.point("xi", *dom) : boundary_points(*dom, 1).front();
    const BoundaryPoint bp = make_boundary_point(*dom, xi);
    Outcome o;
    o.summary = {{"m", cert.m},
                 {"min_gradient", cert.min_gradient},
                 {"delta0", cert.delta0},
                 {"oscillation", cert.oscillation},
                 {"alpha", cert.alpha},
                 {"tau", cert.tau},
                 {"tau_ratio", cert.tau_ratio},
                 {"radius", r},
                 {"xi", xi}};
    const EmbeddingReport rep = verify_embedding(*dom, bp, model, cert, ctx.count("grid-s"), ctx.count("grid-t"));
    const double bound = -cert.m / 4 + 0.05 * cert.m;
    o.header = {"s", "half_height", "worst_margin"};
    for (std::size_t i = 0; i < rep.row_s.size(); ++i) {
        o.rows.push_back({fmt(rep.row_s[i]), fmt(rep.row_half_height[i]), fmt(rep.row_worst[i])});
    }
    const bool ok = rep.worst_margin <= bound;
    o.summary["worst_margin"] = rep.worst_margin;
    o.summary["worst_s"] = rep.worst_s;
    o.summary["worst_t"] = rep.worst_t;
    o.summary["margin_bound"] = bound;
    o.summary["margin_ok"] = ok;
    o.message = std::string(ok ? "pass" : "FAIL") + " worst margin " + fmt(rep.worst_margin) + " (bound " +
                fmt(bound) + ")";
    o.status = ok ? 0 : 1;
    return o;
}

Outcome cmd_metric(const Context &ctx)
{
    const DomainPtr dom = ctx.domain();
    const RVec p = ctx.point("point", *dom);
    const RVec v = ctx.point("dir", *dom);
    const MetricBracket b = metric_bracket(*dom, p, v, ctx.num("tol"));
    Outcome o;
    o.header = {"point", "dir", "lo", "hi", "method_lo", "method_hi", "r_lo", "r_hi"};
    Row row{join(p), join(v), fmt(b.lo), fmt(b.hi), "graham", b.method_hi, fmt(b.r_lo), fmt(b.r_hi)};
    o.summary = {{"lo", b.lo}, {"hi", b.hi}, {"r_lo", b.r_lo}, {"r_hi", b.r_hi}, {"method_hi", b.method_hi}};
    if (const auto which = oracle_for(ctx)) {
        check_oracle_domain(*which, *dom);
        const double exact = exact_ball_metric(p, v);
        const bool inside = b.lo <= exact * (1 + 1e-12) && exact <= b.hi * (1 + 1e-9);
        o.header.insert(o.header.end(), {"exact", "contained"});
        row.insert(row.end(), {fmt(exact), inside ? "1" : "0"});
        o.summary["exact"] = exact;
        o.summary["contained"] = inside;
        o.status = inside ? 0 : 1;
    }
    o.rows.push_back(row);
    o.message = "[" + fmt(b.lo) + ", " + fmt(b.hi) + "]";
    return o;
}

Outcome cmd_distance(const Context &ctx)
{
    const DomainPtr dom = ctx.domain();
    DistanceOptions opts;
    opts.tol = ctx.num("tol");
    const BracketEngine engine(dom, opts);
    std::vector<std::pair<RVec, RVec>> pairs;
    const std::size_t random = ctx.count("random-pairs");
    if (random > 0) {
        std::mt19937_64 rng(ctx.seed());
        for (std::size_t k = 0; k < random; ++k) {
            RVec a = random_member(*dom, rng);
            RVec b = random_member(*dom, rng);
            pairs.emplace_back(std::move(a), std::move(b));
        }
    } else {
        pairs.emplace_back(ctx.point("p", *dom), ctx.point("q", *dom));
    }
    const auto which = oracle_for(ctx);
    if (which) {
        check_oracle_domain(*which, *dom);
    }
    std::vector<DistanceBracket> out(pairs.size());
    for_each_index(pairs.size(), Exec::parallel,
                   [&](std::size_t k) { out[k] = engine.distance(pairs[k].first, pairs[k].second); });
    Outcome o;
    o.header = {"p", "q", "lo", "hi", "method_lo", "method_hi"};
    if (which) {
        o.header.insert(o.header.end(), {"exact", "contained"});
    }
    std::size_t misses = 0;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto &b = out[k];
        Row row{join(pairs[k].first), join(pairs[k].second), fmt(b.lo), fmt(b.hi), b.method_lo, b.method_hi};
        if (which) {
            const double exact = exact_oracle(*which, pairs[k].first, pairs[k].second);
            const bool inside = b.lo <= exact + 1e-12 * std::max(1.0, exact) &&
                                exact <= b.hi + 1e-9 * std::max(1.0, exact);
            misses += inside ? 0 : 1;
            row.insert(row.end(), {fmt(exact), inside ? "1" : "0"});
        }
        o.rows.push_back(row);
    }
    o.summary = {{"pairs", pairs.size()}};
    if (pairs.size() == 1) {
        o.summary["bracket"] = bracket_json(out.front());
        o.message = "[" + fmt(out.front().lo) + ", " + fmt(out.front().hi) + "]";
    } else {
        o.message = std::to_string(pairs.size()) + " brackets";
    }
    if (which) {
        o.summary["oracle_misses"] = misses;
        o.status = misses == 0 ? 0 : 1;
        o.message += misses == 0 ? ", oracle contained" : ", oracle missed " + std::to_string(misses) + " times";
    }
    return o;
}

Outcome cmd_gromov(const Context &ctx)
{
    const DomainPtr dom = ctx.domain();
    DistanceOptions opts;
    opts.tol = ctx.num("tol");
    const BracketEngine engine(dom, opts);
    const RVec o_pt = ctx.has("o") ? ctx.point("o", *dom) : dom->interior_point();
    const RVec x = ctx.point("x", *dom);
    const RVec y = ctx.point("y", *dom);
    const DistanceBracket b = engine.gromov(x, y, o_pt);
    Outcome o;
    o.header = {"x", "y", "o", "lo", "hi", "method_lo", "method_hi"};
    o.rows.push_back({join(x), join(y), join(o_pt), fmt(b.lo), fmt(b.hi), b.method_lo, b.method_hi});
    o.summary = {{"lo", b.lo}, {"hi", b.hi}, {"o", o_pt}};
    o.message = "[" + fmt(b.lo) + ", " + fmt(b.hi) + "]";
    return o;
}

Outcome cmd_escape(const Context &ctx)
{
    const DomainPtr dom = ctx.domain();
    const BracketEngine engine(dom);
    const RVec z0 = ctx.has("z0") ? ctx.point("z0", *dom) : dom->interior_point();
    const std::vector<double> depths = ctx.has("depths") ? ctx.vec("depths") : default_escape_depths(*dom);
    const std::size_t directions = ctx.count("directions");
    const EscapeReport rep = escape_constant(engine, z0, directions, depths);
    Outcome o;
    o.header = {"direction", "depth", "delta", "hi", "excess"};
    for (std::size_t k = 0; k < rep.samples.size(); ++k) {
        const auto &s = rep.samples[k];
        o.rows.push_back(
            {std::to_string(k / depths.size()), fmt(s.depth), fmt(s.delta), fmt(s.hi), fmt(s.excess)});
    }
    o.summary = {{"constant", rep.constant}, {"depths", rep.depths}, {"profile", rep.profile}, {"z0", z0}};
    o.message = "C = " + fmt(rep.constant);
    return o;
}

Outcome cmd_almost_geodesic(const Context &ctx)
{
    const DomainPtr dom = ctx.domain();
    const RVec xi = ctx.point("xi", *dom);
    double eps = 0;
    bool certified = false;
    if (ctx.has("eps")) {
        eps = ctx.num("eps");
    } else {
        if (!ctx.has("modulus")) {
            fail(ErrorKind::config, "almost-geodesic needs --eps or a --modulus to certify one");
        }
        eps = certified_ray_scale(*dom, ctx.modulus(), 256, ctx.seed());
        certified = true;
    }
    const NormalRay ray = make_normal_ray(*dom, xi, eps);
    const double T = ctx.num("T");
    const double T_used = std::min(T, max_ray_time(*dom, ray));
    if (!(T_used > 0)) {
        fail(ErrorKind::config, "ray scale eps is too small for any admissible time horizon");
    }
    const auto grid = uniform_time_grid(T_used, ctx.count("points"));
    const BracketEngine engine(dom);
    const AlmostGeodesicReport rep = almost_geodesic_report(engine, ray, grid);
    Outcome o;
    o.header = {"s", "t", "lo", "hi", "defect"};
    for (const auto &p : rep.pairs) {
        o.rows.push_back({fmt(p.s), fmt(p.t), fmt(p.lo), fmt(p.hi), fmt(p.defect)});
    }
    o.summary = {{"classification", rep.pass ? "almost-geodesic" : "not-almost-geodesic"},
                 {"K", rep.K},
                 {"K_additive", rep.K_additive},
                 {"K_lipschitz", rep.K_lipschitz},
                 {"speed_sup", rep.speed_sup},
                 {"lower_gap", rep.lower_gap},
                 {"worst_pair", {{"s", rep.worst.s}, {"t", rep.worst.t}, {"defect", rep.worst.defect}}},
                 {"violations", rep.violations},
                 {"eps", eps},
                 {"eps_certified", certified},
                 {"T_requested", T},
                 {"T_used", T_used}};
    o.message = "K = " + fmt(rep.K) + (rep.pass ? "" : " (violations)");
    o.status = rep.pass ? 0 : 1;
    return o;
}

Outcome cmd_gromov_experiment(const Context &ctx)
{
    const DomainPtr dom = ctx.domain();
    const RVec xi = ctx.point("xi", *dom);
    const RVec xi2 = ctx.has("xi2") ? ctx.point("xi2", *dom) : xi;
    const double eps = ctx.num("eps");
    const std::size_t depth = ctx.count("depth");
    const RVec o_pt = ctx.has("o") ? ctx.point("o", *dom) : dom->interior_point();
    GromovExperimentOptions opts;
    opts.ladder = ctx.vec("ladder");
    opts.cap_factor = ctx.num("cap-factor");
    opts.cap_floor = ctx.num("cap-floor");
    const BoundarySequence p = dyadic_normal_sequence(*dom, xi, eps, depth);
    const BoundarySequence q = dyadic_normal_sequence(*dom, xi2, eps, depth);
    const BracketEngine engine(dom);
    const GromovExperimentReport rep = gromov_boundary_experiment(engine, p, q, o_pt, opts);
    Outcome o;
    o.header = {"nu", "mu", "lo", "hi"};
    std::size_t worst = 0;
    for (std::size_t k = 0; k < rep.products.size(); ++k) {
        const auto &b = rep.products[k];
        o.rows.push_back({std::to_string(k / rep.cols + 1), std::to_string(k % rep.cols + 1), fmt(b.lo), fmt(b.hi)});
        if (b.hi > rep.products[worst].hi) {
            worst = k;
        }
    }
    json crossings = json::array();
    for (const auto &c : rep.crossings) {
        crossings.push_back(c ? json(*c + 1) : json(nullptr));
    }
    o.summary = {{"classification", rep.classification},
                 {"diagonal_lo", rep.diagonal_lo},
                 {"crossings", crossings},
                 {"cap", rep.cap},
                 {"max_hi", rep.max_hi},
                 {"worst_pair", {{"nu", worst / rep.cols + 1}, {"mu", worst % rep.cols + 1}}},
                 {"o", o_pt}};
    o.message = rep.classification;
    if (ctx.has("expect")) {
        const std::string &want = ctx.str("expect");
        if (want != "diverging" && want != "bounded" && want != "unclassified") {
            fail(ErrorKind::config, "--expect must be diverging, bounded or unclassified");
        }
        o.summary["expected"] = want;
        o.status = want == rep.classification ? 0 : 1;
    }
    return o;
}

Outcome cmd_extension_probe(const Context &ctx)
{
    const Isometry F = parse_isometry(ctx.str("map"));
    const RVec xi = ctx.point("xi", *F.source);
    const ExtensionProbeReport rep = boundary_limit_probe(F, xi, ctx.num("eps"), ctx.count("depth"),
                                                          ctx.count("check-depth"), ctx.num("tol"));
    Outcome o;
    o.header = {"tail_start", "diameter"};
    for (std::size_t k = 0; k < rep.diameters.size(); ++k) {
        o.rows.push_back({std::to_string(k + 1), fmt(rep.diameters[k])});
    }
    const bool sane = rep.isometry_gap <= rep.bracket_width + 1e-12;
    o.summary = {{"classification", rep.extends ? "extends" : "no-evidence"},
                 {"extends", rep.extends},
                 {"limit_estimate", rep.limit_estimate},
                 {"check_depth", rep.check_depth},
                 {"diameter_at_check", rep.diameters[rep.check_depth - 1]},
                 {"isometry_gap", rep.isometry_gap},
                 {"bracket_width", rep.bracket_width},
                 {"isometry_sane", sane}};
    o.message = std::string(rep.extends ? "extends" : "no evidence") + ", tail diameter " +
                fmt(rep.diameters[rep.check_depth - 1]);
    o.status = rep.extends && sane ? 0 : 1;
    return o;
}

std::vector<Command> commands()
{
    const OptionSpec domain{"domain", "", "domain literal, e.g. ball:2", true};
    const OptionSpec modulus{"modulus", "", "modulus literal, e.g. log:1", true};
    const OptionSpec seed{"seed", "", "RNG seed (mandatory for sampling experiments)"};
    const OptionSpec oracle{"oracle", "", "closed-form check: disc or ball"};
    return {
        {"dini",
         "Dini integral of a modulus over (0, sigma]",
         {modulus, {"sigma", "", "upper limit", true}, {"tol", "1e-10", "absolute tolerance"}},
         cmd_dini},
        {"model-check",
         "tangent-angle check of the model domain",
         {modulus,
          {"alpha", "", "alpha >= 1", true},
          {"tau", "", "0 < tau < modulus radius", true},
          {"points", "1000", "grid points"},
          {"zeta", "", "optional membership query re,im"}},
         cmd_model_check},
        {"embed-check",
         "select parameters and verify the model-domain embedding at xi",
         {domain,
          modulus,
          seed,
          {"xi", "", "boundary point (default: first boundary sample)"},
          {"radius", "", "neighbourhood radius r (default: per domain)"},
          {"samples", "256", "boundary samples"},
          {"pairs", "1000", "oscillation pairs"},
          {"grid-s", "32", "s grid"},
          {"grid-t", "65", "t grid"}},
         cmd_embed_check},
        {"metric",
         "bracket on the Kobayashi metric",
         {domain, {"point", "", "base point", true}, {"dir", "", "direction", true}, {"tol", "1e-7", "radius tolerance"},
          oracle},
         cmd_metric},
        {"distance",
         "bracket on the Kobayashi distance",
         {domain,
          {"p", "", "first point"},
          {"q", "", "second point"},
          {"random-pairs", "0", "number of random pairs instead of p, q"},
          seed,
          {"tol", "1e-4", "segment integral tolerance"},
          oracle},
         cmd_distance},
        {"gromov",
         "bracket on the Gromov product (x|y)_o",
         {domain, {"x", "", "first point", true}, {"y", "", "second point", true}, {"o", "", "base point"},
          {"tol", "1e-4", "segment integral tolerance"}},
         cmd_gromov},
        {"escape",
         "escape constant sup (k(z0, z) - 1/2 log 1/delta(z))",
         {domain,
          {"z0", "", "base point (default: interior point)"},
          {"directions", "16", "boundary directions"},
          {"depths", "", "comma-separated depths (default: 1e-1 R .. 1e-6 R)"}},
         cmd_escape},
        {"almost-geodesic",
         "almost-geodesic report for the normal ray at xi",
         {domain,
          {"xi", "", "boundary point", true},
          {"eps", "", "ray scale (default: certified from --modulus)"},
          {"modulus", "", "modulus used to certify eps"},
          seed,
          {"T", "8", "time horizon"},
          {"points", "33", "grid points"}},
         cmd_almost_geodesic},
        {"gromov-experiment",
         "Gromov products of dyadic normal sequences",
         {domain,
          {"xi", "", "limit of the first sequence", true},
          {"xi2", "", "limit of the second sequence (default: xi)"},
          {"eps", "1", "sequence scale"},
          {"depth", "12", "sequence length"},
          {"o", "", "base point (default: interior point)"},
          {"ladder", "1,2,3,4", "divergence thresholds"},
          {"cap-factor", "1.5", "boundedness cap factor"},
          {"cap-floor", "0.5", "boundedness cap floor"},
          {"expect", "", "exit 1 unless this classification is reached"}},
         cmd_gromov_experiment},
        {"extension-probe",
         "cluster diameters of F along a normal sequence",
         {{"map", "", "identity:<domain>, disc-aut:<re>,<im>, ball-aut:<coords>, disc-to-ball:<n>", true},
          {"xi", "", "boundary point of the source", true},
          {"eps", "1", "sequence scale"},
          {"depth", "16", "sequence length"},
          {"check-depth", "12", "tail checked against tol"},
          {"tol", "1e-3", "diameter tolerance"}},
         cmd_extension_probe},
    };
}

std::string csv_field(const std::string &s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string q = "\"";
    for (char c : s) {
        q += c == '"' ? std::string("\"\"") : std::string(1, c);
    }
    return q + "\"";
}

void write_file(const std::string &path, const std::string &content)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        fail(ErrorKind::config, "cannot write " + path);
    }
    f << content;
    if (!f) {
        fail(ErrorKind::config, "failed writing " + path);
    }
}

std::string json_value_to_option(const json &v, const std::string &key)
{
    if (v.is_string()) {
        return v.get<std::string>();
    }
    if (v.is_number_integer() || v.is_number_unsigned()) {
        return v.dump();
    }
    if (v.is_number_float()) {
        return fmt(v.get<double>());
    }
    if (v.is_array()) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) {
                fail(ErrorKind::config, "config key '" + key + "' must be a number list");
            }
            s += (i > 0 ? "," : "") + json_value_to_option(v[i], key);
        }
        return s;
    }
    fail(ErrorKind::config, "config key '" + key + "' has an unsupported type");
}

int execute(const Command &cmd, std::map<std::string, std::string> resolved, std::ostream &out, std::ostream &err)
{
    const std::string prefix = resolved.at("out").empty() ? "koba-" + cmd.name : resolved.at("out");
    json config = json::object();
    for (const auto &[k, v] : resolved) {
        config[k] = v;
    }
    config["out"] = prefix;
    json report = {{"command", cmd.name}, {"version", koba::version}, {"config", config}};

    Outcome outcome;
    try {
        outcome = cmd.body(Context(resolved));
    } catch (const ToleranceNotMet &e) {
        report["status"] = "failure";
        report["error"] = {{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}};
        report["summary"] = {{"best_lo", e.lo}, {"best_hi", e.hi}};
        write_file(prefix + ".json", report.dump(2) + "\n");
        err << "koba " << cmd.name << ": " << e.what() << " (best bracket [" << fmt(e.lo) << ", " << fmt(e.hi)
            << "])\n";
        return 1;
    } catch (const Error &e) {
        if (e.kind() == ErrorKind::config || e.kind() == ErrorKind::argument) {
            err << "koba " << cmd.name << ": configuration error: " << e.what() << "\n";
            return 2;
        }
        report["status"] = "failure";
        report["error"] = {{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}};
        write_file(prefix + ".json", report.dump(2) + "\n");
        err << "koba " << cmd.name << ": " << to_string(e.kind()) << ": " << e.what() << "\n";
        return 1;
    }

    if (!outcome.header.empty()) {
        std::ostringstream csv;
        for (std::size_t i = 0; i < outcome.header.size(); ++i) {
            csv << (i > 0 ? "," : "") << csv_field(outcome.header[i]);
        }
        csv << "\n";
        for (const auto &row : outcome.rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                csv << (i > 0 ? "," : "") << csv_field(row[i]);
            }
            csv << "\n";
        }
        write_file(prefix + ".csv", csv.str());
        report["csv"] = prefix + ".csv";
    }
    report["status"] = outcome.status == 0 ? "ok" : "failure";
    report["summary"] = outcome.summary;
    write_file(prefix + ".json", report.dump(2) + "\n");
    out << outcome.message << "\n";
    return outcome.status;
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
    try {
        apply_thread_env();
    } catch (const Error &e) {
        err << "koba: configuration error: " << e.what() << "\n";
        return 2;
    }

    const std::vector<Command> table = commands();
    CLI::App app{"Certified Kobayashi-distance experiments on convex domains", "koba"};
    app.set_version_flag("--version", std::string(koba::version));
    app.require_subcommand(1);
    std::vector<std::map<std::string, std::string>> given(table.size());
    std::vector<CLI::App *> subs;
    for (std::size_t c = 0; c < table.size(); ++c) {
        const Command &cmd = table[c];
        CLI::App *sub = app.add_subcommand(cmd.name, cmd.help);
        auto &store = given[c];
        for (const auto &opt : cmd.options) {
            std::string help = opt.help;
            if (!opt.fallback.empty()) {
                help += " [" + opt.fallback + "]";
            }
            sub->add_option("--" + opt.name, store[opt.name], help);
        }
        sub->add_option("--config", store["config"], "JSON file with option values (flags override it)");
        sub->add_option("--out", store["out"], "output prefix for <prefix>.csv and <prefix>.json [koba-<command>]");
        subs.push_back(sub);
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    for (std::size_t c = 0; c < table.size(); ++c) {
        if (!subs[c]->parsed()) {
            continue;
        }
        const Command &cmd = table[c];
        std::map<std::string, std::string> resolved;
        for (const auto &opt : cmd.options) {
            resolved[opt.name] = opt.fallback;
        }
        resolved["out"] = "";
        try {
            if (subs[c]->count("--config") > 0) {
                const std::string path = given[c]["config"];
                std::ifstream f(path);
                if (!f) {
                    fail(ErrorKind::config, "cannot read config file " + path);
                }
                json file;
                try {
                    file = json::parse(f);
                } catch (const json::exception &e) {
                    fail(ErrorKind::config, "config file " + path + " is not valid JSON: " + e.what());
                }
                if (!file.is_object()) {
                    fail(ErrorKind::config, "config file must hold a JSON object");
                }
                for (const auto &[key, value] : file.items()) {
                    if (!resolved.contains(key)) {
                        fail(ErrorKind::config, "unknown config key '" + key + "' for " + cmd.name);
                    }
                    resolved[key] = json_value_to_option(value, key);
                }
            }
            for (const auto &[key, value] : given[c]) {
                if (key != "config" && subs[c]->count("--" + key) > 0) {
                    resolved[key] = value;
                }
            }
            for (const auto &opt : cmd.options) {
                if (opt.required && resolved[opt.name].empty()) {
                    fail(ErrorKind::config, "missing required option --" + opt.name);
                }
            }
        } catch (const Error &e) {
            err << "koba " << cmd.name << ": configuration error: " << e.what() << "\n";
            return 2;
        }
        try {
            return execute(cmd, std::move(resolved), out, err);
        } catch (const Error &e) {
            err << "koba " << cmd.name << ": " << e.what() << "\n";
            return e.kind() == ErrorKind::config ? 2 : 1;
        } catch (const std::exception &e) {
            err << "koba " << cmd.name << ": " << e.what() << "\n";
            return 1;
        }
    }
    return 2;
}

int run(int argc, const char *const *argv)
{
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) {
        args.emplace_back(argv[i]);
    }
    return run(args, std::cout, std::cerr);
}

} // namespace koba::cli
