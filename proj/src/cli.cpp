#include "beltrami/cli.hpp"

#include "beltrami/boundary.hpp"
#include "beltrami/calculus.hpp"
#include "beltrami/error.hpp"
#include "beltrami/field.hpp"
#include "beltrami/flow.hpp"
#include "beltrami/nodal.hpp"
#include "beltrami/parallel.hpp"
#include "beltrami/report.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>

namespace beltrami::cli {

namespace {

using report::Json;

struct Config {
    std::string command;
    std::string field;
    std::string domain;
    std::uint64_t seed = 0;
    std::string out = ".";
    std::string format = "json";
    int grid = 64;
    double T = 0.0;
    double eps = 0.0;
    std::size_t samples = 0;
    double tol = 0.0;
    unsigned threads = 0;
    bool no_timestamp = false;
    std::string start;
};

std::vector<double> parse_numbers(const std::string& text, const char* op)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size())
                throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ParameterError(std::string(op) + ": '" + item + "' is not a number");
        }
    }
    return out;
}

Domain parse_domain(const std::string& text)
{
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
    const auto values = rest.empty() ? std::vector<double>{} : parse_numbers(rest, "cli::parse_domain");
    if (kind == "torus") {
        if (values.empty())
            return Domain::torus_2pi();
        if (values.size() == 1)
            return Domain::torus(Vec3::Constant(values[0]));
        if (values.size() == 3)
            return Domain::torus(Vec3(values[0], values[1], values[2]));
    } else if (kind == "ball") {
        if (values.empty())
            return Domain::ball(1.0);
        if (values.size() == 1)
            return Domain::ball(values[0]);
    }
    throw ParameterError("cli::parse_domain: expected torus, torus:L, torus:Lx,Ly,Lz, ball or ball:R, got '" +
                         text + "'");
}

BeltramiField load_field(const Config& cfg)
{
    if (cfg.field.empty())
        throw ParameterError("cli::load_field: --field is required for '" + cfg.command + "'");
    std::optional<Domain> domain;
    if (!cfg.domain.empty())
        domain = parse_domain(cfg.domain);
    BeltramiField field = catalog_lookup(cfg.field, domain);
    if (domain && !(field.domain() == *domain))
        throw IncompatibleDomain("cli::load_field: " + field.name() + " lives on " + field.domain().describe() +
                                 ", not on " + domain->describe());
    return field;
}

bool is_degenerate_abc(const BeltramiField& field) { return field.name() == "abc:1,0,-1"; }
bool is_spheromak(const BeltramiField& field) { return field.name().rfind("spheromak:", 0) == 0; }

std::string timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string num(double x)
{
    std::ostringstream os;
    os.precision(3);
    os << x;
    return os.str();
}

/// Local identities at interior zeros. Appends to `violations` when
/// `enforce` is set.
Json check_zero_identities(const ZeroSet& zs, bool enforce, std::vector<std::string>& violations)
{
    std::size_t checked = 0, undetermined = 0, bad_rank = 0, bad_sym = 0, bad_trace = 0;
    double worst_sym = 0.0, worst_trace = 0.0;
    int min_rank = 3;
    for (const ZeroRecord& r : zs.records) {
        if (!r.order)
            ++undetermined;
        if (!r.rank_data)
            continue;
        const RankData& d = *r.rank_data;
        ++checked;
        min_rank = std::min(min_rank, d.rank);
        if (d.rank < 2)
            ++bad_rank;
        const double rel_sym = d.norm > 0 ? d.symmetry_defect / d.norm : 0.0;
        const double rel_trace = d.norm > 0 ? d.trace / d.norm : 0.0;
        worst_sym = std::max(worst_sym, rel_sym);
        worst_trace = std::max(worst_trace, rel_trace);
        if (rel_sym >= 1e-6)
            ++bad_sym;
        if (rel_trace >= 1e-6)
            ++bad_trace;
    }
    if (enforce) {
        if (bad_rank)
            violations.push_back("nodal::rank_identities_at_zero: " + std::to_string(bad_rank) +
                                 " interior zeros with rank(Dh) < 2");
        if (bad_sym)
            violations.push_back("nodal::rank_identities_at_zero: " + std::to_string(bad_sym) +
                                 " interior zeros with symmetry defect >= 1e-6 |Dh|");
        if (bad_trace)
            violations.push_back("nodal::rank_identities_at_zero: " + std::to_string(bad_trace) +
                                 " interior zeros with |trace Dh| >= 1e-6 |Dh|");
    }
    Json j;
    j["interior_zeros_checked"] = checked;
    j["order_undetermined"] = undetermined;
    j["min_rank"] = checked ? Json(min_rank) : Json(nullptr);
    j["max_relative_symmetry_defect"] = worst_sym;
    j["max_relative_trace"] = worst_trace;
    return j;
}

bool has_zero_curves(const ZeroSet& zs)
{
    return std::any_of(zs.records.begin(), zs.records.end(), [](const ZeroRecord& r) {
        return r.order == 1 && r.rank_data && r.rank_data->rank == 2;
    });
}

Json boundary_checks(const BeltramiField& field, const BoundaryReport& br, std::vector<std::string>& violations)
{
    auto fail = [&](const std::string& what) { violations.push_back("boundary::analyze_boundary: " + what); };
    if (br.tangency_defect >= 1e-10)
        fail("tangency defect " + num(br.tangency_defect) + " >= 1e-10");
    if (br.closedness >= 1e-8)
        fail("closedness residual " + num(br.closedness) + " >= 1e-8");
    const double path = br.potential.path_defect / (field.scale() * field.domain().radius());
    if (path >= 1e-8)
        fail("path defect " + num(path) + " >= 1e-8");
    if (!br.census.bound_satisfied)
        fail("#K = " + std::to_string(br.census.count()) + " < 2N = " +
             std::to_string(2 * br.census.boundary_components));
    std::size_t unresolved = 0, same = 0, not_increasing = 0, off_pole = 0;
    for (const BoundaryTrace& t : br.traces) {
        if (t.constant)
            continue;
        if (t.forward_limit < 0 || t.backward_limit < 0) {
            ++unresolved;
            continue;
        }
        if (t.forward_limit == t.backward_limit)
            ++same;
        if (!t.potential_increasing)
            ++not_increasing;
        for (int idx : {t.forward_limit, t.backward_limit}) {
            const double c = std::cos(br.census.zeros[static_cast<std::size_t>(idx)].coords.theta);
            if (std::abs(std::abs(c) - 1.0) > 1e-6)
                ++off_pole;
        }
    }
    if (unresolved)
        fail(std::to_string(unresolved) + " traces with an unresolved limit point");
    if (same)
        fail(std::to_string(same) + " traces with p+ = p-");
    if (not_increasing)
        fail(std::to_string(not_increasing) + " traces along which f is not strictly increasing");
    if (is_spheromak(field)) {
        if (br.census.count() != 2)
            fail("spheromak boundary has #K = " + std::to_string(br.census.count()) + ", expected 2");
        if (br.cosine_fit.max_residual >= 1e-6)
            fail("potential deviates from a cos(theta) profile by " + num(br.cosine_fit.max_residual));
        if (off_pole)
            fail(std::to_string(off_pole) + " trace limits away from the poles");
    }
    Json j;
    j["relative_path_defect"] = path;
    j["unresolved_traces"] = unresolved;
    j["non_increasing_traces"] = not_increasing;
    return j;
}

double first_integral_drift(const Trajectory& traj)
{
    auto H = [](const Point3& p) { return std::sin(p[2]) - std::cos(p[1]); };
    const double h0 = H(traj.start);
    double worst = 0.0;
    for (const Point3& p : traj.points)
        worst = std::max(worst, std::abs(H(p) - h0));
    return worst;
}

struct Outcome {
    Json results = Json::object();
    std::vector<std::string> violations;
    std::vector<std::pair<std::string, std::string>> csv; // file name, contents
    std::string summary;
};

Json params_for(const Config& cfg, std::initializer_list<const char*> keys)
{
    Json p;
    p["seed"] = cfg.seed;
    for (const std::string k : keys) {
        if (k == "grid")
            p["grid"] = cfg.grid;
        else if (k == "T")
            p["T"] = cfg.T;
        else if (k == "eps")
            p["eps"] = cfg.eps;
        else if (k == "samples")
            p["samples"] = cfg.samples;
        else if (k == "tol")
            p["tol"] = cfg.tol;
        else if (k == "start")
            p["start"] = cfg.start;
    }
    if (!cfg.domain.empty())
        p["domain"] = cfg.domain;
    p["format"] = cfg.format;
    return p;
}

Outcome run_catalog(const Config& cfg)
{
    Outcome o;
    o.results["formats"] = Json::array({"abc:A,B,C", "spheromak:R,B0", "expr:<path>"});
    o.results["examples"] = Json::array({"abc:1,1,1", "abc:1,0,-1", "spheromak:1,1"});
    if (!cfg.field.empty()) {
        const BeltramiField f = load_field(cfg);
        Json d;
        d["name"] = f.name();
        d["domain"] = report::to_json(f.domain());
        d["lambda"] = f.lambda() ? Json(*f.lambda()) : Json(nullptr);
        d["scale"] = f.scale();
        d["tangent_to_boundary"] = f.tangent_to_boundary();
        o.results["field"] = std::move(d);
        o.summary = f.name() + " on " + f.domain().describe();
    } else {
        o.summary = "3 field formats";
    }
    return o;
}

Outcome run_trace(const Config& cfg, const BeltramiField& field)
{
    Outcome o;
    Point3 p0;
    if (cfg.start.empty()) {
        p0 = field.domain().sample_uniform(1, cfg.seed, "cli.trace.start")[0];
    } else {
        const auto v = parse_numbers(cfg.start, "cli::trace");
        if (v.size() != 3)
            throw ParameterError("cli::trace: --start needs x,y,z");
        p0 = Point3(v[0], v[1], v[2]);
    }
    Trajectory traj = integrate(field, p0, cfg.T, cfg.tol);
    traj.classification = classify(traj, cfg.eps, 1.0);
    auto& r = o.results;
    r["start"] = Json::array({traj.start[0], traj.start[1], traj.start[2]});
    r["t_end"] = traj.t_end;
    r["end"] = Json::array({traj.end()[0], traj.end()[1], traj.end()[2]});
    const Point3& le = traj.lifted_end();
    r["lifted_end"] = Json::array({le[0], le[1], le[2]});
    r["samples"] = traj.size();
    r["steps"] = traj.stats.steps;
    r["rejected_steps"] = traj.stats.rejected;
    r["constant"] = traj.constant;
    r["classification"] = report::to_json(traj.classification);
    if (is_degenerate_abc(field))
        r["first_integral_drift"] = first_integral_drift(traj);
    if (cfg.format == "csv")
        o.csv.emplace_back("trace.csv", report::trajectory_csv(traj));
    o.summary = to_string(traj.classification.type) + " after " + std::to_string(traj.size()) + " samples";
    return o;
}

Outcome run_zeros(const Config& cfg, const BeltramiField& field)
{
    Outcome o;
    ZeroSet zs = find_zeros(field, cfg.grid, cfg.tol);
    annotate_zeros(field, zs);
    o.results["zero_set"] = report::to_json(zs);
    o.results["identities"] = check_zero_identities(zs, field.lambda().has_value(), o.violations);
    o.summary = std::to_string(zs.records.size()) + " zeros in " + std::to_string(zs.cluster_count) + " clusters";
    return o;
}

Outcome run_dimension(const Config& cfg, const BeltramiField& field)
{
    Outcome o;
    ZeroSet zs = find_zeros(field, cfg.grid, cfg.tol);
    densify_zero_curves(field, zs, 0.0, cfg.tol);
    o.results["zero_points"] = zs.records.size();
    o.results["cluster_count"] = zs.cluster_count;
    if (zs.records.empty()) {
        o.results["box_count"] = nullptr;
        o.summary = "no zeros";
        return o;
    }
    try {
        const BoxCountResult bc = box_counting_dimension(zs);
        o.results["box_count"] = report::to_json(bc);
        if (field.lambda() && bc.slope > 1.15)
            o.violations.push_back("nodal::box_counting_dimension: slope " + num(bc.slope) + " exceeds 1.15");
        if (cfg.format == "csv")
            o.csv.emplace_back("box_counts.csv", report::box_count_csv(bc));
        o.summary = "box-count slope " + num(bc.slope);
    } catch (const InsufficientData& e) {
        o.results["box_count"] = nullptr;
        o.results["note"] = e.what();
        o.summary = "too few zeros for a slope";
    }
    return o;
}

Outcome run_nodal(const Config& cfg, const BeltramiField& field)
{
    Outcome o;
    const NodalResult nr = count_nodal_domains(field, cfg.grid);
    o.results["nodal"] = report::to_json(nr);
    if (field.lambda() && *field.lambda() != 0.0 && nr.domains != 1)
        o.violations.push_back("nodal::count_nodal_domains: " + std::to_string(nr.domains) +
                               " nodal domains, expected 1");
    o.summary = std::to_string(nr.domains) + " nodal domains";
    return o;
}

BoundaryOptions boundary_options(const Config& cfg)
{
    BoundaryOptions opts;
    opts.grid.n_theta = cfg.grid;
    opts.grid.n_phi = 2 * cfg.grid;
    opts.traces = cfg.samples;
    opts.horizon = cfg.T;
    opts.seed = cfg.seed;
    return opts;
}

Outcome run_boundary(const Config& cfg, const BeltramiField& field)
{
    Outcome o;
    if (!field.domain().is_ball())
        throw IncompatibleDomain("boundary::analyze_boundary: " + field.name() + " does not live on the ball");
    const BoundaryReport br = analyze_boundary(field, boundary_options(cfg));
    o.results["boundary"] = report::to_json(br);
    o.results["checks"] = boundary_checks(field, br, o.violations);
    if (cfg.format == "csv")
        o.csv.emplace_back("potential.csv", report::potential_csv(br.potential));
    o.summary = "#K = " + std::to_string(br.census.count()) + ", path defect " + num(br.potential.path_defect);
    return o;
}

Outcome run_recurrence(const Config& cfg, const BeltramiField& field)
{
    Outcome o;
    const RecurrenceReport rr = recurrence_experiment(field, cfg.samples, cfg.T, cfg.eps, cfg.seed, cfg.tol);
    o.results["recurrence"] = report::to_json(rr);
    const auto failed = std::count_if(rr.records.begin(), rr.records.end(),
                                      [](const RecurrenceRecord& r) { return !r.error.empty(); });
    if (failed)
        o.violations.push_back("flow::recurrence_experiment: " + std::to_string(failed) +
                               " trajectories failed to integrate");
    o.summary = "recurrent fractions " + num(rr.recurrent_fraction_forward) + " forward, " +
                num(rr.recurrent_fraction_backward) + " backward";
    return o;
}

struct Criterion {
    Criterion(int id_, std::string name_) : id(id_), name(std::move(name_)) {}

    int id;
    std::string name;
    std::string status = "pass";
    Json metrics = Json::object();
    std::vector<std::string> failures;

    void fail(const std::string& what)
    {
        status = "fail";
        failures.push_back(what);
    }
    void skip(const std::string& why)
    {
        status = "skipped";
        metrics["reason"] = why;
    }
};

Outcome run_verify(const Config& cfg, const BeltramiField& field)
{
    const Domain& domain = field.domain();
    const double L = domain.length_scale();
    std::vector<Criterion> crit;

    // 1. pointwise Beltrami certification
    Criterion c1{1, "beltrami certification"};
    {
        const auto pts = domain.sample_uniform(1000, cfg.seed, "verify.certification");
        const FdScheme scheme = FdScheme::for_domain(domain);
        std::vector<double> br(pts.size()), cr(pts.size());
        parallel_for(pts.size(), [&](std::size_t i) {
            br[i] = beltrami_residual(field, pts[i], scheme);
            cr[i] = collinearity_residual(field, pts[i], scheme);
        });
        const double bmax = *std::max_element(br.begin(), br.end());
        const double cmax = *std::max_element(cr.begin(), cr.end());
        c1.metrics["points"] = pts.size();
        c1.metrics["max_beltrami_residual"] = bmax;
        c1.metrics["max_collinearity_residual"] = cmax;
        if (bmax >= 1e-6)
            c1.fail("calculus::beltrami_residual: max " + num(bmax) + " >= 1e-6");
        if (cmax >= 1e-6)
            c1.fail("calculus::collinearity_residual: max " + num(cmax) + " >= 1e-6");
    }
    const bool certified = c1.status == "pass";
    crit.push_back(c1);

    // 2 and 3. zero set geometry and local identities
    Criterion c2{2, "zero-set geometry"};
    Criterion c3{3, "rank identities"};
    {
        ZeroSet zs = find_zeros(field, cfg.grid);
        annotate_zeros(field, zs);
        c2.metrics["zeros"] = zs.records.size();
        c2.metrics["clusters"] = zs.cluster_count;
        std::vector<std::string> v;
        c3.metrics = check_zero_identities(zs, true, v);
        for (const auto& s : v)
            c3.fail(s);
        if (c3.metrics["interior_zeros_checked"].get<std::size_t>() == 0)
            c3.skip("no interior zeros");

        const bool curves = has_zero_curves(zs);
        densify_zero_curves(field, zs);
        c2.metrics["densified_points"] = zs.records.size();
        c2.metrics["zero_curves"] = curves;
        std::optional<double> slope;
        if (!zs.records.empty()) {
            try {
                slope = box_counting_dimension(zs).slope;
            } catch (const InsufficientData&) {
            }
        }
        c2.metrics["box_count_slope"] = slope ? Json(*slope) : Json(nullptr);
        if (slope && *slope > 1.15)
            c2.fail("nodal::box_counting_dimension: slope " + num(*slope) + " > 1.15");
        if (curves && (!slope || *slope < 0.85))
            c2.fail("nodal::box_counting_dimension: zero curves present but slope is " +
                    (slope ? num(*slope) : std::string("undetermined")));
        if (is_degenerate_abc(field)) {
            // analytic zero set: circles y = 0, z = pi/2 and y = pi, z = 3 pi/2
            const double pi = std::numbers::pi;
            double worst = 0.0;
            for (const ZeroRecord& r : zs.records) {
                double best = std::numeric_limits<double>::infinity();
                for (const Vec2& c : {Vec2(0.0, pi / 2), Vec2(pi, 1.5 * pi)}) {
                    const Vec3 d = domain.displacement(r.location, Point3(r.location[0], c[0], c[1]));
                    best = std::min(best, d.norm());
                }
                worst = std::max(worst, best);
            }
            c2.metrics["max_circle_distance"] = worst;
            if (zs.cluster_count != 2)
                c2.fail("nodal::find_zeros: " + std::to_string(zs.cluster_count) + " clusters, expected 2");
            if (worst >= 1e-8)
                c2.fail("nodal::find_zeros: zero " + num(worst) + " away from the analytic circles");
        }
    }
    crit.push_back(c2);
    crit.push_back(c3);

    // 4. single nodal domain
    Criterion c4{4, "single nodal domain"};
    if (!certified) {
        c4.skip("field is not certified Beltrami");
    } else {
        const NodalResult nr = count_nodal_domains(field, cfg.grid);
        c4.metrics = report::to_json(nr);
        if (nr.domains != 1)
            c4.fail("nodal::count_nodal_domains: " + std::to_string(nr.domains) + " domains, expected 1");
    }
    crit.push_back(c4);

    // 5. boundary theorem suite
    Criterion c5{5, "boundary theorem suite"};
    if (!domain.is_ball()) {
        c5.skip("domain has no boundary");
    } else if (!field.tangent_to_boundary()) {
        c5.skip("field is not tangent to the boundary");
    } else {
        Config bc = cfg;
        bc.samples = 20;
        bc.T = 60.0;
        const BoundaryReport br = analyze_boundary(field, boundary_options(bc));
        std::vector<std::string> v;
        c5.metrics = boundary_checks(field, br, v);
        c5.metrics["tangency_defect"] = br.tangency_defect;
        c5.metrics["closedness_residual"] = br.closedness;
        c5.metrics["zeros"] = br.census.count();
        c5.metrics["cosine_fit_residual"] = br.cosine_fit.max_residual;
        for (const auto& s : v)
            c5.fail(s);
    }
    crit.push_back(c5);

    // 6. recurrence
    Criterion c6{6, "recurrence"};
    if (!is_degenerate_abc(field)) {
        c6.skip("recurrence thresholds are calibrated for abc:1,0,-1 only");
    } else {
        const auto r1 = recurrence_experiment(field, cfg.samples, cfg.T, cfg.eps, cfg.seed);
        const auto r2 = recurrence_experiment(field, cfg.samples, 2.0 * cfg.T, cfg.eps, cfg.seed);
        c6.metrics["samples"] = cfg.samples;
        c6.metrics["forward"] = r1.recurrent_fraction_forward;
        c6.metrics["backward"] = r1.recurrent_fraction_backward;
        c6.metrics["forward_2T"] = r2.recurrent_fraction_forward;
        c6.metrics["backward_2T"] = r2.recurrent_fraction_backward;
        if (r1.recurrent_fraction_forward < 0.9 || r1.recurrent_fraction_backward < 0.9)
            c6.fail("flow::recurrence_experiment: recurrent fraction below 0.9 at T = " + num(cfg.T));
        if (r2.recurrent_fraction_forward < r1.recurrent_fraction_forward - 0.02 ||
            r2.recurrent_fraction_backward < r1.recurrent_fraction_backward - 0.02)
            c6.fail("flow::recurrence_experiment: recurrent fraction drops when the horizon doubles");
    }
    crit.push_back(c6);

    // 7. flow quality
    Criterion c7{7, "flow quality"};
    {
        const auto pts = domain.sample_uniform(20, cfg.seed, "verify.flow");
        std::vector<double> vol(pts.size()), rev(pts.size()), drift(pts.size(), 0.0);
        const bool degenerate = is_degenerate_abc(field);
        parallel_for(pts.size(), [&](std::size_t i) {
            // h^2 truncation dominates for stretching orbits, so use a small step
            // with a tight integration tolerance
            vol[i] = volume_preservation_check(field, pts[i], 10.0, 1e-5 * L, 1e-13);
            rev[i] = time_reversal_defect(field, pts[i], 10.0);
            if (degenerate)
                drift[i] = first_integral_drift(integrate(field, pts[i], 100.0, 1e-10));
        });
        const double vmax = *std::max_element(vol.begin(), vol.end());
        const double rmax = *std::max_element(rev.begin(), rev.end());
        c7.metrics["max_volume_defect"] = vmax;
        c7.metrics["max_time_reversal_defect"] = rmax;
        if (vmax >= 1e-4)
            c7.fail("flow::volume_preservation_check: defect " + num(vmax) + " >= 1e-4");
        if (rmax >= 1e-6 * field.scale())
            c7.fail("flow::time_reversal_defect: defect " + num(rmax) + " >= 1e-6 scale");
        if (degenerate) {
            const double dmax = *std::max_element(drift.begin(), drift.end());
            c7.metrics["max_first_integral_drift"] = dmax;
            if (dmax >= 1e-6)
                c7.fail("flow::integrate: first integral drifts by " + num(dmax));
        }
    }
    crit.push_back(c7);

    Outcome o;
    Json list = Json::array();
    int passed = 0, failed = 0;
    for (const Criterion& c : crit) {
        list.push_back({{"id", c.id}, {"name", c.name}, {"status", c.status}, {"metrics", c.metrics},
                        {"failures", c.failures}});
        if (c.status == "pass")
            ++passed;
        if (c.status == "fail")
            ++failed;
        for (const auto& f : c.failures)
            o.violations.push_back("criterion " + std::to_string(c.id) + " (" + c.name + "): " + f);
    }
    o.results["criteria"] = std::move(list);
    o.summary = std::to_string(passed) + " passed, " + std::to_string(failed) + " failed, " +
                std::to_string(crit.size() - passed - failed) + " skipped";
    return o;
}

void add_common(CLI::App* sub, Config& cfg, bool field_required)
{
    auto* f = sub->add_option("--field", cfg.field, "abc:A,B,C | spheromak:R,B0 | expr:<path>");
    if (field_required)
        f->required();
    sub->add_option("--domain", cfg.domain, "torus, torus:L, torus:Lx,Ly,Lz, ball or ball:R");
    sub->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    sub->add_option("--out", cfg.out, "output directory")->capture_default_str();
    sub->add_option("--format", cfg.format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    sub->add_option("--threads", cfg.threads, "worker threads (0: all cores)")->capture_default_str();
    sub->add_flag("--no-timestamp", cfg.no_timestamp, "omit the timestamp from reports");
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    // one config per subcommand so per-command defaults do not overwrite each other
    std::map<std::string, Config> configs;
    CLI::App app{"Numerical laboratory for Beltrami fields", "beltrami"};
    app.require_subcommand(1);

    auto* catalog = app.add_subcommand("catalog", "list field formats or describe a field");
    add_common(catalog, configs["catalog"], false);

    auto* trace = app.add_subcommand("trace", "integrate one field line");
    add_common(trace, configs["trace"], true);
    trace->add_option("--T", configs["trace"].T, "horizon")->default_val(100.0);
    trace->add_option("--eps", configs["trace"].eps, "return radius for classification")->default_val(0.05);
    trace->add_option("--tol", configs["trace"].tol, "relative step tolerance")->default_val(1e-10);
    trace->add_option("--start", configs["trace"].start, "x,y,z (default: random point)");

    auto* zeros = app.add_subcommand("zeros", "locate zeros and check local identities");
    add_common(zeros, configs["zeros"], true);
    zeros->add_option("--grid", configs["zeros"].grid, "seeding grid per axis")->default_val(64);
    zeros->add_option("--tol", configs["zeros"].tol, "refinement tolerance relative to scale")->default_val(1e-12);

    auto* dimension = app.add_subcommand("dimension", "box-counting dimension of the zero set");
    add_common(dimension, configs["dimension"], true);
    dimension->add_option("--grid", configs["dimension"].grid, "seeding grid per axis")->default_val(64);
    dimension->add_option("--tol", configs["dimension"].tol, "refinement tolerance relative to scale")->default_val(1e-12);

    auto* nodal = app.add_subcommand("nodal", "count connected components of the zero-set complement");
    add_common(nodal, configs["nodal"], true);
    nodal->add_option("--grid", configs["nodal"].grid, "cells per axis")->default_val(64);

    auto* boundary = app.add_subcommand("boundary", "boundary sphere analysis of a ball field");
    add_common(boundary, configs["boundary"], true);
    boundary->add_option("--grid", configs["boundary"].grid, "theta samples (phi uses twice as many)")->default_val(64);
    boundary->add_option("--samples", configs["boundary"].samples, "boundary field lines to trace")->default_val(20);
    boundary->add_option("--T", configs["boundary"].T, "trace horizon")->default_val(60.0);

    auto* recurrence = app.add_subcommand("recurrence", "Monte-Carlo recurrence experiment");
    add_common(recurrence, configs["recurrence"], true);
    recurrence->add_option("--samples", configs["recurrence"].samples, "starting points")->default_val(500);
    recurrence->add_option("--T", configs["recurrence"].T, "horizon")->default_val(200.0);
    recurrence->add_option("--eps", configs["recurrence"].eps, "return radius")->default_val(0.2);
    recurrence->add_option("--tol", configs["recurrence"].tol, "relative step tolerance")->default_val(1e-9);

    auto* verify = app.add_subcommand("verify", "run every acceptance check relevant to the field");
    add_common(verify, configs["verify"], true);
    verify->add_option("--grid", configs["verify"].grid, "zero and nodal grid per axis")->default_val(64);
    verify->add_option("--samples", configs["verify"].samples, "recurrence starting points")->default_val(500);
    verify->add_option("--T", configs["verify"].T, "recurrence horizon")->default_val(200.0);
    verify->add_option("--eps", configs["verify"].eps, "recurrence radius")->default_val(0.2);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    CLI::App* sub = app.get_subcommands().front();
    Config& cfg = configs[sub->get_name()];
    cfg.command = sub->get_name();

    try {
        set_thread_count(cfg.threads);
        Outcome o;
        Json params;
        std::optional<BeltramiField> field;
        if (cfg.command == "catalog") {
            if (!cfg.field.empty())
                field = load_field(cfg);
            o = run_catalog(cfg);
            params = params_for(cfg, {});
        } else {
            field = load_field(cfg);
            if (cfg.command == "trace") {
                o = run_trace(cfg, *field);
                params = params_for(cfg, {"T", "eps", "tol", "start"});
            } else if (cfg.command == "zeros") {
                o = run_zeros(cfg, *field);
                params = params_for(cfg, {"grid", "tol"});
            } else if (cfg.command == "dimension") {
                o = run_dimension(cfg, *field);
                params = params_for(cfg, {"grid", "tol"});
            } else if (cfg.command == "nodal") {
                o = run_nodal(cfg, *field);
                params = params_for(cfg, {"grid"});
            } else if (cfg.command == "boundary") {
                o = run_boundary(cfg, *field);
                params = params_for(cfg, {"grid", "samples", "T"});
            } else if (cfg.command == "recurrence") {
                o = run_recurrence(cfg, *field);
                params = params_for(cfg, {"samples", "T", "eps", "tol"});
            } else {
                o = run_verify(cfg, *field);
                params = params_for(cfg, {"grid", "samples", "T", "eps"});
            }
        }
        if (!cfg.no_timestamp)
            params["timestamp"] = timestamp();

        report::Envelope env;
        env.field = field ? field->name() : cfg.field;
        env.domain = field ? report::to_json(field->domain()) : Json(nullptr);
        env.command = cfg.command;
        env.params = std::move(params);
        env.results = std::move(o.results);
        env.violations = o.violations;

        std::error_code ec;
        std::filesystem::create_directories(cfg.out, ec);
        if (ec)
            throw Error("cli::emit_report: cannot create output directory '" + cfg.out + "': " + ec.message());
        const std::filesystem::path dir(cfg.out);
        const std::string json_path = (dir / (cfg.command + ".json")).string();
        report::write_file(json_path, report::dump(report::to_json(env)));
        for (const auto& [name, contents] : o.csv)
            report::write_file((dir / name).string(), contents);

        out << cfg.command << ' ' << (env.field.empty() ? "-" : env.field) << ": " << o.summary << "; "
            << o.violations.size() << " violations -> " << json_path << '\n';
        for (const auto& v : o.violations)
            err << "violation: " << v << '\n';
        return o.violations.empty() ? exit_ok : exit_violation;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        err << "error: cli::" << cfg.command << ": " << e.what() << '\n';
        return exit_usage;
    }
}

int run(int argc, const char* const* argv)
{
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i)
        args.emplace_back(argv[i]);
    return run(args, std::cout, std::cerr);
}

} // namespace beltrami::cli
