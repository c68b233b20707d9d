// Acceptance gate: one [PASS]/[FAIL] line per criterion. Exit status is
// nonzero if any criterion fails.

#include "beltrami/boundary.hpp"
#include "beltrami/calculus.hpp"
#include "beltrami/cli.hpp"
#include "beltrami/exprfield.hpp"
#include "beltrami/field.hpp"
#include "beltrami/flow.hpp"
#include "beltrami/nodal.hpp"
#include "beltrami/parallel.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace beltrami;

namespace {

constexpr double pi = std::numbers::pi;
constexpr std::uint64_t seed = 7;

struct Check {
    bool ok = true;
    std::ostringstream detail;

    void require(bool cond, const std::string& what)
    {
        if (!cond) {
            ok = false;
            detail << " FAILED(" << what << ")";
        }
    }
};

template <class T>
std::string fmt(T v)
{
    std::ostringstream os;
    os.precision(3);
    os << v;
    return os.str();
}

double max_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

void certification(Check& c)
{
    for (const char* name : {"abc:1,0,-1", "abc:1,1,1", "spheromak:1,1"}) {
        const BeltramiField f = catalog_lookup(name);
        const auto pts = f.domain().sample_uniform(1000, seed, "acceptance.certification");
        const FdScheme scheme = FdScheme::for_domain(f.domain());
        std::vector<double> br(pts.size()), cr(pts.size());
        parallel_for(pts.size(), [&](std::size_t i) {
            br[i] = beltrami_residual(f, pts[i], scheme);
            cr[i] = collinearity_residual(f, pts[i], scheme);
        });
        c.detail << ' ' << name << " beltrami=" << fmt(max_of(br)) << " collinearity=" << fmt(max_of(cr));
        c.require(max_of(br) < 1e-6, std::string(name) + " beltrami residual");
        c.require(max_of(cr) < 1e-6, std::string(name) + " collinearity residual");
    }
}

double circle_distance(const Domain& d, const Point3& p)
{
    return std::min(d.displacement(p, Point3(p[0], 0.0, pi / 2)).norm(),
                    d.displacement(p, Point3(p[0], pi, 1.5 * pi)).norm());
}

void zero_geometry(Check& c)
{
    const BeltramiField f = catalog_lookup("abc:1,0,-1");
    ZeroSet zs = find_zeros(f, 64);
    double worst = 0.0;
    for (const auto& r : zs.records)
        worst = std::max(worst, circle_distance(f.domain(), r.location));
    densify_zero_curves(f, zs);
    for (const auto& r : zs.records)
        worst = std::max(worst, circle_distance(f.domain(), r.location));
    const double slope = box_counting_dimension(zs).slope;
    c.detail << " clusters=" << zs.cluster_count << " points=" << zs.records.size()
             << " max_circle_distance=" << fmt(worst) << " slope=" << fmt(slope);
    c.require(zs.cluster_count == 2, "cluster count");
    c.require(worst < 1e-8, "distance to circles");
    c.require(slope >= 0.85 && slope <= 1.15, "box-count slope");
}

void rank_identities(Check& c)
{
    for (const char* name : {"abc:1,0,-1", "abc:1,1,1"}) {
        const BeltramiField f = catalog_lookup(name);
        ZeroSet zs = find_zeros(f, 64);
        annotate_zeros(f, zs);
        int min_rank = 3;
        double sym = 0.0, tr = 0.0;
        std::size_t n = 0;
        for (const auto& r : zs.records) {
            c.require(r.interior && r.rank_data.has_value(), std::string(name) + " rank data");
            if (!r.rank_data)
                continue;
            ++n;
            min_rank = std::min(min_rank, r.rank_data->rank);
            sym = std::max(sym, r.rank_data->symmetry_defect / r.rank_data->norm);
            tr = std::max(tr, r.rank_data->trace / r.rank_data->norm);
        }
        c.detail << ' ' << name << " zeros=" << n << " min_rank=" << min_rank << " symmetry=" << fmt(sym)
                 << " trace=" << fmt(tr);
        c.require(n > 0, std::string(name) + " has zeros");
        c.require(min_rank >= 2, std::string(name) + " rank");
        c.require(sym < 1e-6 && tr < 1e-6, std::string(name) + " symmetry/trace");
    }
}

void nodal_domains(Check& c)
{
    const BeltramiField f = catalog_lookup("abc:1,0,-1");
    const int n64 = count_nodal_domains(f, 64).domains;
    const int n96 = count_nodal_domains(f, 96).domains;
    const int ns = count_nodal_domains(catalog_lookup("spheromak:1,1"), 64).domains;
    const BeltramiField planes =
        make_expression_field(parse_field("sin(z),0,0", Domain::torus_2pi()), "sin(z),0,0");
    const int np = count_nodal_domains(planes, 64).domains;
    c.detail << " abc64=" << n64 << " abc96=" << n96 << " spheromak=" << ns << " control=" << np;
    c.require(n64 == 1 && n96 == 1, "degenerate ABC");
    c.require(ns == 1, "spheromak");
    c.require(np == 2, "control");
}

void boundary_suite(Check& c)
{
    const BeltramiField f = catalog_lookup("spheromak:1,1");
    BoundaryOptions opts;
    opts.traces = 20;
    opts.seed = seed;
    const BoundaryReport br = analyze_boundary(f, opts);
    c.detail << " tangency=" << fmt(br.tangency_defect) << " closedness=" << fmt(br.closedness)
             << " path=" << fmt(br.potential.path_defect) << " cosine=" << fmt(br.cosine_fit.max_residual)
             << " #K=" << br.census.count();
    c.require(br.tangency_defect < 1e-10, "tangency");
    c.require(br.closedness < 1e-8, "closedness");
    c.require(br.potential.path_defect < 1e-8, "path defect");
    c.require(br.cosine_fit.max_residual < 1e-6, "cosine profile");
    c.require(br.census.count() == 2 && br.census.bound_satisfied, "#K");
    std::size_t good = 0;
    for (const auto& t : br.traces) {
        if (t.forward_limit < 0 || t.backward_limit < 0 || !t.potential_increasing)
            continue;
        const double zf = br.census.zeros[static_cast<std::size_t>(t.forward_limit)].cartesian[2];
        const double zb = br.census.zeros[static_cast<std::size_t>(t.backward_limit)].cartesian[2];
        if (std::abs(std::abs(zf) - 1.0) < 1e-9 && std::abs(std::abs(zb) - 1.0) < 1e-9 && zf * zb < 0.0)
            ++good;
    }
    c.detail << " traces=" << good << '/' << br.traces.size();
    c.require(br.traces.size() == 20 && good == 20, "traces");
}

void recurrence(Check& c)
{
    const BeltramiField f = catalog_lookup("abc:1,0,-1");
    const RecurrenceReport a = recurrence_experiment(f, 500, 200.0, 0.2, seed);
    const RecurrenceReport b = recurrence_experiment(f, 500, 400.0, 0.2, seed);
    c.detail << " T200 fwd=" << fmt(a.recurrent_fraction_forward) << " bwd=" << fmt(a.recurrent_fraction_backward)
             << " T400 fwd=" << fmt(b.recurrent_fraction_forward) << " bwd=" << fmt(b.recurrent_fraction_backward);
    c.require(a.recurrent_fraction_forward >= 0.9 && a.recurrent_fraction_backward >= 0.9, "fraction >= 0.9 at T=200");
    c.require(b.recurrent_fraction_forward >= a.recurrent_fraction_forward - 0.02 &&
                  b.recurrent_fraction_backward >= a.recurrent_fraction_backward - 0.02,
              "horizon monotonicity");
}

void flow_quality(Check& c)
{
    for (const char* name : {"abc:1,0,-1", "abc:1,1,1", "spheromak:1,1"}) {
        const BeltramiField f = catalog_lookup(name);
        const auto pts = f.domain().sample_uniform(20, seed, "acceptance.flow");
        const double h = 1e-5 * f.domain().length_scale();
        std::vector<double> vol(pts.size()), rev(pts.size());
        parallel_for(pts.size(), [&](std::size_t i) {
            vol[i] = volume_preservation_check(f, pts[i], 10.0, h, 1e-13);
            rev[i] = time_reversal_defect(f, pts[i], 10.0);
        });
        c.detail << ' ' << name << " volume=" << fmt(max_of(vol)) << " reversal=" << fmt(max_of(rev));
        c.require(max_of(vol) < 1e-4, std::string(name) + " volume");
        c.require(max_of(rev) < 1e-6 * f.scale(), std::string(name) + " reversal");
    }
    const BeltramiField f = catalog_lookup("abc:1,0,-1");
    const auto pts = f.domain().sample_uniform(20, seed, "acceptance.first_integral");
    std::vector<double> drift(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) {
        const Trajectory t = integrate(f, pts[i], 100.0, 1e-10);
        const double h0 = std::sin(pts[i][2]) - std::cos(pts[i][1]);
        for (const auto& p : t.points)
            drift[i] = std::max(drift[i], std::abs(std::sin(p[2]) - std::cos(p[1]) - h0));
    });
    c.detail << " first_integral_drift=" << fmt(max_of(drift));
    c.require(max_of(drift) < 1e-6, "first integral");
}

std::string read_file(const std::filesystem::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void determinism(Check& c)
{
    const auto root = std::filesystem::temp_directory_path() / "beltrami_acceptance";
    std::filesystem::remove_all(root);
    auto run_verify = [&](const std::string& tag, const std::string& threads) {
        const auto dir = root / tag;
        std::ostringstream out, err;
        const int code = cli::run({"verify", "--field", "abc:1,0,-1", "--seed", std::to_string(seed), "--threads",
                                   threads, "--no-timestamp", "--out", dir.string()},
                                  out, err);
        return std::pair<int, std::string>{code, read_file(dir / "verify.json")};
    };
    const auto a = run_verify("a", "0");
    const auto b = run_verify("b", "0");
    const auto t1 = run_verify("t1", "1");
    const auto t4 = run_verify("t4", "4");
    set_thread_count(0);
    c.detail << " bytes=" << a.second.size() << " exit=" << a.first;
    c.require(!a.second.empty() && a.first != cli::exit_usage, "verify ran");
    c.require(a.second == b.second, "repeat run");
    c.require(t1.second == t4.second && t1.second == a.second, "threads 1 vs 4");
    std::filesystem::remove_all(root);
}

} // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<void(Check&)>>> criteria = {
        {"beltrami certification", certification},
        {"zero-set geometry", zero_geometry},
        {"rank identities", rank_identities},
        {"single nodal domain", nodal_domains},
        {"boundary theorem suite", boundary_suite},
        {"recurrence", recurrence},
        {"flow quality", flow_quality},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Check c;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            criteria[i].second(c);
        } catch (const std::exception& e) {
            c.ok = false;
            c.detail << " exception: " << e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] criterion %zu (%s):%s [%.1fs]\n", c.ok ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    c.detail.str().c_str(), secs);
        std::fflush(stdout);
        if (!c.ok)
            ++failed;
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
