#include "beltrami/report.hpp"

#include "beltrami/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace beltrami::report {

namespace {

Json vec(const Vec3& v) { return Json::array({v[0], v[1], v[2]}); }

Vec3 vec_from(const Json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

Json number(double x)
{
    if (!std::isfinite(x))
        return nullptr;
    return x;
}

double number_from(const Json& j)
{
    if (j.is_null())
        return std::numeric_limits<double>::infinity();
    return j.get<double>();
}

std::string fmt(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace

Json to_json(const Domain& domain)
{
    Json j;
    if (domain.is_torus()) {
        j["kind"] = "torus3";
        j["periods"] = vec(domain.periods());
    } else {
        j["kind"] = "ball3";
        j["radius"] = domain.radius();
    }
    return j;
}

Domain domain_from_json(const Json& j)
{
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "torus3")
        return Domain::torus(vec_from(j.at("periods")));
    if (kind == "ball3")
        return Domain::ball(j.at("radius").get<double>());
    throw ParameterError("report::domain_from_json: unknown domain kind '" + kind + "'");
}

Json to_json(const Classification& c)
{
    Json j;
    j["type"] = to_string(c.type);
    j["period"] = c.period;
    return j;
}

Json to_json(const RecurrenceReport& r)
{
    Json j;
    j["n"] = r.n;
    j["horizon"] = r.horizon;
    j["radius"] = r.radius;
    j["seed"] = r.seed;
    j["tol"] = r.tol;
    j["recurrent_fraction_forward"] = r.recurrent_fraction_forward;
    j["recurrent_fraction_backward"] = r.recurrent_fraction_backward;
    Json recs = Json::array();
    for (const auto& rec : r.records) {
        Json x;
        x["start"] = vec(rec.start);
        x["forward_distance"] = number(rec.forward_distance);
        x["forward_time"] = rec.forward_time;
        x["backward_distance"] = number(rec.backward_distance);
        x["backward_time"] = rec.backward_time;
        x["constant"] = rec.constant;
        x["error"] = rec.error;
        recs.push_back(std::move(x));
    }
    j["records"] = std::move(recs);
    return j;
}

RecurrenceReport recurrence_from_json(const Json& j)
{
    RecurrenceReport r;
    r.n = j.at("n").get<std::size_t>();
    r.horizon = j.at("horizon").get<double>();
    r.radius = j.at("radius").get<double>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.tol = j.at("tol").get<double>();
    r.recurrent_fraction_forward = j.at("recurrent_fraction_forward").get<double>();
    r.recurrent_fraction_backward = j.at("recurrent_fraction_backward").get<double>();
    for (const auto& x : j.at("records")) {
        RecurrenceRecord rec;
        rec.start = vec_from(x.at("start"));
        rec.forward_distance = number_from(x.at("forward_distance"));
        rec.forward_time = x.at("forward_time").get<double>();
        rec.backward_distance = number_from(x.at("backward_distance"));
        rec.backward_time = x.at("backward_time").get<double>();
        rec.constant = x.at("constant").get<bool>();
        rec.error = x.at("error").get<std::string>();
        r.records.push_back(std::move(rec));
    }
    return r;
}

Json to_json(const ZeroSet& zs)
{
    Json j;
    j["domain"] = to_json(zs.domain);
    j["cluster_count"] = zs.cluster_count;
    j["cell_size"] = zs.cell_size;
    Json recs = Json::array();
    for (std::size_t i = 0; i < zs.records.size(); ++i) {
        const ZeroRecord& r = zs.records[i];
        Json x;
        x["location"] = vec(r.location);
        x["residual"] = r.residual;
        x["cluster"] = i < zs.cluster_of.size() ? zs.cluster_of[i] : -1;
        x["interior"] = r.interior;
        x["order"] = r.order ? Json(*r.order) : Json(nullptr);
        x["beta"] = Json::array({r.beta[0], r.beta[1], r.beta[2]});
        if (r.rank_data) {
            const RankData& d = *r.rank_data;
            x["rank"] = d.rank;
            x["singular_values"] = vec(d.singular_values);
            x["symmetry_defect"] = d.symmetry_defect;
            x["trace"] = d.trace;
        } else {
            x["rank"] = nullptr;
            x["singular_values"] = nullptr;
        }
        recs.push_back(std::move(x));
    }
    j["records"] = std::move(recs);
    return j;
}

Json to_json(const BoxCountResult& bc)
{
    Json j;
    Json counts = Json::array();
    for (const auto& [size, count] : bc.counts)
        counts.push_back(Json::array({size, count}));
    j["counts"] = std::move(counts);
    j["slope"] = bc.slope;
    Json per = Json::array();
    for (const auto& s : bc.cluster_slopes)
        per.push_back(s ? Json(*s) : Json(nullptr));
    j["cluster_slopes"] = std::move(per);
    return j;
}

Json to_json(const NodalResult& nr)
{
    Json j;
    j["domains"] = nr.domains;
    j["active_cells"] = nr.active_cells;
    j["excluded_cells"] = nr.excluded_cells;
    j["zero_points"] = nr.zero_points;
    j["zero_margin"] = nr.zero_margin;
    return j;
}

Json to_json(const BoundaryReport& br)
{
    Json j;
    j["tangency_defect"] = br.tangency_defect;
    j["closedness_residual"] = br.closedness;
    j["path_defect"] = br.potential.path_defect;
    j["gradient_defect"] = br.gradient_defect;
    j["potential_grid"] = {{"n_theta", br.potential.grid.n_theta},
                           {"n_phi", br.potential.grid.n_phi},
                           {"theta_min", br.potential.grid.theta_min},
                           {"base", Json::array({br.potential.base.theta, br.potential.base.phi})}};
    j["cosine_fit"] = {{"offset", br.cosine_fit.offset},
                       {"coefficient", br.cosine_fit.coefficient},
                       {"max_residual", br.cosine_fit.max_residual}};
    Json zeros = Json::array();
    double worst = 0.0;
    for (const auto& z : br.census.zeros) {
        zeros.push_back({{"theta", z.coords.theta},
                         {"phi", z.coords.phi},
                         {"cartesian", vec(z.cartesian)},
                         {"residual", z.residual}});
        worst = std::max(worst, z.residual);
    }
    j["census"] = {{"count", br.census.count()},
                   {"boundary_components", br.census.boundary_components},
                   {"bound_satisfied", br.census.bound_satisfied},
                   {"zero_fraction", br.census.zero_fraction},
                   {"max_residual", worst},
                   {"zeros", std::move(zeros)}};
    Json traces = Json::array();
    for (const auto& t : br.traces) {
        traces.push_back({{"start", Json::array({t.start.theta, t.start.phi})},
                          {"constant", t.constant},
                          {"forward_limit", t.forward_limit},
                          {"backward_limit", t.backward_limit},
                          {"forward_gap", t.forward_gap},
                          {"backward_gap", t.backward_gap},
                          {"horizon", t.horizon},
                          {"potential_increasing", t.potential_increasing},
                          {"min_potential_increment", t.min_potential_increment},
                          {"min_return_distance", number(t.min_return_distance)}});
    }
    j["traces"] = std::move(traces);
    return j;
}

Json to_json(const Envelope& e)
{
    Json j;
    j["field"] = e.field;
    j["domain"] = e.domain;
    j["command"] = e.command;
    j["params"] = e.params;
    j["results"] = e.results;
    j["violations"] = e.violations;
    return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string trajectory_csv(const Trajectory& traj)
{
    std::string out = "t,x,y,z\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const Point3& p = traj.points[i];
        out += fmt(traj.times[i]) + ',' + fmt(p[0]) + ',' + fmt(p[1]) + ',' + fmt(p[2]) + '\n';
    }
    return out;
}

std::string potential_csv(const PotentialGrid& pg)
{
    std::string out = "theta,phi,f\n";
    for (int i = 0; i < pg.grid.n_theta; ++i)
        for (int k = 0; k < pg.grid.n_phi; ++k)
            out += fmt(pg.grid.theta(i)) + ',' + fmt(pg.grid.phi(k)) + ',' + fmt(pg.at(i, k)) + '\n';
    return out;
}

std::string box_count_csv(const BoxCountResult& bc)
{
    std::string out = "scale,count\n";
    for (const auto& [size, count] : bc.counts)
        out += fmt(size) + ',' + std::to_string(count) + '\n';
    return out;
}

void write_file(const std::string& path, const std::string& contents)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw Error("cli::emit_report: cannot open '" + path + "' for writing");
    f << contents;
    f.close();
    if (!f)
        throw Error("cli::emit_report: failed writing '" + path + "'");
}

} // namespace beltrami::report
