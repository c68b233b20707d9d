#pragma once

#include "beltrami/boundary.hpp"
#include "beltrami/domain.hpp"
#include "beltrami/flow.hpp"
#include "beltrami/nodal.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace beltrami::report {

using Json = nlohmann::ordered_json;

Json to_json(const Domain& domain);
Domain domain_from_json(const Json& j);

Json to_json(const Classification& c);
Json to_json(const RecurrenceReport& r);
/// Non-finite distances are written as null and read back as +inf.
RecurrenceReport recurrence_from_json(const Json& j);

Json to_json(const ZeroSet& zs);
Json to_json(const BoxCountResult& bc);
Json to_json(const NodalResult& nr);
/// Potential grid values go to CSV; the JSON keeps the grid shape.
Json to_json(const BoundaryReport& br);

/// Fixed top-level layout shared by every command.
struct Envelope {
    std::string field;
    Json domain;
    std::string command;
    Json params = Json::object();
    Json results = Json::object();
    std::vector<std::string> violations;
};

Json to_json(const Envelope& e);
/// Two-space indented JSON with a trailing newline.
std::string dump(const Json& j);

std::string trajectory_csv(const Trajectory& traj);
std::string potential_csv(const PotentialGrid& pg);
std::string box_count_csv(const BoxCountResult& bc);

/// Throws Error("cli::emit_report: ...") if the file cannot be written.
void write_file(const std::string& path, const std::string& contents);

} // namespace beltrami::report
