#pragma once

#include "frameopt/frame_model.hpp"

#include <json.hpp>

#include <string>

namespace frameopt {

/// Problem document:
///   {"name": str?, "notes": str?,
///    "nodes": [{"id", "x", "y"}],
///    "elements": [{"id", "nodes": [a, b], "E", "section": {"type": "square"|"circle"|"i_girder"} | {"c_I"}}],
///    "supports": [{"node", "ux", "uy", "rz"}],
///    "loads": [{"type": "force", "node", "fx", "fy"} | {"type": "moment", "node", "m"} |
///              {"type": "distributed", "elements": [...], "q", "lumping"?} |
///              {"type": "self_weight", "rho", "g"?, "lumping"?}],
///    "volume_bound"}
/// "lumping" is "consistent" (default) or "lumped". Moments are counterclockwise positive;
/// line loads act in global -y.
struct ProblemFile {
  std::string name;
  std::string notes;
  GroundStructure structure;
};

/// Parses and checks a problem document. Throws SchemaError naming the offending
/// field (or the line and column of a JSON syntax error).
ProblemFile parse_problem(const std::string& text);

/// Reads a problem file and runs validate() on it; MechanismError propagates.
ProblemFile load_problem(const std::string& path);

nlohmann::ordered_json problem_to_json(const GroundStructure& gs, const std::string& name = {},
                                       const std::string& notes = {});

void save_problem(const std::string& path, const GroundStructure& gs, const std::string& name = {},
                  const std::string& notes = {});

}  // namespace frameopt
