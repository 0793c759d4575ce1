#pragma once

#include "frameopt/benchmarks.hpp"
#include "frameopt/local_solvers.hpp"
#include "frameopt/moment_hierarchy.hpp"
#include "frameopt/nsdp.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace frameopt {

struct MethodSettings {
  OcConfig oc;
  NlpConfig nlp;
  NsdpConfig nsdp;
  HierarchyConfig po;
};

/// One hierarchy order as reported.
struct OrderSummary {
  int order = 0;
  double lower = 0.0;
  double upper = 0.0;
  double gap = 0.0;
  int rank_full = 0;
  int rank_reduced = 0;
  std::string verdict;
  std::vector<double> areas;
  double seconds = 0.0;
};

struct MethodReport {
  std::string method;  // oc | nlp | nsdp | po
  std::string status;  // solver status, "failed" when an exception stopped it
  double compliance = 0.0;  // NaN when no feasible design was produced
  std::vector<double> areas;
  double seconds = 0.0;
  int iterations = 0;
  bool verified = false;  // compliance recomputed by FEM within 1e-6 relative
  std::string error;
  std::vector<OrderSummary> orders;  // po only
};

struct Report {
  std::string case_name;
  std::vector<MethodReport> methods;

  /// False when any method raised or failed re-verification.
  bool ok() const;
};

/// Runs one method on gs. Failures are recorded in the result, never thrown.
MethodReport run_method(const GroundStructure& gs, const std::string& method,
                        const MethodSettings& settings = {});

/// Runs the listed methods in order; the hierarchy stops at the case's max_order.
Report run_benchmark(const BenchmarkCase& bench, const std::vector<std::string>& methods,
                     const MethodSettings& settings = {});

nlohmann::ordered_json to_json(const Report& report);
Report report_from_json(const nlohmann::json& doc);

/// Header: case,method,status,compliance,lower,gap,seconds,verified,a1..an
std::string to_csv(const Report& report);

/// Writes <dir>/<stem>.json and <dir>/<stem>.csv; the stem defaults to the case name.
void write_report(const Report& report, const std::string& dir, const std::string& stem = {});

struct DesignCertificate {
  Certificate certificate;  // upper = FEM compliance of the given design
  SdpStatus sdp_status = SdpStatus::kNumericalFailure;
  bool feasible = false;    // a >= 0 and l^T a <= V (1e-9 relative slack)
};

/// Bounds a given design against the order-r relaxation.
DesignCertificate certify_design(const GroundStructure& gs, const Design& design, int order,
                                 const HierarchyConfig& config = {});

struct RenderOptions {
  double min_area = 1e-6;     // members with a <= min_area + 1e-12 are omitted
  double stroke_scale = 0.0;  // stroke width = stroke_scale * a; 0 picks one from the geometry
};

/// Deterministic SVG of the design: y up, 5% margin, node markers, supports as squares.
std::string topology_svg(const GroundStructure& gs, const Design& design, const RenderOptions& options = {});
void render_topology(const GroundStructure& gs, const Design& design, const std::string& path,
                     const RenderOptions& options = {});

/// Parses "a1,a2,..." into a design; throws InvalidInput on malformed input.
Design parse_areas(const std::string& csv);

}  // namespace frameopt
