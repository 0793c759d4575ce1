#pragma once

#include "frameopt/frame_model.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace frameopt {

/// Clamped unit-length cantilever with n_e equal elements, tip force of unit
/// magnitude at 30 degrees above the axis, square sections, E = 1, V = 0.1.
GroundStructure cantilever(int num_elements);

/// Six nodes on a unit grid, ten members, clamps at nodes 1 and 4, couples of
/// 1 and 2 (same sense) at nodes 2 and 3, circular sections, E = 1, V = 0.5.
GroundStructure ten_beam();

/// Half of a span-20 I-girder in five elements: pin at node 1, symmetry at node 6,
/// unit line load plus self-weight rho = 3 (both lumped at the nodes), E = 1e4,
/// c_I = 58/27, V = 0.2.
GroundStructure girder();

/// Reference values for one method on one case.
struct ExpectedResult {
  double compliance = 0.0;
  std::vector<double> areas;  // empty when not tabulated
  std::optional<double> lower_bound;
};

struct BenchmarkCase {
  std::string name;
  GroundStructure structure;
  /// Keys: "oc", "nlp", "nsdp", "po1", "po2", ...
  std::map<std::string, ExpectedResult> expected;
  /// Largest hierarchy order worth running on this case.
  int max_order = 0;
};

/// cantilever-{1,3,5,7,150,300}, tenbeam, girder.
std::vector<BenchmarkCase> build_benchmarks();

/// Looks a case up by name; throws InvalidInput if unknown.
BenchmarkCase benchmark(const std::string& name);

}  // namespace frameopt
