#include "frameopt/benchmarks.hpp"

#include "frameopt/errors.hpp"

#include <cmath>
#include <numbers>

namespace frameopt {

GroundStructure cantilever(int num_elements) {
  if (num_elements < 1) throw InvalidInput("cantilever needs at least one element");
  std::vector<Node> nodes;
  for (int k = 0; k <= num_elements; ++k)
    nodes.push_back({k + 1, static_cast<double>(k) / num_elements, 0.0});
  std::vector<Element> elements;
  for (int k = 1; k <= num_elements; ++k)
    elements.push_back({k, k, k + 1, 1.0, CrossSectionLaw::square()});
  const double angle = std::numbers::pi / 6.0;
  std::vector<Load> loads{NodalForce{num_elements + 1, std::cos(angle), std::sin(angle)}};
  return GroundStructure(std::move(nodes), std::move(elements), {{1, true, true, true}},
                         std::move(loads), 0.1);
}

GroundStructure ten_beam() {
  std::vector<Node> nodes{{1, 0, 0}, {2, 1, 0}, {3, 2, 0}, {4, 0, 1}, {5, 1, 1}, {6, 2, 1}};
  const int pairs[10][2] = {{1, 2}, {1, 5}, {2, 3}, {2, 4}, {2, 5},
                            {2, 6}, {3, 5}, {3, 6}, {4, 5}, {5, 6}};
  std::vector<Element> elements;
  for (int k = 0; k < 10; ++k)
    elements.push_back({k + 1, pairs[k][0], pairs[k][1], 1.0, CrossSectionLaw::circle()});
  std::vector<Support> supports{{1, true, true, true}, {4, true, true, true}};
  // Both couples act clockwise; only their relative sense affects compliance.
  std::vector<Load> loads{NodalMoment{2, -1.0}, NodalMoment{3, -2.0}};
  return GroundStructure(std::move(nodes), std::move(elements), std::move(supports),
                         std::move(loads), 0.5);
}

GroundStructure girder() {
  std::vector<Node> nodes;
  for (int k = 0; k < 6; ++k) nodes.push_back({k + 1, 2.0 * k, 0.0});
  std::vector<Element> elements;
  for (int k = 1; k <= 5; ++k)
    elements.push_back({k, k, k + 1, 1e4, CrossSectionLaw::i_girder()});
  std::vector<Support> supports{{1, true, true, false}, {6, true, false, true}};
  const LineLoadModel lumped = LineLoadModel::kLumped;
  std::vector<Load> loads{DistributedTransverse{{1, 2, 3, 4, 5}, 1.0, lumped}, SelfWeight{3.0, 1.0, lumped}};
  return GroundStructure(std::move(nodes), std::move(elements), std::move(supports),
                         std::move(loads), 0.2);
}

namespace {

void add_local(BenchmarkCase& c, double compliance, const std::vector<double>& areas) {
  for (const char* m : {"oc", "nlp", "nsdp"}) c.expected[m] = {compliance, areas, std::nullopt};
}

}  // namespace

std::vector<BenchmarkCase> build_benchmarks() {
  std::vector<BenchmarkCase> out;

  BenchmarkCase c1{"cantilever-1", cantilever(1), {}, 1};
  add_local(c1, 107.50, {0.100});
  c1.expected["po1"] = {107.50, {0.100}, 107.50};
  out.push_back(std::move(c1));

  BenchmarkCase c3{"cantilever-3", cantilever(3), {}, 2};
  add_local(c3, 80.30, {0.142, 0.102, 0.056});
  c3.expected["po1"] = {80.72, {0.147, 0.097, 0.056}, 35.81};
  c3.expected["po2"] = {80.30, {0.142, 0.102, 0.056}, 80.30};
  out.push_back(std::move(c3));

  BenchmarkCase c5{"cantilever-5", cantilever(5), {}, 3};
  add_local(c5, 77.19, {0.151, 0.128, 0.103, 0.075, 0.043});
  c5.expected["po1"] = {79.09, {0.151, 0.123, 0.096, 0.073, 0.058}, 24.72};
  c5.expected["po2"] = {77.37, {0.154, 0.131, 0.103, 0.072, 0.040}, 76.34};
  c5.expected["po3"] = {77.19, {0.151, 0.128, 0.103, 0.075, 0.043}, 77.19};
  out.push_back(std::move(c5));

  BenchmarkCase c7{"cantilever-7", cantilever(7), {}, 2};
  add_local(c7, 76.23, {0.155, 0.139, 0.122, 0.104, 0.084, 0.061, 0.036});
  c7.expected["po1"] = {79.81, {0.149, 0.130, 0.112, 0.096, 0.081, 0.069, 0.062}, 20.00};
  c7.expected["po2"] = {77.02, {0.166, 0.145, 0.122, 0.099, 0.077, 0.055, 0.036}, 71.69};
  c7.expected["po3"] = {76.23, {0.155, 0.139, 0.122, 0.104, 0.084, 0.061, 0.036}, 76.23};
  out.push_back(std::move(c7));

  out.push_back({"cantilever-150", cantilever(150), {}, 0});
  out.push_back({"cantilever-300", cantilever(300), {}, 0});

  BenchmarkCase tb{"tenbeam", ten_beam(), {}, 2};
  tb.expected["oc"] = {1042.33, {0.146, 0.0, 0.039, 0.017, 0.000, 0.002, 0.000, 0.212, 0.039, 0.037}, std::nullopt};
  tb.expected["nlp"] = {1042.14, {0.144, 0.0, 0.040, 0.018, 0.000, 0.003, 0.000, 0.210, 0.039, 0.038}, std::nullopt};
  tb.expected["nsdp"] = {1042.20, {0.144, 0.0, 0.040, 0.018, 0.000, 0.003, 0.000, 0.210, 0.039, 0.038}, std::nullopt};
  tb.expected["po1"] = {1429.31, {0.103, 0.0, 0.082, 0.000, 0.029, 0.000, 0.000, 0.121, 0.095, 0.069}, 443.20};
  tb.expected["po2"] = {959.32, {0.070, 0.0, 0.186, 0.000, 0.043, 0.000, 0.098, 0.000, 0.064, 0.000}, 959.31};
  out.push_back(std::move(tb));

  BenchmarkCase gd{"girder", girder(), {}, 3};
  gd.expected["oc"] = {1372.25, {0.010, 0.017, 0.022, 0.025, 0.026}, std::nullopt};
  gd.expected["po1"] = {1456.75, {0.007, 0.015, 0.022, 0.027, 0.029}, 297.34};
  gd.expected["po2"] = {1426.05, {0.007, 0.016, 0.023, 0.026, 0.028}, 1286.44};
  gd.expected["po3"] = {1372.25, {0.010, 0.017, 0.022, 0.025, 0.026}, 1372.25};
  out.push_back(std::move(gd));
  return out;
}

BenchmarkCase benchmark(const std::string& name) {
  for (BenchmarkCase& c : build_benchmarks())
    if (c.name == name) return std::move(c);
  throw InvalidInput("unknown benchmark case '" + name + "'");
}

}  // namespace frameopt
