#include "frameopt/benchmarks.hpp"
#include "frameopt/cli.hpp"
#include "frameopt/errors.hpp"
#include "frameopt/linear_analysis.hpp"
#include "frameopt/problem_io.hpp"
#include "frameopt/report.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace frameopt;

namespace {

const std::string kData = FRAMEOPT_DATA_DIR;

std::string data(const std::string& name) { return kData + "/" + name + ".json"; }

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "frameopt-tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "frameopt");
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

const char* kTwoNodes = R"({
  "nodes": [{"id": 1, "x": 0, "y": 0}, {"id": 2, "x": 1, "y": 0}],
  "elements": [{"id": 1, "nodes": [1, 2], "E": 1, "section": {"type": "square"}}],
  "supports": [{"node": 1, "ux": true, "uy": true, "rz": true}],
  "loads": [{"type": "force", "node": 2, "fy": 1}],
  "volume_bound": 0.1
})";

}  // namespace

TEST(ProblemIo, ShippedCantileverThree) {
  const ProblemFile p = load_problem(data("cantilever-3"));
  EXPECT_EQ(p.structure.num_nodes(), 4);
  EXPECT_EQ(p.structure.num_elements(), 3);
  ASSERT_EQ(p.structure.supports().size(), 1u);
  const Support& s = p.structure.supports()[0];
  EXPECT_EQ(s.node, 1);
  EXPECT_TRUE(s.fix_ux && s.fix_uy && s.fix_rz);
}

TEST(ProblemIo, ShippedTenBeam) {
  const ProblemFile p = load_problem(data("tenbeam"));
  const GroundStructure& gs = p.structure;
  EXPECT_EQ(gs.num_nodes(), 6);
  EXPECT_EQ(gs.num_elements(), 10);
  for (const Node& n : gs.nodes()) {
    EXPECT_TRUE(n.x == 0.0 || n.x == 1.0 || n.x == 2.0);
    EXPECT_TRUE(n.y == 0.0 || n.y == 1.0);
  }
  std::vector<int> clamped;
  for (const Support& s : gs.supports())
    if (s.fix_ux && s.fix_uy && s.fix_rz) clamped.push_back(s.node);
  EXPECT_EQ(clamped, (std::vector<int>{1, 4}));
  for (int i = 0; i < 10; ++i) {
    const double l = gs.lengths()[i];
    EXPECT_TRUE(std::abs(l - 1.0) < 1e-15 || std::abs(l - std::sqrt(2.0)) < 1e-15);
  }
  EXPECT_FALSE(p.notes.empty());
}

TEST(ProblemIo, ShippedFilesMatchBuilders) {
  for (const BenchmarkCase& c : build_benchmarks()) {
    if (c.max_order == 0) continue;
    const ProblemFile p = load_problem(data(c.name));
    EXPECT_EQ(problem_to_json(p.structure), problem_to_json(c.structure)) << c.name;
    const Design u = uniform_design(c.structure);
    EXPECT_EQ(compliance(p.structure, u).compliance, compliance(c.structure, u).compliance) << c.name;
  }
}

TEST(ProblemIo, RoundTripIsLossless) {
  for (const BenchmarkCase& c : build_benchmarks()) {
    const auto doc = problem_to_json(c.structure, c.name, "note");
    const ProblemFile back = parse_problem(doc.dump());
    EXPECT_EQ(back.name, c.name);
    EXPECT_EQ(back.notes, "note");
    EXPECT_EQ(problem_to_json(back.structure, back.name, back.notes), doc) << c.name;
  }
}

TEST(ProblemIo, CustomSectionCoefficientSurvives) {
  std::string text = kTwoNodes;
  text.replace(text.find(R"({"type": "square"})"), 18, R"({"c_I": 0.3})");
  const ProblemFile p = parse_problem(text);
  EXPECT_EQ(p.structure.elements()[0].section.inertia_coefficient, 0.3);
  EXPECT_EQ(problem_to_json(p.structure)["elements"][0]["section"]["c_I"], 0.3);
}

TEST(ProblemIo, DuplicateNodeId) {
  std::string text = kTwoNodes;
  text.replace(text.find(R"("id": 2)"), 7, R"("id": 1)");
  try {
    parse_problem(text);
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("nodes[1].id"), std::string::npos) << e.what();
  }
}

TEST(ProblemIo, SyntaxErrorNamesLine) {
  try {
    parse_problem("{\n  \"nodes\": [\n    {\"id\": 1,, }\n]}");
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(ProblemIo, FieldErrorsNamePath) {
  const std::vector<std::pair<std::string, std::string>> cases{
      {R"("type": "square")", R"("type": "hexagon")"},
      {R"("E": 1)", R"("E": -1)"},
      {R"("nodes": [1, 2])", R"("nodes": [1, 7])"},
      {R"("fy": 1)", R"("fy": "1")"},
      {R"("volume_bound": 0.1)", R"("volume": 0.1)"},
  };
  const std::vector<std::string> paths{"elements[0].section.type", "elements[0].E", "elements[0].nodes",
                                       "loads[0].fy", "document"};
  for (std::size_t k = 0; k < cases.size(); ++k) {
    std::string text = kTwoNodes;
    text.replace(text.find(cases[k].first), cases[k].first.size(), cases[k].second);
    try {
      parse_problem(text);
      ADD_FAILURE() << "accepted case " << k;
    } catch (const SchemaError& e) {
      EXPECT_NE(std::string(e.what()).find(paths[k]), std::string::npos) << e.what();
    }
  }
}

TEST(ProblemIo, MechanismIsReportedOnLoad) {
  std::string text = kTwoNodes;
  text.replace(text.find(R"("rz": true)"), 10, R"("rz": false)");
  const auto dir = scratch("mechanism");
  std::ofstream(dir / "p.json") << text;
  EXPECT_NO_THROW(parse_problem(text));
  EXPECT_THROW(load_problem((dir / "p.json").string()), MechanismError);
}

TEST(Report, MethodsAreVerifiedAgainstFem) {
  const Report r = run_benchmark(benchmark("cantilever-3"), {"oc", "nlp", "nsdp", "po"});
  ASSERT_EQ(r.methods.size(), 4u);
  for (const MethodReport& m : r.methods) {
    EXPECT_TRUE(m.verified) << m.method << ": " << m.error;
    EXPECT_NEAR(m.compliance, 80.30, 0.005 * 80.30) << m.method;
  }
  EXPECT_TRUE(r.ok());
  const MethodReport& po = r.methods[3];
  ASSERT_EQ(po.orders.size(), 2u);
  EXPECT_EQ(po.status, "certified-optimal");
}

TEST(Report, FailuresAreRecorded) {
  const MethodReport m = run_method(cantilever(3), "simplex");
  EXPECT_EQ(m.status, "failed");
  EXPECT_FALSE(m.error.empty());
  EXPECT_TRUE(std::isnan(m.compliance));
}

TEST(Report, JsonRoundTrip) {
  const Report r = run_benchmark(benchmark("cantilever-3"), {"oc", "po"});
  const auto doc = to_json(r);
  const Report back = report_from_json(nlohmann::json::parse(doc.dump()));
  EXPECT_EQ(to_json(back), doc);
  EXPECT_EQ(doc["methods"][1]["orders"][1]["certified"], true);
  EXPECT_EQ(doc["methods"][1]["orders"][0]["r"], 1);
}

TEST(Report, CsvLayout) {
  const Report r = run_benchmark(benchmark("cantilever-3"), {"oc"});
  const std::string csv = to_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "case,method,status,compliance,lower,gap,seconds,verified,a1,a2,a3");
  EXPECT_NE(csv.find("cantilever-3,oc,converged,80.30"), std::string::npos);
}

TEST(Render, DeterministicWithMargin) {
  const GroundStructure gs = ten_beam();
  const Design d = uniform_design(gs);
  const std::string a = topology_svg(gs, d);
  EXPECT_EQ(a, topology_svg(gs, d));
  EXPECT_NE(a.find(R"(viewBox="-0.1 -1.1 2.2 1.2")"), std::string::npos) << a;
  const auto dir = scratch("render");
  render_topology(gs, d, (dir / "a.svg").string());
  render_topology(gs, d, (dir / "b.svg").string());
  EXPECT_EQ(slurp(dir / "a.svg"), slurp(dir / "b.svg"));
}

TEST(Render, MinimalDesignShowsNodesOnly) {
  const GroundStructure gs = ten_beam();
  const std::string svg = topology_svg(gs, {Eigen::VectorXd::Constant(10, 1e-6)});
  EXPECT_EQ(svg.find("<line"), std::string::npos);
  EXPECT_NE(svg.find(R"(id="n6")"), std::string::npos);
}

TEST(Render, StrokeProportionalToArea) {
  RenderOptions o;
  o.stroke_scale = 2.0;
  const std::string svg = topology_svg(cantilever(1), {Eigen::VectorXd::Constant(1, 0.1)}, o);
  EXPECT_NE(svg.find(R"(stroke-width="0.2")"), std::string::npos) << svg;
}

TEST(Render, AbsentMembersAreOmitted) {
  const GroundStructure gs = ten_beam();
  Eigen::VectorXd a(10);
  a << 0.0695, 0.0, 0.1859, 0.0, 0.0425, 0.0, 0.0980, 0.0, 0.0635, 0.0;
  const std::string svg = topology_svg(gs, {a});
  for (int e = 1; e <= 10; ++e) {
    const bool drawn = svg.find("id=\"e" + std::to_string(e) + "\"") != std::string::npos;
    EXPECT_EQ(drawn, e % 2 == 1) << "element " << e;
  }
}

TEST(ParseAreas, RejectsMalformed) {
  EXPECT_EQ(parse_areas("0.1, 0.2,0.3").areas.size(), 3);
  EXPECT_THROW(parse_areas(""), InvalidInput);
  EXPECT_THROW(parse_areas("0.1,x"), InvalidInput);
  EXPECT_THROW(parse_areas("0.1,-0.2"), InvalidInput);
  EXPECT_THROW(parse_areas("0.1,0.2abc"), InvalidInput);
}

TEST(Cli, UnknownFlagIsUsageError) {
  EXPECT_EQ(run_cli({"optimize", data("cantilever-3"), "--method", "oc", "--out", "x", "--frobnicate"}), kExitUsage);
  EXPECT_EQ(run_cli({}), kExitUsage);
  EXPECT_EQ(run_cli({"optimize", data("cantilever-3"), "--method", "simplex", "--out", "x"}), kExitUsage);
}

TEST(Cli, AnalyzeAndVolumeCheck) {
  EXPECT_EQ(run_cli({"analyze", data("cantilever-1"), "--areas", "0.1"}), kExitOk);
  EXPECT_EQ(run_cli({"analyze", data("cantilever-1"), "--areas", "0.2"}), kExitInfeasible);
  EXPECT_EQ(run_cli({"analyze", data("cantilever-1"), "--areas", "0.1,0.1"}), kExitUsage);
}

TEST(Cli, OptimizeCertifiesCantileverThree) {
  const auto dir = scratch("optimize");
  EXPECT_EQ(run_cli({"optimize", data("cantilever-3"), "--method", "po", "--order-max", "2", "--out", dir.string()}),
            kExitOk);
  const auto doc = nlohmann::json::parse(slurp(dir / "cantilever-3-po.json"));
  const auto& po = doc["methods"][0];
  EXPECT_EQ(po["status"], "certified-optimal");
  EXPECT_NEAR(po["compliance"].get<double>(), 80.30, 0.005 * 80.30);
  EXPECT_TRUE(std::filesystem::exists(dir / "cantilever-3-po.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "cantilever-3-po.svg"));
}

TEST(Cli, CertifyGivenDesign) {
  EXPECT_EQ(run_cli({"certify", data("cantilever-3"), "--areas", "0.1417667589,0.1024236118,0.05580962913", "--order",
                     "2"}),
            kExitOk);
  EXPECT_EQ(run_cli({"certify", data("cantilever-3"), "--areas", "0.2,0.2,0.2", "--order", "1"}), kExitInfeasible);
}

TEST(Cli, BenchAndRender) {
  const auto dir = scratch("bench");
  EXPECT_EQ(run_cli({"bench", "--case", "girder", "--methods", "oc,nlp", "--out", dir.string()}), kExitOk);
  EXPECT_TRUE(std::filesystem::exists(dir / "girder.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "summary.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "girder-oc.svg"));
  EXPECT_EQ(run_cli({"render", data("girder"), "--areas", "0.01,0.017,0.022,0.025,0.026", "--out",
                     (dir / "g.svg").string()}),
            kExitOk);
  EXPECT_EQ(run_cli({"bench", "--case", "nowhere", "--out", dir.string()}), kExitUsage);
}
