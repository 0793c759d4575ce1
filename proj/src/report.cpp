#include "frameopt/report.hpp"

#include "frameopt/errors.hpp"
#include "frameopt/linear_analysis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace frameopt {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr double kVerifyTolerance = 1e-6;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

void verify(const GroundStructure& gs, MethodReport& rep) {
  if (!std::isfinite(rep.compliance)) return;
  Design d{Eigen::Map<const Eigen::VectorXd>(rep.areas.data(), static_cast<Eigen::Index>(rep.areas.size()))};
  const double c = compliance(gs, d).compliance;
  rep.verified = std::abs(c - rep.compliance) <= kVerifyTolerance * std::max(1.0, std::abs(c));
  if (!rep.verified)
    rep.error = "reported compliance " + std::to_string(rep.compliance) + " does not match FEM value " +
                std::to_string(c);
}

void from_local(const LocalResult& r, MethodReport& rep) {
  rep.status = to_string(r.status);
  rep.compliance = r.compliance;
  rep.areas = to_vector(r.design.areas);
  rep.iterations = r.iterations;
}

// JSON has no NaN; missing values are written as null.
ordered_json number_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }
double number_from(const json& v) { return v.is_null() ? kNaN : v.get<double>(); }

std::string fmt(double v) {
  if (!std::isfinite(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s = buf;
  s.erase(s.find_last_not_of('0') + 1);
  if (s.back() == '.') s.pop_back();
  return s == "-0" ? "0" : s;
}

}  // namespace

bool Report::ok() const {
  return std::all_of(methods.begin(), methods.end(), [](const MethodReport& m) {
    return m.error.empty() || m.status == to_string(LocalStatus::kInfeasiblePoint);
  });
}

MethodReport run_method(const GroundStructure& gs, const std::string& method, const MethodSettings& settings) {
  MethodReport rep;
  rep.method = method;
  rep.compliance = kNaN;
  const auto start = std::chrono::steady_clock::now();
  try {
    if (method == "oc") {
      from_local(run_oc(gs, settings.oc), rep);
    } else if (method == "nlp") {
      from_local(run_local_nlp(gs, settings.nlp), rep);
    } else if (method == "nsdp") {
      const NsdpResult r = run_nsdp_local(gs, settings.nsdp);
      from_local(r.local, rep);
      if (r.local.status == LocalStatus::kInfeasiblePoint)
        rep.error = "terminal point violates the LMI or the linear constraints";
    } else if (method == "po") {
      const HierarchyResult h = run_hierarchy(gs, settings.po);
      rep.compliance = h.best_upper;
      rep.areas = to_vector(h.best_design.areas);
      rep.status = h.orders.empty() ? "failed" : to_string(h.orders.back().certificate.verdict);
      for (const OrderReport& o : h.orders) {
        rep.iterations += o.sdp_iterations;
        OrderSummary s;
        s.order = o.certificate.order;
        s.lower = o.certificate.lower;
        s.upper = o.certificate.upper;
        s.gap = o.certificate.gap;
        s.rank_full = o.certificate.rank_full;
        s.rank_reduced = o.certificate.rank_reduced;
        s.verdict = to_string(o.certificate.verdict);
        s.areas = to_vector(o.extracted.areas);
        s.seconds = o.seconds;
        if (!o.error.empty() && rep.error.empty()) rep.error = "order " + std::to_string(s.order) + ": " + o.error;
        rep.orders.push_back(std::move(s));
      }
    } else {
      throw InvalidInput("unknown method '" + method + "'");
    }
    verify(gs, rep);
  } catch (const Error& e) {
    rep.status = "failed";
    rep.error = e.what();
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

Report run_benchmark(const BenchmarkCase& bench, const std::vector<std::string>& methods,
                     const MethodSettings& settings) {
  Report report;
  report.case_name = bench.name;
  MethodSettings s = settings;
  s.po.max_order = std::min(s.po.max_order, std::max(bench.max_order, 1));
  for (const std::string& m : methods) report.methods.push_back(run_method(bench.structure, m, s));
  return report;
}

ordered_json to_json(const Report& report) {
  ordered_json doc;
  doc["case"] = report.case_name;
  doc["methods"] = ordered_json::array();
  for (const MethodReport& m : report.methods) {
    ordered_json jm;
    jm["method"] = m.method;
    jm["status"] = m.status;
    jm["compliance"] = number_or_null(m.compliance);
    jm["areas"] = m.areas;
    jm["seconds"] = m.seconds;
    jm["iterations"] = m.iterations;
    jm["verified"] = m.verified;
    jm["error"] = m.error;
    if (m.method == "po") {
      jm["orders"] = ordered_json::array();
      for (const OrderSummary& o : m.orders)
        jm["orders"].push_back({{"r", o.order},
                                {"c_lower", number_or_null(o.lower)},
                                {"c_upper", number_or_null(o.upper)},
                                {"gap", number_or_null(o.gap)},
                                {"rank_Mr", o.rank_full},
                                {"rank_Mr_minus_d", o.rank_reduced},
                                {"certified", o.verdict == to_string(Verdict::kCertifiedOptimal)},
                                {"verdict", o.verdict},
                                {"extracted_areas", o.areas},
                                {"seconds", o.seconds}});
    }
    doc["methods"].push_back(std::move(jm));
  }
  return doc;
}

Report report_from_json(const json& doc) {
  try {
    Report report;
    report.case_name = doc.at("case").get<std::string>();
    for (const json& jm : doc.at("methods")) {
      MethodReport m;
      m.method = jm.at("method").get<std::string>();
      m.status = jm.at("status").get<std::string>();
      m.compliance = number_from(jm.at("compliance"));
      m.areas = jm.at("areas").get<std::vector<double>>();
      m.seconds = jm.at("seconds").get<double>();
      m.iterations = jm.at("iterations").get<int>();
      m.verified = jm.at("verified").get<bool>();
      m.error = jm.at("error").get<std::string>();
      if (jm.contains("orders")) {
        for (const json& jo : jm.at("orders")) {
          OrderSummary o;
          o.order = jo.at("r").get<int>();
          o.lower = number_from(jo.at("c_lower"));
          o.upper = number_from(jo.at("c_upper"));
          o.gap = number_from(jo.at("gap"));
          o.rank_full = jo.at("rank_Mr").get<int>();
          o.rank_reduced = jo.at("rank_Mr_minus_d").get<int>();
          o.verdict = jo.at("verdict").get<std::string>();
          o.areas = jo.at("extracted_areas").get<std::vector<double>>();
          o.seconds = jo.at("seconds").get<double>();
          m.orders.push_back(std::move(o));
        }
      }
      report.methods.push_back(std::move(m));
    }
    return report;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("report: ") + e.what());
  }
}

std::string to_csv(const Report& report) {
  std::size_t n = 0;
  for (const MethodReport& m : report.methods) n = std::max(n, m.areas.size());
  std::ostringstream out;
  out << "case,method,status,compliance,lower,gap,seconds,verified";
  for (std::size_t i = 0; i < n; ++i) out << ",a" << i + 1;
  out << "\n";
  for (const MethodReport& m : report.methods) {
    double lower = kNaN;
    double gap = kNaN;
    if (!m.orders.empty()) {
      lower = m.orders.back().lower;
      gap = m.compliance - lower;
    }
    out << report.case_name << "," << m.method << "," << m.status << "," << fmt(m.compliance) << ","
        << fmt(lower) << "," << fmt(gap) << "," << fmt(m.seconds) << "," << (m.verified ? "true" : "false");
    for (std::size_t i = 0; i < n; ++i) out << "," << (i < m.areas.size() ? fmt(m.areas[i]) : "");
    out << "\n";
  }
  return out.str();
}

void write_report(const Report& report, const std::string& dir, const std::string& stem) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base = std::filesystem::path(dir) / (stem.empty() ? report.case_name : stem);
  std::ofstream js(base.string() + ".json");
  std::ofstream csv(base.string() + ".csv");
  if (!js || !csv) throw InvalidInput("cannot write report files under '" + dir + "'");
  js << to_json(report).dump(2) << "\n";
  csv << to_csv(report);
}

DesignCertificate certify_design(const GroundStructure& gs, const Design& design, int order,
                                 const HierarchyConfig& config) {
  if (design.areas.size() != gs.num_elements())
    throw InvalidInput("design has " + std::to_string(design.areas.size()) + " areas, structure has " +
                       std::to_string(gs.num_elements()) + " elements");
  if (order < 1) throw InvalidInput("relaxation order must be at least 1");
  validate(gs);
  DesignCertificate out;
  const double volume = gs.lengths().dot(design.areas);
  out.feasible = design.areas.minCoeff() >= 0.0 && volume <= gs.volume_bound() * (1.0 + 1e-9);
  const double upper = out.feasible ? compliance(gs, design).compliance : kNaN;

  const double c_hat = config.c_hat > 0.0 ? config.c_hat : uniform_upper_bound(gs).compliance;
  const ScaledProblem sp = scale_problem(gs, c_hat);
  const Relaxation rel = build_relaxation(sp, order);
  SdpConfig sdp = config.sdp;
  sdp.near_gap_tolerance = std::max(sdp.near_gap_tolerance, config.gap_tol);
  const RelaxationSolution sol = solve_relaxation(rel, sdp);
  out.sdp_status = sol.sdp.status;
  out.certificate = gap_certificate(sol.lower_bound, upper, config.gap_tol);
  out.certificate.order = order;
  const RankReport rank = rank_certificate(rel, sol.y, config.rank_tol);
  out.certificate.rank_full = rank.rank_full;
  out.certificate.rank_reduced = rank.rank_reduced;
  if (sol.sdp.status != SdpStatus::kOptimal && sol.sdp.status != SdpStatus::kNearOptimal)
    out.certificate.verdict = Verdict::kNumericalFailure;
  else if (!out.feasible)
    out.certificate.verdict = Verdict::kBounded;
  return out;
}

std::string topology_svg(const GroundStructure& gs, const Design& design, const RenderOptions& options) {
  if (design.areas.size() != gs.num_elements())
    throw InvalidInput("design has " + std::to_string(design.areas.size()) + " areas, structure has " +
                       std::to_string(gs.num_elements()) + " elements");
  double x0 = std::numeric_limits<double>::infinity();
  double y0 = x0;
  double x1 = -x0;
  double y1 = -x0;
  for (const Node& n : gs.nodes()) {
    x0 = std::min(x0, n.x);
    x1 = std::max(x1, n.x);
    y0 = std::min(y0, n.y);
    y1 = std::max(y1, n.y);
  }
  double extent = std::max(x1 - x0, y1 - y0);
  if (!(extent > 0.0)) extent = 1.0;
  const double margin = 0.05 * extent;
  const double max_area = design.areas.size() ? design.areas.maxCoeff() : 0.0;
  double scale = options.stroke_scale;
  if (!(scale > 0.0)) scale = max_area > 0.0 ? 0.03 * extent / max_area : 1.0;
  const double marker = 0.01 * extent;

  // SVG y grows downwards, so model y is negated.
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << svg_num(x0 - margin) << " "
      << svg_num(-y1 - margin) << " " << svg_num(x1 - x0 + 2 * margin) << " " << svg_num(y1 - y0 + 2 * margin)
      << "\">\n";
  out << "<g stroke=\"black\" stroke-linecap=\"round\">\n";
  for (int i = 0; i < gs.num_elements(); ++i) {
    const double a = design.areas[i];
    if (a <= options.min_area + 1e-12) continue;
    const Element& e = gs.elements()[i];
    const Node& na = gs.nodes()[e.node_a - 1];
    const Node& nb = gs.nodes()[e.node_b - 1];
    out << "<line id=\"e" << e.id << "\" x1=\"" << svg_num(na.x) << "\" y1=\"" << svg_num(-na.y) << "\" x2=\""
        << svg_num(nb.x) << "\" y2=\"" << svg_num(-nb.y) << "\" stroke-width=\"" << svg_num(scale * a)
        << "\"/>\n";
  }
  out << "</g>\n<g fill=\"gray\">\n";
  for (const Node& n : gs.nodes()) {
    const bool supported = std::any_of(gs.supports().begin(), gs.supports().end(), [&](const Support& s) {
      return s.node == n.id && (s.fix_ux || s.fix_uy || s.fix_rz);
    });
    if (supported) {
      out << "<rect id=\"n" << n.id << "\" x=\"" << svg_num(n.x - 1.5 * marker) << "\" y=\""
          << svg_num(-n.y - 1.5 * marker) << "\" width=\"" << svg_num(3 * marker) << "\" height=\""
          << svg_num(3 * marker) << "\"/>\n";
    } else {
      out << "<circle id=\"n" << n.id << "\" cx=\"" << svg_num(n.x) << "\" cy=\"" << svg_num(-n.y) << "\" r=\""
          << svg_num(marker) << "\"/>\n";
    }
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

void render_topology(const GroundStructure& gs, const Design& design, const std::string& path,
                     const RenderOptions& options) {
  const std::string svg = topology_svg(gs, design, options);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write '" + path + "'");
  out << svg;
}

Design parse_areas(const std::string& csv) {
  std::vector<double> values;
  std::stringstream in(csv);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw InvalidInput("bad area value '" + item + "'");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos || !std::isfinite(v) || v < 0.0)
      throw InvalidInput("bad area value '" + item + "'");
    values.push_back(v);
  }
  if (values.empty()) throw InvalidInput("no areas given");
  return Design{Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()))};
}

}  // namespace frameopt
