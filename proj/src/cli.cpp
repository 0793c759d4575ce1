#include "frameopt/cli.hpp"

#include "frameopt/benchmarks.hpp"
#include "frameopt/errors.hpp"
#include "frameopt/linear_analysis.hpp"
#include "frameopt/problem_io.hpp"
#include "frameopt/report.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace frameopt {

namespace {

std::vector<std::string> split(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream in(list);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  char buf[64];
  if (v.size() > 12) {
    std::snprintf(buf, sizeof buf, "%.6g ... %.6g (%zu values)", v.front(), v.back(), v.size());
    return buf;
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.6g", i ? " " : "", v[i]);
    s += buf;
  }
  return s;
}

std::string problem_name(const ProblemFile& p, const std::string& path) {
  return p.name.empty() ? std::filesystem::path(path).stem().string() : p.name;
}

Design design_for(const GroundStructure& gs, const std::string& areas) {
  Design d = parse_areas(areas);
  if (d.areas.size() != gs.num_elements())
    throw InvalidInput("expected " + std::to_string(gs.num_elements()) + " areas, got " +
                       std::to_string(d.areas.size()));
  return d;
}

void print_method(const MethodReport& m) {
  std::printf("%-5s %-18s c = %-12.6g t = %.3fs  a = [%s]\n", m.method.c_str(), m.status.c_str(), m.compliance,
              m.seconds, join(m.areas).c_str());
  for (const OrderSummary& o : m.orders)
    std::printf("      r=%d  lower %.6g  upper %.6g  gap %.3g  rank %d/%d  %s  (%.2fs)\n", o.order, o.lower,
                o.upper, o.gap, o.rank_full, o.rank_reduced, o.verdict.c_str(), o.seconds);
  if (!m.error.empty()) std::printf("      note: %s\n", m.error.c_str());
}

int exit_code(const Report& report) {
  bool numerical = false;
  bool infeasible = false;
  for (const MethodReport& m : report.methods) {
    if (m.status == to_string(LocalStatus::kInfeasiblePoint)) infeasible = true;
    else if (m.status == "failed" || m.status == to_string(Verdict::kNumericalFailure) || !m.verified)
      numerical = true;
  }
  return numerical ? kExitNumerical : infeasible ? kExitInfeasible : kExitOk;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Frame sizing and topology optimization with global certificates", "frameopt"};
  app.require_subcommand(1);

  std::string file;
  std::string areas;
  std::string out;

  CLI::App* analyze = app.add_subcommand("analyze", "Compliance of a given design");
  analyze->add_option("file", file, "Problem file")->required()->check(CLI::ExistingFile);
  analyze->add_option("--areas", areas, "Comma-separated element areas")->required();

  std::string method;
  MethodSettings settings;
  int order_max = settings.po.max_order;
  CLI::App* optimize = app.add_subcommand("optimize", "Run one optimization method");
  optimize->add_option("file", file, "Problem file")->required()->check(CLI::ExistingFile);
  optimize->add_option("--method", method, "oc | nlp | nsdp | po")
      ->required()
      ->check(CLI::IsMember({"oc", "nlp", "nsdp", "po"}));
  optimize->add_option("--order-max", order_max, "Highest hierarchy order")->check(CLI::PositiveNumber);
  optimize->add_option("--eps", settings.oc.min_area, "Lower area bound epsilon");
  optimize->add_option("--zeta", settings.oc.move_limit, "OC move limit");
  optimize->add_option("--eta", settings.oc.eta, "OC tuning exponent");
  optimize->add_option("--gap-tol", settings.po.gap_tol, "Relative gap for the certificate");
  optimize->add_option("--out", out, "Output directory")->required();

  int order = 2;
  CLI::App* certify = app.add_subcommand("certify", "Bound a design with one relaxation order");
  certify->add_option("file", file, "Problem file")->required()->check(CLI::ExistingFile);
  certify->add_option("--areas", areas, "Comma-separated element areas")->required();
  certify->add_option("--order", order, "Relaxation order")->required()->check(CLI::PositiveNumber);
  certify->add_option("--gap-tol", settings.po.gap_tol, "Relative gap for the certificate");

  std::string case_name;
  std::string methods = "oc,nlp,nsdp,po";
  CLI::App* bench = app.add_subcommand("bench", "Run the shipped benchmark cases");
  bench->add_option("--case", case_name, "Single case name");
  bench->add_option("--methods", methods, "Comma-separated methods");
  bench->add_option("--out", out, "Output directory")->required();

  CLI::App* render = app.add_subcommand("render", "Write an SVG of a design");
  render->add_option("file", file, "Problem file")->required()->check(CLI::ExistingFile);
  render->add_option("--areas", areas, "Comma-separated element areas")->required();
  render->add_option("--out", out, "SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "frameopt: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*analyze) {
      const ProblemFile p = load_problem(file);
      const Design d = design_for(p.structure, areas);
      const AnalysisResult r = compliance(p.structure, d);
      const double volume = p.structure.lengths().dot(d.areas);
      std::printf("compliance %.10g\nvolume %.10g (bound %.10g)\n", r.compliance, volume,
                  p.structure.volume_bound());
      return volume <= p.structure.volume_bound() * (1.0 + 1e-9) ? kExitOk : kExitInfeasible;
    }

    if (*optimize) {
      const ProblemFile p = load_problem(file);
      settings.nlp.min_area = settings.oc.min_area;
      settings.po.max_order = order_max;
      Report report;
      report.case_name = problem_name(p, file);
      report.methods.push_back(run_method(p.structure, method, settings));
      print_method(report.methods.back());
      const std::string stem = report.case_name + "-" + method;
      write_report(report, out, stem);
      const MethodReport& m = report.methods.back();
      if (!m.areas.empty() && m.areas.size() == std::size_t(p.structure.num_elements())) {
        Design d{Eigen::Map<const Eigen::VectorXd>(m.areas.data(), Eigen::Index(m.areas.size()))};
        RenderOptions ro;
        ro.min_area = settings.oc.min_area;
        render_topology(p.structure, d, (std::filesystem::path(out) / (stem + ".svg")).string(), ro);
      }
      return exit_code(report);
    }

    if (*certify) {
      const ProblemFile p = load_problem(file);
      const Design d = design_for(p.structure, areas);
      const DesignCertificate c = certify_design(p.structure, d, order, settings.po);
      std::printf("order %d  lower %.10g  upper %.10g  gap %.3g  rank %d/%d  sdp %s\nverdict %s\n", order,
                  c.certificate.lower, c.certificate.upper, c.certificate.gap, c.certificate.rank_full,
                  c.certificate.rank_reduced, to_string(c.sdp_status).c_str(),
                  to_string(c.certificate.verdict).c_str());
      if (!c.feasible) return kExitInfeasible;
      return c.certificate.verdict == Verdict::kNumericalFailure ? kExitNumerical : kExitOk;
    }

    if (*bench) {
      const std::vector<std::string> list = split(methods);
      for (const std::string& m : list)
        if (m != "oc" && m != "nlp" && m != "nsdp" && m != "po")
          throw InvalidInput("unknown method '" + m + "'");
      std::vector<BenchmarkCase> cases;
      if (case_name.empty()) cases = build_benchmarks();
      else cases.push_back(benchmark(case_name));
      std::filesystem::create_directories(out);
      std::ofstream summary((std::filesystem::path(out) / "summary.csv").string());
      int code = kExitOk;
      bool header = true;
      for (const BenchmarkCase& bc : cases) {
        // The fine discretizations are for OC only.
        std::vector<std::string> run = list;
        if (bc.max_order == 0) {
          run.clear();
          for (const std::string& m : list)
            if (m == "oc") run.push_back(m);
        }
        if (run.empty()) continue;
        std::printf("== %s\n", bc.name.c_str());
        const Report report = run_benchmark(bc, run, settings);
        for (const MethodReport& m : report.methods) {
          print_method(m);
          if (m.areas.size() != std::size_t(bc.structure.num_elements())) continue;
          Design d{Eigen::Map<const Eigen::VectorXd>(m.areas.data(), Eigen::Index(m.areas.size()))};
          render_topology(bc.structure, d, (std::filesystem::path(out) / (bc.name + "-" + m.method + ".svg")).string());
        }
        write_report(report, out);
        std::string csv = to_csv(report);
        if (!header) csv.erase(0, csv.find('\n') + 1);
        summary << csv;
        header = false;
        code = std::max(code, exit_code(report));
      }
      return code;
    }

    if (*render) {
      const ProblemFile p = load_problem(file);
      render_topology(p.structure, design_for(p.structure, areas), out);
      return kExitOk;
    }
  } catch (const InvalidInput& e) {
    std::cerr << "frameopt: " << e.what() << "\n";
    return kExitUsage;
  } catch (const SchemaError& e) {
    std::cerr << "frameopt: " << e.what() << "\n";
    return kExitUsage;
  } catch (const MechanismError& e) {
    std::cerr << "frameopt: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "frameopt: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}

}  // namespace frameopt
