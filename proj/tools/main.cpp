#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "edghdg/cases.hpp"
#include "edghdg/errors.hpp"
#include "edghdg/mesh.hpp"
#include "edghdg/solve.hpp"
#include "edghdg/verify.hpp"
#include "edghdg/vtk.hpp"

namespace {

using namespace edghdg;

struct Options {
  int k = 3;
  std::vector<int> levels{8, 16, 32, 64};
  int n = 8;
  double mu = 1.0;
  std::string kappa = "1";
  double beta_coeff = 10.0;
  bool perturb = false;
  unsigned seed = 1;
  std::string mesh_file;
  std::string out;
  std::string outdir = ".";
};

double parse_kappa(const std::string& text) {
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw InputError("kappa must be a positive number or 'case', got '" + text + "'");
  }
  if (pos != text.size() || !(value > 0.0)) {
    throw InputError("kappa must be a positive number or 'case', got '" + text + "'");
  }
  return value;
}

std::filesystem::path ensure_outdir(const Options& opt) {
  std::filesystem::path dir(opt.outdir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory " + dir.string());
  return dir;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

void print_report(const ErrorReport& rep) {
  auto line = [](const char* name, const RegionErrors& e) {
    std::printf("%s  err_u %.3e  err_p %.3e  energy_u %.3e  div %.3e  jump %.3e\n", name,
                e.err_u, e.err_p, e.energy_u, e.div_residual, e.jump_residual);
  };
  line("free-flow region ", rep.s);
  line("porous region    ", rep.d);
  std::printf("solver residual  %.3e\n", rep.solver_residual);
}

Mesh make_mesh(const Options& opt) {
  if (!opt.mesh_file.empty()) {
    Mesh mesh = read_mesh(opt.mesh_file);
    classify_facets(mesh, BoundarySplit::Collapsed);
    return mesh;
  }
  return generate_mesh(opt.n, opt.perturb, opt.seed);
}

int run_convergence(const Options& opt) {
  if (opt.kappa == "case") {
    throw InputError("the oscillatory permeability has no closed-form solution; "
                     "pass a numeric kappa");
  }
  const double kappa = parse_kappa(opt.kappa);
  const ConvergenceStudy study =
      convergence_sweep(opt.levels, opt.k, opt.mu, kappa, opt.beta_coeff, opt.perturb, opt.seed);

  const auto dir = ensure_outdir(opt);
  const auto csv_path = dir / ("convergence_k" + std::to_string(opt.k) + ".csv");
  write_text(csv_path, to_csv(study));

  if (study.reports.size() >= 2) {
    const ErrorReport& a = study.reports[study.reports.size() - 2];
    const ErrorReport& b = study.reports.back();
    std::printf("free-flow region  rate_u %.2f  rate_p %.2f\n",
                observed_rate(a.s.err_u, b.s.err_u, a.h, b.h),
                observed_rate(a.s.err_p, b.s.err_p, a.h, b.h));
    std::printf("porous region     rate_u %.2f  rate_p %.2f\n",
                observed_rate(a.d.err_u, b.d.err_u, a.h, b.h),
                observed_rate(a.d.err_p, b.d.err_p, a.h, b.h));
  }
  std::printf("wrote %s\n", csv_path.c_str());
  return 0;
}

int run_solve(const Options& opt) {
  if (opt.kappa == "case") {
    throw InputError("errors need the closed-form solution; pass a numeric kappa "
                     "(use the demo subcommand for the heterogeneous case)");
  }
  const double kappa = parse_kappa(opt.kappa);
  Mesh mesh = make_mesh(opt);
  const CaseDefinition def = manufactured_case(opt.mu, kappa, opt.beta_coeff);
  const DofLayout layout = build_layout(mesh, opt.k);
  const LinearSystem sys = assemble_system(mesh, layout, def.config);
  const SolveResult sol = solve_direct(sys);
  const SolutionFields fields(mesh, layout, sol.x);
  ErrorReport rep = compute_errors(fields, *def.exact);
  rep.h = opt.mesh_file.empty() ? 1.0 / opt.n : rep.s.h_max;
  rep.solver_residual = sol.rel_residual;
  print_report(rep);

  ConvergenceStudy study;
  study.k = opt.k;
  study.mu = opt.mu;
  study.kappa = kappa;
  study.levels = {opt.n};
  study.reports.push_back(rep);

  const auto dir = ensure_outdir(opt);
  const std::string stem = "solve_k" + std::to_string(opt.k) + "_n" + std::to_string(opt.n);
  write_text(dir / (stem + ".csv"), to_csv(study));
  write_vtk((dir / (stem + ".vtk")).string(), fields, def.config.kappa);
  std::printf("wrote %s and %s\n", (dir / (stem + ".csv")).c_str(),
              (dir / (stem + ".vtk")).c_str());
  return 0;
}

int run_demo_cmd(const Options& opt) {
  Mesh mesh = make_mesh(opt);
  const auto dir = ensure_outdir(opt);
  const std::string stem = "demo_k" + std::to_string(opt.k) + "_n" + std::to_string(opt.n);
  const auto vtk_path = dir / (stem + ".vtk");
  const DemoResult result = run_demo(mesh, opt.k, vtk_path.string(), opt.beta_coeff);

  const std::string report = format_flux_report(result.flux);
  std::fputs(report.c_str(), stdout);
  std::printf("cells %d  dofs %ld  solver residual %.3e\n", result.n_cells, result.n_dofs,
              result.solver_residual);
  write_text(dir / (stem + "_flux.txt"), report);
  std::printf("wrote %s and %s\n", vtk_path.c_str(), (dir / (stem + "_flux.txt")).c_str());
  return 0;
}

int run_mesh(const Options& opt) {
  if (!opt.mesh_file.empty()) {
    const Mesh mesh = read_mesh(opt.mesh_file);
    std::printf("%s: %zu vertices, %d free-flow cells, %d porous cells, %d interface facets\n",
                opt.mesh_file.c_str(), mesh.vertices.size(), mesh.n_cells(Region::Stokes),
                mesh.n_cells(Region::Darcy), mesh.n_facets(FacetClass::Interface));
    return 0;
  }
  const Mesh mesh = generate_mesh(opt.n, opt.perturb, opt.seed);
  const auto dir = ensure_outdir(opt);
  const auto path = opt.out.empty() ? dir / ("mesh_n" + std::to_string(opt.n) + ".txt")
                                    : std::filesystem::path(opt.out);
  write_mesh(mesh, path.string());
  std::printf("wrote %s (%zu vertices, %zu cells)\n", path.c_str(), mesh.vertices.size(),
              mesh.cells.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupled free-flow / porous-medium solver on the unit square"};
  app.require_subcommand(1);
  app.set_config("--config")->configurable(false);

  Options opt;
  auto add_common = [&](CLI::App* cmd, bool with_levels, bool with_case_flags) {
    cmd->add_option("--k", opt.k, "polynomial degree (1..6)")
        ->check(CLI::Range(1, 6))
        ->capture_default_str();
    if (with_levels) {
      cmd->add_option("--levels", opt.levels, "mesh parameters n, one per refinement level")
          ->delimiter(',')
          ->check(CLI::PositiveNumber)
          ->capture_default_str();
    }
    cmd->add_option("--n", opt.n, "mesh parameter: n x n squares, two triangles each")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    if (with_case_flags) {
      cmd->add_option("--mu", opt.mu, "viscosity")->check(CLI::PositiveNumber)->capture_default_str();
      cmd->add_option("--kappa", opt.kappa, "permeability: positive number, or 'case' for the "
                                            "heterogeneous field")
          ->capture_default_str();
    }
    cmd->add_option("--beta-coeff", opt.beta_coeff, "penalty coefficient; the penalty is coeff * k^2")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_flag("--perturb", opt.perturb, "randomly shift interior vertices (interface kept flat)");
    cmd->add_option("--seed", opt.seed, "perturbation seed")->capture_default_str();
    cmd->add_option("--outdir", opt.outdir, "output directory")
        ->envname("EDGHDG_OUTDIR")
        ->capture_default_str();
  };

  CLI::App* conv = app.add_subcommand("convergence", "manufactured-solution rate study, CSV per region");
  add_common(conv, true, true);
  CLI::App* solve = app.add_subcommand("solve", "single manufactured-solution solve, errors + VTK");
  add_common(solve, false, true);
  solve->add_option("--mesh-file", opt.mesh_file, "solve on this mesh file instead of generating one");
  CLI::App* demo = app.add_subcommand("demo", "heterogeneous-permeability flow, VTK + flux report");
  add_common(demo, false, false);
  CLI::App* meshc = app.add_subcommand("mesh", "generate a mesh file, or validate an existing one");
  add_common(meshc, false, false);
  meshc->add_option("--mesh-file", opt.mesh_file, "validate this mesh file and print its summary");
  meshc->add_option("--out", opt.out, "output mesh path (defaults into --outdir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    // The demo's mesh must carry at least 5000 cells by default.
    if (demo->parsed() && demo->count("--n") == 0) opt.n = 52;
    if (conv->parsed()) return run_convergence(opt);
    if (solve->parsed()) return run_solve(opt);
    if (demo->parsed()) return run_demo_cmd(opt);
    if (meshc->parsed()) return run_mesh(opt);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
