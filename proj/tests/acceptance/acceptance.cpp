// End-to-end acceptance gate. Each criterion prints one PASS/FAIL line with
// the numbers that decide it; the exit code is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "edghdg/cases.hpp"
#include "edghdg/mesh.hpp"
#include "edghdg/refelem.hpp"
#include "edghdg/solve.hpp"
#include "edghdg/spaces.hpp"
#include "edghdg/verify.hpp"

using namespace edghdg;

namespace {

int failures = 0;

std::string text(const char* fmt, ...) {
  char buf[1024];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  return buf;
}

void record(const char* label, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::printf("[%s] %s: %s\n", pass ? "PASS" : "FAIL", label, detail.c_str());
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Residual bookkeeping shared by the conservation criteria: the divergence and
// normal-jump residuals of every solve in this run must stay below 1e-9.
double max_div = 0.0;
double max_jump = 0.0;
int tracked_solves = 0;

void track(const ErrorReport& rep) {
  max_div = std::max({max_div, rep.s.div_residual, rep.d.div_residual});
  max_jump = std::max({max_jump, rep.s.jump_residual, rep.d.jump_residual});
  ++tracked_solves;
}

double exact_monomial_triangle(int a, int b) {
  double binom = 1.0;
  for (int i = 1; i <= a; ++i) binom = binom * (a + b - i + 1) / i;
  return 1.0 / (binom * (a + b + 1) * (a + b + 2));
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");

  // --- Criterion 1: convergence rates, four-level uniform sweeps ------------
  const std::vector<int> levels{8, 16, 32, 64};
  std::vector<ConvergenceStudy> base;
  const auto sweep_t0 = std::chrono::steady_clock::now();
  for (int k = 1; k <= 3; ++k) {
    base.push_back(convergence_sweep(levels, k, 1.0, 1.0));
  }
  const double sweep_time = seconds_since(sweep_t0);
  {
    bool pass = sweep_time < 300.0;
    std::string detail;
    for (const ConvergenceStudy& study : base) {
      const ErrorReport& c = study.reports[study.reports.size() - 2];
      const ErrorReport& f = study.reports.back();
      const double ru_s = observed_rate(c.s.err_u, f.s.err_u, c.h, f.h);
      const double ru_d = observed_rate(c.d.err_u, f.d.err_u, c.h, f.h);
      const double rp_s = observed_rate(c.s.err_p, f.s.err_p, c.h, f.h);
      const double rp_d = observed_rate(c.d.err_p, f.d.err_p, c.h, f.h);
      const double re = observed_rate(c.energy_u_total, f.energy_u_total, c.h, f.h);
      const int k = study.k;
      pass = pass && ru_s >= k + 0.8 && ru_d >= k + 0.8 && rp_s >= k - 0.2 &&
             rp_d >= k - 0.2 && re >= k - 0.2;
      detail += text("k=%d u %.2f/%.2f p %.2f/%.2f energy %.2f; ", k, ru_s, ru_d,
                     rp_s, rp_d, re);
      for (const ErrorReport& rep : study.reports) track(rep);
    }
    detail += text("%.0f s", sweep_time);
    record("1 convergence rates", pass, detail);
  }

  // --- Criterion 2: fine-mesh velocity error magnitude ----------------------
  {
    // 2 * 34^2 = 2312 cells, the nearest even structured mesh to 2400.
    const ConvergenceStudy fine = convergence_sweep({34}, 3, 1.0, 1.0);
    const ErrorReport& rep = fine.reports[0];
    track(rep);
    const bool pass = rep.total_cells >= 2000 && rep.total_cells <= 2800 &&
                      rep.s.err_u >= 4.4e-9 / 5.0 && rep.s.err_u <= 4.4e-9 * 5.0 &&
                      rep.d.err_u >= 1.2e-8 / 5.0 && rep.d.err_u <= 1.2e-8 * 5.0;
    record("2 fine-mesh error magnitude", pass,
           text("cells=%d err_u_s=%.3e (target 4.4e-09 x5) err_u_d=%.3e (target 1.2e-08 x5)",
                rep.total_cells, rep.s.err_u, rep.d.err_u));
  }

  // --- Criterion 5: robustness across viscosity/permeability ----------------
  {
    const std::vector<int> fine_levels{32, 64};
    std::vector<std::vector<ErrorReport>> sets;
    // Reuse the k=3 baseline sweep for (mu, kappa) = (1, 1).
    sets.push_back({base[2].reports[2], base[2].reports[3]});
    for (auto [mu, kappa] : {std::pair{1.0, 1e3}, std::pair{1e-6, 1e3}}) {
      const ConvergenceStudy study = convergence_sweep(fine_levels, 3, mu, kappa);
      for (const ErrorReport& rep : study.reports) track(rep);
      sets.push_back({study.reports[0], study.reports[1]});
    }
    bool pass = true;
    double worst_spread = 0.0;
    for (int level = 0; level < 2; ++level) {
      for (int region = 0; region < 2; ++region) {
        double lo = 1e300, hi = 0.0;
        for (const auto& set : sets) {
          const RegionErrors& e = region == 0 ? set[level].s : set[level].d;
          lo = std::min(lo, e.err_u);
          hi = std::max(hi, e.err_u);
        }
        worst_spread = std::max(worst_spread, hi / lo - 1.0);
      }
    }
    pass = pass && worst_spread <= 0.02;
    double worst_ratio_err = 0.0;
    for (int level = 0; level < 2; ++level) {
      for (int set = 1; set < 3; ++set) {
        const double ratio = sets[set][level].d.err_p / sets[0][level].d.err_p;
        worst_ratio_err = std::max(worst_ratio_err, std::abs(ratio / 1e-3 - 1.0));
      }
    }
    pass = pass && worst_ratio_err <= 0.10;
    record("5 pressure robustness", pass,
           text("velocity spread %.3f%% (limit 2%%), pressure ratio off by %.3f%% from 1e-3 (limit 10%%)",
                100.0 * worst_spread, 100.0 * worst_ratio_err));
  }

  // --- Criterion 6: uniform-flow reproduction -------------------------------
  {
    const PatchResult p1 = patch_test(2, 1, 1.0, 1.0);
    const PatchResult p3 = patch_test(2, 3, 1.0, 1.0);
    record("6 patch test", p1.pass && p3.pass,
           text("k=1 deviation %.3e, k=3 deviation %.3e (limit 1e-09)",
                p1.max_deviation, p3.max_deviation));
  }

  // --- Criterion 7: structural linear algebra -------------------------------
  {
    bool pass = true;
    double worst_sym = 0.0;
    double min_eig = 1e300;
    double worst_null = 0.0;
    for (int n : {2, 4}) {
      for (int k : {1, 3}) {
        Mesh mesh = generate_mesh(n);
        classify_facets(mesh, BoundarySplit::Collapsed);
        const DofLayout layout = build_layout(mesh, k);
        ProblemConfig config = manufactured_config(manufactured_solution(1.0, 1.0));
        config.f_s = nullptr;
        config.f_d = nullptr;
        config.bc[FacetClass::GammaS].velocity = nullptr;
        config.bc[FacetClass::GammaD].normal_flux = nullptr;
        const LinearSystem sys = assemble_system(mesh, layout, config);

        double amax = 0.0;
        for (int col = 0; col < sys.A.outerSize(); ++col) {
          for (Eigen::SparseMatrix<double>::InnerIterator it(sys.A, col); it; ++it) {
            amax = std::max(amax, std::abs(it.value()));
          }
        }
        const Eigen::SparseMatrix<double> diff =
            Eigen::SparseMatrix<double>(sys.A.transpose()) - sys.A;
        double dmax = 0.0;
        for (int col = 0; col < diff.outerSize(); ++col) {
          for (Eigen::SparseMatrix<double>::InnerIterator it(diff, col); it; ++it) {
            dmax = std::max(dmax, std::abs(it.value()));
          }
        }
        worst_sym = std::max(worst_sym, dmax / amax);
        pass = pass && dmax <= 1e-12 * amax;

        // Coercivity probe: the velocity block restricted to unconstrained
        // dofs must be positive definite at the default penalty.
        std::vector<long> idx;
        for (long i = 0; i < layout.size[0]; ++i) idx.push_back(layout.offset[0] + i);
        for (long i = 0; i < layout.size[1]; ++i) {
          if (!layout.vbar_constrained[i]) idx.push_back(layout.offset[1] + i);
        }
        std::vector<int> local(layout.n_total, -1);
        for (std::size_t i = 0; i < idx.size(); ++i) local[idx[i]] = static_cast<int>(i);
        Eigen::MatrixXd block = Eigen::MatrixXd::Zero(idx.size(), idx.size());
        for (std::size_t j = 0; j < idx.size(); ++j) {
          for (Eigen::SparseMatrix<double>::InnerIterator it(sys.A, idx[j]); it; ++it) {
            if (local[it.row()] >= 0) block(local[it.row()], j) = it.value();
          }
        }
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(block,
                                                                 Eigen::EigenvaluesOnly);
        min_eig = std::min(min_eig, eig.eigenvalues().minCoeff());
        pass = pass && eig.eigenvalues().minCoeff() > 0.0;

        const SolveResult zero = solve_direct(sys);
        worst_null = std::max(worst_null, zero.x.lpNorm<Eigen::Infinity>());
        pass = pass && zero.x.lpNorm<Eigen::Infinity>() == 0.0;
      }
    }
    record("7 structural linear algebra", pass,
           text("symmetry %.2e (limit 1e-12), velocity-block lambda_min %.3e, zero-data |x| %.1e",
                worst_sym, min_eig, worst_null));
  }

  // --- Criterion 8: heterogeneous flow demonstration ------------------------
  {
    const int k = 2;
    Mesh mesh = generate_mesh(52);
    const CaseDefinition demo = demo_case();
    classify_facets(mesh, demo.split);
    const DofLayout layout = build_layout(mesh, k);
    const LinearSystem sys = assemble_system(mesh, layout, demo.config);
    const SolveResult result = solve_direct(sys);
    const SolutionFields fields(mesh, layout, result.x);
    const FluxReport flux = flux_report(fields);

    const QuadRule rule = triangle_rule(2 * k + 2);
    double div2[2] = {0.0, 0.0};
    for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
      const Cell& cell = mesh.cells[c];
      const Vec2 p0 = mesh.vertices[cell.v[0]];
      const Vec2 p1 = mesh.vertices[cell.v[1]];
      const Vec2 p2 = mesh.vertices[cell.v[2]];
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const Vec2 x = p0 + rule.points[q].x * (p1 - p0) + rule.points[q].y * (p2 - p0);
        const double d = fields.divergence(static_cast<int>(c), x);
        div2[cell.region == Region::Stokes ? 0 : 1] += rule.weights[q] * 2.0 * cell.area * d * d;
      }
    }
    const double div_s = std::sqrt(div2[0]);
    const double div_d = std::sqrt(div2[1]);
    max_div = std::max({max_div, div_s, div_d});
    max_jump = std::max(max_jump, flux.max_normal_jump);
    ++tracked_solves;

    const bool pass = mesh.cells.size() >= 5000 &&
                      std::abs(flux.balance) <= 1e-8 * flux.inflow_scale &&
                      flux.max_interface_pressure_jump > 10.0 * result.rel_residual &&
                      div_s <= 1e-9 && div_d <= 1e-9 && flux.max_normal_jump <= 1e-9;
    record("8 heterogeneous demo", pass,
           text("cells=%zu flux balance %.2e (inflow %.4e), interface pressure jump %.3e vs residual %.1e, div %.1e/%.1e",
                mesh.cells.size(), flux.balance, flux.inflow_scale,
                flux.max_interface_pressure_jump, result.rel_residual, div_s, div_d));
  }

  // --- Criteria 3 and 4: conservation residuals over every solve ------------
  record("3 pointwise mass conservation", max_div <= 1e-9,
         text("max divergence residual %.3e over %d solves (limit 1e-09)", max_div,
              tracked_solves));
  record("4 normal-trace continuity", max_jump <= 1e-9,
         text("max normal jump %.3e over %d solves (limit 1e-09)", max_jump,
              tracked_solves));

  // --- Criterion 9: quadrature and basis property suite ---------------------
  {
    const auto t0 = std::chrono::steady_clock::now();
    bool pass = true;
    double worst = 0.0;

    for (int d = 0; d <= 20; ++d) {
      const QuadRule tri = triangle_rule(d);
      for (int a = 0; a + 0 <= d; ++a) {
        for (int b = 0; a + b <= d; ++b) {
          double sum = 0.0;
          for (std::size_t q = 0; q < tri.points.size(); ++q) {
            sum += tri.weights[q] * std::pow(tri.points[q].x, a) * std::pow(tri.points[q].y, b);
          }
          const double err = std::abs(sum - exact_monomial_triangle(a, b));
          worst = std::max(worst, err);
          pass = pass && err <= 1e-13;
        }
      }
      const QuadRule seg = segment_rule(d);
      for (int a = 0; a <= d; ++a) {
        double sum = 0.0;
        for (std::size_t q = 0; q < seg.points.size(); ++q) {
          sum += seg.weights[q] * std::pow(seg.points[q].x, a);
        }
        pass = pass && std::abs(sum - 1.0 / (a + 1)) <= 1e-13;
      }
    }

    std::mt19937 rng(2026);
    std::uniform_real_distribution<double> unit(0.05, 0.9);
    std::vector<double> phi, px, mx, py, my;
    std::vector<Vec2> grad;
    for (int k = 1; k <= 6; ++k) {
      const TriangleBasis basis(k);
      const std::vector<Vec2> nodes = basis.nodes();
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        basis.eval(nodes[i], phi);
        for (std::size_t j = 0; j < phi.size(); ++j) {
          pass = pass && std::abs(phi[j] - (i == j ? 1.0 : 0.0)) <= 1e-12;
        }
      }
      for (int trial = 0; trial < 25; ++trial) {
        Vec2 p{unit(rng), unit(rng)};
        if (p.x + p.y > 0.95) {
          p.x *= 0.5;
          p.y *= 0.5;
        }
        basis.eval(p, phi);
        basis.eval_grad(p, grad);
        double sum = 0.0;
        Vec2 gsum{0.0, 0.0};
        for (std::size_t j = 0; j < phi.size(); ++j) {
          sum += phi[j];
          gsum.x += grad[j].x;
          gsum.y += grad[j].y;
        }
        pass = pass && std::abs(sum - 1.0) <= 1e-12;
        pass = pass && std::abs(gsum.x) <= 1e-10 && std::abs(gsum.y) <= 1e-10;

        const double h = 1e-7;
        basis.eval({p.x + h, p.y}, px);
        basis.eval({p.x - h, p.y}, mx);
        basis.eval({p.x, p.y + h}, py);
        basis.eval({p.x, p.y - h}, my);
        for (std::size_t j = 0; j < phi.size(); ++j) {
          const double fx = (px[j] - mx[j]) / (2 * h);
          const double fy = (py[j] - my[j]) / (2 * h);
          pass = pass && std::abs(grad[j].x - fx) <= 1e-6 * std::max(1.0, std::abs(grad[j].x));
          pass = pass && std::abs(grad[j].y - fy) <= 1e-6 * std::max(1.0, std::abs(grad[j].y));
        }
      }

      const SegmentBasis seg(k);
      const std::vector<double> snodes = seg.nodes();
      for (std::size_t i = 0; i < snodes.size(); ++i) {
        seg.eval(snodes[i], phi);
        for (std::size_t j = 0; j < phi.size(); ++j) {
          pass = pass && std::abs(phi[j] - (i == j ? 1.0 : 0.0)) <= 1e-12;
        }
      }
      for (int trial = 0; trial < 25; ++trial) {
        seg.eval(unit(rng), phi);
        double sum = 0.0;
        for (double v : phi) sum += v;
        pass = pass && std::abs(sum - 1.0) <= 1e-12;
      }
    }
    const double elapsed = seconds_since(t0);
    pass = pass && elapsed < 10.0;
    record("9 quadrature and basis properties", pass,
           text("worst exactness defect %.2e, %.2f s (limit 10 s)", worst, elapsed));
  }

  std::printf("%d of 9 criteria passed\n", 9 - failures);
  return failures;
}
