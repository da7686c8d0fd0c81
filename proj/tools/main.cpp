#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cli.hpp"

namespace cli = stieltjes::cli;

int main(int argc, char** argv) {
  CLI::App app{"Stieltjes heat equation solver"};
  app.require_subcommand(1);

  cli::RunConfig cfg;
  std::string grid = "11x11";
  double tol = 0.0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("problem", cfg.input, "problem file (JSON)")->required();
    sub->add_option("--tol", tol, "tolerance override (derivative tolerance for eval, residual limit for check)");
  };
  auto* eval = app.add_subcommand("eval", "solve and write the solution on a grid as CSV");
  add_common(eval);
  eval->add_option("--grid", grid, "grid nodes NTxNX (uniform in t and x)");
  eval->add_option("--out", cfg.out, "output path (default stdout)");
  eval->add_flag("--include-atoms", cfg.include_atoms, "add the atoms of g and h as extra nodes");
  eval->add_flag("--emit-diagnostics", cfg.emit_diagnostics, "fill the residual column");
  auto* check = app.add_subcommand("check", "run the residual and invariant checks");
  add_common(check);
  auto* radius = app.add_subcommand("radius", "estimate the series radius and compare with the gate");
  add_common(radius);
  auto* eigs = app.add_subcommand("eigs", "scan for periodic eigenvalues");
  add_common(eigs);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : cli::parse;
  }
  if (tol != 0.0) cfg.tol = tol;

  std::ostringstream out;
  int code = cli::parse;
  try {
    auto [nt, nx] = cli::parse_grid(grid);
    cfg.nt = nt;
    cfg.nx = nx;
  } catch (const std::exception& e) {
    std::cerr << "parse: " << e.what() << "\n";
    return cli::parse;
  }
  if (*eval)
    code = cli::cmd_eval(cfg, out, std::cerr);
  else if (*check)
    code = cli::cmd_check(cfg, out, std::cerr);
  else if (*radius)
    code = cli::cmd_radius(cfg, out, std::cerr);
  else if (*eigs)
    code = cli::cmd_eigs(cfg, out, std::cerr);

  if (!cfg.out.empty() && code == cli::ok) {
    std::ofstream f(cfg.out);
    if (!f) {
      std::cerr << "cannot write " << cfg.out << "\n";
      return cli::numeric;
    }
    f << out.str();
  } else {
    std::cout << out.str();
  }
  return code;
}
