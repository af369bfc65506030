// Command line front end: convergence studies, oracle values and the
// quadrature / noise self-checks.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "nsfem/config.hpp"
#include "nsfem/harness.hpp"
#include "nsfem/mesh.hpp"
#include "nsfem/oracle.hpp"
#include "nsfem/report.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> replicates;
  std::string out;
  std::optional<int> threads;
};

nsfem::ExperimentConfig resolve(const CommonFlags& flags) {
  nsfem::ExperimentConfig c =
      flags.config_path.empty() ? nsfem::ExperimentConfig{} : nsfem::load_config(flags.config_path);
  if (flags.seed) c.seed = *flags.seed;
  if (flags.replicates) c.replicates = *flags.replicates;
  if (flags.threads) c.threads = *flags.threads;
  if (!flags.out.empty()) c.output = flags.out;
  return c;
}

void emit(const nsfem::ErrorReport& report, const std::string& path) {
  if (path.empty() || path == "-") {
    nsfem::write_csv(std::cout, report);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw nsfem::ConfigError(fmt::format("cannot write '{}'", path));
  nsfem::write_csv(out, report);
}

nsfem::BoundaryCondition parse_bc(const std::string& s) {
  if (s == "neumann") return nsfem::BoundaryCondition::kNeumann;
  if (s == "dirichlet") return nsfem::BoundaryCondition::kDirichlet;
  throw nsfem::ConfigError(fmt::format("unknown boundary condition '{}'", s));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nested finite element simulation of parabolic SPDEs with Whittle-Matern noise"};
  app.require_subcommand(1);

  CommonFlags flags;
  app.add_option("--config", flags.config_path, "Experiment config file")->check(CLI::ExistingFile);
  app.add_option("--seed", flags.seed, "Random seed");
  app.add_option("--replicates", flags.replicates, "Number of Monte Carlo replicates");
  app.add_option("--out", flags.out, "Output CSV path (default: stdout)");
  app.add_option("--threads", flags.threads, "Worker threads");

  auto* converge = app.add_subcommand("converge", "Strong error against a reference level")->fallthrough();
  auto* pathwise = app.add_subcommand("pathwise", "Relative error of one coupled path")->fallthrough();
  auto* time_rate = app.add_subcommand("time-rate", "Strong error against a reference time step")->fallthrough();

  auto* oracle = app.add_subcommand("oracle", "Spectral E||u(T)||^2 on the unit square")->fallthrough();
  double oracle_T = 0.25;
  double oracle_gamma = 1.0;
  std::string oracle_bc = "neumann";
  int oracle_cutoff = 200;
  oracle->add_option("--time", oracle_T, "Final time T");
  oracle->add_option("--gamma", oracle_gamma, "Noise smoothness");
  oracle->add_option("--bc", oracle_bc, "neumann or dirichlet");
  oracle->add_option("--cutoff", oracle_cutoff, "Modes per axis");

  auto* quad = app.add_subcommand("quad-check", "Sinc quadrature error against the dense oracle")->fallthrough();
  int quad_level = 3;
  std::vector<double> quad_gammas{0.25, 0.5, 0.75};
  std::vector<double> quad_ks{1.0, 0.5, 0.25};
  quad->add_option("--level", quad_level, "Mesh level");
  quad->add_option("--gammas", quad_gammas, "Fractional powers")->delimiter(',');
  quad->add_option("--ks", quad_ks, "Quadrature resolutions, decreasing")->delimiter(',');

  auto* noise = app.add_subcommand("noise-check", "Covariance test of sampled increments")->fallthrough();
  int noise_level = 2;
  int noise_samples = 10000;
  double noise_dt = 1.0 / 1024.0;
  std::optional<int> noise_fine;
  noise->add_option("--level", noise_level, "Mesh level");
  noise->add_option("--samples", noise_samples, "Number of increments");
  noise->add_option("--dt", noise_dt, "Time step");
  noise->add_option("--fine-level", noise_fine, "Sample on this level and restrict");

  auto* mesh_cmd = app.add_subcommand("mesh", "Dump a unit-square mesh")->fallthrough();
  int mesh_level = 1;
  mesh_cmd->add_option("--level", mesh_level, "Mesh level");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (converge->parsed() || pathwise->parsed() || time_rate->parsed()) {
      const nsfem::ExperimentConfig config = resolve(flags);
      nsfem::ErrorReport report;
      if (converge->parsed()) report = nsfem::strong_error_study(config);
      else if (pathwise->parsed()) report = nsfem::pathwise_error(config);
      else report = nsfem::time_rate_study(config);
      emit(report, config.output);
    } else if (oracle->parsed()) {
      if (!flags.config_path.empty()) {
        const nsfem::ExperimentConfig c = resolve(flags);
        oracle_T = c.final_time;
        oracle_gamma = c.model.gamma;
      }
      const auto est =
          nsfem::expected_squared_norm_with_tail(oracle_T, oracle_gamma, parse_bc(oracle_bc), oracle_cutoff);
      fmt::print("T={:.10g} gamma={:.10g} bc={} cutoff={}\n", oracle_T, oracle_gamma, oracle_bc, est.cutoff);
      fmt::print("expected_squared_norm={:.15e}\n", est.value);
      fmt::print("doubled_cutoff={:.15e}\n", est.doubled);
      fmt::print("tail_estimate={:.3e}\n", std::abs(est.doubled - est.value));
      fmt::print("tail_bound={:.3e}\n", est.tail_bound);
    } else if (quad->parsed()) {
      const nsfem::ExperimentConfig c = resolve(flags);
      const auto check = nsfem::quadrature_decay_check(quad_level, quad_gammas, quad_ks, c.seed);
      fmt::print("gamma,k,nodes,max_error\n");
      for (const auto& r : check.rows) fmt::print("{:.6g},{:.6g},{},{:.6e}\n", r.gamma, r.k, r.nodes, r.error);
      fmt::print("# {}\n", check.passed ? "PASS" : "FAIL");
      return check.passed ? 0 : kExitNumerical;
    } else if (noise->parsed()) {
      const nsfem::ExperimentConfig c = resolve(flags);
      const auto check = nsfem::noise_covariance_check(noise_level, noise_samples, noise_dt, c.seed, noise_fine);
      fmt::print("samples={} entries={} max_abs_z_cov={:.4f} max_abs_z_mean={:.4f} threshold={:.1f}\n",
                 check.samples, check.entries, check.max_abs_z, check.max_abs_z_mean, check.threshold);
      fmt::print("# {}\n", check.passed ? "PASS" : "FAIL");
      return check.passed ? 0 : kExitNumerical;
    } else if (mesh_cmd->parsed()) {
      const nsfem::Mesh mesh = nsfem::build_unit_square(mesh_level);
      if (flags.out.empty() || flags.out == "-") {
        nsfem::write_mesh(std::cout, mesh);
      } else {
        std::ofstream out(flags.out);
        if (!out) throw nsfem::ConfigError(fmt::format("cannot write '{}'", flags.out));
        nsfem::write_mesh(out, mesh);
      }
    }
  } catch (const nsfem::ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kExitConfig;
  } catch (const nsfem::UnsupportedError& e) {
    fmt::print(stderr, "unsupported: {}\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    fmt::print(stderr, "numerical failure: {}\n", e.what());
    return kExitNumerical;
  }
  return 0;
}
