#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nsfem/mesh.hpp"
#include "nsfem/stepper.hpp"

namespace nsfem {

/// Constant-coefficient model selection as it appears in config files.
struct ModelConfig {
  BoundaryCondition bc = BoundaryCondition::kNeumann;
  double gamma = 1.0;
  double a1_diffusion = 1.0;
  double a1_reaction = 0.0;
  Eigen::Vector2d a1_advection = Eigen::Vector2d::Zero();
  double a2_diffusion = 1.0;
  double a2_reaction = 1.0;
  Eigen::Vector2d a2_advection = Eigen::Vector2d::Zero();
  /// "none" or "sin".
  std::string nonlinearity = "none";
  double lipschitz = 1.0;
  /// Constant initial value; 0 gives the zero initial condition.
  double initial_value = 0.0;

  ModelSpec to_model() const;
};

struct ExperimentConfig {
  ModelConfig model;

  double final_time = 1.0;
  /// Time step of the coarse runs.
  double dt = 1.0 / 1024.0;
  /// Time step of the reference run; defaults to dt.
  std::optional<double> dt_ref;
  /// Fixed quadrature resolution; unset selects default_resolution per level.
  std::optional<double> k;
  double c0 = 1.0;
  double tol = kDefaultTolerance;

  int level_min = 2;
  int level_max = 4;
  int level_ref = 6;
  /// Mesh level of the time-rate study.
  int time_level = 5;
  /// Time steps of the time-rate study.
  std::vector<double> dt_list;

  int replicates = 1;
  std::uint64_t seed = 0;
  std::string output;
  int threads = 1;

  /// Lets level_ref coincide with level_max. Test use only; not settable
  /// from files.
  bool allow_degenerate = false;

  double reference_dt() const { return dt_ref.value_or(dt); }
  /// Quadrature resolution used on a mesh of size h.
  double resolution_for(double h) const;

  /// Throws ConfigError when invariants are violated.
  void validate_spatial() const;
  void validate_time() const;
};

/// Parses the `[model]`, `[scheme]`, `[experiment]` key-value format.
/// Unknown sections or keys are ConfigErrors.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

}  // namespace nsfem
